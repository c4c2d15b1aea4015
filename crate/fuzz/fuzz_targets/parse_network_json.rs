#![no_main]

use cbp_core::ingest::{validate_network, NetworkDoc};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(doc) = NetworkDoc::from_json(data) {
        let _ = validate_network(&doc);
        assert_eq!(NetworkDoc::from_json(&doc.to_json()).as_ref(), Ok(&doc));
    }
});
