#![no_main]

use cbp_core::ingest::{validate_network, NetworkDoc};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(doc) = NetworkDoc::from_xml(data) {
        let _ = validate_network(&doc);
        assert_eq!(NetworkDoc::from_xml(&doc.to_xml()).as_ref(), Ok(&doc));
    }
});
