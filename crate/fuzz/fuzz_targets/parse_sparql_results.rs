#![no_main]

use cbp_core::query::{ResultTable, DEFAULT_BASE};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(t) = ResultTable::from_xml(data, DEFAULT_BASE) {
        assert_eq!(ResultTable::from_xml(&t.to_xml(DEFAULT_BASE), DEFAULT_BASE).as_ref(), Ok(&t));
    }
    if let Ok(t) = ResultTable::from_json(data, DEFAULT_BASE) {
        assert_eq!(ResultTable::from_json(&t.to_json(DEFAULT_BASE), DEFAULT_BASE).as_ref(), Ok(&t));
    }
});
