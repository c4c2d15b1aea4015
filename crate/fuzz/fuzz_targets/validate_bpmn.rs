#![no_main]

use cbp_core::bpmn::{parse_bpmn, serialize_bpmn, validate_bpmn};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let diags = validate_bpmn(data);
    if let Ok(doc) = parse_bpmn(data) {
        assert!(diags.is_empty());
        for pretty in [true, false] {
            let text = serialize_bpmn(&doc, pretty);
            assert_eq!(parse_bpmn(text.as_bytes()).as_ref(), Ok(&doc));
        }
    }
});
