#![no_main]

use cbp_core::KnowledgeBase;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(kb) = KnowledgeBase::from_triples(data) {
        let text = kb.to_triples();
        let again = KnowledgeBase::from_triples(&text).expect("exported triples re-import");
        assert_eq!(again.to_triples(), text);
    }
});
