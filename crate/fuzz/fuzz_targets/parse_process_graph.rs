#![no_main]

use cbp_core::process::ProcessGraph;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(g) = ProcessGraph::from_xml(data) {
        let _ = g.completeness_check();
        assert_eq!(ProcessGraph::from_xml(&g.to_xml()).as_ref(), Ok(&g));
    }
    if let Ok(g) = ProcessGraph::from_json(data) {
        assert_eq!(ProcessGraph::from_json(&g.to_json()).as_ref(), Ok(&g));
    }
});
