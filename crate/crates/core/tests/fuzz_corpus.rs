//! Replays the checked-in fuzz corpus through the same entry points and
//! round-trip checks as the `fuzz/` targets, so the seeds stay exercised on
//! stable toolchains.

use std::path::PathBuf;

use cbp_core::bpmn::{parse_bpmn, serialize_bpmn, validate_bpmn};
use cbp_core::ingest::{parse_seed, validate_network, NetworkDoc};
use cbp_core::process::ProcessGraph;
use cbp_core::query::{parse_query, ResultTable, DEFAULT_BASE};
use cbp_core::KnowledgeBase;

const TARGETS: [&str; 8] = [
    "parse_kb_triples",
    "parse_seed",
    "parse_network_xml",
    "parse_network_json",
    "parse_query",
    "parse_sparql_results",
    "parse_process_graph",
    "validate_bpmn",
];

fn fuzz_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz")
}

fn seeds(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = fuzz_dir().join("corpus").join(target);
    let mut out: Vec<(String, Vec<u8>)> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let path = e.unwrap().path();
            (path.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&path).unwrap())
        })
        .collect();
    out.sort();
    out
}

fn run(target: &str, data: &[u8]) -> bool {
    if target == "validate_bpmn" {
        let diags = validate_bpmn(data);
        let Ok(doc) = parse_bpmn(data) else { return false };
        assert!(diags.is_empty());
        for pretty in [true, false] {
            assert_eq!(parse_bpmn(serialize_bpmn(&doc, pretty).as_bytes()).as_ref(), Ok(&doc));
        }
        return true;
    }
    let Ok(text) = std::str::from_utf8(data) else { return false };
    match target {
        "parse_kb_triples" => KnowledgeBase::from_triples(text)
            .map(|kb| {
                let out = kb.to_triples();
                assert_eq!(KnowledgeBase::from_triples(&out).unwrap().to_triples(), out);
            })
            .is_ok(),
        "parse_seed" => parse_seed(text).map(|repo| repo.to_kb().is_ok()).unwrap_or(false),
        "parse_network_xml" => NetworkDoc::from_xml(text)
            .map(|doc| {
                let _ = validate_network(&doc);
                assert_eq!(NetworkDoc::from_xml(&doc.to_xml()).as_ref(), Ok(&doc));
            })
            .is_ok(),
        "parse_network_json" => NetworkDoc::from_json(text)
            .map(|doc| {
                let _ = validate_network(&doc);
                assert_eq!(NetworkDoc::from_json(&doc.to_json()).as_ref(), Ok(&doc));
            })
            .is_ok(),
        "parse_query" => parse_query(text)
            .map(|q| assert_eq!(parse_query(&q.to_string()).as_ref(), Ok(&q)))
            .is_ok(),
        "parse_sparql_results" => {
            let xml = ResultTable::from_xml(text, DEFAULT_BASE).map(|t| {
                assert_eq!(ResultTable::from_xml(&t.to_xml(DEFAULT_BASE), DEFAULT_BASE).as_ref(), Ok(&t));
            });
            let json = ResultTable::from_json(text, DEFAULT_BASE).map(|t| {
                assert_eq!(ResultTable::from_json(&t.to_json(DEFAULT_BASE), DEFAULT_BASE).as_ref(), Ok(&t));
            });
            xml.is_ok() || json.is_ok()
        }
        "parse_process_graph" => {
            let xml = ProcessGraph::from_xml(text).map(|g| {
                let _ = g.completeness_check();
                assert_eq!(ProcessGraph::from_xml(&g.to_xml()).as_ref(), Ok(&g));
            });
            let json = ProcessGraph::from_json(text)
                .map(|g| assert_eq!(ProcessGraph::from_json(&g.to_json()).as_ref(), Ok(&g)));
            xml.is_ok() || json.is_ok()
        }
        other => panic!("unknown target {other}"),
    }
}

#[test]
fn every_target_has_a_binary_and_seeds() {
    let manifest = std::fs::read_to_string(fuzz_dir().join("Cargo.toml")).unwrap();
    for t in TARGETS {
        assert!(manifest.contains(&format!("name = \"{t}\"")), "{t} missing from fuzz/Cargo.toml");
        assert!(fuzz_dir().join(format!("fuzz_targets/{t}.rs")).exists(), "{t} has no source");
        assert!(!seeds(t).is_empty(), "{t} has no corpus");
    }
}

#[test]
fn corpus_seeds_replay_cleanly() {
    for t in TARGETS {
        let mut accepted = 0;
        for (name, data) in seeds(t) {
            if run(t, &data) {
                accepted += 1;
            } else {
                eprintln!("{t}/{name}: rejected");
            }
        }
        assert!(accepted > 0, "{t}: no seed is accepted by the parser");
    }
}
