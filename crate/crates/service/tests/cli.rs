use std::path::Path;
use std::process::{Command, Output};

use cbp_core::bpmn::{parse_bpmn, validate_bpmn};
use cbp_core::ingest::{NetworkDoc, AB_NETWORK_XML};
use cbp_core::process::{FlowKind, ProcessGraph, START_ID};
use cbp_core::query::{ResultTable, DEFAULT_BASE};

const DIV: &str = "gw--div--mis--dep--place_order--obtain_order--purchase_order";
const CONV: &str = "gw--conv--end";

fn cbp(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cbp"))
        .current_dir(dir)
        .env_remove("CBP_SEED")
        .args(args)
        .output()
        .unwrap()
}

fn workspace() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("ab.xml"), AB_NETWORK_XML).unwrap();
    dir
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn deduce_writes_three_provide_a_service_facts_for_a() {
    let dir = workspace();
    let o = cbp(dir.path(), &["deduce", "--seed", "ph-mini", "--network", "ab.xml", "--out", "facts.txt"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let facts = std::fs::read_to_string(dir.path().join("facts.txt")).unwrap();
    let a: Vec<&str> = facts.lines().filter(|l| l.starts_with("fact A provideAService ")).collect();
    assert_eq!(a.len(), 3, "{a:?}");
    assert!(a.iter().all(|l| l.ends_with(" derived:GR1a")));
}

#[test]
fn export_with_untyped_gateways_fails_with_incomplete_process() {
    let dir = workspace();
    let o = cbp(dir.path(), &["export", "--network", "ab.xml"]);
    assert_eq!(o.status.code(), Some(6));
    assert!(stderr(&o).contains("error[incomplete-process]"));
    assert_eq!(stderr(&o).matches("error[untyped-gateway]").count(), 2);
    assert!(o.stdout.is_empty());
}

#[test]
fn query_participants_roles() {
    let dir = workspace();
    let o = cbp(dir.path(), &["query", "--name", "participants-roles", "--network", "ab.xml"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains(r#"<sparql xmlns="http://www.w3.org/2005/sparql-results#">"#));
    let table = ResultTable::from_xml(&text, DEFAULT_BASE).unwrap();
    assert_eq!(table.variables, ["name", "role"]);
    let rows: Vec<Vec<&str>> = table.rows.iter().map(|r| r.iter().map(|v| v.text()).collect()).collect();
    assert_eq!(rows, [["A", "seller"], ["B", "buyer"]]);

    let o = cbp(dir.path(), &["query", "--name", "nonsense", "--network", "ab.xml"]);
    assert_eq!(o.status.code(), Some(7));
}

#[test]
fn staged_pipeline_equals_one_shot_export() {
    let dir = workspace();
    let run = |args: &[&str]| {
        let o = cbp(dir.path(), args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", stderr(&o));
        o
    };
    run(&["deduce", "--network", "ab.xml", "--out", "kb.triples"]);
    run(&["assemble", "--kb", "kb.triples", "--out", "graph.xml"]);
    let div = format!("{DIV}=parallel");
    let conv = format!("{CONV}=data-based-exclusive");
    run(&["export", "--graph", "graph.xml", "--assign", &div, "--assign", &conv, "--out", "staged.bpmn"]);
    let one_shot = run(&["export", "--network", "ab.xml", "--assign", &div, "--assign", &conv]).stdout;
    let staged = std::fs::read(dir.path().join("staged.bpmn")).unwrap();
    assert_eq!(staged, one_shot);
    assert!(validate_bpmn(&staged).is_empty());
    assert_eq!(String::from_utf8(staged.clone()).unwrap().lines().count(), 1);
    let doc = parse_bpmn(&staged).unwrap();
    assert_eq!(doc.counts().gateways, 2);

    let o = run(&["check", "staged.bpmn"]);
    assert!(o.stderr.is_empty());
    std::fs::write(dir.path().join("broken.bpmn"), &staged[..staged.len() / 2]).unwrap();
    let o = cbp(dir.path(), &["check", "broken.bpmn"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("malformed-xml"));
}

#[test]
fn stable_exit_codes() {
    let dir = workspace();
    // Argument errors come from clap.
    assert_eq!(cbp(dir.path(), &["export", "--pretty", "--bogus"]).status.code(), Some(2));
    assert_eq!(
        cbp(dir.path(), &["export", "--network", "ab.xml", "--default-gateway-type", "complex"]).status.code(),
        Some(2)
    );
    // Missing input file.
    assert_eq!(cbp(dir.path(), &["validate", "--network", "missing.xml"]).status.code(), Some(1));
    // Invalid network.
    let mut doc = NetworkDoc::from_xml(AB_NETWORK_XML).unwrap();
    doc.participants[0].roles = vec!["pirate".into()];
    std::fs::write(dir.path().join("bad.json"), doc.to_json()).unwrap();
    let o = cbp(dir.path(), &["validate", "--network", "bad.json"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("error[unknown-role]"));
    // Unknown gateway in an assignment.
    let o = cbp(dir.path(), &["export", "--network", "ab.xml", "--assign", "gw--nope=parallel"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("unknown-gateway"));
    // No dependencies to mediate: a network whose roles never exchange anything.
    let mut lonely = NetworkDoc::from_xml(AB_NETWORK_XML).unwrap();
    for p in &mut lonely.participants {
        p.roles = vec!["seller".into()];
    }
    std::fs::write(dir.path().join("lonely.json"), lonely.to_json()).unwrap();
    assert_eq!(cbp(dir.path(), &["assemble", "--network", "lonely.json"]).status.code(), Some(5));
    // Unreadable seed.
    assert_eq!(
        cbp(dir.path(), &["deduce", "--seed", "no-such.seed", "--network", "ab.xml"]).status.code(),
        Some(3)
    );
}

#[test]
fn seed_comes_from_the_environment() {
    let dir = workspace();
    let custom = "[roles]\nsender: send\nreceiver: receive\n\
                  [abstract-services]\nsend: post letter\nreceive: read letter\n\
                  [business-services]\npost letter | out: letter\nread letter | in: letter\n\
                  [resources]\nletter\n[coordination-services]\nmail: letter\n";
    std::fs::write(dir.path().join("mail.seed"), custom).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_cbp"))
        .current_dir(dir.path())
        .env("CBP_SEED", "mail.seed")
        .args(["seed", "--search", "letter"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let listing = String::from_utf8(o.stdout).unwrap();
    let names: Vec<&str> = listing.lines().map(|l| l.split('\t').nth(1).unwrap()).collect();
    assert_eq!(names, ["letter", "post letter", "read letter"]);
}

#[test]
fn literal_start_rule_adds_initiators() {
    let dir = workspace();
    let into_start = |extra: &[&str]| {
        let mut args = vec!["assemble", "--network", "ab.xml"];
        args.extend_from_slice(extra);
        let o = cbp(dir.path(), &args);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let graph = ProcessGraph::from_xml(&String::from_utf8(o.stdout).unwrap()).unwrap();
        graph.flows_of(FlowKind::Message).filter(|f| f.target == START_ID).count()
    };
    assert_eq!(into_start(&[]), 1);
    assert_eq!(into_start(&["--literal-start-rule"]), 3);
}
