//! Pipeline stages shared by the CLI and the HTTP service.

use std::path::Path;

use cbp_core::bpmn::{export_bpmn, serialize_bpmn, validate_bpmn};
use cbp_core::ingest::{ingest_network, resolve_seed, validate_network_against, NetworkDoc};
use cbp_core::process::{assemble, generate_events_with, GatewayType, ProcessGraph, StartRule};
use cbp_core::rules::{builtin_ruleset, run_to_fixpoint, DeductionReport};
use cbp_core::{Diagnostic, KnowledgeBase};

use crate::error::Error;

/// Env var naming the seed repository when `--seed` is absent.
pub const SEED_ENV: &str = "CBP_SEED";
pub const DEFAULT_SEED: &str = "ph-mini";

pub fn load_seed(spec: &str) -> Result<KnowledgeBase, Error> {
    resolve_seed(spec).map_err(|e| Error::Seed(e.to_string()))
}

/// Reads a network document, JSON if the text starts with `{`, XML otherwise.
pub fn parse_network(text: &str) -> Result<NetworkDoc, Error> {
    let parsed = if text.trim_start().starts_with('{') {
        NetworkDoc::from_json(text)
    } else {
        NetworkDoc::from_xml(text)
    };
    parsed.map_err(|e| Error::Invalid(vec![Diagnostic::error("invalid-network", e.to_string())]))
}

pub fn read_file(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn check_network(seed: &KnowledgeBase, doc: &NetworkDoc) -> Result<Vec<Diagnostic>, Error> {
    let diags = validate_network_against(doc, seed);
    if diags.iter().any(Diagnostic::is_error) {
        return Err(Error::Invalid(diags));
    }
    Ok(diags)
}

/// Ingests `doc` into a copy of `seed` and runs the rules to a fixpoint.
pub fn deduce(seed: &KnowledgeBase, doc: &NetworkDoc) -> Result<(KnowledgeBase, DeductionReport), Error> {
    check_network(seed, doc)?;
    let mut kb = seed.clone();
    ingest_network(&mut kb, doc).map_err(|e| Error::Invalid(vec![Diagnostic::error("ingest", e.to_string())]))?;
    let report = run_to_fixpoint(&mut kb, &builtin_ruleset()).map_err(|e| Error::Deduction(e.to_string()))?;
    Ok((kb, report))
}

pub fn assemble_graph(kb: &KnowledgeBase, rule: StartRule) -> Result<ProcessGraph, Error> {
    let mut graph = assemble(kb).map_err(|e| Error::Assembly(e.to_string()))?;
    generate_events_with(&mut graph, rule);
    Ok(graph)
}

/// Parses `gateway=type` pairs as given to `--assign`.
pub fn parse_assignment(spec: &str) -> Result<(String, String), String> {
    match spec.split_once('=') {
        Some((g, t)) if !g.is_empty() && !t.is_empty() => Ok((g.to_string(), t.to_string())),
        _ => Err(format!("expected GATEWAY=TYPE, got `{spec}`")),
    }
}

pub fn apply_assignments(
    graph: &mut ProcessGraph,
    assignments: &[(String, String)],
    default: Option<GatewayType>,
) -> Result<(), Error> {
    for (gateway, ty) in assignments {
        graph.assign_gateway_type(gateway, ty).map_err(Error::from_process)?;
    }
    if let Some(t) = default {
        graph.fill_unset_gateways(t);
    }
    Ok(())
}

/// Exports a complete graph and checks the bytes before handing them out.
pub fn export(graph: &ProcessGraph, pretty: bool) -> Result<String, Error> {
    let doc = export_bpmn(graph)
        .map_err(|_| Error::Incomplete(graph.completeness_check(), "the process is incomplete".into()))?;
    let text = serialize_bpmn(&doc, pretty);
    let diags = validate_bpmn(text.as_bytes());
    if !diags.is_empty() {
        return Err(Error::Internal(format!("exported BPMN failed validation: {}", diags[0])));
    }
    Ok(text)
}
