use std::collections::BTreeSet;

use crate::error::ProcessError;
use crate::kb::{Id, KnowledgeBase, Value};
use crate::vocab::{Concept, Predicate};

use super::{FlowKind, Lane, Node, NodeKind, Pool, ProcessGraph};

fn task_id(participant: &Id, service: &Id) -> String {
    format!("task--{participant}--{service}")
}

fn occurrence_id(dependency: &Id) -> String {
    format!("mis--{dependency}")
}

fn single(kb: &KnowledgeBase, subject: &Id, p: Predicate) -> Option<Id> {
    kb.object_ids(subject, p).min().cloned()
}

/// The first role of `participant` (by id) performing an abstract service
/// that contains `service`.
fn role_lane(kb: &KnowledgeBase, participant: &Id, service: &Id) -> Option<Id> {
    let containing: BTreeSet<&Id> = kb.subjects(Predicate::HasBusinessService, &Value::Id(service.clone())).collect();
    let mut roles: Vec<&Id> = kb.object_ids(participant, Predicate::PlayRole).collect();
    roles.sort();
    roles
        .into_iter()
        .find(|r| kb.object_ids(r, Predicate::PerformAService).any(|a| containing.contains(a)))
        .cloned()
}

/// Builds the process graph from a deduced knowledge base: one pool per
/// participant with a lane per played role, and one mediation pool with a
/// lane per coordination service in use.
pub fn assemble(kb: &KnowledgeBase) -> Result<ProcessGraph, ProcessError> {
    let mut deps: Vec<&Id> = kb.instances_of(Concept::DependencyBetweenBusinessServices).collect();
    deps.sort();
    if deps.is_empty() {
        return Err(ProcessError::NoDependencies);
    }
    let name = kb
        .instances_of(Concept::CollaborativeNetwork)
        .min()
        .map_or("collaboration", |id| kb.label(id))
        .to_string();
    let mut graph = ProcessGraph::new(&name);

    let mut participants: Vec<&Id> = kb.instances_of(Concept::Participant).collect();
    participants.sort();
    for p in &participants {
        let pool_id = format!("pool--{p}");
        let mut lanes: Vec<Lane> = {
            let mut roles: Vec<&Id> = kb.object_ids(p, Predicate::PlayRole).collect();
            roles.sort();
            roles
                .into_iter()
                .map(|r| Lane { id: format!("lane--{p}--{r}"), name: kb.label(r).to_string(), reference: Some(r.clone()) })
                .collect()
        };
        let mut services: Vec<&Id> = kb.object_ids(p, Predicate::ProvideBusinessService).collect();
        services.sort();
        let mut placed = Vec::new();
        for s in services {
            let lane = match role_lane(kb, p, s) {
                Some(r) => format!("lane--{p}--{r}"),
                None => format!("lane--{p}"),
            };
            placed.push((s, lane));
        }
        let fallback = format!("lane--{p}");
        if lanes.is_empty() || placed.iter().any(|(_, l)| *l == fallback) {
            lanes.push(Lane { id: fallback, name: kb.label(p).to_string(), reference: None });
        }
        graph.pools.push(Pool { id: pool_id, name: kb.label(p).to_string(), participant: Some((*p).clone()), lanes });
        for (s, lane) in placed {
            let mut inputs: Vec<Id> = kb.object_ids(s, Predicate::HasInput).cloned().collect();
            let mut outputs: Vec<Id> = kb.object_ids(s, Predicate::HasOutput).cloned().collect();
            inputs.sort();
            outputs.sort();
            graph.add_node(Node {
                id: task_id(p, s),
                name: kb.label(s).to_string(),
                lane,
                kind: NodeKind::Task { participant: (*p).clone(), business_service: s.clone(), inputs, outputs },
            })?;
        }
    }
    // Partner pools in id order, mediation pool last.
    graph.pools.rotate_left(1);

    let providers = |service: &Id| -> Vec<Id> {
        let mut ps: Vec<Id> =
            kb.subjects(Predicate::ProvideBusinessService, &Value::Id(service.clone())).cloned().collect();
        ps.sort();
        ps
    };
    for e in &deps {
        let (Some(from), Some(to), Some(resource)) = (
            single(kb, e, Predicate::FromBusinessService),
            single(kb, e, Predicate::ToBusinessService),
            single(kb, e, Predicate::ContainResource),
        ) else {
            return Err(ProcessError::Malformed(format!("dependency `{e}` is missing its endpoints or resource")));
        };
        let mut coordinators: Vec<&Id> = kb.object_ids(e, Predicate::IsCoordinatedBy).collect();
        coordinators.sort();
        let Some((chosen, alternatives)) = coordinators.split_first() else {
            return Err(ProcessError::Malformed(format!("dependency `{e}` has no coordination service")));
        };
        if !alternatives.is_empty() {
            let alts: Vec<&str> = alternatives.iter().map(|a| kb.label(a)).collect();
            graph.annotations.push(format!(
                "{} is coordinated by {}; alternatives: {}",
                kb.label(e),
                kb.label(chosen),
                alts.join(", ")
            ));
        }
        let lane = format!("lane--mis--{chosen}");
        graph.add_mediation_lane(Lane { id: lane.clone(), name: kb.label(chosen).to_string(), reference: Some((*chosen).clone()) });
        let occ = occurrence_id(e);
        graph.add_node(Node {
            id: occ.clone(),
            name: format!("{}: {}", kb.label(chosen), kb.label(&resource)),
            lane,
            kind: NodeKind::MisTask {
                dependency: (*e).clone(),
                coordination_service: (*chosen).clone(),
                resource: resource.clone(),
            },
        })?;
        for p in providers(&from) {
            graph.add_flow(FlowKind::Message, &task_id(&p, &from), &occ)?;
        }
        for p in providers(&to) {
            graph.add_flow(FlowKind::Message, &occ, &task_id(&p, &to))?;
        }
    }
    graph.mediation_pool_mut().lanes.sort_by(|a, b| a.id.cmp(&b.id));

    let mut seqs: Vec<&Id> = kb.instances_of(Concept::DependencyBetweenMisServices).collect();
    seqs.sort();
    for s in seqs {
        for e1 in kb.object_ids(s, Predicate::FromDependency) {
            for e2 in kb.object_ids(s, Predicate::ToDependency) {
                if e1 != e2 {
                    graph.add_flow(FlowKind::Sequence, &occurrence_id(e1), &occurrence_id(e2))?;
                }
            }
        }
    }
    Ok(graph)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{ingest_network, load_seed_str, NetworkDoc, AB_NETWORK_XML, PH_MINI};
    use crate::rules::{builtin_ruleset, run_to_fixpoint};

    fn ab_kb() -> KnowledgeBase {
        let mut kb = load_seed_str(PH_MINI).unwrap();
        ingest_network(&mut kb, &NetworkDoc::from_xml(AB_NETWORK_XML).unwrap()).unwrap();
        run_to_fixpoint(&mut kb, &builtin_ruleset()).unwrap();
        kb
    }

    #[test]
    fn ab_counts_match_deduced_facts() {
        let kb = ab_kb();
        let g = assemble(&kb).unwrap();
        // Oracle: counts read straight off the fact list.
        let facts: Vec<_> = kb.facts().collect();
        let provided = facts.iter().filter(|f| f.predicate == Predicate::ProvideBusinessService).count();
        let deps: BTreeSet<_> = facts
            .iter()
            .filter(|f| f.predicate == Predicate::FromBusinessService)
            .map(|f| f.subject.clone())
            .collect();
        let coordinators: BTreeSet<_> = facts
            .iter()
            .filter(|f| f.predicate == Predicate::IsCoordinatedBy)
            .map(|f| f.object.clone())
            .collect();
        assert_eq!(g.pools.len(), 3);
        assert_eq!(g.nodes.len(), provided + deps.len());
        assert_eq!(g.nodes.len(), 9);
        assert_eq!(g.flows_of(FlowKind::Message).count(), 2 * deps.len());
        assert_eq!(g.mediation_pool().lanes.len(), coordinators.len());
        assert_eq!(g.mediation_pool().lanes.len(), 2);
        assert_eq!(g.flows_of(FlowKind::Sequence).count(), 2);
        g.validate().unwrap();
    }

    #[test]
    fn tasks_sit_in_role_lanes() {
        let g = assemble(&ab_kb()).unwrap();
        assert_eq!(g.node("task--A--obtain_order").unwrap().lane, "lane--A--seller");
        assert_eq!(g.node("task--B--place_order").unwrap().lane, "lane--B--buyer");
        assert_eq!(
            g.node("mis--dep--place_order--obtain_order--purchase_order").unwrap().lane,
            "lane--mis--manage_flow_of_document"
        );
    }

    #[test]
    fn no_dependencies() {
        let mut kb = load_seed_str(PH_MINI).unwrap();
        assert_eq!(assemble(&kb), Err(ProcessError::NoDependencies));
        run_to_fixpoint(&mut kb, &builtin_ruleset()).unwrap();
        assert_eq!(assemble(&kb), Err(ProcessError::NoDependencies));
    }

    #[test]
    fn single_dependency() {
        let seed = "[roles]\nsender: send\nreceiver: receive\n\
                    [abstract-services]\nsend: post letter\nreceive: read letter\n\
                    [business-services]\npost letter | out: letter\nread letter | in: letter\n\
                    [resources]\nletter\n[coordination-services]\nmail: letter\n";
        let mut kb = load_seed_str(seed).unwrap();
        let doc = NetworkDoc::from_json(
            r#"{"name":"N","participants":[{"name":"S","roles":["sender"]},{"name":"R","roles":["receiver"]}],
                "relationships":[{"type":"supplier-customer","p1":"S","p2":"R","duration":"continuous"}]}"#,
        )
        .unwrap();
        ingest_network(&mut kb, &doc).unwrap();
        run_to_fixpoint(&mut kb, &builtin_ruleset()).unwrap();
        let g = assemble(&kb).unwrap();
        let occurrences = g.nodes.iter().filter(|n| matches!(n.kind, NodeKind::MisTask { .. })).count();
        assert_eq!(occurrences, 1);
        assert_eq!(g.flows_of(FlowKind::Message).count(), 2);
        assert_eq!(g.flows_of(FlowKind::Sequence).count(), 0);
    }

    #[test]
    fn competing_coordinators_pick_the_smallest() {
        let seed = "[roles]\nsender: send\nreceiver: receive\n\
                    [abstract-services]\nsend: post letter\nreceive: read letter\n\
                    [business-services]\npost letter | out: letter\nread letter | in: letter\n\
                    [resources]\nletter\n[coordination-services]\nzeta courier: letter\nalpha mail: letter\n";
        let mut kb = load_seed_str(seed).unwrap();
        let doc = NetworkDoc::from_json(
            r#"{"name":"N","participants":[{"name":"S","roles":["sender"]},{"name":"R","roles":["receiver"]}],
                "relationships":[{"type":"supplier-customer","p1":"S","p2":"R","duration":"continuous"}]}"#,
        )
        .unwrap();
        ingest_network(&mut kb, &doc).unwrap();
        run_to_fixpoint(&mut kb, &builtin_ruleset()).unwrap();
        let g = assemble(&kb).unwrap();
        assert_eq!(g.mediation_pool().lanes.len(), 1);
        assert_eq!(g.mediation_pool().lanes[0].id, "lane--mis--alpha_mail");
        assert_eq!(g.annotations.len(), 1);
        assert!(g.annotations[0].contains("zeta courier"));
    }

    #[test]
    fn ab_events_and_gateways() {
        use crate::process::{generate_events, generate_events_with, StartRule, END_ID, START_ID};
        let mut g = assemble(&ab_kb()).unwrap();
        generate_events(&mut g);
        let e1 = "mis--dep--place_order--obtain_order--purchase_order";
        let seq: BTreeSet<(String, String)> =
            g.flows_of(FlowKind::Sequence).map(|f| (f.source.clone(), f.target.clone())).collect();
        let expect: BTreeSet<(String, String)> = [
            (START_ID, e1),
            (e1, "gw--div--mis--dep--place_order--obtain_order--purchase_order"),
            ("gw--div--mis--dep--place_order--obtain_order--purchase_order", "mis--dep--prepare_products_to_deliver--receive_products--products"),
            ("gw--div--mis--dep--place_order--obtain_order--purchase_order", "mis--dep--transfer_invoice--pay_invoice--invoice"),
            ("mis--dep--prepare_products_to_deliver--receive_products--products", "gw--conv--end"),
            ("mis--dep--transfer_invoice--pay_invoice--invoice", "gw--conv--end"),
            ("gw--conv--end", END_ID),
        ]
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
        assert_eq!(seq, expect);
        let into_start: Vec<_> = g.flows_of(FlowKind::Message).filter(|f| f.target == START_ID).collect();
        assert_eq!(into_start.len(), 1);
        assert_eq!(into_start[0].source, "task--B--place_order");
        assert_eq!(g.flows_of(FlowKind::Message).count(), 7);
        assert_eq!(g.gateways().count(), 2);
        g.validate().unwrap();

        let mut literal = assemble(&ab_kb()).unwrap();
        generate_events_with(&mut literal, StartRule::Literal);
        let starters: BTreeSet<&str> = literal
            .flows_of(FlowKind::Message)
            .filter(|f| f.target == START_ID)
            .map(|f| f.source.as_str())
            .collect();
        assert_eq!(
            starters,
            BTreeSet::from(["task--A--prepare_products_to_deliver", "task--A--transfer_invoice", "task--B--place_order"])
        );
    }

    #[test]
    fn two_independent_initiators() {
        // Two unrelated sender/receiver pairs inside one network.
        let seed = "[roles]\nsender: send\nreceiver: receive\n\
                    [abstract-services]\nsend: post letter; post parcel\nreceive: read letter; open parcel\n\
                    [business-services]\npost letter | out: letter\nread letter | in: letter\n\
                    post parcel | out: parcel\nopen parcel | in: parcel\n\
                    [resources]\nletter\nparcel\n[coordination-services]\nmail: letter; parcel\n";
        let mut kb = load_seed_str(seed).unwrap();
        let doc = NetworkDoc::from_json(
            r#"{"name":"N","participants":[{"name":"S","roles":["sender"]},{"name":"R","roles":["receiver"]}],
                "relationships":[{"type":"supplier-customer","p1":"S","p2":"R","duration":"continuous"}]}"#,
        )
        .unwrap();
        ingest_network(&mut kb, &doc).unwrap();
        run_to_fixpoint(&mut kb, &builtin_ruleset()).unwrap();
        let mut g = assemble(&kb).unwrap();
        crate::process::generate_events(&mut g);
        let into_start = g.flows_of(FlowKind::Message).filter(|f| f.target == crate::process::START_ID).count();
        assert_eq!(into_start, 2);
    }
}
