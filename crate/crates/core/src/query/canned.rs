//! The extraction queries used to feed process assembly and review.

use std::collections::BTreeMap;

use super::{parse_query, Query};

const CANNED: [(&str, &str); 8] = [
    (
        "common-goals",
        "SELECT ?network ?goal ?description WHERE { ?network hasCommonGoal ?goal . ?goal description ?description }",
    ),
    (
        "relationships",
        "SELECT ?relationship ?type ?p1 ?p2 ?duration WHERE { ?network hasRelationship ?relationship . \
         ?relationship hasType ?type . ?relationship P1 ?p1 . ?relationship P2 ?p2 . \
         ?relationship hasDuration ?duration }",
    ),
    (
        "topologies",
        "SELECT ?topology ?power ?duration ?type WHERE { ?network hasTopology ?topology . \
         ?topology hasPower ?power . ?topology hasDuration ?duration . ?topology hasType ?type }",
    ),
    ("participants-roles", "SELECT ?name ?role WHERE { ?P name ?name . ?P playRole ?role }"),
    (
        "abstract-services",
        "SELECT ?participant ?service WHERE { ?participant provideAService ?service }",
    ),
    (
        "business-services",
        "SELECT ?participant ?service WHERE { ?participant provideBusinessService ?service }",
    ),
    (
        "dependencies",
        "SELECT ?dependency ?from ?to ?resource ?coordinator WHERE { \
         ?dependency a DependencyBetweenBusinessServices . ?dependency fromBusinessService ?from . \
         ?dependency toBusinessService ?to . ?dependency containResource ?resource . \
         ?dependency isCoordinatedBy ?coordinator }",
    ),
    ("mis-services", "SELECT ?network ?service WHERE { ?network hasMISservice ?service }"),
];

pub const CANNED_NAMES: [&str; 8] = [
    "common-goals",
    "relationships",
    "topologies",
    "participants-roles",
    "abstract-services",
    "business-services",
    "dependencies",
    "mis-services",
];

pub fn canned_queries() -> BTreeMap<&'static str, Query> {
    CANNED
        .iter()
        .map(|(name, text)| (*name, parse_query(text).expect("canned queries are well formed")))
        .collect()
}

pub fn canned_query(name: &str) -> Option<Query> {
    CANNED.iter().find(|(n, _)| *n == name).map(|(_, text)| parse_query(text).expect("canned queries are well formed"))
}
