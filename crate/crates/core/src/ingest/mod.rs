//! Seed repositories and collaborative network documents.

pub mod network;
pub mod seed;

pub use network::{
    ingest_network, validate_network, validate_network_against, GoalDecl, NetworkDoc,
    ParticipantDecl, RelationshipDecl, TopologyDecl,
};
pub use seed::{load_seed, load_seed_str, parse_seed, resolve_seed, SeedRepository, PH_MINI};

/// The A/B scenario network: a seller and a buyer with one goal.
pub const AB_NETWORK_XML: &str = include_str!("../../fixtures/ab-network.xml");
