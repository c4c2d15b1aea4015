//! Knowledge-based synthesis of collaborative business processes.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`ingest`] loads a process-knowledge seed repository and a collaborative
//!    network document into a [`kb::KnowledgeBase`].
//! 2. [`rules`] forward-chains the deduction rules to a fixpoint, deriving
//!    abstract and business services, resource dependencies, MIS services,
//!    goal-achieving services and topology types.
//! 3. [`process`] assembles the deduced fragments into a [`process::ProcessGraph`]
//!    with one pool per partner plus a mediation pool, inserts split/join
//!    gateways and start/end events, and records human-assigned gateway types.
//! 4. [`bpmn`] exports a complete graph as BPMN 2.0 XML.
//!
//! [`query`] offers conjunctive queries over the store, with results in the
//! W3C SPARQL results XML format.

pub mod bpmn;
pub mod diag;
pub mod error;
pub mod ingest;
pub mod kb;
pub mod process;
pub mod query;
pub mod rules;
pub mod vocab;
mod xml;

pub use diag::{Diagnostic, Severity};
pub use error::{ExportError, IngestError, KbError, ProcessError, QueryError, RuleError, SeedError};
pub use kb::{Fact, Id, KnowledgeBase, Pattern, Provenance, Snapshot, Value};
pub use vocab::{Concept, EnumIndividual, Predicate};
