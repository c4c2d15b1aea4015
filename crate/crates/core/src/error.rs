use thiserror::Error;

use crate::vocab::{Concept, EnumKind, Predicate};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VocabError {
    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },
    #[error("`{name}` is not a {expected:?} value")]
    WrongEnumKind { name: String, expected: EnumKind },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KbError {
    #[error("unknown instance `{0}`")]
    UnknownInstance(String),
    #[error("{predicate}({subject}, {object}) violates the predicate's domain/range: {reason}")]
    DomainRangeViolation {
        subject: String,
        predicate: Predicate,
        object: String,
        reason: String,
    },
    #[error("invalid instance id `{0}`")]
    InvalidId(String),
    #[error("instance `{0}` has an empty label")]
    EmptyLabel(String),
    #[error("instance `{0}` must carry at least one concept")]
    NoConcepts(String),
    #[error("instance id `{0}` collides with a pre-declared enumeration individual")]
    ReservedId(String),
    #[error("instance `{id}` already has label `{existing}`")]
    LabelConflict { id: String, existing: String },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("substring-before needs a non-empty separator")]
    EmptySeparator,
    #[error("contains-ignore-case needs a non-empty needle")]
    EmptyNeedle,
    #[error("rule {rule}: {message}")]
    IllFormed { rule: String, message: String },
    #[error("deduction did not reach a fixpoint within {0} iterations")]
    IterationCap(usize),
    #[error("rule {rule} produced an invalid fact: {source}")]
    InvalidHead {
        rule: String,
        #[source]
        source: KbError,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeedError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: {kind} `{name}` is not declared")]
    BrokenReference { line: usize, kind: &'static str, name: String },
    #[error("line {line}: `{name}` is declared more than once")]
    DuplicateName { line: usize, name: String },
    #[error("cannot read seed file: {0}")]
    Io(String),
    #[error(transparent)]
    Kb(#[from] KbError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IngestError {
    #[error("invalid network document: {0}")]
    Validation(String),
    #[error("unknown role `{0}`")]
    UnknownRole(String),
    #[error("unknown abstract service `{0}`")]
    UnknownAbstractService(String),
    #[error("cannot parse network document: {0}")]
    Parse(String),
    #[error(transparent)]
    Kb(#[from] KbError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("malformed query: {0}")]
    MalformedQuery(String),
    #[error("malformed result document: {0}")]
    MalformedResults(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProcessError {
    #[error("the collaboration has no dependencies to mediate")]
    NoDependencies,
    #[error("unknown gateway `{0}`")]
    UnknownGateway(String),
    #[error("unsupported gateway type `{0}`")]
    UnsupportedType(String),
    #[error("malformed process graph document: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExportError {
    #[error("process is incomplete: {}", .0.join("; "))]
    IncompleteProcess(Vec<String>),
    #[error("malformed BPMN document: {0}")]
    Malformed(String),
}

pub(crate) fn describe_concepts(concepts: &[Concept]) -> String {
    concepts.iter().map(|c| c.as_str()).collect::<Vec<_>>().join(" | ")
}
