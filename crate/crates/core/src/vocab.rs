//! The closed collaboration / collaborative-process vocabulary.
//!
//! Concepts and predicates are fixed at compile time. Each predicate carries a
//! signature (domain concepts and a range) that the fact store enforces on every
//! assertion, whether the fact comes from a document or from a rule head.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::VocabError;

macro_rules! closed_enum {
    (
        $(#[$meta:meta])*
        pub enum $name:ident : $kind:literal { $($variant:ident => $text:literal),+ $(,)? }
    ) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
        #[serde(try_from = "String", into = "String")]
        pub enum $name { $($variant),+ }

        // Ordered by name so every listing is lexicographic.
        impl Ord for $name {
            fn cmp(&self, other: &Self) -> std::cmp::Ordering {
                self.as_str().cmp(other.as_str())
            }
        }

        impl PartialOrd for $name {
            fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
                Some(self.cmp(other))
            }
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self { $($name::$variant => $text),+ }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = VocabError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($text => Ok($name::$variant),)+
                    _ => Err(VocabError::Unknown { kind: $kind, name: s.to_string() }),
                }
            }
        }

        impl TryFrom<String> for $name {
            type Error = VocabError;
            fn try_from(s: String) -> Result<Self, Self::Error> { s.parse() }
        }

        impl From<$name> for String {
            fn from(v: $name) -> String { v.as_str().to_string() }
        }
    };
}

closed_enum! {
    /// Ontology classes. Instances may carry several of them at once.
    pub enum Concept: "concept" {
        CollaborativeNetwork => "CollaborativeNetwork",
        Participant => "Participant",
        Role => "Role",
        AbstractService => "AbstractService",
        BusinessService => "BusinessService",
        Resource => "Resource",
        CoordinationService => "CoordinationService",
        MisService => "MISService",
        CommonGoal => "CommonGoal",
        Relationship => "Relationship",
        Topology => "Topology",
        DependencyBetweenBusinessServices => "DependencyBetweenBusinessServices",
        DependencyBetweenMisServices => "DependencyBetweenMISServices",
    }
}

closed_enum! {
    pub enum Predicate: "predicate" {
        PlayRole => "playRole",
        PerformAService => "performAService",
        ProvideAService => "provideAService",
        HasBusinessService => "hasBusinessService",
        ProvideBusinessService => "provideBusinessService",
        HasInput => "hasInput",
        HasOutput => "hasOutput",
        HasRelationship => "hasRelationship",
        P1 => "P1",
        P2 => "P2",
        ManipulateResource => "manipulateResource",
        FromBusinessService => "fromBusinessService",
        ToBusinessService => "toBusinessService",
        ContainResource => "containResource",
        IsCoordinatedBy => "isCoordinatedBy",
        HasMisService => "hasMISservice",
        AchievesAService => "achievesAService",
        Description => "description",
        Name => "name",
        HasPower => "hasPower",
        HasDuration => "hasDuration",
        HasType => "hasType",
        HasCommonGoal => "hasCommonGoal",
        HasTopology => "hasTopology",
        FromDependency => "fromDependency",
        ToDependency => "toDependency",
    }
}

closed_enum! {
    /// Pre-declared individuals used as enumerated property values.
    pub enum EnumIndividual: "enum individual" {
        Central => "central",
        Equal => "equal",
        Hierarchical => "hierarchical",
        Continuous => "continuous",
        Discontinuous => "discontinuous",
        Star => "star",
        P2p => "P2P",
        Chain => "chain",
        Competition => "competition",
        SupplierCustomer => "supplier-customer",
        GroupOfInterest => "group-of-interest",
    }
}

/// Which enumeration an [`EnumIndividual`] belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EnumKind {
    Power,
    Duration,
    TopologyType,
    RelationshipType,
}

impl EnumIndividual {
    pub fn kind(self) -> EnumKind {
        use EnumIndividual::*;
        match self {
            Central | Equal | Hierarchical => EnumKind::Power,
            Continuous | Discontinuous => EnumKind::Duration,
            Star | P2p | Chain => EnumKind::TopologyType,
            Competition | SupplierCustomer | GroupOfInterest => EnumKind::RelationshipType,
        }
    }

    /// Parses a decision-making power value; accepts the short form "hierarchic".
    pub fn parse_power(s: &str) -> Result<Self, VocabError> {
        let v = if s == "hierarchic" { EnumIndividual::Hierarchical } else { s.parse()? };
        v.expect_kind(EnumKind::Power, s)
    }

    pub fn parse_duration(s: &str) -> Result<Self, VocabError> {
        s.parse::<Self>()?.expect_kind(EnumKind::Duration, s)
    }

    pub fn parse_relationship_type(s: &str) -> Result<Self, VocabError> {
        s.parse::<Self>()?.expect_kind(EnumKind::RelationshipType, s)
    }

    fn expect_kind(self, kind: EnumKind, raw: &str) -> Result<Self, VocabError> {
        if self.kind() == kind {
            Ok(self)
        } else {
            Err(VocabError::WrongEnumKind { name: raw.to_string(), expected: kind })
        }
    }
}

/// Allowed subject classes of a predicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Any,
    Concepts(&'static [Concept]),
}

/// Allowed object values of a predicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Range {
    Concepts(&'static [Concept]),
    Enum(&'static [EnumKind]),
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Signature {
    pub domain: Domain,
    pub range: Range,
}

impl Predicate {
    pub fn signature(self) -> Signature {
        use Concept as C;
        use Predicate::*;
        const fn sig(domain: &'static [Concept], range: &'static [Concept]) -> Signature {
            Signature { domain: Domain::Concepts(domain), range: Range::Concepts(range) }
        }
        match self {
            PlayRole => sig(&[C::Participant], &[C::Role]),
            PerformAService => sig(&[C::Role], &[C::AbstractService]),
            ProvideAService => sig(&[C::Participant], &[C::AbstractService]),
            HasBusinessService => sig(&[C::AbstractService], &[C::BusinessService]),
            ProvideBusinessService => sig(&[C::Participant], &[C::BusinessService]),
            HasInput | HasOutput => sig(&[C::BusinessService], &[C::Resource]),
            HasRelationship => sig(&[C::CollaborativeNetwork], &[C::Relationship]),
            P1 | P2 => sig(&[C::Relationship], &[C::Participant]),
            ManipulateResource => sig(&[C::CoordinationService], &[C::Resource]),
            FromBusinessService | ToBusinessService => {
                sig(&[C::DependencyBetweenBusinessServices], &[C::BusinessService])
            }
            ContainResource => sig(
                &[C::DependencyBetweenBusinessServices, C::DependencyBetweenMisServices],
                &[C::Resource],
            ),
            IsCoordinatedBy => {
                sig(&[C::DependencyBetweenBusinessServices], &[C::CoordinationService])
            }
            HasMisService => sig(&[C::CollaborativeNetwork], &[C::MisService]),
            AchievesAService => sig(&[C::CommonGoal], &[C::AbstractService]),
            HasCommonGoal => sig(&[C::CollaborativeNetwork], &[C::CommonGoal]),
            HasTopology => sig(&[C::CollaborativeNetwork], &[C::Topology]),
            FromDependency | ToDependency => sig(
                &[C::DependencyBetweenMisServices],
                &[C::DependencyBetweenBusinessServices],
            ),
            Description => Signature {
                domain: Domain::Concepts(&[C::CommonGoal]),
                range: Range::Literal,
            },
            Name => Signature { domain: Domain::Any, range: Range::Literal },
            HasPower => Signature {
                domain: Domain::Concepts(&[C::Topology]),
                range: Range::Enum(&[EnumKind::Power]),
            },
            HasDuration => Signature {
                domain: Domain::Concepts(&[C::Topology, C::Relationship]),
                range: Range::Enum(&[EnumKind::Duration]),
            },
            HasType => Signature {
                domain: Domain::Concepts(&[C::Topology, C::Relationship]),
                range: Range::Enum(&[EnumKind::TopologyType, EnumKind::RelationshipType]),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for c in Concept::ALL {
            assert_eq!(c.as_str().parse::<Concept>().unwrap(), *c);
        }
        for p in Predicate::ALL {
            assert_eq!(p.as_str().parse::<Predicate>().unwrap(), *p);
        }
        for e in EnumIndividual::ALL {
            assert_eq!(e.as_str().parse::<EnumIndividual>().unwrap(), *e);
        }
    }

    #[test]
    fn vocabulary_is_closed() {
        assert!("Person".parse::<Concept>().is_err());
        assert!("knows".parse::<Predicate>().is_err());
        assert_eq!(EnumIndividual::ALL.len(), 11);
    }

    #[test]
    fn hierarchic_is_normalized() {
        assert_eq!(EnumIndividual::parse_power("hierarchic").unwrap(), EnumIndividual::Hierarchical);
        assert!(EnumIndividual::parse_power("continuous").is_err());
    }
}
