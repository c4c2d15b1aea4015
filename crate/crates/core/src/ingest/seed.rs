//! The sectioned seed repository format.
//!
//! ```text
//! [roles]
//! seller: sell service; sell product
//! [abstract-services]
//! sell product: obtain order
//! [business-services]
//! obtain order | in: purchase order | out: accepted order
//! [resources]
//! purchase order
//! [coordination-services]
//! manage flow of document: purchase order
//! ```
//!
//! Sections may appear in any order and references may point forward.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::SeedError;
use crate::kb::{Id, KnowledgeBase, Value};
use crate::vocab::{Concept, Predicate};

/// The bundled `ph-mini` fixture.
pub const PH_MINI: &str = include_str!("../../fixtures/ph-mini.seed");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Section {
    Roles,
    AbstractServices,
    BusinessServices,
    Resources,
    CoordinationServices,
}

impl Section {
    fn parse(header: &str) -> Option<Self> {
        Some(match header {
            "roles" => Section::Roles,
            "abstract-services" => Section::AbstractServices,
            "business-services" => Section::BusinessServices,
            "resources" => Section::Resources,
            "coordination-services" => Section::CoordinationServices,
            _ => return None,
        })
    }

    fn concept(self) -> Concept {
        match self {
            Section::Roles => Concept::Role,
            Section::AbstractServices => Concept::AbstractService,
            Section::BusinessServices => Concept::BusinessService,
            Section::Resources => Concept::Resource,
            Section::CoordinationServices => Concept::CoordinationService,
        }
    }

    fn kind(self) -> &'static str {
        match self {
            Section::Roles => "role",
            Section::AbstractServices => "abstract service",
            Section::BusinessServices => "business service",
            Section::Resources => "resource",
            Section::CoordinationServices => "coordination service",
        }
    }
}

/// One record line. `refs` holds the colon-list; business services use
/// `inputs`/`outputs` instead.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedRecord {
    pub line: usize,
    pub section: Section,
    pub name: String,
    pub refs: Vec<String>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SeedRepository {
    records: Vec<SeedRecord>,
}

impl SeedRepository {
    pub fn records(&self) -> &[SeedRecord] {
        &self.records
    }

    pub fn of(&self, section: Section) -> impl Iterator<Item = &SeedRecord> {
        self.records.iter().filter(move |r| r.section == section)
    }

    /// Builds the asserted seed knowledge base.
    pub fn to_kb(&self) -> Result<KnowledgeBase, SeedError> {
        let mut kb = KnowledgeBase::new();
        for r in &self.records {
            let id = Id::from_name(&r.name);
            kb.add_instance(id.clone(), &r.name, &[r.section.concept()])?;
            kb.assert(&id, Predicate::Name, Value::literal(r.name.clone()))?;
        }
        for r in &self.records {
            let id = Id::from_name(&r.name);
            let link = match r.section {
                Section::Roles => Some(Predicate::PerformAService),
                Section::AbstractServices => Some(Predicate::HasBusinessService),
                Section::CoordinationServices => Some(Predicate::ManipulateResource),
                Section::BusinessServices | Section::Resources => None,
            };
            if let Some(p) = link {
                for target in &r.refs {
                    kb.assert(&id, p, Id::from_name(target))?;
                }
            }
            for input in &r.inputs {
                kb.assert(&id, Predicate::HasInput, Id::from_name(input))?;
            }
            for output in &r.outputs {
                kb.assert(&id, Predicate::HasOutput, Id::from_name(output))?;
            }
        }
        Ok(kb)
    }
}

fn split_list(text: &str, line: usize) -> Result<Vec<String>, SeedError> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.split(';')
        .map(|part| {
            let part = part.trim();
            if part.is_empty() {
                Err(SeedError::Parse { line, message: "empty name in list".into() })
            } else {
                Ok(part.to_string())
            }
        })
        .collect()
}

fn parse_record(section: Section, text: &str, line: usize) -> Result<SeedRecord, SeedError> {
    let err = |message: &str| SeedError::Parse { line, message: message.to_string() };
    let mut record = SeedRecord {
        line,
        section,
        name: String::new(),
        refs: Vec::new(),
        inputs: Vec::new(),
        outputs: Vec::new(),
    };
    match section {
        Section::BusinessServices => {
            let mut parts = text.split('|');
            record.name = parts.next().unwrap_or_default().trim().to_string();
            for part in parts {
                let part = part.trim();
                if let Some(rest) = part.strip_prefix("in:") {
                    record.inputs.extend(split_list(rest, line)?);
                } else if let Some(rest) = part.strip_prefix("out:") {
                    record.outputs.extend(split_list(rest, line)?);
                } else {
                    return Err(err("business service fields must start with `in:` or `out:`"));
                }
            }
        }
        Section::Resources => record.name = text.to_string(),
        _ => match text.split_once(':') {
            Some((name, refs)) => {
                record.name = name.trim().to_string();
                record.refs = split_list(refs, line)?;
            }
            None => record.name = text.to_string(),
        },
    }
    if record.name.is_empty() {
        return Err(err("record has an empty name"));
    }
    if record.name.contains([':', ';', '|']) {
        return Err(err("names may not contain `:`, `;` or `|`"));
    }
    Ok(record)
}

/// Parses seed text and checks name uniqueness and referential integrity.
pub fn parse_seed(text: &str) -> Result<SeedRepository, SeedError> {
    let mut section = None;
    let mut records = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if let Some(header) = trimmed.strip_prefix('[') {
            let header = header.strip_suffix(']').ok_or(SeedError::Parse {
                line,
                message: "unterminated section header".into(),
            })?;
            section = Some(Section::parse(header.trim()).ok_or_else(|| SeedError::Parse {
                line,
                message: format!("unknown section `{header}`"),
            })?);
            continue;
        }
        let Some(current) = section else {
            return Err(SeedError::Parse { line, message: "record before any section header".into() });
        };
        records.push(parse_record(current, trimmed, line)?);
    }

    // Ids are shared across kinds, so two names that slug alike clash even
    // when they live in different sections.
    let mut by_id: BTreeMap<Id, (Section, &str)> = BTreeMap::new();
    for r in &records {
        let id = Id::from_name(&r.name);
        if by_id.insert(id, (r.section, &r.name)).is_some() {
            return Err(SeedError::DuplicateName { line: r.line, name: r.name.clone() });
        }
    }
    let resolve = |line: usize, want: Section, name: &str| -> Result<(), SeedError> {
        match by_id.get(&Id::from_name(name)) {
            Some((section, _)) if *section == want => Ok(()),
            _ => Err(SeedError::BrokenReference { line, kind: want.kind(), name: name.to_string() }),
        }
    };
    for r in &records {
        let target = match r.section {
            Section::Roles => Some(Section::AbstractServices),
            Section::AbstractServices => Some(Section::BusinessServices),
            Section::CoordinationServices => Some(Section::Resources),
            _ => None,
        };
        if let Some(target) = target {
            for name in &r.refs {
                resolve(r.line, target, name)?;
            }
        }
        for name in r.inputs.iter().chain(&r.outputs) {
            resolve(r.line, Section::Resources, name)?;
        }
    }
    Ok(SeedRepository { records })
}

pub fn load_seed_str(text: &str) -> Result<KnowledgeBase, SeedError> {
    parse_seed(text)?.to_kb()
}

pub fn load_seed(path: &Path) -> Result<KnowledgeBase, SeedError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| SeedError::Io(format!("{}: {e}", path.display())))?;
    load_seed_str(&text)
}

/// Loads a seed by bundled name (`ph-mini`) or by file path.
pub fn resolve_seed(spec: &str) -> Result<KnowledgeBase, SeedError> {
    match spec {
        "ph-mini" => load_seed_str(PH_MINI),
        path => load_seed(Path::new(path)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::Pattern;

    fn id(s: &str) -> Id {
        Id::from_name(s)
    }

    #[test]
    fn ph_mini_seller_performs_three_services() {
        let kb = load_seed_str(PH_MINI).unwrap();
        let mut got: Vec<&str> =
            kb.object_ids(&id("seller"), Predicate::PerformAService).map(Id::as_str).collect();
        got.sort();
        assert_eq!(got, ["sell_items_from_stock", "sell_product", "sell_service"]);
    }

    #[test]
    fn ph_mini_instance_count_matches_line_scan() {
        // Oracle: a record is any non-blank line that is neither a comment nor
        // a section header.
        let expected = PH_MINI
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#') && !l.starts_with('['))
            .count();
        let kb = load_seed_str(PH_MINI).unwrap();
        assert_eq!(kb.instance_count(), expected);
        assert!(kb.facts().all(|f| !f.provenance.is_derived()));
    }

    #[test]
    fn empty_seed_is_empty_kb() {
        assert!(load_seed_str("").unwrap().is_empty());
        assert!(load_seed_str("# nothing\n\n[roles]\n").unwrap().is_empty());
    }

    #[test]
    fn broken_reference_reports_line() {
        let err = load_seed_str("[roles]\nseller: sell thing\n").unwrap_err();
        assert_eq!(
            err,
            SeedError::BrokenReference { line: 2, kind: "abstract service", name: "sell thing".into() }
        );
        let err = load_seed_str("[business-services]\nx | in: paper\n").unwrap_err();
        assert!(matches!(err, SeedError::BrokenReference { kind: "resource", .. }));
    }

    #[test]
    fn reference_must_hit_the_right_kind() {
        let err = load_seed_str("[roles]\nseller: paper\n[resources]\npaper\n").unwrap_err();
        assert!(matches!(err, SeedError::BrokenReference { line: 2, .. }));
    }

    #[test]
    fn duplicates_are_rejected() {
        let err = load_seed_str("[resources]\npaper\npaper\n").unwrap_err();
        assert_eq!(err, SeedError::DuplicateName { line: 3, name: "paper".into() });
        let err = load_seed_str("[resources]\nbuy\n[roles]\nbuy\n").unwrap_err();
        assert!(matches!(err, SeedError::DuplicateName { line: 4, .. }));
    }

    #[test]
    fn syntax_errors() {
        assert!(matches!(load_seed_str("seller\n"), Err(SeedError::Parse { line: 1, .. })));
        assert!(matches!(load_seed_str("[widgets]\n"), Err(SeedError::Parse { line: 1, .. })));
        assert!(matches!(load_seed_str("[roles\n"), Err(SeedError::Parse { .. })));
        assert!(matches!(
            load_seed_str("[business-services]\nx | through: y\n"),
            Err(SeedError::Parse { line: 2, .. })
        ));
        assert!(matches!(load_seed_str("[roles]\n: a\n"), Err(SeedError::Parse { .. })));
        assert!(matches!(load_seed_str("[roles]\nr: a;;b\n"), Err(SeedError::Parse { .. })));
    }

    #[test]
    fn every_seed_instance_is_named() {
        let kb = load_seed_str(PH_MINI).unwrap();
        let named = kb.matching(&Pattern::any().predicate(Predicate::Name)).len();
        assert_eq!(named, kb.instance_count());
    }

    #[test]
    fn section_order_does_not_matter() {
        let a = "[resources]\npaper\n[business-services]\nfile | in: paper\n";
        let b = "[business-services]\nfile | in: paper\n[resources]\npaper\n";
        assert_eq!(load_seed_str(a).unwrap().triples(), load_seed_str(b).unwrap().triples());
    }
}
