//! Projects and their on-disk layout.
//!
//! Each project lives in its own directory:
//!
//! ```text
//! <data>/<id>/project.json   id, name, status, options
//!             network.xml    collaborative network document
//!             kb.triples     knowledge base after deduction
//!             report.json    deduction report
//!             graph.xml      process graph with gateway types
//!             export.bpmn    last export
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use cbp_core::ingest::NetworkDoc;
use cbp_core::process::{GatewayType, ProcessGraph, StartRule};
use cbp_core::rules::DeductionReport;
use cbp_core::{Diagnostic, KnowledgeBase};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::pipeline;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Draft,
    Deduced,
    Assembled,
    Complete,
    Exported,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Draft => "draft",
            Status::Deduced => "deduced",
            Status::Assembled => "assembled",
            Status::Complete => "complete",
            Status::Exported => "exported",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct Meta {
    id: String,
    name: String,
    status: Status,
    literal_start_rule: bool,
}

#[derive(Debug, Clone)]
pub struct Project {
    pub id: String,
    pub name: String,
    pub status: Status,
    pub literal_start_rule: bool,
    pub network: Option<NetworkDoc>,
    pub kb: Option<KnowledgeBase>,
    pub report: Option<DeductionReport>,
    pub graph: Option<ProcessGraph>,
    pub export: Option<String>,
}

fn wrong_status(op: &str, status: Status) -> Error {
    Error::Conflict(format!("cannot {op} a project in status `{}`", status.as_str()))
}

impl Project {
    pub fn new(id: &str, name: &str) -> Self {
        Project {
            id: id.to_string(),
            name: name.to_string(),
            status: Status::Draft,
            literal_start_rule: false,
            network: None,
            kb: None,
            report: None,
            graph: None,
            export: None,
        }
    }

    pub fn set_network(&mut self, seed: &KnowledgeBase, doc: NetworkDoc) -> Result<Vec<Diagnostic>, Error> {
        if self.status != Status::Draft {
            return Err(wrong_status("edit the network of", self.status));
        }
        let warnings = pipeline::check_network(seed, &doc)?;
        self.network = Some(doc);
        Ok(warnings)
    }

    /// Runs deduction from the seed. Allowed again while `deduced`, where it
    /// reproduces the same fact set.
    pub fn deduce(&mut self, seed: &KnowledgeBase) -> Result<&DeductionReport, Error> {
        if !matches!(self.status, Status::Draft | Status::Deduced) {
            return Err(wrong_status("deduce", self.status));
        }
        let doc = self.network.as_ref().ok_or_else(|| Error::Conflict("the project has no network yet".into()))?;
        let (kb, report) = pipeline::deduce(seed, doc)?;
        self.kb = Some(kb);
        self.status = Status::Deduced;
        Ok(self.report.insert(report))
    }

    pub fn assemble(&mut self, literal_start_rule: bool) -> Result<&ProcessGraph, Error> {
        if self.status != Status::Deduced {
            return Err(wrong_status("assemble", self.status));
        }
        let rule = if literal_start_rule { StartRule::Literal } else { StartRule::Restricted };
        let graph = pipeline::assemble_graph(self.kb.as_ref().expect("deduced projects hold a KB"), rule)?;
        self.literal_start_rule = literal_start_rule;
        self.status = Status::Assembled;
        self.refresh_completion(&graph);
        Ok(self.graph.insert(graph))
    }

    fn refresh_completion(&mut self, graph: &ProcessGraph) {
        if self.status == Status::Assembled && graph.completeness_check().is_empty() {
            self.status = Status::Complete;
        }
    }

    pub fn graph(&self) -> Result<&ProcessGraph, Error> {
        self.graph.as_ref().ok_or_else(|| wrong_status("inspect the process of", self.status))
    }

    pub fn assign(&mut self, gateway: &str, gateway_type: &str) -> Result<(), Error> {
        if !matches!(self.status, Status::Assembled | Status::Complete) {
            return Err(wrong_status("assign gateway types in", self.status));
        }
        let mut graph = self.graph()?.clone();
        pipeline::apply_assignments(&mut graph, &[(gateway.to_string(), gateway_type.to_string())], None)?;
        self.refresh_completion(&graph);
        self.graph = Some(graph);
        Ok(())
    }

    pub fn fill_gateways(&mut self, gateway_type: GatewayType) -> Result<Vec<String>, Error> {
        if !matches!(self.status, Status::Assembled | Status::Complete) {
            return Err(wrong_status("assign gateway types in", self.status));
        }
        let mut graph = self.graph()?.clone();
        let filled = graph.fill_unset_gateways(gateway_type);
        self.refresh_completion(&graph);
        self.graph = Some(graph);
        Ok(filled)
    }

    pub fn export(&mut self, pretty: bool) -> Result<&str, Error> {
        if !matches!(self.status, Status::Complete | Status::Exported) {
            return Err(match &self.graph {
                Some(g) if self.status == Status::Assembled => Error::Incomplete(
                    g.completeness_check(),
                    "the process has untyped gateways".into(),
                ),
                _ => wrong_status("export", self.status),
            });
        }
        let text = pipeline::export(self.graph()?, pretty)?;
        self.status = Status::Exported;
        Ok(self.export.insert(text))
    }

    pub fn save(&self, dir: &Path) -> Result<(), Error> {
        let io = |e: std::io::Error| Error::Io(format!("{}: {e}", dir.display()));
        fs::create_dir_all(dir).map_err(io)?;
        let meta = Meta {
            id: self.id.clone(),
            name: self.name.clone(),
            status: self.status,
            literal_start_rule: self.literal_start_rule,
        };
        let mut meta = serde_json::to_string_pretty(&meta).expect("project metadata serializes");
        meta.push('\n');
        let mut report = self.report.as_ref().map(|r| serde_json::to_string_pretty(r).expect("reports serialize"));
        if let Some(r) = report.as_mut() {
            r.push('\n');
        }
        let files: [(&str, Option<String>); 6] = [
            ("project.json", Some(meta)),
            ("network.xml", self.network.as_ref().map(NetworkDoc::to_xml)),
            ("kb.triples", self.kb.as_ref().map(KnowledgeBase::to_triples)),
            ("report.json", report),
            ("graph.xml", self.graph.as_ref().map(ProcessGraph::to_xml)),
            ("export.bpmn", self.export.clone()),
        ];
        for (name, content) in files {
            let path = dir.join(name);
            match content {
                Some(text) => fs::write(&path, text).map_err(io)?,
                None if path.exists() => fs::remove_file(&path).map_err(io)?,
                None => {}
            }
        }
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self, Error> {
        let read = |name: &str| -> Result<Option<String>, Error> {
            let path = dir.join(name);
            if !path.exists() {
                return Ok(None);
            }
            pipeline::read_file(&path).map(Some)
        };
        let bad = |name: &str, e: String| Error::Io(format!("{}: {e}", dir.join(name).display()));
        let meta: Meta = serde_json::from_str(&read("project.json")?.ok_or_else(|| bad("project.json", "missing".into()))?)
            .map_err(|e| bad("project.json", e.to_string()))?;
        let network = read("network.xml")?
            .map(|t| NetworkDoc::from_xml(&t).map_err(|e| bad("network.xml", e.to_string())))
            .transpose()?;
        let kb = read("kb.triples")?
            .map(|t| KnowledgeBase::from_triples(&t).map_err(|e| bad("kb.triples", e.to_string())))
            .transpose()?;
        let report = read("report.json")?
            .map(|t| serde_json::from_str(&t).map_err(|e| bad("report.json", e.to_string())))
            .transpose()?;
        let graph = read("graph.xml")?
            .map(|t| ProcessGraph::from_xml(&t).map_err(|e| bad("graph.xml", e.to_string())))
            .transpose()?;
        Ok(Project {
            id: meta.id,
            name: meta.name,
            status: meta.status,
            literal_start_rule: meta.literal_start_rule,
            network,
            kb,
            report,
            graph,
            export: read("export.bpmn")?,
        })
    }
}

/// All projects of a running service. Each project sits behind its own lock,
/// so mutations of one project are serialized while others proceed.
pub struct Store {
    root: Option<PathBuf>,
    seed: KnowledgeBase,
    projects: RwLock<BTreeMap<String, Arc<Mutex<Project>>>>,
}

impl Store {
    /// Opens `root` (created if missing) and loads every project in it.
    /// Without a root, projects live in memory only.
    pub fn open(root: Option<PathBuf>, seed: KnowledgeBase) -> Result<Self, Error> {
        let mut projects = BTreeMap::new();
        if let Some(root) = &root {
            fs::create_dir_all(root).map_err(|e| Error::Io(format!("{}: {e}", root.display())))?;
            let entries = fs::read_dir(root).map_err(|e| Error::Io(format!("{}: {e}", root.display())))?;
            for entry in entries.flatten() {
                if entry.path().join("project.json").exists() {
                    let p = Project::load(&entry.path())?;
                    projects.insert(p.id.clone(), Arc::new(Mutex::new(p)));
                }
            }
        }
        Ok(Store { root, seed, projects: RwLock::new(projects) })
    }

    pub fn seed(&self) -> &KnowledgeBase {
        &self.seed
    }

    pub fn create(&self, name: &str) -> Result<Arc<Mutex<Project>>, Error> {
        let id = uuid::Uuid::new_v4().simple().to_string();
        let project = Project::new(&id, name);
        self.persist(&project)?;
        let handle = Arc::new(Mutex::new(project));
        self.projects.write().expect("project map lock").insert(id, handle.clone());
        Ok(handle)
    }

    pub fn get(&self, id: &str) -> Result<Arc<Mutex<Project>>, Error> {
        self.projects
            .read()
            .expect("project map lock")
            .get(id)
            .cloned()
            .ok_or_else(|| Error::NotFound(format!("unknown project `{id}`")))
    }

    pub fn ids(&self) -> Vec<String> {
        self.projects.read().expect("project map lock").keys().cloned().collect()
    }

    pub fn persist(&self, project: &Project) -> Result<(), Error> {
        match &self.root {
            Some(root) => project.save(&root.join(&project.id)),
            None => Ok(()),
        }
    }
}
