use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use cbp_core::bpmn::validate_bpmn;
use cbp_core::process::{GatewayType, ProcessGraph, StartRule};
use cbp_core::query::{canned_query, parse_query, run_query, CANNED_NAMES, DEFAULT_BASE};
use cbp_core::rules::{builtin_ruleset, dump_rules, run_to_fixpoint};
use cbp_core::{Diagnostic, KnowledgeBase};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::pipeline::{self, DEFAULT_SEED, SEED_ENV};
use crate::project::Store;

#[derive(Debug, Parser)]
#[command(name = "cbp", version, about = "Synthesize collaborative business processes from a network description")]
pub struct Cli {
    /// Seed repository: `ph-mini` or a path to a seed file.
    #[arg(long, global = true, env = SEED_ENV, default_value = DEFAULT_SEED)]
    pub seed: String,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a network document against the seed repository.
    Validate {
        #[arg(long)]
        network: PathBuf,
    },
    /// Ingest a network and run the deduction rules.
    Deduce {
        #[arg(long)]
        network: PathBuf,
        #[command(flatten)]
        out: Output,
        #[arg(long, value_enum, default_value_t = KbFormat::Triples)]
        format: KbFormat,
    },
    /// Build the process graph with gateways and events.
    Assemble {
        #[command(flatten)]
        input: KbInput,
        #[arg(long)]
        literal_start_rule: bool,
        #[command(flatten)]
        out: Output,
        #[arg(long, value_enum, default_value_t = GraphFormat::Xml)]
        format: GraphFormat,
    },
    /// Export a complete process as BPMN 2.0 XML.
    Export {
        /// Process graph XML written by `assemble`.
        #[arg(long, conflicts_with_all = ["kb", "network"])]
        graph: Option<PathBuf>,
        #[command(flatten)]
        input: KbInput,
        #[arg(long)]
        literal_start_rule: bool,
        /// Gateway type assignment, `GATEWAY=TYPE`; repeatable.
        #[arg(long = "assign", value_parser = pipeline::parse_assignment)]
        assignments: Vec<(String, String)>,
        /// Type given to every gateway left unset.
        #[arg(long, value_parser = parse_gateway_type)]
        default_gateway_type: Option<GatewayType>,
        /// Indent the output instead of writing a single line.
        #[arg(long)]
        pretty: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Run a canned or hand-written query.
    Query {
        /// Canned query name.
        #[arg(long, required_unless_present = "file", conflicts_with = "file")]
        name: Option<String>,
        /// File holding a SELECT query.
        #[arg(long)]
        file: Option<PathBuf>,
        #[command(flatten)]
        input: KbInput,
        #[arg(long, value_enum, default_value_t = ResultFormat::Xml)]
        format: ResultFormat,
        /// Base URI prefixed to instance ids in the results.
        #[arg(long, default_value = DEFAULT_BASE)]
        base: String,
        #[command(flatten)]
        out: Output,
    },
    /// Check a BPMN file against the schema subset and structural rules.
    Check {
        bpmn: PathBuf,
    },
    /// Print the deduction rules.
    Rules,
    /// List seed repository entries whose name contains a substring.
    Seed {
        #[arg(long, default_value = "")]
        search: String,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, env = "CBP_PORT", default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        bind: String,
        /// Directory holding one subdirectory per project; in memory if absent.
        #[arg(long, env = "CBP_DATA")]
        data: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct Output {
    /// Write here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Where the knowledge base comes from: a deduced KB file, or the seed plus
/// a network document.
#[derive(Debug, Args)]
pub struct KbInput {
    /// Knowledge base in triples form, as written by `deduce`.
    #[arg(long, conflicts_with = "network")]
    pub kb: Option<PathBuf>,
    /// Network document; deduction runs first.
    #[arg(long)]
    pub network: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KbFormat {
    Triples,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GraphFormat {
    Xml,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ResultFormat {
    Xml,
    Json,
}

fn parse_gateway_type(s: &str) -> Result<GatewayType, String> {
    s.parse().map_err(|e: cbp_core::ProcessError| e.to_string())
}

fn emit(out: &Output, text: &str, stdout: &mut dyn Write) -> Result<(), Error> {
    match &out.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
        None => stdout.write_all(text.as_bytes()).or_else(closed_pipe),
    }
}

/// A reader that stops early (`cbp seed | head`) is not an error.
fn closed_pipe(e: std::io::Error) -> Result<(), Error> {
    match e.kind() {
        std::io::ErrorKind::BrokenPipe => Ok(()),
        _ => Err(Error::Io(e.to_string())),
    }
}

fn report(diags: &[Diagnostic], stderr: &mut dyn Write) {
    for d in diags {
        let _ = writeln!(stderr, "{d}");
    }
}

fn load_kb(seed: &str, input: &KbInput, stderr: &mut dyn Write) -> Result<Option<KnowledgeBase>, Error> {
    if let Some(path) = &input.kb {
        let mut kb = KnowledgeBase::from_triples(&pipeline::read_file(path)?)
            .map_err(|e| Error::Invalid(vec![Diagnostic::error("invalid-kb", e.to_string())]))?;
        run_to_fixpoint(&mut kb, &builtin_ruleset()).map_err(|e| Error::Deduction(e.to_string()))?;
        return Ok(Some(kb));
    }
    let seed = pipeline::load_seed(seed)?;
    match &input.network {
        Some(path) => {
            let doc = pipeline::parse_network(&pipeline::read_file(path)?)?;
            report(&pipeline::check_network(&seed, &doc)?, stderr);
            Ok(Some(pipeline::deduce(&seed, &doc)?.0))
        }
        None => Ok(None),
    }
}

fn require_kb(seed: &str, input: &KbInput, stderr: &mut dyn Write) -> Result<KnowledgeBase, Error> {
    load_kb(seed, input, stderr)?.ok_or_else(|| {
        Error::Invalid(vec![Diagnostic::error("missing-input", "pass --kb or --network")])
    })
}

fn start_rule(literal: bool) -> StartRule {
    if literal {
        StartRule::Literal
    } else {
        StartRule::Restricted
    }
}

fn execute(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), Error> {
    let seed = cli.seed;
    match cli.command {
        Command::Validate { network } => {
            let seed = pipeline::load_seed(&seed)?;
            let doc = pipeline::parse_network(&pipeline::read_file(&network)?)?;
            report(&pipeline::check_network(&seed, &doc)?, stderr);
            Ok(())
        }
        Command::Deduce { network, out, format } => {
            let seed = pipeline::load_seed(&seed)?;
            let doc = pipeline::parse_network(&pipeline::read_file(&network)?)?;
            report(&pipeline::check_network(&seed, &doc)?, stderr);
            let (kb, rep) = pipeline::deduce(&seed, &doc)?;
            let _ = writeln!(
                stderr,
                "derived {} facts and {} instances in {} iterations",
                rep.derived_fact_count(),
                rep.created.len(),
                rep.iterations
            );
            let text = match format {
                KbFormat::Triples => kb.to_triples(),
                KbFormat::Json => {
                    let facts: Vec<_> = kb.facts().collect();
                    serde_json::to_string_pretty(&facts).expect("facts serialize") + "\n"
                }
            };
            emit(&out, &text, stdout)
        }
        Command::Assemble { input, literal_start_rule, out, format } => {
            let kb = require_kb(&seed, &input, stderr)?;
            let graph = pipeline::assemble_graph(&kb, start_rule(literal_start_rule))?;
            let open = graph.completeness_check();
            if !open.is_empty() {
                let _ = writeln!(stderr, "assembled; {} issue(s) to resolve before export:", open.len());
                report(&open, stderr);
            }
            let text = match format {
                GraphFormat::Xml => graph.to_xml(),
                GraphFormat::Json => graph.to_json() + "\n",
            };
            emit(&out, &text, stdout)
        }
        Command::Export { graph, input, literal_start_rule, assignments, default_gateway_type, pretty, out } => {
            let mut graph = match graph {
                Some(path) => ProcessGraph::from_xml(&pipeline::read_file(&path)?)
                    .map_err(|e| Error::Invalid(vec![Diagnostic::error("invalid-graph", e.to_string())]))?,
                None => pipeline::assemble_graph(&require_kb(&seed, &input, stderr)?, start_rule(literal_start_rule))?,
            };
            pipeline::apply_assignments(&mut graph, &assignments, default_gateway_type)?;
            let text = pipeline::export(&graph, pretty)?;
            emit(&out, &text, stdout)
        }
        Command::Query { name, file, input, format, base, out } => {
            let query = match (name, file) {
                (Some(name), _) => canned_query(&name).ok_or_else(|| {
                    Error::Query(format!("unknown query `{name}`; known: {}", CANNED_NAMES.join(", ")))
                })?,
                (None, Some(path)) => {
                    parse_query(&pipeline::read_file(&path)?).map_err(|e| Error::Query(e.to_string()))?
                }
                (None, None) => unreachable!("clap requires --name or --file"),
            };
            let kb = match load_kb(&seed, &input, stderr)? {
                Some(kb) => kb,
                None => pipeline::load_seed(&seed)?,
            };
            let table = run_query(&kb, &query);
            let text = match format {
                ResultFormat::Xml => table.to_xml(&base),
                ResultFormat::Json => table.to_json(&base),
            };
            emit(&out, &text, stdout)
        }
        Command::Check { bpmn } => {
            let bytes = std::fs::read(&bpmn).map_err(|e| Error::Io(format!("{}: {e}", bpmn.display())))?;
            let diags = validate_bpmn(&bytes);
            if diags.is_empty() {
                Ok(())
            } else {
                Err(Error::Invalid(diags))
            }
        }
        Command::Rules => {
            stdout.write_all(dump_rules(&builtin_ruleset()).as_bytes()).or_else(closed_pipe)
        }
        Command::Seed { search } => {
            let kb = pipeline::load_seed(&seed)?;
            let needle = search.to_lowercase();
            for inst in kb.instances().filter(|i| i.label.to_lowercase().contains(&needle)) {
                let concepts: Vec<&str> = inst.concepts.keys().map(|c| c.as_str()).collect();
                if let Err(e) = writeln!(stdout, "{}\t{}\t{}", inst.id, inst.label, concepts.join(",")) {
                    return closed_pipe(e);
                }
            }
            Ok(())
        }
        Command::Serve { port, bind, data } => {
            let store = Arc::new(Store::open(data, pipeline::load_seed(&seed)?)?);
            let runtime = tokio::runtime::Runtime::new().map_err(|e| Error::Internal(e.to_string()))?;
            runtime.block_on(async move {
                let listener = tokio::net::TcpListener::bind((bind.as_str(), port))
                    .await
                    .map_err(|e| Error::Io(format!("{bind}:{port}: {e}")))?;
                let _ = writeln!(stderr, "listening on http://{}/v1", listener.local_addr().map_err(|e| Error::Io(e.to_string()))?);
                axum::serve(listener, crate::http::router(store)).await.map_err(|e| Error::Io(e.to_string()))
            })
        }
    }
}

/// Runs one command and returns the process exit status.
pub fn run(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8 {
    match execute(cli, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error[{}]: {e}", e.code());
            let diags = e.diagnostics();
            if diags.len() > 1 || matches!(e, Error::Invalid(_) | Error::Incomplete(..)) {
                report(&diags, stderr);
            }
            e.exit_code()
        }
    }
}
