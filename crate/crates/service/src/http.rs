//! HTTP API, all routes under `/v1`. Payloads are JSON mirroring the XML
//! formats; errors carry `{"error": {code, message}, "diagnostics": [...]}`.

use std::collections::BTreeMap;
use std::sync::{Arc, MutexGuard};

use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, patch, post, put};
use axum::{Json, Router};
use cbp_core::process::GatewayType;
use cbp_core::query::{canned_query, run_query, CANNED_NAMES, DEFAULT_BASE};
use cbp_core::rules::{builtin_ruleset, dump_rules, RuleId};
use cbp_core::{Concept, Diagnostic, Fact, Provenance};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::error::Error;
use crate::pipeline;
use crate::project::{Project, Store};

type Shared = Arc<Store>;

impl IntoResponse for Error {
    fn into_response(self) -> Response {
        let status = match &self {
            Error::Invalid(_) | Error::UnsupportedType(_) | Error::Query(_) | Error::Assembly(_) => StatusCode::BAD_REQUEST,
            Error::NotFound(_) | Error::UnknownGateway(_) => StatusCode::NOT_FOUND,
            Error::Conflict(_) | Error::Incomplete(..) => StatusCode::CONFLICT,
            Error::Seed(_) | Error::Deduction(_) | Error::Io(_) | Error::Internal(_) => {
                StatusCode::INTERNAL_SERVER_ERROR
            }
        };
        let body = json!({
            "error": {"code": self.code(), "message": self.to_string()},
            "diagnostics": self.diagnostics(),
        });
        (status, Json(body)).into_response()
    }
}

pub fn router(store: Shared) -> Router {
    let project = Router::new()
        .route("/", get(get_project))
        .route("/network", put(put_network).get(get_network))
        .route("/deduce", post(deduce))
        .route("/facts", get(facts))
        .route("/assemble", post(assemble))
        .route("/graph", get(graph))
        .route("/gateways", patch(fill_gateways))
        .route("/gateways/{gateway}", patch(patch_gateway))
        .route("/completeness", get(completeness))
        .route("/export", post(export))
        .route("/query/{name}", get(query));
    Router::new()
        .route("/v1/health", get(|| async { Json(json!({"status": "ok"})) }))
        .route("/v1/rules", get(|| async { dump_rules(&builtin_ruleset()) }))
        .route("/v1/queries", get(|| async { Json(CANNED_NAMES.to_vec()) }))
        .route("/v1/seed", get(seed_entries))
        .route("/v1/projects", post(create_project).get(list_projects))
        .nest("/v1/projects/{id}", project)
        .with_state(store)
}

fn lock(handle: &std::sync::Mutex<Project>) -> MutexGuard<'_, Project> {
    handle.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
}

fn parse_json<T: for<'de> Deserialize<'de>>(body: &str) -> Result<T, Error> {
    let text = if body.trim().is_empty() { "{}" } else { body };
    serde_json::from_str(text).map_err(|e| Error::Invalid(vec![Diagnostic::error("invalid-json", e.to_string())]))
}

fn summary(p: &Project, diagnostics: &[Diagnostic]) -> Value {
    json!({
        "id": p.id,
        "name": p.name,
        "status": p.status,
        "literalStartRule": p.literal_start_rule,
        "hasNetwork": p.network.is_some(),
        "diagnostics": diagnostics,
    })
}

/// Runs `op` on the locked project and saves it when `op` succeeds.
fn mutate<T>(
    store: &Store,
    id: &str,
    op: impl FnOnce(&mut Project, &Store) -> Result<T, Error>,
) -> Result<(T, Value), Error> {
    let handle = store.get(id)?;
    let mut p = lock(&handle);
    let mut draft = p.clone();
    let out = op(&mut draft, store)?;
    store.persist(&draft)?;
    *p = draft;
    let s = summary(&p, &[]);
    Ok((out, s))
}

#[derive(Deserialize, Default)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct CreateBody {
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    network: Option<cbp_core::ingest::NetworkDoc>,
}

async fn create_project(State(store): State<Shared>, body: String) -> Result<Response, Error> {
    let body: CreateBody = parse_json(&body)?;
    if let Some(doc) = &body.network {
        pipeline::check_network(store.seed(), doc)?;
    }
    let handle = store.create(body.name.as_deref().unwrap_or("untitled"))?;
    let mut p = lock(&handle);
    let mut warnings = Vec::new();
    if let Some(doc) = body.network {
        warnings = p.set_network(store.seed(), doc)?;
        store.persist(&p)?;
    }
    Ok((StatusCode::CREATED, Json(summary(&p, &warnings))).into_response())
}

async fn list_projects(State(store): State<Shared>) -> Result<Json<Value>, Error> {
    let mut out = Vec::new();
    for id in store.ids() {
        let handle = store.get(&id)?;
        out.push(summary(&lock(&handle), &[]));
    }
    Ok(Json(Value::Array(out)))
}

async fn get_project(State(store): State<Shared>, Path(id): Path<String>) -> Result<Json<Value>, Error> {
    let handle = store.get(&id)?;
    let p = lock(&handle);
    Ok(Json(summary(&p, &[])))
}

async fn put_network(
    State(store): State<Shared>,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: String,
) -> Result<Json<Value>, Error> {
    let is_xml = headers
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.contains("xml"));
    let doc = if is_xml {
        cbp_core::ingest::NetworkDoc::from_xml(&body)
            .map_err(|e| Error::Invalid(vec![Diagnostic::error("invalid-network", e.to_string())]))?
    } else {
        cbp_core::ingest::NetworkDoc::from_json(&body)
            .map_err(|e| Error::Invalid(vec![Diagnostic::error("invalid-network", e.to_string())]))?
    };
    let (warnings, mut s) = mutate(&store, &id, |p, store| p.set_network(store.seed(), doc))?;
    s["diagnostics"] = json!(warnings);
    Ok(Json(s))
}

async fn get_network(State(store): State<Shared>, Path(id): Path<String>) -> Result<Response, Error> {
    let handle = store.get(&id)?;
    let p = lock(&handle);
    let doc = p.network.as_ref().ok_or_else(|| Error::NotFound("the project has no network yet".into()))?;
    Ok(([(header::CONTENT_TYPE, "application/json")], doc.to_json()).into_response())
}

async fn deduce(State(store): State<Shared>, Path(id): Path<String>) -> Result<Json<Value>, Error> {
    let (report, mut s) = mutate(&store, &id, |p, store| {
        let r = p.deduce(store.seed())?;
        Ok(json!({
            "iterations": r.iterations,
            "derivedFacts": r.derived_fact_count(),
            "byRule": r.derived.iter().map(|(k, v)| (k.as_str(), v.len())).collect::<BTreeMap<_, _>>(),
            "createdInstances": r.created,
        }))
    })?;
    s["report"] = report;
    Ok(Json(s))
}

#[derive(Deserialize)]
struct FactFilter {
    provenance: Option<String>,
    rule: Option<String>,
}

async fn facts(
    State(store): State<Shared>,
    Path(id): Path<String>,
    Query(filter): Query<FactFilter>,
) -> Result<Json<Vec<Fact>>, Error> {
    let snapshot = {
        let handle = store.get(&id)?;
        let p = lock(&handle);
        p.kb.as_ref().ok_or_else(|| Error::Conflict("run deduction first".into()))?.snapshot()
    };
    let bad = |what: &str, v: &str| Error::Invalid(vec![Diagnostic::error("invalid-filter", format!("unknown {what} `{v}`"))]);
    let derived_only = match filter.provenance.as_deref() {
        None => None,
        Some("asserted") => Some(false),
        Some("derived") => Some(true),
        Some(other) => return Err(bad("provenance", other)),
    };
    let rule = filter
        .rule
        .as_deref()
        .map(|r| r.parse::<RuleId>().map_err(|_| bad("rule", r)))
        .transpose()?;
    let out = snapshot
        .facts()
        .filter(|f| derived_only.is_none_or(|d| f.provenance.is_derived() == d))
        .filter(|f| rule.as_ref().is_none_or(|r| f.provenance == Provenance::Derived(*r)))
        .collect();
    Ok(Json(out))
}

#[derive(Deserialize, Default)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct AssembleBody {
    #[serde(default)]
    literal_start_rule: bool,
    #[serde(default)]
    default_gateway_type: Option<String>,
}

fn gateway_type(s: &str) -> Result<GatewayType, Error> {
    s.parse().map_err(|_| Error::UnsupportedType(s.to_string()))
}

async fn assemble(State(store): State<Shared>, Path(id): Path<String>, body: String) -> Result<Json<Value>, Error> {
    let body: AssembleBody = parse_json(&body)?;
    let default = body.default_gateway_type.as_deref().map(gateway_type).transpose()?;
    let (diags, s) = mutate(&store, &id, |p, _| {
        p.assemble(body.literal_start_rule)?;
        if let Some(t) = default {
            p.fill_gateways(t)?;
        }
        Ok(p.graph()?.completeness_check())
    })?;
    let mut s = s;
    s["diagnostics"] = json!(diags);
    Ok(Json(s))
}

#[derive(Deserialize)]
struct FormatParam {
    format: Option<String>,
    pretty: Option<bool>,
}

async fn graph(
    State(store): State<Shared>,
    Path(id): Path<String>,
    Query(q): Query<FormatParam>,
) -> Result<Response, Error> {
    let handle = store.get(&id)?;
    let p = lock(&handle);
    let g = p.graph()?;
    Ok(match q.format.as_deref() {
        Some("xml") => ([(header::CONTENT_TYPE, "application/xml")], g.to_xml()).into_response(),
        _ => ([(header::CONTENT_TYPE, "application/json")], g.to_json()).into_response(),
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GatewayBody {
    #[serde(rename = "type")]
    gateway_type: String,
}

async fn patch_gateway(
    State(store): State<Shared>,
    Path((id, gateway)): Path<(String, String)>,
    body: String,
) -> Result<Json<Value>, Error> {
    let body: GatewayBody = parse_json(&body)?;
    let (diags, mut s) = mutate(&store, &id, |p, _| {
        p.assign(&gateway, &body.gateway_type)?;
        Ok(p.graph()?.completeness_check())
    })?;
    s["diagnostics"] = json!(diags);
    Ok(Json(s))
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct FillBody {
    default_gateway_type: String,
}

async fn fill_gateways(State(store): State<Shared>, Path(id): Path<String>, body: String) -> Result<Json<Value>, Error> {
    let body: FillBody = parse_json(&body)?;
    let t = gateway_type(&body.default_gateway_type)?;
    let (filled, mut s) = mutate(&store, &id, |p, _| p.fill_gateways(t))?;
    s["filled"] = json!(filled);
    Ok(Json(s))
}

async fn completeness(State(store): State<Shared>, Path(id): Path<String>) -> Result<Json<Value>, Error> {
    let handle = store.get(&id)?;
    let p = lock(&handle);
    let g = p.graph()?;
    Ok(Json(json!({
        "status": p.status,
        "gateways": g.gateway_assignments(),
        "diagnostics": g.completeness_check(),
    })))
}

async fn export(
    State(store): State<Shared>,
    Path(id): Path<String>,
    Query(q): Query<FormatParam>,
) -> Result<Response, Error> {
    let pretty = q.pretty.unwrap_or(false);
    let (text, _) = mutate(&store, &id, |p, _| p.export(pretty).map(str::to_string))?;
    Ok(([(header::CONTENT_TYPE, "application/xml")], text).into_response())
}

async fn query(
    State(store): State<Shared>,
    Path((id, name)): Path<(String, String)>,
    Query(q): Query<FormatParam>,
) -> Result<Response, Error> {
    let query = canned_query(&name).ok_or_else(|| Error::NotFound(format!("unknown query `{name}`")))?;
    let snapshot = {
        let handle = store.get(&id)?;
        let p = lock(&handle);
        p.kb.as_ref().ok_or_else(|| Error::Conflict("run deduction first".into()))?.snapshot()
    };
    let table = run_query(&snapshot, &query);
    Ok(match q.format.as_deref() {
        Some("json") => ([(header::CONTENT_TYPE, "application/sparql-results+json")], table.to_json(DEFAULT_BASE))
            .into_response(),
        _ => ([(header::CONTENT_TYPE, "application/sparql-results+xml")], table.to_xml(DEFAULT_BASE)).into_response(),
    })
}

#[derive(Deserialize)]
struct SeedSearch {
    q: Option<String>,
}

const SEED_CONCEPTS: [Concept; 5] = [
    Concept::Role,
    Concept::AbstractService,
    Concept::BusinessService,
    Concept::Resource,
    Concept::CoordinationService,
];

async fn seed_entries(State(store): State<Shared>, Query(s): Query<SeedSearch>) -> Json<Value> {
    let needle = s.q.unwrap_or_default().to_lowercase();
    let entries: Vec<Value> = store
        .seed()
        .instances()
        .filter(|i| i.label.to_lowercase().contains(&needle))
        .filter_map(|i| {
            let concepts: Vec<&str> =
                SEED_CONCEPTS.iter().filter(|c| i.has(**c)).map(|c| c.as_str()).collect();
            (!concepts.is_empty()).then(|| json!({"id": i.id, "name": i.label, "concepts": concepts}))
        })
        .collect();
    Json(Value::Array(entries))
}
