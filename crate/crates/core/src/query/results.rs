use std::collections::BTreeSet;

use serde_json::{json, Map};

use crate::error::QueryError;
use crate::kb::{Id, Value};
use crate::xml::{self, Writer};

pub const SPARQL_RESULTS_NS: &str = "http://www.w3.org/2005/sparql-results#";

/// Prefix for instance ids rendered as `<uri>`.
pub const DEFAULT_BASE: &str = "urn:cbp:kb#";

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ResultTable {
    pub variables: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

fn malformed(msg: impl Into<String>) -> QueryError {
    QueryError::MalformedResults(msg.into())
}

fn id_from_uri(uri: &str, base: &str) -> Result<Id, QueryError> {
    let local = uri.strip_prefix(base).unwrap_or_else(|| uri.rsplit(['#', '/']).next().unwrap_or(uri));
    Id::new(local).map_err(|e| malformed(e.to_string()))
}

impl ResultTable {
    /// W3C SPARQL query results XML. Literals carry `xml:lang="en"`.
    pub fn to_xml(&self, base: &str) -> String {
        let mut w = Writer::new(true);
        w.start("sparql", &[("xmlns", SPARQL_RESULTS_NS)]);
        w.start("head", &[]);
        for v in &self.variables {
            w.empty("variable", &[("name", v)]);
        }
        w.end("head");
        let results = [("ordered", "false"), ("distinct", "false")];
        if self.rows.is_empty() {
            w.empty("results", &results);
        } else {
            w.start("results", &results);
            for row in &self.rows {
                w.start("result", &[]);
                for (name, value) in self.variables.iter().zip(row) {
                    w.start("binding", &[("name", name)]);
                    match value {
                        Value::Id(id) => w.text_element("uri", &[], &format!("{base}{id}")),
                        Value::Literal(l) => w.text_element("literal", &[("xml:lang", "en")], l),
                    }
                    w.end("binding");
                }
                w.end("result");
            }
            w.end("results");
        }
        w.end("sparql");
        w.finish()
    }

    pub fn from_xml(text: &str, base: &str) -> Result<Self, QueryError> {
        let root = xml::parse(text.as_bytes()).map_err(malformed)?;
        if root.name != "sparql" || root.namespace.as_deref() != Some(SPARQL_RESULTS_NS) {
            return Err(malformed("root must be <sparql> in the sparql-results namespace"));
        }
        let mut table = ResultTable::default();
        let mut saw_results = false;
        for section in &root.children {
            match section.name.as_str() {
                "head" => {
                    for v in &section.children {
                        if v.name == "link" {
                            continue;
                        }
                        if v.name != "variable" {
                            return Err(malformed(format!("unexpected <{}> in <head>", v.name)));
                        }
                        let name = v.require("name").map_err(malformed)?.to_string();
                        if table.variables.contains(&name) {
                            return Err(malformed(format!("variable `{name}` declared twice")));
                        }
                        table.variables.push(name);
                    }
                }
                "results" => {
                    saw_results = true;
                    for result in &section.children {
                        if result.name != "result" {
                            return Err(malformed(format!("unexpected <{}> in <results>", result.name)));
                        }
                        table.rows.push(parse_row(&table.variables, result, base)?);
                    }
                }
                other => return Err(malformed(format!("unexpected <{other}>"))),
            }
        }
        if !saw_results {
            return Err(malformed("missing <results>"));
        }
        Ok(table)
    }

    /// W3C SPARQL query results JSON.
    pub fn to_json(&self, base: &str) -> String {
        let bindings: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut m = Map::new();
                for (name, value) in self.variables.iter().zip(row) {
                    let cell = match value {
                        Value::Id(id) => json!({ "type": "uri", "value": format!("{base}{id}") }),
                        Value::Literal(l) => json!({ "type": "literal", "value": l, "xml:lang": "en" }),
                    };
                    m.insert(name.clone(), cell);
                }
                serde_json::Value::Object(m)
            })
            .collect();
        let doc = json!({ "head": { "vars": self.variables }, "results": { "bindings": bindings } });
        serde_json::to_string_pretty(&doc).expect("json values always serialize")
    }

    pub fn from_json(text: &str, base: &str) -> Result<Self, QueryError> {
        let doc: serde_json::Value = serde_json::from_str(text).map_err(|e| malformed(e.to_string()))?;
        let vars = doc["head"]["vars"].as_array().ok_or_else(|| malformed("missing head.vars"))?;
        let mut table = ResultTable::default();
        for v in vars {
            let v = v.as_str().ok_or_else(|| malformed("variable names must be strings"))?;
            if table.variables.iter().any(|x| x == v) {
                return Err(malformed(format!("variable `{v}` declared twice")));
            }
            table.variables.push(v.to_string());
        }
        let bindings = doc["results"]["bindings"]
            .as_array()
            .ok_or_else(|| malformed("missing results.bindings"))?;
        for b in bindings {
            let obj = b.as_object().ok_or_else(|| malformed("a binding row must be an object"))?;
            if obj.keys().any(|k| !table.variables.contains(k)) || obj.len() != table.variables.len() {
                return Err(malformed("a row must bind exactly the declared variables"));
            }
            let mut row = Vec::new();
            for v in &table.variables {
                let cell = &obj[v];
                let value = cell["value"].as_str().ok_or_else(|| malformed("cell without a string value"))?;
                row.push(match cell["type"].as_str() {
                    Some("uri") => Value::Id(id_from_uri(value, base)?),
                    Some("literal") => Value::Literal(value.to_string()),
                    other => return Err(malformed(format!("unsupported cell type {other:?}"))),
                });
            }
            table.rows.push(row);
        }
        Ok(table)
    }
}

fn parse_row(variables: &[String], result: &xml::Element, base: &str) -> Result<Vec<Value>, QueryError> {
    let mut seen = BTreeSet::new();
    let mut cells: Vec<Option<Value>> = vec![None; variables.len()];
    for binding in &result.children {
        if binding.name != "binding" {
            return Err(malformed(format!("unexpected <{}> in <result>", binding.name)));
        }
        let name = binding.require("name").map_err(malformed)?;
        let idx = variables
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| malformed(format!("binding for undeclared variable `{name}`")))?;
        if !seen.insert(name.to_string()) {
            return Err(malformed(format!("variable `{name}` bound twice")));
        }
        let [term] = binding.children.as_slice() else {
            return Err(malformed("a binding holds exactly one term"));
        };
        cells[idx] = Some(match term.name.as_str() {
            "uri" => Value::Id(id_from_uri(&term.text, base)?),
            "literal" => Value::Literal(term.text.clone()),
            other => return Err(malformed(format!("unsupported term <{other}>"))),
        });
    }
    cells
        .into_iter()
        .zip(variables)
        .map(|(c, v)| c.ok_or_else(|| malformed(format!("row leaves `{v}` unbound"))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ab_table() -> ResultTable {
        ResultTable {
            variables: vec!["name".into(), "role".into()],
            rows: vec![
                vec![Value::literal("A"), Value::Id(Id::new("seller").unwrap())],
                vec![Value::literal("B"), Value::Id(Id::new("buyer").unwrap())],
            ],
        }
    }

    #[test]
    fn figure_structure() {
        let xml = ab_table().to_xml(DEFAULT_BASE);
        assert!(xml.contains(r#"<sparql xmlns="http://www.w3.org/2005/sparql-results#">"#));
        assert!(xml.contains(r#"<variable name="name"/>"#));
        assert!(xml.contains(r#"<results ordered="false" distinct="false">"#));
        assert!(xml.contains(r#"<literal xml:lang="en">A</literal>"#));
        assert!(xml.contains("<uri>urn:cbp:kb#seller</uri>"));
        assert_eq!(xml.matches("<result>").count(), 2);
    }

    #[test]
    fn empty_table() {
        let t = ResultTable { variables: vec!["x".into()], rows: vec![] };
        let xml = t.to_xml(DEFAULT_BASE);
        assert!(xml.contains(r#"<results ordered="false" distinct="false"/>"#));
        assert_eq!(ResultTable::from_xml(&xml, DEFAULT_BASE).unwrap(), t);
    }

    #[test]
    fn round_trips() {
        let t = ab_table();
        assert_eq!(ResultTable::from_xml(&t.to_xml(DEFAULT_BASE), DEFAULT_BASE).unwrap(), t);
        assert_eq!(ResultTable::from_json(&t.to_json(DEFAULT_BASE), DEFAULT_BASE).unwrap(), t);
        let other = "http://example.org/kb#";
        assert_eq!(ResultTable::from_xml(&t.to_xml(other), other).unwrap(), t);
    }

    #[test]
    fn rejects_bad_documents() {
        for doc in [
            "<sparql/>",
            r#"<sparql xmlns="http://www.w3.org/2005/sparql-results#"><head/></sparql>"#,
            r#"<sparql xmlns="http://www.w3.org/2005/sparql-results#"><head><variable name="x"/></head>
               <results><result/></results></sparql>"#,
            r#"<sparql xmlns="http://www.w3.org/2005/sparql-results#"><head><variable name="x"/></head>
               <results><result><binding name="y"><literal>1</literal></binding></result></results></sparql>"#,
            r#"<sparql xmlns="http://www.w3.org/2005/sparql-results#"><head><variable name="x"/></head>
               <results><result><binding name="x"><bnode>b</bnode></binding></result></results></sparql>"#,
        ] {
            assert!(ResultTable::from_xml(doc, DEFAULT_BASE).is_err(), "{doc}");
        }
    }

    fn value() -> impl Strategy<Value = Value> {
        prop_oneof![
            "[A-Za-z0-9_.-]{1,8}".prop_map(|s| Value::Id(Id::new(s).unwrap())),
            "[ -~]{0,12}".prop_map(Value::Literal),
        ]
    }

    proptest! {
        #[test]
        fn xml_round_trip_is_identity(width in 1usize..4, cells in prop::collection::vec(value(), 0..12)) {
            let variables: Vec<String> = (0..width).map(|i| format!("v{i}")).collect();
            let rows: Vec<Vec<Value>> = cells.chunks_exact(width).map(<[Value]>::to_vec).collect();
            let t = ResultTable { variables, rows };
            prop_assert_eq!(ResultTable::from_xml(&t.to_xml(DEFAULT_BASE), DEFAULT_BASE).unwrap(), t.clone());
            prop_assert_eq!(ResultTable::from_json(&t.to_json(DEFAULT_BASE), DEFAULT_BASE).unwrap(), t);
        }
    }
}
