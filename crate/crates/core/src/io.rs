//! JSON formats for graphs, operators and magnetic potentials.
//!
//! Graph: `{"n": 4, "edges": [[0,1], [1,2]]}`.
//! Operator: `{"graph": <graph>, "diag": [..], "offdiag": [{"edge": [r,s], "re": x, "im": y}]}`
//! where the entry is `h_rs` and every edge appears exactly once.
//! Potential: `{"alpha": [{"edge": [r,s], "value": x}]}` with `value = α_rs`.

use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, GraphError, OneForm};
use crate::operators::{OperatorError, SupportedMatrix};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("schema violation: {0}")]
    Schema(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OffDiagEntry {
    pub edge: [usize; 2],
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorFile {
    pub graph: GraphFile,
    pub diag: Vec<f64>,
    pub offdiag: Vec<OffDiagEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphaEntry {
    pub edge: [usize; 2],
    pub value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphaFile {
    pub alpha: Vec<AlphaEntry>,
}

impl From<&Graph> for GraphFile {
    fn from(g: &Graph) -> Self {
        Self { n: g.n(), edges: g.edges().iter().map(|&(r, s)| [r, s]).collect() }
    }
}

impl GraphFile {
    pub fn to_graph(&self) -> Result<Graph, IoError> {
        Ok(Graph::new(self.n, self.edges.iter().map(|e| (e[0], e[1])))?)
    }
}

impl From<&SupportedMatrix> for OperatorFile {
    fn from(h: &SupportedMatrix) -> Self {
        let g = h.graph();
        Self {
            graph: GraphFile::from(g),
            diag: h.diag().to_vec(),
            offdiag: g
                .edges()
                .iter()
                .zip(h.offdiag())
                .map(|(&(r, s), z)| OffDiagEntry { edge: [r, s], re: z.re, im: z.im })
                .collect(),
        }
    }
}

impl OperatorFile {
    pub fn to_operator(&self) -> Result<SupportedMatrix, IoError> {
        let graph = self.graph.to_graph()?;
        if self.diag.len() != graph.n() {
            return Err(IoError::Schema(format!("diag has {} entries for {} vertices", self.diag.len(), graph.n())));
        }
        let mut offdiag: Vec<Option<Complex64>> = vec![None; graph.edge_count()];
        for entry in &self.offdiag {
            let [r, s] = entry.edge;
            let e = graph
                .edge_index(r, s)
                .ok_or_else(|| IoError::Schema(format!("offdiag entry ({r}, {s}) is not an edge")))?;
            if offdiag[e].is_some() {
                return Err(IoError::Schema(format!("edge ({r}, {s}) listed twice in offdiag")));
            }
            let z = Complex64::new(entry.re, entry.im);
            offdiag[e] = Some(if r < s { z } else { z.conj() });
        }
        let offdiag = offdiag
            .into_iter()
            .enumerate()
            .map(|(e, z)| {
                z.ok_or_else(|| {
                    let (r, s) = graph.edges()[e];
                    IoError::Schema(format!("edge ({r}, {s}) missing from offdiag"))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SupportedMatrix::new(Arc::new(graph), self.diag.clone(), offdiag)?)
    }
}

fn read(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|source| IoError::Read { path: path.display().to_string(), source })
}

pub fn parse_graph(text: &str) -> Result<Graph, IoError> {
    serde_json::from_str::<GraphFile>(text)?.to_graph()
}

pub fn parse_operator(text: &str) -> Result<SupportedMatrix, IoError> {
    serde_json::from_str::<OperatorFile>(text)?.to_operator()
}

pub fn read_graph(path: &Path) -> Result<Graph, IoError> {
    parse_graph(&read(path)?)
}

pub fn read_operator(path: &Path) -> Result<SupportedMatrix, IoError> {
    parse_operator(&read(path)?)
}

pub fn graph_to_json(g: &Graph) -> String {
    serde_json::to_string_pretty(&GraphFile::from(g)).expect("serializable")
}

pub fn operator_to_json(h: &SupportedMatrix) -> String {
    serde_json::to_string_pretty(&OperatorFile::from(h)).expect("serializable")
}

/// A one-form on `graph`; edges absent from the file get zero.
pub fn parse_one_form(graph: &Graph, text: &str) -> Result<OneForm, IoError> {
    let file: AlphaFile = serde_json::from_str(text)?;
    let mut values: Vec<Option<f64>> = vec![None; graph.edge_count()];
    for entry in &file.alpha {
        let [r, s] = entry.edge;
        let e =
            graph.edge_index(r, s).ok_or_else(|| IoError::Schema(format!("alpha entry ({r}, {s}) is not an edge")))?;
        if values[e].is_some() {
            return Err(IoError::Schema(format!("edge ({r}, {s}) listed twice in alpha")));
        }
        if !entry.value.is_finite() {
            return Err(IoError::Schema(format!("alpha on ({r}, {s}) is not finite")));
        }
        values[e] = Some(if r < s { entry.value } else { -entry.value });
    }
    Ok(OneForm::new(values.into_iter().map(|v| v.unwrap_or(0.0)).collect()))
}

pub fn read_one_form(graph: &Graph, path: &Path) -> Result<OneForm, IoError> {
    parse_one_form(graph, &read(path)?)
}

pub fn one_form_to_json(graph: &Graph, alpha: &OneForm) -> String {
    let file = AlphaFile {
        alpha: graph
            .edges()
            .iter()
            .zip(&alpha.values)
            .map(|(&(r, s), &value)| AlphaEntry { edge: [r, s], value })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("serializable")
}
