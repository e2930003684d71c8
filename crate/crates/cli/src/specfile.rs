//! Instance spec files: TOML with arcs addressed as `u->v` / `u->v[k]`.
//!
//! ```toml
//! [graph]
//! vertices = 4
//! edges = [[0, 1], [1, 2], [2, 0], [2, 3]]
//!
//! [tails]
//! attach = [0, 1]
//! escape = ["1/3", "1/3"]      # p(ē_j) per tail
//!
//! [kernel]                     # p per internal arc
//! "0->1" = "1/3"
//! "1->0" = "1/3"
//! # ... every internal arc; [k] selects among parallel edges
//!
//! [inflow]
//! alpha = [[1.0, 0.0], [0.0, 0.0]]   # complex as [re, im]
//!
//! [solver]                     # optional
//! method = "both"              # iterate | solve | both
//! tol = 1e-10
//! n_max = 200000
//! ```
//!
//! Probabilities may be written as TOML floats or as strings, including
//! exact fractions like `"1/3"` (recommended: decimal approximations leave
//! normalization residue above the validation tolerance).

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use tailwalk_core::dynamics::{Method, SolverOptions};
use tailwalk_core::graph::{attach_tails, build_graph, ArcId, SymmetricDigraph, TailedGraph};
use tailwalk_core::kernel::TransitionKernel;
use tailwalk_core::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("{0}")]
    Toml(#[from] toml::de::Error),
    #[error("graph: {0}")]
    Graph(#[from] tailwalk_core::graph::GraphError),
    #[error("kernel: {0}")]
    Kernel(#[from] tailwalk_core::kernel::KernelError),
    #[error("field `{field}`: {message}")]
    Field { field: String, message: String },
}

fn field_err(field: impl Into<String>, message: impl Into<String>) -> SpecError {
    SpecError::Field {
        field: field.into(),
        message: message.into(),
    }
}

/// A probability as written: float or string (decimal or `p/q` fraction).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProbValue {
    Number(f64),
    Text(String),
}

impl ProbValue {
    pub fn parse(&self, field: &str) -> Result<f64, SpecError> {
        match self {
            ProbValue::Number(x) => Ok(*x),
            ProbValue::Text(s) => {
                if let Some((num, den)) = s.split_once('/') {
                    let num: f64 = num
                        .trim()
                        .parse()
                        .map_err(|_| field_err(field, format!("bad fraction `{s}`")))?;
                    let den: f64 = den
                        .trim()
                        .parse()
                        .map_err(|_| field_err(field, format!("bad fraction `{s}`")))?;
                    if den == 0.0 {
                        return Err(field_err(field, format!("zero denominator in `{s}`")));
                    }
                    Ok(num / den)
                } else {
                    s.trim()
                        .parse()
                        .map_err(|_| field_err(field, format!("bad number `{s}`")))
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub vertices: usize,
    pub edges: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailsSpec {
    pub attach: Vec<usize>,
    pub escape: Vec<ProbValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InflowSpec {
    pub alpha: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub method: Option<String>,
    pub tol: Option<f64>,
    pub n_max: Option<usize>,
}

/// One instance as read from disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub graph: GraphSpec,
    pub tails: TailsSpec,
    pub kernel: BTreeMap<String, ProbValue>,
    pub inflow: InflowSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverSpec>,
}

impl RunSpec {
    pub fn parse(text: &str) -> Result<Self, SpecError> {
        Ok(toml::from_str(text)?)
    }

    #[cfg_attr(not(test), allow(dead_code))]
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("spec serializes")
    }
}

/// Canonical text address of an internal arc.
pub fn arc_address(g: &SymmetricDigraph, a: ArcId) -> String {
    let (u, v) = (g.origin(a), g.terminus(a));
    let mut index = 0;
    for e in 0..g.edge_of(a) {
        let b = g.arc(2 * e);
        if (b.origin == u && b.terminus == v) || (b.origin == v && b.terminus == u) {
            index += 1;
        }
    }
    format!("{u}->{v}[{index}]")
}

fn parse_arc_address(g: &SymmetricDigraph, key: &str) -> Result<ArcId, SpecError> {
    let field = format!("kernel.\"{key}\"");
    let (endpoints, index) = match key.split_once('[') {
        Some((head, tail)) => {
            let index = tail
                .strip_suffix(']')
                .and_then(|s| s.parse::<usize>().ok())
                .ok_or_else(|| field_err(&field, "malformed multiplicity index"))?;
            (head, index)
        }
        None => (key, 0),
    };
    let (u, v) = endpoints
        .split_once("->")
        .ok_or_else(|| field_err(&field, "expected `u->v` or `u->v[k]`"))?;
    let u: usize = u
        .trim()
        .parse()
        .map_err(|_| field_err(&field, "bad origin vertex"))?;
    let v: usize = v
        .trim()
        .parse()
        .map_err(|_| field_err(&field, "bad terminus vertex"))?;
    g.arc_by_endpoints(u, v, index)
        .ok_or_else(|| field_err(&field, "no such arc in the graph"))
}

/// The assembled instance.
pub struct Instance {
    pub tg: TailedGraph,
    pub kernel: TransitionKernel<f64>,
    pub alpha: Vec<Complex64>,
    pub solver: SolverOptions<f64>,
}

impl RunSpec {
    /// Validates and assembles the instance.
    pub fn build(&self) -> Result<Instance, SpecError> {
        let edges: Vec<(usize, usize)> = self.graph.edges.iter().map(|e| (e[0], e[1])).collect();
        let g = build_graph(self.graph.vertices, &edges)?;
        if !g.is_connected() {
            return Err(field_err("graph", "internal graph must be connected"));
        }
        let tg = attach_tails(g, &self.tails.attach)?;
        if self.tails.escape.len() != tg.tail_count() {
            return Err(field_err(
                "tails.escape",
                format!(
                    "expected {} escape probabilities, got {}",
                    tg.tail_count(),
                    self.tails.escape.len()
                ),
            ));
        }
        let g = tg.internal();
        let mut probs: Vec<Option<f64>> = vec![None; g.arc_count()];
        for (key, value) in &self.kernel {
            let arc = parse_arc_address(g, key)?;
            if probs[arc].is_some() {
                return Err(field_err(
                    format!("kernel.\"{key}\""),
                    "arc assigned more than once",
                ));
            }
            probs[arc] = Some(value.parse(&format!("kernel.\"{key}\""))?);
        }
        let mut missing = Vec::new();
        for a in g.arc_ids() {
            if probs[a].is_none() {
                missing.push(arc_address(g, a));
            }
        }
        if !missing.is_empty() {
            return Err(field_err(
                "kernel",
                format!("missing probabilities for arcs: {}", missing.join(", ")),
            ));
        }
        let internal: Vec<f64> = probs.into_iter().map(Option::unwrap).collect();
        let escape = self
            .tails
            .escape
            .iter()
            .enumerate()
            .map(|(j, v)| v.parse(&format!("tails.escape[{j}]")))
            .collect::<Result<Vec<f64>, _>>()?;
        let kernel = TransitionKernel::new(&tg, internal, escape)?;
        let validation = tailwalk_core::kernel::validate_kernel(&tg, &kernel);
        if !validation.passes {
            return Err(field_err(
                "kernel",
                format!(
                    "per-vertex normalization fails (max residual {:.3e}); write probabilities as fractions to avoid rounding residue",
                    validation.max_residual
                ),
            ));
        }
        if self.inflow.alpha.len() != tg.tail_count() {
            return Err(field_err(
                "inflow.alpha",
                format!(
                    "expected {} inflow amplitudes, got {}",
                    tg.tail_count(),
                    self.inflow.alpha.len()
                ),
            ));
        }
        let alpha = self
            .inflow
            .alpha
            .iter()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect();
        let solver = self.solver_options()?;
        Ok(Instance {
            tg,
            kernel,
            alpha,
            solver,
        })
    }

    pub fn solver_options(&self) -> Result<SolverOptions<f64>, SpecError> {
        let mut opts = SolverOptions::default();
        if let Some(solver) = &self.solver {
            if let Some(method) = &solver.method {
                opts.method = parse_method(method)?;
            }
            if let Some(tol) = solver.tol {
                if tol <= 0.0 {
                    return Err(field_err("solver.tol", "must be positive"));
                }
                opts.tol = tol;
            }
            if let Some(n_max) = solver.n_max {
                opts.n_max = n_max;
            }
        }
        Ok(opts)
    }
}

pub fn parse_method(name: &str) -> Result<Method, SpecError> {
    match name {
        "iterate" => Ok(Method::Iterate),
        "solve" => Ok(Method::DirectSolve),
        "both" => Ok(Method::Both),
        other => Err(field_err(
            "solver.method",
            format!("unknown method `{other}` (expected iterate | solve | both)"),
        )),
    }
}
