//! Deterministic plain-text reports: fixed field order, 17 significant
//! digits for every float.

use std::fmt::Write;
use tailwalk_core::circuit::{ArcCurrents, CircuitSolution, KirchhoffReport, PowerDecomposition};
use tailwalk_core::dynamics::{mass, mu_qw, Method, StationaryReport};
use tailwalk_core::graph::TailedGraph;
use tailwalk_core::scattering::{Regime, ScatteringReport};
use tailwalk_core::Complex64;

use crate::specfile::arc_address;

pub fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn fmt_c(z: Complex64) -> String {
    format!("{} {}", fmt_f(z.re), fmt_f(z.im))
}

pub fn regime_name(regime: Regime) -> &'static str {
    match regime {
        Regime::Reversible => "reversible",
        Regime::NonReversible => "non-reversible",
    }
}

pub fn method_name(method: Method) -> &'static str {
    match method {
        Method::Iterate => "iterate",
        Method::DirectSolve => "solve",
        Method::Both => "both",
    }
}

pub fn stationary(tg: &TailedGraph, regime: Regime, report: &StationaryReport<f64>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "regime: {}", regime_name(regime));
    let _ = writeln!(s, "method: {}", method_name(report.method));
    let _ = writeln!(s, "iterations: {}", report.iterations_used);
    let _ = writeln!(
        s,
        "fixed_point_residual: {}",
        fmt_f(report.fixed_point_residual)
    );
    if let Some(gap) = report.cross_method_gap {
        let _ = writeln!(s, "cross_method_gap: {}", fmt_f(gap));
    }
    if let Some(dim) = report.kernel_dimension {
        let _ = writeln!(s, "kernel_dimension: {dim}");
    }
    let g = tg.internal();
    let _ = writeln!(s, "psi_inf:");
    for a in g.arc_ids() {
        let _ = writeln!(
            s,
            "  {}: {}",
            arc_address(g, a),
            fmt_c(report.psi.internal[a])
        );
    }
    let _ = writeln!(s, "inflow:");
    for (j, z) in report.psi.inflow.iter().enumerate() {
        let _ = writeln!(s, "  tail {j}: {}", fmt_c(*z));
    }
    let _ = writeln!(s, "outflow:");
    for (j, z) in report.psi.outflow.iter().enumerate() {
        let _ = writeln!(s, "  tail {j}: {}", fmt_c(*z));
    }
    let _ = writeln!(s, "mass: {}", fmt_f(mass(tg, &report.psi)));
    let _ = writeln!(s, "mu:");
    for u in 0..g.vertex_count() {
        let _ = writeln!(s, "  vertex {u}: {}", fmt_f(mu_qw(tg, &report.psi, u)));
    }
    s
}

pub fn scattering(report: &ScatteringReport<f64>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "regime: {}", regime_name(report.regime));
    let _ = writeln!(s, "alpha_in:");
    for (j, z) in report.alpha_in.iter().enumerate() {
        let _ = writeln!(s, "  tail {j}: {}", fmt_c(*z));
    }
    let _ = writeln!(s, "beta_measured:");
    for (j, z) in report.beta_measured.iter().enumerate() {
        let _ = writeln!(s, "  tail {j}: {}", fmt_c(*z));
    }
    let _ = writeln!(s, "beta_predicted:");
    for (j, z) in report.beta_predicted.iter().enumerate() {
        let _ = writeln!(s, "  tail {j}: {}", fmt_c(*z));
    }
    let _ = writeln!(s, "s_matrix:");
    for i in 0..report.s_matrix.nrows() {
        let row: Vec<String> = (0..report.s_matrix.ncols())
            .map(|j| fmt_f(report.s_matrix[(i, j)]))
            .collect();
        let _ = writeln!(s, "  {}", row.join(" "));
    }
    let _ = writeln!(s, "residual_inf_norm: {}", fmt_f(report.residual_inf_norm));
    s
}

#[allow(clippy::too_many_arguments)]
pub fn circuit(
    tg: &TailedGraph,
    quantum: &ArcCurrents<f64>,
    classical: &CircuitSolution<f64>,
    oracle_gap: f64,
    kirchhoff: &KirchhoffReport<f64>,
    decomposition: &PowerDecomposition<f64>,
    injections: &[Complex64],
) -> String {
    let g = tg.internal();
    let mut s = String::new();
    let _ = writeln!(s, "regime: reversible");
    let _ = writeln!(s, "injections:");
    for (u, z) in injections.iter().enumerate() {
        let _ = writeln!(s, "  vertex {u}: {}", fmt_c(*z));
    }
    let _ = writeln!(s, "boundary_current:");
    for (j, z) in quantum.boundary.iter().enumerate() {
        let _ = writeln!(s, "  tail {j}: {}", fmt_c(*z));
    }
    let _ = writeln!(s, "current:");
    for a in g.arc_ids() {
        let _ = writeln!(s, "  {}: {}", arc_address(g, a), fmt_c(quantum.internal[a]));
    }
    let _ = writeln!(s, "potential:");
    for (u, z) in classical.potential.iter().enumerate() {
        let _ = writeln!(s, "  vertex {u}: {}", fmt_c(*z));
    }
    let _ = writeln!(s, "kcl_residual: {}", fmt_f(kirchhoff.kcl));
    let _ = writeln!(s, "kvl_residual: {}", fmt_f(kirchhoff.kvl));
    let _ = writeln!(s, "antisymmetry_residual: {}", fmt_f(kirchhoff.antisymmetry));
    let _ = writeln!(s, "circuit_oracle_gap: {}", fmt_f(oracle_gap));
    let _ = writeln!(s, "power_decomposition:");
    for u in 0..g.vertex_count() {
        let _ = writeln!(
            s,
            "  vertex {u}: mu {} w_ec {} m_rw {}",
            fmt_f(decomposition.mu[u]),
            fmt_c(decomposition.w_ec[u]),
            fmt_f(decomposition.m_rw[u]),
        );
    }
    let _ = writeln!(
        s,
        "decomposition_residual_literal: {}",
        fmt_f(decomposition.max_residual_literal)
    );
    let _ = writeln!(
        s,
        "decomposition_residual_modulus: {}",
        fmt_f(decomposition.max_residual_modulus)
    );
    s
}
