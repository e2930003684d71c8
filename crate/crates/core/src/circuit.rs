//! Electric-circuit view of reversible stationary states.
//!
//! Two independent routes to the same arc field. The quantum route reads the
//! current off the stationary state,
//! `j(a) = sqrt(m_E(|a|)) Ψ(a) - m_E(|a|) ⟨m_δE, α⟩ / sqrt(m(δG_0))`;
//! the classical route solves the weighted-Laplacian potential problem of
//! the internal graph with conductances `m_E` and the boundary injections
//! the same formula assigns to the inbound tail arcs (which needs only `α`
//! and the measure). Agreement of the two fields, and the Kirchhoff laws,
//! are the strongest cross-checks in the crate.
//!
//! Sign conventions: `j(a)` flows from `o(a)` to `t(a)`, positive when the
//! potential drops; an injection is current entering the graph at a vertex,
//! so conservation reads `Σ_{t(a)=u} j(a) + inj(u) = 0` over internal arcs.

use crate::dynamics::identities::boundary_overlap;
use crate::dynamics::{mu_qw, WaveFunction};
use crate::graph::{CycleBasis, SymmetricDigraph, TailedGraph, VertexId};
use crate::kernel::{boundary_conductance, ReversibleMeasure};
use crate::scalar::{C, RealScalar};
use nalgebra::DMatrix;
use thiserror::Error;

/// KCL/KVL residual bound for a verified circuit.
pub const KIRCHHOFF_TOL: f64 = 1e-9;
/// Per-component injection balance tolerance.
pub const BALANCE_TOL: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum CircuitError {
    #[error("injections do not balance on component of vertex {component_root} (residual {residual:.3e})")]
    UnbalancedInjections { component_root: VertexId, residual: f64 },
}

/// Complex current per internal arc plus the boundary arc currents `j(e_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcCurrents<T> {
    pub internal: Vec<C<T>>,
    pub boundary: Vec<C<T>>,
}

impl<T: RealScalar> ArcCurrents<T> {
    /// Net current injected at each internal vertex by the tails.
    pub fn injections(&self, tg: &TailedGraph) -> Vec<C<T>> {
        let mut inj = vec![C::new(T::zero(), T::zero()); tg.internal().vertex_count()];
        for (j, tail) in tg.tails().iter().enumerate() {
            inj[tail.attach] += self.boundary[j];
        }
        inj
    }
}

/// Quantum route: the current carried by a stationary state of a reversible
/// kernel. Taking the measure as an argument is what restricts this to the
/// reversible regime; no measure, no current.
pub fn current_from_wavefunction<T: RealScalar>(
    tg: &TailedGraph,
    psi: &WaveFunction<T>,
    m: &ReversibleMeasure<T>,
) -> ArcCurrents<T> {
    let g = tg.internal();
    let m_delta_e = boundary_conductance(m);
    let drive = boundary_overlap(&m_delta_e, &psi.inflow)
        * (T::one() / num_traits::Float::sqrt(m.boundary_total()));
    let internal = g
        .arc_ids()
        .map(|a| {
            let me = m.edge[g.edge_of(a)];
            psi.internal[a] * num_traits::Float::sqrt(me) - drive * me
        })
        .collect();
    let boundary = (0..tg.tail_count())
        .map(|j| {
            let me = m.boundary_edge[j];
            psi.inflow[j] * num_traits::Float::sqrt(me) - drive * me
        })
        .collect();
    ArcCurrents { internal, boundary }
}

/// Classical route input: the boundary injections determined by the inflow
/// and the measure alone (no stationary state involved).
pub fn boundary_injections<T: RealScalar>(
    tg: &TailedGraph,
    m: &ReversibleMeasure<T>,
    alpha: &[C<T>],
) -> Vec<C<T>> {
    let m_delta_e = boundary_conductance(m);
    let drive =
        boundary_overlap(&m_delta_e, alpha) * (T::one() / num_traits::Float::sqrt(m.boundary_total()));
    let mut inj = vec![C::new(T::zero(), T::zero()); tg.internal().vertex_count()];
    for (j, tail) in tg.tails().iter().enumerate() {
        let me = m.boundary_edge[j];
        inj[tail.attach] += alpha[j] * num_traits::Float::sqrt(me) - drive * me;
    }
    inj
}

/// Potentials and currents of the solved circuit.
#[derive(Debug, Clone)]
pub struct CircuitSolution<T> {
    /// Gauge-fixed potential per vertex (zero at the lowest vertex id of
    /// each component).
    pub potential: Vec<C<T>>,
    /// Current per internal arc, `j(a) = m_E(|a|) (φ(o(a)) - φ(t(a)))`;
    /// antisymmetric by construction.
    pub current: Vec<C<T>>,
    pub kcl_residual: T,
    pub kvl_residual: T,
}

/// Kirchhoff residual report for an arbitrary arc current field.
#[derive(Debug, Clone, Copy)]
pub struct KirchhoffReport<T> {
    /// `max_u |Σ_{t(a)=u} j(a) + inj(u)|`.
    pub kcl: T,
    /// `max_cycle |Σ_k j(a_k) / m_E(|a_k|)|` over the basis cycles.
    pub kvl: T,
    /// `max_a |j(a) + j(ā)|`.
    pub antisymmetry: T,
}

/// Residuals of the Kirchhoff laws on a bare graph.
pub fn kirchhoff_residuals<T: RealScalar>(
    g: &SymmetricDigraph,
    current: &[C<T>],
    conductance: &[T],
    injections: &[C<T>],
    basis: &CycleBasis,
) -> KirchhoffReport<T> {
    let mut kcl = T::zero();
    for u in 0..g.vertex_count() {
        let mut sum = injections[u];
        for &a in g.out_arcs(u) {
            sum += current[g.inv(a)];
        }
        if sum.norm() > kcl {
            kcl = sum.norm();
        }
    }
    let mut antisymmetry = T::zero();
    for e in 0..g.edge_count() {
        let d = (current[2 * e] + current[2 * e + 1]).norm();
        if d > antisymmetry {
            antisymmetry = d;
        }
    }
    let mut kvl = T::zero();
    for cycle in &basis.cycles {
        let mut sum = C::new(T::zero(), T::zero());
        for &a in cycle {
            sum += current[a] * (T::one() / conductance[g.edge_of(a)]);
        }
        if sum.norm() > kvl {
            kvl = sum.norm();
        }
    }
    KirchhoffReport {
        kcl,
        kvl,
        antisymmetry,
    }
}

/// Kirchhoff residuals of a tailed-graph current field; the injections come
/// from its own boundary currents.
pub fn verify_kirchhoff<T: RealScalar>(
    tg: &TailedGraph,
    currents: &ArcCurrents<T>,
    m: &ReversibleMeasure<T>,
    basis: &CycleBasis,
) -> KirchhoffReport<T> {
    kirchhoff_residuals(
        tg.internal(),
        &currents.internal,
        &m.edge,
        &currents.injections(tg),
        basis,
    )
}

/// Classical route: solve the weighted-Laplacian potential problem
/// `L φ = inj` and read the currents off the potential drops.
pub fn solve_circuit<T: RealScalar>(
    g: &SymmetricDigraph,
    conductance: &[T],
    injections: &[C<T>],
) -> Result<CircuitSolution<T>, CircuitError> {
    let n = g.vertex_count();
    assert_eq!(conductance.len(), g.edge_count());
    assert_eq!(injections.len(), n);

    // components, for the balance precondition and the gauge
    let mut component = vec![usize::MAX; n];
    let mut roots = Vec::new();
    for start in 0..n {
        if component[start] != usize::MAX {
            continue;
        }
        let root = roots.len();
        roots.push(start);
        let mut stack = vec![start];
        component[start] = root;
        while let Some(u) = stack.pop() {
            for &a in g.out_arcs(u) {
                let v = g.terminus(a);
                if component[v] == usize::MAX {
                    component[v] = root;
                    stack.push(v);
                }
            }
        }
    }
    for (root_idx, &root) in roots.iter().enumerate() {
        let mut total = C::new(T::zero(), T::zero());
        let mut scale = T::one();
        for u in 0..n {
            if component[u] == root_idx {
                total += injections[u];
                let mag = injections[u].norm();
                if mag > scale {
                    scale = mag;
                }
            }
        }
        if total.norm() > T::c(BALANCE_TOL) * scale {
            return Err(CircuitError::UnbalancedInjections {
                component_root: root,
                residual: total.norm().to_f64().unwrap_or(f64::NAN),
            });
        }
    }

    let mut laplacian = DMatrix::from_element(n, n, T::zero());
    for e in 0..g.edge_count() {
        let (u, v) = (g.origin(2 * e), g.terminus(2 * e));
        let w = conductance[e];
        laplacian[(u, u)] += w;
        laplacian[(v, v)] += w;
        laplacian[(u, v)] -= w;
        laplacian[(v, u)] -= w;
    }
    let (mut potential, _) =
        crate::linalg::min_norm_solve(laplacian, injections, T::c(1e-12));
    // pin the gauge: zero at each component's lowest vertex id
    for u in 0..n {
        let offset = potential[roots[component[u]]];
        if u != roots[component[u]] {
            potential[u] -= offset;
        }
    }
    for &root in &roots {
        potential[root] = C::new(T::zero(), T::zero());
    }

    let current: Vec<C<T>> = g
        .arc_ids()
        .map(|a| {
            (potential[g.origin(a)] - potential[g.terminus(a)]) * conductance[g.edge_of(a)]
        })
        .collect();
    let basis = crate::graph::cycle_basis(g);
    let report = kirchhoff_residuals(g, &current, conductance, injections, &basis);
    Ok(CircuitSolution {
        potential,
        current,
        kcl_residual: report.kcl,
        kvl_residual: report.kvl,
    })
}

/// Vertexwise decomposition of the finding probability into electric power
/// plus the reversible-measure term.
#[derive(Debug, Clone)]
pub struct PowerDecomposition<T> {
    /// `w_EC(u) = Σ_{t(a)=u} j(a)² / m_E(|a|)`, the proof's literal algebra
    /// (complex square, not modulus; real for real inflow).
    pub w_ec: Vec<C<T>>,
    /// Same sum with `|j(a)|²`: the variant that stays real for complex
    /// inflow.
    pub w_ec_modulus: Vec<T>,
    /// `m_RW(u) = |⟨m_δE, α⟩|² m_V(u) / m(δG_0)`.
    pub m_rw: Vec<T>,
    /// `μ_QW(u)`.
    pub mu: Vec<T>,
    /// `max_u |μ(u) - (w_EC(u) + m_RW(u))|` with the literal square.
    pub max_residual_literal: T,
    /// Same with the modulus form.
    pub max_residual_modulus: T,
}

/// Evaluates both sides of the power decomposition at every vertex. The
/// literal-square identity is the one the reversible theory states (exact
/// for real inflow); the modulus form is evaluated alongside so complex
/// inflows are reported rather than forced.
pub fn decompose_mu<T: RealScalar>(
    tg: &TailedGraph,
    psi: &WaveFunction<T>,
    m: &ReversibleMeasure<T>,
    currents: &ArcCurrents<T>,
) -> PowerDecomposition<T> {
    let g = tg.internal();
    let m_delta_e = boundary_conductance(m);
    let overlap = boundary_overlap(&m_delta_e, &psi.inflow);
    let rw_factor = overlap.norm_sqr() / m.boundary_total();
    let n = g.vertex_count();
    let mut w_ec = vec![C::new(T::zero(), T::zero()); n];
    let mut w_ec_modulus = vec![T::zero(); n];
    for a in g.arc_ids() {
        let u = g.terminus(a);
        let me = m.edge[g.edge_of(a)];
        let j = currents.internal[a];
        w_ec[u] += j * j * (T::one() / me);
        w_ec_modulus[u] += j.norm_sqr() / me;
    }
    for (jdx, tail) in tg.tails().iter().enumerate() {
        let me = m.boundary_edge[jdx];
        let j = currents.boundary[jdx];
        w_ec[tail.attach] += j * j * (T::one() / me);
        w_ec_modulus[tail.attach] += j.norm_sqr() / me;
    }
    let m_rw: Vec<T> = (0..n).map(|u| rw_factor * m.vertex[u]).collect();
    let mu: Vec<T> = (0..n).map(|u| mu_qw(tg, psi, u)).collect();
    let mut max_residual_literal = T::zero();
    let mut max_residual_modulus = T::zero();
    for u in 0..n {
        let lit = (C::new(mu[u] - m_rw[u], T::zero()) - w_ec[u]).norm();
        if lit > max_residual_literal {
            max_residual_literal = lit;
        }
        let modu = num_traits::Float::abs(mu[u] - m_rw[u] - w_ec_modulus[u]);
        if modu > max_residual_modulus {
            max_residual_modulus = modu;
        }
    }
    PowerDecomposition {
        w_ec,
        w_ec_modulus,
        m_rw,
        mu,
        max_residual_literal,
        max_residual_modulus,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{stationary_state, SolverOptions};
    use crate::graph::{build_graph, cycle_basis};
    use crate::kernel::find_reversible_measure;
    use crate::models::{make_c3pk, reference_measure, C3PkSpec};
    use approx::assert_relative_eq;

    type C64 = C<f64>;

    fn cr(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn grover_state() -> (
        crate::models::C3PkInstance<f64>,
        WaveFunction<f64>,
        ReversibleMeasure<f64>,
    ) {
        let inst = make_c3pk(C3PkSpec::new(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 1).unwrap());
        let report = stationary_state(
            &inst.tg,
            &inst.kernel,
            &inst.alpha,
            &SolverOptions::default(),
        )
        .unwrap();
        let m = reference_measure(&inst.spec);
        (inst, report.psi, m)
    }

    #[test]
    fn grover_boundary_injection_and_triangle_split() {
        let (inst, psi, m) = grover_state();
        let j = current_from_wavefunction(&inst.tg, &psi, &m);
        let i_in = (1.0_f64 / 6.0).sqrt();
        assert_relative_eq!(j.boundary[0].re, i_in, epsilon = 1e-9);
        assert_relative_eq!(j.boundary[1].re, -i_in, epsilon = 1e-9);
        // clockwise arc at the first attach vertex carries (2/3) I
        assert_relative_eq!(j.internal[inst.labels.b[0]].re, 2.0 / 3.0 * i_in, epsilon = 1e-9);
        // the long way around carries I/3 per edge, and no current on the path
        assert_relative_eq!(j.internal[inst.labels.b_bar[2]].re, i_in / 3.0, epsilon = 1e-9);
        for &a in &inst.labels.path {
            assert!(j.internal[a].norm() < 1e-9);
        }
        let basis = cycle_basis(inst.tg.internal());
        let report = verify_kirchhoff(&inst.tg, &j, &m, &basis);
        assert!(report.kcl < 1e-9);
        assert!(report.kvl < 1e-9);
        assert!(report.antisymmetry < 1e-9);
    }

    #[test]
    fn quantum_and_classical_currents_agree() {
        let (inst, psi, m) = grover_state();
        let quantum = current_from_wavefunction(&inst.tg, &psi, &m);
        let inj = boundary_injections(&inst.tg, &m, &psi.inflow);
        let classical = solve_circuit(inst.tg.internal(), &m.edge, &inj).unwrap();
        for a in inst.tg.internal().arc_ids() {
            assert!(
                (quantum.internal[a] - classical.current[a]).norm() < 1e-8,
                "arc {a}"
            );
        }
        assert!(classical.kcl_residual < 1e-10);
        assert!(classical.kvl_residual < 1e-10);
    }

    #[test]
    fn gauge_scaling_leaves_observables() {
        let (inst, psi, m) = grover_state();
        let j1 = current_from_wavefunction(&inst.tg, &psi, &m);
        let d1 = decompose_mu(&inst.tg, &psi, &m, &j1);
        let m7 = m.scaled(7.0);
        let j7 = current_from_wavefunction(&inst.tg, &psi, &m7);
        let d7 = decompose_mu(&inst.tg, &psi, &m7, &j7);
        for u in 0..4 {
            assert_relative_eq!(d1.m_rw[u], d7.m_rw[u], max_relative = 1e-12);
            assert_relative_eq!(d1.w_ec[u].re, d7.w_ec[u].re, max_relative = 1e-10, epsilon = 1e-12);
        }
        // currents themselves scale by sqrt(7)
        assert_relative_eq!(
            j7.internal[0].re,
            j1.internal[0].re * 7.0_f64.sqrt(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn zero_injections_give_dead_circuit() {
        let g = build_graph(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        let sol = solve_circuit(&g, &[1.0, 1.0, 1.0], &[cr(0.0), cr(0.0), cr(0.0)]).unwrap();
        assert!(sol.current.iter().all(|z| z.norm() < 1e-14));
        assert!(sol.potential.iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn series_path_drops_one_volt_per_edge() {
        let g = build_graph(3, &[(0, 1), (1, 2)]).unwrap();
        let sol = solve_circuit(&g, &[1.0, 1.0], &[cr(1.0), cr(0.0), cr(-1.0)]).unwrap();
        assert_relative_eq!(sol.potential[0].re, 0.0, epsilon = 1e-12); // gauge pin
        assert_relative_eq!(sol.potential[1].re, -1.0, epsilon = 1e-10);
        assert_relative_eq!(sol.potential[2].re, -2.0, epsilon = 1e-10);
        // unit current flows 0 -> 1 -> 2
        assert_relative_eq!(sol.current[0].re, 1.0, epsilon = 1e-10);
        assert_relative_eq!(sol.current[2].re, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn unbalanced_injections_rejected() {
        let g = build_graph(2, &[(0, 1)]).unwrap();
        let err = solve_circuit(&g, &[1.0], &[cr(1.0), cr(0.5)]).unwrap_err();
        assert!(matches!(err, CircuitError::UnbalancedInjections { .. }));
    }

    #[test]
    fn corrupted_current_shows_up_in_kcl() {
        let (inst, psi, m) = grover_state();
        let mut j = current_from_wavefunction(&inst.tg, &psi, &m);
        j.internal[0] += cr(0.1);
        let basis = cycle_basis(inst.tg.internal());
        let report = verify_kirchhoff(&inst.tg, &j, &m, &basis);
        assert!((report.kcl - 0.1).abs() < 1e-9);
        assert!((report.antisymmetry - 0.1).abs() < 1e-9);
    }

    #[test]
    fn decomposition_holds_for_real_inflow() {
        let (inst, psi, m) = grover_state();
        let j = current_from_wavefunction(&inst.tg, &psi, &m);
        let d = decompose_mu(&inst.tg, &psi, &m, &j);
        assert!(d.max_residual_literal < 1e-9, "literal {}", d.max_residual_literal);
        assert!(d.max_residual_modulus < 1e-9);
    }

    #[test]
    fn parallel_inflow_shuts_off_current() {
        // α parallel to m_δE: no current, μ = m_RW everywhere
        let inst = make_c3pk(C3PkSpec::new(0.3, 0.3, 0.4, 2).unwrap());
        let m = find_reversible_measure(&inst.tg, &inst.kernel)
            .measure()
            .unwrap()
            .clone();
        let c = boundary_conductance(&m);
        let alpha: Vec<C64> = c.iter().map(|&x| cr(1.3 * x)).collect();
        let report = stationary_state(
            &inst.tg,
            &inst.kernel,
            &alpha,
            &SolverOptions::default(),
        )
        .unwrap();
        let j = current_from_wavefunction(&inst.tg, &report.psi, &m);
        for z in j.internal.iter().chain(&j.boundary) {
            assert!(z.norm() < 1e-9);
        }
        let d = decompose_mu(&inst.tg, &report.psi, &m, &j);
        for u in 0..inst.tg.internal().vertex_count() {
            assert_relative_eq!(d.mu[u], d.m_rw[u], max_relative = 1e-9);
        }
    }

    #[test]
    fn orthogonal_inflow_is_pure_power() {
        // α ⊥ m_δE: μ = w_EC everywhere (m_RW = 0)
        let inst = make_c3pk(C3PkSpec::new(0.3, 0.3, 0.4, 1).unwrap());
        let m = find_reversible_measure(&inst.tg, &inst.kernel)
            .measure()
            .unwrap()
            .clone();
        let c = boundary_conductance(&m);
        let alpha = [cr(c[1]), cr(-c[0])];
        let report = stationary_state(
            &inst.tg,
            &inst.kernel,
            &alpha,
            &SolverOptions::default(),
        )
        .unwrap();
        let j = current_from_wavefunction(&inst.tg, &report.psi, &m);
        let d = decompose_mu(&inst.tg, &report.psi, &m, &j);
        for u in 0..inst.tg.internal().vertex_count() {
            assert!(d.m_rw[u] < 1e-18);
            assert_relative_eq!(d.mu[u], d.w_ec[u].re, max_relative = 1e-9, epsilon = 1e-12);
        }
    }
}
