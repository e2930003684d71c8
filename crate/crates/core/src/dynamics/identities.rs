//! Structural identities of stationary states.
//!
//! Stationarity is equivalent to `(Ψ(a) + Ψ(ā))/2 = sqrt(p(a)) ρ_V(o(a))`
//! per arc, with `ρ_V(u) = Σ_{t(b)=u} sqrt(p(b̄)) Ψ(b)`. The reversible and
//! non-reversible regimes then force very different shapes on `Ψ`, which the
//! residuals here quantify: edge averages proportional to `sqrt(m_E)` in the
//! reversible case, antisymmetry plus vanishing vertex sums in the
//! non-reversible case, and cycle eigenvectors orthogonal to the state.

use super::{InducedSystem, WaveFunction};
use crate::graph::{ArcId, SymmetricDigraph, TailedGraph};
use crate::kernel::{boundary_conductance, ReversibleMeasure, TransitionKernel};
use crate::scalar::{inf_norm, C, RealScalar};

/// `⟨m_δE, α⟩` with the physics convention (first argument conjugated;
/// `m_δE` is real positive, so this is a plain weighted sum).
pub fn boundary_overlap<T: RealScalar>(m_delta_e: &[T], alpha: &[C<T>]) -> C<T> {
    m_delta_e
        .iter()
        .zip(alpha)
        .fold(C::new(T::zero(), T::zero()), |acc, (&w, z)| acc + z * w)
}

/// `ρ_V(u) = Σ_{t(b)=u} sqrt(p(b̄)) Ψ(b)` on internal vertices; tail arcs
/// contribute `sqrt(p(ē_j)) α_j`.
pub fn rho_vertex<T: RealScalar>(
    tg: &TailedGraph,
    p: &TransitionKernel<T>,
    psi: &WaveFunction<T>,
) -> Vec<C<T>> {
    let g = tg.internal();
    let mut out = Vec::with_capacity(g.vertex_count());
    for u in 0..g.vertex_count() {
        let mut s = C::new(T::zero(), T::zero());
        // arcs into u are the inverses of arcs out of u
        for &a in g.out_arcs(u) {
            s += psi.internal[a ^ 1] * num_traits::Float::sqrt(p.internal(a));
        }
        for j in tg.tails_at(u) {
            s += psi.inflow[j] * num_traits::Float::sqrt(p.escape(j));
        }
        out.push(s);
    }
    out
}

/// `ρ_E(|a|) = (Ψ(a) + Ψ(ā))/2` per edge; boundary edges use `(α_j + β_j)/2`.
pub fn rho_edge<T: RealScalar>(tg: &TailedGraph, psi: &WaveFunction<T>) -> Vec<C<T>> {
    let g = tg.internal();
    let half = T::c(0.5);
    let mut out: Vec<C<T>> = (0..g.edge_count())
        .map(|e| (psi.internal[2 * e] + psi.internal[2 * e + 1]) * half)
        .collect();
    for j in 0..tg.tail_count() {
        out.push((psi.inflow[j] + psi.outflow[j]) * half);
    }
    out
}

/// Max residual of `ρ_E(|a|) = sqrt(p(a)) ρ_V(o(a)) = sqrt(p(ā)) ρ_V(t(a))`
/// over internal arcs (both orientations) and boundary edges.
pub fn rho_identity_residual<T: RealScalar>(
    tg: &TailedGraph,
    p: &TransitionKernel<T>,
    psi: &WaveFunction<T>,
) -> T {
    let g = tg.internal();
    let rv = rho_vertex(tg, p, psi);
    let re = rho_edge(tg, psi);
    let mut worst = T::zero();
    for a in g.arc_ids() {
        let lhs = re[g.edge_of(a)];
        let rhs = rv[g.origin(a)] * num_traits::Float::sqrt(p.internal(a));
        let d = (lhs - rhs).norm();
        if d > worst {
            worst = d;
        }
    }
    for (j, tail) in tg.tails().iter().enumerate() {
        let lhs = re[tg.internal().edge_count() + j];
        let rhs = rv[tail.attach] * num_traits::Float::sqrt(p.escape(j));
        let d = (lhs - rhs).norm();
        if d > worst {
            worst = d;
        }
    }
    worst
}

/// Theorem-level residuals of the non-reversible regime.
#[derive(Debug, Clone, Copy)]
pub struct NonReversibleResiduals<T> {
    /// `max |Ψ(a) + Ψ(ā)|` over internal edges.
    pub antisymmetry: T,
    /// `max_u |Σ_{t(a)=u} sqrt(p(ā)) Ψ(a)|` over internal vertices.
    pub weighted_vertex_sums: T,
    /// `‖β + α‖_∞` (perfect reflection with phase flip).
    pub phase_flip: T,
}

pub fn nonreversible_residuals<T: RealScalar>(
    tg: &TailedGraph,
    p: &TransitionKernel<T>,
    psi: &WaveFunction<T>,
) -> NonReversibleResiduals<T> {
    let g = tg.internal();
    let mut antisymmetry = T::zero();
    for e in 0..g.edge_count() {
        let d = (psi.internal[2 * e] + psi.internal[2 * e + 1]).norm();
        if d > antisymmetry {
            antisymmetry = d;
        }
    }
    let weighted_vertex_sums = inf_norm(&rho_vertex(tg, p, psi));
    let mut phase_flip = T::zero();
    for j in 0..tg.tail_count() {
        let d = (psi.outflow[j] + psi.inflow[j]).norm();
        if d > phase_flip {
            phase_flip = d;
        }
    }
    NonReversibleResiduals {
        antisymmetry,
        weighted_vertex_sums,
        phase_flip,
    }
}

/// Reversible-regime residual of the constant edge-average identity
/// `Ψ(a) + Ψ(ā) = 2 sqrt(m_E(|a|)) ⟨m_δE, α⟩ / sqrt(m(δG_0))`.
pub fn reversible_sum_residual<T: RealScalar>(
    tg: &TailedGraph,
    psi: &WaveFunction<T>,
    m: &ReversibleMeasure<T>,
) -> T {
    let g = tg.internal();
    let m_delta_e = boundary_conductance(m);
    let factor = boundary_overlap(&m_delta_e, &psi.inflow)
        * (T::one() / num_traits::Float::sqrt(m.boundary_total()));
    let two = T::c(2.0);
    let mut worst = T::zero();
    for e in 0..g.edge_count() {
        let expected = factor * (num_traits::Float::sqrt(m.edge[e]) * two);
        let d = (psi.internal[2 * e] + psi.internal[2 * e + 1] - expected).norm();
        if d > worst {
            worst = d;
        }
    }
    for j in 0..tg.tail_count() {
        let expected = factor * (num_traits::Float::sqrt(m.boundary_edge[j]) * two);
        let d = (psi.inflow[j] + psi.outflow[j] - expected).norm();
        if d > worst {
            worst = d;
        }
    }
    worst
}

/// Arc field of a cycle: `1/sqrt(m_E)` along the cycle, the negative on the
/// inverses, zero elsewhere. An eigenvector of the evolution for eigenvalue 1
/// when the kernel is reversible.
pub fn cycle_vector<T: RealScalar>(
    g: &SymmetricDigraph,
    cycle: &[ArcId],
    m: &ReversibleMeasure<T>,
) -> Vec<C<T>> {
    let mut w = vec![C::new(T::zero(), T::zero()); g.arc_count()];
    for &a in cycle {
        let v = T::one() / num_traits::Float::sqrt(m.edge[g.edge_of(a)]);
        w[a] = C::new(v, T::zero());
        w[a ^ 1] = C::new(-v, T::zero());
    }
    w
}

/// Residuals of the cycle-eigenvector facts: `U w_c = w_c` (split into the
/// internal restriction and the zero outflow it must produce) and
/// `⟨w_c, Ψ_∞⟩ = 0`.
#[derive(Debug, Clone, Copy)]
pub struct CycleCheck<T> {
    pub eigen_residual: T,
    pub outflow_residual: T,
    pub orthogonality: T,
}

pub fn check_cycle_eigenvector<T: RealScalar>(
    sys: &InducedSystem<T>,
    w: &[C<T>],
    psi: &WaveFunction<T>,
) -> CycleCheck<T> {
    let mut image = vec![C::new(T::zero(), T::zero()); w.len()];
    let mut ws = sys.workspace();
    sys.apply_interior(w, &mut image, &mut ws);
    let mut eigen_residual = T::zero();
    for (x, y) in image.iter().zip(w) {
        let d = (x - y).norm();
        if d > eigen_residual {
            eigen_residual = d;
        }
    }
    let zero_inflow = vec![C::new(T::zero(), T::zero()); psi.inflow.len()];
    let outflow_residual = inf_norm(&sys.outflow(w, &zero_inflow));
    let inner = w
        .iter()
        .zip(&psi.internal)
        .fold(C::new(T::zero(), T::zero()), |acc, (a, b)| {
            acc + a.conj() * b
        });
    CycleCheck {
        eigen_residual,
        outflow_residual,
        orthogonality: inner.norm(),
    }
}
