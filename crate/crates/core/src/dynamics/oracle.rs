//! Full-unitary evolution on a truncated tailed graph.
//!
//! Replacing each tail by a finite path of length `L = n + 2` and running the
//! genuine unitary `n` times reproduces the induced iteration on internal
//! arcs exactly: the inbound tail amplitudes the internal coins see are the
//! constant inflow until the truncation wavefront arrives, which takes more
//! than `n` steps. Used as an independent oracle for [`super::iterate`].

use super::{coin_apply, CoinWorkspace, DynamicsError};
use crate::graph::{truncate, SymmetricDigraph, TailedGraph, TruncatedGraph};
use crate::kernel::TransitionKernel;
use crate::scalar::{C, RealScalar};

/// The Szegedy unitary on a finite symmetric digraph with explicit per-arc
/// probabilities (no tails, no inflow).
#[derive(Debug, Clone)]
pub struct UnitaryEvolution<T> {
    graph: SymmetricDigraph,
    /// `sqrt(p)` per vertex, aligned with its outgoing arc list.
    site_sqrt_p: Vec<Vec<T>>,
    max_degree: usize,
}

impl<T: RealScalar> UnitaryEvolution<T> {
    pub fn new(graph: SymmetricDigraph, probabilities: &[T]) -> Self {
        assert_eq!(probabilities.len(), graph.arc_count());
        let site_sqrt_p: Vec<Vec<T>> = (0..graph.vertex_count())
            .map(|u| {
                graph
                    .out_arcs(u)
                    .iter()
                    .map(|&a| num_traits::Float::sqrt(probabilities[a]))
                    .collect()
            })
            .collect();
        let max_degree = site_sqrt_p.iter().map(Vec::len).max().unwrap_or(0);
        Self {
            graph,
            site_sqrt_p,
            max_degree,
        }
    }

    pub fn graph(&self) -> &SymmetricDigraph {
        &self.graph
    }

    pub fn workspace(&self) -> CoinWorkspace<T> {
        CoinWorkspace::with_capacity(self.max_degree)
    }

    /// One step `next = U psi`.
    pub fn apply(&self, psi: &[C<T>], next: &mut [C<T>], ws: &mut CoinWorkspace<T>) {
        for u in 0..self.graph.vertex_count() {
            let out = self.graph.out_arcs(u);
            let d = out.len();
            if d == 0 {
                continue;
            }
            let (input, output) = ws.split(d);
            for (k, &a) in out.iter().enumerate() {
                input[k] = psi[self.graph.inv(a)];
            }
            coin_apply(&self.site_sqrt_p[u], input, output);
            for (k, &a) in out.iter().enumerate() {
                next[a] = output[k];
            }
        }
    }

    pub fn evolve(&self, psi0: &[C<T>], steps: usize) -> Vec<C<T>> {
        let mut cur = psi0.to_vec();
        let mut next = vec![C::new(T::zero(), T::zero()); cur.len()];
        let mut ws = self.workspace();
        for _ in 0..steps {
            self.apply(&cur, &mut next, &mut ws);
            std::mem::swap(&mut cur, &mut next);
        }
        cur
    }
}

/// Truncated evolution: graph, unitary, and the evolved state.
#[derive(Debug, Clone)]
pub struct TruncatedEvolution<T> {
    pub truncated: TruncatedGraph,
    pub unitary: UnitaryEvolution<T>,
    pub psi: Vec<C<T>>,
    pub steps: usize,
}

impl<T: RealScalar> TruncatedEvolution<T> {
    /// Restriction of the evolved state to the internal arcs (ids coincide).
    pub fn internal(&self, internal_arc_count: usize) -> &[C<T>] {
        &self.psi[..internal_arc_count]
    }
}

/// Per-arc probabilities on the truncated graph: the kernel on internal
/// arcs, escape probabilities on the outbound boundary arcs, 1/2 along the
/// tails, and reflection (probability 1) at each truncation leaf.
pub fn truncated_probabilities<T: RealScalar>(
    tg: &TailedGraph,
    p: &TransitionKernel<T>,
    trunc: &TruncatedGraph,
) -> Vec<T> {
    let n0 = tg.internal().arc_count();
    let mut probs = vec![T::zero(); trunc.graph.arc_count()];
    probs[..n0].copy_from_slice(p.internal_probs());
    let half = T::c(super::TAIL_PROB);
    let len = trunc.tail_len;
    for (j, segs) in trunc.inbound_arcs.iter().enumerate() {
        for (i, &inbound) in segs.iter().enumerate() {
            probs[inbound] = if i + 1 == len { T::one() } else { half };
            let outbound = inbound ^ 1;
            probs[outbound] = if i == 0 { p.escape(j) } else { half };
        }
    }
    probs
}

/// Initial state of the driven walk on the truncated graph: `α_j` on every
/// inbound arc of tail `j`, zero elsewhere.
pub fn truncated_initial_state<T: RealScalar>(
    trunc: &TruncatedGraph,
    alpha: &[C<T>],
) -> Vec<C<T>> {
    let mut psi = vec![C::new(T::zero(), T::zero()); trunc.graph.arc_count()];
    for (j, segs) in trunc.inbound_arcs.iter().enumerate() {
        for &a in segs {
            psi[a] = alpha[j];
        }
    }
    psi
}

/// Evolves the truncated system `n` steps with tails of length `n + 2`, long
/// enough that the internal restriction cannot feel the truncation.
pub fn truncated_evolution_oracle<T: RealScalar>(
    tg: &TailedGraph,
    p: &TransitionKernel<T>,
    alpha: &[C<T>],
    steps: usize,
) -> Result<TruncatedEvolution<T>, DynamicsError> {
    if !super::kernel_is_valid(tg, p) {
        return Err(DynamicsError::InvalidKernel {
            max_residual: f64::NAN,
        });
    }
    let truncated = truncate(tg, steps + 2).expect("length >= 1");
    let probs = truncated_probabilities(tg, p, &truncated);
    let unitary = UnitaryEvolution::new(truncated.graph.clone(), &probs);
    let psi0 = truncated_initial_state(&truncated, alpha);
    let psi = unitary.evolve(&psi0, steps);
    Ok(TruncatedEvolution {
        truncated,
        unitary,
        psi,
        steps,
    })
}
