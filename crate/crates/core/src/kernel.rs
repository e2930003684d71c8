//! Random-walk kernels on tailed graphs: validation, reversibility detection,
//! reversible-measure construction, boundary conductances.
//!
//! A kernel stores probabilities on internal arcs and on the outbound
//! boundary arcs `ē_j`; the inbound boundary arcs and all deeper tail arcs
//! implicitly carry `1/2`.

use crate::graph::{cycle_basis, fundamental_cycle_from_parents, ArcId, EdgeId, TailedGraph, VertexId};
use crate::scalar::RealScalar;
use thiserror::Error;

/// Per-vertex normalization must hold to this tolerance.
pub const NORMALIZATION_TOL: f64 = 1e-12;
/// Relative tolerance for detailed-balance verification.
pub const DETAILED_BALANCE_REL_TOL: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum KernelError {
    #[error("probability for arc {arc} is {value}, outside (0, 1]")]
    OutOfDomain { arc: ArcId, value: f64 },
    #[error("expected {expected} internal arc probabilities, got {got}")]
    InternalLengthMismatch { expected: usize, got: usize },
    #[error("expected {expected} tail escape probabilities, got {got}")]
    EscapeLengthMismatch { expected: usize, got: usize },
    #[error("missing probability for arc {0}")]
    MissingArc(ArcId),
}

/// Transition probabilities on internal arcs plus the tail escape arcs.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionKernel<T> {
    internal: Vec<T>,
    escape: Vec<T>,
}

impl<T: RealScalar> TransitionKernel<T> {
    /// `internal[a]` is `p(a)` for internal arc `a`; `escape[j]` is `p(ē_j)`.
    /// Every probability must lie in `(0, 1]`.
    pub fn new(tg: &TailedGraph, internal: Vec<T>, escape: Vec<T>) -> Result<Self, KernelError> {
        if internal.len() != tg.internal().arc_count() {
            return Err(KernelError::InternalLengthMismatch {
                expected: tg.internal().arc_count(),
                got: internal.len(),
            });
        }
        if escape.len() != tg.tail_count() {
            return Err(KernelError::EscapeLengthMismatch {
                expected: tg.tail_count(),
                got: escape.len(),
            });
        }
        let check = |arc: ArcId, value: T| -> Result<(), KernelError> {
            if value <= T::zero() || value > T::one() {
                return Err(KernelError::OutOfDomain {
                    arc,
                    value: value.to_f64().unwrap_or(f64::NAN),
                });
            }
            Ok(())
        };
        for (a, &p) in internal.iter().enumerate() {
            check(a, p)?;
        }
        for (j, &p) in escape.iter().enumerate() {
            check(tg.tails()[j].outbound_arc, p)?;
        }
        Ok(Self { internal, escape })
    }

    pub fn internal(&self, a: ArcId) -> T {
        self.internal[a]
    }

    pub fn internal_probs(&self) -> &[T] {
        &self.internal
    }

    /// `p(ē_j)`, the probability of escaping onto tail `j`.
    pub fn escape(&self, j: usize) -> T {
        self.escape[j]
    }

    pub fn escape_probs(&self) -> &[T] {
        &self.escape
    }
}

/// Per-vertex normalization residuals.
#[derive(Debug, Clone)]
pub struct KernelValidation<T> {
    pub vertex_residuals: Vec<T>,
    pub max_residual: T,
    pub passes: bool,
    /// Attach vertices whose entire outgoing mass escapes onto tails.
    pub tail_dominated: Vec<VertexId>,
}

/// Checks that outgoing probabilities sum to one at every internal vertex.
pub fn validate_kernel<T: RealScalar>(
    tg: &TailedGraph,
    p: &TransitionKernel<T>,
) -> KernelValidation<T> {
    let g = tg.internal();
    let mut residuals = Vec::with_capacity(g.vertex_count());
    let mut max_residual = T::zero();
    let mut tail_dominated = Vec::new();
    for u in 0..g.vertex_count() {
        let mut sum = T::zero();
        let mut internal_sum = T::zero();
        for &a in g.out_arcs(u) {
            sum += p.internal(a);
            internal_sum += p.internal(a);
        }
        let mut has_tail = false;
        for j in tg.tails_at(u) {
            sum += p.escape(j);
            has_tail = true;
        }
        let residual = num_traits::Float::abs(sum - T::one());
        if residual > max_residual {
            max_residual = residual;
        }
        residuals.push(residual);
        if has_tail && internal_sum <= T::c(NORMALIZATION_TOL) {
            tail_dominated.push(u);
        }
    }
    KernelValidation {
        vertex_residuals: residuals,
        max_residual,
        passes: max_residual <= T::c(NORMALIZATION_TOL),
        tail_dominated,
    }
}

/// Vertex and edge measures satisfying detailed balance,
/// `p(a) m_V(o(a)) = p(ā) m_V(t(a)) = m_E(|a|)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReversibleMeasure<T> {
    /// `m_V` on internal vertices.
    pub vertex: Vec<T>,
    /// `m_E` on internal edges.
    pub edge: Vec<T>,
    /// `m_E` on the boundary edges `|e_j|`, one per tail.
    pub boundary_edge: Vec<T>,
}

impl<T: RealScalar> ReversibleMeasure<T> {
    /// `m(δG_0) = Σ_j m_E(|e_j|)`.
    pub fn boundary_total(&self) -> T {
        self.boundary_edge
            .iter()
            .fold(T::zero(), |acc, &x| acc + x)
    }

    /// Same measure with every weight multiplied by `c` (gauge change).
    pub fn scaled(&self, c: T) -> Self {
        Self {
            vertex: self.vertex.iter().map(|&x| x * c).collect(),
            edge: self.edge.iter().map(|&x| x * c).collect(),
            boundary_edge: self.boundary_edge.iter().map(|&x| x * c).collect(),
        }
    }

    /// `m_E` lookup that covers boundary edges (indices past the internal edges).
    pub fn edge_measure(&self, e: EdgeId) -> T {
        if e < self.edge.len() {
            self.edge[e]
        } else {
            self.boundary_edge[e - self.edge.len()]
        }
    }
}

/// Outcome of reversibility detection.
#[derive(Debug, Clone, PartialEq)]
pub enum ReversibilityVerdict<T> {
    Reversible(ReversibleMeasure<T>),
    NonReversible {
        /// Cycle on which detailed balance fails.
        witness_cycle: Vec<ArcId>,
        max_relative_violation: T,
    },
}

impl<T> ReversibilityVerdict<T> {
    pub fn is_reversible(&self) -> bool {
        matches!(self, ReversibilityVerdict::Reversible(_))
    }

    pub fn measure(&self) -> Option<&ReversibleMeasure<T>> {
        match self {
            ReversibilityVerdict::Reversible(m) => Some(m),
            ReversibilityVerdict::NonReversible { .. } => None,
        }
    }
}

/// Detects reversibility by spanning-tree propagation of a candidate `m_V`,
/// then verifying detailed balance on every arc.
///
/// Gauge: the attach vertex of the first tail is the propagation root and
/// gets `m_V = 2`. In that gauge the measure extends to tail vertices as
/// `2 m_E(|e_j|)`, and boundary edges carry `m_E(|e_j|) = p(ē_j) m_V(o(P_j))`.
pub fn find_reversible_measure<T: RealScalar>(
    tg: &TailedGraph,
    p: &TransitionKernel<T>,
) -> ReversibilityVerdict<T> {
    let g = tg.internal();
    let n = g.vertex_count();
    let root = tg.tails()[0].attach;
    let mut m_v: Vec<Option<T>> = vec![None; n];
    let mut parent_arc: Vec<Option<ArcId>> = vec![None; n];
    let mut depth = vec![0usize; n];
    m_v[root] = Some(T::c(2.0));
    let mut queue = std::collections::VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        let mu = m_v[u].unwrap();
        for &a in g.out_arcs(u) {
            let v = g.terminus(a);
            if m_v[v].is_none() {
                m_v[v] = Some(mu * p.internal(a) / p.internal(g.inv(a)));
                parent_arc[v] = Some(a);
                depth[v] = depth[u] + 1;
                queue.push_back(v);
            }
        }
    }
    // The pipeline assumes a connected internal graph; propagation reaches
    // every vertex exactly when that holds.
    let m_v: Vec<T> = m_v
        .into_iter()
        .map(|x| x.expect("internal graph connected"))
        .collect();

    // Verify detailed balance on all arcs, including non-tree and parallels.
    let mut worst = T::zero();
    let mut worst_edge: Option<EdgeId> = None;
    for e in 0..g.edge_count() {
        let a = 2 * e;
        let x = p.internal(a) * m_v[g.origin(a)];
        let y = p.internal(a + 1) * m_v[g.terminus(a)];
        let scale = num_traits::Float::max(x, y);
        let violation = num_traits::Float::abs(x - y) / scale;
        if violation > worst {
            worst = violation;
            worst_edge = Some(e);
        }
    }
    if worst > T::c(DETAILED_BALANCE_REL_TOL) {
        // A violating edge is never a propagation-tree edge (those are
        // balanced by construction), so its fundamental cycle witnesses
        // the Kolmogorov failure.
        let witness_cycle =
            fundamental_cycle_from_parents(g, &parent_arc, &depth, 2 * worst_edge.unwrap());
        return ReversibilityVerdict::NonReversible {
            witness_cycle,
            max_relative_violation: worst,
        };
    }

    let edge = (0..g.edge_count())
        .map(|e| p.internal(2 * e) * m_v[g.origin(2 * e)])
        .collect();
    let boundary_edge = tg
        .tails()
        .iter()
        .enumerate()
        .map(|(j, t)| p.escape(j) * m_v[t.attach])
        .collect();
    ReversibilityVerdict::Reversible(ReversibleMeasure {
        vertex: m_v,
        edge,
        boundary_edge,
    })
}

/// Independent reversibility route: Kolmogorov's criterion on every
/// fundamental cycle (forward vs backward probability products).
pub fn kolmogorov_cycle_check<T: RealScalar>(
    tg: &TailedGraph,
    p: &TransitionKernel<T>,
) -> (bool, T) {
    let g = tg.internal();
    let mut worst = T::zero();
    for cycle in &cycle_basis(g).cycles {
        let mut fwd = T::one();
        let mut bwd = T::one();
        for &a in cycle {
            fwd = fwd * p.internal(a);
            bwd = bwd * p.internal(g.inv(a));
        }
        let scale = num_traits::Float::max(fwd, bwd);
        let violation = num_traits::Float::abs(fwd - bwd) / scale;
        if violation > worst {
            worst = violation;
        }
    }
    (worst <= T::c(DETAILED_BALANCE_REL_TOL), worst)
}

/// Kernel read off a measure: `p(a) = m_E(|a|) / m_V(o(a))`. Reversible by
/// construction; useful for gauge-invariance checks and generators.
pub fn kernel_from_measure<T: RealScalar>(
    tg: &TailedGraph,
    m: &ReversibleMeasure<T>,
) -> Result<TransitionKernel<T>, KernelError> {
    let g = tg.internal();
    let internal = g
        .arc_ids()
        .map(|a| m.edge[g.edge_of(a)] / m.vertex[g.origin(a)])
        .collect();
    let escape = tg
        .tails()
        .iter()
        .enumerate()
        .map(|(j, t)| m.boundary_edge[j] / m.vertex[t.attach])
        .collect();
    TransitionKernel::new(tg, internal, escape)
}

/// Unit vector on `C^r` with entries `sqrt(m_E(|e_j|) / m(δG_0))`.
pub fn boundary_conductance<T: RealScalar>(m: &ReversibleMeasure<T>) -> Vec<T> {
    let total = m.boundary_total();
    m.boundary_edge
        .iter()
        .map(|&w| num_traits::Float::sqrt(w / total))
        .collect()
}
