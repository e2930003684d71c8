//! Benchmark family: the triangle joined with a length-`k` path, two tails.
//!
//! Geometry and arc labels. The triangle vertices are `0, 1, 2`; tail 1
//! attaches at vertex 0, tail 2 at vertex 1, and the path `P_k` hangs off
//! vertex 2 (vertices `3, ..., k+2`). The clockwise triangle arcs are
//! labelled `b_1: 0->1`, `b_2: 1->2`, `b_3: 2->0`, so `b_1` starts at the
//! first tail's attach vertex and points toward the second tail's. Clockwise
//! motion carries probability `p`, counterclockwise `q`, and each of the
//! three triangle vertices sheds probability `r = 1 - p - q` onto its
//! attachment (tail or path). Path interior vertices split `1/2`-`1/2`; the
//! leaf reflects with probability 1. The inflow is `α = (1, 0)`.
//!
//! Golden values below assume this labelling; under it, `p = q` reproduces
//! the closed-form reversible state and `p != q` the antisymmetric one.

use crate::graph::{attach_tails, build_graph, ArcId, TailedGraph};
use crate::kernel::{ReversibleMeasure, TransitionKernel};
use crate::scalar::{C, RealScalar};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("probabilities must be positive and sum to 1 within 1e-12 (got p={p}, q={q}, r={r})")]
    InvalidProbabilities { p: f64, q: f64, r: f64 },
    #[error("path length k must be >= 1")]
    ZeroPathLength,
    #[error("closed form requires r in (0,1), got {0}")]
    ROutOfRange(f64),
    #[error("non-reversible closed form has a pole at p = q")]
    PoleAtEqualProbabilities,
}

/// Parameters of the triangle-with-path family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct C3PkSpec<T> {
    pub p: T,
    pub q: T,
    pub r: T,
    pub k: usize,
}

impl<T: RealScalar> C3PkSpec<T> {
    pub fn new(p: T, q: T, r: T, k: usize) -> Result<Self, ModelError> {
        let sum_residual = num_traits::Float::abs(p + q + r - T::one());
        if p <= T::zero() || q <= T::zero() || r <= T::zero() || sum_residual > T::c(1e-12) {
            return Err(ModelError::InvalidProbabilities {
                p: p.to_f64().unwrap_or(f64::NAN),
                q: q.to_f64().unwrap_or(f64::NAN),
                r: r.to_f64().unwrap_or(f64::NAN),
            });
        }
        if k == 0 {
            return Err(ModelError::ZeroPathLength);
        }
        Ok(Self { p, q, r, k })
    }

    pub fn is_reversible(&self) -> bool {
        self.p == self.q
    }
}

/// Arc ids of the labelled triangle arcs and the path arcs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct C3PkLabels {
    /// Clockwise arcs `b_1, b_2, b_3`.
    pub b: [ArcId; 3],
    /// Counterclockwise arcs `b̄_1, b̄_2, b̄_3`.
    pub b_bar: [ArcId; 3],
    /// All arcs of the path, both orientations.
    pub path: Vec<ArcId>,
}

/// A fully assembled instance of the family.
#[derive(Debug, Clone)]
pub struct C3PkInstance<T> {
    pub spec: C3PkSpec<T>,
    pub tg: TailedGraph,
    pub kernel: TransitionKernel<T>,
    pub alpha: Vec<C<T>>,
    pub labels: C3PkLabels,
}

/// Builds the tailed graph, kernel, and inflow `α = (1, 0)`.
pub fn make_c3pk<T: RealScalar>(spec: C3PkSpec<T>) -> C3PkInstance<T> {
    let C3PkSpec { p, q, r, k } = spec;
    let mut edges = vec![(0, 1), (1, 2), (2, 0)];
    for i in 0..k {
        edges.push((2 + i, 3 + i));
    }
    let g = build_graph(3 + k, &edges).expect("valid family geometry");
    let tg = attach_tails(g, &[0, 1]).expect("two tails");

    // canonical arc ids: 0:0->1  1:1->0  2:0->2  3:2->0  4:1->2  5:2->1,
    // then the path edges in order
    let labels = C3PkLabels {
        b: [0, 4, 3],
        b_bar: [1, 5, 2],
        path: (6..6 + 2 * k).collect(),
    };

    let half = T::c(0.5);
    let mut probs = vec![T::zero(); tg.internal().arc_count()];
    for i in 0..3 {
        probs[labels.b[i]] = p;
        probs[labels.b_bar[i]] = q;
    }
    for i in 0..k {
        let outward = 6 + 2 * i;
        probs[outward] = if i == 0 { r } else { half };
        probs[outward + 1] = if i + 1 == k { T::one() } else { half };
    }
    let kernel = TransitionKernel::new(&tg, probs, vec![r, r]).expect("valid kernel");
    let alpha = vec![C::new(T::one(), T::zero()), C::new(T::zero(), T::zero())];
    C3PkInstance {
        spec,
        tg,
        kernel,
        alpha,
        labels,
    }
}

/// Closed-form stationary state restricted to the internal graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormState<T> {
    pub b: [T; 3],
    pub b_bar: [T; 3],
    pub path_value: T,
    pub mass: T,
}

impl<T: RealScalar> ClosedFormState<T> {
    /// The state as an arc field under the labelling of [`make_c3pk`].
    pub fn as_arc_field(&self, labels: &C3PkLabels, arc_count: usize) -> Vec<C<T>> {
        let mut psi = vec![C::new(T::zero(), T::zero()); arc_count];
        for i in 0..3 {
            psi[labels.b[i]] = C::new(self.b[i], T::zero());
            psi[labels.b_bar[i]] = C::new(self.b_bar[i], T::zero());
        }
        for &a in &labels.path {
            psi[a] = C::new(self.path_value, T::zero());
        }
        psi
    }
}

/// Reversible case `p = q = (1-r)/2` with inflow `(1, 0)`.
pub fn closed_form_reversible<T: RealScalar>(
    r: T,
    k: usize,
) -> Result<ClosedFormState<T>, ModelError> {
    if r <= T::zero() || r >= T::one() {
        return Err(ModelError::ROutOfRange(r.to_f64().unwrap_or(f64::NAN)));
    }
    if k == 0 {
        return Err(ModelError::ZeroPathLength);
    }
    let denom = T::c(6.0)
        * num_traits::Float::sqrt(T::c(2.0))
        * num_traits::Float::sqrt(r * (T::one() - r));
    let three = T::c(3.0);
    let b1 = (three + r) / denom;
    let b1_bar = (three - T::c(7.0) * r) / denom;
    let side = (three - T::c(5.0) * r) / denom;
    let side_bar = (three - r) / denom;
    let mass = -T::c(17.0 / 12.0)
        + T::c(2.0 / 3.0) / (T::one() - r)
        + T::c(0.75) / r
        + T::c(0.5) * T::from_usize(k).unwrap()
        + T::one();
    Ok(ClosedFormState {
        b: [b1, side, side],
        b_bar: [b1_bar, side_bar, side_bar],
        path_value: T::c(0.5),
        mass,
    })
}

/// Non-reversible case `p != q` with inflow `(1, 0)`: antisymmetric on the
/// triangle, zero on the path.
pub fn closed_form_nonreversible<T: RealScalar>(
    p: T,
    q: T,
    r: T,
) -> Result<ClosedFormState<T>, ModelError> {
    if p == q {
        return Err(ModelError::PoleAtEqualProbabilities);
    }
    let denom = num_traits::Float::powf(p, T::c(1.5)) - num_traits::Float::powf(q, T::c(1.5));
    let sqrt_r = num_traits::Float::sqrt(r);
    let b1 = p * sqrt_r / denom;
    let b2 = num_traits::Float::sqrt(p * q) * sqrt_r / denom;
    let b3 = q * sqrt_r / denom;
    let mass = T::c(2.0) * r * (p * p + p * q + q * q) / (denom * denom) + T::one();
    Ok(ClosedFormState {
        b: [b1, b2, b3],
        b_bar: [-b1, -b2, -b3],
        path_value: T::zero(),
        mass,
    })
}

/// The reversible measure in the gauge the closed-form currents assume:
/// conductance `1 - r` on triangle edges, `2r` on path and boundary edges.
pub fn reference_measure<T: RealScalar>(spec: &C3PkSpec<T>) -> ReversibleMeasure<T> {
    assert!(spec.is_reversible(), "reference measure needs p = q");
    let r = spec.r;
    let one_minus_r = T::one() - r;
    let two_r = T::c(2.0) * r;
    let mut edge = vec![one_minus_r, one_minus_r, one_minus_r];
    edge.extend(std::iter::repeat(two_r).take(spec.k));
    let two = T::c(2.0);
    let four_r = T::c(4.0) * r;
    let mut vertex = vec![two, two, two];
    for i in 0..spec.k {
        vertex.push(if i + 1 == spec.k { two_r } else { four_r });
    }
    ReversibleMeasure {
        vertex,
        edge,
        boundary_edge: vec![two_r, two_r],
    }
}

/// Support classification of a stationary state on the internal graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Penetration {
    /// Every unoriented edge carries amplitude on at least one orientation.
    Full,
    /// No internal amplitude above the threshold.
    None,
    /// Some edges occupied, some empty.
    Partial,
}

pub fn penetration_check<T: RealScalar>(psi_internal: &[C<T>], tol: T) -> Penetration {
    let edge_count = psi_internal.len() / 2;
    let mut occupied = 0;
    for e in 0..edge_count {
        if psi_internal[2 * e].norm() > tol || psi_internal[2 * e + 1].norm() > tol {
            occupied += 1;
        }
    }
    if occupied == edge_count && edge_count > 0 {
        Penetration::Full
    } else if occupied == 0 {
        Penetration::None
    } else {
        Penetration::Partial
    }
}

/// One row of the mass divergence scan.
#[derive(Debug, Clone, Copy)]
pub struct ScanRow<T> {
    pub epsilon: T,
    pub m_simulated: T,
    pub m_closed_form: T,
}

/// Tabulates the internal mass against `ε = p - q` at fixed `r`, both from
/// the solver and from the closed forms. `ε = 0` rows use the reversible
/// closed form (finite), exhibiting the jump at reversibility.
pub fn divergence_scan<T: RealScalar>(
    r: T,
    k: usize,
    epsilons: &[T],
) -> Result<Vec<ScanRow<T>>, crate::dynamics::DynamicsError> {
    use crate::dynamics::{mass, stationary_state, Method, SolverOptions};
    let mut rows = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let half = T::c(0.5);
        let p = (T::one() - r + eps) * half;
        let q = (T::one() - r - eps) * half;
        let spec = C3PkSpec::new(p, q, r, k).expect("scan epsilon leaves probabilities valid");
        let inst = make_c3pk(spec);
        let report = stationary_state(
            &inst.tg,
            &inst.kernel,
            &inst.alpha,
            &SolverOptions {
                method: Method::DirectSolve,
                ..SolverOptions::default()
            },
        )?;
        let m_simulated = mass(&inst.tg, &report.psi);
        let m_closed_form = if eps == T::zero() {
            closed_form_reversible(r, k).expect("valid r").mass
        } else {
            closed_form_nonreversible(p, q, r).expect("p != q").mass
        };
        rows.push(ScanRow {
            epsilon: eps,
            m_simulated,
            m_closed_form,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn spec_validation() {
        assert!(C3PkSpec::new(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 1).is_ok());
        assert_eq!(
            C3PkSpec::new(0.5, 0.2, 0.2, 1).unwrap_err(),
            ModelError::InvalidProbabilities { p: 0.5, q: 0.2, r: 0.2 }
        );
        assert_eq!(
            C3PkSpec::new(0.4, 0.4, 0.2, 0).unwrap_err(),
            ModelError::ZeroPathLength
        );
    }

    #[test]
    fn grover_instance_shape() {
        let spec = C3PkSpec::new(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 1).unwrap();
        let inst = make_c3pk(spec);
        assert_eq!(inst.tg.internal().vertex_count(), 4);
        assert_eq!(inst.tg.internal().arc_count(), 8);
        assert_eq!(inst.tg.tail_count(), 2);
        // b_1 leaves the first tail's attach vertex toward the second's
        assert_eq!(inst.tg.internal().origin(inst.labels.b[0]), 0);
        assert_eq!(inst.tg.internal().terminus(inst.labels.b[0]), 1);
        assert!(crate::kernel::validate_kernel(&inst.tg, &inst.kernel).passes);
    }

    #[test]
    fn kernel_normalizes_for_longer_paths() {
        for k in [1, 2, 3, 5] {
            let spec = C3PkSpec::new(0.45, 0.45, 0.1, k).unwrap();
            let inst = make_c3pk(spec);
            assert!(crate::kernel::validate_kernel(&inst.tg, &inst.kernel).passes);
        }
    }

    #[test]
    fn grover_closed_form_values() {
        let cf = closed_form_reversible(1.0 / 3.0, 1).unwrap();
        assert_relative_eq!(cf.b[0], 5.0 / 6.0, epsilon = 1e-15);
        assert_relative_eq!(cf.b_bar[0], 1.0 / 6.0, epsilon = 1e-15);
        assert_relative_eq!(cf.b[1], 1.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(cf.b_bar[1], 2.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(cf.path_value, 0.5, epsilon = 1e-15);
        // mass 11/6 + k/2 + 1
        assert_relative_eq!(cf.mass, 11.0 / 6.0 + 0.5 + 1.0, epsilon = 1e-12);
        let cf4 = closed_form_reversible(1.0 / 3.0, 4).unwrap();
        assert_relative_eq!(cf4.mass, 11.0 / 6.0 + 2.0 + 1.0, epsilon = 1e-12);
        assert!(closed_form_reversible(1.5, 1).is_err());
    }

    #[test]
    fn nonreversible_closed_form_values() {
        let cf = closed_form_nonreversible(0.5, 1.0 / 6.0, 1.0 / 3.0).unwrap();
        // beta = sqrt(p^2 r) / (p^{3/2} - q^{3/2})
        let denom = 0.5_f64.powf(1.5) - (1.0 / 6.0_f64).powf(1.5);
        assert_relative_eq!(cf.b[0], 0.5 * (1.0 / 3.0_f64).sqrt() / denom, epsilon = 1e-14);
        assert!((cf.b[0] - 1.0111).abs() < 5e-4);
        assert!((cf.mass - 3.9533).abs() < 5e-4);
        assert_eq!(cf.path_value, 0.0);
        assert_eq!(
            closed_form_nonreversible(0.3, 0.3, 0.4).unwrap_err(),
            ModelError::PoleAtEqualProbabilities
        );
    }

    #[test]
    fn reference_measure_satisfies_detailed_balance() {
        let spec = C3PkSpec::new(0.35, 0.35, 0.3, 3).unwrap();
        let inst = make_c3pk(spec);
        let m = reference_measure(&spec);
        let g = inst.tg.internal();
        for e in 0..g.edge_count() {
            let a = 2 * e;
            assert_relative_eq!(
                inst.kernel.internal(a) * m.vertex[g.origin(a)],
                m.edge[e],
                max_relative = 1e-13
            );
            assert_relative_eq!(
                inst.kernel.internal(a + 1) * m.vertex[g.terminus(a)],
                m.edge[e],
                max_relative = 1e-13
            );
        }
        for (j, tail) in inst.tg.tails().iter().enumerate() {
            assert_relative_eq!(
                inst.kernel.escape(j) * m.vertex[tail.attach],
                m.boundary_edge[j],
                max_relative = 1e-13
            );
        }
    }

    #[test]
    fn penetration_classes() {
        let zero = C::new(0.0, 0.0);
        let one = C::new(1.0, 0.0);
        assert_eq!(penetration_check(&[one, zero, zero, one], 1e-9), Penetration::Full);
        assert_eq!(penetration_check(&[zero, zero, zero, zero], 1e-9), Penetration::None);
        assert_eq!(penetration_check(&[one, one, zero, zero], 1e-9), Penetration::Partial);
    }
}
