//! Predicted vs measured scattering at the boundary.
//!
//! Reversible kernels scatter the inflow through the reflection coin of the
//! boundary conductance vector; non-reversible kernels reflect everything
//! with a phase flip. The regime is always taken from the kernel's
//! reversibility verdict, never assumed: the comparison against the measured
//! outflow is a check of the theory, not a definition.

use crate::dynamics::{stationary_state, DynamicsError, SolverOptions};
use crate::graph::TailedGraph;
use crate::kernel::{boundary_conductance, find_reversible_measure, TransitionKernel};
use crate::scalar::{C, RealScalar};
use nalgebra::DMatrix;
use thiserror::Error;

/// Passing threshold for the measured-vs-predicted outflow residual.
pub const SCATTERING_TOL: f64 = 1e-8;

#[derive(Debug, Error, PartialEq)]
pub enum ScatteringError {
    #[error("reversible regime requires a reversible measure")]
    MissingMeasure,
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Reversible,
    NonReversible,
}

/// Reflection matrix `2 v v^T - I` of a real unit vector.
pub fn szegedy_reflection<T: RealScalar>(v: &[T]) -> DMatrix<T> {
    let r = v.len();
    let two = T::c(2.0);
    DMatrix::from_fn(r, r, |i, j| {
        let mut x = two * v[i] * v[j];
        if i == j {
            x -= T::one();
        }
        x
    })
}

/// The scattering matrix the theory predicts for the regime: the boundary
/// reflection coin, or `-I` in the non-reversible case.
pub fn predicted_scattering<T: RealScalar>(
    regime: Regime,
    m_delta_e: Option<&[T]>,
) -> Result<DMatrix<T>, ScatteringError> {
    match regime {
        Regime::Reversible => {
            let v = m_delta_e.ok_or(ScatteringError::MissingMeasure)?;
            Ok(szegedy_reflection(v))
        }
        Regime::NonReversible => {
            let r = m_delta_e.map(<[T]>::len).unwrap_or(0);
            let mut m = DMatrix::from_element(r, r, T::zero());
            for i in 0..r {
                m[(i, i)] = -T::one();
            }
            Ok(m)
        }
    }
}

/// Measured and predicted outflow for one instance.
#[derive(Debug, Clone)]
pub struct ScatteringReport<T> {
    pub alpha_in: Vec<C<T>>,
    pub beta_measured: Vec<C<T>>,
    pub beta_predicted: Vec<C<T>>,
    /// Real scattering matrix (reflection coin or `-I`).
    pub s_matrix: DMatrix<T>,
    pub residual_inf_norm: T,
    pub regime: Regime,
}

impl<T: RealScalar> ScatteringReport<T> {
    pub fn passes(&self) -> bool {
        self.residual_inf_norm <= T::c(SCATTERING_TOL)
    }
}

fn apply_real_matrix<T: RealScalar>(m: &DMatrix<T>, v: &[C<T>]) -> Vec<C<T>> {
    (0..m.nrows())
        .map(|i| {
            v.iter()
                .enumerate()
                .fold(C::new(T::zero(), T::zero()), |acc, (j, z)| {
                    acc + z * m[(i, j)]
                })
        })
        .collect()
}

/// Runs the full pipeline and compares the measured outflow against the
/// regime's predicted scattering of `α`.
pub fn verify_scattering<T: RealScalar>(
    tg: &TailedGraph,
    p: &TransitionKernel<T>,
    alpha: &[C<T>],
    opts: &SolverOptions<T>,
) -> Result<ScatteringReport<T>, ScatteringError> {
    let verdict = find_reversible_measure(tg, p);
    let (regime, conductance) = match verdict.measure() {
        Some(m) => (Regime::Reversible, Some(boundary_conductance(m))),
        None => (Regime::NonReversible, None),
    };
    let s_matrix = match regime {
        Regime::Reversible => predicted_scattering(regime, conductance.as_deref())?,
        Regime::NonReversible => {
            let zeros = vec![T::zero(); tg.tail_count()];
            predicted_scattering(regime, Some(&zeros))?
        }
    };
    let report = stationary_state(tg, p, alpha, opts)?;
    let beta_measured = report.psi.outflow.clone();
    let beta_predicted = apply_real_matrix(&s_matrix, alpha);
    let residual_inf_norm = crate::scalar::inf_norm_diff(&beta_measured, &beta_predicted);
    Ok(ScatteringReport {
        alpha_in: alpha.to_vec(),
        beta_measured,
        beta_predicted,
        s_matrix,
        residual_inf_norm,
        regime,
    })
}

/// Gram matrix of the outflows produced by the basis inflows `α = δ_i`.
/// Orthonormal columns are the proof-level statement behind unitarity of the
/// scattering matrix.
pub fn unitarity_of_columns<T: RealScalar>(
    tg: &TailedGraph,
    p: &TransitionKernel<T>,
    opts: &SolverOptions<T>,
) -> Result<DMatrix<C<T>>, ScatteringError> {
    let r = tg.tail_count();
    let mut outputs = Vec::with_capacity(r);
    for i in 0..r {
        let mut alpha = vec![C::new(T::zero(), T::zero()); r];
        alpha[i] = C::new(T::one(), T::zero());
        let report = stationary_state(tg, p, &alpha, opts)?;
        outputs.push(report.psi.outflow);
    }
    Ok(DMatrix::from_fn(r, r, |i_prime, i| {
        outputs[i_prime]
            .iter()
            .zip(&outputs[i])
            .fold(C::new(T::zero(), T::zero()), |acc, (a, b)| {
                acc + a.conj() * b
            })
    }))
}

/// The inverse problem: classify the regime from the scattering response to
/// one generic inflow, without consulting the kernel's verdict.
///
/// A reversible walk returns `β = -α` only when `⟨m_δE, α⟩ = 0`, so for a
/// generic complex `α` the phase-flip signature separates the regimes.
pub fn infer_regime_from_scattering<T: RealScalar>(
    tg: &TailedGraph,
    p: &TransitionKernel<T>,
    alpha: &[C<T>],
    opts: &SolverOptions<T>,
) -> Result<Regime, ScatteringError> {
    let report = stationary_state(tg, p, alpha, opts)?;
    let mut flip_residual = T::zero();
    for (b, a) in report.psi.outflow.iter().zip(alpha) {
        let d = (b + a).norm();
        if d > flip_residual {
            flip_residual = d;
        }
    }
    Ok(if flip_residual <= T::c(SCATTERING_TOL) {
        Regime::NonReversible
    } else {
        Regime::Reversible
    })
}
