//! Minimum-norm least-squares for real matrices with complex right-hand
//! sides, backed by a one-sided Jacobi SVD.
//!
//! Every linear operator in this crate (the internal evolution restriction,
//! the weighted graph Laplacian) has real entries; complex data only enters
//! through the right-hand side. The systems are small and dense, and the
//! solves feed verification at 1e-8..1e-10 tolerances, so the factorization
//! uses cyclic one-sided Jacobi: slower than bidiagonalization but with
//! excellent relative accuracy and no convergence corner cases.

use crate::scalar::{C, RealScalar};
use nalgebra::DMatrix;

/// One-sided Jacobi factorization `A = U Σ V^T` with `U` kept implicitly as
/// the rotated columns `W = U Σ`.
#[derive(Debug, Clone)]
pub struct JacobiSvd<T> {
    /// Rotated input, columns `w_i = σ_i u_i`.
    pub w: DMatrix<T>,
    /// Accumulated right rotations, columns `v_i`.
    pub v: DMatrix<T>,
    /// Singular values, unsorted.
    pub sigma: Vec<T>,
}

/// Cyclic one-sided Jacobi on the columns of `a` (requires rows >= cols).
pub fn jacobi_svd<T: RealScalar>(a: DMatrix<T>) -> JacobiSvd<T> {
    let (m, n) = a.shape();
    assert!(m >= n, "one-sided Jacobi expects a square or tall matrix");
    let mut w = a;
    let mut v = DMatrix::<T>::identity(n, n);
    let tol = T::c(1e-15);
    let max_sweeps = 60;
    for _ in 0..max_sweeps {
        let mut rotated = false;
        for i in 0..n {
            for j in (i + 1)..n {
                let mut alpha = T::zero();
                let mut beta = T::zero();
                let mut gamma = T::zero();
                for k in 0..m {
                    let wi = w[(k, i)];
                    let wj = w[(k, j)];
                    alpha += wi * wi;
                    beta += wj * wj;
                    gamma += wi * wj;
                }
                let scale = num_traits::Float::sqrt(alpha * beta);
                if scale == T::zero() || num_traits::Float::abs(gamma) <= tol * scale {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (gamma * T::c(2.0));
                let t = {
                    let root = num_traits::Float::sqrt(T::one() + zeta * zeta);
                    let denom = if zeta >= T::zero() { zeta + root } else { zeta - root };
                    T::one() / denom
                };
                let c = T::one() / num_traits::Float::sqrt(T::one() + t * t);
                let s = c * t;
                for k in 0..m {
                    let wi = w[(k, i)];
                    let wj = w[(k, j)];
                    w[(k, i)] = c * wi - s * wj;
                    w[(k, j)] = s * wi + c * wj;
                }
                for k in 0..n {
                    let vi = v[(k, i)];
                    let vj = v[(k, j)];
                    v[(k, i)] = c * vi - s * vj;
                    v[(k, j)] = s * vi + c * vj;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let sigma = (0..n)
        .map(|i| num_traits::Float::sqrt(w.column(i).iter().fold(T::zero(), |a, &x| a + x * x)))
        .collect();
    JacobiSvd { w, v, sigma }
}

impl<T: RealScalar> JacobiSvd<T> {
    pub fn rank(&self, cutoff: T) -> usize {
        self.sigma.iter().filter(|&&s| s > cutoff).count()
    }

    pub fn max_singular_value(&self) -> T {
        self.sigma
            .iter()
            .fold(T::zero(), |a, &s| if s > a { s } else { a })
    }

    /// Pseudoinverse application `x = V Σ⁺ U^T b = Σ_i v_i (w_i · b) / σ_i²`
    /// over columns with `σ_i > cutoff`; the minimum-norm least-squares
    /// solution.
    pub fn pinv_apply(&self, b: &[C<T>], cutoff: T) -> Vec<C<T>> {
        let (m, n) = self.w.shape();
        debug_assert_eq!(b.len(), m);
        let zero = C::new(T::zero(), T::zero());
        let mut x = vec![zero; n];
        for i in 0..n {
            let sigma = self.sigma[i];
            if sigma <= cutoff {
                continue;
            }
            let mut proj = zero;
            for k in 0..m {
                proj += b[k] * self.w[(k, i)];
            }
            let coeff = proj * (T::one() / (sigma * sigma));
            for k in 0..n {
                x[k] += coeff * self.v[(k, i)];
            }
        }
        x
    }
}

/// Minimum-norm least-squares solution of `A x = b` plus the rank of `A`.
///
/// Singular values at or below `cutoff` are treated as zero, so rank-deficient
/// systems are handled; the returned solution is orthogonal to `ker(A)`.
pub fn min_norm_solve<T: RealScalar>(
    a: DMatrix<T>,
    rhs: &[C<T>],
    cutoff: T,
) -> (Vec<C<T>>, usize) {
    let svd = jacobi_svd(a);
    let rank = svd.rank(cutoff);
    (svd.pinv_apply(rhs, cutoff), rank)
}

/// Largest singular value.
pub fn operator_norm<T: RealScalar>(a: DMatrix<T>) -> T {
    jacobi_svd(a).max_singular_value()
}
