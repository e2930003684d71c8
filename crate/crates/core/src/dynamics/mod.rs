//! The Szegedy evolution and its induced dynamical system on internal arcs.
//!
//! At every vertex the walk applies the reflection coin `Sz(u) = 2uu* - I`
//! to the amplitudes of incoming arcs, `u` being the square roots of the
//! outgoing transition probabilities, and writes the result onto the outgoing
//! arcs. With a constant inflow `α` on the tails this reduces on internal
//! arcs to the affine map `ψ_{n+1} = E_PON ψ_n + ρ`, whose fixed point is the
//! stationary state. Both the fixed-point iteration and the truncated-tail
//! oracle in [`oracle`] funnel through the same [`coin_apply`] kernel, so
//! their trajectories agree bit for bit.

pub mod identities;
pub mod oracle;

use crate::graph::{ArcId, TailedGraph, VertexId};
use crate::kernel::{validate_kernel, TransitionKernel, NORMALIZATION_TOL};
use crate::scalar::{inf_norm_diff, C, RealScalar};
use nalgebra::DMatrix;
use thiserror::Error;

/// Fixed-point residual threshold for a successful stationary state.
pub const FIXED_POINT_TOL: f64 = 1e-9;
/// Residual above which a min-norm solve is treated as inconsistent.
pub const CONSISTENCY_TOL: f64 = 1e-8;
/// Singular values below this are treated as zero in rank-deficient solves.
pub const RANK_CUTOFF: f64 = 1e-10;
/// Probability of the inbound tail arcs, fixed by the free walk on tails.
pub const TAIL_PROB: f64 = 0.5;

#[derive(Debug, Error, PartialEq)]
pub enum DynamicsError {
    #[error("kernel fails per-vertex normalization (max residual {max_residual:.3e})")]
    InvalidKernel { max_residual: f64 },
    #[error("coin vector has norm {norm} (must be 1 within 1e-12)")]
    NonUnitCoinVector { norm: f64 },
    #[error("no convergence after {steps} steps (last sup-norm step {last_residual:.3e})")]
    NonConvergence { steps: usize, last_residual: f64 },
    #[error(
        "iteration oscillates: even/odd subsequences settled (period-2 movement \
         {parity_residual:.3e}) but the limits stay {gap:.3e} apart after {steps} steps"
    )]
    Oscillation {
        steps: usize,
        /// Distance between the even and odd accumulation points.
        gap: f64,
        /// Final movement within each parity subsequence.
        parity_residual: f64,
    },
    #[error("linear system inconsistent: min-norm residual {residual:.3e}")]
    InconsistentSystem { residual: f64 },
}

/// Reflection coin `2uu* - I` for a unit vector `u`.
pub fn local_coin<T: RealScalar>(u: &[C<T>]) -> Result<DMatrix<C<T>>, DynamicsError> {
    let norm_sq = u.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr());
    let norm = num_traits::Float::sqrt(norm_sq);
    if num_traits::Float::abs(norm - T::one()) > T::c(1e-12) {
        return Err(DynamicsError::NonUnitCoinVector {
            norm: norm.to_f64().unwrap_or(f64::NAN),
        });
    }
    let d = u.len();
    let two = T::c(2.0);
    Ok(DMatrix::from_fn(d, d, |i, j| {
        let mut z = u[i] * u[j].conj() * two;
        if i == j {
            z -= C::new(T::one(), T::zero());
        }
        z
    }))
}

/// Applies `Sz([sqrt_p]) `to `input`, writing onto `out`.
///
/// `out[i] = 2 sqrt_p[i] * S - input[i]` with `S = Σ_j sqrt_p[j] input[j]`.
/// Every evolution path in this crate funnels through here; the shared
/// summation order is what makes the induced iteration and the truncated
/// oracle bit-identical.
///
/// A degree-2 coin with both probabilities 1/2 is `[[0,1],[1,0]]`, an exact
/// amplitude swap; taking that branch keeps the free transport on tails free
/// of rounding, which the oracle comparison relies on.
#[inline]
pub fn coin_apply<T: RealScalar>(sqrt_p: &[T], input: &[C<T>], out: &mut [C<T>]) {
    if sqrt_p.len() == 2 && sqrt_p[0] == sqrt_p[1] {
        // normalization forces p = 1/2 on both arcs: pure transport
        out[0] = input[1];
        out[1] = input[0];
        return;
    }
    let mut s = C::new(T::zero(), T::zero());
    for (w, z) in sqrt_p.iter().zip(input) {
        s += z * *w;
    }
    let two = T::c(2.0);
    for i in 0..sqrt_p.len() {
        out[i] = s * (sqrt_p[i] * two) - input[i];
    }
}

/// Complex amplitude field of a stationary (or intermediate) state.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction<T> {
    /// Amplitudes on internal arcs, indexed by arc id.
    pub internal: Vec<C<T>>,
    /// Inflow amplitudes `α_j = Ψ(e_j)`.
    pub inflow: Vec<C<T>>,
    /// Outflow amplitudes `β_j = Ψ(ē_j)`.
    pub outflow: Vec<C<T>>,
}

/// Coin site of one internal vertex inside the induced system.
#[derive(Debug, Clone)]
struct VertexSite<T> {
    /// Internal outgoing arcs, ascending by id.
    out_arcs: Vec<ArcId>,
    /// Tail indices attached here, ascending.
    tails: Vec<usize>,
    /// `sqrt(p)` aligned with `out_arcs` then `tails` (escape probabilities).
    sqrt_p: Vec<T>,
}

/// `ψ_{n+1} = E_PON ψ_n + ρ` realized as per-vertex coins with the tail
/// inflow spliced into each boundary coin.
#[derive(Debug, Clone)]
pub struct InducedSystem<T> {
    arc_count: usize,
    sites: Vec<VertexSite<T>>,
    alpha: Vec<C<T>>,
    rho: Vec<C<T>>,
    max_degree: usize,
}

/// Scratch buffers for one coin pass (reused across vertices).
#[derive(Debug, Clone, Default)]
pub struct CoinWorkspace<T> {
    input: Vec<C<T>>,
    output: Vec<C<T>>,
}

impl<T: RealScalar> CoinWorkspace<T> {
    pub fn with_capacity(max_degree: usize) -> Self {
        let zero = C::new(T::zero(), T::zero());
        Self {
            input: vec![zero; max_degree],
            output: vec![zero; max_degree],
        }
    }

    /// Input and output views for a degree-`d` coin.
    pub fn split(&mut self, d: usize) -> (&mut [C<T>], &mut [C<T>]) {
        (&mut self.input[..d], &mut self.output[..d])
    }
}

impl<T: RealScalar> InducedSystem<T> {
    /// Builds `E_PON` and `ρ` for the given inflow.
    ///
    /// `ρ(a) = Σ_j 2 sqrt(p(a) p(ē_j)) α_j` over tails `j` attached at
    /// `o(a)`: the inbound tail amplitude pushed through the boundary coin.
    pub fn build(
        tg: &TailedGraph,
        p: &TransitionKernel<T>,
        alpha: &[C<T>],
    ) -> Result<Self, DynamicsError> {
        let validation = validate_kernel(tg, p);
        if !validation.passes {
            return Err(DynamicsError::InvalidKernel {
                max_residual: validation.max_residual.to_f64().unwrap_or(f64::NAN),
            });
        }
        assert_eq!(alpha.len(), tg.tail_count(), "inflow length must match tail count");
        let g = tg.internal();
        let mut sites = Vec::with_capacity(g.vertex_count());
        let mut max_degree = 0;
        for u in 0..g.vertex_count() {
            let out_arcs: Vec<ArcId> = g.out_arcs(u).to_vec();
            let tails: Vec<usize> = tg.tails_at(u).collect();
            let mut sqrt_p = Vec::with_capacity(out_arcs.len() + tails.len());
            for &a in &out_arcs {
                sqrt_p.push(num_traits::Float::sqrt(p.internal(a)));
            }
            for &j in &tails {
                sqrt_p.push(num_traits::Float::sqrt(p.escape(j)));
            }
            max_degree = max_degree.max(sqrt_p.len());
            sites.push(VertexSite {
                out_arcs,
                tails,
                sqrt_p,
            });
        }
        let mut rho = vec![C::new(T::zero(), T::zero()); g.arc_count()];
        let two = T::c(2.0);
        for site in &sites {
            if site.tails.is_empty() {
                continue;
            }
            let n_int = site.out_arcs.len();
            for (i, &a) in site.out_arcs.iter().enumerate() {
                let mut z = C::new(T::zero(), T::zero());
                for (k, &j) in site.tails.iter().enumerate() {
                    z += alpha[j] * (site.sqrt_p[i] * site.sqrt_p[n_int + k] * two);
                }
                rho[a] = z;
            }
        }
        Ok(Self {
            arc_count: g.arc_count(),
            sites,
            alpha: alpha.to_vec(),
            rho,
            max_degree,
        })
    }

    pub fn arc_count(&self) -> usize {
        self.arc_count
    }

    pub fn alpha(&self) -> &[C<T>] {
        &self.alpha
    }

    /// The input vector `ρ` of the induced system.
    pub fn rho(&self) -> &[C<T>] {
        &self.rho
    }

    pub fn workspace(&self) -> CoinWorkspace<T> {
        CoinWorkspace::with_capacity(self.max_degree)
    }

    /// One induced step: `next = E_PON psi + ρ`, computed per vertex with the
    /// tail inflow entering the boundary coins directly.
    pub fn step(&self, psi: &[C<T>], next: &mut [C<T>], ws: &mut CoinWorkspace<T>) {
        self.pass(psi, &self.alpha, Some(next), None, ws);
    }

    /// Pure `E_PON` application (tails read as zero inflow).
    pub fn apply_interior(&self, psi: &[C<T>], next: &mut [C<T>], ws: &mut CoinWorkspace<T>) {
        let zeros = vec![C::new(T::zero(), T::zero()); self.alpha.len()];
        self.pass(psi, &zeros, Some(next), None, ws);
    }

    /// Outflow `β_j = Ψ(ē_j)` produced by one coin pass at the boundary
    /// vertices, for the given inflow.
    pub fn outflow(&self, psi: &[C<T>], alpha: &[C<T>]) -> Vec<C<T>> {
        let mut beta = vec![C::new(T::zero(), T::zero()); alpha.len()];
        let mut ws = self.workspace();
        self.pass(psi, alpha, None, Some(&mut beta), &mut ws);
        beta
    }

    fn pass(
        &self,
        psi: &[C<T>],
        alpha: &[C<T>],
        mut next: Option<&mut [C<T>]>,
        mut beta: Option<&mut Vec<C<T>>>,
        ws: &mut CoinWorkspace<T>,
    ) {
        for site in &self.sites {
            let n_int = site.out_arcs.len();
            let d = n_int + site.tails.len();
            if d == 0 {
                continue;
            }
            let (input, output) = ws.split(d);
            for (k, &a) in site.out_arcs.iter().enumerate() {
                input[k] = psi[a ^ 1];
            }
            for (k, &j) in site.tails.iter().enumerate() {
                input[n_int + k] = alpha[j];
            }
            coin_apply(&site.sqrt_p, input, output);
            if let Some(next) = next.as_deref_mut() {
                for (k, &a) in site.out_arcs.iter().enumerate() {
                    next[a] = output[k];
                }
            }
            if let Some(beta) = beta.as_deref_mut() {
                for (k, &j) in site.tails.iter().enumerate() {
                    beta[j] = output[n_int + k];
                }
            }
        }
    }

    /// Dense `E_PON` on `C^{A_0}`: entry `(a, inv(b)) = 2 sqrt(p(a) p(b)) - δ`
    /// for arcs `a, b` leaving a common vertex. The coins are real, so the
    /// matrix is real; complex data enters only through `ρ`.
    pub fn epon_dense(&self) -> DMatrix<T> {
        let n = self.arc_count;
        let mut m = DMatrix::from_element(n, n, T::zero());
        let two = T::c(2.0);
        for site in &self.sites {
            for (i, &a) in site.out_arcs.iter().enumerate() {
                for (j, &b) in site.out_arcs.iter().enumerate() {
                    let mut z = site.sqrt_p[i] * site.sqrt_p[j] * two;
                    if i == j {
                        z -= T::one();
                    }
                    m[(a, b ^ 1)] = z;
                }
            }
        }
        m
    }

    /// Sup-norm fixed-point residual `‖E_PON ψ + ρ - ψ‖_∞`.
    pub fn fixed_point_residual(&self, psi: &[C<T>]) -> T {
        let mut next = vec![C::new(T::zero(), T::zero()); self.arc_count];
        let mut ws = self.workspace();
        self.step(psi, &mut next, &mut ws);
        inf_norm_diff(&next, psi)
    }
}

/// Outcome of the fixed-point iteration.
#[derive(Debug, Clone)]
pub struct IterationOutcome<T> {
    pub psi: Vec<C<T>>,
    pub iterations: usize,
    pub last_step: T,
}

/// Iterates `ψ_{n+1} = E_PON ψ_n + ρ` from `ψ_0 = 0` until the sup-norm step
/// stays below `tol` for 10 consecutive iterations.
///
/// An exactly-zero step is accepted immediately (the map is deterministic, so
/// the iterate is a fixed point). If the budget runs out while the even and
/// odd subsequences have each settled, the failure is reported as an
/// oscillation rather than plain non-convergence.
pub fn iterate<T: RealScalar>(
    sys: &InducedSystem<T>,
    n_max: usize,
    tol: T,
) -> Result<IterationOutcome<T>, DynamicsError> {
    const SUSTAIN: usize = 10;
    let n = sys.arc_count();
    let zero = C::new(T::zero(), T::zero());
    // rotating buffers: entering step k, older = ψ_{k-2}, last = ψ_{k-1}
    let mut older = vec![zero; n];
    let mut last = vec![zero; n];
    let mut fresh = vec![zero; n];
    let mut ws = sys.workspace();
    let mut consec_step = 0usize;
    let mut consec_parity = 0usize;
    let mut last_step = T::zero();
    let mut last_parity = T::zero();
    for k in 1..=n_max {
        sys.step(&last, &mut fresh, &mut ws); // fresh = ψ_k
        let step_norm = inf_norm_diff(&fresh, &last);
        last_step = step_norm;
        if step_norm == T::zero() {
            // exact fixed point: every later iterate is identical
            return Ok(IterationOutcome {
                psi: fresh,
                iterations: if k == 1 { 0 } else { k },
                last_step: step_norm,
            });
        }
        if step_norm < tol {
            consec_step += 1;
            if consec_step >= SUSTAIN {
                return Ok(IterationOutcome {
                    psi: fresh,
                    iterations: k,
                    last_step: step_norm,
                });
            }
        } else {
            consec_step = 0;
        }
        if k >= 2 {
            let parity_norm = inf_norm_diff(&fresh, &older);
            last_parity = parity_norm;
            if parity_norm < tol {
                consec_parity += 1;
            } else {
                consec_parity = 0;
            }
        }
        std::mem::swap(&mut older, &mut last); // older = ψ_{k-1}
        std::mem::swap(&mut last, &mut fresh); // last = ψ_k, fresh reusable
    }
    let last_residual = last_step.to_f64().unwrap_or(f64::NAN);
    if consec_parity >= SUSTAIN {
        Err(DynamicsError::Oscillation {
            steps: n_max,
            gap: last_residual,
            parity_residual: last_parity.to_f64().unwrap_or(f64::NAN),
        })
    } else {
        Err(DynamicsError::NonConvergence {
            steps: n_max,
            last_residual,
        })
    }
}

/// Outcome of the rank-deficient direct solve.
#[derive(Debug, Clone)]
pub struct DirectSolveOutcome<T> {
    pub psi: Vec<C<T>>,
    /// Dimension of `ker(I - E_PON)` at the rank cutoff.
    pub kernel_dimension: usize,
    /// `‖(I - E_PON) ψ - ρ‖_∞` of the returned solution.
    pub residual: T,
}

/// Minimum-norm solution of `(I - E_PON) ψ = ρ`.
///
/// The minimum-norm solution is orthogonal to `ker(I - E_PON)`; since
/// `E_PON` is a contraction, that kernel equals the fixed space of the
/// adjoint, which is exactly the orthogonality the stationary state
/// satisfies. Rank deficiency (cycle eigenvectors) is handled by the SVD.
pub fn direct_solve<T: RealScalar>(
    sys: &InducedSystem<T>,
) -> Result<DirectSolveOutcome<T>, DynamicsError> {
    let n = sys.arc_count();
    if n == 0 {
        return Ok(DirectSolveOutcome {
            psi: Vec::new(),
            kernel_dimension: 0,
            residual: T::zero(),
        });
    }
    let mut a = -sys.epon_dense();
    for i in 0..n {
        a[(i, i)] += T::one();
    }
    let cutoff = T::c(RANK_CUTOFF);
    let (psi, rank) = crate::linalg::min_norm_solve(a.clone(), sys.rho(), cutoff);
    let mut residual = T::zero();
    for i in 0..n {
        let mut z = -sys.rho()[i];
        for j in 0..n {
            z += psi[j] * a[(i, j)];
        }
        let d = z.norm();
        if d > residual {
            residual = d;
        }
    }
    if residual > T::c(CONSISTENCY_TOL) {
        return Err(DynamicsError::InconsistentSystem {
            residual: residual.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(DirectSolveOutcome {
        psi,
        kernel_dimension: n - rank,
        residual,
    })
}

/// Stationary-state computation method.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Iterate,
    DirectSolve,
    Both,
}

#[derive(Debug, Clone)]
pub struct SolverOptions<T> {
    pub method: Method,
    pub tol: T,
    pub n_max: usize,
}

impl<T: RealScalar> Default for SolverOptions<T> {
    fn default() -> Self {
        Self {
            method: Method::Both,
            tol: T::c(1e-10),
            n_max: 200_000,
        }
    }
}

/// Stationary state plus solver diagnostics.
#[derive(Debug, Clone)]
pub struct StationaryReport<T> {
    pub psi: WaveFunction<T>,
    pub method: Method,
    pub iterations_used: usize,
    pub fixed_point_residual: T,
    /// Sup-norm gap between iteration and direct solve (method `Both`).
    pub cross_method_gap: Option<T>,
    /// `dim ker(I - E_PON)` when the direct solver ran.
    pub kernel_dimension: Option<usize>,
}

/// Runs the requested stationary-state computation and extracts the outflow.
pub fn stationary_state<T: RealScalar>(
    tg: &TailedGraph,
    p: &TransitionKernel<T>,
    alpha: &[C<T>],
    opts: &SolverOptions<T>,
) -> Result<StationaryReport<T>, DynamicsError> {
    let sys = InducedSystem::build(tg, p, alpha)?;
    let (psi, iterations, gap, kernel_dim) = match opts.method {
        Method::Iterate => {
            let it = iterate(&sys, opts.n_max, opts.tol)?;
            (it.psi, it.iterations, None, None)
        }
        Method::DirectSolve => {
            let ds = direct_solve(&sys)?;
            (ds.psi, 0, None, Some(ds.kernel_dimension))
        }
        Method::Both => {
            let it = iterate(&sys, opts.n_max, opts.tol)?;
            let ds = direct_solve(&sys)?;
            let gap = inf_norm_diff(&it.psi, &ds.psi);
            (it.psi, it.iterations, Some(gap), Some(ds.kernel_dimension))
        }
    };
    let outflow = sys.outflow(&psi, alpha);
    let fixed_point_residual = sys.fixed_point_residual(&psi);
    Ok(StationaryReport {
        psi: WaveFunction {
            internal: psi,
            inflow: alpha.to_vec(),
            outflow,
        },
        method: opts.method,
        iterations_used: iterations,
        fixed_point_residual,
        cross_method_gap: gap,
        kernel_dimension: kernel_dim,
    })
}

/// Outflow of a given internal state under inflow `α` (one boundary coin pass).
pub fn extract_outflow<T: RealScalar>(
    tg: &TailedGraph,
    p: &TransitionKernel<T>,
    psi_internal: &[C<T>],
    alpha: &[C<T>],
) -> Result<Vec<C<T>>, DynamicsError> {
    let sys = InducedSystem::build(tg, p, alpha)?;
    Ok(sys.outflow(psi_internal, alpha))
}

/// Relative finding probability at `u`: `Σ_{t(a)=u} |Ψ_∞(a)|²`, inbound
/// boundary arcs contributing `|α_j|²`.
pub fn mu_qw<T: RealScalar>(tg: &TailedGraph, psi: &WaveFunction<T>, u: VertexId) -> T {
    let g = tg.internal();
    let mut total = T::zero();
    for &a in g.out_arcs(u) {
        total += psi.internal[a ^ 1].norm_sqr();
    }
    for j in tg.tails_at(u) {
        total += psi.inflow[j].norm_sqr();
    }
    total
}

/// Mass of the internal graph: `Σ_{t(a) ∈ V_0} |Ψ_∞(a)|²` (inbound boundary
/// arcs included).
pub fn mass<T: RealScalar>(tg: &TailedGraph, psi: &WaveFunction<T>) -> T {
    debug_assert_eq!(psi.internal.len(), tg.internal().arc_count());
    let internal: T = psi
        .internal
        .iter()
        .fold(T::zero(), |acc, z| acc + z.norm_sqr());
    let boundary: T = psi
        .inflow
        .iter()
        .fold(T::zero(), |acc, z| acc + z.norm_sqr());
    internal + boundary
}

/// Formats a dense complex matrix as plain text: `rows cols` header, then one
/// row per line of whitespace-separated `re,im` pairs.
pub fn format_complex_matrix<T: RealScalar>(m: &DMatrix<C<T>>) -> String {
    use std::fmt::Write;
    let mut s = String::new();
    let _ = writeln!(s, "{} {}", m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if j > 0 {
                s.push(' ');
            }
            let z = m[(i, j)];
            let _ = write!(
                s,
                "{:.16e},{:.16e}",
                z.re.to_f64().unwrap_or(f64::NAN),
                z.im.to_f64().unwrap_or(f64::NAN)
            );
        }
        s.push('\n');
    }
    s
}

/// True when the kernel normalization residual stays within the spec bound.
pub fn kernel_is_valid<T: RealScalar>(tg: &TailedGraph, p: &TransitionKernel<T>) -> bool {
    validate_kernel(tg, p).max_residual <= T::c(NORMALIZATION_TOL)
}

#[cfg(test)]
mod tests;
