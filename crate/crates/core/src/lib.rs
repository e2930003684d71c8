//! Szegedy quantum walks on finite graphs with semi-infinite input tails.
//!
//! The library models a finite symmetric digraph with `r` half-line tails
//! attached, a random-walk kernel on it, and the induced Szegedy walk driven
//! by a constant inflow from the tails. It computes the stationary state of
//! that dynamics (by iteration and by a direct minimum-norm solve), measures
//! the scattering of the inflow, and, for reversible kernels, decomposes the
//! stationary state into an electric current plus a reversible-measure term.
//!
//! All numeric code is generic over the real scalar (see [`scalar::RealScalar`]);
//! the type aliases at the crate root fix `f64`, which every documented
//! tolerance assumes.

pub mod check;
pub mod circuit;
pub mod dynamics;
pub mod graph;
pub mod kernel;
pub mod linalg;
pub mod models;
pub mod random;
pub mod scalar;
pub mod scattering;

pub use scalar::RealScalar;

pub type Complex64 = scalar::C<f64>;
pub type TransitionKernel64 = kernel::TransitionKernel<f64>;
pub type ReversibleMeasure64 = kernel::ReversibleMeasure<f64>;
pub type WaveFunction64 = dynamics::WaveFunction<f64>;
pub type InducedSystem64 = dynamics::InducedSystem<f64>;
pub type StationaryReport64 = dynamics::StationaryReport<f64>;
pub type SolverOptions64 = dynamics::SolverOptions<f64>;
pub type ScatteringReport64 = scattering::ScatteringReport<f64>;
pub type CircuitSolution64 = circuit::CircuitSolution<f64>;
pub type PowerDecomposition64 = circuit::PowerDecomposition<f64>;
pub type C3PkSpec64 = models::C3PkSpec<f64>;
