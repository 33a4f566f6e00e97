//! Numerical laboratory for dispersive estimates of the discrete wave
//! equation `∂ₜ²u − Δu = 0` on `ℤᵈ`.
//!
//! The crate is organised bottom-up:
//!
//! * [`dispersion`]: the symbol `ω(ξ)`, its derivatives and the phase `v·ξ − ω(ξ)`.
//! * [`green`]: the fundamental solution `G(x,t)` and the directed integral `I(v,t)`.
//! * [`osc`]: oscillatory integrals `∫ e^{itS}ψ` for polynomial phases.
//! * [`newton`]: exact Newton polyhedra, adaptedness and the decay-index calculus.
//! * [`critical`]: degenerate critical points of the phase.
//! * [`decay`]: fitting `C t^β log^p t` to sampled magnitudes.
//! * [`evolution`]: spectral solvers on periodic boxes and Strichartz norms.

pub mod critical;
pub mod decay;
pub mod dispersion;
pub mod error;
pub mod evolution;
pub mod green;
pub mod newton;
pub mod osc;
pub mod poly;
pub mod quad;

pub use error::{Error, Result};
