//! Ridgelet operator calculus on sampled grids.
//!
//! The integral representation `S[γ](x) = ∫ γ(a,b) σ(a·x − b) da db`, the ridgelet
//! transform `R[f;ρ](a,b) = ∫ f(x) conj(ρ(a·x − b)) dx`, the |ω|⁻ᵐ-weighted
//! admissibility pairing, null-space ("ghost") analysis, series encoding in ghosts,
//! mollified finite models and a projected-norm generalisation bound.

pub mod encoding;
pub mod error;
pub mod finite;
pub mod fourier;
pub mod grid;
pub mod nullspace;
pub mod profiles;
pub mod transforms;

pub use error::{Error, Result};
pub use grid::{C64, Grid, GridValues, ParamDistribution, QuadratureScheme, SampledFunction};
