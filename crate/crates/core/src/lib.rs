//! Numerical laboratory for weighted rotationally symmetric model manifolds.
//!
//! The crate classifies stochastic completeness and the Feller property of
//! `(M_g^m, e^{-f} dvol)`, computes eigenvalue bounds for the weighted
//! Laplacian `Δ_f = e^f div(e^{-f} ∇ ·)`, and cross-checks every
//! classification three ways: improper-integral tests, radial ODE and heat
//! solvers, and Monte Carlo simulation of the diffusion generated by `Δ_f`.

pub mod expr;
pub mod integrability;
pub mod manifold;
pub mod montecarlo;
pub mod ode;
pub mod quad;
pub mod soliton;
pub mod spectral;
pub mod value;

pub use expr::{parse_expr, ExprError, Jet2, RadialFunction};
pub use manifold::{load_manifold, preset, preset_manifold, ManifoldError, ModelManifold, Preset, SolitonPreset};
pub use value::Extended;
