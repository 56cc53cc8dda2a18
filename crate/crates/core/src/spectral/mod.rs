//! Dirichlet eigenvalues of `-Δ_f` on radial domains, the bottom of the
//! essential spectrum, and closed-form eigenvalue bounds.
//!
//! Radial eigenfunctions solve `u'' + b u' + λ u = 0` with `b = Δ_f r`, which
//! is the Sturm–Liouville problem `-(a u')' = λ a u`. Scaled Prüfer shooting
//! gives the reported value; a finite-volume discretisation cross-checks it.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::manifold::{ManifoldError, ModelManifold};
use crate::ode::OdeError;

pub mod bounds;
pub mod eigen;

pub use bounds::{
    apriori_check, barta_alpha_bound, barta_bound, barta_bound_from_samples, barta_bound_with, barta_sampling_grid,
    brooks_vs_ess, cheng_upper_bound, half_drift_squared_bound, prop40_bound, prop40_constant, qian_drift_bound,
    semilinear_inf_bound, AprioriReport, BartaField, BrooksConsistency, QianKind,
};
pub use eigen::{
    ess_spectrum_bottom, lambda1_exterior, lambda1_finite_difference, lambda1_interval, lambda1_interval_of,
    lambda1_shooting, CrossCheck, EigenResult, EssSpecReport, ExteriorStep, MeshMeta, Method, Spaceform,
};

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("outside the domain: {0}")]
    Domain(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("infimum unbounded below near r = {r} (value {value})")]
    UnboundedBelow { r: f64, value: f64 },
    #[error("bound not applicable: {0}")]
    Inapplicable(String),
    #[error(transparent)]
    Manifold(#[from] ManifoldError),
    #[error(transparent)]
    Ode(#[from] OdeError),
}

/// The radial data an eigenvalue problem needs: drift `b = L'` and log area
/// density `L`.
pub trait RadialOperator: Sync {
    fn drift(&self, r: f64) -> Result<f64, SpectralError>;
    fn log_density(&self, r: f64) -> Result<f64, SpectralError>;
    /// Dimension of the underlying model, used near the origin.
    fn dimension(&self) -> f64;
}

impl RadialOperator for ModelManifold {
    fn drift(&self, r: f64) -> Result<f64, SpectralError> {
        Ok(ModelManifold::drift(self, r)?)
    }

    fn log_density(&self, r: f64) -> Result<f64, SpectralError> {
        Ok(self.log_area_density(r)?)
    }

    fn dimension(&self) -> f64 {
        self.density_exponent() + 1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoundKind {
    BartaVector,
    BartaFunction,
    Brooks,
    Cheng,
    QianI,
    QianII,
    QianIII,
    HalfDriftSquared,
    SolitonScalar,
    SemilinearInf,
    Prop40,
}

impl BoundKind {
    /// Whether the value bounds an eigenvalue from below.
    pub fn is_lower(self) -> bool {
        matches!(
            self,
            BoundKind::BartaVector | BoundKind::BartaFunction | BoundKind::HalfDriftSquared
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundStatus {
    Bound,
    /// The bound is non-positive where positivity was required.
    Vacuous,
    /// A negative numerator: no positive solution can exist.
    NonExistence,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundValue {
    pub kind: BoundKind,
    pub value: f64,
    pub status: BoundStatus,
    pub inputs_meta: BTreeMap<String, f64>,
    pub note: String,
}

impl BoundValue {
    pub(crate) fn new(kind: BoundKind, value: f64, inputs: &[(&str, f64)], note: impl Into<String>) -> Self {
        Self {
            kind,
            value,
            status: BoundStatus::Bound,
            inputs_meta: inputs.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            note: note.into(),
        }
    }

    pub(crate) fn with_status(mut self, status: BoundStatus) -> Self {
        self.status = status;
        self
    }
}
