//! Weighted model manifolds `(ℝ^m, dr² + g(r)² dθ², e^{-f} dvol)`.
//!
//! On radial functions the weighted Laplacian reduces to
//! `Δ_f u = u'' + b(r) u'` with drift `b = (m-1) g'/g - f' = a'/a`, where
//! `a = g^{m-1} e^{-f}` is the radial area density. Everything downstream is
//! phrased in terms of `L = ln a` so that densities like `e^{r³}` or
//! `e^{-r³}` never have to be materialised.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{ExprError, Jet2, RadialFunction};
use crate::quad::{integrate_log, log_add, QuadError, QuadOptions};
use crate::value::log_grid;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ManifoldError {
    #[error("cannot parse `{field}`: {source}")]
    Parse { field: String, source: ExprError },
    #[error("malformed manifold document: {0}")]
    Document(String),
    #[error("invalid manifold: {0}")]
    Validation(String),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("evaluation failed: {0}")]
    Domain(#[from] ExprError),
    #[error("area density overflows at r = {r}; use the log density")]
    Overflow { r: f64 },
    #[error("quadrature failed: {0}")]
    Quadrature(#[from] QuadError),
    #[error("density is not integrable towards infinity from r = {r}")]
    NotIntegrable { r: f64 },
}

/// Point at which `g(0)=0, g'(0)=1` is checked numerically.
pub const VALIDATION_RADIUS: f64 = 1e-4;
pub const VALIDATION_TOL: f64 = 1e-3;
/// Upper end of the positivity/finiteness grid.
pub const VALIDATION_RMAX: f64 = 1e3;

/// Beyond `|b|·t > 50` with slowly varying drift the ratio `∫a / a` is
/// replaced by its two-term asymptotic expansion in `1/b`.
const ASYMPTOTIC_BT: f64 = 50.0;
const ASYMPTOTIC_SLOPE: f64 = 1e-5;

fn ratio_opts() -> QuadOptions {
    QuadOptions {
        rel_tol: 1e-11,
        abs_tol: 0.0,
        max_subdivisions: 4000,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelManifold {
    dimension: usize,
    g: RadialFunction,
    f: RadialFunction,
    label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    comparison_exponent: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifoldDoc {
    dimension: i64,
    g: String,
    f: Option<String>,
    label: Option<String>,
    comparison_exponent: Option<f64>,
}

/// Parse and validate a `key = value` manifold document.
pub fn load_manifold(doc: &str) -> Result<ModelManifold, ManifoldError> {
    let d: ManifoldDoc = toml::from_str(doc).map_err(|e| ManifoldError::Document(e.message().to_string()))?;
    if d.dimension < 2 {
        return Err(ManifoldError::Validation(format!(
            "dimension must be ≥ 2, got {}",
            d.dimension
        )));
    }
    let g = RadialFunction::parse(&d.g).map_err(|source| ManifoldError::Parse {
        field: "g".into(),
        source,
    })?;
    let f_text = d.f.unwrap_or_else(|| "0".to_string());
    let f = RadialFunction::parse(&f_text).map_err(|source| ManifoldError::Parse {
        field: "f".into(),
        source,
    })?;
    let label = d
        .label
        .unwrap_or_else(|| format!("m={}, g={}, f={}", d.dimension, d.g, f_text));
    let mut m = ModelManifold::new(d.dimension as usize, g, f, label)?;
    if let Some(n) = d.comparison_exponent {
        m = m.with_comparison_exponent(n)?;
    }
    Ok(m)
}

impl ModelManifold {
    pub fn new(
        dimension: usize,
        g: RadialFunction,
        f: RadialFunction,
        label: impl Into<String>,
    ) -> Result<Self, ManifoldError> {
        let m = Self {
            dimension,
            g,
            f,
            label: label.into(),
            comparison_exponent: None,
        };
        m.validate()?;
        Ok(m)
    }

    /// Build from expression text; panics only on programming errors in
    /// preset definitions, so it is crate-private.
    pub(crate) fn from_text(dimension: usize, g: &str, f: &str, label: String) -> Result<Self, ManifoldError> {
        let g = RadialFunction::parse(g).map_err(|source| ManifoldError::Parse {
            field: "g".into(),
            source,
        })?;
        let f = RadialFunction::parse(f).map_err(|source| ManifoldError::Parse {
            field: "f".into(),
            source,
        })?;
        Self::new(dimension, g, f, label)
    }

    /// Replace the density exponent `m-1` by `n-1` for a real `n > 1`.
    pub fn with_comparison_exponent(mut self, n: f64) -> Result<Self, ManifoldError> {
        if !(n.is_finite() && n > 1.0) {
            return Err(ManifoldError::Validation(format!(
                "comparison exponent must be > 1, got {n}"
            )));
        }
        self.comparison_exponent = Some(n);
        Ok(self)
    }

    fn validate(&self) -> Result<(), ManifoldError> {
        let m = self.dimension;
        if m < 2 {
            return Err(ManifoldError::Validation(format!("dimension must be ≥ 2, got {m}")));
        }
        let r0 = VALIDATION_RADIUS;
        let g0 = self
            .g
            .eval_jet(r0)
            .map_err(|e| ManifoldError::Validation(format!("g not evaluable at r={r0}: {e}")))?;
        if g0.value.abs() > VALIDATION_TOL {
            return Err(ManifoldError::Validation(format!(
                "g(0) must vanish: g({r0}) = {} exceeds {VALIDATION_TOL}",
                g0.value
            )));
        }
        if (g0.d1 - 1.0).abs() > VALIDATION_TOL {
            return Err(ManifoldError::Validation(format!(
                "g'(0) must be 1: g'({r0}) = {} is off by more than {VALIDATION_TOL}",
                g0.d1
            )));
        }
        for r in log_grid(r0, VALIDATION_RMAX, 240) {
            match self.g.eval_ln_jet(r) {
                Ok(l) if l.is_finite() => {}
                _ => {
                    return Err(ManifoldError::Validation(format!(
                        "g must be positive for r > 0; fails at r = {r}"
                    )));
                }
            }
            match self.f.eval_jet(r) {
                Ok(j) if j.is_finite() => {}
                _ => {
                    return Err(ManifoldError::Validation(format!(
                        "f must be finite on (0, R_max]; fails at r = {r}"
                    )))
                }
            }
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn g(&self) -> &RadialFunction {
        &self.g
    }

    pub fn f(&self) -> &RadialFunction {
        &self.f
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn comparison_exponent(&self) -> Option<f64> {
        self.comparison_exponent
    }

    /// `n - 1` in `a = g^{n-1} e^{-f}`; `n = m` unless a comparison exponent is set.
    pub fn density_exponent(&self) -> f64 {
        self.comparison_exponent.unwrap_or(self.dimension as f64) - 1.0
    }

    /// Area `ω_{m-1}` of the unit `(m-1)`-sphere.
    pub fn sphere_area(&self) -> f64 {
        sphere_area(self.dimension)
    }

    /// Jet of `L = ln a = (m-1) ln g - f`; `L' = b` and `L'' = b'`.
    pub fn log_density_jet(&self, r: f64) -> Result<Jet2, ManifoldError> {
        let lg = self.g.eval_ln_jet(r)?;
        let f = self.f.eval_jet(r)?;
        let out = lg * self.density_exponent() - f;
        if out.is_finite() {
            Ok(out)
        } else {
            Err(ManifoldError::Domain(ExprError::Domain { op: "log density", r }))
        }
    }

    /// `Δ_f r = (m-1) g'/g - f'`.
    pub fn drift(&self, r: f64) -> Result<f64, ManifoldError> {
        Ok(self.log_density_jet(r)?.d1)
    }

    /// `(b, b')` at `r`.
    pub fn drift_jet(&self, r: f64) -> Result<(f64, f64), ManifoldError> {
        let l = self.log_density_jet(r)?;
        Ok((l.d1, l.d2))
    }

    pub fn log_area_density(&self, r: f64) -> Result<f64, ManifoldError> {
        Ok(self.log_density_jet(r)?.value)
    }

    /// `a(r) = g^{m-1} e^{-f}`, without the angular constant.
    pub fn area_density(&self, r: f64) -> Result<f64, ManifoldError> {
        let a = self.log_area_density(r)?.exp();
        if a.is_finite() {
            Ok(a)
        } else {
            Err(ManifoldError::Overflow { r })
        }
    }

    fn log_density_value(&self, s: f64) -> Result<f64, QuadError> {
        self.log_area_density(s)
            .map_err(|e| QuadError::Integrand(e.to_string()))
    }

    /// `ln ρ(t)` with `ρ = (∫_0^t a) / a(t)`.
    pub fn log_forward_ratio(&self, t: f64) -> Result<f64, ManifoldError> {
        let l = self.log_density_jet(t)?;
        let (b, db) = (l.d1, l.d2);
        if b > 0.0 && b * t > ASYMPTOTIC_BT && db.abs() < ASYMPTOTIC_SLOPE * b * b {
            let rho = 1.0 / b + db / (b * b * b);
            if rho > 0.0 {
                return Ok(rho.ln());
            }
        }
        let lt = l.value;
        Ok(integrate_log(
            |s| Ok(self.log_density_value(s)? - lt),
            0.0,
            t,
            ratio_opts(),
        )?)
    }

    /// `ln ρ₂(t)` with `ρ₂ = (∫_t^∞ a) / a(t)`; fails when `a ∉ L¹(+∞)`.
    pub fn log_backward_ratio(&self, t: f64) -> Result<f64, ManifoldError> {
        let l = self.log_density_jet(t)?;
        let (b, db) = (l.d1, l.d2);
        if b < 0.0 && -b * t > ASYMPTOTIC_BT && db.abs() < ASYMPTOTIC_SLOPE * b * b {
            let rho = -1.0 / b - db / (b * b * b);
            if rho > 0.0 {
                return Ok(rho.ln());
            }
        }
        let lt = l.value;
        let mut acc = f64::NEG_INFINITY;
        let mut prev = f64::NEG_INFINITY;
        let (mut lo, mut hi) = (t, 2.0 * t);
        for _ in 0..400 {
            let piece = integrate_log(|s| Ok(self.log_density_value(s)? - lt), lo, hi, ratio_opts())?;
            acc = log_add(acc, piece);
            if piece == f64::NEG_INFINITY {
                return Ok(acc);
            }
            if prev > f64::NEG_INFINITY && piece < prev {
                // geometric tail bound with the observed octave ratio
                let q = (piece - prev).exp();
                if q < 1.0 && piece + (q / (1.0 - q)).ln() < acc + (1e-13f64).ln() {
                    return Ok(acc);
                }
            }
            prev = piece;
            lo = hi;
            hi *= 2.0;
            if !hi.is_finite() {
                break;
            }
        }
        Err(ManifoldError::NotIntegrable { r: t })
    }

    /// `ln ∫_0^R a`.
    pub fn log_cumulative_area(&self, r: f64) -> Result<f64, ManifoldError> {
        Ok(self.log_area_density(r)? + self.log_forward_ratio(r)?)
    }

    /// `ln ∫_R^∞ a`; fails when the weighted volume is infinite.
    pub fn log_tail_area(&self, r: f64) -> Result<f64, ManifoldError> {
        Ok(self.log_area_density(r)? + self.log_backward_ratio(r)?)
    }

    /// `ln vol_f(B_R)`.
    pub fn log_weighted_ball_volume(&self, r: f64) -> Result<f64, ManifoldError> {
        Ok(self.sphere_area().ln() + self.log_cumulative_area(r)?)
    }

    /// `vol_f(B_R) = ω_{m-1} ∫_0^R a`.
    pub fn weighted_ball_volume(&self, r: f64) -> Result<f64, ManifoldError> {
        let v = self.log_weighted_ball_volume(r)?.exp();
        if v.is_finite() {
            Ok(v)
        } else {
            Err(ManifoldError::Overflow { r })
        }
    }
}

/// `ω_{m-1} = 2 π^{m/2} / Γ(m/2)`.
pub fn sphere_area(m: usize) -> f64 {
    // Γ(m/2) by the recurrence from Γ(1) or Γ(1/2)
    let mut gamma = if m % 2 == 0 { 1.0 } else { PI.sqrt() };
    let mut x = if m % 2 == 0 { 1.0 } else { 0.5 };
    while x + 0.5 < m as f64 / 2.0 {
        gamma *= x;
        x += 1.0;
    }
    2.0 * PI.powf(m as f64 / 2.0) / gamma
}

/// A gradient Ricci soliton `Ric + Hess f = λ⟨,⟩` on a model, with its
/// scalar curvature and `|Ric|²` supplied in closed form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolitonPreset {
    pub base: ModelManifold,
    pub lambda: f64,
    pub scalar_curvature: RadialFunction,
    pub ric_norm_sq: RadialFunction,
}

impl SolitonPreset {
    /// Fitted constant `C` and `sup |S + f'² - 2λf - C|` over `grid`.
    pub fn basic_equation_residual(&self, grid: &[f64]) -> Result<(f64, f64), ManifoldError> {
        let vals = grid
            .iter()
            .map(|&r| {
                let s = self.scalar_curvature.value(r)?;
                let f = self.base.f.eval_jet(r)?;
                Ok(s + f.d1 * f.d1 - 2.0 * self.lambda * f.value)
            })
            .collect::<Result<Vec<f64>, ExprError>>()?;
        let (lo, hi) = vals.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
        let c = 0.5 * (lo + hi);
        Ok((c, 0.5 * (hi - lo)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Preset {
    Manifold(ModelManifold),
    Soliton(SolitonPreset),
}

impl Preset {
    pub fn manifold(&self) -> &ModelManifold {
        match self {
            Preset::Manifold(m) => m,
            Preset::Soliton(s) => &s.base,
        }
    }

    pub fn into_manifold(self) -> ModelManifold {
        match self {
            Preset::Manifold(m) => m,
            Preset::Soliton(s) => s.base,
        }
    }

    pub fn soliton(&self) -> Option<&SolitonPreset> {
        match self {
            Preset::Soliton(s) => Some(s),
            Preset::Manifold(_) => None,
        }
    }
}

/// Names accepted by [`preset`], with `m`, `α`, `λ` as placeholders.
pub const PRESET_FAMILIES: &[&str] = &[
    "euclidean-m",
    "hyperbolic-m",
    "exp-alpha-m-α",
    "exp-growth-m",
    "gaussian-shrinker-m-λ",
    "flat-steady-m",
];

/// Warping function equal to `e^{-r^α}` for large `r` that still satisfies
/// `g(0)=0, g'(0)=1`.
pub fn exp_alpha_warping(alpha: f64) -> String {
    format!("tanh(r)*exp(-r^{alpha}*tanh(r)^2)")
}

fn parse_dim(s: &str, name: &str) -> Result<usize, ManifoldError> {
    match s.parse::<usize>() {
        Ok(m) if m >= 2 => Ok(m),
        _ => Err(ManifoldError::UnknownPreset(name.to_string())),
    }
}

fn parse_positive(s: &str, name: &str) -> Result<f64, ManifoldError> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
        _ => Err(ManifoldError::UnknownPreset(name.to_string())),
    }
}

/// Look up a preset by name, e.g. `euclidean-3`, `exp-alpha-2-2.5` or
/// `gaussian-shrinker-2-0.5`.
pub fn preset(name: &str) -> Result<Preset, ManifoldError> {
    let label = name.to_string();
    if let Some(rest) = name.strip_prefix("euclidean-") {
        let m = parse_dim(rest, name)?;
        return Ok(Preset::Manifold(ModelManifold::from_text(m, "r", "0", label)?));
    }
    if let Some(rest) = name.strip_prefix("hyperbolic-") {
        let m = parse_dim(rest, name)?;
        return Ok(Preset::Manifold(ModelManifold::from_text(m, "sinh(r)", "0", label)?));
    }
    if let Some(rest) = name.strip_prefix("exp-growth-") {
        let m = parse_dim(rest, name)?;
        return Ok(Preset::Manifold(ModelManifold::from_text(m, "r*exp(r^3)", "0", label)?));
    }
    if let Some(rest) = name.strip_prefix("exp-alpha-") {
        let (m, alpha) = rest
            .split_once('-')
            .ok_or_else(|| ManifoldError::UnknownPreset(label.clone()))?;
        let m = parse_dim(m, name)?;
        let alpha = parse_positive(alpha, name)?;
        return Ok(Preset::Manifold(ModelManifold::from_text(
            m,
            &exp_alpha_warping(alpha),
            "0",
            label,
        )?));
    }
    if let Some(rest) = name.strip_prefix("gaussian-shrinker-") {
        let (m, lambda) = rest
            .split_once('-')
            .ok_or_else(|| ManifoldError::UnknownPreset(label.clone()))?;
        let m = parse_dim(m, name)?;
        let lambda = parse_positive(lambda, name)?;
        let f = format!("{}*r^2", lambda / 2.0);
        return Ok(Preset::Soliton(SolitonPreset {
            base: ModelManifold::from_text(m, "r", &f, label)?,
            lambda,
            scalar_curvature: RadialFunction::parse("0")?,
            ric_norm_sq: RadialFunction::parse("0")?,
        }));
    }
    if let Some(rest) = name.strip_prefix("flat-steady-") {
        let m = parse_dim(rest, name)?;
        return Ok(Preset::Soliton(SolitonPreset {
            base: ModelManifold::from_text(m, "r", "0", label)?,
            lambda: 0.0,
            scalar_curvature: RadialFunction::parse("0")?,
            ric_norm_sq: RadialFunction::parse("0")?,
        }));
    }
    Err(ManifoldError::UnknownPreset(label))
}

/// Convenience: the manifold underlying a preset.
pub fn preset_manifold(name: &str) -> Result<ModelManifold, ManifoldError> {
    preset(name).map(Preset::into_manifold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn load_examples() {
        let m = load_manifold("dimension = 3\ng = \"r\"\nf = \"0\"\n").unwrap();
        assert_eq!(m.dimension(), 3);
        let h = load_manifold("dimension = 2\ng = \"sinh(r)\"").unwrap();
        assert_eq!(h.f().source(), "0");
        let err = load_manifold("dimension = 2\ng = \"r+1\"\nf = \"0\"").unwrap_err();
        assert!(
            matches!(err, ManifoldError::Validation(ref s) if s.contains("g(0)")),
            "{err}"
        );
    }

    #[test]
    fn load_rejects_bad_documents() {
        assert!(matches!(
            load_manifold("dimension = 1\ng = \"r\""),
            Err(ManifoldError::Validation(_))
        ));
        assert!(matches!(load_manifold("g = \"r\""), Err(ManifoldError::Document(_))));
        assert!(matches!(
            load_manifold("dimension = 2\ng = \"r +\""),
            Err(ManifoldError::Parse { ref field, .. }) if field == "g"
        ));
        assert!(matches!(
            load_manifold("dimension = 2\ng = \"sin(r)\""),
            Err(ManifoldError::Validation(_))
        ));
        assert!(matches!(
            load_manifold("dimension = 2\ng = \"2*r\""),
            Err(ManifoldError::Validation(_))
        ));
        assert!(matches!(
            load_manifold("dimension = 2\ng = \"r\"\nf = \"log(r-1)\""),
            Err(ManifoldError::Validation(_))
        ));
    }

    #[test]
    fn drift_examples() {
        let e3 = preset_manifold("euclidean-3").unwrap();
        assert_relative_eq!(e3.drift(2.0).unwrap(), 1.0, max_relative = 1e-14);
        let gs = preset_manifold("gaussian-shrinker-2-0.5").unwrap();
        assert_relative_eq!(gs.drift(2.0).unwrap(), -0.5, max_relative = 1e-14);
        let h2 = preset_manifold("hyperbolic-2").unwrap();
        assert_relative_eq!(h2.drift(5.0).unwrap(), 1.0 / 5f64.tanh(), max_relative = 1e-13);
    }

    #[test]
    fn area_density_examples() {
        let e3 = preset_manifold("euclidean-3").unwrap();
        assert_relative_eq!(e3.area_density(2.0).unwrap(), 4.0, max_relative = 1e-14);
        let decay = ModelManifold::from_text(2, "r*exp(-r^3)", "0", "decay".into()).unwrap();
        assert_relative_eq!(decay.area_density(1.0).unwrap(), (-1f64).exp(), max_relative = 1e-14);
        let gs = preset_manifold("gaussian-shrinker-2-0.5").unwrap();
        assert_relative_eq!(gs.area_density(2.0).unwrap(), 2.0 * (-1f64).exp(), max_relative = 1e-14);
        let grow = preset_manifold("exp-growth-2").unwrap();
        assert!(matches!(grow.area_density(10.0), Err(ManifoldError::Overflow { .. })));
        assert_relative_eq!(
            grow.log_area_density(10.0).unwrap(),
            1000.0 + 10f64.ln(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn ball_volume_examples() {
        let e3 = preset_manifold("euclidean-3").unwrap();
        assert_relative_eq!(
            e3.weighted_ball_volume(1.0).unwrap(),
            4.0 * PI / 3.0,
            max_relative = 1e-10
        );
        let h2 = preset_manifold("hyperbolic-2").unwrap();
        assert_relative_eq!(
            h2.weighted_ball_volume(1.0).unwrap(),
            2.0 * PI * (1f64.cosh() - 1.0),
            max_relative = 1e-10
        );
        // asymptotic branch far out
        let v = h2.log_weighted_ball_volume(200.0).unwrap();
        let want = (2.0 * PI).ln() + 200.0 - 2f64.ln();
        assert_relative_eq!(v, want, max_relative = 1e-12);
        let gs = preset_manifold("gaussian-shrinker-2-0.5").unwrap();
        assert_relative_eq!(gs.weighted_ball_volume(60.0).unwrap(), 4.0 * PI, max_relative = 1e-10);
        assert_relative_eq!(
            gs.log_tail_area(0.0001).unwrap(),
            (2.0f64 - 1e-8 / 2.0).ln(),
            max_relative = 1e-9
        );
    }

    #[test]
    fn sphere_areas() {
        assert_relative_eq!(sphere_area(2), 2.0 * PI, max_relative = 1e-15);
        assert_relative_eq!(sphere_area(3), 4.0 * PI, max_relative = 1e-15);
        assert_relative_eq!(sphere_area(4), 2.0 * PI * PI, max_relative = 1e-15);
        assert_relative_eq!(sphere_area(5), 8.0 * PI * PI / 3.0, max_relative = 1e-15);
    }

    #[test]
    fn backward_ratio_matches_closed_form() {
        // a = r e^{-r²/4}: ∫_t^∞ a = 2 e^{-t²/4}, so ρ₂ = 2/t
        let gs = preset_manifold("gaussian-shrinker-2-0.5").unwrap();
        for t in [0.5, 3.0, 40.0, 1e4] {
            assert_relative_eq!(
                gs.log_backward_ratio(t).unwrap(),
                (2.0 / t).ln(),
                max_relative = 1e-9,
                epsilon = 1e-10
            );
        }
        let e3 = preset_manifold("euclidean-3").unwrap();
        assert!(matches!(
            e3.log_backward_ratio(1.0),
            Err(ManifoldError::NotIntegrable { .. })
        ));
    }

    #[test]
    fn forward_ratio_switches_branches_smoothly() {
        // exp-growth: compare asymptotic and quadrature values near the switch
        let m = preset_manifold("exp-growth-2").unwrap();
        for t in [30.0, 45.0, 60.0] {
            let lt = m.log_area_density(t).unwrap();
            let quad = integrate_log(|s| Ok(m.log_area_density(s).unwrap() - lt), 0.0, t, ratio_opts()).unwrap();
            assert_relative_eq!(m.log_forward_ratio(t).unwrap(), quad, max_relative = 1e-8);
        }
    }

    #[test]
    fn presets_parse_and_validate() {
        for name in [
            "euclidean-2",
            "hyperbolic-3",
            "exp-alpha-2-3",
            "exp-alpha-3-0.5",
            "exp-growth-2",
            "gaussian-shrinker-2-0.5",
            "flat-steady-3",
        ] {
            let p = preset(name).unwrap();
            assert_eq!(p.manifold().label(), name);
        }
        for bad in ["euclidean-1", "exp-alpha-2", "torus-2", "gaussian-shrinker-2--1"] {
            assert!(matches!(preset(bad), Err(ManifoldError::UnknownPreset(_))), "{bad}");
        }
    }

    #[test]
    fn exp_alpha_matches_pure_exponential_far_out() {
        let p = preset_manifold("exp-alpha-2-3").unwrap();
        assert_relative_eq!(p.log_area_density(20.0).unwrap(), -8000.0, max_relative = 1e-14);
        assert!((p.log_area_density(5.0).unwrap() + 125.0).abs() < 0.1);
    }

    #[test]
    fn shrinker_basic_equation() {
        let p = preset("gaussian-shrinker-2-0.5").unwrap();
        let s = p.soliton().unwrap();
        assert_eq!(s.base.f().source(), "0.25*r^2");
        let (c, res) = s.basic_equation_residual(&log_grid(1e-3, 1e3, 200)).unwrap();
        assert!(c.abs() < 1e-8 && res < 1e-8, "{c} {res}");
    }
}
