//! Numeric audit of the identities and estimates a gradient Ricci soliton
//! `Ric + Hess f = λ⟨,⟩` must satisfy, run on the radial soliton presets.

use serde::Serialize;

use crate::integrability::{classify_log_integral, feller, stochastic_completeness, IntegralState, Tail, Verdict};
use crate::manifold::{ManifoldError, SolitonPreset};
use crate::spectral::{ess_spectrum_bottom, qian_drift_bound, QianKind};
use crate::value::{log_grid, Extended};

pub const AUDIT_GRID: (f64, f64, usize) = (1e-3, 1e3, 601);
/// Radius outside which the scalar-curvature infima are taken.
pub const AUDIT_OUTER_RADIUS: f64 = 1.0;
pub const AUDIT_ESS_RADII: [f64; 4] = [1.0, 2.0, 4.0, 8.0];
pub const RESIDUAL_TOL: f64 = 1e-8;
pub const ESTIMATE_TOL: f64 = 1e-6;

/// `|f'| ≤ b + slope·r` on the audit grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GradientFit {
    pub b: f64,
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolitonAudit {
    pub label: String,
    pub dimension: usize,
    pub lambda: f64,
    /// `C` in `S + |∇f|² - 2λf = C`, fitted on the grid.
    pub basic_eq_constant: Option<f64>,
    pub basic_eq_residual: Option<f64>,
    /// `sup |½Δ_f S - λS + |Ric|²|`.
    pub scalar_eq_residual: Option<f64>,
    /// `0` for `λ ≥ 0`, `mλ` otherwise.
    pub scalar_lower_bound: f64,
    pub scalar_min: Option<f64>,
    pub scalar_lower_bound_ok: bool,
    pub gradient_estimate_fit: Option<GradientFit>,
    /// Drift below the Qian bound `(m-1)/r + (k+2C)r/3 + C` everywhere on the grid.
    pub qian_iii_ok: bool,
    pub volume_finite: Option<bool>,
    pub sc_verdict: Verdict,
    pub feller_verdict: Verdict,
    pub ess_bottom: Option<Extended>,
    /// `m·inf σ_ess - (inf_{r>R} S - mλ)`, absent when the spectrum is discrete.
    pub ess_gap: Option<f64>,
    pub scal2_ok: bool,
    /// `ess_bottom - (inf_{r>R} |Ric|²/S - λ)`, only when `S > 0` there.
    pub scal1_gap: Option<f64>,
    pub notes: Vec<String>,
}

impl SolitonAudit {
    /// Every check that could run came out as expected.
    pub fn all_ok(&self) -> bool {
        self.basic_eq_residual.is_some_and(|r| r < RESIDUAL_TOL)
            && self.scalar_eq_residual.is_some_and(|r| r < RESIDUAL_TOL)
            && self.scalar_lower_bound_ok
            && self.gradient_estimate_fit.is_some()
            && self.qian_iii_ok
            && (self.lambda <= 0.0 || self.volume_finite == Some(true))
            && self.scal2_ok
            && self.scal1_gap.is_none_or(|g| g >= -ESTIMATE_TOL)
    }
}

struct Samples {
    r: Vec<f64>,
    s: Vec<f64>,
    ric: Vec<f64>,
    df: Vec<f64>,
    drift: Vec<f64>,
    scalar_eq: Vec<f64>,
}

fn sample(p: &SolitonPreset, grid: &[f64]) -> Result<Samples, ManifoldError> {
    let mut out = Samples {
        r: grid.to_vec(),
        s: vec![],
        ric: vec![],
        df: vec![],
        drift: vec![],
        scalar_eq: vec![],
    };
    for &r in grid {
        let s = p.scalar_curvature.eval_jet(r)?;
        let ric = p.ric_norm_sq.value(r)?;
        let b = p.base.drift(r)?;
        out.s.push(s.value);
        out.ric.push(ric);
        out.df.push(p.base.f().eval_jet(r)?.d1);
        out.drift.push(b);
        out.scalar_eq.push(0.5 * (s.d2 + b * s.d1) - p.lambda * s.value + ric);
    }
    Ok(out)
}

fn min_outside(r: &[f64], v: &[f64], radius: f64) -> f64 {
    r.iter()
        .zip(v)
        .filter(|(r, _)| **r > radius)
        .map(|(_, v)| *v)
        .fold(f64::INFINITY, f64::min)
}

/// Run every soliton check on a log grid out to `r = 10³`. Failures of
/// individual checks are recorded in `notes`; the audit itself never fails.
pub fn audit_soliton(p: &SolitonPreset) -> SolitonAudit {
    let m = p.base.dimension();
    let mf = m as f64;
    let lambda = p.lambda;
    let grid = log_grid(AUDIT_GRID.0, AUDIT_GRID.1, AUDIT_GRID.2);
    let mut notes = Vec::new();
    let scalar_lower_bound = if lambda >= 0.0 { 0.0 } else { mf * lambda };

    let basic = p
        .basic_equation_residual(&grid)
        .map_err(|e| notes.push(format!("basic equation: {e}")))
        .ok();
    let samples = sample(p, &grid).map_err(|e| notes.push(format!("sampling: {e}"))).ok();

    let sc = stochastic_completeness(&p.base);
    let fe = feller(&p.base);
    let vol = classify_log_integral("a(r)", |r| p.base.log_area_density(r), 1.0, Tail::AtInfinity);
    let volume_finite = match vol.state {
        IntegralState::Convergent => Some(true),
        IntegralState::Divergent => Some(false),
        IntegralState::Inconclusive => {
            notes.push(format!("weighted volume: {}", vol.diagnostic));
            None
        }
    };
    let ess_bottom = match ess_spectrum_bottom(&p.base, &AUDIT_ESS_RADII) {
        Ok(rep) => Some(rep.bottom_estimate),
        Err(e) => {
            notes.push(format!("essential spectrum: {e}"));
            None
        }
    };

    let mut audit = SolitonAudit {
        label: p.base.label().to_string(),
        dimension: m,
        lambda,
        basic_eq_constant: basic.map(|b| b.0),
        basic_eq_residual: basic.map(|b| b.1),
        scalar_eq_residual: None,
        scalar_lower_bound,
        scalar_min: None,
        scalar_lower_bound_ok: false,
        gradient_estimate_fit: None,
        qian_iii_ok: false,
        volume_finite,
        sc_verdict: sc.verdict,
        feller_verdict: fe.verdict,
        ess_bottom,
        ess_gap: None,
        scal2_ok: false,
        scal1_gap: None,
        notes,
    };
    let Some(s) = samples else {
        return audit;
    };

    audit.scalar_eq_residual = Some(s.scalar_eq.iter().fold(0.0, |a: f64, v| a.max(v.abs())));
    let s_min = s.s.iter().copied().fold(f64::INFINITY, f64::min);
    audit.scalar_min = Some(s_min);
    audit.scalar_lower_bound_ok = s_min >= scalar_lower_bound - 1e-12;

    let slope = lambda.abs();
    let b =
        s.r.iter()
            .zip(&s.df)
            .map(|(r, d)| d.abs() - slope * r)
            .fold(0.0, f64::max);
    audit.gradient_estimate_fit = Some(GradientFit { b, slope });

    // Ric_f = λ, and |f'| ≤ b + |λ|r ≤ C(1 + r)
    let kind = QianKind::III {
        k: (-lambda).max(0.0),
        c: b.max(slope),
        d_op: 0.0,
    };
    audit.qian_iii_ok =
        s.r.iter()
            .zip(&s.drift)
            .all(|(&r, &drift)| qian_drift_bound(&kind, m, r).is_ok_and(|q| drift <= q.value * (1.0 + 1e-12)));

    let s_out = min_outside(&s.r, &s.s, AUDIT_OUTER_RADIUS);
    match ess_bottom {
        Some(Extended::Finite(ess)) => {
            let gap = mf * ess - (s_out - mf * lambda);
            audit.ess_gap = Some(gap);
            audit.scal2_ok = gap >= -ESTIMATE_TOL * (1.0 + mf * ess.abs());
        }
        Some(Extended::Unbounded) => audit.scal2_ok = true,
        None => {}
    }
    if s_out > 0.0 {
        let ratio: Vec<f64> = s.ric.iter().zip(&s.s).map(|(q, s)| q / s).collect();
        if let Some(ess) = ess_bottom {
            audit.scal1_gap = Some(ess.as_f64() - (min_outside(&s.r, &ratio, AUDIT_OUTER_RADIUS) - lambda));
        }
    } else {
        audit
            .notes
            .push("S vanishes outside the ball, so the |Ric|²/S estimate does not apply".into());
    }
    audit
}
