//! Improper-integral tests for stochastic completeness and the Feller
//! property of a weighted model, plus Brooks-type volume growth bounds.
//!
//! All criteria are phrased with the weighted density `a = g^{m-1} e^{-f}`
//! (the "weighted-density criterion"): with `A(t) = ∫_0^t a`,
//!
//! * stochastically incomplete iff `∫^∞ A/a < ∞`;
//! * Feller iff `1/a ∈ L¹(+∞)`, or `1/a ∉ L¹(+∞)` and `(∫_r^∞ a)/a ∉ L¹(+∞)`.

use serde::Serialize;

use crate::manifold::{ManifoldError, ModelManifold};
use crate::quad::{integrate_log, log_add, QuadError, QuadOptions};
use crate::value::Extended;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegralState {
    Convergent,
    Divergent,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    AtInfinity,
    AtZeroPlus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegrabilityVerdict {
    /// Human-readable name of the integrand.
    pub integrand: String,
    pub state: IntegralState,
    /// `(R_j, I(R_j))` with `I(R) = ∫_{lower}^{R}` (or `∫_R^{lower}` toward 0+).
    pub partial_values: Vec<(f64, f64)>,
    pub tail_estimate: Option<f64>,
    /// `I + tail` when convergent.
    pub limit_estimate: Option<f64>,
    pub diagnostic: String,
}

/// Octave limits: `2^60 ≈ 1e18` toward infinity. Toward 0+ the p-integrals
/// with `p` close to 1 need more octaves before the tail bound drops below
/// `1e-6`, and the floating range easily allows it.
pub const MAX_OCTAVES_INFINITY: usize = 60;
pub const MAX_OCTAVES_ZERO: usize = 200;
pub const RATIO_CEILING: f64 = 0.9;
pub const TAIL_REL_TOL: f64 = 1e-6;
pub const DIVERGENCE_RUN: usize = 8;
pub const DIVERGENCE_CAP: f64 = 1e12;
const MONOTONE_SLACK: f64 = 1e-9;

fn octave_opts() -> QuadOptions {
    QuadOptions {
        rel_tol: 1e-10,
        abs_tol: 0.0,
        max_subdivisions: 2000,
    }
}

/// Classify `∫ exp(ln_integrand)` at the given end, starting from `lower`.
///
/// Partial integrals are accumulated over octaves `[lower·2^j, lower·2^{j+1}]`
/// (or `[lower·2^{-j-1}, lower·2^{-j}]`), each integrated in log space.
pub fn classify_log_integral<F, E>(name: &str, mut ln_integrand: F, lower: f64, tail: Tail) -> IntegrabilityVerdict
where
    F: FnMut(f64) -> Result<f64, E>,
    E: std::fmt::Display,
{
    let mut verdict = IntegrabilityVerdict {
        integrand: name.to_string(),
        state: IntegralState::Inconclusive,
        partial_values: Vec::new(),
        tail_estimate: None,
        limit_estimate: None,
        diagnostic: String::new(),
    };
    let max_octaves = match tail {
        Tail::AtInfinity => MAX_OCTAVES_INFINITY,
        Tail::AtZeroPlus => MAX_OCTAVES_ZERO,
    };
    let mut log_total = f64::NEG_INFINITY;
    let mut incs: Vec<f64> = Vec::new();
    let mut rising = 0usize;
    for j in 0..max_octaves {
        let (lo, hi, edge) = match tail {
            Tail::AtInfinity => {
                let lo = lower * 2f64.powi(j as i32);
                (lo, 2.0 * lo, 2.0 * lo)
            }
            Tail::AtZeroPlus => {
                let hi = lower * 2f64.powi(-(j as i32));
                (0.5 * hi, hi, 0.5 * hi)
            }
        };
        let piece = integrate_log(
            |t| ln_integrand(t).map_err(|e| QuadError::Integrand(e.to_string())),
            lo,
            hi,
            octave_opts(),
        );
        let d = match piece {
            Ok(d) => d,
            Err(e) => {
                verdict.diagnostic = format!("evaluation failed on octave [{lo:e}, {hi:e}]: {e}");
                return verdict;
            }
        };
        log_total = log_add(log_total, d);
        verdict.partial_values.push((edge, log_total.exp()));
        if let Some(&prev) = incs.last() {
            let prev: f64 = prev;
            if d >= prev + (-MONOTONE_SLACK as f64).ln_1p() && d > f64::NEG_INFINITY {
                rising += 1;
            } else {
                rising = 0;
            }
        }
        incs.push(d);
        if log_total > DIVERGENCE_CAP.ln() {
            verdict.state = IntegralState::Divergent;
            verdict.diagnostic = format!("partial integral exceeds {DIVERGENCE_CAP:e} at R = {edge:e}");
            return verdict;
        }
        if rising >= DIVERGENCE_RUN {
            let growth = (d - incs[incs.len() - 1 - DIVERGENCE_RUN]) / DIVERGENCE_RUN as f64;
            verdict.state = IntegralState::Divergent;
            verdict.diagnostic = format!(
                "octave increments non-decreasing for {DIVERGENCE_RUN} consecutive octaves (mean log-growth {growth:.4} per octave) up to R = {edge:e}"
            );
            return verdict;
        }
        if incs.len() >= 4 {
            let n = incs.len();
            let ratios: Vec<f64> = (n - 3..n)
                .map(|k| {
                    if incs[k] == f64::NEG_INFINITY {
                        0.0
                    } else {
                        (incs[k] - incs[k - 1]).exp()
                    }
                })
                .collect();
            let q = ratios.iter().cloned().fold(0.0, f64::max);
            let settled = ratios[2] <= ratios[0].max(ratios[1]) + 0.02;
            if q < RATIO_CEILING && settled {
                let total = log_total.exp();
                let tail_bound = d.exp() * q / (1.0 - q);
                if tail_bound < TAIL_REL_TOL * total {
                    verdict.state = IntegralState::Convergent;
                    verdict.tail_estimate = Some(tail_bound);
                    verdict.limit_estimate = Some(total + tail_bound);
                    verdict.diagnostic = format!(
                        "increment ratio settled at {:.4} (< {RATIO_CEILING}); geometric tail bound {tail_bound:.3e}",
                        ratios[2]
                    );
                    return verdict;
                }
            }
        }
    }
    let n = incs.len();
    let last_ratio = if n >= 2 {
        (incs[n - 1] - incs[n - 2]).exp()
    } else {
        f64::NAN
    };
    verdict.diagnostic = format!(
        "no decision after {n} octaves; last increment ratio {last_ratio:.4}, partial integral {:.6e}",
        log_total.exp()
    );
    verdict
}

/// Classify `∫ integrand` for a positive integrand.
pub fn classify_integral<F, E>(name: &str, mut integrand: F, lower: f64, tail: Tail) -> IntegrabilityVerdict
where
    F: FnMut(f64) -> Result<f64, E>,
    E: std::fmt::Display,
{
    classify_log_integral(
        name,
        |t| -> Result<f64, String> {
            let v = integrand(t).map_err(|e| e.to_string())?;
            if v < 0.0 || v.is_nan() {
                return Err(format!("integrand must be positive, got {v} at t = {t}"));
            }
            Ok(v.ln())
        },
        lower,
        tail,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    StochasticCompleteness,
    Feller,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Yes,
    No,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub property: Property,
    pub verdict: Verdict,
    pub criteria_evidence: Vec<IntegrabilityVerdict>,
    pub rule_fired: String,
    /// Always "weighted-density criterion"; "comparison mode" is appended
    /// when a real comparison exponent replaced `m`.
    pub criterion: String,
    /// `u* = ∫_0^∞ A/a` when finite (stochastic completeness only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u_star: Option<f64>,
}

fn criterion_label(m: &ModelManifold) -> String {
    match m.comparison_exponent() {
        Some(n) => format!("weighted-density criterion; comparison mode (n = {n})"),
        None => "weighted-density criterion".to_string(),
    }
}

/// Start of the tail for every test at infinity.
pub const TAIL_START: f64 = 1.0;

/// `∫^∞ A/a` test.
pub fn stochastic_completeness(m: &ModelManifold) -> ClassificationReport {
    let v = classify_log_integral("A(t)/a(t)", |t| m.log_forward_ratio(t), TAIL_START, Tail::AtInfinity);
    let mut report = ClassificationReport {
        property: Property::StochasticCompleteness,
        verdict: Verdict::Unknown,
        criteria_evidence: Vec::new(),
        rule_fired: "inconclusive".into(),
        criterion: criterion_label(m),
        u_star: None,
    };
    match v.state {
        IntegralState::Divergent => {
            report.verdict = Verdict::Yes;
            report.rule_fired = "integral of A/a diverges".into();
        }
        IntegralState::Convergent => {
            report.verdict = Verdict::No;
            report.rule_fired = "integral of A/a converges".into();
            let head = integrate_log(
                |t| m.log_forward_ratio(t).map_err(|e| QuadError::Integrand(e.to_string())),
                0.0,
                TAIL_START,
                octave_opts(),
            );
            if let (Ok(h), Some(rest)) = (head, v.limit_estimate) {
                report.u_star = Some(h.exp() + rest);
            }
        }
        IntegralState::Inconclusive => {}
    }
    report.criteria_evidence.push(v);
    report
}

/// Feller test; `rule_fired` is one of `model1`, `model2`, `negation`.
pub fn feller(m: &ModelManifold) -> ClassificationReport {
    let mut report = ClassificationReport {
        property: Property::Feller,
        verdict: Verdict::Unknown,
        criteria_evidence: Vec::new(),
        rule_fired: "inconclusive".into(),
        criterion: criterion_label(m),
        u_star: None,
    };
    let inv = classify_log_integral(
        "1/a",
        |t| m.log_area_density(t).map(|l| -l),
        TAIL_START,
        Tail::AtInfinity,
    );
    let inv_state = inv.state;
    report.criteria_evidence.push(inv);
    match inv_state {
        IntegralState::Convergent => {
            report.verdict = Verdict::Yes;
            report.rule_fired = "model1".into();
            return report;
        }
        IntegralState::Inconclusive => return report,
        IntegralState::Divergent => {}
    }
    let vol = classify_log_integral("a", |t| m.log_area_density(t), TAIL_START, Tail::AtInfinity);
    let vol_state = vol.state;
    report.criteria_evidence.push(vol);
    match vol_state {
        IntegralState::Inconclusive => return report,
        IntegralState::Divergent => {
            // ∫_r^∞ a = ∞ for every r, so the second ratio is not integrable
            report.verdict = Verdict::Yes;
            report.rule_fired = "model2".into();
            return report;
        }
        IntegralState::Convergent => {}
    }
    let tail = classify_log_integral(
        "(∫_r^∞ a)/a(r)",
        |t| m.log_backward_ratio(t),
        TAIL_START,
        Tail::AtInfinity,
    );
    match tail.state {
        IntegralState::Divergent => {
            report.verdict = Verdict::Yes;
            report.rule_fired = "model2".into();
        }
        IntegralState::Convergent => {
            report.verdict = Verdict::No;
            report.rule_fired = "negation".into();
        }
        IntegralState::Inconclusive => {}
    }
    report.criteria_evidence.push(tail);
    report
}

/// `∫^∞ R / ln vol_f(B_R)`: divergence is sufficient for completeness.
pub fn volume_growth_sc_test(m: &ModelManifold) -> IntegrabilityVerdict {
    let name = "R/log vol_f(B_R)";
    let mut start = None;
    for j in 0..=MAX_OCTAVES_INFINITY as i32 {
        let r = 2f64.powi(j);
        match m.log_weighted_ball_volume(r) {
            Ok(lv) if lv >= 2.0 => {
                start = Some(r);
                break;
            }
            Ok(_) => {}
            Err(e) => {
                return IntegrabilityVerdict {
                    integrand: name.into(),
                    state: IntegralState::Inconclusive,
                    partial_values: vec![],
                    tail_estimate: None,
                    limit_estimate: None,
                    diagnostic: format!("volume evaluation failed at R = {r}: {e}"),
                }
            }
        }
    }
    let Some(start) = start else {
        return IntegrabilityVerdict {
            integrand: name.into(),
            state: IntegralState::Inconclusive,
            partial_values: vec![],
            tail_estimate: None,
            limit_estimate: None,
            diagnostic: "vol_f(B_R) stays below e² on the probed range; the volume test is vacuous".into(),
        };
    };
    classify_log_integral(
        name,
        |r| -> Result<f64, ManifoldError> { Ok(r.ln() - m.log_weighted_ball_volume(r)?.ln()) },
        start,
        Tail::AtInfinity,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VolumeBranch {
    Infinite,
    Finite,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BrooksBound {
    pub branch: VolumeBranch,
    /// Upper bound for `inf σ_ess`, in the form `limsup log vol_f(B_R) / R`
    /// (or `-log(vol_f(M) - vol_f(B_R)) / R` for finite volume).
    pub bound: Extended,
    /// `(R, ratio)` samples the limsup is taken over.
    pub samples: Vec<(f64, f64)>,
    pub volume_evidence: IntegrabilityVerdict,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BrooksError {
    #[error("cannot decide whether the weighted volume is finite: {0}")]
    Inconclusive(String),
    #[error(transparent)]
    Manifold(#[from] ManifoldError),
}

pub const BROOKS_OCTAVES: std::ops::RangeInclusive<i32> = 30..=40;
pub const BROOKS_UNBOUNDED: f64 = 1e6;

pub fn brooks_bound(m: &ModelManifold) -> Result<BrooksBound, BrooksError> {
    let vol = classify_log_integral("a", |t| m.log_area_density(t), TAIL_START, Tail::AtInfinity);
    let branch = match vol.state {
        IntegralState::Divergent => VolumeBranch::Infinite,
        IntegralState::Convergent => VolumeBranch::Finite,
        IntegralState::Inconclusive => return Err(BrooksError::Inconclusive(vol.diagnostic)),
    };
    let ln_omega = m.sphere_area().ln();
    let mut samples = Vec::new();
    for j in BROOKS_OCTAVES {
        let r = 2f64.powi(j);
        let ratio = match branch {
            VolumeBranch::Infinite => m.log_weighted_ball_volume(r)? / r,
            VolumeBranch::Finite => -(ln_omega + m.log_tail_area(r)?) / r,
        };
        samples.push((r, ratio));
    }
    let n = samples.len();
    let increasing = samples[n - 4..].windows(2).all(|w| w[1].1 > w[0].1);
    let top = samples.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    let bound = if increasing && samples[n - 1].1 >= BROOKS_UNBOUNDED {
        Extended::Unbounded
    } else {
        Extended::Finite(top)
    };
    Ok(BrooksBound {
        branch,
        bound,
        samples,
        volume_evidence: vol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{preset_manifold, ModelManifold};

    fn ok(v: f64) -> Result<f64, String> {
        Ok(v)
    }

    #[test]
    fn p_integral_examples() {
        let v = classify_integral("1/t^2", |t| ok(1.0 / (t * t)), 1.0, Tail::AtInfinity);
        assert_eq!(v.state, IntegralState::Convergent, "{}", v.diagnostic);
        assert!((v.limit_estimate.unwrap() - 1.0).abs() < 1e-5);
        let v = classify_integral("1/t", |t| ok(1.0 / t), 1.0, Tail::AtInfinity);
        assert_eq!(v.state, IntegralState::Divergent, "{}", v.diagnostic);
        let v = classify_integral("t^-3/4", |t| ok(t.powf(-0.75)), 1.0, Tail::AtZeroPlus);
        assert_eq!(v.state, IntegralState::Convergent, "{}", v.diagnostic);
        assert!((v.limit_estimate.unwrap() - 4.0).abs() < 1e-5);
    }

    #[test]
    fn invariants_of_verdicts() {
        for (name, p) in [("a", 1.5), ("b", 2.0), ("c", 0.5), ("d", 1.0)] {
            let v = classify_integral(name, |t| ok(t.powf(-p)), 1.0, Tail::AtInfinity);
            match v.state {
                IntegralState::Convergent => {
                    let last = v.partial_values.last().unwrap().1;
                    assert!(v.tail_estimate.unwrap() < TAIL_REL_TOL * last);
                }
                IntegralState::Divergent => assert!(p <= 1.0),
                IntegralState::Inconclusive => {}
            }
        }
    }

    #[test]
    fn eval_errors_are_inconclusive() {
        let v = classify_integral(
            "bad",
            |t| if t > 3.0 { Err("boom") } else { Ok(1.0) },
            1.0,
            Tail::AtInfinity,
        );
        assert_eq!(v.state, IntegralState::Inconclusive);
        assert!(v.diagnostic.contains("boom"));
    }

    #[test]
    fn sc_examples() {
        let e3 = preset_manifold("euclidean-3").unwrap();
        assert_eq!(stochastic_completeness(&e3).verdict, Verdict::Yes);
        let grow = preset_manifold("exp-growth-2").unwrap();
        let rep = stochastic_completeness(&grow);
        assert_eq!(rep.verdict, Verdict::No);
        assert!(rep.u_star.unwrap().is_finite());
        let decay = preset_manifold("exp-alpha-2-3").unwrap();
        assert_eq!(stochastic_completeness(&decay).verdict, Verdict::Yes);
    }

    #[test]
    fn feller_examples() {
        let rep = feller(&preset_manifold("exp-alpha-2-2").unwrap());
        assert_eq!((rep.verdict, rep.rule_fired.as_str()), (Verdict::Yes, "model2"));
        let rep = feller(&preset_manifold("exp-alpha-2-3").unwrap());
        assert_eq!((rep.verdict, rep.rule_fired.as_str()), (Verdict::No, "negation"));
        let rep = feller(&preset_manifold("euclidean-3").unwrap());
        assert_eq!((rep.verdict, rep.rule_fired.as_str()), (Verdict::Yes, "model1"));
    }

    #[test]
    fn volume_test_examples() {
        assert_eq!(
            volume_growth_sc_test(&preset_manifold("euclidean-3").unwrap()).state,
            IntegralState::Divergent
        );
        assert_eq!(
            volume_growth_sc_test(&preset_manifold("hyperbolic-2").unwrap()).state,
            IntegralState::Divergent
        );
        assert_eq!(
            volume_growth_sc_test(&preset_manifold("exp-growth-2").unwrap()).state,
            IntegralState::Convergent
        );
    }

    #[test]
    fn brooks_examples() {
        let b = brooks_bound(&preset_manifold("hyperbolic-2").unwrap()).unwrap();
        assert_eq!(b.branch, VolumeBranch::Infinite);
        assert!((b.bound.as_f64() - 1.0).abs() < 0.01, "{:?}", b.bound);
        let b = brooks_bound(&preset_manifold("euclidean-3").unwrap()).unwrap();
        assert!(b.bound.as_f64().abs() < 1e-6, "{:?}", b.bound);
        let b = brooks_bound(&preset_manifold("exp-alpha-2-3").unwrap()).unwrap();
        assert_eq!(b.branch, VolumeBranch::Finite);
        assert_eq!(b.bound, Extended::Unbounded);
    }

    #[test]
    fn weight_shift_flips_no_verdict() {
        let base = preset_manifold("exp-alpha-2-3").unwrap();
        let shifted = ModelManifold::new(2, base.g().clone(), "7.5".parse().unwrap(), "shifted").unwrap();
        assert_eq!(feller(&base).verdict, feller(&shifted).verdict);
        assert_eq!(
            stochastic_completeness(&base).verdict,
            stochastic_completeness(&shifted).verdict
        );
    }
}
