//! Closed-form and sampled eigenvalue bounds.

use serde::Serialize;

use super::eigen::{ess_spectrum_bottom, lambda1_interval_of, EssSpecReport, Spaceform};
use super::{BoundKind, BoundStatus, BoundValue, RadialOperator, SpectralError};
use crate::expr::RadialFunction;
use crate::integrability::brooks_bound;
use crate::manifold::{ModelManifold, SolitonPreset};
use crate::ode::{alpha_tail, alpha_tail_profile, comparison_g, Integrator, OdeError, Step, Tolerance};
use crate::value::{log_grid, Extended};

/// Samples of the Barta quotient.
pub const BARTA_SAMPLES: usize = 10_000;
/// Right end of the sampling grid for `r_hi = ∞`, as a multiple of `max(r_lo, 1)`.
pub const BARTA_FAR: f64 = 1e6;

#[derive(Debug, Clone, PartialEq)]
pub enum BartaField {
    /// `X = w(r) ∂_r`, quotient `w' + w Δ_f r - w²`.
    Vector(RadialFunction),
    /// `0 < u`, quotient `-Δ_f u / u`.
    Function(RadialFunction),
}

/// The log grid the Barta infimum is sampled on.
pub fn barta_sampling_grid(r_lo: f64, r_hi: f64) -> Vec<f64> {
    let a = if r_lo > 0.0 {
        r_lo * (1.0 + 1e-12)
    } else {
        1e-8 * r_hi.min(1.0)
    };
    let b = if r_hi.is_finite() {
        r_hi * (1.0 - 1e-12)
    } else {
        BARTA_FAR * r_lo.max(1.0)
    };
    log_grid(a, b, BARTA_SAMPLES)
}

fn golden_min(q: &dyn Fn(f64) -> Result<f64, SpectralError>, mut a: f64, mut b: f64) -> Result<f64, SpectralError> {
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let (mut f1, mut f2) = (q(x1)?, q(x2)?);
    for _ in 0..80 {
        if (b - a) <= 1e-12 * b.abs().max(1e-300) {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = q(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = q(x2)?;
        }
    }
    Ok(f1.min(f2))
}

/// `inf_{(r_lo, r_hi)} q` by log-grid sampling, golden-section polish around
/// the grid minimiser, and a Lipschitz margin from the sampled slope there.
/// This is certified by sampling only.
pub fn barta_bound_with(
    kind: BoundKind,
    q: &dyn Fn(f64) -> Result<f64, SpectralError>,
    r_lo: f64,
    r_hi: f64,
) -> Result<BoundValue, SpectralError> {
    if !(r_lo >= 0.0 && r_hi > r_lo) {
        return Err(SpectralError::Validation(format!(
            "need 0 ≤ r_lo < r_hi, got ({r_lo}, {r_hi})"
        )));
    }
    let grid = barta_sampling_grid(r_lo, r_hi);
    let vals = grid.iter().map(|&r| q(r)).collect::<Result<Vec<f64>, _>>()?;
    barta_bound_from_samples(kind, q, r_lo, r_hi, &vals)
}

/// [`barta_bound_with`] for values already sampled on
/// [`barta_sampling_grid`]; `q` is only called for the polish.
pub fn barta_bound_from_samples(
    kind: BoundKind,
    q: &dyn Fn(f64) -> Result<f64, SpectralError>,
    r_lo: f64,
    r_hi: f64,
    vals: &[f64],
) -> Result<BoundValue, SpectralError> {
    let grid = barta_sampling_grid(r_lo, r_hi);
    if vals.len() != grid.len() {
        return Err(SpectralError::Validation(format!(
            "{} samples for a grid of {}",
            vals.len(),
            grid.len()
        )));
    }
    if let Some(i) = vals.iter().position(|v| !v.is_finite()) {
        return Err(SpectralError::Domain(format!(
            "Barta quotient not finite at r = {}",
            grid[i]
        )));
    }
    let n = vals.len();
    let k = (0..n)
        .min_by(|&i, &j| vals[i].total_cmp(&vals[j]))
        .expect("non-empty grid");
    // at an open end, values that keep falling by growing amounts diverge
    let open_end = (k == n - 1 && r_hi.is_infinite()) || (k == 0 && r_lo == 0.0);
    if open_end {
        let per_decade = (n as f64 / (grid[n - 1] / grid[0]).log10()).floor() as usize;
        let idx: Vec<usize> = (0..4)
            .filter_map(|j| {
                if k == 0 {
                    Some(j * per_decade).filter(|&i| i < n)
                } else {
                    (n - 1).checked_sub(j * per_decade)
                }
            })
            .collect();
        if per_decade > 0 && idx.len() == 4 {
            let d: Vec<f64> = idx.windows(2).map(|w| vals[w[1]] - vals[w[0]]).collect();
            if d.iter().all(|&x| x > 0.0) && d.windows(2).all(|w| w[1] <= w[0]) && vals[k] < -1e3 {
                return Err(SpectralError::UnboundedBelow {
                    r: grid[k],
                    value: vals[k],
                });
            }
        }
    }
    let lo = grid[k.saturating_sub(1)];
    let hi = grid[(k + 1).min(n - 1)];
    let polished = golden_min(q, lo, hi)?.min(vals[k]);
    // Lipschitz constant from the neighbouring samples, times the stretch
    // the samples do not reach: the ends of the domain, or the final
    // golden-section bracket
    let slope = [k.checked_sub(1), Some(k + 1).filter(|&i| i < n)]
        .iter()
        .flatten()
        .map(|&i| ((vals[i] - vals[k]) / (grid[i] - grid[k])).abs())
        .fold(0.0, f64::max);
    let gap = if k == 0 {
        grid[0] - r_lo
    } else if k == n - 1 && r_hi.is_finite() {
        r_hi - grid[n - 1]
    } else {
        1e-12 * grid[k]
    };
    let margin = slope * gap;
    let value = polished - margin;
    let bound = BoundValue::new(
        kind,
        value,
        &[
            ("r_lo", r_lo),
            ("r_hi", r_hi),
            ("argmin", grid[k]),
            ("margin", margin),
            ("samples", n as f64),
        ],
        "certified-by-sampling",
    );
    Ok(if value > 0.0 {
        bound
    } else {
        bound.with_status(BoundStatus::Vacuous)
    })
}

/// Barta lower bound `λ1 ≥ inf (div_f X - |X|²)` for a radial field or a
/// positive radial test function on the annulus `(r_lo, r_hi)`; `r_hi` may
/// be infinite.
pub fn barta_bound(m: &ModelManifold, field: &BartaField, r_lo: f64, r_hi: f64) -> Result<BoundValue, SpectralError> {
    match field {
        BartaField::Vector(w) => {
            let q = |r: f64| -> Result<f64, SpectralError> {
                let j = w.eval_jet(r).map_err(crate::manifold::ManifoldError::from)?;
                Ok(j.d1 + j.value * m.drift(r)? - j.value * j.value)
            };
            barta_bound_with(BoundKind::BartaVector, &q, r_lo, r_hi)
        }
        BartaField::Function(u) => {
            let q = |r: f64| -> Result<f64, SpectralError> {
                let l = u.eval_ln_jet(r).map_err(crate::manifold::ManifoldError::from)?;
                Ok(-(l.d2 + l.d1 * l.d1 + m.drift(r)? * l.d1))
            };
            barta_bound_with(BoundKind::BartaFunction, &q, r_lo, r_hi)
        }
    }
}

/// Barta function bound on `M \ B_R` with `u = u* - α` on a stochastically
/// incomplete model, where `-Δ_f u / u = 1 / (u* - α)`.
pub fn barta_alpha_bound(m: &ModelManifold, r: f64) -> Result<BoundValue, SpectralError> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(SpectralError::Validation(format!("need 0 < R < ∞, got {r}")));
    }
    let grid = barta_sampling_grid(r, f64::INFINITY);
    let vals: Vec<f64> = alpha_tail_profile(m, &grid)?.iter().map(|t| 1.0 / t).collect();
    let q = |t: f64| -> Result<f64, SpectralError> { Ok(1.0 / alpha_tail(m, t)?) };
    barta_bound_from_samples(BoundKind::BartaFunction, &q, r, f64::INFINITY, &vals)
}

/// Cheng comparison: `λ1(B_R) ≤ λ1` of the ball of radius `R` in the
/// `(m+1)`-dimensional hyperbolic space of curvature `-(α+β)/m`, for
/// `Ric_f ≥ -α` and `|∇f|² ≤ β` on the ball.
pub fn cheng_upper_bound(alpha: f64, beta: f64, m: usize, r: f64) -> Result<BoundValue, SpectralError> {
    if !(alpha >= 0.0 && beta >= 0.0 && m >= 1 && r > 0.0 && r.is_finite()) {
        return Err(SpectralError::Validation(format!(
            "need α, β ≥ 0, m ≥ 1, R > 0; got {alpha}, {beta}, {m}, {r}"
        )));
    }
    let kappa = -(alpha + beta) / m as f64;
    let space = Spaceform { kappa, dim: m + 1 };
    if r >= space.max_radius() {
        return Err(SpectralError::Domain(format!(
            "R = {r} exceeds the spaceform diameter {}",
            space.max_radius()
        )));
    }
    let res = lambda1_interval_of(&space, 0.0, r)?;
    let agrees = res.cross_check.map_or(0.0, |c| if c.agrees { 1.0 } else { 0.0 });
    Ok(BoundValue::new(
        BoundKind::Cheng,
        res.lambda1,
        &[
            ("alpha", alpha),
            ("beta", beta),
            ("m", m as f64),
            ("R", r),
            ("kappa", kappa),
            ("cross_check_agrees", agrees),
        ],
        format!(
            "λ1 of the ball of radius {r} in the {}-dimensional spaceform of curvature {kappa}",
            m + 1
        ),
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub enum QianKind {
    /// `Ric_f ≥ -k²`: `C + (m-1)/r + k² r`.
    I { k: f64, c: f64 },
    /// `Ric_f ≥ -k1(r)²`, `|∇f| ≤ k2(r)`: `m g'/g` with `g'' = ((k1²+k2²)/m) g`.
    II { k1: RadialFunction, k2: RadialFunction },
    /// `Ric_f ≥ -k`, `|∇f| ≤ C(1 + d(o,·))`: `(m-1)/ρ + (k+2C)ρ/3 + C(1 + d_op)`.
    III { k: f64, c: f64, d_op: f64 },
}

/// Grid resolution for the comparison profile of kind II.
pub const QIAN_II_NODES: usize = 4000;

/// Upper bound for `Δ_f r` (or `Δ_f ρ`) at `r`.
pub fn qian_drift_bound(kind: &QianKind, m: usize, r: f64) -> Result<BoundValue, SpectralError> {
    if !(r > 0.0 && m >= 1) {
        return Err(SpectralError::Validation(format!(
            "need r > 0 and m ≥ 1, got r={r}, m={m}"
        )));
    }
    let mf = m as f64;
    match kind {
        QianKind::I { k, c } => {
            if *k < 0.0 || *c < 0.0 {
                return Err(SpectralError::Validation("k and C must be non-negative".into()));
            }
            Ok(BoundValue::new(
                BoundKind::QianI,
                c + (mf - 1.0) / r + k * k * r,
                &[("k", *k), ("C", *c), ("m", mf), ("r", r)],
                "",
            ))
        }
        QianKind::II { k1, k2 } => {
            let prof = comparison_g(k1, k2, m, r, QIAN_II_NODES)?;
            let psi = *prof.psi.last().expect("non-empty profile");
            Ok(BoundValue::new(
                BoundKind::QianII,
                mf * psi,
                &[("m", mf), ("r", r)],
                format!("k1 = {k1}, k2 = {k2}"),
            ))
        }
        QianKind::III { k, c, d_op } => {
            if *k < 0.0 || *c < 0.0 || *d_op < 0.0 {
                return Err(SpectralError::Validation("k, C and d(o,p) must be non-negative".into()));
            }
            let v = (mf - 1.0) / r + (k + 2.0 * c) * r / 3.0 + c * (1.0 + d_op);
            Ok(BoundValue::new(
                BoundKind::QianIII,
                v,
                &[("k", *k), ("C", *c), ("d_op", *d_op), ("m", mf), ("rho", r)],
                "",
            ))
        }
    }
}

/// Samples of the drift for [`half_drift_squared_bound`].
pub const DRIFT_SAMPLES: usize = 10_000;

/// `c²/4` with `c = inf_{r>R} |Δ_f r|`, valid when the drift keeps one sign.
/// A tail that is still shrinking at the end of the sampled range gives
/// `c = 0`.
pub fn half_drift_squared_bound<O: RadialOperator + ?Sized>(op: &O, r: f64) -> Result<BoundValue, SpectralError> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(SpectralError::Validation(format!("R must be positive, got {r}")));
    }
    let grid = log_grid(r, BARTA_FAR * r.max(1.0), DRIFT_SAMPLES);
    let b = grid.iter().map(|&x| op.drift(x)).collect::<Result<Vec<f64>, _>>()?;
    let pos = b.iter().any(|&v| v > 0.0);
    let neg = b.iter().any(|&v| v < 0.0);
    if pos && neg {
        let i = b.windows(2).position(|w| w[0] * w[1] < 0.0).unwrap_or(0);
        return Err(SpectralError::Inapplicable(format!(
            "Δ_f r changes sign near r = {}",
            grid[i + 1]
        )));
    }
    let abs: Vec<f64> = b.iter().map(|v| v.abs()).collect();
    let n = abs.len();
    let decade = n / ((grid[n - 1] / grid[0]).log10().max(1.0) as usize).max(1);
    let still_falling = abs[n - 1] < abs[n - 1 - decade.min(n - 1)] * (1.0 - 1e-3);
    let c = if still_falling {
        0.0
    } else {
        abs.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    let bound = BoundValue::new(
        BoundKind::HalfDriftSquared,
        c * c / 4.0,
        &[("R", r), ("c", c)],
        "c = sampled inf |Δ_f r| over (R, ∞)",
    );
    Ok(if c > 0.0 {
        bound
    } else {
        bound.with_status(BoundStatus::Vacuous)
    })
}

/// Absolute slack in the Brooks comparisons.
pub const BROOKS_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BrooksConsistency {
    pub ess: EssSpecReport,
    /// `limsup log vol_f(B_R)/R` (or its finite-volume analogue), as printed.
    pub brooks_verbatim: Option<Extended>,
    /// The classical form `μ²/4` of the same limsup `μ`.
    pub brooks_classical: Option<Extended>,
    pub verbatim_ok: Option<bool>,
    pub classical_ok: Option<bool>,
    pub skipped: Option<String>,
}

/// Compare the essential-spectrum bottom with the Brooks upper bound.
pub fn brooks_vs_ess(m: &ModelManifold, radii: &[f64]) -> Result<BrooksConsistency, SpectralError> {
    let ess = ess_spectrum_bottom(m, radii)?;
    let brooks = brooks_bound(m);
    let mut out = BrooksConsistency {
        ess,
        brooks_verbatim: None,
        brooks_classical: None,
        verbatim_ok: None,
        classical_ok: None,
        skipped: None,
    };
    let b = match brooks {
        Ok(b) => b.bound,
        Err(e) => {
            out.skipped = Some(format!("Brooks bound unavailable: {e}"));
            return Ok(out);
        }
    };
    out.brooks_verbatim = Some(b);
    out.brooks_classical = Some(match b {
        Extended::Finite(mu) => Extended::Finite(mu * mu / 4.0),
        Extended::Unbounded => Extended::Unbounded,
    });
    match (out.ess.bottom_estimate, b) {
        (Extended::Finite(bottom), Extended::Finite(mu)) => {
            out.verbatim_ok = Some(bottom <= mu + BROOKS_TOL);
            out.classical_ok = Some(bottom <= mu * mu / 4.0 + BROOKS_TOL);
        }
        (bottom, bound) => {
            out.skipped = Some(format!(
                "not comparable: essential-spectrum bottom {bottom}, Brooks bound {bound}"
            ));
        }
    }
    Ok(out)
}

/// `inf_{M\Ω} u ≤ ((a + inf σ_ess)/b)^{1/(σ-1)}` for positive solutions of
/// `Δ_f u ≤ a u - b u^σ` near infinity. A negative numerator certifies that
/// no such solution exists.
pub fn semilinear_inf_bound(a: f64, b: f64, sigma: f64, ess_bottom: f64) -> Result<BoundValue, SpectralError> {
    if !(b > 0.0 && sigma > 1.0 && ess_bottom >= 0.0) {
        return Err(SpectralError::Validation(format!(
            "need b > 0, σ > 1, ess_bottom ≥ 0; got {b}, {sigma}, {ess_bottom}"
        )));
    }
    let num = a + ess_bottom;
    let inputs = [
        ("a", a),
        ("b", b),
        ("sigma", sigma),
        ("ess_bottom", ess_bottom),
        ("numerator", num),
    ];
    if num < 0.0 {
        return Ok(BoundValue::new(
            BoundKind::SemilinearInf,
            0.0,
            &inputs,
            "a + inf σ_ess < 0: no positive solution exists",
        )
        .with_status(BoundStatus::NonExistence));
    }
    Ok(BoundValue::new(
        BoundKind::SemilinearInf,
        (num / b).powf(1.0 / (sigma - 1.0)),
        &inputs,
        "",
    ))
}

/// Radii over which `λ1(B_R)·R²/(1+R²)` is maximised for the ball-radius constant.
pub const PROP40_RADII: (f64, f64, usize) = (1e-3, 1e2, 31);

/// `c(m, μ, β) = sup_R λ1(B_R^{m+1}) R²/(1+R²)` over a log grid of radii,
/// with the ball in the hyperbolic space of curvature `-(μ+β)/m`. Returns
/// `(c, maximising R)`.
pub fn prop40_constant(mu: f64, beta: f64, m: usize) -> Result<(f64, f64), SpectralError> {
    let (lo, hi, n) = PROP40_RADII;
    let mut best = (f64::NEG_INFINITY, lo);
    for r in log_grid(lo, hi, n) {
        let lam = cheng_upper_bound(mu, beta, m, r)?.value;
        let v = lam * r * r / (1.0 + r * r);
        if v > best.0 {
            best = (v, r);
        }
    }
    Ok(best)
}

/// `inf_{B_R(x)} u ≤ (a/b + (c/b)(1+R²)/R²)^{1/(σ-1)}`.
pub fn prop40_bound(a: f64, b: f64, sigma: f64, c: f64, r: f64) -> Result<BoundValue, SpectralError> {
    if !(a >= 0.0 && b > 0.0 && sigma > 1.0 && c > 0.0 && r > 0.0) {
        return Err(SpectralError::Validation(format!(
            "need a ≥ 0, b, c, R > 0, σ > 1; got {a}, {b}, {sigma}, {c}, {r}"
        )));
    }
    let v = (a / b + c / b * (1.0 + r * r) / (r * r)).powf(1.0 / (sigma - 1.0));
    Ok(BoundValue::new(
        BoundKind::Prop40,
        v,
        &[("a", a), ("b", b), ("sigma", sigma), ("c", c), ("R", r)],
        "c from the Cheng comparison",
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AprioriSample {
    pub u0: f64,
    pub sup_u: f64,
    /// Radius the solution was followed to.
    pub reached: f64,
    /// Stayed finite and non-negative on `[0, r_max]`.
    pub global: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AprioriReport {
    pub a: f64,
    pub b: f64,
    pub sigma: f64,
    /// `H^{1/(σ-1)}` with `H = a_-/b`.
    pub bound: f64,
    pub samples: Vec<AprioriSample>,
    pub ok: bool,
}

/// Value past which a radial solution counts as blowing up.
pub const BLOWUP: f64 = 1e8;

/// Radial solutions of `Δ_f u = a u + b u^σ` with `a = -λ`, `b = 1/m` from
/// `u(0) = u0` on the soliton: every solution that stays finite and
/// non-negative up to `r_max` must remain below `(mλ)^{1/(σ-1)}·…`, i.e.
/// `H^{1/(σ-1)}` with `H = a_-/b`.
pub fn apriori_check(
    soliton: &SolitonPreset,
    sigma: f64,
    u0s: &[f64],
    r_max: f64,
) -> Result<AprioriReport, SpectralError> {
    let m = &soliton.base;
    let mf = m.dimension() as f64;
    let a = -soliton.lambda;
    let b = 1.0 / mf;
    if !(sigma > 1.0 && r_max > 0.0) {
        return Err(SpectralError::Validation(format!(
            "need σ > 1 and r_max > 0, got {sigma}, {r_max}"
        )));
    }
    let h = (-a).max(0.0) / b;
    let bound = h.powf(1.0 / (sigma - 1.0));
    let mut samples = Vec::new();
    for &u0 in u0s {
        let nl = |u: f64| a * u + b * u.max(0.0).powf(sigma);
        let mut rhs =
            |r: f64, y: &[f64; 2]| -> Result<[f64; 2], OdeError> { Ok([y[1], nl(y[0]) - m.drift(r)? * y[1]]) };
        let eps = 1e-6 * r_max.min(1.0);
        let c2 = nl(u0) / (2.0 * mf);
        let (mut t, mut y) = (eps, [u0 + c2 * eps * eps, 2.0 * c2 * eps]);
        let mut sup = u0.max(y[0]);
        let mut it = Integrator::new(Tolerance {
            atol: 1e-12,
            rtol: 1e-10,
        });
        let mut fail = false;
        it.advance(&mut rhs, &mut t, &mut y, r_max, &mut |_, _, _, y1| {
            sup = sup.max(y1[0]);
            if y1[0] > BLOWUP || y1[0] < 0.0 {
                fail = true;
                Step::Stop
            } else {
                Step::Continue
            }
        })?;
        samples.push(AprioriSample {
            u0,
            sup_u: sup,
            reached: t,
            global: !fail,
        });
    }
    let ok = samples
        .iter()
        .filter(|s| s.global)
        .all(|s| s.sup_u <= bound * (1.0 + 1e-6) + 1e-12);
    Ok(AprioriReport {
        a,
        b,
        sigma,
        bound,
        samples,
        ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{preset, preset_manifold};
    use crate::spectral::{lambda1_exterior, lambda1_interval};

    fn rf(s: &str) -> RadialFunction {
        s.parse().unwrap()
    }

    #[test]
    fn barta_hyperbolic_half() {
        // u = e^{-r/2}: -Δu/u = coth(r)/2 - 1/4 ≥ 1/4
        let h2 = preset_manifold("hyperbolic-2").unwrap();
        let v = barta_bound(&h2, &BartaField::Vector(rf("0.5")), 0.0, f64::INFINITY).unwrap();
        assert!((v.value - 0.25).abs() < 1e-9, "{}", v.value);
        assert!(v.value <= 0.25);
        let f = barta_bound(&h2, &BartaField::Function(rf("exp(-r/2)")), 0.0, f64::INFINITY).unwrap();
        assert!((f.value - v.value).abs() < 1e-9);
        assert_eq!(f.kind, BoundKind::BartaFunction);
    }

    #[test]
    fn barta_euclidean_constant_field_is_vacuous() {
        let e3 = preset_manifold("euclidean-3").unwrap();
        let v = barta_bound(&e3, &BartaField::Vector(rf("0.3")), 1.0, f64::INFINITY).unwrap();
        assert!((v.value + 0.09).abs() < 1e-5, "{}", v.value);
        assert_eq!(v.status, BoundStatus::Vacuous);
        let err = barta_bound(&e3, &BartaField::Vector(rf("r")), 1.0, f64::INFINITY).unwrap_err();
        assert!(matches!(err, SpectralError::UnboundedBelow { .. }), "{err:?}");
    }

    #[test]
    fn qian_examples() {
        let one = qian_drift_bound(&QianKind::I { k: 0.0, c: 0.0 }, 3, 2.0).unwrap();
        assert_eq!(one.value, 1.0);
        let e3 = preset_manifold("euclidean-3").unwrap();
        assert_eq!(one.value, e3.drift(2.0).unwrap());
        let three = qian_drift_bound(
            &QianKind::III {
                k: 0.0,
                c: 0.0,
                d_op: 0.0,
            },
            3,
            2.0,
        )
        .unwrap();
        assert_eq!(three.value, 1.0);
        // k1² + k2² = m gives g = sinh, bound m coth r
        let h2 = preset_manifold("hyperbolic-2").unwrap();
        for r in [0.5, 1.0, 3.0] {
            let two = qian_drift_bound(
                &QianKind::II {
                    k1: rf("sqrt(2)"),
                    k2: rf("0"),
                },
                2,
                r,
            )
            .unwrap();
            assert!((two.value - 2.0 / r.tanh()).abs() < 1e-8, "{}", two.value);
            assert!(h2.drift(r).unwrap() <= two.value);
        }
    }

    #[test]
    fn half_drift_examples() {
        let h2 = preset_manifold("hyperbolic-2").unwrap();
        let v = half_drift_squared_bound(&h2, 1.0).unwrap();
        assert!((v.value - 0.25).abs() < 1e-12, "{}", v.value);
        let e3 = preset_manifold("euclidean-3").unwrap();
        let v = half_drift_squared_bound(&e3, 1.0).unwrap();
        assert_eq!(v.value, 0.0);
        assert_eq!(v.status, BoundStatus::Vacuous);
        // g = sinh(r) e^{-r}·… has drift changing sign
        let m = ModelManifold::new(2, rf("r"), rf("r^2"), "sign-change").unwrap();
        assert!(matches!(
            half_drift_squared_bound(&m, 0.1),
            Err(SpectralError::Inapplicable(_))
        ));
    }

    #[test]
    fn cheng_flat_four_ball() {
        let c = cheng_upper_bound(0.0, 0.0, 3, 1.0).unwrap();
        assert!((c.value - 14.681_970_642_123_89).abs() < 1e-6, "{}", c.value);
        let e3 = preset_manifold("euclidean-3").unwrap();
        let ball = lambda1_interval(&e3, 0.0, 1.0).unwrap();
        assert!(ball.lambda1 <= c.value);
        let small = cheng_upper_bound(0.0, 0.0, 3, 1e-3).unwrap();
        assert!(small.value > 1e7);
    }

    #[test]
    fn semilinear_examples() {
        let one = semilinear_inf_bound(1.0, 1.0, 2.0, 0.0).unwrap();
        assert_eq!(one.value, 1.0);
        let none = semilinear_inf_bound(-1.0, 1.0, 2.0, 0.0).unwrap();
        assert_eq!(none.status, BoundStatus::NonExistence);
    }

    #[test]
    fn ball_radius_bound_algebra() {
        let v = prop40_bound(0.0, 2.0, 3.0, 4.0, 1.0).unwrap();
        assert!((v.value - (2.0 * 2.0f64).sqrt()).abs() < 1e-14);
        let far = prop40_bound(1.0, 1.0, 2.0, 3.0, 1e8).unwrap();
        assert!((far.value - 4.0).abs() < 1e-12);
    }

    #[test]
    fn apriori_on_shrinker() {
        let p = preset("gaussian-shrinker-3-0.5").unwrap();
        let s = p.soliton().unwrap();
        let h = 3.0 * 0.5;
        let u0s: Vec<f64> = [0.1, 0.5, 0.9, 0.99, 1.01, 1.5].iter().map(|x| x * h).collect();
        let rep = apriori_check(s, 2.0, &u0s, 8.0).unwrap();
        assert!((rep.bound - h).abs() < 1e-15);
        assert!(rep.ok, "{:?}", rep.samples);
        assert!(rep.samples.iter().filter(|s| s.u0 > h).all(|s| !s.global));
    }

    #[test]
    fn half_drift_below_exterior_eigenvalue() {
        let m = preset_manifold("exp-alpha-2-3").unwrap();
        let hd = half_drift_squared_bound(&m, 2.0).unwrap();
        let ext = lambda1_exterior(&m, 2.0).unwrap();
        assert!(hd.value > 30.0, "{}", hd.value);
        assert!(
            hd.value <= ext.lambda1 * (1.0 + 1e-6),
            "{} vs {}",
            hd.value,
            ext.lambda1
        );
    }
}
