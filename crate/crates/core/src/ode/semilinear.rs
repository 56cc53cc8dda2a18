//! Exterior problems `u'' + b u' = Λ(u)`, `u(R0) = u0`, selecting the
//! solution that neither crosses zero nor turns back up by shooting on
//! `u'(R0)`.
//!
//! Trajectories that start too steep cross zero ("undershoot"), too shallow
//! ones turn around ("overshoot"). Bisection pins the separatrix; how the
//! radius at which the bracketing pair separates moves as the bracket
//! shrinks tells compact support (it settles) from decay (it keeps moving
//! out like `ln(1/δ)`).

use serde::Serialize;

use super::rk45::{Integrator, Step, Tolerance};
use super::{uniform_grid, OdeError, RadialProfile};
use crate::expr::RadialFunction;
use crate::manifold::ModelManifold;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Nonlinearity {
    /// `coeff · u^exponent`
    Power { coeff: f64, exponent: f64 },
    /// An expression in which the variable `r` stands for `u`.
    Custom { expr: RadialFunction },
}

impl Nonlinearity {
    pub fn eval(&self, u: f64) -> Result<f64, OdeError> {
        let v = match self {
            Nonlinearity::Power { coeff, exponent } => {
                if u == 0.0 {
                    0.0
                } else {
                    coeff * u.powf(*exponent)
                }
            }
            Nonlinearity::Custom { expr } => expr.value(u).map_err(|e| OdeError::Rhs(e.to_string()))?,
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(OdeError::Rhs(format!("nonlinearity not finite at u = {u}")))
        }
    }

    /// `Λ(0) = 0` and `Λ > 0` on `(0, u_max]`.
    pub fn validate(&self, u_max: f64) -> Result<(), OdeError> {
        let z = self.eval(0.0)?;
        if z.abs() > 1e-12 {
            return Err(OdeError::Validation(format!(
                "nonlinearity must vanish at 0, got Λ(0) = {z}"
            )));
        }
        for i in 0..=100 {
            let u = u_max * 10f64.powf(-8.0 * (1.0 - i as f64 / 100.0));
            let v = self.eval(u)?;
            if !(v > 0.0) {
                return Err(OdeError::Validation(format!(
                    "nonlinearity must be positive for u > 0, got Λ({u:e}) = {v}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SupportReport {
    DecaysToZero,
    CompactSupport { r_dead: f64 },
    BoundedAway { inf_u: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SemilinearResult {
    pub profile: RadialProfile,
    pub support: SupportReport,
    /// Selected `u'(R0)`.
    pub slope: f64,
    /// `(relative bracket width, separation radius)` along the bisection.
    pub separation_trace: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Outcome {
    Undershoot(f64),
    Overshoot(f64),
    Neither,
}

struct Trajectory {
    outcome: Outcome,
    values: Vec<f64>,
    ders: Vec<f64>,
    last: [f64; 2],
}

/// Bracket widths at which the separation radius is compared.
const COARSE_WIDTH: f64 = 1e-10;
/// Movement of the separation radius (between the coarse and the final
/// bracket) below which the support is declared compact.
pub const SETTLE_TOL: f64 = 0.25;

fn shoot(m: &ModelManifold, lam: &Nonlinearity, grid: &[f64], u0: f64, s: f64) -> Result<Trajectory, OdeError> {
    let mut rhs = |r: f64, y: &[f64; 2]| -> Result<[f64; 2], OdeError> {
        Ok([y[1], lam.eval(y[0].max(0.0))? - m.drift(r)? * y[1]])
    };
    let mut it = Integrator::new(Tolerance {
        atol: 1e-14,
        rtol: 1e-10,
    });
    let (mut t, mut y) = (grid[0], [u0, s]);
    let mut values = vec![u0];
    let mut ders = vec![s];
    let mut outcome = Outcome::Neither;
    for &r in &grid[1..] {
        let stopped = it.advance(&mut rhs, &mut t, &mut y, r, &mut |t0, y0, t1, y1| {
            if y1[0] < 0.0 {
                let frac = y0[0] / (y0[0] - y1[0]);
                outcome = Outcome::Undershoot(t0 + frac * (t1 - t0));
                Step::Stop
            } else if y1[1] > 0.0 {
                let frac = if y1[1] > y0[1] { -y0[1] / (y1[1] - y0[1]) } else { 1.0 };
                outcome = Outcome::Overshoot(t0 + frac * (t1 - t0));
                Step::Stop
            } else {
                Step::Continue
            }
        })?;
        if stopped {
            break;
        }
        values.push(y[0]);
        ders.push(y[1]);
    }
    Ok(Trajectory {
        outcome,
        values,
        ders,
        last: y,
    })
}

fn event_radius(o: Outcome) -> f64 {
    match o {
        Outcome::Undershoot(r) | Outcome::Overshoot(r) => r,
        Outcome::Neither => f64::INFINITY,
    }
}

/// Solve on `n` equispaced nodes of `[r0, r_max]`.
pub fn semilinear_exterior(
    m: &ModelManifold,
    lam: &Nonlinearity,
    r0: f64,
    u0: f64,
    r_max: f64,
    n: usize,
) -> Result<SemilinearResult, OdeError> {
    if !(u0 > 0.0 && r0 > 0.0 && r_max > r0 && n >= 5) {
        return Err(OdeError::Validation(format!(
            "need u0 > 0, 0 < R0 < r_max, n ≥ 5; got {u0}, {r0}, {r_max}, {n}"
        )));
    }
    lam.validate(u0)?;
    let grid = uniform_grid(r0, r_max, n);
    let mut hi = 0.0;
    let mut hi_traj = shoot(m, lam, &grid, u0, hi)?;
    if !matches!(hi_traj.outcome, Outcome::Overshoot(_)) {
        return Err(OdeError::ShootingFailure(
            "zero initial slope does not turn back up".into(),
        ));
    }
    let mut lo = -u0;
    let mut lo_traj = shoot(m, lam, &grid, u0, lo)?;
    let mut tries = 0;
    while !matches!(lo_traj.outcome, Outcome::Undershoot(_)) {
        tries += 1;
        if tries > 60 {
            // no slope reaches zero: every decreasing solution stays positive
            let inf_u = lo_traj
                .values
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min)
                .min(lo_traj.last[0]);
            let mut profile = RadialProfile::new(
                grid[..lo_traj.values.len()].to_vec(),
                lo_traj.values,
                lo_traj.ders,
                "steepest probed slope",
            );
            profile.converged = false;
            return Ok(SemilinearResult {
                profile,
                support: SupportReport::BoundedAway { inf_u },
                slope: lo,
                separation_trace: vec![],
            });
        }
        if matches!(lo_traj.outcome, Outcome::Overshoot(_)) {
            hi = lo;
            hi_traj = lo_traj;
        }
        lo *= 2.0;
        lo_traj = shoot(m, lam, &grid, u0, lo)?;
    }
    let mut trace = Vec::new();
    let mut coarse_sep = None;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let traj = shoot(m, lam, &grid, u0, mid)?;
        match traj.outcome {
            Outcome::Undershoot(_) => {
                lo = mid;
                lo_traj = traj;
            }
            Outcome::Overshoot(_) => {
                hi = mid;
                hi_traj = traj;
            }
            Outcome::Neither => {
                // tracks the separatrix all the way out
                lo = mid;
                lo_traj = traj;
                break;
            }
        }
        let width = (hi - lo) / lo.abs().max(f64::MIN_POSITIVE);
        let sep = event_radius(lo_traj.outcome).min(event_radius(hi_traj.outcome));
        trace.push((width, sep));
        if coarse_sep.is_none() && width <= COARSE_WIDTH {
            coarse_sep = Some(sep);
        }
    }
    let fine_sep = event_radius(lo_traj.outcome).min(event_radius(hi_traj.outcome));
    let kept = lo_traj.values.len();
    let mut values = lo_traj.values;
    let mut ders = lo_traj.ders;
    let support = if fine_sep.is_infinite() {
        let end = values.last().copied().unwrap_or(u0);
        if end < 1e-6 * u0 {
            SupportReport::DecaysToZero
        } else {
            SupportReport::BoundedAway { inf_u: end }
        }
    } else if coarse_sep.is_some_and(|c| (fine_sep - c).abs() < SETTLE_TOL) {
        let r_dead = match lo_traj.outcome {
            Outcome::Undershoot(r) => r,
            _ => fine_sep,
        };
        // clamp: the semiclassical solution is identically zero past r_dead
        values.resize(n, 0.0);
        ders.resize(n, 0.0);
        SupportReport::CompactSupport { r_dead }
    } else {
        SupportReport::DecaysToZero
    };
    let (grid, values, ders) = match support {
        SupportReport::CompactSupport { .. } => (grid, values, ders),
        _ => (grid[..kept].to_vec(), values, ders),
    };
    let mut profile = RadialProfile::new(grid, values, ders, format!("u(R0)={u0} at R0={r0}; shooting on u'(R0)"));
    profile.non_increasing = Some(profile.is_non_increasing());
    Ok(SemilinearResult {
        profile,
        support,
        slope: lo,
        separation_trace: trace,
    })
}
