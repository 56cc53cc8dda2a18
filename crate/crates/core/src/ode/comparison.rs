//! Comparison profiles: `g'' = K g` with `K = (k1² + k2²)/m`, and the Riccati
//! equation `ψ' + ψ² = k²` with `ψ ~ 1/r` at the origin.

use serde::Serialize;

use super::rk45::{Integrator, Step, Tolerance};
use super::{uniform_grid, OdeError, RadialProfile};
use crate::expr::RadialFunction;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonProfile {
    /// `g` and `g'`; entries are `inf` where `g` exceeds the floating range.
    pub profile: RadialProfile,
    pub log_g: Vec<f64>,
    /// `ψ = g'/g`.
    pub psi: Vec<f64>,
}

impl ComparisonProfile {
    /// Interpolated `ψ` (linear between nodes of the stored grid).
    pub fn psi_at(&self, r: f64) -> Option<f64> {
        let grid = &self.profile.grid;
        if r < grid[0] || r > *grid.last()? {
            return None;
        }
        let i = grid.partition_point(|&x| x <= r).clamp(1, grid.len() - 1) - 1;
        let s = (r - grid[i]) / (grid[i + 1] - grid[i]);
        Some(self.psi[i] + s * (self.psi[i + 1] - self.psi[i]))
    }
}

fn eval(k: &RadialFunction, r: f64) -> Result<f64, OdeError> {
    k.value(r).map_err(|e| OdeError::Rhs(e.to_string()))
}

const RESCALE_AT: f64 = 1e100;

/// Solve `g'' = ((k1² + k2²)/m) g`, `g(0) = 0`, `g'(0) = 1` on `n` nodes of
/// `(0, r_max]`. Growth beyond the floating range is absorbed into a running
/// log-scale so `ln g` and `ψ` stay exact.
pub fn comparison_g(
    k1: &RadialFunction,
    k2: &RadialFunction,
    m: usize,
    r_max: f64,
    n: usize,
) -> Result<ComparisonProfile, OdeError> {
    if !(r_max > 0.0 && n >= 2 && m >= 1) {
        return Err(OdeError::Validation(format!(
            "need r_max > 0, n ≥ 2, m ≥ 1; got {r_max}, {n}, {m}"
        )));
    }
    let mf = m as f64;
    let mut rhs = |r: f64, y: &[f64; 2]| -> Result<[f64; 2], OdeError> {
        let (a, b) = (eval(k1, r)?, eval(k2, r)?);
        Ok([y[1], (a * a + b * b) / mf * y[0]])
    };
    let grid = uniform_grid(r_max / n as f64, r_max, n);
    let mut it = Integrator::new(Tolerance {
        atol: 1e-14,
        rtol: 1e-12,
    });
    let (mut t, mut y) = (0.0, [0.0, 1.0]);
    let mut log_scale = 0.0;
    let (mut vals, mut ders, mut log_g, mut psi) = (vec![], vec![], vec![], vec![]);
    for &r in &grid {
        it.advance_to(&mut rhs, &mut t, &mut y, r)?;
        if y[0].abs() > RESCALE_AT {
            y[0] /= RESCALE_AT;
            y[1] /= RESCALE_AT;
            log_scale += RESCALE_AT.ln();
        }
        if !(y[0] > 0.0) {
            return Err(OdeError::Validation(format!("g lost positivity at r = {r}")));
        }
        let lg = y[0].ln() + log_scale;
        let scale = log_scale.exp();
        vals.push(y[0] * scale);
        ders.push(y[1] * scale);
        log_g.push(lg);
        psi.push(y[1] / y[0]);
    }
    let profile = RadialProfile::new(grid, vals, ders, format!("g(0)=0, g'(0)=1; g'' = ((k1^2+k2^2)/{m}) g"));
    Ok(ComparisonProfile { profile, log_g, psi })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossingReport {
    /// First radius with `ψ = k`; `None` when there is no crossing before `r_max`.
    pub r_o: Option<f64>,
    /// `ψ ≤ k(1 + 1e-6)` at every sample beyond `r_o`.
    pub psi_tail_ok: bool,
    /// `(r, ψ(r), k(r))` beyond `r_o` (or on the whole range without a crossing).
    pub samples: Vec<(f64, f64, f64)>,
    /// Smallest `k·(∫_0^r g^m)/g^m` over the last quarter of the samples.
    pub liminf_estimate: f64,
    /// `liminf_estimate ≥ 1/m - LIMINF_SLACK`.
    pub liminf_ok: bool,
    /// Crossing radii with the initial value `1/r ± 1`.
    pub perturbed_r_o: [Option<f64>; 2],
    pub stable_under_perturbation: bool,
    pub diagnostic: String,
}

pub const RICCATI_START: f64 = 1e-6;
pub const CROSSING_SLACK: f64 = 1e-8;
pub const TAIL_SLACK: f64 = 1e-6;
pub const LIMINF_SLACK: f64 = 1e-3;
pub const PERTURBATION_TOL: f64 = 1e-4;

fn riccati_tol() -> Tolerance {
    Tolerance {
        atol: 1e-14,
        rtol: 1e-12,
    }
}

/// March `(ψ, q)` where `q = (∫ g^m)/g^m`, i.e. `q' = 1 - mψq`.
fn riccati_rhs<'a>(k: &'a RadialFunction, mf: f64) -> impl FnMut(f64, &[f64; 2]) -> Result<[f64; 2], OdeError> + 'a {
    move |r, y| {
        let kv = eval(k, r)?;
        Ok([kv * kv - y[0] * y[0], 1.0 - mf * y[0] * y[1]])
    }
}

fn first_crossing(k: &RadialFunction, mf: f64, psi0: f64, r_max: f64) -> Result<Option<(f64, [f64; 2])>, OdeError> {
    let mut rhs = riccati_rhs(k, mf);
    let mut it = Integrator::new(riccati_tol());
    let (mut t, mut y) = (RICCATI_START, [psi0, RICCATI_START / (mf + 1.0)]);
    let mut bracket = None;
    let mut kerr = None;
    let stopped = it.advance(
        &mut rhs,
        &mut t,
        &mut y,
        r_max,
        &mut |t0, y0, t1, y1| match eval(k, t1) {
            Ok(kv) if y1[0] - kv <= -CROSSING_SLACK * kv.abs() => {
                bracket = Some((t0, *y0));
                Step::Stop
            }
            Ok(_) => Step::Continue,
            Err(e) => {
                kerr = Some(e);
                Step::Stop
            }
        },
    )?;
    if let Some(e) = kerr {
        return Err(e);
    }
    if !stopped {
        return Ok(None);
    }
    let (t0, y0) = bracket.expect("stop only on crossing");
    // bisection on ψ - k over the bracketing step, re-integrating from t0
    let state_at = |tau: f64| -> Result<[f64; 2], OdeError> {
        let mut rhs = riccati_rhs(k, mf);
        let mut it = Integrator::new(riccati_tol());
        let (mut s, mut z) = (t0, y0);
        it.advance_to(&mut rhs, &mut s, &mut z, tau)?;
        Ok(z)
    };
    let (mut lo, mut hi) = (t0, t);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let z = state_at(mid)?;
        if z[0] - eval(k, mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r_o = 0.5 * (lo + hi);
    Ok(Some((r_o, state_at(r_o)?)))
}

/// Locate the first `r_o` with `ψ(r_o) = k(r_o)` for `ψ' + ψ² = k²`,
/// `ψ(1e-6) = 1e6`, and audit the tail `ψ ≤ k` and `liminf k·q ≥ 1/m`.
pub fn riccati_crossing(k: &RadialFunction, m: usize, r_max: f64) -> Result<CrossingReport, OdeError> {
    let mf = m as f64;
    let probe = uniform_grid(RICCATI_START, r_max, 400);
    let kv: Vec<f64> = probe.iter().map(|&r| eval(k, r)).collect::<Result<_, _>>()?;
    if kv.windows(2).any(|w| w[1] < w[0] - 1e-12 * w[0].abs()) {
        return Err(OdeError::Validation("k must be non-decreasing".into()));
    }
    let psi0 = 1.0 / RICCATI_START;
    let main = first_crossing(k, mf, psi0, r_max)?;
    let plus = first_crossing(k, mf, psi0 + 1.0, r_max)?.map(|c| c.0);
    let minus = first_crossing(k, mf, psi0 - 1.0, r_max)?.map(|c| c.0);
    let (start, mut y) = match main {
        Some((r_o, y)) => (r_o, y),
        None => (RICCATI_START, [psi0, RICCATI_START / (mf + 1.0)]),
    };
    let mut rhs = riccati_rhs(k, mf);
    let mut it = Integrator::new(riccati_tol());
    let mut t = start;
    let mut samples = Vec::new();
    let mut kq = Vec::new();
    let mut tail_ok = true;
    for r in uniform_grid(start, r_max, 400).into_iter().skip(1) {
        let mut kerr = None;
        it.advance(&mut rhs, &mut t, &mut y, r, &mut |_, _, t1, y1| {
            match eval(k, t1) {
                Ok(kv) => {
                    if main.is_some() && y1[0] > kv * (1.0 + TAIL_SLACK) + f64::EPSILON {
                        tail_ok = false;
                    }
                }
                Err(e) => kerr = Some(e),
            }
            Step::Continue
        })?;
        if let Some(e) = kerr {
            return Err(e);
        }
        let kr = eval(k, r)?;
        samples.push((r, y[0], kr));
        kq.push(kr * y[1]);
    }
    let quarter = kq.len() - kq.len() / 4;
    let liminf = kq[quarter.min(kq.len() - 1)..]
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let stable = match (main, plus, minus) {
        (Some((r, _)), Some(p), Some(q)) => (p - r).abs() < PERTURBATION_TOL && (q - r).abs() < PERTURBATION_TOL,
        (None, None, None) => true,
        _ => false,
    };
    let diagnostic = match main {
        Some((r_o, _)) => format!("first crossing at r_o = {r_o:.10}"),
        None => format!("no crossing before r = {r_max}; psi stays above k"),
    };
    Ok(CrossingReport {
        r_o: main.map(|c| c.0),
        psi_tail_ok: main.is_some() && tail_ok,
        samples,
        liminf_estimate: liminf,
        liminf_ok: liminf >= 1.0 / mf - LIMINF_SLACK,
        perturbed_r_o: [plus, minus],
        stable_under_perturbation: stable,
        diagnostic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rf(s: &str) -> RadialFunction {
        s.parse().unwrap()
    }

    #[test]
    fn flat_and_constant_curvature_profiles() {
        let p = comparison_g(&rf("0"), &rf("0"), 3, 2.0, 200).unwrap();
        for (r, g) in p.profile.grid.iter().zip(&p.profile.values) {
            assert!((g - r).abs() < 1e-12);
        }
        // k1² + k2² = m
        let p = comparison_g(&rf("sqrt(2)"), &rf("1"), 3, 5.0, 100).unwrap();
        for (i, &r) in p.profile.grid.iter().enumerate() {
            assert!((p.profile.values[i] / r.sinh() - 1.0).abs() < 1e-9);
            assert!((p.psi[i] * r.tanh() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn taylor_series_oracle() {
        // g'' = (r²/2) g: (n+2)(n+1) c_{n+2} = c_{n-2}/2
        let mut c = vec![0.0; 60];
        c[1] = 1.0;
        for n in 2..58 {
            c[n + 2] = c[n - 2] / (2.0 * (n + 2) as f64 * (n + 1) as f64);
        }
        let want: f64 = c.iter().sum();
        let p = comparison_g(&rf("r"), &rf("0"), 2, 1.0, 50).unwrap();
        assert!((p.profile.values.last().unwrap() - want).abs() < 1e-8);
    }

    #[test]
    fn overflow_is_absorbed_in_log_scale() {
        let p = comparison_g(&rf("r"), &rf("0"), 1, 40.0, 400).unwrap();
        let last = *p.log_g.last().unwrap();
        assert!(last > 700.0 && last.is_finite());
        assert!(p.psi.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn crossing_for_growing_k() {
        let rep = riccati_crossing(&rf("1+r"), 2, 30.0).unwrap();
        let r_o = rep.r_o.expect("crossing");
        assert!(r_o > 0.0 && r_o < 30.0);
        assert!(
            rep.psi_tail_ok && rep.stable_under_perturbation && rep.liminf_ok,
            "{rep:?}"
        );
    }

    #[test]
    fn no_crossing_for_constant_k() {
        let rep = riccati_crossing(&rf("2"), 2, 30.0).unwrap();
        assert!(rep.r_o.is_none());
        let (r, psi, _) = rep.samples[10];
        assert!((psi - 2.0 / (2.0 * r).tanh()).abs() < 1e-8 * psi);
    }

    #[test]
    fn start_matches_one_over_r() {
        let k = rf("1+r");
        let mut rhs = riccati_rhs(&k, 2.0);
        let mut it = Integrator::new(riccati_tol());
        let (mut t, mut y) = (RICCATI_START, [1.0 / RICCATI_START, 0.0]);
        it.advance_to(&mut rhs, &mut t, &mut y, 1e-4).unwrap();
        assert!((y[0] - 1e4).abs() < 1e-3);
    }
}
