//! Weighted heat flow `∂_t u = Δ_f u` on radial data, truncated at `R` with
//! an absorbing wall.
//!
//! The unknown is the mass density `w = a·u` with respect to `dr`, which obeys
//! `w_t = (w' - b w)'`. A cell-centred finite-volume scheme with
//! Scharfetter–Gummel fluxes and backward Euler keeps `w ≥ 0` for any step
//! size and conserves `∑ w h` up to the outflow at `R`, so the mass defect is
//! exactly the leakage through the wall.

use serde::Serialize;

use super::OdeError;
use crate::manifold::ModelManifold;

pub const INNER_RADIUS: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MassCurve {
    pub times: Vec<f64>,
    pub mass: Vec<f64>,
    pub truncation_radius: f64,
    pub leakage_estimate: f64,
    pub n_space: usize,
    pub n_time: usize,
}

impl MassCurve {
    pub fn final_mass(&self) -> f64 {
        *self.mass.last().expect("mass curve is never empty")
    }

    pub fn defect(&self) -> f64 {
        1.0 - self.final_mass()
    }
}

/// Bernoulli function `x / (e^x - 1)`.
fn bernoulli(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - 0.5 * x
    } else if x > 0.0 {
        x * (-x).exp() / -(-x).exp_m1()
    } else {
        x / x.exp_m1()
    }
}

/// Thomas algorithm for `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]`.
fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64], scratch: &mut [f64]) {
    let n = diag.len();
    scratch[0] = upper[0] / diag[0];
    rhs[0] /= diag[0];
    for i in 1..n {
        let denom = diag[i] - lower[i] * scratch[i - 1];
        scratch[i] = if i + 1 < n { upper[i] / denom } else { 0.0 };
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= scratch[i] * rhs[i + 1];
    }
}

/// Mass `∫ u a dr` (normalised to 1 at `t = 0`) on `[INNER_RADIUS, r_trunc]`
/// for a bump of width `r_trunc/200` centred at `r_init`.
pub fn heat_mass(
    m: &ModelManifold,
    r_init: f64,
    t_final: f64,
    r_trunc: f64,
    n_space: usize,
    n_time: usize,
) -> Result<MassCurve, OdeError> {
    if !(INNER_RADIUS < r_init && r_init < r_trunc && t_final >= 0.0 && n_space >= 10) {
        return Err(OdeError::Validation(format!(
            "need {INNER_RADIUS} < r_init < R_trunc, T ≥ 0, n_space ≥ 10; got r_init={r_init}, R={r_trunc}, T={t_final}, n={n_space}"
        )));
    }
    let n = n_space;
    let h = (r_trunc - INNER_RADIUS) / n as f64;
    let centre = |i: usize| INNER_RADIUS + (i as f64 + 0.5) * h;
    let width = r_trunc / 200.0;
    let l_init = m.log_area_density(r_init)?;
    let mut w = Vec::with_capacity(n);
    for i in 0..n {
        let x = centre(i);
        let z = (x - r_init) / width;
        let bump = if z.abs() < 8.0 { (-z * z).exp() } else { 0.0 };
        let val = if bump > 0.0 {
            bump * (m.log_area_density(x)? - l_init).exp()
        } else {
            0.0
        };
        w.push(val);
    }
    let total: f64 = w.iter().sum::<f64>() * h;
    if !(total > 0.0 && total.is_finite()) {
        return Err(OdeError::Validation(
            "initial bump has no resolvable mass; refine n_space".into(),
        ));
    }
    for v in &mut w {
        *v /= total;
    }
    if t_final == 0.0 || n_time == 0 {
        return Ok(MassCurve {
            times: vec![0.0],
            mass: vec![1.0],
            truncation_radius: r_trunc,
            leakage_estimate: 0.0,
            n_space,
            n_time: 0,
        });
    }
    // interface fluxes F_{i+1/2} = alpha_i w_i - beta_i w_{i+1}
    let mut alpha = vec![0.0; n];
    let mut beta = vec![0.0; n];
    for i in 0..n - 1 {
        let b = m.drift(INNER_RADIUS + (i + 1) as f64 * h)?;
        alpha[i] = bernoulli(-b * h) / h;
        beta[i] = bernoulli(b * h) / h;
    }
    let b_out = m.drift(r_trunc)?;
    alpha[n - 1] = 2.0 * bernoulli(-b_out * h / 2.0) / h;
    let dt = t_final / n_time as f64;
    let mut lower = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n];
    for i in 0..n {
        diag[i] = h / dt + alpha[i] + if i > 0 { beta[i - 1] } else { 0.0 };
        if i > 0 {
            lower[i] = -alpha[i - 1];
        }
        if i + 1 < n {
            upper[i] = -beta[i];
        }
    }
    let mut scratch = vec![0.0; n];
    let mut times = vec![0.0];
    let mut mass = vec![1.0];
    let mut leaked = 0.0;
    for step in 1..=n_time {
        for v in &mut w {
            *v *= h / dt;
        }
        solve_tridiagonal(&lower, &diag, &upper, &mut w, &mut scratch);
        if w.iter().any(|v| !v.is_finite()) {
            return Err(OdeError::NonFinite { t: step as f64 * dt });
        }
        leaked += dt * alpha[n - 1] * w[n - 1];
        times.push(step as f64 * dt);
        let mt: f64 = w.iter().sum::<f64>() * h;
        // never report a rounding-level uptick
        mass.push(mt.min(*mass.last().expect("non-empty")));
    }
    Ok(MassCurve {
        times,
        mass,
        truncation_radius: r_trunc,
        leakage_estimate: leaked,
        n_space,
        n_time,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeatDoubling {
    /// `(R_trunc, defect)` per stage.
    pub stages: Vec<(f64, f64)>,
    pub stabilized: bool,
    pub curve: MassCurve,
    /// `|defect(R) - defect(R/2)|` of the last two stages.
    pub last_change: f64,
}

/// Double `R_trunc` (keeping the cell size) until the final defect changes by
/// less than `tol`.
pub fn heat_mass_doubling(
    m: &ModelManifold,
    r_init: f64,
    t_final: f64,
    r_start: f64,
    cells_per_unit: f64,
    n_time: usize,
    tol: f64,
    max_doublings: usize,
) -> Result<HeatDoubling, OdeError> {
    let mut stages = Vec::new();
    let mut r = r_start;
    let mut prev: Option<f64> = None;
    let mut last = None;
    for _ in 0..=max_doublings {
        let n_space = ((r * cells_per_unit).ceil() as usize).max(10);
        let curve = heat_mass(m, r_init, t_final, r, n_space, n_time)?;
        let d = curve.defect();
        stages.push((r, d));
        if let Some(p) = prev {
            if (d - p).abs() < tol {
                return Ok(HeatDoubling {
                    stages,
                    stabilized: true,
                    curve,
                    last_change: (d - p).abs(),
                });
            }
        }
        prev = Some(d);
        last = Some(curve);
        r *= 2.0;
    }
    let n = stages.len();
    let change = if n >= 2 {
        (stages[n - 1].1 - stages[n - 2].1).abs()
    } else {
        f64::NAN
    };
    Ok(HeatDoubling {
        stages,
        stabilized: false,
        curve: last.expect("at least one stage"),
        last_change: change,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::preset_manifold;

    #[test]
    fn bernoulli_limits() {
        assert!((bernoulli(0.0) - 1.0).abs() < 1e-15);
        assert!((bernoulli(1e-3) - 1e-3 / (1e-3f64).exp_m1()).abs() < 1e-14);
        assert!(bernoulli(800.0) >= 0.0 && bernoulli(800.0) < 1e-300);
        assert!((bernoulli(-800.0) - 800.0).abs() < 1e-9);
    }

    #[test]
    fn euclidean_mass_is_conserved() {
        let e3 = preset_manifold("euclidean-3").unwrap();
        let c = heat_mass(&e3, 1.0, 1.0, 30.0, 4000, 400).unwrap();
        assert!((c.mass[0] - 1.0).abs() < 1e-12);
        assert!(c.final_mass() >= 0.999, "{}", c.final_mass());
        assert!(c.mass.windows(2).all(|w| w[1] <= w[0]));
        assert!((c.leakage_estimate - c.defect()).abs() < 1e-9);
    }

    #[test]
    fn zero_time_is_trivial() {
        let e3 = preset_manifold("euclidean-3").unwrap();
        let c = heat_mass(&e3, 1.0, 0.0, 30.0, 4000, 10).unwrap();
        assert_eq!(c.mass, vec![1.0]);
    }

    #[test]
    fn explosive_model_loses_mass() {
        let grow = preset_manifold("exp-growth-2").unwrap();
        let d = heat_mass_doubling(&grow, 1.0, 1.0, 4.0, 500.0, 400, 2e-3, 4).unwrap();
        assert!(d.stabilized, "{:?}", d.stages);
        assert!(d.curve.final_mass() < 0.9, "{:?}", d.stages);
    }
}
