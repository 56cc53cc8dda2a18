//! `α(r) = ∫_0^r A(t)/a(t) dt`, the radial solution of `Δ_f α = 1` with
//! `α(0) = α'(0) = 0`.

use super::rk45::{Integrator, Tolerance};
use super::{uniform_grid, OdeError, RadialProfile};
use crate::manifold::ModelManifold;
use crate::quad::{integrate_log, log_add, QuadError, QuadOptions};

/// `α(r)` by quadrature of the ratio `ρ = A/a`.
pub fn alpha_function(m: &ModelManifold, r: f64) -> Result<f64, OdeError> {
    if r <= 0.0 {
        return Ok(0.0);
    }
    let opts = QuadOptions {
        rel_tol: 1e-10,
        abs_tol: 0.0,
        max_subdivisions: 2000,
    };
    let l = integrate_log(
        |t| m.log_forward_ratio(t).map_err(|e| QuadError::Integrand(e.to_string())),
        0.0,
        r,
        opts,
    )?;
    Ok(l.exp())
}

/// `u* - α(r) = ∫_r^∞ A/a`, summed by octaves until a geometric bound on the
/// rest falls below `1e-13` of the total. Fails on stochastically complete
/// models, where the integral diverges.
pub fn alpha_tail(m: &ModelManifold, r: f64) -> Result<f64, OdeError> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(OdeError::Validation(format!("need r > 0, got {r}")));
    }
    let opts = QuadOptions {
        rel_tol: 1e-11,
        abs_tol: 0.0,
        max_subdivisions: 2000,
    };
    let mut acc = f64::NEG_INFINITY;
    let mut prev = f64::NEG_INFINITY;
    let (mut lo, mut hi) = (r, 2.0 * r);
    for _ in 0..400 {
        let piece = integrate_log(
            |t| m.log_forward_ratio(t).map_err(|e| QuadError::Integrand(e.to_string())),
            lo,
            hi,
            opts,
        )?;
        acc = log_add(acc, piece);
        if prev > f64::NEG_INFINITY && piece < prev {
            let q = (piece - prev).exp();
            if q < 0.9 && piece + (q / (1.0 - q)).ln() < acc + (1e-13f64).ln() {
                return Ok(acc.exp());
            }
        }
        prev = piece;
        lo = hi;
        hi *= 2.0;
    }
    Err(OdeError::NoConvergence(format!(
        "∫_{r}^∞ A/a does not settle; the model looks stochastically complete"
    )))
}

/// `u* - α` on an increasing grid: the tail at the last node, then the
/// pieces `∫ ρ` between neighbouring nodes summed backwards.
pub fn alpha_tail_profile(m: &ModelManifold, grid: &[f64]) -> Result<Vec<f64>, OdeError> {
    if grid.is_empty() || grid[0] <= 0.0 || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(OdeError::Validation("need a positive increasing grid".into()));
    }
    let opts = QuadOptions {
        rel_tol: 1e-11,
        abs_tol: 0.0,
        max_subdivisions: 2000,
    };
    let n = grid.len();
    let mut out = vec![0.0; n];
    out[n - 1] = alpha_tail(m, grid[n - 1])?;
    for i in (0..n - 1).rev() {
        let piece = integrate_log(
            |t| m.log_forward_ratio(t).map_err(|e| QuadError::Integrand(e.to_string())),
            grid[i],
            grid[i + 1],
            opts,
        )?;
        out[i] = out[i + 1] + piece.exp();
    }
    Ok(out)
}

/// `α` and `α' = ρ` on `n` equispaced nodes of `[r_lo, r_hi]`, by marching
/// `α' = ρ, ρ' = 1 - bρ` from the quadrature values at `r_lo`.
pub fn alpha_profile(m: &ModelManifold, r_lo: f64, r_hi: f64, n: usize) -> Result<RadialProfile, OdeError> {
    if !(r_lo > 0.0 && r_hi > r_lo && n >= 2) {
        return Err(OdeError::Validation(format!(
            "need 0 < r_lo < r_hi and n ≥ 2, got ({r_lo}, {r_hi}, {n})"
        )));
    }
    let grid = uniform_grid(r_lo, r_hi, n);
    let mut y = [alpha_function(m, r_lo)?, m.log_forward_ratio(r_lo)?.exp()];
    let mut t = r_lo;
    let mut rhs = |r: f64, y: &[f64; 2]| -> Result<[f64; 2], OdeError> { Ok([y[1], 1.0 - m.drift(r)? * y[1]]) };
    let mut it = Integrator::new(Tolerance {
        atol: 1e-13,
        rtol: 1e-11,
    });
    let mut values = Vec::with_capacity(n);
    let mut ders = Vec::with_capacity(n);
    for &r in &grid {
        it.advance_to(&mut rhs, &mut t, &mut y, r)?;
        values.push(y[0]);
        ders.push(y[1]);
    }
    Ok(RadialProfile::new(
        grid,
        values,
        ders,
        "alpha(0)=0, alpha'(0)=0; Delta_f alpha = 1",
    ))
}
