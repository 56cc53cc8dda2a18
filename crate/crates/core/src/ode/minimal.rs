//! Minimal positive solution of `Δ_f h = λ h` outside `B_{R0}` with
//! `h(R0) = 1`, built by exhaustion with two-point problems on `[R0, R_k]`
//! and outer value 0.
//!
//! Each two-point problem is linear, so it is solved by a single inward
//! integration from `(h, h')(R_k) = (0, -1)` followed by normalisation at
//! `R0`. Inward is the stable direction for both the decaying and the
//! growing mode, and overflow is handled by rescaling on the fly.

use super::rk45::{Integrator, Tolerance};
use super::{uniform_grid, ExhaustionStep, OdeError, RadialProfile};
use crate::manifold::ModelManifold;

#[derive(Debug, Clone, Copy)]
pub struct MinimalOptions {
    pub n_grid: usize,
    pub tol: f64,
    pub max_doublings: usize,
}

impl Default for MinimalOptions {
    fn default() -> Self {
        Self {
            n_grid: 2001,
            tol: 1e-8,
            max_doublings: 40,
        }
    }
}

const RESCALE_AT: f64 = 1e150;

/// Two-point solution on `[r0, outer]` with `h(r0) = 1`, `h(outer) = 0`,
/// sampled on `grid ⊂ [r0, outer]`.
pub fn two_point_solution(
    m: &ModelManifold,
    lambda: f64,
    grid: &[f64],
    outer: f64,
) -> Result<(Vec<f64>, Vec<f64>), OdeError> {
    let n = grid.len();
    let mut rhs =
        |r: f64, y: &[f64; 2]| -> Result<[f64; 2], OdeError> { Ok([y[1], lambda * y[0] - m.drift(r)? * y[1]]) };
    let mut it = Integrator::new(Tolerance {
        atol: 1e-300,
        rtol: 1e-11,
    });
    let (mut t, mut y) = (outer, [0.0, -1.0]);
    let mut vals = vec![0.0; n];
    let mut ders = vec![0.0; n];
    // the stretch beyond the last node is crossed in chunks short enough that
    // the fastest mode grows by at most ~e^100 per chunk
    while t > grid[n - 1] {
        let rate = m.drift(t)?.abs() + lambda.sqrt() + 1.0 / t;
        let target = (t - 100.0 / rate).max(grid[n - 1]);
        it.advance_to(&mut rhs, &mut t, &mut y, target)?;
        let big = y[0].abs().max(y[1].abs());
        if big > RESCALE_AT {
            y[0] /= big;
            y[1] /= big;
        }
    }
    for i in (0..n).rev() {
        it.advance_to(&mut rhs, &mut t, &mut y, grid[i])?;
        // rescaling between output nodes keeps the local error control intact
        if y[0].abs().max(y[1].abs()) > RESCALE_AT {
            let s = 1.0 / RESCALE_AT;
            y[0] *= s;
            y[1] *= s;
            for j in i + 1..n {
                vals[j] *= s;
                ders[j] *= s;
            }
        }
        vals[i] = y[0];
        ders[i] = y[1];
        if !y[0].is_finite() {
            return Err(OdeError::NonFinite { t });
        }
    }
    let h0 = vals[0];
    if !(h0 > 0.0) {
        return Err(OdeError::NonFinite { t: grid[0] });
    }
    for v in vals.iter_mut().chain(ders.iter_mut()) {
        *v /= h0;
    }
    Ok((vals, ders))
}

/// Minimal solution on `[r0, r_eval_max]`. The first outer radius is
/// `2·r_eval_max`; it doubles until the sup-norm change drops below
/// `opts.tol`. On failure after `max_doublings` the error carries the
/// history.
pub fn minimal_exterior_solution(
    m: &ModelManifold,
    lambda: f64,
    r0: f64,
    r_eval_max: f64,
    opts: MinimalOptions,
) -> Result<RadialProfile, OdeError> {
    if !(lambda > 0.0 && r0 > 0.0 && r_eval_max > r0) {
        return Err(OdeError::Validation(format!(
            "need λ > 0 and 0 < R0 < r_eval_max, got λ={lambda}, R0={r0}, r_eval_max={r_eval_max}"
        )));
    }
    let grid = uniform_grid(r0, r_eval_max, opts.n_grid);
    let mut history = Vec::new();
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut outer = 2.0 * r_eval_max;
    for _ in 0..=opts.max_doublings {
        let (vals, ders) = two_point_solution(m, lambda, &grid, outer)?;
        let change = prev
            .as_ref()
            .map(|(pv, _)| vals.iter().zip(pv).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        history.push(ExhaustionStep {
            outer_radius: outer,
            change,
        });
        if let Some(c) = change {
            if c < opts.tol {
                let mut p = RadialProfile::new(
                    grid,
                    vals,
                    ders,
                    format!("h(R0)=1 at R0={r0}; exhaustion with h(R_k)=0, final R_k={outer}"),
                );
                p.history = history;
                p.converged = true;
                p.non_increasing = Some(p.is_non_increasing());
                return Ok(p);
            }
        }
        prev = Some((vals, ders));
        outer *= 2.0;
    }
    let trend: Vec<String> = history
        .iter()
        .map(|h| format!("R_k={:.3e}: {:?}", h.outer_radius, h.change))
        .collect();
    Err(OdeError::NoConvergence(trend.join("; ")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::preset_manifold;

    #[test]
    fn euclidean_yukawa_solution() {
        let e3 = preset_manifold("euclidean-3").unwrap();
        let h = minimal_exterior_solution(&e3, 1.0, 1.0, 10.0, MinimalOptions::default()).unwrap();
        assert_eq!(h.values[0], 1.0);
        let want = (-1f64).exp() / 2.0;
        assert!((h.eval(2.0).unwrap() - want).abs() < 1e-8, "{}", h.eval(2.0).unwrap());
        assert_eq!(h.non_increasing, Some(true));
        let res = h.residual(|r, u, du| u - e3.drift(r).unwrap() * du);
        assert!(res < 1e-6, "{res}");
    }

    #[test]
    fn non_feller_model_keeps_h_away_from_zero() {
        let m = preset_manifold("exp-alpha-2-3").unwrap();
        let h = minimal_exterior_solution(&m, 1.0, 1.0, 20.0, MinimalOptions::default()).unwrap();
        assert!(h.values.iter().all(|&v| v > 0.1 && v <= 1.0));
        assert_eq!(h.non_increasing, Some(true));
    }

    #[test]
    fn exhaustion_increases_with_outer_radius() {
        let h2 = preset_manifold("hyperbolic-2").unwrap();
        let grid = uniform_grid(1.0, 5.0, 201);
        let (a, _) = two_point_solution(&h2, 0.5, &grid, 6.0).unwrap();
        let (b, _) = two_point_solution(&h2, 0.5, &grid, 12.0).unwrap();
        assert!(a.iter().zip(&b).all(|(x, y)| *x <= *y + 1e-14));
    }
}
