//! Monte Carlo simulation of the radial diffusion generated by `Δ_f`.
//!
//! The radial part solves `dX = b(X) dt + √2 dW` with `b = Δ_f r`. Paths are
//! advanced by Euler–Maruyama with a step that shrinks where the drift is
//! large, reflect at a small inner radius, and are absorbed at barriers with
//! a Brownian-bridge crossing test between steps. Every path draws from its
//! own ChaCha8 stream, so a report depends only on the configuration and not
//! on how paths are scheduled.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::manifold::{ManifoldError, ModelManifold};

/// Steps below this size are treated as a runaway drift.
pub const MIN_STEP: f64 = 1e-12;
/// Share of the paths rerun at half the step size.
pub const HALVING_SHARE: f64 = 0.1;
const HALF_STEP_STREAMS: u64 = 1 << 62;

#[derive(Debug, Error)]
pub enum McError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("step size fell below {MIN_STEP} at r = {r}, t = {t} on path {path}: the drift runs away, which points to explosion")]
    StepUnderflow { path: u64, r: f64, t: f64 },
    #[error(transparent)]
    Manifold(#[from] ManifoldError),
    #[error("trace output: {0}")]
    Trace(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    pub n_paths: usize,
    pub t_max: f64,
    pub dt_base: f64,
    pub r_absorb_outer: f64,
    pub r_reflect_inner: f64,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_paths: 2000,
            t_max: 1.0,
            dt_base: 1e-3,
            r_absorb_outer: 50.0,
            r_reflect_inner: 1e-4,
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), McError> {
        if self.n_paths < 100 {
            return Err(McError::Validation(format!(
                "n_paths must be at least 100, got {}",
                self.n_paths
            )));
        }
        if !(self.dt_base > 0.0 && self.dt_base <= 1e-3) {
            return Err(McError::Validation(format!(
                "dt_base must lie in (0, 1e-3], got {}",
                self.dt_base
            )));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(McError::Validation(format!(
                "t_max must be positive, got {}",
                self.t_max
            )));
        }
        if !(self.r_reflect_inner > 0.0
            && self.r_absorb_outer > self.r_reflect_inner
            && self.r_absorb_outer.is_finite())
        {
            return Err(McError::Validation(format!(
                "need 0 < r_reflect_inner < r_absorb_outer < ∞, got {} and {}",
                self.r_reflect_inner, self.r_absorb_outer
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HittingEstimate {
    pub r_start: f64,
    pub lambda: f64,
    /// Estimate of `E[e^{-λτ}]`, with `τ` the hitting time of the inner sphere.
    pub estimate: f64,
    pub ci95_halfwidth: f64,
    /// Upper bound on what paths that never reached the sphere could still add.
    pub remainder_bound: f64,
}

/// The same statistic on the first share of the paths, at `dt` and at `dt/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HalvingCheck {
    pub paths: usize,
    pub estimate: f64,
    pub estimate_half_dt: f64,
    pub discrepancy: f64,
    pub ci95_halfwidth: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    /// Share of paths absorbed at the outer radius before `t_max`.
    pub explosion_fraction: f64,
    pub ci95_halfwidth: f64,
    pub hitting_estimates: Vec<HittingEstimate>,
    pub n_effective: usize,
    pub halving: HalvingCheck,
    pub mean_steps: f64,
    pub config: SimConfig,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Exit {
    Outer(f64),
    Inner(f64),
    Survived,
}

#[derive(Debug, Clone, Copy)]
struct PathRun {
    exit: Exit,
    steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub path: u64,
    pub t: f64,
    pub r: f64,
}

/// `min(dt_base, 0.1·max(1, r)²/(b² + 1))`: the drift moves a path by at most
/// a small fraction of `max(1, r)` per step.
fn step_size(dt_base: f64, r: f64, b: f64) -> f64 {
    let scale = r.max(1.0);
    dt_base.min(0.1 * scale * scale / (b * b + 1.0))
}

/// Probability that a Brownian bridge with variance `2 dt` between `x0` and
/// `x1`, both on the same side of `barrier`, touched it.
fn bridge_crossing(x0: f64, x1: f64, barrier: f64, dt: f64) -> f64 {
    (-(x0 - barrier) * (x1 - barrier) / dt).exp()
}

fn run_path(
    m: &ModelManifold,
    r0: f64,
    r_target: Option<f64>,
    cfg: &SimConfig,
    stream: u64,
    dt_scale: f64,
    mut trace: Option<&mut Vec<TraceRow>>,
) -> Result<PathRun, McError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(stream);
    let outer = cfg.r_absorb_outer;
    let inner = cfg.r_reflect_inner;
    let (mut x, mut t) = (r0, 0.0);
    let mut steps = 0;
    if let Some(rows) = trace.as_deref_mut() {
        rows.push(TraceRow { path: stream, t, r: x });
    }
    if r_target.is_some_and(|target| x <= target) {
        return Ok(PathRun {
            exit: Exit::Inner(0.0),
            steps,
        });
    }
    while t < cfg.t_max {
        let b = m.drift(x)?;
        let dt_full = step_size(cfg.dt_base, x, b) * dt_scale;
        if !(dt_full >= MIN_STEP) {
            return Err(McError::StepUnderflow { path: stream, r: x, t });
        }
        let dt = dt_full.min(cfg.t_max - t);
        let z: f64 = rng.sample(StandardNormal);
        let u: f64 = rng.random();
        let mut next = x + b * dt + (2.0 * dt).sqrt() * z;
        t += dt;
        steps += 1;
        if next >= outer || u < bridge_crossing(x, next, outer, dt) {
            return Ok(PathRun {
                exit: Exit::Outer(t),
                steps,
            });
        }
        if let Some(target) = r_target {
            if next <= target || u < bridge_crossing(x, next, target, dt) {
                return Ok(PathRun {
                    exit: Exit::Inner(t),
                    steps,
                });
            }
        }
        if next < inner {
            next = (2.0 * inner - next).max(inner);
        }
        x = next;
        if let Some(rows) = trace.as_deref_mut() {
            rows.push(TraceRow { path: stream, t, r: x });
        }
    }
    Ok(PathRun {
        exit: Exit::Survived,
        steps,
    })
}

fn run_batch(
    m: &ModelManifold,
    r0: f64,
    r_target: Option<f64>,
    cfg: &SimConfig,
    streams: std::ops::Range<u64>,
    stream_offset: u64,
    dt_scale: f64,
) -> Result<Vec<PathRun>, McError> {
    // collected in path order, so every later reduction is schedule independent
    streams
        .into_par_iter()
        .map(|i| run_path(m, r0, r_target, cfg, i + stream_offset, dt_scale, None))
        .collect()
}

/// `(mean, 1.96·sample_std/√n)`.
fn mean_ci(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, 1.96 * var.sqrt() / n.sqrt())
}

fn halving_check(
    m: &ModelManifold,
    r0: f64,
    r_target: Option<f64>,
    cfg: &SimConfig,
    coarse: &[PathRun],
    score: &dyn Fn(&PathRun) -> f64,
) -> Result<HalvingCheck, McError> {
    let paths = ((cfg.n_paths as f64 * HALVING_SHARE).ceil() as usize).max(2);
    let fine = run_batch(m, r0, r_target, cfg, 0..paths as u64, HALF_STEP_STREAMS, 0.5)?;
    let a: Vec<f64> = coarse[..paths].iter().map(score).collect();
    let b: Vec<f64> = fine.iter().map(score).collect();
    let ((ea, ca), (eb, cb)) = (mean_ci(&a), mean_ci(&b));
    let discrepancy = (ea - eb).abs();
    let ci = ca.hypot(cb);
    Ok(HalvingCheck {
        paths,
        estimate: ea,
        estimate_half_dt: eb,
        discrepancy,
        ci95_halfwidth: ci,
        ok: discrepancy <= ci,
    })
}

fn mean_steps(runs: &[PathRun]) -> f64 {
    runs.iter().map(|p| p.steps as f64).sum::<f64>() / runs.len() as f64
}

/// Share of paths started at `r0` that reach `r_absorb_outer` before `t_max`,
/// a proxy for `1 - ∫ p_f(t_max, x, y) dy`.
pub fn simulate_explosion(m: &ModelManifold, r0: f64, cfg: &SimConfig) -> Result<SimReport, McError> {
    cfg.validate()?;
    if !(r0 > 0.0 && r0 < cfg.r_absorb_outer) {
        return Err(McError::Validation(format!(
            "need 0 < r0 < {}, got {r0}",
            cfg.r_absorb_outer
        )));
    }
    let runs = run_batch(m, r0, None, cfg, 0..cfg.n_paths as u64, 0, 1.0)?;
    let exploded = |p: &PathRun| if matches!(p.exit, Exit::Outer(_)) { 1.0 } else { 0.0 };
    let scores: Vec<f64> = runs.iter().map(exploded).collect();
    let (fraction, ci) = mean_ci(&scores);
    let halving = halving_check(m, r0, None, cfg, &runs, &exploded)?;
    Ok(SimReport {
        explosion_fraction: fraction,
        ci95_halfwidth: ci,
        hitting_estimates: Vec::new(),
        n_effective: runs.len(),
        halving,
        mean_steps: mean_steps(&runs),
        config: *cfg,
    })
}

/// `E_{r0}[e^{-λτ}]` for the hitting time `τ` of the sphere of radius `r_hit`.
/// Paths that reach the outer radius or survive to `t_max` score 0; their
/// largest possible contribution is reported as `remainder_bound`.
pub fn hitting_laplace(
    m: &ModelManifold,
    r0: f64,
    r_hit: f64,
    lambda: f64,
    cfg: &SimConfig,
) -> Result<SimReport, McError> {
    cfg.validate()?;
    if !(r_hit > 0.0 && r0 >= r_hit && r0 < cfg.r_absorb_outer && lambda > 0.0) {
        return Err(McError::Validation(format!(
            "need 0 < R0 ≤ r0 < {} and λ > 0, got R0 = {r_hit}, r0 = {r0}, λ = {lambda}",
            cfg.r_absorb_outer
        )));
    }
    let runs = run_batch(m, r0, Some(r_hit), cfg, 0..cfg.n_paths as u64, 0, 1.0)?;
    let score = move |p: &PathRun| match p.exit {
        Exit::Inner(t) => (-lambda * t).exp(),
        _ => 0.0,
    };
    let scores: Vec<f64> = runs.iter().map(score).collect();
    let (estimate, ci) = mean_ci(&scores);
    let remainder = runs
        .iter()
        .map(|p| match p.exit {
            Exit::Outer(t) => (-lambda * t).exp(),
            Exit::Survived => (-lambda * cfg.t_max).exp(),
            Exit::Inner(_) => 0.0,
        })
        .sum::<f64>()
        / runs.len() as f64;
    let escaped: Vec<f64> = runs
        .iter()
        .map(|p| if matches!(p.exit, Exit::Outer(_)) { 1.0 } else { 0.0 })
        .collect();
    let (fraction, fraction_ci) = mean_ci(&escaped);
    let halving = halving_check(m, r0, Some(r_hit), cfg, &runs, &score)?;
    Ok(SimReport {
        explosion_fraction: fraction,
        ci95_halfwidth: fraction_ci,
        hitting_estimates: vec![HittingEstimate {
            r_start: r0,
            lambda,
            estimate,
            ci95_halfwidth: ci,
            remainder_bound: remainder,
        }],
        n_effective: runs.len(),
        halving,
        mean_steps: mean_steps(&runs),
        config: *cfg,
    })
}

/// Full trajectories of the first `n_traces` paths of [`simulate_explosion`]
/// (or of [`hitting_laplace`] when `r_hit` is given).
pub fn trace_paths(
    m: &ModelManifold,
    r0: f64,
    r_hit: Option<f64>,
    cfg: &SimConfig,
    n_traces: usize,
) -> Result<Vec<TraceRow>, McError> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for i in 0..n_traces as u64 {
        run_path(m, r0, r_hit, cfg, i, 1.0, Some(&mut rows))?;
    }
    Ok(rows)
}

pub fn write_trace_csv<W: Write>(rows: &[TraceRow], w: W) -> Result<(), McError> {
    let mut out = csv::Writer::from_writer(w);
    for row in rows {
        out.serialize(row).map_err(|e| McError::Trace(e.to_string()))?;
    }
    out.flush().map_err(|e| McError::Trace(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::preset_manifold;

    fn cfg(n: usize) -> SimConfig {
        SimConfig {
            n_paths: n,
            ..SimConfig::default()
        }
    }

    #[test]
    fn config_validation() {
        assert!(cfg(99).validate().is_err());
        assert!(SimConfig {
            dt_base: 2e-3,
            ..cfg(100)
        }
        .validate()
        .is_err());
        assert!(SimConfig {
            r_absorb_outer: 1e-5,
            ..cfg(100)
        }
        .validate()
        .is_err());
        assert!(cfg(100).validate().is_ok());
    }

    #[test]
    fn step_rule() {
        assert_eq!(step_size(1e-3, 0.5, 0.0), 1e-3);
        assert!((step_size(1e-3, 0.5, 100.0) - 0.1 / 10001.0).abs() < 1e-18);
        assert!((step_size(1e-3, 10.0, 300.0) - 10.0 / 90001.0).abs() < 1e-15);
    }

    #[test]
    fn bridge_probability() {
        assert!((bridge_crossing(1.0, 1.0, 1.0, 1e-3) - 1.0).abs() < 1e-15);
        assert!(bridge_crossing(0.0, 0.0, 1.0, 1e-3) < 1e-300);
        assert!((bridge_crossing(0.9, 0.95, 1.0, 0.01) - (-0.5f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn mean_and_interval() {
        let (m, ci) = mean_ci(&[0.0, 1.0, 0.0, 1.0]);
        assert_eq!(m, 0.5);
        assert!((ci - 1.96 * (1.0f64 / 3.0).sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn start_on_the_sphere_scores_one() {
        let m = preset_manifold("euclidean-3").unwrap();
        let rep = hitting_laplace(&m, 1.0, 1.0, 1.0, &cfg(100)).unwrap();
        assert_eq!(rep.hitting_estimates[0].estimate, 1.0);
        assert_eq!(rep.hitting_estimates[0].ci95_halfwidth, 0.0);
    }

    #[test]
    fn flat_space_does_not_explode() {
        let m = preset_manifold("euclidean-3").unwrap();
        let rep = simulate_explosion(&m, 1.0, &cfg(500)).unwrap();
        assert!(rep.explosion_fraction < 0.005);
        assert!(rep.halving.ok);
    }

    #[test]
    fn traces_start_at_r0_and_write_csv() {
        let m = preset_manifold("euclidean-3").unwrap();
        let rows = trace_paths(
            &m,
            1.0,
            None,
            &SimConfig {
                t_max: 0.01,
                ..cfg(100)
            },
            2,
        )
        .unwrap();
        assert_eq!(
            rows[0],
            TraceRow {
                path: 0,
                t: 0.0,
                r: 1.0
            }
        );
        assert!(rows.iter().any(|r| r.path == 1));
        let mut buf = Vec::new();
        write_trace_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("path,t,r\n0,0.0,1.0\n"));
    }
}
