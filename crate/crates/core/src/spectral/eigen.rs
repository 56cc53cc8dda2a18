//! First Dirichlet eigenvalues on intervals, balls and exteriors.
//!
//! Shooting uses the scaled Prüfer angle `θ = atan2(u, u'/k)`, `k = √λ`:
//!
//! `θ' = k cos²θ + b sinθ cosθ + (λ/k) sin²θ`
//!
//! which never sees the density itself, so drifts like `-3r²` cost nothing
//! beyond a stiffer angle equation. `λ` is the first eigenvalue exactly when
//! `θ(r_hi) = π`.

use rayon::prelude::*;
use serde::Serialize;

use super::{RadialOperator, SpectralError};
use crate::manifold::ModelManifold;
use crate::ode::{Integrator, OdeError, Step, Tolerance};
use crate::value::Extended;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    PrueferShooting,
    FiniteDifference,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeshMeta {
    pub r_lo: f64,
    pub r_hi: f64,
    /// RK45 steps of the last shot, or cells of the finer mesh.
    pub nodes: usize,
    pub description: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossCheck {
    pub lambda1: f64,
    pub difference: f64,
    pub tolerance: f64,
    pub agrees: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExteriorStep {
    pub outer_radius: f64,
    pub lambda1: f64,
    pub change: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenResult {
    pub lambda1: f64,
    pub method: Method,
    pub mesh_meta: MeshMeta,
    /// Relative width of the final eigenvalue bracket.
    pub residual: f64,
    pub cross_check: Option<CrossCheck>,
    /// Outer radii of the annuli for exterior problems.
    pub history: Vec<ExteriorStep>,
}

/// Simply connected spaceform of curvature `kappa` and dimension `dim`,
/// `g = sn_κ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Spaceform {
    pub kappa: f64,
    pub dim: usize,
}

impl Spaceform {
    /// Largest admissible ball radius: `π/√κ` for `κ > 0`.
    pub fn max_radius(&self) -> f64 {
        if self.kappa > 0.0 {
            std::f64::consts::PI / self.kappa.sqrt()
        } else {
            f64::INFINITY
        }
    }

    fn check(&self, r: f64) -> Result<(), SpectralError> {
        if r > 0.0 && r < self.max_radius() {
            Ok(())
        } else {
            Err(SpectralError::Domain(format!(
                "r = {r} outside (0, {}) in the spaceform of curvature {}",
                self.max_radius(),
                self.kappa
            )))
        }
    }
}

impl RadialOperator for Spaceform {
    fn drift(&self, r: f64) -> Result<f64, SpectralError> {
        self.check(r)?;
        let n1 = self.dim as f64 - 1.0;
        let s = self.kappa.abs().sqrt();
        Ok(if self.kappa < 0.0 {
            n1 * s / (s * r).tanh()
        } else if self.kappa > 0.0 {
            n1 * s / (s * r).tan()
        } else {
            n1 / r
        })
    }

    fn log_density(&self, r: f64) -> Result<f64, SpectralError> {
        self.check(r)?;
        let n1 = self.dim as f64 - 1.0;
        let s = self.kappa.abs().sqrt();
        let ln_sn = if self.kappa < 0.0 {
            let x = s * r;
            if x < 1.0 {
                (x.sinh() / s).ln()
            } else {
                x - std::f64::consts::LN_2 + (-(-2.0 * x).exp()).ln_1p() - s.ln()
            }
        } else if self.kappa > 0.0 {
            ((s * r).sin() / s).ln()
        } else {
            r.ln()
        };
        Ok(n1 * ln_sn)
    }

    fn dimension(&self) -> f64 {
        self.dim as f64
    }
}

const SHOOT_TOL: Tolerance = Tolerance {
    atol: 1e-12,
    rtol: 1e-11,
};
/// Relative bracket width at which shooting stops.
pub const EIGEN_REL_TOL: f64 = 1e-10;
/// Start of the Frobenius branch at the centre of a ball, relative to `r_hi`.
const BALL_START: f64 = 1e-6;

/// `θ(r_hi)` and the number of RK45 steps.
fn prufer_end<O: RadialOperator + ?Sized>(
    op: &O,
    r_lo: f64,
    r_hi: f64,
    lambda: f64,
) -> Result<(f64, usize), SpectralError> {
    let k = lambda.sqrt();
    let (mut t, th0) = if r_lo == 0.0 {
        // regular centre: u = 1 - λr²/(2n) + …
        let eps = BALL_START * r_hi;
        let n = op.dimension();
        let u = 1.0 - lambda * eps * eps / (2.0 * n);
        let du = -lambda * eps / n;
        (eps, u.atan2(du / k))
    } else {
        (r_lo, 0.0)
    };
    let mut rhs = |r: f64, y: &[f64; 1]| -> Result<[f64; 1], OdeError> {
        let b = op.drift(r).map_err(|e| OdeError::Rhs(e.to_string()))?;
        let (s, c) = y[0].sin_cos();
        Ok([k * c * c + b * s * c + lambda / k * s * s])
    };
    let mut it = Integrator::new(SHOOT_TOL);
    let mut y = [th0];
    it.advance(&mut rhs, &mut t, &mut y, r_hi, &mut |_, _, _, _| Step::Continue)?;
    Ok((y[0], it.steps))
}

/// Smallest Dirichlet eigenvalue of `u'' + b u' + λu = 0` on `(r_lo, r_hi)`
/// (regular centre when `r_lo = 0`). Returns `(λ1, relative bracket width,
/// RK45 steps)`. `hint` seeds the bracket search.
pub fn lambda1_shooting<O: RadialOperator + ?Sized>(
    op: &O,
    r_lo: f64,
    r_hi: f64,
    hint: Option<f64>,
) -> Result<(f64, f64, usize), SpectralError> {
    if !(r_lo >= 0.0 && r_hi > r_lo && r_hi.is_finite()) {
        return Err(SpectralError::Validation(format!(
            "need 0 ≤ r_lo < r_hi < ∞, got ({r_lo}, {r_hi})"
        )));
    }
    let pi = std::f64::consts::PI;
    let excess = |lam: f64| -> Result<(f64, usize), SpectralError> {
        prufer_end(op, r_lo, r_hi, lam).map(|(th, n)| (th - pi, n))
    };
    let start = hint
        .filter(|h| *h > 0.0 && h.is_finite())
        .unwrap_or_else(|| (pi / (r_hi - r_lo)).powi(2));
    let (mut lo, mut hi);
    let (mut f_lo, mut f_hi);
    let (f0, _) = excess(start)?;
    if f0 > 0.0 {
        hi = start;
        f_hi = f0;
        lo = start;
        f_lo = f0;
        for _ in 0..400 {
            lo *= 0.5;
            f_lo = excess(lo)?.0;
            if f_lo <= 0.0 {
                break;
            }
            hi = lo;
            f_hi = f_lo;
        }
        if f_lo > 0.0 {
            return Err(SpectralError::NoConvergence(format!(
                "no λ below {lo:e} without an interior node"
            )));
        }
    } else {
        lo = start;
        f_lo = f0;
        hi = start;
        f_hi = f0;
        for _ in 0..400 {
            hi *= 2.0;
            f_hi = excess(hi)?.0;
            if f_hi > 0.0 {
                break;
            }
            lo = hi;
            f_lo = f_hi;
        }
        if f_hi <= 0.0 {
            return Err(SpectralError::NoConvergence(format!(
                "no Dirichlet node up to λ = {hi:e}"
            )));
        }
    }
    if f_lo == 0.0 {
        return Ok((lo, 0.0, excess(lo)?.1));
    }
    // Illinois regula falsi with a bisection step whenever one side sticks
    let mut side = 0i32;
    let mut steps = 0;
    for _ in 0..300 {
        if hi - lo <= EIGEN_REL_TOL * hi {
            break;
        }
        let mut x = if side.abs() >= 2 {
            0.5 * (lo + hi)
        } else {
            (lo * f_hi - hi * f_lo) / (f_hi - f_lo)
        };
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        let (fx, n) = excess(x)?;
        steps = n;
        if fx > 0.0 {
            hi = x;
            f_hi = fx;
            if side > 0 {
                f_lo *= 0.5;
                side += 1;
            } else {
                side = 1;
            }
        } else if fx < 0.0 {
            lo = x;
            f_lo = fx;
            if side < 0 {
                f_hi *= 0.5;
                side -= 1;
            } else {
                side = -1;
            }
        } else {
            return Ok((x, 0.0, n));
        }
        if side.abs() > 2 {
            side = 0;
        }
    }
    let lam = 0.5 * (lo + hi);
    Ok((lam, (hi - lo) / hi, steps))
}

/// Fewest cells of the coarser finite-volume mesh; the cross-check also
/// solves on twice as many and extrapolates.
pub const FD_CELLS: usize = 2000;
pub const FD_MAX_CELLS: usize = 100_000;
/// Cells per unit of `∫ (|b| + √λ) dr`, the number of local length scales.
pub const FD_CELLS_PER_SCALE: f64 = 30.0;

/// Local inverse length scale `|b| + k + 1/L`.
fn scale_density<O: RadialOperator + ?Sized>(op: &O, r: f64, k: f64, len: f64) -> Result<f64, SpectralError> {
    Ok(op.drift(r)?.abs() + k + 1.0 / len)
}

/// Cells for the coarser mesh: enough to resolve every drift and
/// oscillation length on the interval.
fn fd_cells<O: RadialOperator + ?Sized>(op: &O, r_lo: f64, r_hi: f64, lambda: f64) -> Result<usize, SpectralError> {
    if r_lo == 0.0 {
        return Ok(FD_CELLS);
    }
    let len = r_hi - r_lo;
    let k = lambda.max(0.0).sqrt();
    let samples = 1000;
    let mut total = 0.0;
    for i in 0..samples {
        let r = r_lo + len * (i as f64 + 0.5) / samples as f64;
        total += scale_density(op, r, k, len)? * len / samples as f64;
    }
    Ok(((FD_CELLS_PER_SCALE * total).ceil() as usize).clamp(FD_CELLS, FD_MAX_CELLS))
}

/// Nodes `x_0 = r_lo < … < x_n = r_hi`, equidistributing `|b| + k + 1/L`
/// on annuli and uniform on balls. `levels` meshes with `n·2^j` cells share
/// one mapping so that they nest.
fn graded_meshes<O: RadialOperator + ?Sized>(
    op: &O,
    r_lo: f64,
    r_hi: f64,
    n: usize,
    k: f64,
    levels: usize,
) -> Result<Vec<Vec<f64>>, SpectralError> {
    let len = r_hi - r_lo;
    let samples = 4 * n;
    let xs: Vec<f64> = (0..=samples).map(|i| r_lo + len * i as f64 / samples as f64).collect();
    let mut cum = vec![0.0; samples + 1];
    if r_lo > 0.0 {
        let mut prev = scale_density(op, xs[0], k, len)?;
        for i in 1..=samples {
            let cur = scale_density(op, xs[i], k, len)?;
            cum[i] = cum[i - 1] + 0.5 * (prev + cur);
            prev = cur;
        }
    } else {
        for (i, c) in cum.iter_mut().enumerate() {
            *c = i as f64;
        }
    }
    let total = cum[samples];
    let mut out = Vec::with_capacity(levels);
    for level in 0..levels {
        let cells = n << level;
        let mut nodes = Vec::with_capacity(cells + 1);
        let mut j = 0;
        for i in 0..=cells {
            let target = total * i as f64 / cells as f64;
            while j + 1 < samples && cum[j + 1] < target {
                j += 1;
            }
            let s = if cum[j + 1] > cum[j] {
                ((target - cum[j]) / (cum[j + 1] - cum[j])).clamp(0.0, 1.0)
            } else {
                0.0
            };
            nodes.push(xs[j] + s * (xs[j + 1] - xs[j]));
        }
        nodes[0] = r_lo;
        nodes[cells] = r_hi;
        out.push(nodes);
    }
    Ok(out)
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Symmetrised finite-volume matrix `M^{-1/2} A M^{-1/2}` as (diagonal,
/// off-diagonal), built entirely from log-density differences.
fn fv_matrix<O: RadialOperator + ?Sized>(op: &O, nodes: &[f64]) -> Result<(Vec<f64>, Vec<f64>), SpectralError> {
    let n = nodes.len() - 1;
    let gx = (0.6f64).sqrt();
    let gw = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
    let mut ln_mass = Vec::with_capacity(n);
    let mut centres = Vec::with_capacity(n);
    for j in 0..n {
        let (a, b) = (nodes[j], nodes[j + 1]);
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        let pts = [mid - gx * half, mid, mid + gx * half];
        let mut terms = [0.0; 3];
        for k in 0..3 {
            terms[k] = (gw[k] * half).ln() + op.log_density(pts[k])?;
        }
        ln_mass.push(log_sum_exp(&terms));
        centres.push(mid);
    }
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n.saturating_sub(1)];
    if nodes[0] > 0.0 {
        let lt = op.log_density(nodes[0])? - (centres[0] - nodes[0]).ln();
        diag[0] += (lt - ln_mass[0]).exp();
    }
    let lt = op.log_density(nodes[n])? - (nodes[n] - centres[n - 1]).ln();
    diag[n - 1] += (lt - ln_mass[n - 1]).exp();
    for j in 0..n - 1 {
        let lt = op.log_density(nodes[j + 1])? - (centres[j + 1] - centres[j]).ln();
        diag[j] += (lt - ln_mass[j]).exp();
        diag[j + 1] += (lt - ln_mass[j + 1]).exp();
        off[j] = -(lt - 0.5 * (ln_mass[j] + ln_mass[j + 1])).exp();
    }
    if diag.iter().chain(off.iter()).any(|v| !v.is_finite()) {
        return Err(SpectralError::Domain("finite-volume matrix not finite".into()));
    }
    Ok((diag, off))
}

/// Eigenvalues of the symmetric tridiagonal matrix below `x`.
fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0;
    for i in 0..diag.len() {
        let o2 = if i > 0 { off[i - 1] * off[i - 1] } else { 0.0 };
        d = diag[i] - x - if i > 0 { o2 / d } else { 0.0 };
        if d == 0.0 {
            d = -f64::EPSILON * (diag[i].abs() + x.abs());
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Solve `(T - s I) y = x` for tridiagonal symmetric `T`.
fn shifted_solve(diag: &[f64], off: &[f64], s: f64, x: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut y = x.to_vec();
    let mut d = diag[0] - s;
    c[0] = if n > 1 { off[0] / d } else { 0.0 };
    y[0] /= d;
    for i in 1..n {
        d = diag[i] - s - off[i - 1] * c[i - 1];
        if i + 1 < n {
            c[i] = off[i] / d;
        }
        y[i] = (y[i] - off[i - 1] * y[i - 1]) / d;
    }
    for i in (0..n - 1).rev() {
        y[i] -= c[i] * y[i + 1];
    }
    y
}

fn rayleigh(diag: &[f64], off: &[f64], y: &[f64]) -> f64 {
    let n = diag.len();
    let mut num = 0.0;
    for i in 0..n {
        let mut ty = diag[i] * y[i];
        if i > 0 {
            ty += off[i - 1] * y[i - 1];
        }
        if i + 1 < n {
            ty += off[i] * y[i + 1];
        }
        num += y[i] * ty;
    }
    num / y.iter().map(|v| v * v).sum::<f64>()
}

/// Smallest eigenvalue of a positive definite symmetric tridiagonal matrix:
/// inverse iteration from shift 0 with Rayleigh-quotient polish, verified by
/// a Sturm count and replaced by Sturm bisection if the check fails.
fn smallest_eigenvalue(diag: &[f64], off: &[f64]) -> f64 {
    let n = diag.len();
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut rho = f64::INFINITY;
    for _ in 0..200 {
        let y = shifted_solve(diag, off, 0.0, &x);
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let next = rayleigh(diag, off, &y);
        x = y.iter().map(|v| v / norm).collect();
        let done = (next - rho).abs() <= 1e-13 * next.abs();
        rho = next;
        if done {
            break;
        }
    }
    for _ in 0..3 {
        let y = shifted_solve(diag, off, rho * (1.0 - 1e-12), &x);
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            break;
        }
        x = y.iter().map(|v| v / norm).collect();
        rho = rayleigh(diag, off, &x);
    }
    let below = sturm_count(diag, off, rho * (1.0 - 1e-9));
    let upto = sturm_count(diag, off, rho * (1.0 + 1e-9));
    if rho > 0.0 && below == 0 && upto >= 1 {
        return rho;
    }
    // a nearby higher eigenvalue was found: bisect on the Sturm count
    let mut hi = diag
        .iter()
        .enumerate()
        .map(|(i, d)| d + if i > 0 { off[i - 1].abs() } else { 0.0 } + off.get(i).map_or(0.0, |o| o.abs()))
        .fold(0.0, f64::max);
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(diag, off, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Finite-volume λ1 on graded meshes of `n` and `2n` cells with Richardson
/// extrapolation; `lambda_hint` sets the oscillation scale of the grading.
/// Returns `(λ1, cells of the finer mesh)`.
pub fn lambda1_finite_difference<O: RadialOperator + ?Sized>(
    op: &O,
    r_lo: f64,
    r_hi: f64,
    n: usize,
    lambda_hint: Option<f64>,
) -> Result<(f64, usize), SpectralError> {
    if !(r_lo >= 0.0 && r_hi > r_lo && n >= 10) {
        return Err(SpectralError::Validation(format!(
            "need 0 ≤ r_lo < r_hi and n ≥ 10, got ({r_lo}, {r_hi}, {n})"
        )));
    }
    let k = lambda_hint.map_or(std::f64::consts::PI / (r_hi - r_lo), |l| l.max(0.0).sqrt());
    let meshes = graded_meshes(op, r_lo, r_hi, n, k, 2)?;
    let mut lams = Vec::with_capacity(2);
    for nodes in &meshes {
        let (d, o) = fv_matrix(op, nodes)?;
        lams.push(smallest_eigenvalue(&d, &o));
    }
    Ok(((4.0 * lams[1] - lams[0]) / 3.0, 2 * n))
}

/// Agreement required between shooting and the finite-volume cross-check.
pub fn cross_check_tolerance(lambda1: f64) -> f64 {
    (1e-4 * lambda1.abs()).max(1e-6)
}

fn cross_check<O: RadialOperator + ?Sized>(
    op: &O,
    r_lo: f64,
    r_hi: f64,
    lambda1: f64,
) -> Result<CrossCheck, SpectralError> {
    let n = fd_cells(op, r_lo, r_hi, lambda1)?;
    let (fd, _) = lambda1_finite_difference(op, r_lo, r_hi, n, Some(lambda1))?;
    let difference = (fd - lambda1).abs();
    let tolerance = cross_check_tolerance(lambda1);
    Ok(CrossCheck {
        lambda1: fd,
        difference,
        tolerance,
        agrees: difference <= tolerance,
    })
}

/// [`lambda1_interval`] for any radial operator.
pub fn lambda1_interval_of<O: RadialOperator + ?Sized>(
    op: &O,
    r_lo: f64,
    r_hi: f64,
) -> Result<EigenResult, SpectralError> {
    let (lambda1, residual, steps) = lambda1_shooting(op, r_lo, r_hi, None)?;
    let check = cross_check(op, r_lo, r_hi, lambda1)?;
    let what = if r_lo == 0.0 {
        "ball, regular centre"
    } else {
        "annulus, Dirichlet at both ends"
    };
    Ok(EigenResult {
        lambda1,
        method: Method::PrueferShooting,
        mesh_meta: MeshMeta {
            r_lo,
            r_hi,
            nodes: steps,
            description: format!("{what}; Prüfer shooting, RK45 steps of the last shot"),
        },
        residual,
        cross_check: Some(check),
        history: vec![],
    })
}

/// Smallest Dirichlet eigenvalue of `-Δ_f` on the annulus `(r_lo, r_hi)`, or
/// on the ball `B_{r_hi}` when `r_lo = 0`.
pub fn lambda1_interval(m: &ModelManifold, r_lo: f64, r_hi: f64) -> Result<EigenResult, SpectralError> {
    lambda1_interval_of(m, r_lo, r_hi)
}

pub const EXTERIOR_ABS_TOL: f64 = 1e-8;
/// Added to the absolute tolerance: shooting resolves `λ` to `1e-10`
/// relative, so large exterior eigenvalues cannot settle to `1e-8` absolute.
pub const EXTERIOR_REL_TOL: f64 = 1e-9;
pub const EXTERIOR_MAX_DOUBLINGS: usize = 40;

/// `λ1(M \ B̄_R)` as the limit of annuli `(R, R_out)` with `R_out = 2R, 4R, …`.
pub fn lambda1_exterior<O: RadialOperator + ?Sized>(op: &O, r: f64) -> Result<EigenResult, SpectralError> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(SpectralError::Validation(format!(
            "exterior radius must be positive, got {r}"
        )));
    }
    let mut history = Vec::new();
    let mut outer = 2.0 * r;
    let mut prev: Option<f64> = None;
    for _ in 0..=EXTERIOR_MAX_DOUBLINGS {
        let (lam, residual, steps) = lambda1_shooting(op, r, outer, prev)?;
        let change = prev.map(|p| (p - lam).abs());
        history.push(ExteriorStep {
            outer_radius: outer,
            lambda1: lam,
            change,
        });
        if change.is_some_and(|c| c < EXTERIOR_ABS_TOL + EXTERIOR_REL_TOL * lam) {
            let check = cross_check(op, r, outer, lam)?;
            return Ok(EigenResult {
                lambda1: lam,
                method: Method::PrueferShooting,
                mesh_meta: MeshMeta {
                    r_lo: r,
                    r_hi: outer,
                    nodes: steps,
                    description: format!("exterior of B_{r}; annulus (R, {outer}) after outer-radius doubling"),
                },
                residual,
                cross_check: Some(check),
                history,
            });
        }
        prev = Some(lam);
        outer *= 2.0;
    }
    let trend: Vec<String> = history
        .iter()
        .map(|s| format!("R_out={:.3e}: λ1={:.10e}", s.outer_radius, s.lambda1))
        .collect();
    Err(SpectralError::NoConvergence(format!(
        "exterior λ1 at R={r} did not stabilize: {}",
        trend.join("; ")
    )))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EssSpecReport {
    pub radii: Vec<f64>,
    /// `None` where the exterior problem failed; see `failures`.
    pub exterior_lambda1: Vec<Option<f64>>,
    pub failures: Vec<(f64, String)>,
    pub bottom_estimate: Extended,
    pub monotone_ok: bool,
}

/// Relative size an increment must have to count as growth.
pub const GROWTH_INCREMENT: f64 = 1e-3;

/// `inf σ_ess = sup_R λ1(M \ B̄_R)` sampled at `radii`. The estimate is
/// `Unbounded` when the last three increments are all significant and
/// non-decreasing, i.e. the values grow without any sign of levelling off.
pub fn ess_spectrum_bottom<O: RadialOperator + ?Sized>(op: &O, radii: &[f64]) -> Result<EssSpecReport, SpectralError> {
    if radii.is_empty() || radii.windows(2).any(|w| w[1] <= w[0]) || radii[0] <= 0.0 {
        return Err(SpectralError::Validation(format!(
            "radii must be positive and increasing, got {radii:?}"
        )));
    }
    let results: Vec<Result<EigenResult, SpectralError>> = radii.par_iter().map(|&r| lambda1_exterior(op, r)).collect();
    let mut values = Vec::with_capacity(radii.len());
    let mut failures = Vec::new();
    for (&r, res) in radii.iter().zip(results) {
        match res {
            Ok(e) => values.push(Some(e.lambda1)),
            Err(e) => {
                values.push(None);
                failures.push((r, e.to_string()));
            }
        }
    }
    let ok: Vec<f64> = values.iter().flatten().copied().collect();
    if ok.is_empty() {
        let why: Vec<String> = failures.iter().map(|(r, e)| format!("R={r}: {e}")).collect();
        return Err(SpectralError::NoConvergence(why.join("; ")));
    }
    let monotone_ok = ok.windows(2).all(|w| w[1] >= w[0] - (1e-7 + 1e-6 * w[0].abs()));
    let growing = ok.len() >= 4 && {
        let inc: Vec<f64> = ok.windows(2).map(|w| w[1] - w[0]).collect();
        let k = inc.len();
        let tail = &inc[k - 3..];
        let vals = &ok[ok.len() - 4..];
        tail.iter()
            .zip(vals)
            .all(|(d, v)| *d > GROWTH_INCREMENT * (1.0 + v.abs()))
            && tail.windows(2).all(|w| w[1] >= w[0])
    };
    let bottom_estimate = if growing {
        Extended::Unbounded
    } else {
        Extended::Finite(ok.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
    };
    Ok(EssSpecReport {
        radii: radii.to_vec(),
        exterior_lambda1: values,
        failures,
        bottom_estimate,
        monotone_ok,
    })
}
