//! Adaptive Gauss–Kronrod (7/15) quadrature, plus a log-space variant for
//! integrands whose magnitude does not fit in an `f64`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

use crate::expr::ExprError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error("integrand evaluation failed: {0}")]
    Integrand(String),
    #[error("integrand is not finite at t = {0}")]
    NonFinite(f64),
    #[error("tolerance not reached after {subdivisions} subdivisions (value {value:e}, error {error:e})")]
    NotConverged {
        value: f64,
        error: f64,
        subdivisions: usize,
    },
}

impl From<ExprError> for QuadError {
    fn from(e: ExprError) -> Self {
        QuadError::Integrand(e.to_string())
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evals: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 0.0,
            max_subdivisions: 4000,
        }
    }
}

impl QuadOptions {
    pub fn rel(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F>(f: &mut F, a: f64, b: f64) -> Result<Panel, QuadError>
where
    F: FnMut(f64) -> Result<f64, QuadError>,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c)?;
    if !fc.is_finite() {
        return Err(QuadError::NonFinite(c));
    }
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for (j, &x) in XGK.iter().take(7).enumerate() {
        let (t1, t2) = (c - h * x, c + h * x);
        let (f1, f2) = (f(t1)?, f(t2)?);
        if !f1.is_finite() {
            return Err(QuadError::NonFinite(t1));
        }
        if !f2.is_finite() {
            return Err(QuadError::NonFinite(t2));
        }
        k += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            g += WG[j / 2] * (f1 + f2);
        }
    }
    Ok(Panel {
        a,
        b,
        value: k * h,
        error: ((k - g) * h).abs(),
    })
}

/// Integrate `f` over `[a, b]` by adaptive bisection of the panel with the
/// largest error estimate. Endpoints are never evaluated.
pub fn integrate<F>(mut f: F, a: f64, b: f64, opts: QuadOptions) -> Result<QuadResult, QuadError>
where
    F: FnMut(f64) -> Result<f64, QuadError>,
{
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
            evals: 0,
        });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut heap = BinaryHeap::new();
    let first = kronrod(&mut f, lo, hi)?;
    let (mut total, mut err) = (first.value, first.error);
    heap.push(first);
    let mut evals = 15;
    let mut subdivisions = 0;
    loop {
        let tol = opts.abs_tol.max(opts.rel_tol * total.abs());
        if err <= tol {
            break;
        }
        if subdivisions >= opts.max_subdivisions {
            return Err(QuadError::NotConverged {
                value: total,
                error: err,
                subdivisions,
            });
        }
        let worst = heap.pop().expect("heap holds at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // panel can no longer be split in floating point
            if err <= 1e3 * tol.max(f64::MIN_POSITIVE) {
                heap.push(worst);
                break;
            }
            return Err(QuadError::NotConverged {
                value: total,
                error: err,
                subdivisions,
            });
        }
        let left = kronrod(&mut f, worst.a, mid)?;
        let right = kronrod(&mut f, mid, worst.b)?;
        evals += 30;
        subdivisions += 1;
        total += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        if subdivisions % 64 == 0 {
            // re-sum to shed accumulated cancellation in the running totals
            total = heap.iter().map(|p| p.value).sum();
            err = heap.iter().map(|p| p.error).sum();
        }
    }
    let value: f64 = heap.iter().map(|p| p.value).sum();
    let error: f64 = heap.iter().map(|p| p.error).sum();
    Ok(QuadResult {
        value: sign * value,
        error,
        evals,
    })
}

/// `ln ∫_a^b exp(lf(t)) dt` for `a < b`, robust to `lf` far outside the
/// floating range. Returns `-inf` when the integral underflows to zero.
///
/// The maximum of `lf` is located first (coarse samples, then a golden
/// section refinement) and the interval is split geometrically around it, so
/// a peak much narrower than `b - a` is never stepped over.
pub fn integrate_log<F>(mut lf: F, a: f64, b: f64, opts: QuadOptions) -> Result<f64, QuadError>
where
    F: FnMut(f64) -> Result<f64, QuadError>,
{
    debug_assert!(a < b);
    const SAMPLES: usize = 33;
    let width = b - a;
    let inset = 1e-13 * width;
    let mut eval = |t: f64| -> Result<f64, QuadError> {
        let v = lf(t)?;
        if v.is_nan() {
            return Err(QuadError::NonFinite(t));
        }
        Ok(v)
    };
    let nodes: Vec<f64> = (0..SAMPLES)
        .map(|i| match i {
            0 => a + inset,
            _ if i + 1 == SAMPLES => b - inset,
            _ => a + width * i as f64 / (SAMPLES - 1) as f64,
        })
        .collect();
    let mut vals = Vec::with_capacity(SAMPLES);
    for &t in &nodes {
        vals.push(eval(t)?);
    }
    let k = (0..SAMPLES).fold(0, |best, i| if vals[i] > vals[best] { i } else { best });
    if vals[k] == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    // golden section on the bracket around the best sample, unless the
    // integrand still rises into an endpoint
    let (mut lo, mut hi) = (nodes[k.saturating_sub(1)], nodes[(k + 1).min(SAMPLES - 1)]);
    let (mut peak_t, mut peak_v) = (nodes[k], vals[k]);
    let at_end = match k {
        0 => eval(nodes[0] + 1e-9 * width)? <= vals[0],
        _ if k + 1 == SAMPLES => eval(nodes[k] - 1e-9 * width)? <= vals[k],
        _ => false,
    };
    const INVPHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = hi - INVPHI * (hi - lo);
    let mut x2 = lo + INVPHI * (hi - lo);
    let (mut f1, mut f2) = if at_end {
        (peak_v, peak_v)
    } else {
        (eval(x1)?, eval(x2)?)
    };
    for _ in 0..if at_end { 0 } else { 90 } {
        if hi - lo <= 1e-15 * width {
            break;
        }
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INVPHI * (hi - lo);
            f1 = eval(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INVPHI * (hi - lo);
            f2 = eval(x2)?;
        }
        for (t, v) in [(x1, f1), (x2, f2)] {
            if v > peak_v {
                peak_t = t;
                peak_v = v;
            }
        }
    }
    // half-width where the log-integrand has dropped by one unit
    let mut half = 1e-14 * width.max(peak_t.abs());
    while half < width {
        let left = if peak_t - half > a {
            eval(peak_t - half)?
        } else {
            f64::NEG_INFINITY
        };
        let right = if peak_t + half < b {
            eval(peak_t + half)?
        } else {
            f64::NEG_INFINITY
        };
        if left.max(right) < peak_v - 1.0 {
            break;
        }
        half *= 4.0;
    }
    let mut breaks = vec![a, b];
    if peak_t > a && peak_t < b {
        breaks.push(peak_t);
    }
    let mut d = half;
    while d < width {
        for t in [peak_t - d, peak_t + d] {
            if t > a && t < b {
                breaks.push(t);
            }
        }
        d *= 2.0;
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    // the integral is at least ~half·e^{-1}, which bounds how much accuracy
    // the far panels need
    let piece_opts = QuadOptions {
        abs_tol: opts.abs_tol.max(0.1 * opts.rel_tol * half),
        ..opts
    };
    let mut shift = peak_v;
    'retry: for _ in 0..8 {
        let mut total = 0.0;
        for w in breaks.windows(2) {
            let mut seen = shift;
            let res = integrate(
                |t| {
                    let v = eval(t)?;
                    seen = seen.max(v);
                    Ok((v - shift).exp())
                },
                w[0],
                w[1],
                piece_opts,
            );
            match res {
                Ok(q) => total += q.value,
                Err(QuadError::NonFinite(_)) if seen > shift => {
                    shift = seen;
                    continue 'retry;
                }
                Err(e) => return Err(e),
            }
        }
        if total <= 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        return Ok(shift + total.ln());
    }
    Err(QuadError::NotConverged {
        value: f64::NAN,
        error: f64::NAN,
        subdivisions: 0,
    })
}

/// `ln(e^x + e^y)` without overflow.
pub fn log_add(x: f64, y: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        return y;
    }
    if y == f64::NEG_INFINITY {
        return x;
    }
    let m = x.max(y);
    m + ((x - m).exp() + (y - m).exp()).ln()
}

/// `ln(e^x - e^y)` for `x > y`.
pub fn log_sub(x: f64, y: f64) -> f64 {
    if y == f64::NEG_INFINITY {
        return x;
    }
    x + (-(y - x).exp()).ln_1p()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let q = integrate(|t| Ok(t * t), 0.0, 3.0, QuadOptions::default()).unwrap();
        assert!((q.value - 9.0).abs() < 1e-13);
        assert_eq!(q.evals, 15);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let q = integrate(|t| Ok(t.cos()), 1.0, 0.0, QuadOptions::default()).unwrap();
        assert!((q.value + 1f64.sin()).abs() < 1e-12);
    }

    #[test]
    fn endpoint_singularity() {
        let q = integrate(|t| Ok(t.powf(-0.75)), 0.0, 1.0, QuadOptions::rel(1e-9)).unwrap();
        assert!((q.value - 4.0).abs() < 1e-7, "{}", q.value);
    }

    #[test]
    fn log_space_integral_of_huge_values() {
        // ∫_0^1000 e^t dt = e^1000 - 1
        let l = integrate_log(|t| Ok(t), 0.0, 1000.0, QuadOptions::default()).unwrap();
        assert!((l - 1000.0).abs() < 1e-9, "{l}");
        // sharp peak not hit by the coarse sampling
        let l = integrate_log(
            |t| Ok(-1e4 * (t - 0.3001).powi(2) + 800.0),
            0.0,
            1.0,
            QuadOptions::default(),
        )
        .unwrap();
        let want = 800.0 + (std::f64::consts::PI / 1e4).sqrt().ln();
        assert!((l - want).abs() < 1e-8, "{l} vs {want}");
    }

    #[test]
    fn log_helpers() {
        assert!((log_add(0.0, 0.0) - 2f64.ln()).abs() < 1e-15);
        assert!((log_sub(2f64.ln(), 0.0)).abs() < 1e-15);
        assert_eq!(log_add(f64::NEG_INFINITY, 3.0), 3.0);
    }
}
