//! Dormand–Prince 5(4) with adaptive step size.

use super::OdeError;

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub atol: f64,
    pub rtol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            atol: 1e-10,
            rtol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Continue,
    Stop,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth-order minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Stateful integrator; keeps the last accepted step size between calls so
/// a solution can be marched across an output grid interval by interval.
#[derive(Debug, Clone)]
pub struct Integrator<const N: usize> {
    pub tol: Tolerance,
    pub max_steps: usize,
    pub steps: usize,
    h: f64,
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        let mut s = 0.0;
        for (c, k) in terms {
            s += c * k[i];
        }
        out[i] += h * s;
    }
    out
}

impl<const N: usize> Integrator<N> {
    pub fn new(tol: Tolerance) -> Self {
        Self {
            tol,
            max_steps: 50_000_000,
            steps: 0,
            h: 0.0,
        }
    }

    /// March `(t, y)` to `t_end` (either direction). `observe` sees every
    /// accepted step as `(t_old, y_old, t_new, y_new)` and may stop early, in
    /// which case `Ok(true)` is returned and `(t, y)` hold the last state.
    pub fn advance<F, O>(
        &mut self,
        rhs: &mut F,
        t: &mut f64,
        y: &mut [f64; N],
        t_end: f64,
        observe: &mut O,
    ) -> Result<bool, OdeError>
    where
        F: FnMut(f64, &[f64; N]) -> Result<[f64; N], OdeError>,
        O: FnMut(f64, &[f64; N], f64, &[f64; N]) -> Step,
    {
        let span = t_end - *t;
        if span == 0.0 {
            return Ok(false);
        }
        let dir = span.signum();
        let scale = t.abs().max(t_end.abs()).max(1e-300);
        if self.h == 0.0 {
            self.h = (1e-3 * span.abs()).max(1e-12 * scale);
        }
        let mut k1 = rhs(*t, y)?;
        loop {
            let remaining = t_end - *t;
            if remaining * dir <= 0.0 {
                return Ok(false);
            }
            let mut h = self.h.min(remaining.abs());
            let last = h >= remaining.abs();
            if last {
                h = remaining.abs();
            }
            let hs = h * dir;
            if self.steps >= self.max_steps {
                return Err(OdeError::MaxSteps { t: *t });
            }
            self.steps += 1;
            let k2 = rhs(*t + C2 * hs, &axpy(y, hs, &[(A21, &k1)]))?;
            let k3 = rhs(*t + C3 * hs, &axpy(y, hs, &[(A31, &k1), (A32, &k2)]))?;
            let k4 = rhs(*t + C4 * hs, &axpy(y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]))?;
            let k5 = rhs(
                *t + C5 * hs,
                &axpy(y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            )?;
            let k6 = rhs(
                *t + hs,
                &axpy(y, hs, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            )?;
            let y_new = axpy(y, hs, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
            let t_new = if last { t_end } else { *t + hs };
            let k7 = rhs(t_new, &y_new)?;
            let mut err: f64 = 0.0;
            for i in 0..N {
                let e = hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = self.tol.atol + self.tol.rtol * y[i].abs().max(y_new[i].abs());
                err = err.max((e / sc).abs());
            }
            if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
                if h <= 1e-15 * scale {
                    return Err(OdeError::NonFinite { t: *t });
                }
                self.h = 0.1 * h;
                continue;
            }
            if err <= 1.0 {
                let (t_old, y_old) = (*t, *y);
                *t = t_new;
                *y = y_new;
                k1 = k7;
                let grow = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                // the shortened final step must not shrink the carried step size
                if !last || grow * h > self.h {
                    self.h = grow * h;
                }
                if observe(t_old, &y_old, *t, y) == Step::Stop {
                    return Ok(true);
                }
            } else {
                let shrink = (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                self.h = shrink * h;
                if self.h <= 1e-15 * scale {
                    return Err(OdeError::StepUnderflow { t: *t });
                }
            }
        }
    }

    /// `advance` without an observer.
    pub fn advance_to<F>(&mut self, rhs: &mut F, t: &mut f64, y: &mut [f64; N], t_end: f64) -> Result<(), OdeError>
    where
        F: FnMut(f64, &[f64; N]) -> Result<[f64; N], OdeError>,
    {
        self.advance(rhs, t, y, t_end, &mut |_, _, _, _| Step::Continue)
            .map(|_| ())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator() {
        let mut rhs = |_t: f64, y: &[f64; 2]| Ok([y[1], -y[0]]);
        let mut it = Integrator::new(Tolerance {
            atol: 1e-12,
            rtol: 1e-12,
        });
        let (mut t, mut y) = (0.0, [0.0, 1.0]);
        it.advance_to(&mut rhs, &mut t, &mut y, 10.0).unwrap();
        assert_eq!(t, 10.0);
        assert!((y[0] - 10f64.sin()).abs() < 1e-10);
        // and back
        it.advance_to(&mut rhs, &mut t, &mut y, 0.0).unwrap();
        assert!(y[0].abs() < 1e-9 && (y[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn observer_can_stop() {
        let mut rhs = |_t: f64, _y: &[f64; 1]| Ok([-1.0]);
        let mut it = Integrator::new(Tolerance::default());
        let (mut t, mut y) = (0.0, [1.0]);
        let stopped = it
            .advance(&mut rhs, &mut t, &mut y, 5.0, &mut |_, _, _, y| {
                if y[0] < 0.0 {
                    Step::Stop
                } else {
                    Step::Continue
                }
            })
            .unwrap();
        assert!(stopped && t > 1.0 && t < 5.0);
    }
}
