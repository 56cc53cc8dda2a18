//! Radial ODE certificates: the α-function, minimal exterior solutions,
//! comparison profiles, the Riccati crossing, semilinear exterior problems
//! and the truncated heat-mass evolution.

use std::io::{self, Write};

use serde::Serialize;
use thiserror::Error;

use crate::manifold::ManifoldError;
use crate::quad::QuadError;

pub mod alpha;
pub mod comparison;
pub mod heat;
pub mod minimal;
pub mod rk45;
pub mod semilinear;

pub use alpha::{alpha_function, alpha_profile, alpha_tail, alpha_tail_profile};
pub use comparison::{comparison_g, riccati_crossing, ComparisonProfile, CrossingReport};
pub use heat::{heat_mass, heat_mass_doubling, MassCurve};
pub use minimal::{minimal_exterior_solution, MinimalOptions};
pub use rk45::{Integrator, Step, Tolerance};
pub use semilinear::{semilinear_exterior, Nonlinearity, SemilinearResult, SupportReport};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("solution became non-finite near t = {t}")]
    NonFinite { t: f64 },
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("step budget exhausted at t = {t}")]
    MaxSteps { t: f64 },
    #[error("right-hand side failed: {0}")]
    Rhs(String),
    #[error("exhaustion did not converge: {0}")]
    NoConvergence(String),
    #[error("shooting failed: {0}")]
    ShootingFailure(String),
    #[error("invalid input: {0}")]
    Validation(String),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}

impl From<ManifoldError> for OdeError {
    fn from(e: ManifoldError) -> Self {
        OdeError::Rhs(e.to_string())
    }
}

/// One stage of an exhaustion: outer radius and sup-norm change against
/// the previous stage (`None` for the first).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExhaustionStep {
    pub outer_radius: f64,
    pub change: Option<f64>,
}

/// A radial function sampled on a strictly increasing grid, with its
/// derivative at the same nodes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialProfile {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub derivative_values: Vec<f64>,
    pub bc_meta: String,
    pub converged: bool,
    pub history: Vec<ExhaustionStep>,
    /// `Some(true)` when the profile was flagged and verified non-increasing.
    pub non_increasing: Option<bool>,
}

impl RadialProfile {
    pub fn new(grid: Vec<f64>, values: Vec<f64>, derivative_values: Vec<f64>, bc_meta: impl Into<String>) -> Self {
        debug_assert!(grid.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(grid.len() == values.len() && grid.len() == derivative_values.len());
        Self {
            grid,
            values,
            derivative_values,
            bc_meta: bc_meta.into(),
            converged: true,
            history: Vec::new(),
            non_increasing: None,
        }
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn r_lo(&self) -> f64 {
        self.grid[0]
    }

    pub fn r_hi(&self) -> f64 {
        *self.grid.last().expect("non-empty profile")
    }

    fn locate(&self, r: f64) -> Option<usize> {
        if self.grid.len() < 2 || r < self.r_lo() || r > self.r_hi() {
            return None;
        }
        let i = self.grid.partition_point(|&x| x <= r);
        Some(i.clamp(1, self.grid.len() - 1) - 1)
    }

    /// Cubic Hermite interpolation of the value; `None` outside the grid.
    pub fn eval(&self, r: f64) -> Option<f64> {
        let i = self.locate(r)?;
        let (x0, x1) = (self.grid[i], self.grid[i + 1]);
        let h = x1 - x0;
        let s = (r - x0) / h;
        let (h00, h10, h01, h11) = (
            (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s),
            s * (1.0 - s) * (1.0 - s),
            s * s * (3.0 - 2.0 * s),
            s * s * (s - 1.0),
        );
        Some(
            h00 * self.values[i]
                + h10 * h * self.derivative_values[i]
                + h01 * self.values[i + 1]
                + h11 * h * self.derivative_values[i + 1],
        )
    }

    /// Derivative of the Hermite interpolant.
    pub fn eval_derivative(&self, r: f64) -> Option<f64> {
        let i = self.locate(r)?;
        let (x0, x1) = (self.grid[i], self.grid[i + 1]);
        let h = x1 - x0;
        let s = (r - x0) / h;
        let (d00, d10, d01, d11) = (
            6.0 * s * s - 6.0 * s,
            3.0 * s * s - 4.0 * s + 1.0,
            -6.0 * s * s + 6.0 * s,
            3.0 * s * s - 2.0 * s,
        );
        Some(
            (d00 * self.values[i] + d01 * self.values[i + 1]) / h
                + d10 * self.derivative_values[i]
                + d11 * self.derivative_values[i + 1],
        )
    }

    pub fn is_non_increasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] <= w[0])
    }

    /// `sup |u''_fd - rhs(r, u, u')|` over the interior nodes, where `u''_fd`
    /// differentiates the stored derivative (five-point stencil on uniform
    /// grids, three-point otherwise).
    pub fn residual<F>(&self, mut second_derivative: F) -> f64
    where
        F: FnMut(f64, f64, f64) -> f64,
    {
        let n = self.grid.len();
        if n < 5 {
            return f64::NAN;
        }
        let h0 = self.grid[1] - self.grid[0];
        let uniform = self
            .grid
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h0).abs() <= 1e-9 * h0.abs().max(w[1].abs() * 1e-6));
        let d = &self.derivative_values;
        let mut worst: f64 = 0.0;
        if uniform {
            for i in 2..n - 2 {
                let fd = (-d[i + 2] + 8.0 * d[i + 1] - 8.0 * d[i - 1] + d[i - 2]) / (12.0 * h0);
                let want = second_derivative(self.grid[i], self.values[i], d[i]);
                worst = worst.max((fd - want).abs());
            }
        } else {
            for i in 1..n - 1 {
                let (hl, hr) = (self.grid[i] - self.grid[i - 1], self.grid[i + 1] - self.grid[i]);
                let fd = (hl * hl * d[i + 1] - hr * hr * d[i - 1] + (hr * hr - hl * hl) * d[i]) / (hl * hr * (hl + hr));
                let want = second_derivative(self.grid[i], self.values[i], d[i]);
                worst = worst.max((fd - want).abs());
            }
        }
        worst
    }

    /// `r,value,derivative` lines with a header.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "r,value,derivative")?;
        for i in 0..self.grid.len() {
            writeln!(
                w,
                "{:.17e},{:.17e},{:.17e}",
                self.grid[i], self.values[i], self.derivative_values[i]
            )?;
        }
        Ok(())
    }
}

/// `n` equispaced points on `[a, b]`, endpoints exact.
pub fn uniform_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            if i + 1 == n {
                b
            } else {
                a + (b - a) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sine_profile() -> RadialProfile {
        let grid = uniform_grid(0.0, 3.0, 301);
        let values = grid.iter().map(|x| x.sin()).collect();
        let der = grid.iter().map(|x| x.cos()).collect();
        RadialProfile::new(grid, values, der, "test")
    }

    #[test]
    fn interpolation_hits_nodes_exactly() {
        let p = sine_profile();
        for (i, &r) in p.grid.iter().enumerate() {
            assert_eq!(p.eval(r).unwrap(), p.values[i]);
        }
        assert!((p.eval(1.234).unwrap() - 1.234f64.sin()).abs() < 1e-9);
        assert!((p.eval_derivative(1.234).unwrap() - 1.234f64.cos()).abs() < 1e-6);
        assert!(p.eval(3.5).is_none());
    }

    #[test]
    fn residual_of_exact_profile_is_small() {
        let p = sine_profile();
        assert!(p.residual(|_, u, _| -u) < 1e-8);
        assert!(p.residual(|_, u, _| u) > 0.5);
    }

    #[test]
    fn csv_export() {
        let mut buf = Vec::new();
        sine_profile().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("r,value,derivative\n"));
        assert_eq!(text.lines().count(), 302);
    }
}
