use serde::Serialize;

use crate::error::{Error, Result};

/// Numerical thresholds. `nondeg` is relative to the largest `|d lambda|`
/// on the seed grid, `on_curve` to the largest `|lambda|`, `rank` to the
/// largest singular value of `P`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub nondeg: f64,
    pub transv: f64,
    pub a3: f64,
    pub rank: f64,
    pub angle: f64,
    pub on_curve: f64,
    pub probe_radius: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            nondeg: 1e-6,
            transv: 1e-6,
            a3: 1e-6,
            rank: 1e-8,
            angle: 1e-6,
            on_curve: 1e-10,
            probe_radius: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Config {
    /// Seed grid cells per side.
    pub grid: usize,
    /// Quadrature cells per seed cell side are `2^refine`.
    pub refine: u32,
    /// Gauss nodes per cell and direction; the error estimate uses one more.
    pub quad_nodes: usize,
    pub tol: Tolerances,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            grid: 64,
            refine: 0,
            quad_nodes: 2,
            tol: Tolerances::default(),
        }
    }
}

impl Config {
    pub fn with_grid(grid: usize) -> Config {
        Config {
            grid,
            ..Config::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let t = &self.tol;
        let all = [t.nondeg, t.transv, t.a3, t.rank, t.angle, t.on_curve, t.probe_radius];
        if all.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::Spec {
                line: None,
                message: "all tolerances must be positive".into(),
            });
        }
        if self.grid < 8 {
            return Err(Error::Spec {
                line: None,
                message: format!("grid resolution {} is below the minimum 8", self.grid),
            });
        }
        if !(1..=8).contains(&self.quad_nodes) {
            return Err(Error::Spec {
                line: None,
                message: "quadrature nodes must be between 1 and 8".into(),
            });
        }
        Ok(())
    }

    pub fn quad_cells(&self) -> usize {
        self.grid << self.refine
    }
}
