//! The full parameter set of a Poisson-approximation experiment.

use serde::{Deserialize, Serialize};

use crate::bounds::BoundParams;
use crate::error::{Error, Result};
use crate::lattice::{AnchorMode, Norm, SiteBox};
use crate::process::LatticeSystem;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelParams {
    pub d: u32,
    pub beta: f64,
    pub beta_prime: f64,
    /// Minimum length of the contours counted in the window.
    pub n: u32,
    /// Neighbourhood radius; `delta * N` when absent.
    pub d_neigh: Option<f64>,
    pub epsilon: Option<f64>,
    /// Target mean number of large contours meeting the window.
    pub lambda: f64,
    /// Side of the square window; sized from `lambda` when absent.
    pub window: Option<u32>,
    pub l_max: usize,
    /// Side of the square simulation box; the whole lattice when absent.
    pub sim_box: Option<u32>,
    pub anchor: AnchorMode,
    pub norm: Norm,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            d: 2,
            beta: 2.0,
            beta_prime: 1.8,
            n: 8,
            d_neigh: None,
            epsilon: None,
            lambda: 1.0,
            window: None,
            l_max: 16,
            sim_box: None,
            anchor: AnchorMode::default(),
            norm: Norm::default(),
        }
    }
}

impl ModelParams {
    /// Parameter checks that need no census.
    pub fn validate(&self) -> Result<()> {
        if self.d != 2 {
            return Err(Error::param("simulation is implemented for d = 2 only"));
        }
        if self.l_max < 4 || self.l_max % 2 == 1 {
            return Err(Error::param(format!(
                "L_max must be even and at least 4, got {}",
                self.l_max
            )));
        }
        if self.n < 4 {
            return Err(Error::param(format!("N must be at least 4, got {}", self.n)));
        }
        if self.n as usize > self.l_max {
            return Err(Error::param(format!(
                "N = {} exceeds L_max = {}: no contour of the truncated model is long enough",
                self.n, self.l_max
            )));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::param("lambda must be positive"));
        }
        if !(self.beta_prime < self.beta) {
            return Err(Error::param(format!(
                "beta' = {} must be below beta = {}",
                self.beta_prime, self.beta
            )));
        }
        if let Some(d) = self.d_neigh {
            if !(d > 0.0) {
                return Err(Error::param("D must be positive"));
            }
        }
        if self.window == Some(0) || self.sim_box == Some(0) {
            return Err(Error::param("box sides must be positive"));
        }
        Ok(())
    }

    pub fn bound_params(&self) -> Result<BoundParams> {
        self.validate()?;
        let mut p = BoundParams::certified(
            self.beta,
            self.beta_prime,
            self.n,
            self.lambda,
            self.l_max,
            self.anchor,
        )?;
        p.d_neigh = self.d_neigh;
        p.epsilon = self.epsilon;
        Ok(p)
    }

    pub fn sim_box(&self) -> Option<SiteBox> {
        self.sim_box.map(|s| SiteBox::centered(s).expect("positive side"))
    }

    pub fn window_box(&self, side: u32) -> Result<SiteBox> {
        SiteBox::centered(side)
    }

    /// The window must sit inside the simulation box with room `margin`
    /// on every side.
    pub fn check_margin(&self, window: &SiteBox, margin: f64) -> Result<()> {
        let Some(b) = self.sim_box() else {
            return Ok(());
        };
        let need = margin + self.l_max as f64 / 2.0;
        for axis in 0..2 {
            let lo = (window.min[axis] - b.min[axis]) as f64;
            let hi = (b.max[axis] - window.max[axis]) as f64;
            if lo.min(hi) < need {
                return Err(Error::param(format!(
                    "window must lie inside the simulation box with margin D + L_max/2 = {need}, \
                     found {}",
                    lo.min(hi)
                )));
            }
        }
        Ok(())
    }

    /// Largest window side compatible with the margin rule.
    pub fn max_window_side(&self, margin: f64) -> Option<u32> {
        let b = self.sim_box?;
        let need = (margin + self.l_max as f64 / 2.0).ceil() as i64;
        let s = b as i64 - 2 * need - 1;
        Some(s.max(0) as u32)
    }

    /// The lattice model, refusing `beta` at or below the certified `beta*`.
    pub fn system(&self) -> Result<LatticeSystem> {
        self.validate()?;
        LatticeSystem::new(self.l_max, self.beta, self.sim_box())
    }
}
