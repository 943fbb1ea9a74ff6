//! Two-body s-wave scattering in model potentials: a short-range well plus a
//! Gaussian barrier whose height controls the effective range.

mod fit;
mod numerov;
mod tune;

pub use fit::{auto_fit, fit_scattering_params, fit_window, phase_shifts, FitOptions, ScatteringFit};
pub use numerov::{
    count_bound_states, scattering_length_zero_energy, solve_phase_shift, threshold_depth, PhaseShiftSample,
    RadialGrid,
};
pub use tune::{tune_depth, tune_to_target, TuneOptions, TuneResult};

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, input, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    /// `-D·sech²(3r/r0) + B·exp(-2(3r/r0 - 2)²)`
    SechBarrier,
    /// `D·[(1 - exp(-(3r/r0 - 1)))² - 1] + B·exp(-2(3r/r0 - 2)²)`
    MorseBarrier,
}

impl std::str::FromStr for PotentialKind {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sech" | "sech_barrier" => Ok(PotentialKind::SechBarrier),
            "morse" | "morse_barrier" => Ok(PotentialKind::MorseBarrier),
            _ => input(format!("unknown potential kind {s:?} (expected sech or morse)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialModel {
    pub kind: PotentialKind,
    /// Well depth.
    pub d: f64,
    /// Barrier height.
    pub b: f64,
    /// Range.
    pub r0: f64,
}

impl PotentialModel {
    pub fn new(kind: PotentialKind, d: f64, b: f64, r0: f64) -> Result<Self> {
        let m = PotentialModel { kind, d, b, r0 };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("D", self.d)?;
        ensure_finite("B", self.b)?;
        if !(self.r0 > 0.0 && self.r0.is_finite()) {
            return input(format!("r0 must be positive, got {}", self.r0));
        }
        if self.d < 0.0 || self.b < 0.0 {
            return input(format!("D and B must be non-negative, got D = {}, B = {}", self.d, self.b));
        }
        Ok(())
    }

    /// Shape multiplying `D`.
    pub(crate) fn well_shape(kind: PotentialKind, y: f64) -> f64 {
        match kind {
            PotentialKind::SechBarrier => {
                // sech² written with exp(-2y) so large y underflows cleanly.
                let e = (-2.0 * y).exp();
                -4.0 * e / (1.0 + e).powi(2)
            }
            PotentialKind::MorseBarrier => {
                let e = (-(y - 1.0)).exp();
                // (1 - e)² - 1 without the cancellation at large y.
                e * (e - 2.0)
            }
        }
    }

    /// Shape multiplying `B`.
    pub(crate) fn barrier_shape(y: f64) -> f64 {
        (-2.0 * (y - 2.0).powi(2)).exp()
    }

    pub(crate) fn value(&self, r: f64) -> f64 {
        let y = 3.0 * r / self.r0;
        self.d * Self::well_shape(self.kind, y) + self.b * Self::barrier_shape(y)
    }
}

/// Potential energy at separation `r ≥ 0`.
pub fn eval_potential(model: &PotentialModel, r: f64) -> Result<f64> {
    model.validate()?;
    if !(r >= 0.0) {
        return input(format!("r must be non-negative, got {r}"));
    }
    Ok(model.value(r))
}

/// Natural energy unit of a model, `9/(2μ2 r0²)`.
pub fn energy_scale(r0: f64, mu2: f64) -> f64 {
    9.0 / (2.0 * mu2 * r0 * r0)
}
