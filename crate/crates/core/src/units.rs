//! Physical constants and the handful of conversions into Hartree atomic units.
//!
//! Everything downstream works in atomic units; conversions happen only at the
//! catalog and CLI boundary.

use crate::error::{ensure_finite, ensure_positive, Result};

/// Electron masses per unified atomic mass unit (CODATA 2018).
pub const AMU_IN_ELECTRON_MASSES: f64 = 1822.888486209;
/// Bohr magneton in atomic units (e hbar / 2 m_e).
pub const BOHR_MAGNETON_AU: f64 = 0.5;
/// Atomic unit of magnetic flux density in tesla (CODATA 2018).
pub const TESLA_PER_AU_FIELD: f64 = 2.35051756758e5;
/// One gauss expressed in atomic units of field.
pub const GAUSS_IN_AU_FIELD: f64 = 1e-4 / TESLA_PER_AU_FIELD;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub amu_in_electron_masses: f64,
    pub bohr_magneton_au: f64,
    pub gauss_in_au_field: f64,
}

pub const CODATA: PhysicalConstants = PhysicalConstants {
    amu_in_electron_masses: AMU_IN_ELECTRON_MASSES,
    bohr_magneton_au: BOHR_MAGNETON_AU,
    gauss_in_au_field: GAUSS_IN_AU_FIELD,
};

impl Default for PhysicalConstants {
    fn default() -> Self {
        CODATA
    }
}

impl PhysicalConstants {
    /// Rejects any constant that is not strictly positive and finite.
    pub fn validate(&self) -> Result<()> {
        ensure_positive("amu_in_electron_masses", self.amu_in_electron_masses)?;
        ensure_positive("bohr_magneton_au", self.bohr_magneton_au)?;
        ensure_positive("gauss_in_au_field", self.gauss_in_au_field)?;
        Ok(())
    }

    pub fn amu_to_au(&self, mass_amu: f64) -> Result<f64> {
        ensure_positive("mass_amu", mass_amu)?;
        Ok(mass_amu * self.amu_in_electron_masses)
    }

    pub fn au_to_amu(&self, mass_au: f64) -> Result<f64> {
        ensure_positive("mass_au", mass_au)?;
        Ok(mass_au / self.amu_in_electron_masses)
    }

    pub fn gauss_to_au(&self, field_gauss: f64) -> Result<f64> {
        Ok(ensure_finite("field_gauss", field_gauss)? * self.gauss_in_au_field)
    }

    pub fn au_to_gauss(&self, field_au: f64) -> Result<f64> {
        Ok(ensure_finite("field_au", field_au)? / self.gauss_in_au_field)
    }

    /// Zeeman energy scale of a moment difference (in Bohr magnetons) times a
    /// field width (in gauss). Signs are kept; callers take magnitudes.
    pub fn moment_field_product_to_au(&self, delta_mu_in_mub: f64, delta_b_gauss: f64) -> Result<f64> {
        ensure_finite("delta_mu", delta_mu_in_mub)?;
        ensure_finite("delta_B", delta_b_gauss)?;
        Ok(delta_mu_in_mub * self.bohr_magneton_au * delta_b_gauss * self.gauss_in_au_field)
    }
}

pub fn amu_to_au(mass_amu: f64) -> Result<f64> {
    CODATA.amu_to_au(mass_amu)
}

pub fn moment_field_product_to_au(delta_mu_in_mub: f64, delta_b_gauss: f64) -> Result<f64> {
    CODATA.moment_field_product_to_au(delta_mu_in_mub, delta_b_gauss)
}
