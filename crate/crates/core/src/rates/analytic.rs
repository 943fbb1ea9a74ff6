//! Closed-form rates for broad and narrow resonances and the low-energy
//! inelastic probability of the piecewise hyperradial model.

use std::f64::consts::PI;

use puruspe::gamma;

use super::{Middle, Process, Wave};
use crate::error::{ensure_finite, ensure_positive, input, Error, Result};

/// Complex short-range three-body scattering length. `im` is the magnitude of
/// the absorptive part and is never negative.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ShortRangeParams {
    pub re: f64,
    pub im: f64,
}

impl ShortRangeParams {
    pub fn new(re: f64, im: f64) -> Result<Self> {
        ensure_finite("Re A", re)?;
        ensure_finite("Im A", im)?;
        if im < 0.0 {
            return input(format!("Im A is stored as a non-negative loss strength, got {im}"));
        }
        Ok(ShortRangeParams { re, im })
    }
}

/// Short-range phase and inelasticity of the broad-resonance formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BroadParams {
    pub phi: f64,
    pub eta: f64,
}

impl BroadParams {
    pub fn new(phi: f64, eta: f64) -> Result<Self> {
        ensure_finite("Phi", phi)?;
        ensure_finite("eta", eta)?;
        if eta < 0.0 {
            return input(format!("eta must be non-negative, got {eta}"));
        }
        Ok(BroadParams { phi, eta })
    }
}

/// Scale-separation requirements for the narrow formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeGuard {
    /// Minimum ratio for each of `α|r_eff|/r0` and `β|a|/(α|r_eff|)`.
    pub min_ratio: f64,
    /// Largest allowed `k·β|a|`.
    pub max_k_reach: f64,
    /// When false, violations are reported by [`NarrowSpec::in_regime`] but
    /// not raised as errors.
    pub enforce: bool,
}

impl Default for RegimeGuard {
    fn default() -> Self {
        RegimeGuard { min_ratio: 10.0, max_k_reach: 0.1, enforce: true }
    }
}

/// Everything needed to evaluate one narrow-resonance rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NarrowSpec {
    pub a: f64,
    pub r_eff: f64,
    pub alpha: f64,
    pub beta: f64,
    pub short_range: ShortRangeParams,
    pub wave: Wave,
    pub middle: Middle,
    /// Atom mass.
    pub m: f64,
    /// Short-range length scale of the interaction.
    pub r0: f64,
    pub guard: RegimeGuard,
}

impl NarrowSpec {
    /// Spec with the angular momentum and middle-region exponent implied by
    /// the process.
    #[allow(clippy::too_many_arguments)]
    pub fn for_process(
        process: Process,
        a: f64,
        r_eff: f64,
        alpha: f64,
        beta: f64,
        short_range: ShortRangeParams,
        m: f64,
        r0: f64,
    ) -> Result<Self> {
        let spec = NarrowSpec {
            a,
            r_eff,
            alpha,
            beta,
            short_range,
            wave: process.wave(),
            middle: process.middle(),
            m,
            r0,
            guard: RegimeGuard::default(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("a", self.a)?;
        if self.a == 0.0 {
            return input("a must be nonzero");
        }
        if !(self.r_eff < 0.0) || !self.r_eff.is_finite() {
            return input(format!("narrow formulas need r_eff < 0, got {}", self.r_eff));
        }
        ensure_positive("alpha", self.alpha)?;
        ensure_positive("beta", self.beta)?;
        ensure_positive("m", self.m)?;
        ensure_positive("r0", self.r0)?;
        Ok(())
    }

    pub fn inner_radius(&self) -> f64 {
        self.alpha * self.r_eff.abs()
    }

    pub fn outer_radius(&self) -> f64 {
        self.beta * self.a.abs()
    }

    /// True when `r0 ≪ α|r_eff| ≪ β|a|` holds with the guard's ratio.
    pub fn in_regime(&self) -> bool {
        let g = self.guard.min_ratio;
        self.inner_radius() >= g * self.r0 && self.outer_radius() >= g * self.inner_radius()
    }

    pub fn k_in_regime(&self, k: f64) -> bool {
        k * self.outer_radius() <= self.guard.max_k_reach
    }

    fn check_regime(&self) -> Result<()> {
        if self.guard.enforce && !self.in_regime() {
            return Err(Error::Regime(format!(
                "need r0 << alpha|r_eff| << beta|a| by a factor {}: r0 = {}, alpha|r_eff| = {}, beta|a| = {}",
                self.guard.min_ratio,
                self.r0,
                self.inner_radius(),
                self.outer_radius()
            )));
        }
        Ok(())
    }

    fn efimov_s0(&self) -> Result<f64> {
        match self.middle {
            Middle::Efimov(s0) => Ok(s0),
            Middle::Barrier(_) => input("formula needs an attractive middle region"),
        }
    }

    /// Phase pieces of the narrow boson formulas.
    pub fn phases(&self) -> Result<NarrowPhases> {
        let s0 = self.efimov_s0()?;
        let phi0_outer = phi0(self.wave, s0);
        let phi0_inner = phi0(Wave::Zero, s0);
        let big_phi = phi_narrow(self.short_range, self.r_eff, self.alpha, s0)?;
        let eta = eta_narrow(self.short_range, self.r_eff, self.alpha, phi0_inner, big_phi);
        let vphi = varphi(self.alpha, self.beta, s0, phi0_outer);
        let argument = s0 * (self.a / self.r_eff).abs().ln() + big_phi + vphi;
        Ok(NarrowPhases { phi0: phi0_outer, big_phi, eta, varphi: vphi, argument })
    }

    /// `sin2φ0·sinh2η / (sin²[…] + sinh²η)`, shared by all narrow boson rates.
    fn resonance_factor(&self) -> Result<f64> {
        let p = self.phases()?;
        let sh = p.eta.sinh();
        let num = (2.0 * p.phi0).sin() * (2.0 * p.eta).sinh();
        let den = p.argument.sin().powi(2) + sh * sh;
        Ok(if num == 0.0 { 0.0 } else { num / den })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NarrowPhases {
    pub phi0: f64,
    pub big_phi: f64,
    pub eta: f64,
    pub varphi: f64,
    /// `s0·ln|a/r_eff| + Φ + φ`; rate maxima sit where this is a multiple of π.
    pub argument: f64,
}

/// `arctan(s0/(l + 1/2))`.
pub fn phi0(wave: Wave, s0: f64) -> f64 {
    (s0 / (wave.l() + 0.5)).atan()
}

/// Short-range phase: `tanΦ = 2s0·(α - ReA/|r|)/(α + ReA/|r|)`, principal branch.
pub fn phi_narrow(a: ShortRangeParams, r_eff: f64, alpha: f64, s0: f64) -> Result<f64> {
    let x = a.re / r_eff.abs();
    let den = alpha + x;
    if den == 0.0 {
        return Err(Error::Numerical(
            "Re A = -alpha|r_eff| puts tan(Phi) on its pole (Phi = pi/2 branch boundary)".into(),
        ));
    }
    Ok((2.0 * s0 * (alpha - x) / den).atan())
}

/// `sinh η = |ImA/(α r)|·csc(2φ0)·sin²(Φ + φ0)`.
pub fn eta_narrow(a: ShortRangeParams, r_eff: f64, alpha: f64, phi0: f64, big_phi: f64) -> f64 {
    let s = (a.im / (alpha * r_eff)).abs() / (2.0 * phi0).sin() * (big_phi + phi0).sin().powi(2);
    s.asinh()
}

/// `s0·ln(β/α) + φ0`.
pub fn varphi(alpha: f64, beta: f64, s0: f64, phi0: f64) -> f64 {
    s0 * (beta / alpha).ln() + phi0
}

/// Low-energy inelastic probability of the piecewise model for an attractive
/// middle region.
pub fn inelastic_probability(k: f64, spec: &NarrowSpec) -> Result<f64> {
    ensure_positive("k", k)?;
    spec.validate()?;
    spec.check_regime()?;
    if spec.guard.enforce && !spec.k_in_regime(k) {
        return Err(Error::Regime(format!(
            "k*beta|a| = {} exceeds {}",
            k * spec.outer_radius(),
            spec.guard.max_k_reach
        )));
    }
    let l = spec.wave.l();
    let pref = 2.0 * PI / (gamma(l + 1.5) * gamma(l + 0.5));
    let p = pref * (0.5 * k * spec.outer_radius()).powf(2.0 * l + 1.0) * spec.resonance_factor()?;
    if p > 1.0 {
        return Err(Error::Regime(format!("inelastic probability {p} exceeds 1")));
    }
    Ok(p)
}

fn require(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        input(msg.to_string())
    }
}

/// Atom–dimer relaxation rate for identical bosons near a narrow resonance.
pub fn vrel_boson_narrow(spec: &NarrowSpec) -> Result<f64> {
    spec.validate()?;
    require(spec.a > 0.0, "boson relaxation needs a > 0")?;
    require(spec.wave == Wave::Zero, "boson relaxation uses l = 0")?;
    spec.check_regime()?;
    let f = spec.resonance_factor()?;
    Ok(2.0 * 3f64.sqrt() * PI * spec.beta * f * spec.a / spec.m)
}

/// Three-body recombination rate for identical bosons, `a < 0`, near a narrow
/// resonance.
pub fn k3_neg_a_narrow(spec: &NarrowSpec) -> Result<f64> {
    spec.validate()?;
    require(spec.a < 0.0, "recombination formula needs a < 0")?;
    require(spec.wave == Wave::ThreeHalves, "recombination uses l = 3/2")?;
    spec.check_regime()?;
    let f = spec.resonance_factor()?;
    Ok(12.0 * 3f64.sqrt() * PI.powi(3) * spec.beta.powi(4) * f * spec.a.powi(4) / spec.m)
}

/// Relaxation rate for two-component fermions near a narrow resonance.
pub fn vrel_fermion_narrow(spec: &NarrowSpec) -> Result<f64> {
    spec.validate()?;
    require(spec.a > 0.0, "fermion relaxation needs a > 0")?;
    let p0 = match spec.middle {
        Middle::Barrier(p0) => p0,
        Middle::Efimov(_) => return input("fermion relaxation needs a repulsive middle region"),
    };
    spec.check_regime()?;
    let inner = spec.inner_radius();
    let x = spec.short_range.re / inner;
    let den = ((1.0 - 4.0 * p0 * p0) * x * x + (2.0 * p0 + 1.0).powi(2)).powi(2);
    let scale = (spec.outer_radius() / inner).powf(1.0 - 2.0 * p0);
    Ok(256.0 * PI * 3f64.sqrt() * p0 * p0 * spec.short_range.im / spec.m / den * scale)
}

/// Narrow rate for any process.
pub fn narrow_rate(process: Process, spec: &NarrowSpec) -> Result<f64> {
    match process {
        Process::BosonRecomb => k3_neg_a_narrow(spec),
        Process::BosonRelax => vrel_boson_narrow(spec),
        Process::FermionRelax => vrel_fermion_narrow(spec),
    }
}

/// Phase offsets of the broad-resonance formulas.
pub const BROAD_RECOMB_OFFSET: f64 = 1.53;
pub const BROAD_RELAX_OFFSET: f64 = 1.47;

fn broad_check(a: f64, r0: f64, m: f64, sign_ok: bool, what: &str) -> Result<()> {
    ensure_finite("a", a)?;
    ensure_positive("r0", r0)?;
    ensure_positive("m", m)?;
    require(sign_ok, what)?;
    if a.abs() < 10.0 * r0 {
        return Err(Error::Regime(format!("broad formulas need |a| >= 10 r0, got |a|/r0 = {}", a.abs() / r0)));
    }
    Ok(())
}

/// Broad-resonance recombination for `a > 0`.
pub fn k3_broad_pos(a: f64, r0: f64, p: BroadParams, m: f64, s0: f64) -> Result<f64> {
    broad_check(a, r0, m, a > 0.0, "needs a > 0")?;
    let arg = s0 * (a / r0).ln() + p.phi;
    Ok(67.1 * (-2.0 * p.eta).exp() * (arg.sin().powi(2) + p.eta.sinh().powi(2)) * a.powi(4) / m)
}

/// Broad-resonance recombination for `a < 0`.
pub fn k3_broad_neg(a: f64, r0: f64, p: BroadParams, m: f64, s0: f64) -> Result<f64> {
    broad_check(a, r0, m, a < 0.0, "needs a < 0")?;
    let arg = s0 * (a.abs() / r0).ln() + p.phi + BROAD_RECOMB_OFFSET;
    Ok(resonant(4590.0, arg, p.eta) * a.powi(4) / m)
}

/// Broad-resonance atom–dimer relaxation for `a > 0`.
pub fn vrel_broad(a: f64, r0: f64, p: BroadParams, m: f64, s0: f64) -> Result<f64> {
    broad_check(a, r0, m, a > 0.0, "needs a > 0")?;
    let arg = s0 * (a / r0).ln() + p.phi + BROAD_RELAX_OFFSET;
    Ok(resonant(20.3, arg, p.eta) * a / m)
}

fn resonant(c: f64, arg: f64, eta: f64) -> f64 {
    if eta == 0.0 {
        return 0.0;
    }
    c * (2.0 * eta).sinh() / (arg.sin().powi(2) + eta.sinh().powi(2))
}
