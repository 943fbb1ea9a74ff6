//! Zero-range model of three identical bosons with an energy-dependent
//! two-body boundary condition.
//!
//! The channel exponent is handled through the real variable `x = s²`:
//! `x > 0` is the attractive (Efimov) side with `U = -(s² + 1/4)/(2μR²)`,
//! `x < 0` is the repulsive side where `s = i·σ`. The transcendental function
//! is continued analytically so no complex arithmetic is needed.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

use crate::error::{ensure_finite, ensure_positive, input, Error, Result};
use crate::numerics::{brent, log_space, Tolerance};

/// Universal exponent of the repulsive barrier seen by two identical fermions
/// and a third atom. Pinned rather than solved.
pub const P0: f64 = 2.166;

const EIGHT_OVER_SQRT3: f64 = 4.618802153517006;

fn twelve_quarter() -> f64 {
    12f64.powf(0.25)
}

/// Left-hand side of the zero-range condition, divided by `sinh(πs/2)` so that
/// it is single valued and monotone in `x = s²` on `(-4, ∞)`.
pub fn transcendental(x: f64) -> f64 {
    if x == 0.0 {
        return 2.0 / PI - EIGHT_OVER_SQRT3 / 3.0;
    }
    if x > 0.0 {
        let s = x.sqrt();
        let a = PI * s / 6.0;
        let b = PI * s / 2.0;
        // coth(b) and sinh(a)/sinh(b) written with decaying exponentials so
        // large s cannot overflow.
        let e2b = (-2.0 * b).exp();
        let coth = (1.0 + e2b) / (1.0 - e2b);
        let ratio = if b < 1.0 { a.sinh() / b.sinh() } else { (a - b).exp() * (-(-2.0 * a).exp_m1()) / (-(-2.0 * b).exp_m1()) };
        s * coth - EIGHT_OVER_SQRT3 * ratio
    } else {
        let sigma = (-x).sqrt();
        let b = FRAC_PI_2 * sigma;
        (sigma * b.cos() - EIGHT_OVER_SQRT3 * (PI * sigma / 6.0).sin()) / b.sin()
    }
}

fn efimov_equation(s: f64) -> f64 {
    s * (FRAC_PI_2 * s).cosh() - EIGHT_OVER_SQRT3 * (PI * s / 6.0).sinh()
}

/// Root of `s·cosh(πs/2) = (8/√3)·sinh(πs/6)` near 1, i.e. the unitarity-limit
/// Efimov exponent `s0 ≈ 1.00624`.
pub fn efimov_root_unitarity() -> f64 {
    static S0: OnceLock<f64> = OnceLock::new();
    *S0.get_or_init(|| {
        brent(efimov_equation, 0.9, 1.1, Tolerance { abs: 0.0, rel: 1e-16, max_iter: 200 })
            .expect("Efimov root is bracketed by [0.9, 1.1]")
    })
}

/// Signed squared channel exponent at one hyperradius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelExponent {
    pub r: f64,
    pub s_squared: f64,
}

/// Two-body input of the zero-range model: inverse scattering length (0 at
/// unitarity) and a non-positive effective range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZrpParams {
    pub inv_a: f64,
    pub r_eff: f64,
}

impl ZrpParams {
    pub fn unitarity(r_eff: f64) -> Self {
        ZrpParams { inv_a: 0.0, r_eff }
    }

    pub fn with_a(a: f64, r_eff: f64) -> Result<Self> {
        if a == 0.0 || !a.is_finite() {
            return input(format!("scattering length must be finite and nonzero, got {a}"));
        }
        Ok(ZrpParams { inv_a: 1.0 / a, r_eff })
    }

    fn validate(&self) -> Result<()> {
        ensure_finite("1/a", self.inv_a)?;
        ensure_finite("r_eff", self.r_eff)?;
        if self.r_eff > 0.0 {
            return input(format!("zero-range model needs r_eff <= 0, got {}", self.r_eff));
        }
        Ok(())
    }
}

/// Solves the zero-range condition for `s²` at hyperradius `r` on the lowest
/// branch. The residual is strictly increasing in `s²` above `-4`, so the root
/// there is unique and continuous in `r`.
pub fn solve_s_at(r: f64, p: ZrpParams) -> Result<ChannelExponent> {
    ensure_positive("R", r)?;
    p.validate()?;
    let c = 1.0 / twelve_quarter();
    let offset = c * 2.0 * r * p.inv_a;
    let slope = c * p.r_eff / r;
    let g = |x: f64| transcendental(x) - offset - slope * x;

    // Lower end: g → -∞ as x → -4⁺; step in geometrically.
    let mut lo = -1.0;
    let mut gap = 3.0;
    while g(lo) > 0.0 {
        gap *= 0.5;
        lo = -4.0 + gap;
        if gap < 1e-300 {
            return Err(Error::Numerical(format!("no lower bracket for s² at R = {r}")));
        }
    }
    let mut hi = 1.0f64.max(offset.abs().powi(2));
    let mut tries = 0;
    while g(hi) < 0.0 {
        hi *= 4.0;
        tries += 1;
        if tries > 200 || !hi.is_finite() {
            return Err(Error::Numerical(format!("no upper bracket for s² on [{lo}, {hi}] at R = {r}")));
        }
    }
    let x = brent(g, lo, hi, Tolerance { abs: 1e-15, rel: 1e-14, max_iter: 300 })?;
    Ok(ChannelExponent { r, s_squared: x })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZrpPotentialPoint {
    pub r: f64,
    pub s_squared: f64,
    pub u: f64,
    /// Diagonal channel potential; equals `u` because the diagonal correction
    /// is of higher order in `1/R` in this model.
    pub w00: f64,
}

impl ZrpPotentialPoint {
    /// `2μR²·W00`, the scale-free form of the potential.
    pub fn reduced(&self, mu: f64) -> f64 {
        2.0 * mu * self.r * self.r * self.w00
    }
}

pub fn zrp_potentials(r: f64, p: ZrpParams, mu: f64) -> Result<ZrpPotentialPoint> {
    ensure_positive("mu", mu)?;
    let ce = solve_s_at(r, p)?;
    let u = -(ce.s_squared + 0.25) / (2.0 * mu * r * r);
    Ok(ZrpPotentialPoint { r, s_squared: ce.s_squared, u, w00: u })
}

/// Potentials along a hyperradius grid. The grid must be strictly monotone.
pub fn zrp_curve(grid: &[f64], p: ZrpParams, mu: f64) -> Result<Vec<ZrpPotentialPoint>> {
    let increasing = grid.windows(2).all(|w| w[1] > w[0]);
    let decreasing = grid.windows(2).all(|w| w[1] < w[0]);
    if !(increasing || decreasing) {
        return input("hyperradius grid must be strictly monotone");
    }
    grid.iter().map(|&r| zrp_potentials(r, p, mu)).collect()
}

/// Asymptotic small-R coefficient at unitarity: `2μR²W00 + 1/4 ≈ -c0·R/|r_eff|`
/// for `R ≪ |r_eff|`. Closed form from the slope of the transcendental function.
pub fn c0_limit() -> f64 {
    -twelve_quarter() * transcendental(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct C0Fit {
    pub c0: f64,
    pub residual: f64,
    pub window: (f64, f64),
}

/// Relative rms above which a c0 fit window is considered outside the
/// linear regime.
pub const C0_RESIDUAL_LIMIT: f64 = 0.05;

/// Fits `2μR²W00 + 1/4 = -c0·R/|r_eff|` through the origin over
/// `window = (R_lo, R_hi)` at unitarity.
pub fn fit_c0(r_eff: f64, window: (f64, f64)) -> Result<C0Fit> {
    if !(r_eff < 0.0) || !r_eff.is_finite() {
        return input(format!("c0 fit needs a negative effective range, got {r_eff}"));
    }
    let (lo, hi) = window;
    ensure_positive("R_lo", lo)?;
    if !(hi > lo) || !hi.is_finite() {
        return input(format!("fit window must satisfy 0 < R_lo < R_hi, got ({lo}, {hi})"));
    }
    let p = ZrpParams::unitarity(r_eff);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut pts = Vec::new();
    for r in log_space(lo, hi, 41) {
        // μ cancels in 2μR²W00; use μ = 1.
        let y = zrp_potentials(r, p, 1.0)?.reduced(1.0) + 0.25;
        let x = r / r_eff.abs();
        sxy += x * (-y);
        sxx += x * x;
        pts.push((x, -y));
    }
    let c0 = sxy / sxx;
    let ss: f64 = pts.iter().map(|(x, y)| (y - c0 * x).powi(2)).sum();
    let yy: f64 = pts.iter().map(|(_, y)| y * y).sum();
    let residual = (ss / yy).sqrt();
    if residual > C0_RESIDUAL_LIMIT {
        return Err(Error::Regime(format!(
            "c0 fit residual {residual:.3e} exceeds {C0_RESIDUAL_LIMIT}; window ({lo}, {hi}) is not in R << |r_eff|"
        )));
    }
    Ok(C0Fit { c0, residual, window })
}

/// Default window `[1e-3, 1e-2]·|r_eff|`.
pub fn default_c0_window(r_eff: f64) -> (f64, f64) {
    (1e-3 * r_eff.abs(), 1e-2 * r_eff.abs())
}

/// Lowest free-particle channel potentials `[λ(λ+4) + 15/4]/(2μR²)`.
pub fn free_channel_potential(lambda: i64, r: f64, mu: f64) -> Result<f64> {
    if lambda < 0 {
        return input(format!("lambda must be non-negative, got {lambda}"));
    }
    ensure_positive("R", r)?;
    ensure_positive("mu", mu)?;
    let l = lambda as f64;
    Ok((l * (l + 4.0) + 3.75) / (2.0 * mu * r * r))
}
