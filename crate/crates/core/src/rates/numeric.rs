//! Numeric single-channel model: free motion inside `α|r_eff|`, a `1/R²`
//! middle region up to `β|a|`, and a centrifugal tail outside. A complex
//! short-range scattering length at `r0` supplies the absorption.
//!
//! The radial equation `F'' = 2μ(W - E)F` is propagated as the log-derivative
//! `y = d ln g/dx` of `g = F/√R` in `x = ln R`, where it obeys
//! `y' = Q - y²` with `Q = 1/4 + 2μR²(W - E)`. Each region is integrated with
//! Johnson's log-derivative scheme on a uniform `x` grid whose end points are
//! the region boundaries, doubling the step count until the result settles.

use num_complex::Complex64;
use puruspe::besseljy;

use super::analytic::{NarrowSpec, ShortRangeParams};
use super::{hyperradial_mass, rate_from_probability, Middle, Process, Wave};
use crate::error::{ensure_positive, input, Error, Result};
use crate::numerics::{fit_line, log_space};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiecewiseChannel {
    pub r0: f64,
    /// Start of the middle region, `α|r_eff|`.
    pub r1: f64,
    /// Start of the outer region, `β|a|`.
    pub r2: f64,
    pub middle: Middle,
    pub wave: Wave,
    /// Asymptotic threshold: 0 for recombination, `-1/(2μ2 a²)` for relaxation.
    pub e_nu: f64,
    pub short_range: Complex64,
    /// Hyperradial reduced mass.
    pub mu: f64,
}

impl PiecewiseChannel {
    /// General constructor; `r1 == r2` (no middle region) is allowed.
    #[allow(clippy::too_many_arguments)]
    pub fn new(r0: f64, r1: f64, r2: f64, middle: Middle, wave: Wave, e_nu: f64, short_range: Complex64, mu: f64) -> Result<Self> {
        ensure_positive("r0", r0)?;
        ensure_positive("mu", mu)?;
        if !(r0 < r1 && r1 <= r2 && r2.is_finite()) {
            return input(format!("region radii must satisfy r0 < R1 <= R2, got {r0}, {r1}, {r2}"));
        }
        if !(short_range.re.is_finite() && short_range.im.is_finite()) {
            return input("short-range scattering length must be finite");
        }
        Ok(PiecewiseChannel { r0, r1, r2, middle, wave, e_nu, short_range, mu })
    }

    /// Hyperradial channel energy at `r` relative to the three-body threshold.
    pub fn potential(&self, r: f64) -> f64 {
        let c = 1.0 / (2.0 * self.mu * r * r);
        if r < self.r1 {
            self.e_nu
        } else if r < self.r2 {
            self.e_nu
                + match self.middle {
                    Middle::Efimov(s0) => -(s0 * s0 + 0.25) * c,
                    Middle::Barrier(p0) => (p0 * p0 - 0.25) * c,
                }
        } else {
            let l = self.wave.l();
            self.e_nu + l * (l + 1.0) * c
        }
    }

    /// Wavenumber `√(2μ(E - E_ν))`, the same in every region.
    pub fn wavenumber(&self, e: f64) -> Result<f64> {
        let t = 2.0 * self.mu * (e - self.e_nu);
        if !(t > 0.0) || !t.is_finite() {
            return input(format!("energy {e} must lie above the channel threshold {}", self.e_nu));
        }
        Ok(t.sqrt())
    }

    pub fn energy_at(&self, k: f64) -> f64 {
        self.e_nu + k * k / (2.0 * self.mu)
    }
}

/// Model channel for one process. The atom mass enters through `mu`
/// (hyperradial) and `mu2` (pair).
#[allow(clippy::too_many_arguments)]
pub fn build_channel(
    process: Process,
    a: f64,
    r_eff: f64,
    alpha: f64,
    beta: f64,
    short_range: ShortRangeParams,
    mu: f64,
    mu2: f64,
    r0: f64,
) -> Result<PiecewiseChannel> {
    ensure_positive("alpha", alpha)?;
    ensure_positive("beta", beta)?;
    ensure_positive("mu2", mu2)?;
    if !a.is_finite() || a == 0.0 {
        return input(format!("a must be finite and nonzero, got {a}"));
    }
    match process {
        Process::BosonRecomb if a > 0.0 => return input("recombination channel needs a < 0"),
        Process::BosonRelax | Process::FermionRelax if a < 0.0 => return input("relaxation channel needs a > 0"),
        _ => {}
    }
    let r1 = alpha * r_eff.abs();
    let r2 = beta * a.abs();
    if !(r0 < r1 && r1 < r2) {
        return input(format!("need r0 < alpha|r_eff| < beta|a|, got {r0}, {r1}, {r2}"));
    }
    let e_nu = if process.is_recombination() { 0.0 } else { -1.0 / (2.0 * mu2 * a * a) };
    PiecewiseChannel::new(
        r0,
        r1,
        r2,
        process.middle(),
        process.wave(),
        e_nu,
        Complex64::new(short_range.re, short_range.im),
        mu,
    )
}

/// Channel equivalent to a narrow-resonance spec, with `μ = m/√3` and `μ2 = m/2`.
pub fn channel_for_spec(process: Process, spec: &NarrowSpec) -> Result<PiecewiseChannel> {
    build_channel(
        process,
        spec.a,
        spec.r_eff,
        spec.alpha,
        spec.beta,
        spec.short_range,
        hyperradial_mass(spec.m),
        spec.m / 2.0,
        spec.r0,
    )
}

/// How the middle region is crossed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MiddleBasis {
    /// Closed-form zero-energy solutions when `(k·R2)² ≤ 1e-8·s²`, else numeric.
    Auto,
    Numeric,
    ZeroEnergy,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSpec {
    /// Relative change between successive step doublings at which a region is
    /// accepted; applied separately to the real and imaginary parts.
    pub rel_tol: f64,
    pub min_steps: usize,
    pub max_steps: usize,
    pub basis: MiddleBasis,
    /// Radius at which the outer solutions are matched; defaults to `R2`.
    pub match_radius: Option<f64>,
}

impl Default for StepSpec {
    fn default() -> Self {
        StepSpec { rel_tol: 1e-10, min_steps: 64, max_steps: 1 << 22, basis: MiddleBasis::Auto, match_radius: None }
    }
}

/// Log-derivative `F'/F` at `radius`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDerivative {
    pub value: Complex64,
    pub radius: f64,
    pub k: f64,
}

fn johnson<Q: Fn(f64) -> f64>(q: &Q, x0: f64, x1: f64, y0: Complex64, n: usize) -> Complex64 {
    let h = (x1 - x0) / n as f64;
    let mut y = y0 + h / 3.0 * q(x0);
    for i in 1..=n {
        let qi = q(x0 + h * i as f64);
        let (w, u) = if i == n {
            (1.0, qi)
        } else if i % 2 == 1 {
            (4.0, qi / (1.0 - h * h * qi / 6.0))
        } else {
            (2.0, qi)
        };
        y = y / (1.0 + h * y) + h / 3.0 * w * u;
    }
    y
}

fn settled(a: Complex64, b: Complex64, tol: f64) -> bool {
    let re_ok = (a.re - b.re).abs() <= tol * b.re.abs().max(1e-6);
    let im_ok = (a.im - b.im).abs() <= tol * b.im.abs() || a.im == b.im;
    re_ok && im_ok
}

fn region<Q: Fn(f64) -> f64>(q: Q, x0: f64, x1: f64, y0: Complex64, steps: &StepSpec) -> Result<Complex64> {
    if x1 <= x0 {
        return Ok(y0);
    }
    let stiff = q(x0).abs().max(q(x1).abs()).sqrt().max(1.0);
    let mut n = ((20.0 * (x1 - x0) * stiff).ceil() as usize).max(steps.min_steps);
    n += n % 2;
    let mut prev = johnson(&q, x0, x1, y0, n);
    while n < steps.max_steps {
        n *= 2;
        let cur = johnson(&q, x0, x1, y0, n);
        if !(cur.re.is_finite() && cur.im.is_finite()) {
            return Err(Error::Numerical(format!("log-derivative overflow on [{}, {}]", x0.exp(), x1.exp())));
        }
        if settled(prev, cur, steps.rel_tol) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Numerical(format!(
        "log-derivative did not settle to {} on [{}, {}] within {} steps",
        steps.rel_tol,
        x0.exp(),
        x1.exp(),
        steps.max_steps
    )))
}

/// Crosses the middle region with its exact zero-energy solutions.
fn middle_zero_energy(middle: Middle, y1: Complex64, width: f64) -> Complex64 {
    match middle {
        Middle::Efimov(s0) => {
            // g = cos(s0 x) + c·sin(s0 x)
            let c = y1 / s0;
            let (sn, cs) = (s0 * width).sin_cos();
            s0 * (c * cs - sn) / (c * sn + cs)
        }
        Middle::Barrier(p0) => {
            // g = e^{p x} + w·e^{-p x}, written with the decaying ratio only.
            let w = (p0 - y1) / (p0 + y1);
            let d = w * (-2.0 * p0 * width).exp();
            p0 * (1.0 - d) / (1.0 + d)
        }
    }
}

/// Propagates the regular solution from `r0` to the matching radius at energy `e`.
pub fn propagate(ch: &PiecewiseChannel, e: f64, steps: &StepSpec) -> Result<LogDerivative> {
    let k = ch.wavenumber(e)?;
    let rm = steps.match_radius.unwrap_or(ch.r2);
    if !(rm >= ch.r2) || !rm.is_finite() {
        return input(format!("matching radius {rm} must not lie inside R2 = {}", ch.r2));
    }
    let k2 = k * k;
    // F = sin(kR - A k) inside r1; its log-derivative seeds the propagation.
    let phase = Complex64::new(k * ch.r0, 0.0) - ch.short_range * k;
    let y0 = ch.r0 * k * phase.cos() / phase.sin() - 0.5;
    if !(y0.re.is_finite() && y0.im.is_finite()) {
        return Err(Error::Numerical("short-range boundary condition puts a node at r0".into()));
    }
    let (x0, x1, x2, xm) = (ch.r0.ln(), ch.r1.ln(), ch.r2.ln(), rm.ln());
    let y = region(|x| 0.25 - k2 * (2.0 * x).exp(), x0, x1, y0, steps)?;
    let s2 = match ch.middle {
        Middle::Efimov(s0) => -s0 * s0,
        Middle::Barrier(p0) => p0 * p0,
    };
    let use_closed = match steps.basis {
        MiddleBasis::ZeroEnergy => true,
        MiddleBasis::Numeric => false,
        MiddleBasis::Auto => k2 * ch.r2 * ch.r2 <= 1e-8 * s2.abs(),
    };
    let y = if use_closed {
        middle_zero_energy(ch.middle, y, x2 - x1)
    } else {
        region(|x| s2 - k2 * (2.0 * x).exp(), x1, x2, y, steps)?
    };
    let l = ch.wave.l();
    let y = region(|x| 0.25 + l * (l + 1.0) - k2 * (2.0 * x).exp(), x2, xm, y, steps)?;
    Ok(LogDerivative { value: (y + 0.5) / rm, radius: rm, k })
}

/// `√R·J_ν(kR)`, `√R·Y_ν(kR)` and their radial derivatives, `ν = l + 1/2`.
/// For `l = 0` the common factor `√(2/(πk))` is dropped.
pub fn outer_functions(wave: Wave, k: f64, r: f64) -> (f64, f64, f64, f64) {
    match wave {
        Wave::Zero => {
            let (s, c) = (k * r).sin_cos();
            (s, -c, k * c, k * s)
        }
        Wave::ThreeHalves => {
            let (j, y, jp, yp) = besseljy(wave.order(), k * r);
            let sr = r.sqrt();
            (sr * j, sr * y, j / (2.0 * sr) + sr * k * jp, y / (2.0 * sr) + sr * k * yp)
        }
    }
}

/// Complex `tan δ` from the log-derivative by matching onto
/// `√R[J_ν + tanδ·Y_ν]`.
pub fn extract_tandelta(logderiv: Complex64, wave: Wave, k: f64, r_match: f64) -> Result<Complex64> {
    ensure_positive("k", k)?;
    ensure_positive("R_match", r_match)?;
    let (fj, fy, dj, dy) = outer_functions(wave, k, r_match);
    let den = dy - logderiv * fy;
    if den.norm() == 0.0 || !den.norm().is_finite() {
        return Err(Error::Numerical(format!("singular matching at R = {r_match}")));
    }
    Ok((logderiv * fj - dj) / den)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterResult {
    pub tan_delta: Complex64,
    pub r_coeff: f64,
    pub one_minus_r: f64,
    pub k: f64,
}

impl ScatterResult {
    pub fn rate(&self, process: Process, mu: f64) -> f64 {
        rate_from_probability(process, self.one_minus_r, mu, self.k)
    }
}

/// Reflection coefficient `|(1 + i tanδ)/(1 - i tanδ)|²`. `1 - R` is formed
/// as `4 Im tanδ / |1 - i tanδ|²` so that tiny loss is not lost to rounding.
pub fn reflection(tan_delta: Complex64, k: f64) -> Result<ScatterResult> {
    let i = Complex64::i();
    let den = (1.0 - i * tan_delta).norm_sqr();
    if den == 0.0 {
        return Err(Error::Numerical("tan(delta) = -i: total absorption pole".into()));
    }
    if !den.is_finite() {
        return Err(Error::Numerical(format!("tan(delta) not finite: {tan_delta}")));
    }
    let r_coeff = (1.0 + i * tan_delta).norm_sqr() / den;
    let one_minus_r = 4.0 * tan_delta.im / den;
    Ok(ScatterResult { tan_delta, r_coeff, one_minus_r, k })
}

/// Full pipeline at wavenumber `k`.
pub fn scatter(ch: &PiecewiseChannel, k: f64, steps: &StepSpec) -> Result<ScatterResult> {
    ensure_positive("k", k)?;
    let ld = propagate(ch, ch.energy_at(k), steps)?;
    let t = extract_tandelta(ld.value, ch.wave, ld.k, ld.radius)?;
    reflection(t, ld.k)
}

/// Rate of `process` at wavenumber `k` from the numeric model built from `spec`.
pub fn numeric_rate(process: Process, spec: &NarrowSpec, k: f64, steps: &StepSpec) -> Result<f64> {
    let ch = channel_for_spec(process, spec)?;
    Ok(scatter(&ch, k, steps)?.rate(process, ch.mu))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdFit {
    pub exponent: f64,
    pub relative_rms: f64,
    pub samples: Vec<(f64, f64)>,
}

/// Relative rms of the log-log fit above which the scan is rejected.
pub const THRESHOLD_RESIDUAL_LIMIT: f64 = 1e-3;

/// Log-log slope of `1 - R` against `k`.
pub fn threshold_scan(ch: &PiecewiseChannel, k_list: &[f64], steps: &StepSpec) -> Result<ThresholdFit> {
    if k_list.len() < 4 {
        return input(format!("threshold scan needs at least 4 wavenumbers, got {}", k_list.len()));
    }
    let kmin = k_list.iter().cloned().fold(f64::INFINITY, f64::min);
    let kmax = k_list.iter().cloned().fold(0.0, f64::max);
    if !(kmin > 0.0) || kmax < 10.0 * kmin {
        return input("threshold scan needs positive wavenumbers spanning at least a decade");
    }
    let mut samples = Vec::with_capacity(k_list.len());
    for &k in k_list {
        let res = scatter(ch, k, steps)?;
        if !(res.one_minus_r > 0.0) {
            return Err(Error::Numerical(format!("no inelastic flux at k = {k}")));
        }
        samples.push((k, res.one_minus_r));
    }
    let lx: Vec<f64> = samples.iter().map(|s| s.0.ln()).collect();
    let ly: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
    let fit = fit_line(&lx, &ly)?;
    let rms = {
        let n = lx.len() as f64;
        let ss: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - fit.intercept - fit.slope * x).powi(2)).sum();
        (ss / n).sqrt()
    };
    if rms > THRESHOLD_RESIDUAL_LIMIT {
        return Err(Error::Numerical(format!("threshold fit residual {rms:.3e} exceeds {THRESHOLD_RESIDUAL_LIMIT}")));
    }
    Ok(ThresholdFit { exponent: fit.slope, relative_rms: rms, samples })
}

/// `n` wavenumbers log-spaced so that `k·R2` runs over `[lo, hi]`.
pub fn threshold_grid(ch: &PiecewiseChannel, lo: f64, hi: f64, n: usize) -> Vec<f64> {
    log_space(lo / ch.r2, hi / ch.r2, n)
}
