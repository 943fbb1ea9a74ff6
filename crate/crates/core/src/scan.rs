//! Rate scans over `a` at fixed `r_eff`, peak location, and fits of the
//! region-boundary factors `α`, `β` to the peak positions.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{ensure_positive, input, Error, Result};
use crate::numerics::{fit_line, golden_min};
use crate::rates::analytic::{narrow_rate, phi0, phi_narrow, NarrowSpec, RegimeGuard, ShortRangeParams};
use crate::rates::numeric::{channel_for_spec, scatter, StepSpec};
use crate::rates::{Middle, Process, Wave};
use crate::zrp::efimov_root_unitarity;
use std::f64::consts::PI;

/// `k·β|a|` used when no wavenumber is given.
pub const AUTO_K_REACH: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Analytic,
    Numeric,
    Both,
}

impl std::str::FromStr for Engine {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(Engine::Analytic),
            "numeric" => Ok(Engine::Numeric),
            "both" => Ok(Engine::Both),
            _ => input(format!("unknown engine {s:?} (analytic, numeric, both)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanSpec {
    pub process: Process,
    /// Strictly monotone, with the sign the process requires.
    pub a_grid: Vec<f64>,
    pub r_eff: f64,
    pub alpha: f64,
    pub beta: f64,
    pub short_range: ShortRangeParams,
    pub m: f64,
    pub r0: f64,
    /// Fixed wavenumber; `None` picks `k·β|a| = AUTO_K_REACH` per point.
    pub k: Option<f64>,
    pub guard: RegimeGuard,
    pub steps: StepSpec,
}

impl ScanSpec {
    pub fn validate(&self) -> Result<()> {
        if self.a_grid.is_empty() {
            return input("empty a grid");
        }
        let up = self.a_grid.windows(2).all(|w| w[1] > w[0]);
        let down = self.a_grid.windows(2).all(|w| w[1] < w[0]);
        if !(up || down) {
            return input("a grid must be strictly monotone");
        }
        let want_negative = self.process.is_recombination();
        if let Some(a) = self.a_grid.iter().find(|&&a| !a.is_finite() || (a < 0.0) != want_negative || a == 0.0) {
            return input(format!("a = {a} has the wrong sign or is not finite for {}", self.process.name()));
        }
        if let Some(k) = self.k {
            ensure_positive("k", k)?;
        }
        self.spec_at(self.a_grid[0])?.validate()
    }

    fn spec_at(&self, a: f64) -> Result<NarrowSpec> {
        let mut s = NarrowSpec::for_process(self.process, a, self.r_eff, self.alpha, self.beta, self.short_range, self.m, self.r0)?;
        s.guard = RegimeGuard { enforce: false, ..self.guard };
        Ok(s)
    }
}

/// One point of a scan. Rates are `K3` for recombination and `V_rel` for
/// relaxation, in atomic units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRow {
    pub a: f64,
    pub a_over_reff: f64,
    pub k: f64,
    pub analytic: Option<f64>,
    pub numeric: Option<f64>,
    pub scaled_analytic: Option<f64>,
    pub scaled_numeric: Option<f64>,
    /// `|numeric - analytic| / max(|numeric|, |analytic|)`.
    pub discrepancy: Option<f64>,
    /// Scale separation and `k·β|a|` both within the guard.
    pub in_regime: bool,
}

/// Rate with the leading `a` and `r_eff` dependence divided out:
/// `K3|r_eff|/a⁴`, `V|r_eff|/a`, and `V·(a/|r_eff|)^(2p0-1)` for fermions.
pub fn scaled_rate(process: Process, middle: Middle, rate: f64, a: f64, r_eff: f64) -> f64 {
    let r = r_eff.abs();
    match (process, middle) {
        (Process::BosonRecomb, _) => rate * r / a.powi(4),
        (Process::FermionRelax, Middle::Barrier(p0)) => rate * (a.abs() / r).powf(2.0 * p0 - 1.0),
        _ => rate * r / a.abs(),
    }
}

fn relative_gap(x: f64, y: f64) -> f64 {
    let s = x.abs().max(y.abs());
    if s == 0.0 {
        0.0
    } else {
        (x - y).abs() / s
    }
}

fn row(spec: &ScanSpec, engine: Engine, a: f64) -> Result<ScanRow> {
    let ns = spec.spec_at(a)?;
    let k = spec.k.unwrap_or(AUTO_K_REACH / ns.outer_radius());
    let in_regime = ns.in_regime() && ns.k_in_regime(k);
    let analytic = match engine {
        Engine::Numeric => None,
        _ => Some(narrow_rate(spec.process, &ns)?),
    };
    let numeric = match engine {
        Engine::Analytic => None,
        // A channel whose regions are out of order has no numeric model.
        _ => match channel_for_spec(spec.process, &ns) {
            Ok(ch) => Some(scatter(&ch, k, &spec.steps)?.rate(spec.process, ch.mu)),
            Err(Error::Input(_)) if !in_regime => None,
            Err(e) => return Err(e),
        },
    };
    let scale = |v: Option<f64>| v.map(|v| scaled_rate(spec.process, ns.middle, v, a, spec.r_eff));
    let discrepancy = match (analytic, numeric) {
        (Some(x), Some(y)) => Some(relative_gap(x, y)),
        _ => None,
    };
    Ok(ScanRow {
        a,
        a_over_reff: (a / spec.r_eff).abs(),
        k,
        analytic,
        numeric,
        scaled_analytic: scale(analytic),
        scaled_numeric: scale(numeric),
        discrepancy,
        in_regime,
    })
}

/// Evaluates the scan in parallel; rows come back in grid order.
pub fn run_scan(spec: &ScanSpec, engine: Engine) -> Result<Vec<ScanRow>> {
    spec.validate()?;
    spec.a_grid.par_iter().map(|&a| row(spec, engine, a)).collect()
}

/// Position of a rate maximum from three samples around it. Near a peak the
/// scaled boson rates go as `1/(sin²(x - x_p) + sinh²η)`, so the reciprocal
/// is `c0 + c1·cos 2x + c2·sin 2x` and three points fix `x_p` exactly.
pub fn peak_from_three(x: [f64; 3], y: [f64; 3]) -> Result<f64> {
    if y.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::Numerical("peak interpolation needs positive rates".into()));
    }
    // Work relative to the middle point for conditioning.
    let x1 = x[1];
    let rows: Vec<[f64; 4]> = (0..3)
        .map(|i| {
            let u = 2.0 * (x[i] - x1);
            [1.0, u.cos(), u.sin(), 1.0 / y[i]]
        })
        .collect();
    let sol = solve3([rows[0], rows[1], rows[2]])
        .ok_or_else(|| Error::Numerical("degenerate peak interpolation".into()))?;
    // 1/y = c0 - B cos(2(x - x_p)): minimum of 1/y where the cosine term peaks.
    let theta = (-sol[2]).atan2(-sol[1]);
    let mut xp = x1 + 0.5 * theta;
    // Nearest copy of the period-π pattern to the sampled maximum.
    xp -= PI * ((xp - x1) / PI).round();
    Ok(xp)
}

fn solve3(mut m: [[f64; 4]; 3]) -> Option<[f64; 3]> {
    for c in 0..3 {
        let p = (c..3).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))?;
        if m[p][c] == 0.0 {
            return None;
        }
        m.swap(c, p);
        for r in 0..3 {
            if r != c {
                let f = m[r][c] / m[c][c];
                let pivot = m[c];
                for (dst, src) in m[r][c..].iter_mut().zip(&pivot[c..]) {
                    *dst -= f * src;
                }
            }
        }
    }
    Some([m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]])
}

/// Interior local maxima of `y(x)`, refined by [`peak_from_three`].
pub fn find_peaks(x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    if x.len() != y.len() {
        return input("peak search needs matching x and y");
    }
    let mut out = Vec::new();
    for i in 1..x.len().saturating_sub(1) {
        if y[i] > y[i - 1] && y[i] >= y[i + 1] {
            out.push(peak_from_three([x[i - 1], x[i], x[i + 1]], [y[i - 1], y[i], y[i + 1]])?);
        }
    }
    if x.first() > x.last() {
        out.reverse();
    }
    Ok(out)
}

/// Peak positions in `s0·ln|a/r_eff|` along a boson scan, from the numeric
/// rates when present and the analytic ones otherwise.
pub fn scan_peaks(rows: &[ScanRow]) -> Result<Vec<f64>> {
    let s0 = efimov_root_unitarity();
    let x: Vec<f64> = rows.iter().map(|r| s0 * r.a_over_reff.ln()).collect();
    let y: Vec<f64> = rows
        .iter()
        .map(|r| r.scaled_numeric.or(r.scaled_analytic).ok_or_else(|| Error::Input("scan row without a rate".into())))
        .collect::<Result<_>>()?;
    find_peaks(&x, &y)
}

/// Peaks of one scan at a given `r_eff`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeakCurve {
    pub r_eff: f64,
    pub peaks: Vec<f64>,
}

/// `(α, β)` from a fit restricted to some of the curves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaBeta {
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeakFit {
    /// Peak positions in `s0·ln|a/r_eff|`, one list per curve.
    pub peak_positions: Vec<Vec<f64>>,
    pub alpha_fit: f64,
    pub beta_fit: f64,
    /// RMS of the peak conditions' misfit, in radians of the sin² argument.
    pub residual: f64,
    /// Largest `|Δx/π - 1|` between consecutive peaks of a curve.
    pub spacing_error: f64,
    /// Mean of pairwise fits over the larger half of `|r_eff|`.
    pub large_reff_mean: Option<AlphaBeta>,
    /// Pairwise fits extrapolated linearly in `1/|r_eff|` to zero.
    pub inverse_reff_extrapolation: Option<AlphaBeta>,
}

const LN_ALPHA_RANGE: (f64, f64) = (-3.0, 3.0);
const ALPHA_GRID: usize = 241;

/// Wrapped offsets `c = x_p + Φ(α) - s0·ln α + φ0`; the peak condition reads
/// `c + s0·ln β ≡ 0 (mod π)`.
fn offsets(curves: &[PeakCurve], a: ShortRangeParams, ln_alpha: f64, s0: f64, phi0: f64) -> Result<Vec<f64>> {
    let alpha = ln_alpha.exp();
    let mut out = Vec::new();
    for c in curves {
        let big_phi = phi_narrow(a, c.r_eff, alpha, s0)?;
        for &x in &c.peaks {
            out.push(x + big_phi - s0 * ln_alpha + phi0);
        }
    }
    Ok(out)
}

/// Mean direction and `1 - |mean resultant|` of angles with period π.
fn circular(c: &[f64]) -> (f64, f64) {
    let n = c.len() as f64;
    let (s, co) = c.iter().fold((0.0, 0.0), |(s, co), &v| (s + (2.0 * v).sin(), co + (2.0 * v).cos()));
    let mean = 0.5 * s.atan2(co);
    (mean, 1.0 - (s * s + co * co).sqrt() / n)
}

fn wrapped_rms(c: &[f64], mean: f64) -> f64 {
    let ss: f64 = c.iter().map(|&v| {
        let d = v - mean;
        (d - PI * (d / PI).round()).powi(2)
    }).sum();
    (ss / c.len() as f64).sqrt()
}

/// Least-spread `(α, β)`. With `near`, the search descends from that `α`
/// instead of taking the global minimum; two curves alone match exactly at
/// several `α`, so subset fits are anchored to the full fit.
fn fit_subset(curves: &[PeakCurve], a: ShortRangeParams, s0: f64, phi0: f64, near: Option<f64>) -> Result<(AlphaBeta, f64)> {
    let spread = |la: f64| offsets(curves, a, la, s0, phi0).map(|c| circular(&c).1).unwrap_or(f64::INFINITY);
    let (lo, hi) = LN_ALPHA_RANGE;
    let step = (hi - lo) / (ALPHA_GRID - 1) as f64;
    let grid: Vec<f64> = (0..ALPHA_GRID).map(|i| spread(lo + step * i as f64)).collect();
    let mut best = (0..ALPHA_GRID).min_by(|&i, &j| grid[i].total_cmp(&grid[j])).unwrap_or(0);
    if let Some(alpha) = near {
        best = (((alpha.ln() - lo) / step).round().max(0.0) as usize).min(ALPHA_GRID - 1);
        loop {
            let l = if best > 0 { grid[best - 1] } else { f64::INFINITY };
            let r = if best + 1 < ALPHA_GRID { grid[best + 1] } else { f64::INFINITY };
            if l < grid[best] && l <= r {
                best -= 1;
            } else if r < grid[best] {
                best += 1;
            } else {
                break;
            }
        }
    }
    let (gmin, gmax) = grid.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), if v.is_finite() { b.max(v) } else { b }));
    if !(gmax - gmin > 1e-12) {
        return Err(Error::Numerical("peak positions do not depend on alpha; it cannot be fitted".into()));
    }
    let left = lo + step * best.saturating_sub(1) as f64;
    let right = lo + step * (best + 1).min(ALPHA_GRID - 1) as f64;
    let (la, _) = golden_min(spread, left, right, 1e-12);
    let c = offsets(curves, a, la, s0, phi0)?;
    let (mean, _) = circular(&c);
    // s0·ln β ≡ -mean (mod π), on the branch closest to β = 1.
    let mut lb = -mean / s0;
    let period = PI / s0;
    lb -= period * (lb / period).round();
    Ok((AlphaBeta { alpha: la.exp(), beta: lb.exp() }, wrapped_rms(&c, mean)))
}

/// Fits `(α, β)` so that every peak satisfies
/// `s0·ln|a/r_eff| + Φ + φ = nπ` for the given short-range parameter.
/// Needs at least two curves with two peaks each.
pub fn fit_alpha_beta(curves: &[PeakCurve], short_range: ShortRangeParams, wave: Wave) -> Result<PeakFit> {
    if curves.len() < 2 {
        return input(format!("need peaks from at least 2 values of r_eff, got {}", curves.len()));
    }
    if let Some(c) = curves.iter().find(|c| c.peaks.len() < 2) {
        return input(format!("need at least 2 peaks per curve, r_eff = {} has {}", c.r_eff, c.peaks.len()));
    }
    let s0 = efimov_root_unitarity();
    let p0 = phi0(wave, s0);
    let (global, residual) = fit_subset(curves, short_range, s0, p0, None)?;
    let spacing_error = curves
        .iter()
        .flat_map(|c| c.peaks.windows(2).map(|w| ((w[1] - w[0]).abs() / PI - 1.0).abs()))
        .fold(0.0, f64::max);

    let mut sorted: Vec<&PeakCurve> = curves.iter().collect();
    sorted.sort_by(|a, b| a.r_eff.abs().total_cmp(&b.r_eff.abs()));
    let mut pairs = Vec::new();
    for w in sorted.windows(2) {
        let (ab, _) = fit_subset(&[w[0].clone(), w[1].clone()], short_range, s0, p0, Some(global.alpha))?;
        let inv = 0.5 * (1.0 / w[0].r_eff.abs() + 1.0 / w[1].r_eff.abs());
        pairs.push((inv, ab));
    }
    let (large_reff_mean, inverse_reff_extrapolation) = if pairs.len() >= 2 {
        let upper = &pairs[pairs.len() / 2..];
        let n = upper.len() as f64;
        let mean = AlphaBeta {
            alpha: (upper.iter().map(|p| p.1.alpha.ln()).sum::<f64>() / n).exp(),
            beta: (upper.iter().map(|p| p.1.beta.ln()).sum::<f64>() / n).exp(),
        };
        let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let la: Vec<f64> = pairs.iter().map(|p| p.1.alpha.ln()).collect();
        let lb: Vec<f64> = pairs.iter().map(|p| p.1.beta.ln()).collect();
        let lin = AlphaBeta { alpha: fit_line(&xs, &la)?.intercept.exp(), beta: fit_line(&xs, &lb)?.intercept.exp() };
        (Some(mean), Some(lin))
    } else {
        (None, None)
    };

    Ok(PeakFit {
        peak_positions: curves.iter().map(|c| c.peaks.clone()).collect(),
        alpha_fit: global.alpha,
        beta_fit: global.beta,
        residual,
        spacing_error,
        large_reff_mean,
        inverse_reff_extrapolation,
    })
}
