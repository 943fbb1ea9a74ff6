//! Tuning well depth and barrier height to a target `(a, r_eff)`.
//!
//! The depth is solved inside the window of `D` with exactly `n` bound states,
//! where `a` runs monotonically from `+∞` to `-∞`; the barrier is then solved
//! for the effective range with the depth re-tuned at each trial barrier.
//! Each depth is finished on the fitted `a` of the target window, which
//! differs slightly from the zero-energy `a` when `|r_eff|` is large.

use super::fit::{fit_on_window, fit_window, ScatteringFit, A_CAP_OVER_R0};
use super::numerov::{check_mu2, threshold_in, zero_energy, RadialGrid, ShapeTable};
use super::{energy_scale, PotentialKind, PotentialModel};
use crate::error::{ensure_positive, input, Error, Result};
use crate::numerics::{brent, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuneOptions {
    /// Relative tolerance on the fitted `(a, r_eff)`.
    pub rel_tol: f64,
    pub points: usize,
    pub grid: RadialGrid,
}

impl Default for TuneOptions {
    fn default() -> Self {
        TuneOptions { rel_tol: 1e-4, points: 5, grid: RadialGrid::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuneResult {
    pub model: PotentialModel,
    /// Fit on the window sized from the targets.
    pub fit: ScatteringFit,
    pub n_bound: usize,
}

struct Ctx<'a> {
    table: &'a ShapeTable,
    r0: f64,
    mu2: f64,
    n: usize,
    scale: f64,
}

impl Ctx<'_> {
    /// Depth window `[D_lo, D_hi]` holding exactly `n` bound states at barrier `b`.
    fn depth_window(&self, b: f64) -> Result<(f64, f64)> {
        let lo = threshold_in(self.table, b, self.mu2, self.n, self.scale)?.1;
        let hi = threshold_in(self.table, b, self.mu2, self.n + 1, self.scale.max(lo))?.0;
        Ok((lo, hi))
    }

    fn depth_for(&self, b: f64, target_a: f64) -> Result<f64> {
        let (lo, hi) = self.depth_window(b)?;
        if target_a.abs() > A_CAP_OVER_R0 * self.r0 {
            return Ok(if target_a > 0.0 { lo } else { hi });
        }
        let goal = (target_a / self.r0).atan();
        let g = |d: f64| match zero_energy(self.table, d, b, self.mu2) {
            Ok((a, _)) => (a / self.r0).atan() - goal,
            Err(_) => f64::NAN,
        };
        brent(g, lo, hi, Tolerance { abs: 0.0, rel: 1e-15, max_iter: 300 }).map_err(|e| {
            Error::Numerical(format!("no depth with {} bound states gives a = {target_a} at B = {b}: {e}", self.n))
        })
    }
}

/// One-dimensional search: the depth at fixed barrier `b` whose zero-energy
/// scattering length is `target_a`, with `n_bound` bound states.
pub fn tune_depth(
    kind: PotentialKind,
    r0: f64,
    b: f64,
    target_a: f64,
    n_bound: usize,
    mu2: f64,
    grid: &RadialGrid,
) -> Result<PotentialModel> {
    check_mu2(mu2)?;
    ensure_positive("r0", r0)?;
    if !(b >= 0.0) {
        return input(format!("B must be non-negative, got {b}"));
    }
    if !(target_a.abs() > r0) {
        return input(format!("target |a| must exceed r0, got a = {target_a}"));
    }
    if target_a > 0.0 && n_bound == 0 {
        return input("a > 0 near resonance needs at least one bound state");
    }
    let table = ShapeTable::new(kind, r0, grid)?;
    let ctx = Ctx { table: &table, r0, mu2, n: n_bound, scale: energy_scale(r0, mu2) };
    PotentialModel::new(kind, ctx.depth_for(b, target_a)?, b, r0)
}

/// Solves for `(D, B)` so that the effective-range fit reproduces the targets
/// with `n_bound` bound states.
pub fn tune_to_target(
    kind: PotentialKind,
    r0: f64,
    target_a: f64,
    target_reff: f64,
    n_bound: usize,
    mu2: f64,
    opts: &TuneOptions,
) -> Result<TuneResult> {
    check_mu2(mu2)?;
    ensure_positive("r0", r0)?;
    if !(target_reff < 0.0) {
        return input(format!("target r_eff must be negative, got {target_reff}"));
    }
    if target_reff.abs() < r0 {
        return input(format!("target |r_eff| must be at least r0 = {r0}, got {target_reff}"));
    }
    if !(target_a.abs() > r0) {
        return input(format!("target |a| must exceed r0, got a = {target_a}"));
    }
    if target_a > 0.0 && n_bound == 0 {
        return input("a > 0 near resonance needs at least one bound state");
    }
    let table = ShapeTable::new(kind, r0, &opts.grid)?;
    let scale = energy_scale(r0, mu2);
    let ctx = Ctx { table: &table, r0, mu2, n: n_bound, scale };
    let window = fit_window(target_a, target_reff, r0);
    let fit_at = |d: f64, b: f64| fit_on_window(&table, d, b, mu2, window, opts.points);
    let sentinel = target_a.abs() > A_CAP_OVER_R0 * r0;

    let goal = (target_reff / r0).asinh();
    // Depth whose fitted (not zero-energy) a hits the target, searched in a
    // bracket grown around the zero-energy solution.
    let depth = |b: f64| -> Result<f64> {
        let d0 = ctx.depth_for(b, target_a)?;
        if sentinel {
            return Ok(d0);
        }
        let (lo, hi) = ctx.depth_window(b)?;
        let a_goal = (target_a / r0).atan();
        let g = |d: f64| fit_at(d, b).map(|f| (f.a / r0).atan() - a_goal);
        let g0 = g(d0)?;
        if g0 == 0.0 {
            return Ok(d0);
        }
        let mut width = 1e-9 * d0;
        loop {
            let (l, h) = ((d0 - width).max(lo), (d0 + width).min(hi));
            let (gl, gh) = (g(l)?, g(h)?);
            let (x0, x1) = if gl.signum() != g0.signum() {
                (l, d0)
            } else if gh.signum() != g0.signum() {
                (d0, h)
            } else if l <= lo && h >= hi {
                return Err(Error::Numerical(format!("no depth fits a = {target_a} at B = {b}")));
            } else {
                width *= 8.0;
                continue;
            };
            let mut failure = None;
            let root = brent(
                |d| g(d).unwrap_or_else(|e| {
                    failure = Some(e);
                    f64::NAN
                }),
                x0,
                x1,
                Tolerance { abs: 0.0, rel: 1e-15, max_iter: 300 },
            );
            return root.map_err(|e| failure.unwrap_or(e));
        }
    };
    let h = |b: f64| -> Result<f64> {
        let d = depth(b)?;
        Ok((fit_at(d, b)?.r_eff / r0).asinh() - goal)
    };
    if h(0.0)? <= 0.0 {
        return Err(Error::Numerical(format!(
            "r_eff = {target_reff} is not reachable: even B = 0 gives a more negative effective range"
        )));
    }
    let (mut b_lo, mut b_hi) = (0.0, scale);
    let mut doublings = 0;
    let reached = |b: f64| -> Result<bool> {
        h(b).map(|v| v <= 0.0).map_err(|e| {
            Error::Numerical(format!("r_eff = {target_reff} not reached with {n_bound} bound states before B = {b}: {e}"))
        })
    };
    while !reached(b_hi)? {
        b_lo = b_hi;
        b_hi *= 2.0;
        doublings += 1;
        if doublings > 80 {
            return Err(Error::Numerical("no barrier height reaches the target effective range".into()));
        }
    }
    let mut failure = None;
    let b = brent(
        |b| match h(b) {
            Ok(v) => v,
            Err(e) => {
                failure = Some(e);
                f64::NAN
            }
        },
        b_lo,
        b_hi,
        Tolerance { abs: 0.0, rel: 1e-13, max_iter: 300 },
    )
    .map_err(|e| failure.clone().unwrap_or(e))?;
    let d = depth(b)?;

    let model = PotentialModel::new(kind, d, b, r0)?;
    let fit = fit_at(d, b)?;
    let (_, n_found) = zero_energy(&table, d, b, mu2)?;
    if n_found != n_bound {
        return Err(Error::Numerical(format!("tuned model has {n_found} bound states, wanted {n_bound}")));
    }
    let a_ok = if sentinel { (r0 / fit.a).abs() < 1e-6 } else { (fit.a / target_a - 1.0).abs() <= opts.rel_tol };
    if !a_ok || (fit.r_eff / target_reff - 1.0).abs() > opts.rel_tol {
        return Err(Error::Numerical(format!(
            "tuning stalled at a = {}, r_eff = {} for targets ({target_a}, {target_reff})",
            fit.a, fit.r_eff
        )));
    }
    Ok(TuneResult { model, fit, n_bound })
}
