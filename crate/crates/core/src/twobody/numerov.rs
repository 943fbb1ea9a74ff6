//! Renormalized Numerov propagation of the regular s-wave solution.
//!
//! With `T = h²·2μ2(V - E)/12` and `w = (1 - T)u`, Numerov's recurrence
//! becomes `w[n+1] = U[n]·w[n] - w[n-1]`, `U = (2 + 10T)/(1 - T)`, which is
//! propagated through `σ = ρ - 1`, `ρ[n] = w[n+1]/w[n]`, so amplitudes never overflow.

use super::PotentialModel;
use super::PotentialKind;
use crate::error::{ensure_positive, input, Error, Result};

/// Fixed radial grid in units of the potential range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialGrid {
    pub steps_per_r0: usize,
    pub r_max_over_r0: f64,
    /// Largest allowed `2μ2|V|·max(r_max², 1/k²)` at the matching region.
    pub tail_floor: f64,
}

impl Default for RadialGrid {
    fn default() -> Self {
        RadialGrid { steps_per_r0: 800, r_max_over_r0: 20.0, tail_floor: 1e-8 }
    }
}

impl RadialGrid {
    pub fn refined(self) -> Self {
        RadialGrid { steps_per_r0: 2 * self.steps_per_r0, ..self }
    }
}

/// `(k, δ)` with `δ` on a branch fixed by continuity in `k`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PhaseShiftSample {
    pub k: f64,
    pub delta: f64,
}

/// Potential shapes tabulated on the grid; the potential is `D·well + B·barrier`.
pub(crate) struct ShapeTable {
    h: f64,
    n: usize,
    tail: usize,
    well: Vec<f64>,
    barrier: Vec<f64>,
    tail_floor: f64,
}

impl ShapeTable {
    pub(crate) fn new(kind: PotentialKind, r0: f64, grid: &RadialGrid) -> Result<Self> {
        ensure_positive("r0", r0)?;
        if grid.steps_per_r0 < 200 {
            return input(format!("need at least 200 steps per r0, got {}", grid.steps_per_r0));
        }
        if !(grid.r_max_over_r0 >= 20.0) {
            return input(format!("outer radius must be at least 20 r0, got {} r0", grid.r_max_over_r0));
        }
        let h = r0 / grid.steps_per_r0 as f64;
        let n = (grid.r_max_over_r0 * grid.steps_per_r0 as f64).round() as usize;
        let mut well = Vec::with_capacity(n + 1);
        let mut barrier = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let y = 3.0 * (i as f64 * h) / r0;
            well.push(PotentialModel::well_shape(kind, y));
            barrier.push(PotentialModel::barrier_shape(y));
        }
        Ok(ShapeTable { h, n, tail: grid.steps_per_r0, well, barrier, tail_floor: grid.tail_floor })
    }

    fn r(&self, i: usize) -> f64 {
        i as f64 * self.h
    }

    /// Matching radii `(r_a, r_b)` spanning the last `r0` of the grid.
    pub(crate) fn match_radii(&self) -> (f64, f64) {
        (self.r(self.n - self.tail), self.r(self.n))
    }

    fn check_tail(&self, d: f64, b: f64, mu2: f64, k: f64) -> Result<()> {
        let i = self.n - self.tail;
        let v = (d * self.well[i] + b * self.barrier[i]).abs() * 2.0 * mu2;
        let (_, rb) = self.match_radii();
        let scale = if k > 0.0 { (1.0 / (k * k)).max(rb * rb) } else { rb * rb };
        if v * scale > self.tail_floor {
            return Err(Error::Input(format!(
                "grid too short: potential at r = {} is not negligible (2 mu2 |V| = {v:e})",
                self.r(i)
            )));
        }
        Ok(())
    }

    /// Propagates to the grid end at energy `e = k²/(2μ2)`.
    pub(crate) fn sweep(&self, d: f64, b: f64, mu2: f64, k: f64) -> Result<Sweep> {
        self.check_tail(d, b, mu2, k)?;
        let c = self.h * self.h * 2.0 * mu2 / 12.0;
        let e = k * k / (2.0 * mu2);
        // σ = ρ - 1 obeys σ[n] = g[n] + σ[n-1]/(1 + σ[n-1]) with g = U - 2,
        // which keeps full precision when the local wavenumber is tiny.
        let mut sigma_prev = f64::INFINITY;
        let mut nodes = 0usize;
        let mut tail_ratio = 1.0;
        let start_tail = self.n - self.tail;
        let mut sigma = 0.0;
        for i in 1..self.n {
            let t = c * (d * self.well[i] + b * self.barrier[i] - e);
            if t >= 1.0 {
                return Err(Error::Numerical(format!("step too coarse for the well at r = {}", self.r(i))));
            }
            let g = 12.0 * t / (1.0 - t);
            sigma = if sigma_prev.is_infinite() { g + 1.0 } else { g + sigma_prev / (1.0 + sigma_prev) };
            if sigma < -1.0 {
                nodes += 1;
            }
            if i >= start_tail {
                tail_ratio *= 1.0 + sigma;
            }
            sigma_prev = sigma;
        }
        if !tail_ratio.is_finite() || !sigma.is_finite() {
            return Err(Error::Numerical("wavefunction ratio overflow".into()));
        }
        // Free discrete wavenumber of the recurrence in the tail.
        let t = -c * e;
        // cos(κh) = U/2, written as sin²(κh/2) = -3T/(1 - T) to keep small κ accurate.
        let kappa = 2.0 * (-3.0 * t / (1.0 - t)).max(0.0).sqrt().min(1.0).asin() / self.h;
        Ok(Sweep { nodes, tail_ratio, kappa })
    }
}

pub(crate) struct Sweep {
    pub nodes: usize,
    /// `u(r_b)/u(r_a)`.
    pub tail_ratio: f64,
    /// Wavenumber of the exact free solution of the discrete recurrence.
    pub kappa: f64,
}

impl Sweep {
    /// `tan δ` from the tail ratio, matched to `sin(κr) + tanδ·cos(κr)`.
    pub(crate) fn tan_delta(&self, ra: f64, rb: f64) -> f64 {
        let (sa, ca) = (self.kappa * ra).sin_cos();
        let (sb, cb) = (self.kappa * rb).sin_cos();
        let rho = self.tail_ratio;
        (sb - rho * sa) / (rho * ca - cb)
    }

    /// `k·cot δ` without going through `tan δ`.
    pub(crate) fn k_cot_delta(&self, k: f64, ra: f64, rb: f64) -> f64 {
        let (sa, ca) = (self.kappa * ra).sin_cos();
        let (sb, cb) = (self.kappa * rb).sin_cos();
        let rho = self.tail_ratio;
        k * (rho * ca - cb) / (sb - rho * sa)
    }

    /// Zero-energy scattering length from `u ∝ r - a` in the tail.
    pub(crate) fn scattering_length(&self, ra: f64, rb: f64) -> f64 {
        let rho = self.tail_ratio;
        (ra * rho - rb) / (rho - 1.0)
    }
}

pub(crate) fn check_mu2(mu2: f64) -> Result<f64> {
    ensure_positive("mu2", mu2)
}

/// Principal-branch phase shift `δ ∈ (-π/2, π/2]` at wavenumber `k`.
pub fn solve_phase_shift(model: &PotentialModel, mu2: f64, k: f64, grid: &RadialGrid) -> Result<PhaseShiftSample> {
    model.validate()?;
    check_mu2(mu2)?;
    ensure_positive("k", k)?;
    let table = ShapeTable::new(model.kind, model.r0, grid)?;
    let s = table.sweep(model.d, model.b, mu2, k)?;
    let (ra, rb) = table.match_radii();
    Ok(PhaseShiftSample { k, delta: s.tan_delta(ra, rb).atan() })
}

pub(crate) fn zero_energy(table: &ShapeTable, d: f64, b: f64, mu2: f64) -> Result<(f64, usize)> {
    let s = table.sweep(d, b, mu2, 0.0)?;
    let (ra, rb) = table.match_radii();
    let a = s.scattering_length(ra, rb);
    // A node still ahead of the grid end (a > r_max) is a bound state.
    let extra = usize::from(a > rb);
    Ok((a, s.nodes + extra))
}

/// Scattering length from the zero-energy solution.
pub fn scattering_length_zero_energy(model: &PotentialModel, mu2: f64, grid: &RadialGrid) -> Result<f64> {
    model.validate()?;
    check_mu2(mu2)?;
    let table = ShapeTable::new(model.kind, model.r0, grid)?;
    Ok(zero_energy(&table, model.d, model.b, mu2)?.0)
}

/// Number of s-wave bound states, from the nodes of the zero-energy solution.
pub fn count_bound_states(model: &PotentialModel, mu2: f64, grid: &RadialGrid) -> Result<usize> {
    model.validate()?;
    check_mu2(mu2)?;
    let table = ShapeTable::new(model.kind, model.r0, grid)?;
    Ok(zero_energy(&table, model.d, model.b, mu2)?.1)
}

/// Bracket `(lo, hi)` of the depth at which the `n`-th bound state appears at
/// barrier height `b`: `lo` has `n - 1` states, `hi` has `n`, and
/// `hi - lo ≤ 1e-12·hi`.
pub(crate) fn threshold_in(table: &ShapeTable, b: f64, mu2: f64, n: usize, scale: f64) -> Result<(f64, f64)> {
    if n == 0 {
        return Ok((0.0, 0.0));
    }
    let count = |d: f64| zero_energy(table, d, b, mu2).map(|r| r.1);
    let mut lo = 0.0;
    if count(lo)? >= n {
        return Err(Error::Numerical(format!("{n} bound states already present at D = 0")));
    }
    let mut hi = scale;
    let mut guard = 0;
    while count(hi)? < n {
        lo = hi;
        hi *= 2.0;
        guard += 1;
        if guard > 200 {
            return Err(Error::Numerical(format!("could not reach {n} bound states")));
        }
    }
    while hi - lo > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count(mid)? >= n {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((lo, hi))
}

/// Well depth at which the `n`-th bound state crosses threshold, as a bracket
/// `(lo, hi)` with `n - 1` states at `lo` and `n` at `hi`.
pub fn threshold_depth(
    kind: PotentialKind,
    b: f64,
    r0: f64,
    mu2: f64,
    n: usize,
    grid: &RadialGrid,
) -> Result<(f64, f64)> {
    check_mu2(mu2)?;
    if !(b >= 0.0) {
        return input(format!("B must be non-negative, got {b}"));
    }
    let table = ShapeTable::new(kind, r0, grid)?;
    threshold_in(&table, b, mu2, n, super::energy_scale(r0, mu2))
}
