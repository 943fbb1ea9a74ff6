//! Effective-range fits `k·cot δ = -1/a + r_eff·k²/2`.

use serde::Serialize;

use super::numerov::{check_mu2, zero_energy, RadialGrid, ShapeTable};
use super::{PhaseShiftSample, PotentialModel};
use crate::error::{Error, Result};
use crate::numerics::{fit_line, log_space};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScatteringFit {
    pub a: f64,
    pub r_eff: f64,
    /// Relative rms residual of the straight-line fit.
    pub residual: f64,
    pub k_window: (f64, f64),
    /// Samples dropped because `δ` sat on a multiple of π.
    pub excluded: usize,
}

impl ScatteringFit {
    /// `k_max·√(|a·r_eff|/2)`; the expansion holds when this is well below 1.
    pub fn window_reach(&self) -> f64 {
        self.k_window.1 * (self.a * self.r_eff).abs().sqrt() / 2f64.sqrt()
    }
}

/// Least squares of `k·cot δ` against `k²`.
pub fn fit_scattering_params(samples: &[PhaseShiftSample]) -> Result<ScatteringFit> {
    let mut xs = Vec::with_capacity(samples.len());
    let mut ys = Vec::with_capacity(samples.len());
    let mut excluded = 0;
    for s in samples {
        if s.delta.sin().abs() < 1e-12 {
            excluded += 1;
            continue;
        }
        xs.push(s.k * s.k);
        ys.push(s.k / s.delta.tan());
    }
    fit_kcot(&xs, &ys, excluded, samples)
}

fn fit_kcot(xs: &[f64], ys: &[f64], excluded: usize, samples: &[PhaseShiftSample]) -> Result<ScatteringFit> {
    if xs.len() < 3 {
        return Err(Error::Input(format!(
            "effective-range fit needs at least 3 usable samples, got {} ({excluded} excluded with sin(delta) ~ 0)",
            xs.len()
        )));
    }
    let line = fit_line(xs, ys)?;
    let kmin = samples.iter().map(|s| s.k).fold(f64::INFINITY, f64::min);
    let kmax = samples.iter().map(|s| s.k).fold(0.0, f64::max);
    Ok(ScatteringFit {
        a: -1.0 / line.intercept,
        r_eff: 2.0 * line.slope,
        residual: line.relative_rms,
        k_window: (kmin, kmax),
        excluded,
    })
}

/// Largest `|a|` used when sizing a fit window, in units of `r0`.
pub const A_CAP_OVER_R0: f64 = 1e6;

/// Default window `[1e-4, 1e-2]/r0`, shrunk to `k_max = ½√(2/|a r_eff|)`,
/// `k_min = k_max/100` when the default would reach past the expansion's
/// validity bound.
pub fn fit_window(a: f64, r_eff: f64, r0: f64) -> (f64, f64) {
    let (lo, hi) = (1e-4 / r0, 1e-2 / r0);
    let a_c = a.abs().min(A_CAP_OVER_R0 * r0);
    let prod = a_c * r_eff.abs();
    if !(prod > 0.0) || !prod.is_finite() {
        return (lo, hi);
    }
    let bound = (2.0 / prod).sqrt();
    if hi < bound {
        (lo, hi)
    } else {
        let kmax = 0.5 * bound;
        (kmax / 100.0, kmax)
    }
}

/// Phase shifts on an ascending `k` list, unwrapped by continuity from the
/// principal branch at the smallest `k`.
pub fn phase_shifts(model: &PotentialModel, mu2: f64, ks: &[f64], grid: &RadialGrid) -> Result<Vec<PhaseShiftSample>> {
    model.validate()?;
    check_mu2(mu2)?;
    if ks.windows(2).any(|w| !(w[1] > w[0])) || ks.iter().any(|&k| !(k > 0.0)) {
        return Err(Error::Input("wavenumbers must be positive and strictly ascending".into()));
    }
    let table = ShapeTable::new(model.kind, model.r0, grid)?;
    let (ra, rb) = table.match_radii();
    let mut out: Vec<PhaseShiftSample> = Vec::with_capacity(ks.len());
    for &k in ks {
        let raw = table.sweep(model.d, model.b, mu2, k)?.tan_delta(ra, rb).atan();
        let delta = match out.last() {
            None => raw,
            Some(prev) => raw + std::f64::consts::PI * ((prev.delta - raw) / std::f64::consts::PI).round(),
        };
        out.push(PhaseShiftSample { k, delta });
    }
    Ok(out)
}

/// Direct `k·cot δ` fit on a fixed window using a prepared table.
pub(crate) fn fit_on_window(
    table: &ShapeTable,
    d: f64,
    b: f64,
    mu2: f64,
    window: (f64, f64),
    points: usize,
) -> Result<ScatteringFit> {
    let (ra, rb) = table.match_radii();
    let ks = log_space(window.0, window.1, points);
    let mut xs = Vec::with_capacity(points);
    let mut ys = Vec::with_capacity(points);
    let mut samples = Vec::with_capacity(points);
    let mut excluded = 0;
    for &k in &ks {
        let s = table.sweep(d, b, mu2, k)?;
        let t = s.tan_delta(ra, rb);
        samples.push(PhaseShiftSample { k, delta: t.atan() });
        if t.atan().sin().abs() < 1e-12 {
            excluded += 1;
            continue;
        }
        xs.push(k * k);
        ys.push(s.k_cot_delta(k, ra, rb));
    }
    fit_kcot(&xs, &ys, excluded, &samples)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub points: usize,
    /// Fits with a larger relative residual are rejected.
    pub max_residual: f64,
    pub grid: RadialGrid,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { points: 5, max_residual: 1e-3, grid: RadialGrid::default() }
    }
}

/// Fit with the window sized from the model's own `a` and `r_eff`, iterated
/// until the window stops moving.
pub fn auto_fit(model: &PotentialModel, mu2: f64, opts: &FitOptions) -> Result<ScatteringFit> {
    model.validate()?;
    check_mu2(mu2)?;
    let table = ShapeTable::new(model.kind, model.r0, &opts.grid)?;
    let (a0, _) = zero_energy(&table, model.d, model.b, mu2)?;
    let mut window = fit_window(a0, model.r0, model.r0);
    let mut fit = fit_on_window(&table, model.d, model.b, mu2, window, opts.points)?;
    for _ in 0..8 {
        let next = fit_window(fit.a, fit.r_eff, model.r0);
        if (next.1 / window.1 - 1.0).abs() < 1e-6 {
            break;
        }
        window = next;
        fit = fit_on_window(&table, model.d, model.b, mu2, window, opts.points)?;
    }
    if fit.residual > opts.max_residual {
        return Err(Error::Numerical(format!(
            "effective-range fit residual {:.3e} exceeds {:.3e}",
            fit.residual, opts.max_residual
        )));
    }
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::super::{energy_scale, PotentialKind};
    use super::*;

    #[test]
    fn synthetic_round_trip() {
        let (a, r) = (1234.5, -321.0);
        let samples: Vec<_> = log_space(1e-6, 1e-4, 7)
            .into_iter()
            .map(|k| {
                let kc = -1.0 / a + 0.5 * r * k * k;
                PhaseShiftSample { k, delta: (k / kc).atan() }
            })
            .collect();
        let f = fit_scattering_params(&samples).unwrap();
        assert!((f.a / a - 1.0).abs() < 1e-10 && (f.r_eff / r - 1.0).abs() < 1e-10, "{f:?}");
        assert!(fit_scattering_params(&samples[..2]).is_err());
        let flat = vec![PhaseShiftSample { k: 1e-3, delta: 0.1 }; 4];
        assert!(fit_scattering_params(&flat).is_err());
    }

    #[test]
    fn window_shrinks_near_resonance() {
        assert_eq!(fit_window(100.0, 10.0, 10.0), (1e-5, 1e-3));
        let (lo, hi) = fit_window(1e6, -1e4, 10.0);
        assert!((hi - 0.5 * (2.0 / 1e10f64).sqrt()).abs() < 1e-18 && (lo - hi / 100.0).abs() < 1e-20);
        let capped = fit_window(1e30, -1e4, 10.0);
        assert_eq!(capped, fit_window(1e7, -1e4, 10.0));
    }

    #[test]
    fn near_threshold_sech_well() {
        let mu2 = 5e3;
        let r0 = 20.0;
        let grid = RadialGrid::default();
        let (_, hi) = super::super::threshold_depth(PotentialKind::SechBarrier, 0.0, r0, mu2, 1, &grid).unwrap();
        let m = PotentialModel::new(PotentialKind::SechBarrier, hi * (1.0 + 1e-4), 0.0, r0).unwrap();
        let f = auto_fit(&m, mu2, &FitOptions::default()).unwrap();
        let a0 = super::super::scattering_length_zero_energy(&m, mu2, &grid).unwrap();
        assert!(f.a > 0.0 && f.a > 100.0 * r0, "{f:?}");
        assert!((f.a / a0 - 1.0).abs() < 1e-3, "{} {a0}", f.a);
        assert!(f.window_reach() < 1.0);
        // Halving the window leaves r_eff stable.
        let table = ShapeTable::new(m.kind, r0, &grid).unwrap();
        let half = fit_on_window(&table, m.d, 0.0, mu2, (f.k_window.0 / 2.0, f.k_window.1 / 2.0), 5).unwrap();
        assert!((half.r_eff / f.r_eff - 1.0).abs() < 0.01);
        let _ = energy_scale(r0, mu2);
    }

    #[test]
    fn wigner_limit() {
        let mu2 = 5e3;
        let r0 = 20.0;
        let es = energy_scale(r0, mu2);
        let m = PotentialModel::new(PotentialKind::MorseBarrier, 1.7 * es, 0.4 * es, r0).unwrap();
        let f = auto_fit(&m, mu2, &FitOptions::default()).unwrap();
        let ks = log_space(f.k_window.0, f.k_window.1, 5);
        let s = phase_shifts(&m, mu2, &ks, &RadialGrid::default()).unwrap();
        let slope = (s[1].delta - s[0].delta) / (s[1].k - s[0].k);
        assert!((slope / -f.a - 1.0).abs() < 1e-3, "{slope} {}", f.a);
    }

    #[test]
    fn grid_convergence_of_fit() {
        let mu2 = 5e3;
        let r0 = 20.0;
        let es = energy_scale(r0, mu2);
        let m = PotentialModel::new(PotentialKind::MorseBarrier, 2.3 * es, 1.1 * es, r0).unwrap();
        let f1 = auto_fit(&m, mu2, &FitOptions::default()).unwrap();
        let fine = FitOptions { grid: RadialGrid::default().refined(), ..FitOptions::default() };
        let f2 = auto_fit(&m, mu2, &fine).unwrap();
        assert!((f1.a / f2.a - 1.0).abs() < 1e-6 && (f1.r_eff / f2.r_eff - 1.0).abs() < 1e-6, "{f1:?} {f2:?}");
    }
}
