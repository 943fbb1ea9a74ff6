//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::time::{Duration, Instant};

use threebody_core::feshbach::{bundled_catalog, table_rows, ClassThresholds};
use threebody_core::numerics::{fit_line, log_space};
use threebody_core::rates::analytic::{narrow_rate, phi0, varphi, BROAD_RECOMB_OFFSET, BROAD_RELAX_OFFSET};
use threebody_core::rates::numeric::{channel_for_spec, numeric_rate, threshold_grid, threshold_scan};
use threebody_core::scan::{run_scan, scan_peaks, Engine, ScanSpec};
use threebody_core::twobody::{fit_scattering_params, fit_window, phase_shifts, tune_to_target, RadialGrid, TuneOptions};
use threebody_core::zrp::{efimov_root_unitarity, fit_c0, P0};
use threebody_core::{NarrowSpec, PhysicalConstants, PotentialKind, Process, RegimeGuard, ShortRangeParams, StepSpec};

type Outcome = Result<String, String>;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn efimov_constant() -> Outcome {
    let s0 = efimov_root_unitarity();
    check((s0 - 1.00624).abs() <= 1e-4, format!("s0 = {s0:.8}"))
}

fn coulomb_coefficient() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for r_eff in [-1e4, -1e5, -1e6] {
        for (lo, hi) in [(1e-3, 1e-2), (1e-3, 3e-3), (3e-3, 1e-2)] {
            let fit = fit_c0(r_eff, (lo * r_eff.abs(), hi * r_eff.abs())).map_err(err)?;
            ok &= (fit.c0 - 1.68).abs() <= 0.05;
            parts.push(fit.c0);
        }
    }
    let (min, max) = parts.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    check(ok, format!("c0 in [{min:.4}, {max:.4}] over {} windows", parts.len()))
}

/// Printed effective ranges, one per catalog row in file order.
const PRINTED_REFF: [f64; 15] = [
    -71300.0, -17100.0, -947.0, -373000.0, -1010.0, -168000.0, -73400.0, -734000.0, -19700.0, -287.0, -84600.0,
    -10200.0, -276.0, -2880.0, -185.0,
];

fn table_reproduction() -> Outcome {
    let rows = table_rows(&bundled_catalog(), &PhysicalConstants::default(), ClassThresholds::default());
    if rows.len() != PRINTED_REFF.len() {
        return Err(format!("{} rows in catalog", rows.len()));
    }
    let mut worst = (0.0f64, String::new());
    for (row, printed) in rows.iter().zip(PRINTED_REFF) {
        let r = row.r_eff_au.ok_or_else(|| format!("{}: {:?}", row.entry.species, row.error))?;
        let dev = (r / printed - 1.0).abs();
        if dev > worst.0 {
            worst = (dev, format!("{} {} G", row.entry.species, row.entry.position_g));
        }
    }
    check(worst.0 <= 0.03, format!("15 rows, worst deviation {:.3}% ({})", 100.0 * worst.0, worst.1))
}

const R0: f64 = 10.0;
const REFF: f64 = -1e4;
const A_CENTER: f64 = 1e6;

fn oracle_spec(process: Process) -> ScanSpec {
    let sign = if process.is_recombination() { -1.0 } else { 1.0 };
    ScanSpec {
        process,
        a_grid: log_space(A_CENTER / 8.0, A_CENTER * 8.0, 50).into_iter().map(|a| sign * a).collect(),
        r_eff: REFF,
        alpha: 1.0,
        beta: 1.0,
        short_range: ShortRangeParams::new(R0, R0).unwrap(),
        m: 1.0,
        r0: R0,
        k: None,
        guard: RegimeGuard::default(),
        steps: StepSpec::default(),
    }
}

fn oracle_equivalence() -> Outcome {
    let mut details = Vec::new();
    let mut ok = true;
    for process in [Process::BosonRelax, Process::BosonRecomb, Process::FermionRelax] {
        let spec = oracle_spec(process);
        let rows = run_scan(&spec, Engine::Both).map_err(err)?;
        let worst = rows.iter().filter_map(|r| r.discrepancy).fold(0.0, f64::max);
        ok &= rows.iter().all(|r| r.in_regime) && worst <= 0.01;
        let mut d = format!("{}: max rate gap {:.3}%", process.name(), 100.0 * worst);
        if process != Process::FermionRelax {
            let numeric = scan_peaks(&rows).map_err(err)?;
            let analytic_rows: Vec<_> = rows.iter().map(|r| threebody_core::ScanRow { scaled_numeric: None, ..*r }).collect();
            let analytic = scan_peaks(&analytic_rows).map_err(err)?;
            if numeric.is_empty() || numeric.len() != analytic.len() {
                ok = false;
                d += &format!(", peaks {numeric:?} vs {analytic:?}");
            } else {
                let shift = numeric.iter().zip(&analytic).map(|(n, a)| (n - a).abs()).fold(0.0, f64::max);
                ok &= shift <= 0.01;
                d += &format!(", {} peaks within {shift:.1e}", numeric.len());
            }
        }
        details.push(d);
    }
    check(ok, details.join("; "))
}

fn threshold_laws() -> Outcome {
    let mut details = Vec::new();
    let mut ok = true;
    for (process, expect) in [(Process::BosonRelax, 1.0), (Process::BosonRecomb, 4.0)] {
        let a = if process.is_recombination() { -A_CENTER } else { A_CENTER };
        let spec = NarrowSpec::for_process(process, a, REFF, 1.0, 1.0, ShortRangeParams::new(R0, R0).unwrap(), 1.0, R0)
            .map_err(err)?;
        let ch = channel_for_spec(process, &spec).map_err(err)?;
        let ks = threshold_grid(&ch, 1e-4, 1e-2, 6);
        let fit = threshold_scan(&ch, &ks, &StepSpec::default()).map_err(err)?;
        ok &= (fit.exponent / expect - 1.0).abs() <= 0.02;
        details.push(format!("l={} exponent {:.4}", process.wave().l(), fit.exponent));
    }
    check(ok, details.join(", "))
}

fn fermion_spec(a: f64, r_eff: f64, re: f64) -> Result<NarrowSpec, String> {
    NarrowSpec::for_process(Process::FermionRelax, a, r_eff, 1.0, 1.0, ShortRangeParams::new(re, R0).unwrap(), 1.0, R0)
        .map_err(err)
}

fn fermion_scaling() -> Outcome {
    let expect = 1.0 - 2.0 * P0;
    let a_grid = log_space(1e6, 1e8, 9);
    let k_of = |a: f64| 1e-3 / a;
    let mut la = Vec::new();
    let (mut lan, mut lnum) = (Vec::new(), Vec::new());
    for &a in &a_grid {
        let spec = fermion_spec(a, REFF, R0)?;
        la.push(a.ln());
        lan.push(narrow_rate(Process::FermionRelax, &spec).map_err(err)?.ln());
        lnum.push(numeric_rate(Process::FermionRelax, &spec, k_of(a), &StepSpec::default()).map_err(err)?.ln());
    }
    let s_an = fit_line(&la, &lan).map_err(err)?.slope;
    let s_num = fit_line(&la, &lnum).map_err(err)?.slope;
    let ok = (s_an / expect - 1.0).abs() <= 0.01 && (s_num / expect - 1.0).abs() <= 0.01;
    check(ok, format!("slopes analytic {s_an:.4}, numeric {s_num:.4}, expected {expect:.4}"))
}

fn suppression_laws() -> Outcome {
    let mut details = Vec::new();
    let mut ok = true;
    let ratio = 300.0;
    // Bosons: rate/aⁿ halves per doubling of |r_eff| at fixed a/r_eff.
    for process in [Process::BosonRelax, Process::BosonRecomb] {
        let n = if process.is_recombination() { 4 } else { 1 };
        let sign = if process.is_recombination() { -1.0 } else { 1.0 };
        let mut worst: f64 = 0.0;
        let mut max_eta: f64 = 0.0;
        let mut prev: Option<(f64, f64)> = None;
        for r in [-1e4f64, -2e4, -4e4, -8e4] {
            let a = sign * ratio * r.abs();
            let spec = NarrowSpec::for_process(process, a, r, 1.0, 1.0, ShortRangeParams::new(0.0, R0).unwrap(), 1.0, R0)
                .map_err(err)?;
            max_eta = max_eta.max(spec.phases().map_err(err)?.eta);
            let an = narrow_rate(process, &spec).map_err(err)? / a.abs().powi(n);
            let num = numeric_rate(process, &spec, 1e-3 / a.abs(), &StepSpec::default()).map_err(err)? / a.abs().powi(n);
            if let Some((pa, pn)) = prev {
                worst = worst.max((pa / an / 2.0 - 1.0).abs()).max((pn / num / 2.0 - 1.0).abs());
            }
            prev = Some((an, num));
        }
        ok &= worst <= 0.01 && max_eta < 1e-3;
        details.push(format!("{}: worst {:.3}% per doubling (eta <= {max_eta:.1e})", process.name(), 100.0 * worst));
    }
    // Fermions: exact power of |r_eff| at fixed a from the closed form.
    let expect = 2.0 * P0 - 1.0;
    let a = 1e7;
    let (mut an_dev, mut num_dev) = (0.0f64, 0.0f64);
    let mut prev: Option<(f64, f64)> = None;
    for r in [-1e3, -2e3, -4e3, -8e3] {
        let spec = fermion_spec(a, r, 0.0)?;
        let an = narrow_rate(Process::FermionRelax, &spec).map_err(err)?;
        let num = numeric_rate(Process::FermionRelax, &spec, 1e-3 / a, &StepSpec::default()).map_err(err)?;
        if let Some((pa, pn)) = prev {
            an_dev = an_dev.max(((an / pa).log2() / expect - 1.0).abs());
            num_dev = num_dev.max(((num / pn).log2() / expect - 1.0).abs());
        }
        prev = Some((an, num));
    }
    ok &= an_dev <= 1e-12 && num_dev <= 0.01;
    details.push(format!("fermion exponent deviation analytic {an_dev:.1e}, numeric {:.3}%", 100.0 * num_dev));
    check(ok, details.join("; "))
}

fn broad_offsets() -> Outcome {
    let s0 = efimov_root_unitarity();
    let mut details = Vec::new();
    let mut ok = true;
    for (process, beta, printed) in [(Process::BosonRecomb, 2.9, BROAD_RECOMB_OFFSET), (Process::BosonRelax, 1.4, BROAD_RELAX_OFFSET)] {
        // With α|r_eff| = r0 the narrow argument reads s0·ln(a/r0) + Φ + s0·ln β + φ0.
        let wave = process.wave();
        let offset = varphi(1.0, beta, s0, phi0(wave, s0));
        let by_hand = s0 * f64::ln(beta) + (s0 / (wave.l() + 0.5)).atan();
        if (offset - by_hand).abs() > 1e-12 {
            return Err(format!("offset {offset} disagrees with {by_hand}"));
        }
        let dev = (offset - printed).abs();
        ok &= dev <= 0.01;
        details.push(format!("{} beta={beta}: {offset:.4} vs {printed} (off by {dev:.4})", process.name()));
    }
    check(ok, details.join("; "))
}

fn twobody_pipeline() -> Outcome {
    let c = PhysicalConstants::default();
    let mu2 = c.amu_to_au(86.909180531).map_err(err)? / 2.0;
    let r0 = 50.0;
    let opts = TuneOptions::default();
    let mut worst = 0.0f64;
    let mut count = 0;
    let mut failures = Vec::new();
    for a in [1e3, 1e4, 1e5, -1e3, -1e4, -1e5] {
        for r in [-1e2, -1e3, -1e4] {
            let tuned = match tune_to_target(PotentialKind::SechBarrier, r0, a, r, 1, mu2, &opts) {
                Ok(t) => t,
                Err(e) => {
                    failures.push(format!("({a}, {r}): {e}"));
                    continue;
                }
            };
            let ks = log_space(fit_window(a, r, r0).0, fit_window(a, r, r0).1, 5);
            let samples = phase_shifts(&tuned.model, mu2, &ks, &RadialGrid::default()).map_err(err)?;
            let fit = fit_scattering_params(&samples).map_err(err)?;
            let dev = (fit.a / a - 1.0).abs().max((fit.r_eff / r - 1.0).abs());
            if dev > 1e-4 {
                failures.push(format!("({a}, {r}): got ({}, {})", fit.a, fit.r_eff));
            }
            worst = worst.max(dev);
            count += 1;
        }
    }
    let detail = format!("{count}/18 targets tuned, worst relative deviation {worst:.1e}");
    if failures.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; {}", failures.join("; ")))
    }
}

struct Criterion {
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion { name: "Efimov constant", limit: Duration::from_secs(1), run: efimov_constant },
        Criterion { name: "Coulomb-like coefficient", limit: Duration::from_secs(10), run: coulomb_coefficient },
        Criterion { name: "Table reproduction", limit: Duration::from_secs(1), run: table_reproduction },
        Criterion { name: "Oracle equivalence", limit: Duration::from_secs(120), run: oracle_equivalence },
        Criterion { name: "Threshold laws", limit: Duration::from_secs(30), run: threshold_laws },
        Criterion { name: "Fermionic scaling", limit: Duration::from_secs(60), run: fermion_scaling },
        Criterion { name: "Suppression/enhancement laws", limit: Duration::from_secs(60), run: suppression_laws },
        Criterion { name: "Broad-limit offsets", limit: Duration::from_secs(1), run: broad_offsets },
        Criterion { name: "Two-body pipeline", limit: Duration::from_secs(120), run: twobody_pipeline },
    ];
    let mut failed = 0;
    for (i, c) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = (c.run)();
        let took = start.elapsed();
        let (pass, detail) = match outcome {
            Ok(d) if took <= c.limit => (true, d),
            Ok(d) => (false, format!("{d}; took {took:.2?}, limit {:?}", c.limit)),
            Err(d) => (false, d),
        };
        if !pass {
            failed += 1;
        }
        println!("{} {}. {}: {detail} [{took:.2?}]", if pass { "PASS" } else { "FAIL" }, i + 1, c.name);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

