use std::f64::consts::PI;

use num_complex::Complex64;
use threebody_core::rates::analytic::{
    inelastic_probability, k3_broad_pos, narrow_rate, vrel_fermion_narrow, BroadParams,
};
use threebody_core::rates::numeric::{build_channel, reflection, scatter, PiecewiseChannel};
use threebody_core::rates::{hyperradial_mass, Middle, Process, Wave};
use threebody_core::zrp::{efimov_root_unitarity, P0};
use threebody_core::{NarrowSpec, ShortRangeParams, StepSpec};

fn spec(process: Process, a: f64, r_eff: f64, re: f64, im: f64) -> NarrowSpec {
    NarrowSpec::for_process(process, a, r_eff, 1.0, 1.0, ShortRangeParams::new(re, im).unwrap(), 1.0, 10.0).unwrap()
}

#[test]
fn closed_forms_agree_with_probability_conversion() {
    let s = spec(Process::BosonRelax, 1e6, -1e4, 10.0, 10.0);
    let mu = hyperradial_mass(1.0);
    for kr in [1e-3, 1e-4] {
        let k = kr / 1e6;
        let v = PI / (mu * k) * inelastic_probability(k, &s).unwrap();
        assert!((v / narrow_rate(Process::BosonRelax, &s).unwrap() - 1.0).abs() < 1e-12);
    }
    let s = spec(Process::BosonRecomb, -1e6, -1e4, 10.0, 10.0);
    let k: f64 = 1e-3 / 1e6;
    let k3 = 192.0 * PI * PI / (mu * k.powi(4)) * inelastic_probability(k, &s).unwrap();
    assert!((k3 / narrow_rate(Process::BosonRecomb, &s).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn probability_is_log_periodic_in_a() {
    let s0 = efimov_root_unitarity();
    let k = 1e-12;
    for (process, l) in [(Process::BosonRelax, 0.0), (Process::BosonRecomb, 1.5)] {
        let sign = if process.is_recombination() { -1.0 } else { 1.0 };
        let base = spec(process, sign * 1e6, -1e4, 30.0, 5.0);
        let shifted = NarrowSpec { a: base.a * (PI / s0).exp(), ..base };
        let (p1, p2) = (inelastic_probability(k, &base).unwrap(), inelastic_probability(k, &shifted).unwrap());
        let expect = ((2.0 * l + 1.0) * PI / s0).exp();
        assert!((p2 / p1 / expect - 1.0).abs() < 1e-9, "{process:?}");
    }
}

#[test]
fn no_absorption_no_loss() {
    for process in [Process::BosonRelax, Process::BosonRecomb, Process::FermionRelax] {
        let a = if process.is_recombination() { -1e6 } else { 1e6 };
        let s = spec(process, a, -1e4, 3.0, 0.0);
        assert_eq!(narrow_rate(process, &s).unwrap(), 0.0);
        let ch = build_channel(process, a, -1e4, 1.0, 1.0, s.short_range, 1.0, 0.5, 10.0).unwrap();
        let r = scatter(&ch, 1e-9, &StepSpec::default()).unwrap();
        assert!((r.r_coeff - 1.0).abs() < 1e-10 && r.one_minus_r.abs() < 1e-10);
    }
}

#[test]
fn fermion_closed_form_with_zero_real_part() {
    let s = spec(Process::FermionRelax, 1e7, -1e4, 0.0, 7.0);
    let expect = 256.0 * PI * 3f64.sqrt() * P0 * P0 * 7.0 / (2.0 * P0 + 1.0).powi(4) * (1e3f64).powf(1.0 - 2.0 * P0);
    assert!((vrel_fermion_narrow(&s).unwrap() / expect - 1.0).abs() < 1e-12);
}

#[test]
fn broad_recombination_coefficient() {
    let s0 = efimov_root_unitarity();
    let r0: f64 = 50.0;
    let a: f64 = 1e4;
    // Pick the phase so that the sin² factor is one.
    let phi = PI / 2.0 - s0 * (a / r0).ln();
    let k3 = k3_broad_pos(a, r0, BroadParams::new(phi, 0.0).unwrap(), 1.0, s0).unwrap();
    assert!((k3 / (67.1 * a.powi(4)) - 1.0).abs() < 1e-12);
    let k3z = k3_broad_pos(a, r0, BroadParams::new(phi - PI / 2.0, 0.0).unwrap(), 1.0, s0).unwrap();
    assert!(k3z.abs() < 1e-20 * a.powi(4));
    let big = a * (PI / s0).exp();
    let k3b = k3_broad_pos(big, r0, BroadParams::new(phi, 0.0).unwrap(), 1.0, s0).unwrap();
    assert!((k3b / big.powi(4) / (k3 / a.powi(4)) - 1.0).abs() < 1e-9);
}

#[test]
fn reflection_of_imaginary_phase() {
    for t in [0.1, 0.5, 0.9] {
        let r = reflection(Complex64::new(0.0, t), 1e-6).unwrap();
        assert!((r.r_coeff - ((1.0 - t) / (1.0 + t)).powi(2)).abs() < 1e-14);
        assert!((r.one_minus_r - (1.0 - r.r_coeff)).abs() < 1e-14);
    }
}

#[test]
fn channel_thresholds_and_branches() {
    let sr = ShortRangeParams::new(10.0, 1.0).unwrap();
    let relax = build_channel(Process::BosonRelax, 1e6, -1e4, 1.0, 1.0, sr, 1.0, 0.5, 10.0).unwrap();
    assert!((relax.e_nu - (-1.0 / (2.0 * 0.5 * 1e12))).abs() < 1e-25);
    assert_eq!(relax.wave, Wave::Zero);
    let recomb = build_channel(Process::BosonRecomb, -1e6, -1e4, 1.0, 1.0, sr, 1.0, 0.5, 10.0).unwrap();
    assert_eq!((recomb.e_nu, recomb.wave), (0.0, Wave::ThreeHalves));
    let fermion = build_channel(Process::FermionRelax, 1e6, -1e4, 1.0, 1.0, sr, 1.0, 0.5, 10.0).unwrap();
    assert_eq!(fermion.middle, Middle::Barrier(P0));
    assert!(build_channel(Process::BosonRelax, 1e6, -1e4, 1.0, 1e-3, sr, 1.0, 0.5, 10.0).is_err());
}

#[test]
fn free_channel_end_to_end() {
    let ch = PiecewiseChannel::new(1.0, 10.0, 10.0, Middle::Efimov(0.0), Wave::Zero, 0.0, Complex64::new(0.0, 0.0), 1.0);
    let ch = ch.unwrap();
    let r = scatter(&ch, 1e-3, &StepSpec::default()).unwrap();
    assert!(r.tan_delta.norm() < 1e-10, "{}", r.tan_delta);
}
