use std::f64::consts::PI;

use levy_core::bounds::{
    asym_constant, asym_ratio_sweep, sandwich_check, AsymClaim, ConstantClaim, SandwichClaim, SandwichOptions, SweepSpec,
    Verdict,
};
use levy_core::symbols::{Bernstein, SymbolSpec};
use levy_core::transforms::{cauchy_density, InversionConfig};

/// `1/ω_d` with the sphere area from `ω_1 = 2`, `ω_2 = 2π`, `ω_{d+2} = 2π ω_d / d`.
fn inverse_sphere_area(d: usize) -> f64 {
    let mut w = if d % 2 == 1 { 2.0 } else { 2.0 * PI };
    let mut k = if d % 2 == 1 { 1 } else { 2 };
    while k < d {
        w *= 2.0 * PI / k as f64;
        k += 2;
    }
    1.0 / w
}

#[test]
fn slowly_varying_constant_in_all_dimensions() {
    for d in 1..=10 {
        let c = asym_constant(ConstantClaim::Sv, d).unwrap();
        let want = inverse_sphere_area(d);
        assert!((c - want).abs() <= 1e-14 * want, "d={d} {c} {want}");
    }
    assert!((asym_constant(ConstantClaim::Sv, 1).unwrap() - 0.5).abs() < 1e-15);
    assert!((asym_constant(ConstantClaim::Sv, 3).unwrap() - 1.0 / (4.0 * PI)).abs() < 1e-16);
}

#[test]
fn regular_variation_constant_matches_cauchy_tail() {
    let c = asym_constant(ConstantClaim::Rv(1.0), 1).unwrap();
    let (t, x) = (1e-3, 1e3);
    let brute = cauchy_density(1, t, x) / (t / x * (1.0 / x));
    assert!((c - brute).abs() <= 1e-9);
    assert!((c - 1.0 / PI).abs() <= 1e-15);
    assert!(asym_constant(ConstantClaim::Rv(2.0), 1).is_err());
}

#[test]
fn one_sided_constants_stable_under_tighter_tolerance() {
    let cases = [
        (SandwichClaim::Gub3, SymbolSpec::stable(1.0, 1).unwrap()),
        (SandwichClaim::Gbound, SymbolSpec::geometric_stable(1.0, 6).unwrap()),
        (SandwichClaim::Nuapprox, SymbolSpec::subordinate_bm(Bernstein::Gamma, 3).unwrap()),
    ];
    for (claim, sym) in cases {
        let grid = claim.default_grid();
        let base = SandwichOptions::default();
        let tight = SandwichOptions { cfg: InversionConfig { rel_tol: base.cfg.rel_tol / 10.0, ..base.cfg }, ..base };
        let a = sandwich_check(claim, &sym, &grid, &base).unwrap();
        let b = sandwich_check(claim, &sym, &grid, &tight).unwrap();
        assert_eq!(a.verdict, Verdict::Consistent, "{}", claim.id());
        assert!((a.c_max - b.c_max).abs() <= 0.01 * a.c_max, "{}: {} {}", claim.id(), a.c_max, b.c_max);
    }
}

#[test]
fn cauchy_upper_bound_constant() {
    let claim = SandwichClaim::Gub3;
    let r = sandwich_check(claim, &SymbolSpec::stable(1.0, 1).unwrap(), &claim.default_grid(), &SandwichOptions::default()).unwrap();
    assert_eq!(r.verdict, Verdict::Consistent);
    assert!(r.c_max <= 10.0, "{}", r.c_max);
}

#[test]
fn gamma_concentration_comparability() {
    let claim = SandwichClaim::Ksbm;
    let sym = SymbolSpec::subordinate_bm(Bernstein::Gamma, 3).unwrap();
    let r = sandwich_check(claim, &sym, &claim.default_grid(), &SandwichOptions::default()).unwrap();
    assert!(r.c_min >= 1.0 / 16.0 && r.c_max <= 16.0, "[{}, {}]", r.c_min, r.c_max);
}

#[test]
fn levy_density_ratio_near_one() {
    let sym = SymbolSpec::subordinate_bm(Bernstein::Gamma, 1).unwrap();
    let sweep = SweepSpec::Points(vec![(1e-4, 1e-4)]);
    let r = asym_ratio_sweep(AsymClaim::Nu, &sym, &sweep, &InversionConfig::default()).unwrap();
    let ratio = r.points[0].ratio;
    assert!((ratio - 1.0).abs() <= 0.1, "{ratio}");
}

#[test]
fn sweep_deviation_tails_nonincreasing() {
    let cfg = InversionConfig::default();
    let sv = SymbolSpec::geometric_stable(1.5, 2).unwrap();
    let r = asym_ratio_sweep(AsymClaim::Sv, &sv, &AsymClaim::Sv.default_sweep(), &cfg).unwrap();
    assert!(r.tail_nonincreasing(3), "{:?}", r.trend);
    assert!(r.final_deviation().unwrap() < 0.15);
    let ig = SymbolSpec::iterated_geometric(2.0, 0.5, 1).unwrap();
    let r = asym_ratio_sweep(AsymClaim::Large, &ig, &AsymClaim::Large.default_sweep(), &cfg).unwrap();
    assert!(r.tail_nonincreasing(3), "{:?}", r.trend);
}
