use levy_core::levy_measure::{check_concentration_relations, gamma_bm_nu_1d, k_fn, nu_eval, LevyDensity, Relation};
use levy_core::symbols::{Bernstein, SymbolSpec};
use proptest::prelude::*;

fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

#[test]
fn gamma_subordinate_density_matches_exponential_kernel() {
    let sym = SymbolSpec::subordinate_bm(Bernstein::Gamma, 1).unwrap();
    let ld = LevyDensity::from_symbol(&sym).unwrap();
    for r in logspace(0.05, 10.0, 25) {
        let want = (-r).exp() / r;
        let got = nu_eval(&ld, r).unwrap();
        assert!((got - want).abs() <= 1e-8 * want, "r={r} got={got} want={want}");
        assert!((gamma_bm_nu_1d(r) - want).abs() <= 1e-12 * want);
    }
}

#[test]
fn k1_increment_with_small_scale_factors() {
    for sym in [
        SymbolSpec::geometric_stable(1.0, 1).unwrap(),
        SymbolSpec::subordinate_bm(Bernstein::Gamma, 3).unwrap(),
        SymbolSpec::stable(1.2, 2).unwrap(),
    ] {
        let ld = LevyDensity::from_symbol(&sym).unwrap();
        let rep = check_concentration_relations(&ld, &sym, Relation::K1Increment, &logspace(0.05, 20.0, 12), &[1.0, 1.3, 1.7, 2.0]);
        assert!(rep.holds(), "{}: {rep:?}", sym.family.name());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn nu_nonincreasing(k in 0usize..4, lr in -3.0f64..2.0, f in 1.01f64..3.0) {
        let sym = [
            SymbolSpec::geometric_stable(1.0, 2).unwrap(),
            SymbolSpec::stable(0.8, 3).unwrap(),
            SymbolSpec::subordinate_bm(Bernstein::Gamma, 1).unwrap(),
            SymbolSpec::truncated_log(2).unwrap(),
        ][k].clone();
        let ld = LevyDensity::from_symbol(&sym).unwrap();
        let r = lr.exp();
        let a = nu_eval(&ld, r).unwrap();
        let b = nu_eval(&ld, r * f).unwrap();
        prop_assert!(b <= a * (1.0 + 1e-9), "{} r={r} {a} {b}", sym.family.name());
    }

    #[test]
    fn k_scaling_lower_bound(lr in -2.0f64..1.5, lam in 1.0f64..4.0) {
        let sym = SymbolSpec::subordinate_bm(Bernstein::Gamma, 2).unwrap();
        let ld = LevyDensity::from_symbol(&sym).unwrap();
        let r = lr.exp();
        let k = k_fn(&ld, 1, r).unwrap();
        prop_assert!(lam * lam * k_fn(&ld, 1, lam * r).unwrap() >= k * (1.0 - 1e-8));
    }
}
