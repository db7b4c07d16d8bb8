//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p levy-cli --test acceptance --release`. The process
//! exits nonzero when any criterion fails unexpectedly; a failure whose
//! pattern matches a documented numerical limit is reported as FAIL but
//! flagged `known`.

use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use levy_cli::suites::{eq46_threshold, run_suite, Suite};
use levy_core::bounds::{
    asym_ratio_sweep, equivalence_diagnostics, sandwich_check, AsymClaim, Equivalence, EstimateReport, SandwichClaim,
    SandwichOptions, SweepSpec, Verdict,
};
use levy_core::kernels::{example_estimate, geometric_stable_density, Example};
use levy_core::levy_measure::{check_concentration_relations, nu_eval, LevyDensity, Relation};
use levy_core::symbols::{Bernstein, SymbolSpec};
use levy_core::transforms::{cauchy_density, density_from_symbol, gaussian_density, InversionConfig};

struct Outcome {
    pass: bool,
    /// Failure matches a documented limit of double-precision quadrature.
    known: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Outcome { pass, known: false, detail }
    }
}

fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

fn raw() -> InversionConfig {
    InversionConfig { use_closed_forms: false, ..Default::default() }
}

fn sym(r: levy_core::Result<SymbolSpec>) -> SymbolSpec {
    r.expect("valid symbol")
}

fn sweep(claim: AsymClaim, s: &SymbolSpec, spec: &SweepSpec) -> Result<EstimateReport, String> {
    asym_ratio_sweep(claim, s, spec, &InversionConfig::default()).map_err(|e| e.to_string())
}

/// Deviation sequence is nonincreasing throughout.
fn nonincreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] <= w[0])
}

fn c1_oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let ts = [0.5, 1.0, 2.0];
    let xs = logspace(1e-2, 10.0, 50);
    let mut worst = [0.0f64; 2];
    let mut fails = [0usize; 2];
    // Absolute Gaussian error relative to p(t, 0), at the failing points only.
    let mut gauss_floor = 0.0f64;
    let mut total = 0;
    for d in 1..=3 {
        let fams = [(sym(SymbolSpec::stable(1.0, d)), 0), (sym(SymbolSpec::gaussian(d)), 1)];
        for (s, k) in &fams {
            for &t in &ts {
                for &x in &xs {
                    let want = if *k == 0 { cauchy_density(d, t, x) } else { gaussian_density(d, t, x) };
                    let got = density_from_symbol(s, t, x, &raw()).map(|q| q.value).unwrap_or(f64::NAN);
                    let e = ((got - want) / want).abs();
                    total += 1;
                    if !(e <= worst[*k]) {
                        worst[*k] = if e.is_nan() { f64::INFINITY } else { e };
                    }
                    if !(e <= 1e-8) {
                        fails[*k] += 1;
                        if *k == 1 {
                            gauss_floor = gauss_floor.max((got - want).abs() / gaussian_density(d, t, 0.0));
                        }
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let in_time = elapsed <= Duration::from_secs(10);
    let pass = fails == [0, 0] && in_time;
    let detail = format!(
        "{total} points, cauchy max rel {:.2e} ({} over 1e-8), gaussian max rel {:.2e} ({} over 1e-8, abs error <= {:.1e} p(t,0)), {:.2}s",
        worst[0],
        fails[0],
        worst[1],
        fails[1],
        gauss_floor,
        elapsed.as_secs_f64()
    );
    // Deep Gaussian tails sit below the absolute resolution of the
    // oscillatory integral; anything else is a real failure.
    let known = !pass && fails[0] == 0 && in_time && gauss_floor <= 1e-13;
    Outcome { pass, known, detail }
}

fn c2_route_agreement() -> Outcome {
    let mut worst = 0.0f64;
    let mut n = 0;
    for d in [1, 3] {
        let s = sym(SymbolSpec::geometric_stable(1.0, d));
        for &t in &[0.2, 1.0, 3.0] {
            for x in logspace(1e-2, 10.0, 20) {
                let a = geometric_stable_density(1.0, d, t, x).map(|q| q.value);
                let b = density_from_symbol(&s, t, x, &raw()).map(|q| q.value);
                let e = match (a, b) {
                    (Ok(a), Ok(b)) => ((a - b) / b).abs(),
                    _ => f64::INFINITY,
                };
                worst = if e.is_nan() { f64::INFINITY } else { worst.max(e) };
                n += 1;
            }
        }
    }
    Outcome::new(worst <= 1e-6, format!("{n} points, max relative disagreement {worst:.2e}"))
}

fn c3_variance_gamma() -> Outcome {
    let s = sym(SymbolSpec::subordinate_bm(Bernstein::Gamma, 1));
    let ks: Vec<f64> = (1..=6).map(f64::from).collect();
    let rep = match equivalence_diagnostics(&s, Equivalence::Thm5, &ks, &InversionConfig::default()) {
        Ok(r) => r,
        Err(e) => return Outcome::new(false, e.to_string()),
    };
    let Some(leg) = rep.legs.iter().find(|l| l.name == "NU_RATIO") else {
        return Outcome::new(false, "no NU_RATIO leg".into());
    };
    let dev: Vec<f64> = leg.values.iter().map(|v| (v / 0.5 - 1.0).abs()).collect();
    let last = *dev.last().unwrap_or(&f64::INFINITY);
    // ν against e^{−r}/r directly.
    let ld = match LevyDensity::from_symbol(&s) {
        Ok(ld) => ld,
        Err(e) => return Outcome::new(false, e.to_string()),
    };
    let nu_err = ks
        .iter()
        .map(|k| {
            let r = 10f64.powf(-k);
            let want = (-r).exp() / r;
            nu_eval(&ld, r).map(|v| ((v - want) / want).abs()).unwrap_or(f64::INFINITY)
        })
        .fold(0.0, f64::max);
    let c_ok = rep.c.is_some_and(|c| (c - 0.5).abs() < 1e-12);
    Outcome::new(
        last <= 0.02 && nonincreasing(&dev) && nu_err <= 1e-8 && c_ok,
        format!("final deviation {last:.2e}, nonincreasing {}, nu vs e^-r/r {nu_err:.1e}, c = {:?}", nonincreasing(&dev), rep.c),
    )
}

fn c4_sv() -> Outcome {
    let start = Instant::now();
    let s = sym(SymbolSpec::geometric_stable(1.5, 2));
    let spec = SweepSpec::Decades { ks: (2..=6).map(f64::from).collect(), t_psi: 1e-3 };
    match sweep(AsymClaim::Sv, &s, &spec) {
        Ok(r) => {
            let el = start.elapsed().as_secs_f64();
            let last = r.final_deviation().unwrap_or(f64::INFINITY);
            let limit_ok = r.limit.is_some_and(|l| (l - 1.0 / (2.0 * PI)).abs() < 1e-15);
            Outcome::new(
                last <= 0.15 && r.tail_nonincreasing(3) && el <= 60.0 && limit_ok,
                format!("final deviation {last:.2e}, tail nonincreasing {}, {el:.2}s", r.tail_nonincreasing(3)),
            )
        }
        Err(e) => Outcome::new(false, e),
    }
}

fn c5_rv() -> Outcome {
    let s = sym(SymbolSpec::stable(1.0, 1));
    match sweep(AsymClaim::Rv, &s, &AsymClaim::Rv.default_sweep()) {
        Ok(r) => {
            let worst = r.points.iter().map(|p| (p.ratio * PI - 1.0).abs()).fold(0.0, f64::max);
            Outcome::new(worst <= 0.01 && !r.points.is_empty(), format!("{} points, max deviation from 1/pi {worst:.2e}", r.points.len()))
        }
        Err(e) => Outcome::new(false, e),
    }
}

fn c6_large() -> Outcome {
    let s = sym(SymbolSpec::iterated_geometric(2.0, 0.5, 1));
    let spec = SweepSpec::Levels { t: 0.2, t_psi: vec![10.0, 30.0, 100.0] };
    match sweep(AsymClaim::Large, &s, &spec) {
        Ok(r) => {
            let last = r.final_deviation().unwrap_or(f64::INFINITY);
            Outcome::new(
                last <= 0.25 && nonincreasing(&r.trend),
                format!("deviations {:?}", r.trend.iter().map(|v| format!("{v:.2e}")).collect::<Vec<_>>()),
            )
        }
        Err(e) => Outcome::new(false, e),
    }
}

fn c7_green() -> Outcome {
    let s = sym(SymbolSpec::geometric_stable(1.0, 3));
    let spec = SweepSpec::Decades { ks: (2..=5).map(f64::from).collect(), t_psi: 1e-3 };
    match sweep(AsymClaim::Green, &s, &spec) {
        Ok(r) => {
            let last = r.final_deviation().unwrap_or(f64::INFINITY);
            let limit_ok = r.limit.is_some_and(|l| (l - 1.0 / (4.0 * PI)).abs() < 1e-15);
            Outcome::new(
                last <= 0.2 && nonincreasing(&r.trend) && limit_ok,
                format!("deviations {:?}", r.trend.iter().map(|v| format!("{v:.2e}")).collect::<Vec<_>>()),
            )
        }
        Err(e) => Outcome::new(false, e),
    }
}

fn c8_inequality_suite() -> Outcome {
    let start = Instant::now();
    let mut lines = run_suite(Suite::Symbols, 0, 1000);
    lines.extend(run_suite(Suite::LevyMeasure, 0, 1000));
    lines.extend(run_suite(Suite::Bounds, 0, 1000).into_iter().filter(|l| l.check == "MU_EST"));
    let mu = lines.iter().filter(|l| l.check == "MU_EST").count();
    let bad: Vec<String> = lines.iter().filter(|l| !l.passed()).map(|l| format!("{}/{}", l.check, l.family)).collect();
    let failures: usize = lines.iter().map(|l| l.failures).sum();
    let points: usize = lines.iter().map(|l| l.points).sum();
    Outcome::new(
        bad.is_empty() && mu == 1,
        format!(
            "{} checks, {points} points, {failures} violations{}, {:.1}s",
            lines.len(),
            if bad.is_empty() { String::new() } else { format!(" in {}", bad.join(", ")) },
            start.elapsed().as_secs_f64()
        ),
    )
}

fn c9_eq46() -> Outcome {
    let grid = logspace(0.05, 0.9, 20);
    let mut parts = Vec::new();
    let mut pass = true;
    for s in [sym(SymbolSpec::truncated_log(1)), sym(SymbolSpec::subordinate_bm(Bernstein::Gamma, 1))] {
        let ld = match LevyDensity::from_symbol(&s) {
            Ok(ld) => ld,
            Err(e) => return Outcome::new(false, e.to_string()),
        };
        let rep = check_concentration_relations(&ld, &s, Relation::Eq46, &grid, &[]);
        let res = rep.max_residual.unwrap_or(f64::INFINITY);
        let thr = eq46_threshold(&s);
        pass &= rep.errors.is_empty() && rep.points == grid.len() && res <= thr;
        parts.push(format!("{} residual {res:.1e} (limit {thr:.0e})", s.family.name()));
    }
    Outcome::new(pass, parts.join(", "))
}

fn c10_stability() -> Outcome {
    let gamma3 = sym(SymbolSpec::subordinate_bm(Bernstein::Gamma, 3));
    let two: Vec<(SandwichClaim, SymbolSpec)> = vec![
        (SandwichClaim::Thm4, sym(SymbolSpec::iterated_geometric(2.0, 0.5, 1))),
        (SandwichClaim::PhiPrime, gamma3.clone()),
        (SandwichClaim::Ksbm, gamma3.clone()),
        (SandwichClaim::R2kd, gamma3.clone()),
    ];
    let one: Vec<(SandwichClaim, SymbolSpec)> = vec![
        (SandwichClaim::Gub3, sym(SymbolSpec::stable(1.0, 1))),
        (SandwichClaim::Gbound, sym(SymbolSpec::geometric_stable(1.0, 6))),
        (SandwichClaim::Nuapprox, gamma3.clone()),
        (SandwichClaim::GlambdaInt, gamma3),
    ];
    let opts = SandwichOptions::default();
    let fine = SandwichOptions { cfg: InversionConfig { rel_tol: 1e-10, ..Default::default() }, ..Default::default() };
    let mut pass = true;
    let mut parts = Vec::new();
    for (claim, s) in &two {
        let r = sandwich_check(*claim, s, &claim.default_grid(), &opts);
        let r2 = sandwich_check(*claim, s, &claim.default_grid(), &fine);
        match (r, r2) {
            (Ok(r), Ok(r2)) => {
                let drift = r.drift.unwrap_or(f64::INFINITY);
                let tol_shift = ((r2.c_max / r2.c_min) / (r.c_max / r.c_min) - 1.0).abs();
                let ok = r.c_min > 0.0 && r.c_max.is_finite() && drift < 0.1 && tol_shift < 0.01;
                pass &= ok;
                parts.push(format!("{} drift {drift:.1e}", claim.id()));
            }
            (Err(e), _) | (_, Err(e)) => {
                pass = false;
                parts.push(format!("{}: {e}", claim.id()));
            }
        }
    }
    for (claim, s) in &one {
        match sandwich_check(*claim, s, &claim.default_grid(), &opts) {
            Ok(r) => {
                let ok = r.verdict == Verdict::Consistent && r.c_max.is_finite();
                pass &= ok;
                parts.push(format!("{} {:?}", claim.id(), r.verdict));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{}: {e}", claim.id()));
            }
        }
    }
    Outcome::new(pass, parts.join(", "))
}

fn c11_tauberian() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, s) in [
        ("GS(1)", sym(SymbolSpec::geometric_stable(1.0, 1))),
        ("IG(2,1/2)", sym(SymbolSpec::iterated_geometric(2.0, 0.5, 1))),
    ] {
        match sweep(AsymClaim::TaubSmall, &s, &AsymClaim::TaubSmall.default_sweep()) {
            Ok(r) => {
                let ok = r.c_min >= 0.4 && r.c_max <= 0.6;
                pass &= ok;
                parts.push(format!("{name} small in [{:.3}, {:.3}]", r.c_min, r.c_max));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{name} small: {e}"));
            }
        }
        match sweep(AsymClaim::TaubLarge, &s, &AsymClaim::TaubLarge.default_sweep()) {
            Ok(r) => {
                let first = r.trend.first().copied().unwrap_or(f64::NAN);
                let last = r.final_deviation().unwrap_or(f64::INFINITY);
                let ok = nonincreasing(&r.trend) && last < first;
                pass &= ok;
                parts.push(format!("{name} large deviation {first:.1e} -> {last:.1e}"));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{name} large: {e}"));
            }
        }
    }
    Outcome::new(pass, parts.join(", "))
}

/// `[min, max]` of `p / (t|x|^{2ω t − d})` over a `t × x` grid.
fn ex1_range(s: &SymbolSpec, ts: &[f64], xs: &[f64]) -> Result<(f64, f64), String> {
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for &t in ts {
        for &x in xs {
            let p = density_from_symbol(s, t, x, &InversionConfig::default()).map_err(|e| e.to_string())?.value;
            let e = example_estimate(Example::Ex1 { d: 1 }, t, x).map_err(|e| e.to_string())?.0;
            lo = lo.min(p / e);
            hi = hi.max(p / e);
        }
    }
    Ok((lo, hi))
}

fn c12_example_one() -> Outcome {
    let s = sym(SymbolSpec::truncated_log(1));
    let coarse = ex1_range(&s, &logspace(1e-3, 0.25, 6), &logspace(0.05, 0.9, 8));
    let fine = ex1_range(&s, &logspace(1e-3, 0.25, 11), &logspace(0.05, 0.9, 15));
    match (coarse, fine) {
        (Ok((lo, hi)), Ok((lo2, hi2))) => {
            let c = hi.max(1.0 / lo);
            let c2 = hi2.max(1.0 / lo2);
            let drift = (c2 / c - 1.0).abs();
            let inside = lo2 >= 1.0 / c2 && hi2 <= c2;
            Outcome::new(
                c.is_finite() && inside && drift < 0.1,
                format!("ratio in [{lo2:.3}, {hi2:.3}], C = {c2:.3}, refinement drift {drift:.1e}"),
            )
        }
        (Err(e), _) | (_, Err(e)) => Outcome::new(false, e),
    }
}

fn c13_determinism() -> Outcome {
    let dir = tempfile::tempdir().expect("temp dir");
    let path = dir.path().join("gs.json");
    std::fs::write(&path, r#"{"family": "GEOMETRIC_STABLE", "d": 2, "params": {"alpha": 1.5}}"#).expect("write symbol");
    let run = |jobs: &str| {
        Command::new(env!("CARGO_BIN_EXE_levy"))
            .args(["eval", "--symbol"])
            .arg(&path)
            .args(["--t", "0.5", "--x-grid", "0.01:10:40log", "--jobs", jobs])
            .output()
            .expect("run levy")
    };
    let a = run("1");
    let b = run("4");
    let same = a.status.success() && b.status.success() && a.stdout == b.stdout && !a.stdout.is_empty();
    Outcome::new(same, format!("{} bytes, identical {}", a.stdout.len(), a.stdout == b.stdout))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 13] = [
        ("oracle equivalence (Cauchy, Gaussian)", c1_oracle_equivalence),
        ("subordination vs inversion (GS(1))", c2_route_agreement),
        ("variance-gamma nu ratio -> 1/2", c3_variance_gamma),
        ("SV sweep GS(1.5) d=2", c4_sv),
        ("RV anchor Cauchy 1/pi", c5_rv),
        ("LARGE regime IG(2,1/2)", c6_large),
        ("Green asymptotics GS(1) d=3", c7_green),
        ("inequality suites at 1e3 points", c8_inequality_suite),
        ("h' = -2K/r", c9_eq46),
        ("two-sided stability, one-sided bounds", c10_stability),
        ("Tauberian diagnostics", c11_tauberian),
        ("truncated-log sandwich", c12_example_one),
        ("eval determinism across --jobs", c13_determinism),
    ];
    let mut unexpected = 0;
    let mut passed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        let status = if o.pass { "PASS" } else if o.known { "FAIL (known)" } else { "FAIL" };
        println!("criterion {:>2} {status}: {name}: {}", i + 1, o.detail);
        if o.pass {
            passed += 1;
        } else if !o.known {
            unexpected += 1;
        }
    }
    println!("{passed}/{} criteria passed, {unexpected} unexpected failures", criteria.len());
    if unexpected > 0 {
        std::process::exit(1);
    }
}
