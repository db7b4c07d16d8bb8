//! Randomized property suites behind `levy verify`.

use std::f64::consts::PI;

use levy_core::bounds::{asym_ratio_sweep, rv_constant, sandwich_check, sv_constant, AsymClaim, SandwichClaim, SandwichGrid, SandwichOptions};
use levy_core::kernels::geometric_stable_density;
use levy_core::levy_measure::{check_concentration_relations, LevyDensity, Relation};
use levy_core::special_fn::gamma;
use levy_core::symbols::{check_bernstein, check_potter, check_symbol_inequalities, Bernstein, Family, InequalityCheck, SymbolSpec};
use levy_core::transforms::{cauchy_density, density_from_symbol, gaussian_density, resolvent_from_symbol, InversionConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Symbols,
    LevyMeasure,
    Transforms,
    Bounds,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Symbols, Suite::LevyMeasure, Suite::Transforms, Suite::Bounds];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Symbols => "symbols",
            Suite::LevyMeasure => "levy_measure",
            Suite::Transforms => "transforms",
            Suite::Bounds => "bounds",
        }
    }

    pub fn parse(s: &str) -> Result<Vec<Suite>, CliError> {
        if s == "all" {
            return Ok(Suite::ALL.to_vec());
        }
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .map(|x| vec![x])
            .ok_or_else(|| CliError::config(format!("unknown suite '{s}' (symbols, levy_measure, transforms, bounds, all)")))
    }
}

/// One assertable check: `failures` counts points where it did not hold.
#[derive(Debug, Clone)]
pub struct CheckLine {
    pub suite: &'static str,
    pub check: String,
    pub family: String,
    pub points: usize,
    pub failures: usize,
    /// Worst margin `(rhs − lhs)/|rhs|`, largest relative error, or largest ratio, per check.
    pub worst: f64,
}

impl CheckLine {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.points > 0
    }
}

/// Short label without commas, e.g. `STABLE(alpha=1;d=3)`.
pub fn label(sym: &SymbolSpec) -> String {
    let p = match &sym.family {
        Family::GeometricStable { alpha } | Family::Stable { alpha } => format!("alpha={alpha};"),
        Family::IteratedGeometric { alpha, beta } => format!("alpha={alpha};beta={beta};"),
        Family::SubordinateBm(b) => bernstein_label(b) + ";",
        _ => String::new(),
    };
    format!("{}({p}d={})", sym.family.name(), sym.d)
}

fn bernstein_label(b: &Bernstein) -> String {
    match b {
        Bernstein::Gamma => "GAMMA".into(),
        Bernstein::StableSub { gamma } => format!("STABLE_SUB;gamma={gamma}"),
        Bernstein::GeomSub { alpha, beta } => format!("GEOM_SUB;alpha={alpha};beta={beta}"),
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (lo.ln() + rng.gen::<f64>() * (hi / lo).ln()).exp()
}

fn sorted_sample(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| log_uniform(rng, lo, hi)).collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Independent stream per task so results do not depend on scheduling.
fn task_rng(seed: u64, task: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(task as u64 + 1);
    rng
}

fn s(r: levy_core::Result<SymbolSpec>) -> SymbolSpec {
    r.expect("built-in family parameters are valid")
}

/// Families exercised by the symbol suite.
pub fn symbol_families() -> Vec<SymbolSpec> {
    vec![
        s(SymbolSpec::geometric_stable(1.0, 1)),
        s(SymbolSpec::geometric_stable(1.5, 2)),
        s(SymbolSpec::iterated_geometric(2.0, 0.5, 1)),
        s(SymbolSpec::iterated_geometric(1.0, 0.5, 3)),
        s(SymbolSpec::stable(1.0, 3)),
        s(SymbolSpec::stable(1.5, 1)),
        s(SymbolSpec::gaussian(2)),
        s(SymbolSpec::truncated_log(1)),
        s(SymbolSpec::truncated_log(3)),
        s(SymbolSpec::subordinate_bm(Bernstein::Gamma, 1)),
        s(SymbolSpec::subordinate_bm(Bernstein::StableSub { gamma: 0.5 }, 2)),
        s(SymbolSpec::subordinate_bm(Bernstein::GeomSub { alpha: 1.5, beta: 0.5 }, 1)),
    ]
}

/// Families with a Lévy density, for the concentration-function suite.
pub fn nu_families() -> Vec<SymbolSpec> {
    vec![
        s(SymbolSpec::geometric_stable(1.0, 1)),
        s(SymbolSpec::geometric_stable(1.0, 3)),
        s(SymbolSpec::stable(1.0, 3)),
        s(SymbolSpec::stable(1.5, 1)),
        s(SymbolSpec::truncated_log(1)),
        s(SymbolSpec::truncated_log(3)),
        s(SymbolSpec::subordinate_bm(Bernstein::Gamma, 1)),
        s(SymbolSpec::subordinate_bm(Bernstein::Gamma, 3)),
        s(SymbolSpec::subordinate_bm(Bernstein::StableSub { gamma: 0.5 }, 2)),
    ]
}

pub fn bernstein_functions() -> Vec<Bernstein> {
    vec![
        Bernstein::Gamma,
        Bernstein::StableSub { gamma: 0.3 },
        Bernstein::StableSub { gamma: 0.7 },
        Bernstein::GeomSub { alpha: 1.0, beta: 0.5 },
        Bernstein::GeomSub { alpha: 2.0, beta: 1.0 },
    ]
}

fn from_inequality(suite: &'static str, family: &str, c: &InequalityCheck) -> CheckLine {
    CheckLine {
        suite,
        check: c.name.clone(),
        family: family.to_string(),
        points: c.points,
        failures: usize::from(!c.holds),
        worst: c.margin,
    }
}

/// Merge chunked results of the same inequality.
fn merge(acc: &mut Vec<InequalityCheck>, part: Vec<InequalityCheck>) {
    for c in part {
        match acc.iter_mut().find(|a| a.name == c.name) {
            Some(a) => {
                a.points += c.points;
                a.holds &= c.holds;
                if c.margin.is_nan() || c.margin < a.margin {
                    a.margin = c.margin;
                    a.worst_at = c.worst_at;
                }
            }
            None => acc.push(c),
        }
    }
}

/// `ψ(ru) ≤ ψ*(ru) ≤ 2(r²+1)ψ*(u)` over pairs inside chunks of 32 sampled
/// points, `ψ* ≤ π²ψ` and `ψ ≥ 0` at every sampled point, the Potter bound
/// on pairs of large arguments, and `uφ′ ≤ φ`.
fn symbols_suite(seed: u64, n: usize) -> Vec<CheckLine> {
    const SUITE: &str = "symbols";
    let fams = symbol_families();
    let mut out: Vec<Vec<CheckLine>> = fams
        .par_iter()
        .enumerate()
        .map(|(i, sym)| {
            let mut rng = task_rng(seed, i);
            let u = sorted_sample(&mut rng, n, 1e-4, 1e4);
            let mut acc = Vec::new();
            for chunk in u.chunks(32) {
                merge(&mut acc, check_symbol_inequalities(sym, chunk));
            }
            let far = sorted_sample(&mut rng, n, POTTER_LO, POTTER_HI);
            for chunk in far.chunks(32) {
                if let Some(c) = check_potter(sym, chunk) {
                    merge(&mut acc, vec![c]);
                }
            }
            let name = label(sym);
            let mut lines: Vec<CheckLine> = acc.iter().map(|c| from_inequality(SUITE, &name, c)).collect();
            let bad = u.iter().filter(|&&x| !(sym.psi(x) >= 0.0)).count() + usize::from(sym.psi(0.0) != 0.0);
            let worst = u.iter().map(|&x| sym.psi(x)).fold(f64::INFINITY, f64::min);
            lines.push(CheckLine { suite: SUITE, check: "PSI_NONNEGATIVE".into(), family: name, points: u.len() + 1, failures: bad, worst });
            lines
        })
        .collect();
    let base = fams.len();
    let bern: Vec<Vec<CheckLine>> = bernstein_functions()
        .par_iter()
        .enumerate()
        .map(|(i, b)| {
            let mut rng = task_rng(seed, base + i);
            let u = sorted_sample(&mut rng, n, 1e-6, 1e6);
            let name = bernstein_label(b);
            check_bernstein(b, &u).iter().map(|c| from_inequality(SUITE, &name, c)).collect()
        })
        .collect();
    out.extend(bern);
    out.concat()
}

/// Sampling range for the Potter bound, where every de Haan family is well
/// into its slowly varying regime.
const POTTER_LO: f64 = 1e2;
const POTTER_HI: f64 = 1e8;

const LAMBDAS: [f64; 5] = [1.0, 1.5, 2.0, 4.0, 10.0];

/// Residual allowed for `h′ = −2K/r`: closed-form moments versus quadrature.
pub fn eq46_threshold(sym: &SymbolSpec) -> f64 {
    match sym.family {
        Family::TruncatedLog | Family::Stable { .. } => 1e-6,
        _ => 1e-4,
    }
}

fn relation_line(sym: &SymbolSpec, rel: Relation, grid: &[f64], lambdas: &[f64]) -> CheckLine {
    let name = label(sym);
    let ld = match LevyDensity::from_symbol(sym) {
        Ok(ld) => ld,
        Err(e) => {
            return CheckLine { suite: "levy_measure", check: format!("{rel:?}: {}", e.kind()), family: name, points: 0, failures: 1, worst: f64::NAN }
        }
    };
    let r = check_concentration_relations(&ld, sym, rel, grid, lambdas);
    let id = serde_json::to_value(rel).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
    let (failures, worst) = match rel {
        Relation::Eq46 => {
            let res = r.max_residual.unwrap_or(f64::NAN);
            (usize::from(!(res <= eq46_threshold(sym))) + r.errors.len(), res)
        }
        _ => (r.failures + r.errors.len(), r.worst_margin),
    };
    CheckLine { suite: "levy_measure", check: id, family: name, points: r.points, failures, worst }
}

/// Scaling relations of `h` and `K_j` at sampled `(λ, r)`, `ν ≤ C r^{−d}K_d`,
/// `K_d ≤ dK_1`, the increment bound with `λ` uniform on `[1, 2]`, and the
/// derivative identity `h′ = −2K/r` on `[0.05, 0.9]`.
fn levy_measure_suite(seed: u64, n: usize) -> Vec<CheckLine> {
    let fams = nu_families();
    let mut tasks = Vec::new();
    for (fi, sym) in fams.iter().enumerate() {
        for (ri, rel) in [Relation::Eq55, Relation::Ksc1, Relation::Ksc2, Relation::Ksc3, Relation::KdLeK1, Relation::K1Increment, Relation::Eq46]
            .into_iter()
            .enumerate()
        {
            tasks.push((fi * 16 + ri, sym, rel));
        }
    }
    tasks
        .par_iter()
        .map(|&(task, sym, rel)| {
            let mut rng = task_rng(seed, 1000 + task);
            match rel {
                Relation::Eq55 | Relation::Ksc1 | Relation::Ksc2 => {
                    let grid = sorted_sample(&mut rng, n.div_ceil(LAMBDAS.len()), 1e-3, 1e3);
                    relation_line(sym, rel, &grid, &LAMBDAS)
                }
                Relation::K1Increment => {
                    let grid: Vec<f64> = (0..n).map(|_| log_uniform(&mut rng, 1e-3, 1e3)).collect();
                    let lams: Vec<f64> = (0..n).map(|_| 1.0 + rng.gen::<f64>()).collect();
                    relation_line(sym, rel, &grid, &lams)
                }
                Relation::Eq46 => relation_line(sym, rel, &eq46_grid(), &[]),
                _ => {
                    let grid = sorted_sample(&mut rng, n, 1e-3, 1e3);
                    relation_line(sym, rel, &grid, &[])
                }
            }
        })
        .collect()
}

/// Radii on which the derivative identity is checked.
pub fn eq46_grid() -> Vec<f64> {
    (0..20).map(|i| 0.05 * 18f64.powf(i as f64 / 19.0)).collect()
}

fn rel_err(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn oracle_line(name: &str, family: String, errs: &[f64], tol: f64) -> CheckLine {
    let worst = errs.iter().copied().fold(0.0, |a: f64, e| if e.is_nan() { f64::NAN } else { a.max(e) });
    CheckLine {
        suite: "transforms",
        check: name.into(),
        family,
        points: errs.len(),
        failures: errs.iter().filter(|e| !(**e <= tol)).count(),
        worst,
    }
}

/// Densities are compared relative to `max(p, DENSITY_FLOOR · p(t, 0))`. The
/// oscillatory integral resolves `p` only to about `1e-13 · p(t, 0)` in
/// absolute terms, which deep Gaussian tails fall below.
const DENSITY_FLOOR: f64 = 1e-5;

/// Inversion against closed forms: Cauchy and Gaussian densities, the
/// Riesz kernel and the Gaussian resolvent in `R^3`, and the gamma-time
/// subordination route for `ψ = log(1 + |ξ|)`.
fn transforms_suite(seed: u64, n: usize) -> Vec<CheckLine> {
    let raw = InversionConfig { use_closed_forms: false, ..Default::default() };
    let mut tasks: Vec<(usize, &str, SymbolSpec)> = Vec::new();
    for d in 1..=3 {
        tasks.push((d, "CAUCHY_DENSITY", s(SymbolSpec::stable(1.0, d))));
        tasks.push((10 + d, "GAUSSIAN_DENSITY", s(SymbolSpec::gaussian(d))));
    }
    tasks.push((20, "RIESZ_GREEN", s(SymbolSpec::stable(1.0, 3))));
    tasks.push((21, "GAUSSIAN_RESOLVENT", s(SymbolSpec::gaussian(3))));
    for d in [1, 3] {
        tasks.push((30 + d, "SUBORDINATION_ROUTE", s(SymbolSpec::geometric_stable(1.0, d))));
    }
    let per = n.div_ceil(3);
    tasks
        .par_iter()
        .map(|(task, name, sym)| {
            let mut rng = task_rng(seed, 2000 + task);
            let d = sym.d;
            let errs: Vec<f64> = match *name {
                "CAUCHY_DENSITY" | "GAUSSIAN_DENSITY" => (0..per)
                    .map(|_| {
                        let t = log_uniform(&mut rng, 0.5, 2.0);
                        let x = log_uniform(&mut rng, 1e-2, 10.0);
                        let oracle = |x| if *name == "CAUCHY_DENSITY" { cauchy_density(d, t, x) } else { gaussian_density(d, t, x) };
                        let (want, scale) = (oracle(x), oracle(x).max(DENSITY_FLOOR * oracle(0.0)));
                        density_from_symbol(sym, t, x, &raw).map(|q| (q.value - want).abs() / scale).unwrap_or(f64::NAN)
                    })
                    .collect(),
                "RIESZ_GREEN" => (0..(per / 4).max(1))
                    .map(|_| {
                        let x = log_uniform(&mut rng, 1e-2, 10.0);
                        let want = 1.0 / (2.0 * PI * PI * x * x);
                        resolvent_from_symbol(sym, 0.0, x, &raw).map(|q| rel_err(q.value, want)).unwrap_or(f64::NAN)
                    })
                    .collect(),
                "GAUSSIAN_RESOLVENT" => (0..(per / 4).max(1))
                    .map(|_| {
                        let lam = log_uniform(&mut rng, 0.1, 10.0);
                        let x = log_uniform(&mut rng, 1e-2, 3.0);
                        let want = (-lam.sqrt() * x).exp() / (4.0 * PI * x);
                        resolvent_from_symbol(sym, lam, x, &raw).map(|q| rel_err(q.value, want)).unwrap_or(f64::NAN)
                    })
                    .collect(),
                _ => (0..(per / 10).max(1))
                    .map(|_| {
                        let t = log_uniform(&mut rng, 0.2, 3.0);
                        let x = log_uniform(&mut rng, 1e-2, 10.0);
                        match (geometric_stable_density(1.0, d, t, x), density_from_symbol(sym, t, x, &raw)) {
                            (Ok(a), Ok(b)) => rel_err(a.value, b.value),
                            _ => f64::NAN,
                        }
                    })
                    .collect(),
            };
            let tol = if *name == "SUBORDINATION_ROUTE" { 1e-6 } else { 1e-8 };
            oracle_line(name, label(sym), &errs, tol)
        })
        .collect()
}

/// One-sided claims with explicit constants on sampled grids, the constant
/// tables, and the Cauchy tail.
fn bounds_suite(seed: u64, n: usize) -> Vec<CheckLine> {
    const SUITE: &str = "bounds";
    let mut lines = Vec::new();
    let errs: Vec<f64> = (1..=10)
        .map(|d| {
            let dd = d as f64;
            rel_err(sv_constant(d), gamma(dd / 2.0) / (2.0 * PI.powf(dd / 2.0)))
        })
        .collect();
    let bad = errs.iter().filter(|e| !(**e <= 1e-14)).count();
    lines.push(CheckLine {
        suite: SUITE,
        check: "SV_CONSTANT_FORMULA".into(),
        family: "d=1..10".into(),
        points: errs.len(),
        failures: bad,
        worst: errs.iter().copied().fold(0.0, f64::max),
    });

    let cauchy = s(SymbolSpec::stable(1.0, 1));
    lines.push(match asym_ratio_sweep(AsymClaim::Rv, &cauchy, &AsymClaim::Rv.default_sweep(), &InversionConfig::default()) {
        Ok(r) => {
            let c = rv_constant(1.0, 1);
            let errs: Vec<f64> = r.points.iter().map(|p| rel_err(p.ratio, c)).collect();
            CheckLine {
                suite: SUITE,
                check: "RV_CAUCHY".into(),
                family: label(&cauchy),
                points: errs.len(),
                failures: errs.iter().filter(|e| !(**e <= 0.01)).count(),
                worst: errs.iter().copied().fold(0.0, f64::max),
            }
        }
        Err(e) => CheckLine { suite: SUITE, check: format!("RV_CAUCHY: {}", e.kind()), family: label(&cauchy), points: 0, failures: 1, worst: f64::NAN },
    });

    let mut rng = task_rng(seed, 3000);
    let gub_grid = SandwichGrid { t: sorted_sample(&mut rng, 4, 1e-3, 1.0), x: sorted_sample(&mut rng, n.div_ceil(40), 1e-2, 10.0) };
    let mu_grid = SandwichGrid { t: vec![], x: sorted_sample(&mut rng, n, 1e-3, 1e3) };
    let gub = SandwichOptions { constant: Some(10.0), refine: false, ..Default::default() };
    let plain = SandwichOptions { refine: false, ..Default::default() };
    let jobs: Vec<(SandwichClaim, SymbolSpec, SandwichGrid, &SandwichOptions)> = vec![
        (SandwichClaim::Gub3, cauchy.clone(), gub_grid.clone(), &gub),
        (SandwichClaim::Gub3, s(SymbolSpec::geometric_stable(1.0, 1)), gub_grid.clone(), &gub),
        (SandwichClaim::MuEst, s(SymbolSpec::subordinate_bm(Bernstein::Gamma, 1)), mu_grid, &plain),
        (SandwichClaim::Exit, s(SymbolSpec::stable(1.0, 2)), SandwichClaim::Exit.default_grid(), &plain),
    ];
    let more: Vec<CheckLine> = jobs
        .par_iter()
        .map(|(claim, sym, grid, opts)| match sandwich_check(*claim, sym, grid, opts) {
            Ok(r) => {
                let c = opts.constant.unwrap_or(1.0);
                let failures = r.points.iter().filter(|p| !(p.ratio <= c * (1.0 + 10.0 * p.rel_err) + 1e-12)).count();
                CheckLine { suite: SUITE, check: claim.id().into(), family: label(sym), points: r.points.len(), failures, worst: r.c_max }
            }
            Err(e) => CheckLine { suite: SUITE, check: format!("{}: {}", claim.id(), e.kind()), family: label(sym), points: 0, failures: 1, worst: f64::NAN },
        })
        .collect();
    lines.extend(more);
    lines
}

/// Run one suite with `n` sampled points per family and check.
pub fn run_suite(suite: Suite, seed: u64, n: usize) -> Vec<CheckLine> {
    match suite {
        Suite::Symbols => symbols_suite(seed, n),
        Suite::LevyMeasure => levy_measure_suite(seed, n),
        Suite::Transforms => transforms_suite(seed, n),
        Suite::Bounds => bounds_suite(seed, n),
    }
}
