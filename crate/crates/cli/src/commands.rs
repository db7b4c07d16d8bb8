//! Subcommands.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use levy_core::bounds::{
    asym_ratio_sweep, equivalence_diagnostics, sandwich_check, AsymClaim, Equivalence, EstimateReport, SandwichClaim, SandwichGrid,
    SandwichOptions, SweepSpec, Verdict,
};
use levy_core::kernels::{kernel_entry, EntryFlag};
use levy_core::levy_measure::{conc, nu_marginal, LevyDensity};
use levy_core::symbols::SymbolSpec;
use levy_core::transforms::{resolvent_from_symbol, InversionConfig};
use levy_core::Error;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::grid::{parse_sequence, parse_values};
use crate::output::{fmt17, fmt_opt, svg_log10, Csv};
use crate::suites::{run_suite, Suite};
use crate::{exit, CliError};

#[derive(Parser, Debug)]
#[command(name = "levy", version, about = "Heat kernels, Green functions and estimate diagnostics for isotropic unimodal Lévy processes")]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Transition density table `p(t, x)`.
    Eval(EvalArgs),
    /// Asymptotic ratio sweep towards a limit constant.
    Sweep(SweepArgs),
    /// Sandwich check of a one- or two-sided estimate, or an equivalence diagnostic.
    Check(CheckArgs),
    /// Randomized property suite: symbols, levy_measure, transforms, bounds or all.
    Verify(VerifyArgs),
    /// Resolvent / Green function table `G^λ(x)`.
    Green(GreenArgs),
    /// Lévy density and concentration functions `K_j`, `h_j`.
    Conc(ConcArgs),
}

/// Symbol from a JSON file or from inline flags.
#[derive(Args, Debug, Clone)]
pub struct SymbolArgs {
    /// JSON symbol file `{"family": ..., "d": ..., "params": {...}}`.
    #[arg(long, conflicts_with = "family")]
    pub symbol: Option<PathBuf>,
    /// Family name, e.g. GEOMETRIC_STABLE, STABLE, SUBORDINATE_BM.
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long, short = 'd')]
    pub d: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Bernstein function for SUBORDINATE_BM: GAMMA, STABLE_SUB, GEOM_SUB.
    #[arg(long)]
    pub bernstein: Option<String>,
    #[arg(long)]
    pub gamma: Option<f64>,
}

impl SymbolArgs {
    pub fn spec(&self) -> Result<SymbolSpec, CliError> {
        if let Some(p) = &self.symbol {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::io(format!("cannot read {}: {e}", p.display())))?;
            return Ok(SymbolSpec::from_json_str(&text)?);
        }
        let family = self.family.as_ref().ok_or_else(|| CliError::config("either --symbol or --family is required"))?;
        let d = self.d.ok_or_else(|| CliError::config("--d is required with --family"))?;
        let mut params = serde_json::Map::new();
        for (k, v) in [("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma)] {
            if let Some(v) = v {
                params.insert(k.into(), json!(v));
            }
        }
        if let Some(b) = &self.bernstein {
            params.insert("bernstein".into(), json!(b.to_ascii_uppercase()));
        }
        Ok(SymbolSpec::from_json(&json!({ "family": family.to_ascii_uppercase(), "d": d, "params": params }))?)
    }
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// Relative tolerance of the inversion quadrature, in (0, 1e-2].
    #[arg(long, default_value_t = 1e-9)]
    pub rel_tol: f64,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Output CSV path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl RunArgs {
    fn cfg(&self) -> Result<InversionConfig, CliError> {
        let cfg = InversionConfig { rel_tol: self.rel_tol, ..Default::default() };
        cfg.validate()?;
        Ok(cfg)
    }

    fn pool(&self) -> Result<rayon::ThreadPool, CliError> {
        let n = match self.jobs {
            Some(0) => return Err(CliError::config("--jobs must be at least 1")),
            Some(n) => n,
            None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
        };
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::config(format!("cannot start worker pool: {e}")))
    }
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[command(flatten)]
    pub symbol: SymbolArgs,
    /// Times: list `0.5,1` or grid `lo:hi:Nlog`.
    #[arg(long = "t")]
    pub t: String,
    /// Radii: grid `lo:hi:Nlog|Nlin` or a list; `0` is allowed.
    #[arg(long = "x-grid")]
    pub x_grid: String,
    /// Exit with a nonzero status when any entry fails to converge.
    #[arg(long)]
    pub strict: bool,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub symbol: SymbolArgs,
    /// SV, RV, NU, LARGE, GREEN, GREEN_INF, TAUB_SMALL, TAUB_LARGE or RATIO1.
    #[arg(long)]
    pub claim: String,
    /// Decades `k` with `|x| = 10^-k`.
    #[arg(long)]
    pub ks: Option<String>,
    /// Level of `tψ(1/|x|)` for decade sweeps.
    #[arg(long = "t-psi")]
    pub t_psi: Option<f64>,
    /// Levels of `tψ(1/|x|)` at fixed `--t`, or paired with a `--t` list.
    #[arg(long)]
    pub levels: Option<String>,
    /// Time for level sweeps; a list of the same length as `--levels` pairs them.
    #[arg(long = "t")]
    pub t: Option<String>,
    /// JSON summary path; printed to standard output when `--out` is given and this is not.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// SVG plot of the deviation against `|x|`.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[command(flatten)]
    pub symbol: SymbolArgs,
    /// Sandwich claim (THM4, BGR, PHI_PRIME, GUB3, GUB, HKLB1, GBOUND, GLAMBDA,
    /// GLAMBDA_INT, NUAPPROX, MU_EST, KSBM, R2KD, EXIT) or equivalence (THM5,
    /// THM5INF, THM9, EQUIG).
    #[arg(long)]
    pub claim: String,
    #[arg(long = "t-grid")]
    pub t_grid: Option<String>,
    #[arg(long = "x-grid")]
    pub x_grid: Option<String>,
    /// Decades for equivalence diagnostics.
    #[arg(long)]
    pub ks: Option<String>,
    /// Admissible constant for one-sided claims.
    #[arg(long)]
    pub constant: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    pub t0: f64,
    #[arg(long, default_value_t = 0.2)]
    pub r0: f64,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long = "exit-c1", default_value_t = 2.0)]
    pub exit_c1: f64,
    #[arg(long = "exit-c2", default_value_t = 0.5)]
    pub exit_c2: f64,
    /// Skip the refined-grid drift estimate of two-sided claims.
    #[arg(long = "no-refine")]
    pub no_refine: bool,
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    pub suite: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sampled points per family and check.
    #[arg(long, default_value_t = 1000)]
    pub points: usize,
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct GreenArgs {
    #[command(flatten)]
    pub symbol: SymbolArgs,
    /// Resolvent parameters; `0` gives the Green function.
    #[arg(long, default_value = "0")]
    pub lambda: String,
    #[arg(long = "x-grid")]
    pub x_grid: String,
    #[arg(long)]
    pub strict: bool,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Args, Debug)]
pub struct ConcArgs {
    #[command(flatten)]
    pub symbol: SymbolArgs,
    /// Radii.
    #[arg(long = "r-grid", alias = "x-grid")]
    pub r_grid: String,
    /// Marginal dimension; defaults to `d`.
    #[arg(long)]
    pub j: Option<usize>,
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn write_to(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::io(format!("cannot write {}: {e}", p.display()))),
        None => out.write_all(text.as_bytes()).map_err(|e| CliError::io(e.to_string())),
    }
}

fn flag_name(f: EntryFlag) -> &'static str {
    match f {
        EntryFlag::Ok => "OK",
        EntryFlag::P0Infinite => "P0_INFINITE",
        EntryFlag::NonConverged => "NON_CONVERGED",
        EntryFlag::Error => "ERROR",
    }
}

fn positive(v: &[f64], what: &str, allow_zero: bool) -> Result<(), CliError> {
    if v.iter().any(|&a| a < 0.0 || (!allow_zero && a == 0.0)) {
        return Err(CliError::config(format!("{what} values must be {}", if allow_zero { "nonnegative" } else { "positive" })));
    }
    Ok(())
}

pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::Eval(a) => cmd_eval(a, out),
        Cmd::Sweep(a) => cmd_sweep(a, out),
        Cmd::Check(a) => cmd_check(a, out),
        Cmd::Verify(a) => cmd_verify(a, out),
        Cmd::Green(a) => cmd_green(a, out),
        Cmd::Conc(a) => cmd_conc(a, out),
    }
}

fn strict_failure(bad: usize, total: usize) -> CliError {
    CliError::new(exit::NON_CONVERGED, "NON_CONVERGED", format!("{bad} of {total} entries did not converge"))
}

pub fn cmd_eval(a: EvalArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let ts = parse_values(&a.t)?;
    let xs = parse_values(&a.x_grid)?;
    positive(&ts, "t", false)?;
    positive(&xs, "x", true)?;
    let sym = a.symbol.spec()?;
    let cfg = a.run.cfg()?;
    let pts: Vec<(f64, f64)> = ts.iter().flat_map(|&t| xs.iter().map(move |&x| (t, x))).collect();
    let entries: Vec<_> = a.run.pool()?.install(|| pts.par_iter().map(|&(t, x)| kernel_entry(&sym, t, x, &cfg)).collect());
    let mut csv = Csv::new(&["t", "x", "p", "abs_err", "flag"]);
    for e in &entries {
        csv.row(&[fmt17(e.t), fmt17(e.x), fmt17(e.p), fmt17(e.abs_err), flag_name(e.flag).into()]);
    }
    write_to(a.run.out.as_deref(), &csv.finish(), out)?;
    let bad = entries.iter().filter(|e| matches!(e.flag, EntryFlag::NonConverged | EntryFlag::Error)).count();
    if a.strict && bad > 0 {
        return Err(strict_failure(bad, entries.len()));
    }
    Ok(())
}

fn sweep_spec(a: &SweepArgs, claim: AsymClaim) -> Result<SweepSpec, CliError> {
    if a.levels.is_some() && a.ks.is_some() {
        return Err(CliError::config("--levels and --ks are mutually exclusive"));
    }
    let ts = a.t.as_deref().map(parse_sequence).transpose()?;
    let single_t = |ts: &Option<Vec<f64>>| -> Result<Option<f64>, CliError> {
        match ts.as_deref() {
            None => Ok(None),
            Some([t]) => Ok(Some(*t)),
            Some(_) => Err(CliError::config("a list of --t values needs --levels of the same length")),
        }
    };
    if let Some(l) = &a.levels {
        let t_psi = parse_values(l)?;
        return match ts {
            Some(t) if t.len() > 1 => {
                if t.len() != t_psi.len() {
                    return Err(CliError::config("--t and --levels lists differ in length"));
                }
                Ok(SweepSpec::Paired { t, t_psi })
            }
            _ => Ok(SweepSpec::Levels { t: single_t(&ts)?.unwrap_or(0.2), t_psi }),
        };
    }
    let default = claim.default_sweep();
    let t_one = single_t(&ts)?;
    match (&a.ks, default) {
        (Some(ks), d) => {
            let t_psi = match d {
                SweepSpec::Decades { t_psi, .. } => a.t_psi.unwrap_or(t_psi),
                _ => a.t_psi.unwrap_or(1e-3),
            };
            Ok(SweepSpec::Decades { ks: parse_values(ks)?, t_psi })
        }
        (None, SweepSpec::Decades { ks, t_psi }) => Ok(SweepSpec::Decades { ks, t_psi: a.t_psi.unwrap_or(t_psi) }),
        (None, SweepSpec::Levels { t, t_psi }) => Ok(SweepSpec::Levels { t: t_one.unwrap_or(t), t_psi }),
        (None, SweepSpec::Paired { t, t_psi }) => match t_one {
            Some(t) => Ok(SweepSpec::Levels { t, t_psi }),
            None => Ok(SweepSpec::Paired { t, t_psi }),
        },
        (None, d) => Ok(d),
    }
}

fn summary(r: &EstimateReport) -> Value {
    let mut v = r.summary_json();
    if let Value::Object(m) = &mut v {
        m.insert("family".into(), json!(r.family));
        m.insert("d".into(), json!(r.d));
        m.insert("limit".into(), json!(r.limit));
        m.insert("deviation_final".into(), json!(r.final_deviation()));
        m.insert("tail_nonincreasing".into(), json!(r.tail_nonincreasing(3)));
        m.insert("constant".into(), json!(r.constant));
        m.insert("drift".into(), json!(r.drift));
        m.insert("notes".into(), json!(r.notes));
    }
    v
}

fn write_summary(v: &Value, path: Option<&Path>, csv_redirected: bool, out: &mut dyn Write) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(v).map_err(|e| CliError::io(e.to_string()))? + "\n";
    match path {
        Some(p) => write_to(Some(p), &text, out),
        None if csv_redirected => write_to(None, &text, out),
        None => Ok(()),
    }
}

pub fn cmd_sweep(a: SweepArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let claim = AsymClaim::parse(&a.claim)?;
    let sym = a.symbol.spec()?;
    let cfg = a.run.cfg()?;
    let spec = sweep_spec(&a, claim)?;
    let r = a.run.pool()?.install(|| asym_ratio_sweep(claim, &sym, &spec, &cfg))?;
    let mut csv = Csv::new(&["k", "t", "x", "ratio", "deviation"]);
    for p in &r.points {
        csv.row(&[fmt17(p.k), fmt_opt(p.t), fmt17(p.x), fmt17(p.ratio), fmt_opt(p.deviation)]);
    }
    write_to(a.run.out.as_deref(), &csv.finish(), out)?;
    write_summary(&summary(&r), a.summary.as_deref(), a.run.out.is_some(), out)?;
    if let Some(p) = &a.svg {
        let pts: Vec<(f64, f64)> = r
            .points
            .iter()
            .filter_map(|p| p.deviation.map(|d| (p.ln_x / std::f64::consts::LN_10, d.log10())))
            .collect();
        let title = format!("{} deviation, {} d={}", r.claim, r.family, r.d);
        write_to(Some(p), &svg_log10(&title, "log10 |x|", "log10 deviation", &pts), out)?;
    }
    Ok(())
}

pub fn cmd_check(a: CheckArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let sym = a.symbol.spec()?;
    let cfg = a.run.cfg()?;
    let claim = match SandwichClaim::parse(&a.claim) {
        Ok(c) => c,
        Err(_) => {
            let which = Equivalence::parse(&a.claim).map_err(|_| CliError::config(format!("unknown claim '{}'", a.claim)))?;
            return cmd_equivalence(&a, &sym, which, &cfg, out);
        }
    };
    let mut grid = claim.default_grid();
    if let Some(t) = &a.t_grid {
        grid.t = parse_values(t)?;
    }
    if let Some(x) = &a.x_grid {
        grid.x = parse_values(x)?;
    }
    let opts = SandwichOptions {
        t0: a.t0,
        r0: a.r0,
        lambda: a.lambda,
        constant: a.constant,
        exit_c1: a.exit_c1,
        exit_c2: a.exit_c2,
        refine: !a.no_refine,
        cfg,
    };
    let r = a.run.pool()?.install(|| sandwich_check(claim, &sym, &SandwichGrid { t: grid.t, x: grid.x }, &opts))?;
    let mut csv = Csv::new(&["k", "t", "x", "ratio", "rel_err"]);
    for p in &r.points {
        csv.row(&[fmt17(p.k), fmt_opt(p.t), fmt17(p.x), fmt17(p.ratio), fmt17(p.rel_err)]);
    }
    write_to(a.run.out.as_deref(), &csv.finish(), out)?;
    write_summary(&summary(&r), a.summary.as_deref(), a.run.out.is_some(), out)?;
    if r.verdict == Verdict::Violated {
        return Err(CliError::new(
            exit::VIOLATED,
            "VIOLATED",
            format!("{} exceeds its constant on {} (c_max = {})", r.claim, r.family, fmt17(r.c_max)),
        ));
    }
    Ok(())
}

fn cmd_equivalence(a: &CheckArgs, sym: &SymbolSpec, which: Equivalence, cfg: &InversionConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let ks = match &a.ks {
        Some(k) => parse_values(k)?,
        None => (1..=6).map(f64::from).collect(),
    };
    let r = a.run.pool()?.install(|| equivalence_diagnostics(sym, which, &ks, cfg))?;
    let mut csv = Csv::new(&["leg", "k", "value"]);
    for leg in &r.legs {
        for (k, v) in r.ks.iter().zip(&leg.values) {
            csv.row(&[leg.name.clone(), fmt17(*k), fmt17(*v)]);
        }
    }
    write_to(a.run.out.as_deref(), &csv.finish(), out)?;
    let legs: Vec<Value> = r.legs.iter().map(|l| json!({ "name": l.name, "holds": l.holds })).collect();
    let v = json!({ "claim": a.claim.to_ascii_uppercase(), "c": r.c, "outcome": r.outcome, "legs": legs });
    write_summary(&v, a.summary.as_deref(), a.run.out.is_some(), out)
}

pub fn cmd_verify(a: VerifyArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let suites = Suite::parse(&a.suite)?;
    if a.points == 0 {
        return Err(CliError::config("--points must be at least 1"));
    }
    let run = RunArgs { rel_tol: 1e-9, jobs: a.jobs, out: None };
    let pool = run.pool()?;
    let lines: Vec<_> = pool.install(|| suites.iter().flat_map(|&s| run_suite(s, a.seed, a.points)).collect());
    let mut csv = Csv::new(&["suite", "check", "family", "points", "failures", "worst", "status"]);
    for l in &lines {
        csv.row(&[
            l.suite.into(),
            l.check.clone(),
            l.family.clone(),
            l.points.to_string(),
            l.failures.to_string(),
            fmt17(l.worst),
            if l.passed() { "PASS" } else { "FAIL" }.into(),
        ]);
    }
    write_to(a.out.as_deref(), &csv.finish(), out)?;
    let failed = lines.iter().filter(|l| !l.passed()).count();
    if failed > 0 {
        return Err(CliError::new(exit::SUITE_FAILED, "SUITE_FAILED", format!("{failed} of {} checks failed", lines.len())));
    }
    Ok(())
}

pub fn cmd_green(a: GreenArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let lams = parse_values(&a.lambda)?;
    let xs = parse_values(&a.x_grid)?;
    positive(&lams, "lambda", true)?;
    positive(&xs, "x", false)?;
    let sym = a.symbol.spec()?;
    let cfg = a.run.cfg()?;
    let pts: Vec<(f64, f64)> = lams.iter().flat_map(|&l| xs.iter().map(move |&x| (l, x))).collect();
    let res: Vec<_> = a.run.pool()?.install(|| pts.par_iter().map(|&(l, x)| resolvent_from_symbol(&sym, l, x, &cfg)).collect());
    let mut csv = Csv::new(&["lambda", "x", "g", "abs_err", "flag"]);
    let mut bad = 0;
    for ((l, x), r) in pts.iter().zip(res) {
        let (g, e, flag) = match r {
            Ok(q) => (q.value, q.abs_err, if q.converged { "OK" } else { "NON_CONVERGED" }),
            Err(Error::NotTransient(m)) => return Err(Error::NotTransient(m).into()),
            Err(Error::NonConverged(_)) => (f64::NAN, f64::NAN, "NON_CONVERGED"),
            Err(_) => (f64::NAN, f64::NAN, "ERROR"),
        };
        if flag != "OK" {
            bad += 1;
        }
        csv.row(&[fmt17(*l), fmt17(*x), fmt17(g), fmt17(e), flag.into()]);
    }
    write_to(a.run.out.as_deref(), &csv.finish(), out)?;
    if a.strict && bad > 0 {
        return Err(strict_failure(bad, pts.len()));
    }
    Ok(())
}

pub fn cmd_conc(a: ConcArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let rs = parse_values(&a.r_grid)?;
    positive(&rs, "r", false)?;
    let sym = a.symbol.spec()?;
    let ld = LevyDensity::from_symbol(&sym)?;
    let j = a.j.unwrap_or(sym.d);
    if j == 0 || j > sym.d {
        return Err(CliError::config(format!("--j must lie in [1, {}]", sym.d)));
    }
    let run = RunArgs { rel_tol: 1e-9, jobs: a.jobs, out: None };
    let rows: Vec<_> = run.pool()?.install(|| {
        rs.par_iter()
            .map(|&r| {
                let nu = nu_marginal(&ld, j, r);
                let c = conc(&ld, j, r);
                (r, nu, c)
            })
            .collect()
    });
    let mut csv = Csv::new(&["r", "nu", "k", "h", "flag"]);
    for (r, nu, c) in rows {
        let flag = if nu.is_ok() && c.is_ok() { "OK" } else { "ERROR" };
        let nu = nu.unwrap_or(f64::NAN);
        let (k, h) = c.map(|(k, tail)| (k, k + tail)).unwrap_or((f64::NAN, f64::NAN));
        csv.row(&[fmt17(r), fmt17(nu), fmt17(k), fmt17(h), flag.into()]);
    }
    write_to(a.out.as_deref(), &csv.finish(), out)
}
