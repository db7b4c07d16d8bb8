//! Limit-ratio sweeps for the asymptotic formulas and sandwich checks for the
//! two-sided and one-sided estimates of `p`, `G^λ`, `ν` and `μ`.

use std::f64::consts::{E, LN_10, PI};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::levy_measure::{conc, k_fn, nu_eval, LevyDensity};
use crate::quad::{integrate_points, Tol};
use crate::special_fn::ln_gamma;
use crate::symbols::{scaling_exponents, Bernstein, Family, SymbolSpec};
use crate::transforms::{
    density_at_origin, density_from_symbol, density_scaled, resolvent_from_symbol, resolvent_scaled,
    tauberian_ratio, transience_integral, InversionConfig, TauberianRegime,
};

/// `Γ(d/2) / (2π^{d/2})`, the limit in the slowly varying formulas.
pub fn sv_constant(d: usize) -> f64 {
    let d = d as f64;
    (ln_gamma(d / 2.0) - (d / 2.0) * PI.ln()).exp() / 2.0
}

/// `A_{d,α} = α 2^{α−1} π^{−d/2−1} sin(απ/2) Γ(α/2) Γ((α+d)/2)`.
pub fn rv_constant(alpha: f64, d: usize) -> f64 {
    let d = d as f64;
    alpha * 2f64.powf(alpha - 1.0) * PI.powf(-d / 2.0 - 1.0) * (alpha * PI / 2.0).sin()
        * (ln_gamma(alpha / 2.0) + ln_gamma((alpha + d) / 2.0)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConstantClaim {
    Sv,
    Rv(f64),
}

pub fn asym_constant(claim: ConstantClaim, d: usize) -> Result<f64> {
    match claim {
        ConstantClaim::Sv => Ok(sv_constant(d)),
        ConstantClaim::Rv(alpha) => {
            if !(alpha > 0.0 && alpha < 2.0) {
                return domain(format!("RV constant needs 0 < alpha < 2, got {alpha}"));
            }
            Ok(rv_constant(alpha, d))
        }
    }
}

/// Potential constant of `ψ(u) = u^α` with the factor `π^{d/2}` and in its
/// classical form with `π^{−d/2}`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RieszConstants {
    pub pi_positive: f64,
    pub classical: f64,
}

pub fn riesz_constants(alpha: f64, d: usize) -> Result<RieszConstants> {
    let dd = d as f64;
    if !(alpha > 0.0 && alpha < 2.0 && alpha < dd) {
        return domain(format!("Riesz constants need 0 < alpha < min(2, d), got alpha={alpha}, d={d}"));
    }
    let core = 2f64.powf(-alpha) * (ln_gamma((dd - alpha) / 2.0) - ln_gamma(alpha / 2.0)).exp();
    Ok(RieszConstants { pi_positive: core * PI.powf(dd / 2.0), classical: core * PI.powf(-dd / 2.0) })
}

#[derive(Debug, Clone, Serialize)]
pub struct RieszDiagnostic {
    pub alpha: f64,
    pub d: usize,
    pub constants: RieszConstants,
    /// `G(x)|x|^d ψ(1/|x|)` at each radius.
    pub computed: Vec<(f64, f64)>,
    pub matches_pi_positive: bool,
    pub matches_classical: bool,
}

/// Evaluates `G(x)|x|^dψ(1/|x|)` for the stable law and compares with both constants.
pub fn riesz_diagnostic(alpha: f64, d: usize, radii: &[f64], cfg: &InversionConfig) -> Result<RieszDiagnostic> {
    let constants = riesz_constants(alpha, d)?;
    let sym = SymbolSpec::stable(alpha, d)?;
    let mut computed = Vec::with_capacity(radii.len());
    for &x in radii {
        let g = resolvent_from_symbol(&sym, 0.0, x, cfg)?.value;
        computed.push((x, g * x.powi(d as i32) * sym.psi(1.0 / x)));
    }
    let near = |c: f64| computed.iter().all(|&(_, v)| (v / c - 1.0).abs() < 1e-6);
    Ok(RieszDiagnostic {
        alpha,
        d,
        constants,
        matches_pi_positive: near(constants.pi_positive),
        matches_classical: near(constants.classical),
        computed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Consistent,
    Violated,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ReportPoint {
    /// Sweep parameter (`k`, a `tψ` level, or an index) or grid index.
    pub k: f64,
    pub t: Option<f64>,
    /// `ln |x|`; `x` underflows to zero for the deepest sweeps.
    pub ln_x: f64,
    pub x: f64,
    pub ratio: f64,
    /// Relative quadrature error of the computed quantity.
    pub rel_err: f64,
    pub deviation: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateReport {
    pub claim: String,
    pub family: String,
    pub d: usize,
    pub points: Vec<ReportPoint>,
    /// Limit the ratio is compared with (sweeps only).
    pub limit: Option<f64>,
    pub c_min: f64,
    pub c_max: f64,
    /// Deviation sequence `|ratio/limit − 1|` (sweeps only).
    pub trend: Vec<f64>,
    pub verdict: Verdict,
    /// Fitted or admissible constant, depending on the claim.
    pub constant: Option<f64>,
    /// Relative change of `c_max/c_min` when the grid is refined.
    pub drift: Option<f64>,
    pub notes: Vec<String>,
}

impl EstimateReport {
    pub fn final_deviation(&self) -> Option<f64> {
        self.trend.last().copied()
    }

    /// Whether the last `n` deviations are nonincreasing.
    pub fn tail_nonincreasing(&self, n: usize) -> bool {
        let m = self.trend.len();
        let s = &self.trend[m.saturating_sub(n)..];
        s.windows(2).all(|w| w[1] <= w[0])
    }

    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "claim": self.claim,
            "c_min": self.c_min,
            "c_max": self.c_max,
            "verdict": self.verdict,
        })
    }
}

fn min_max(v: impl Iterator<Item = f64>) -> (f64, f64) {
    v.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)))
}

// ---------------------------------------------------------------- evaluation

/// `|x|^d e^{tc} p(t, x)` with `|x| = e^{−y}`, and its relative error.
fn p_base(sym: &SymbolSpec, t: f64, y: f64, c: f64, cfg: &InversionConfig) -> Result<(f64, f64)> {
    let d = sym.d as f64;
    if y.abs() < 600.0 && t * c < 600.0 {
        let q = density_from_symbol(sym, t, (-y).exp(), cfg)?;
        let rel = if q.value != 0.0 { q.abs_err / q.value.abs() } else { 0.0 };
        return Ok((q.value * (t * c - d * y).exp(), rel));
    }
    let q = density_scaled(sym, t, -y, c, cfg)?;
    let rel = if q.value != 0.0 { q.abs_err / q.value.abs() } else { 0.0 };
    Ok((q.value * (2.0 * PI).powf(-d / 2.0), rel))
}

/// `|x|^d G^λ(x)` with `|x| = e^{−y}`.
fn g_base(sym: &SymbolSpec, lam: f64, y: f64, cfg: &InversionConfig) -> Result<(f64, f64)> {
    let d = sym.d as f64;
    if y.abs() < 600.0 {
        let q = resolvent_from_symbol(sym, lam, (-y).exp(), cfg)?;
        let rel = if q.value != 0.0 { q.abs_err / q.value.abs() } else { 0.0 };
        return Ok((q.value * (-d * y).exp(), rel));
    }
    if lam == 0.0 && transience_integral(sym, 0.0).is_none() {
        return Err(Error::NotTransient(format!("{} in d={} is recurrent", sym.family.name(), sym.d)));
    }
    let q = resolvent_scaled(sym, lam, -y, cfg)?;
    let rel = if q.value != 0.0 { q.abs_err / q.value.abs() } else { 0.0 };
    Ok((q.value * (2.0 * PI).powf(-d / 2.0), rel))
}

fn ell_at(sym: &SymbolSpec, y: f64) -> Result<f64> {
    sym.ell_ln(y)
        .ok_or_else(|| Error::Unsupported(format!("{} has no auxiliary function", sym.family.name())))
}

/// `(ψ(e^{y+1}) − ψ(e^y))`, the increment over one unit of `log u`.
fn ell_increment(sym: &SymbolSpec, y: f64) -> f64 {
    sym.psi_ln(y + 1.0) - sym.psi_ln(y)
}

/// `y` with `ψ(e^y) = level`, for nondecreasing `ψ`.
fn solve_psi_level(sym: &SymbolSpec, level: f64) -> Result<f64> {
    let mut lo = -700.0;
    if sym.psi_ln(lo) >= level {
        return Err(Error::RegimeUnreachable(format!("ψ already exceeds {level:e} at u = e^-700")));
    }
    let mut hi = 1.0f64;
    while sym.psi_ln(hi) < level {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::RegimeUnreachable(format!("ψ stays below {level:e}")));
        }
    }
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if sym.psi_ln(mid) < level {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.abs().max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn bernstein_of(sym: &SymbolSpec) -> Result<Bernstein> {
    match &sym.family {
        Family::SubordinateBm(b) => Ok(*b),
        Family::GeometricStable { alpha } if *alpha == 2.0 => Ok(Bernstein::Gamma),
        Family::Stable { alpha } if *alpha < 2.0 => Ok(Bernstein::StableSub { gamma: alpha / 2.0 }),
        f => Err(Error::Unsupported(format!("{} is not a subordinate Brownian motion", f.name()))),
    }
}

/// `∫_0^{e^{top}} g(u) du` for `g` integrable at the origin, in `ln u`.
fn integral_to(g: impl Fn(f64) -> f64, top: f64) -> f64 {
    let f = |y: f64| {
        let u = y.exp();
        g(u) * u
    };
    let mut pts = Vec::new();
    let mut a = top - 120.0;
    while a < top {
        pts.push(a);
        a += 4.0;
    }
    pts.push(top);
    integrate_points(f, &pts, Tol::new(0.0, 1e-11)).value
}

// ---------------------------------------------------------------- sweeps

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AsymClaim {
    Sv,
    Nu,
    Large,
    Green,
    GreenInf,
    TaubSmall,
    TaubLarge,
    Rv,
    Ratio1,
}

impl AsymClaim {
    pub const ALL: [AsymClaim; 9] = [
        AsymClaim::Sv,
        AsymClaim::Nu,
        AsymClaim::Large,
        AsymClaim::Green,
        AsymClaim::GreenInf,
        AsymClaim::TaubSmall,
        AsymClaim::TaubLarge,
        AsymClaim::Rv,
        AsymClaim::Ratio1,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            AsymClaim::Sv => "SV",
            AsymClaim::Nu => "NU",
            AsymClaim::Large => "LARGE",
            AsymClaim::Green => "GREEN",
            AsymClaim::GreenInf => "GREEN_INF",
            AsymClaim::TaubSmall => "TAUB_SMALL",
            AsymClaim::TaubLarge => "TAUB_LARGE",
            AsymClaim::Rv => "RV",
            AsymClaim::Ratio1 => "RATIO1",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let u = s.to_ascii_uppercase();
        Self::ALL
            .into_iter()
            .find(|c| c.id() == u)
            .ok_or_else(|| Error::Parse(format!("unknown sweep claim '{s}'")))
    }

    /// A sweep reaching the claim's regime for typical symbols.
    pub fn default_sweep(&self) -> SweepSpec {
        match self {
            AsymClaim::Sv | AsymClaim::Rv | AsymClaim::Nu | AsymClaim::TaubSmall => {
                SweepSpec::Decades { ks: (2..=6).map(f64::from).collect(), t_psi: 1e-3 }
            }
            AsymClaim::Large => SweepSpec::Levels { t: 0.2, t_psi: vec![10.0, 30.0, 100.0] },
            // The Laplace-side limit needs t → 0 as well as tψ → ∞.
            AsymClaim::TaubLarge => SweepSpec::Paired { t: vec![0.2, 0.05, 0.01, 0.002], t_psi: vec![10.0, 30.0, 100.0, 300.0] },
            AsymClaim::Green => SweepSpec::Decades { ks: (2..=5).map(f64::from).collect(), t_psi: 1e-3 },
            AsymClaim::GreenInf => SweepSpec::Decades { ks: (2..=5).map(|k| -f64::from(k)).collect(), t_psi: 1e-3 },
            AsymClaim::Ratio1 => SweepSpec::Decades { ks: (1..=5).map(f64::from).collect(), t_psi: 100.0 },
        }
    }
}

/// How the sweep approaches the claim's limit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum SweepSpec {
    /// `|x| = 10^{−k}`, `t = t_psi / ψ(1/|x|)`. Negative `k` sweeps outward.
    Decades { ks: Vec<f64>, t_psi: f64 },
    /// Fixed `t`; `|x|` solved from `tψ(1/|x|) = level` for each level.
    Levels { t: f64, t_psi: Vec<f64> },
    /// `t` and the level of `tψ(1/|x|)` moving together.
    Paired { t: Vec<f64>, t_psi: Vec<f64> },
    /// Explicit `(t, |x|)` pairs.
    Points(Vec<(f64, f64)>),
}

impl SweepSpec {
    /// `(k, t, y)` triples with `y = ln(1/|x|)`.
    fn resolve(&self, sym: &SymbolSpec) -> Result<Vec<(f64, f64, f64)>> {
        let mut out = Vec::new();
        match self {
            SweepSpec::Decades { ks, t_psi } => {
                if !(*t_psi > 0.0) {
                    return domain("sweep tψ must be positive");
                }
                for &k in ks {
                    let y = k * LN_10;
                    let psi = sym.psi_ln(y);
                    if !(psi > 0.0) || !psi.is_finite() {
                        return Err(Error::RegimeUnreachable(format!("ψ(10^{k}) = {psi}")));
                    }
                    let t = t_psi / psi;
                    if !(t > 0.0) || !t.is_finite() {
                        return Err(Error::RegimeUnreachable(format!("no finite t gives tψ = {t_psi} at k = {k}")));
                    }
                    out.push((k, t, y));
                }
            }
            SweepSpec::Levels { t, t_psi } => {
                if !(*t > 0.0) {
                    return domain("sweep t must be positive");
                }
                for &lv in t_psi {
                    if !(lv > 0.0) {
                        return domain("sweep tψ levels must be positive");
                    }
                    out.push((lv, *t, solve_psi_level(sym, lv / t)?));
                }
            }
            SweepSpec::Paired { t, t_psi } => {
                if t.len() != t_psi.len() {
                    return domain("paired sweep needs as many t values as tψ levels");
                }
                for (&t, &lv) in t.iter().zip(t_psi) {
                    if !(t > 0.0 && lv > 0.0) {
                        return domain("paired sweep needs t > 0 and tψ > 0");
                    }
                    out.push((lv, t, solve_psi_level(sym, lv / t)?));
                }
            }
            SweepSpec::Points(p) => {
                for (i, &(t, x)) in p.iter().enumerate() {
                    if !(t > 0.0 && x > 0.0) {
                        return domain("sweep points need t > 0 and |x| > 0");
                    }
                    out.push((i as f64, t, -x.ln()));
                }
            }
        }
        if out.is_empty() {
            return domain("sweep is empty");
        }
        Ok(out)
    }
}

fn asym_limit(claim: AsymClaim, sym: &SymbolSpec) -> Result<f64> {
    let d = sym.d;
    Ok(match claim {
        AsymClaim::Sv | AsymClaim::Large | AsymClaim::Green | AsymClaim::GreenInf => sv_constant(d),
        AsymClaim::Nu | AsymClaim::Ratio1 => 1.0,
        AsymClaim::TaubSmall | AsymClaim::TaubLarge => 0.5,
        AsymClaim::Rv => {
            let alpha = match &sym.family {
                Family::Stable { alpha } => *alpha,
                Family::SubordinateBm(Bernstein::StableSub { gamma }) => 2.0 * gamma,
                f => {
                    return Err(Error::Unsupported(format!(
                        "RV needs a regularly varying exponent with known index; {} has none",
                        f.name()
                    )))
                }
            };
            asym_constant(ConstantClaim::Rv(alpha), d)?
        }
    })
}

/// One sweep point: `Ok(None)` when the point is skipped.
fn asym_point(
    claim: AsymClaim,
    sym: &SymbolSpec,
    ld: Option<&LevyDensity>,
    t: f64,
    y: f64,
    cfg: &InversionConfig,
) -> Result<Option<(f64, f64)>> {
    let d = sym.d as f64;
    Ok(Some(match claim {
        AsymClaim::Sv => {
            let (b, e) = p_base(sym, t, y, 0.0, cfg)?;
            (b / (t * ell_at(sym, y)?), e)
        }
        AsymClaim::Nu => {
            let ld = ld.expect("NU needs ν");
            let (b, e) = p_base(sym, t, y, 0.0, cfg)?;
            let nu = nu_eval(ld, (-y).exp())?;
            (b / (t * nu * (-d * y).exp()), e)
        }
        AsymClaim::Large => {
            let c = sym.psi_ln(y);
            let (b, e) = p_base(sym, t, y, c, cfg)?;
            (b / (t * ell_at(sym, y)?), e)
        }
        AsymClaim::Green => {
            let (g, e) = g_base(sym, 0.0, y, cfg)?;
            let psi = sym.psi_ln(y);
            (g * psi * psi / ell_at(sym, y)?, e)
        }
        AsymClaim::GreenInf => {
            let (g, e) = g_base(sym, 0.0, y, cfg)?;
            let psi = sym.psi_ln(y);
            (g * psi * psi / ell_increment(sym, y), e)
        }
        AsymClaim::TaubSmall | AsymClaim::TaubLarge => {
            let regime = if claim == AsymClaim::TaubSmall { TauberianRegime::Small } else { TauberianRegime::Large };
            let r = tauberian_ratio(sym, t, 2.0 * y, regime, 1.05)?;
            (r.ratio, 0.0)
        }
        AsymClaim::Rv => {
            let (b, e) = p_base(sym, t, y, 0.0, cfg)?;
            (b / (t * sym.psi_ln(y)), e)
        }
        AsymClaim::Ratio1 => {
            let p0 = match density_at_origin(sym, t, cfg) {
                Ok(q) => q.value,
                Err(Error::P0Infinite) => return Ok(None),
                Err(e) => return Err(e),
            };
            let q = density_from_symbol(sym, t, (-y).exp(), cfg)?;
            (q.value / p0, q.abs_err / q.value.abs().max(1e-300))
        }
    }))
}

/// Ratio of the computed quantity to the claim's normaliser along a sweep
/// approaching the claim's regime, with deviations from the limit constant.
pub fn asym_ratio_sweep(claim: AsymClaim, sym: &SymbolSpec, sweep: &SweepSpec, cfg: &InversionConfig) -> Result<EstimateReport> {
    let limit = asym_limit(claim, sym)?;
    let pts = sweep.resolve(sym)?;
    let ld = if claim == AsymClaim::Nu { Some(LevyDensity::from_symbol(sym)?) } else { None };
    if matches!(claim, AsymClaim::Sv | AsymClaim::Large | AsymClaim::Green | AsymClaim::TaubSmall | AsymClaim::TaubLarge) {
        ell_at(sym, 1.0)?;
    }
    let vals: Vec<Result<Option<(f64, f64)>>> = pts
        .par_iter()
        .map(|&(_, t, y)| asym_point(claim, sym, ld.as_ref(), t, y, cfg))
        .collect();
    let mut points = Vec::new();
    let mut notes = Vec::new();
    for (&(k, t, y), v) in pts.iter().zip(vals) {
        match v? {
            Some((ratio, rel_err)) => {
                let dev = (ratio / limit - 1.0).abs();
                let t = if matches!(claim, AsymClaim::Green | AsymClaim::GreenInf) { None } else { Some(t) };
                points.push(ReportPoint { k, t, ln_x: -y, x: (-y).exp(), ratio, rel_err, deviation: Some(dev) });
            }
            None => notes.push(format!("k={k}: p(t,0) is infinite, point skipped")),
        }
    }
    if points.is_empty() {
        return Err(Error::RegimeUnreachable(format!("no sweep point satisfies the {} regime", claim.id())));
    }
    let trend: Vec<f64> = points.iter().filter_map(|p| p.deviation).collect();
    let (c_min, c_max) = min_max(points.iter().map(|p| p.ratio));
    let mut report = EstimateReport {
        claim: claim.id().into(),
        family: sym.family.name().into(),
        d: sym.d,
        points,
        limit: Some(limit),
        c_min,
        c_max,
        trend,
        verdict: Verdict::Inconclusive,
        constant: None,
        drift: None,
        notes,
    };
    let settled = {
        let m = report.trend.len();
        report.trend[m.saturating_sub(3)..].windows(2).all(|w| w[1] <= w[0] + 1e-12)
    };
    if c_min.is_finite() && c_max.is_finite() && settled {
        report.verdict = Verdict::Consistent;
    }
    Ok(report)
}

// ---------------------------------------------------------------- sandwiches

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SandwichClaim {
    Thm4,
    Bgr,
    PhiPrime,
    Gub3,
    Gub,
    Hklb1,
    Gbound,
    Glambda,
    GlambdaInt,
    Nuapprox,
    MuEst,
    Ksbm,
    R2kd,
    Exit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Two,
    Upper,
    Lower,
}

impl SandwichClaim {
    pub const ALL: [SandwichClaim; 14] = [
        SandwichClaim::Thm4,
        SandwichClaim::Bgr,
        SandwichClaim::PhiPrime,
        SandwichClaim::Gub3,
        SandwichClaim::Gub,
        SandwichClaim::Hklb1,
        SandwichClaim::Gbound,
        SandwichClaim::Glambda,
        SandwichClaim::GlambdaInt,
        SandwichClaim::Nuapprox,
        SandwichClaim::MuEst,
        SandwichClaim::Ksbm,
        SandwichClaim::R2kd,
        SandwichClaim::Exit,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            SandwichClaim::Thm4 => "THM4",
            SandwichClaim::Bgr => "BGR",
            SandwichClaim::PhiPrime => "PHI_PRIME",
            SandwichClaim::Gub3 => "GUB3",
            SandwichClaim::Gub => "GUB",
            SandwichClaim::Hklb1 => "HKLB1",
            SandwichClaim::Gbound => "GBOUND",
            SandwichClaim::Glambda => "GLAMBDA",
            SandwichClaim::GlambdaInt => "GLAMBDA_INT",
            SandwichClaim::Nuapprox => "NUAPPROX",
            SandwichClaim::MuEst => "MU_EST",
            SandwichClaim::Ksbm => "KSBM",
            SandwichClaim::R2kd => "R2KD",
            SandwichClaim::Exit => "EXIT",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let u = s.to_ascii_uppercase();
        Self::ALL
            .into_iter()
            .find(|c| c.id() == u)
            .ok_or_else(|| Error::Parse(format!("unknown sandwich claim '{s}'")))
    }

    fn side(&self) -> Side {
        match self {
            SandwichClaim::Thm4
            | SandwichClaim::Bgr
            | SandwichClaim::PhiPrime
            | SandwichClaim::Ksbm
            | SandwichClaim::R2kd
            | SandwichClaim::Glambda => Side::Two,
            SandwichClaim::Hklb1 => Side::Lower,
            _ => Side::Upper,
        }
    }

    /// Whether the claim is a comparability (`≍`) statement.
    pub fn is_two_sided(&self) -> bool {
        self.side() == Side::Two
    }

    /// Claims whose envelope does not involve `t`.
    pub fn time_free(&self) -> bool {
        matches!(
            self,
            SandwichClaim::Gbound
                | SandwichClaim::Glambda
                | SandwichClaim::GlambdaInt
                | SandwichClaim::Nuapprox
                | SandwichClaim::MuEst
                | SandwichClaim::Ksbm
                | SandwichClaim::R2kd
        )
    }

    /// Constants fixed by the statement itself.
    fn built_in_constant(&self) -> Option<f64> {
        match self {
            // μ(s) ≤ 3e s^{−3}|φ″(1/s)|: the envelope carries the constant.
            SandwichClaim::MuEst => Some(1.0),
            // lower exit envelope ≤ upper exit envelope
            SandwichClaim::Exit => Some(1.0),
            _ => None,
        }
    }

    fn needs_bernstein(&self) -> bool {
        matches!(
            self,
            SandwichClaim::PhiPrime
                | SandwichClaim::Glambda
                | SandwichClaim::GlambdaInt
                | SandwichClaim::Nuapprox
                | SandwichClaim::MuEst
                | SandwichClaim::Ksbm
                | SandwichClaim::R2kd
        )
    }

    /// A grid inside the claim's validity region for typical symbols.
    pub fn default_grid(&self) -> SandwichGrid {
        let logspace = |lo: f64, hi: f64, n: usize| -> Vec<f64> {
            (0..n).map(|i| (lo.ln() + (hi / lo).ln() * i as f64 / (n - 1) as f64).exp()).collect()
        };
        match self {
            SandwichClaim::Thm4 => SandwichGrid { t: logspace(1e-3, 0.45, 6), x: logspace(1e-4, 0.2, 8) },
            SandwichClaim::Bgr | SandwichClaim::PhiPrime => {
                SandwichGrid { t: logspace(1e-6, 1e-4, 3), x: logspace(1e-3, 0.2, 8) }
            }
            SandwichClaim::Gub3 | SandwichClaim::Hklb1 => SandwichGrid { t: logspace(1e-3, 1.0, 4), x: logspace(1e-2, 10.0, 8) },
            SandwichClaim::Gub => SandwichGrid { t: logspace(1e-3, 0.3, 4), x: logspace(1e-2, 10.0, 8) },
            SandwichClaim::Exit => SandwichGrid { t: logspace(1e-2, 10.0, 4), x: logspace(1e-2, 10.0, 6) },
            SandwichClaim::MuEst => SandwichGrid { t: vec![], x: logspace(1e-3, 1e3, 25) },
            SandwichClaim::Ksbm => SandwichGrid { t: vec![], x: logspace(0.1, 3.0, 10) },
            _ => SandwichGrid { t: vec![], x: logspace(1e-2, 0.9, 8) },
        }
    }
}

/// Product grid `t × x`; `t` is ignored by time-free claims.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichGrid {
    pub t: Vec<f64>,
    pub x: Vec<f64>,
}

impl SandwichGrid {
    /// Inserts the geometric midpoint between neighbours on both axes.
    pub fn refined(&self) -> SandwichGrid {
        let refine = |v: &[f64]| -> Vec<f64> {
            let mut out = Vec::with_capacity(2 * v.len());
            for (i, &a) in v.iter().enumerate() {
                out.push(a);
                if let Some(&b) = v.get(i + 1) {
                    out.push((a * b).sqrt());
                }
            }
            out
        };
        SandwichGrid { t: refine(&self.t), x: refine(&self.x) }
    }

    fn validate(&self, time_free: bool) -> Result<()> {
        let ok = |v: &[f64]| v.iter().all(|&a| a > 0.0 && a.is_finite()) && v.windows(2).all(|w| w[1] > w[0]);
        if self.x.is_empty() || !ok(&self.x) || !ok(&self.t) || (!time_free && self.t.is_empty()) {
            return domain("sandwich grid must be nonempty, positive and strictly increasing");
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SandwichOptions {
    /// Time threshold for claims stated for small `t`.
    pub t0: f64,
    /// Radius threshold for claims stated near the origin.
    pub r0: f64,
    /// `λ` for the resolvent claims.
    pub lambda: f64,
    /// Admissible constant; violations are judged against it when present.
    pub constant: Option<f64>,
    pub exit_c1: f64,
    pub exit_c2: f64,
    /// Re-evaluate two-sided claims on the refined grid.
    pub refine: bool,
    pub cfg: InversionConfig,
}

impl Default for SandwichOptions {
    fn default() -> Self {
        SandwichOptions {
            t0: 0.5,
            r0: 0.2,
            lambda: 1.0,
            constant: None,
            exit_c1: 2.0,
            exit_c2: 0.5,
            refine: true,
            cfg: InversionConfig::default(),
        }
    }
}

pub const HKLB1_EXPONENTS: [f64; 5] = [1.0, 2.0, 4.0, 8.0, PI * PI];

struct Ctx<'a> {
    sym: &'a SymbolSpec,
    ld: Option<LevyDensity>,
    b: Option<Bernstein>,
    opts: &'a SandwichOptions,
}

impl Ctx<'_> {
    fn ld(&self) -> &LevyDensity {
        self.ld.as_ref().expect("claim needs ν")
    }
    fn b(&self) -> Bernstein {
        self.b.expect("claim needs a Bernstein function")
    }
}

/// Per-point value: `(ratio, rel_err, tψ(1/|x|))`; `None` when outside the region.
type PointValue = Option<(f64, f64, f64)>;

fn sandwich_point(claim: SandwichClaim, cx: &Ctx, t: f64, x: f64) -> Result<PointValue> {
    let sym = cx.sym;
    let o = cx.opts;
    let cfg = &o.cfg;
    let d = sym.d as f64;
    let y = -x.ln();
    let psi = sym.psi_ln(y);
    let tpsi = t * psi;
    let v = match claim {
        SandwichClaim::Thm4 => {
            if !(t < o.t0 && x <= o.r0) {
                return Ok(None);
            }
            let (b, e) = p_base(sym, t, y, psi, cfg)?;
            (b / (t * ell_at(sym, y)?), e)
        }
        SandwichClaim::Bgr => {
            if !(x <= o.r0 && tpsi <= 1.0) {
                return Ok(None);
            }
            let (b, e) = p_base(sym, t, y, 0.0, cfg)?;
            (b / tpsi, e)
        }
        SandwichClaim::PhiPrime => {
            if !(x <= o.r0 && tpsi <= 1.0) {
                return Ok(None);
            }
            let (b, e) = p_base(sym, t, y, 0.0, cfg)?;
            let u = x.powi(-2);
            (b / (t * u * cx.b().phi_prime(u)), e)
        }
        SandwichClaim::Gub3 => {
            let (b, e) = p_base(sym, t, y, 0.0, cfg)?;
            (b / (t * k_fn(cx.ld(), sym.d, x)?), e)
        }
        SandwichClaim::Gub => {
            if !(t < o.t0) {
                return Ok(None);
            }
            let (b, e) = p_base(sym, t, y, psi, cfg)?;
            (b / (t * 3.0 * k_fn(cx.ld(), 1, x)?), e)
        }
        SandwichClaim::Hklb1 => {
            // ratio at c = 0; the exponent is fitted afterwards
            let (b, e) = p_base(sym, t, y, 0.0, cfg)?;
            let nu = nu_eval(cx.ld(), x)?;
            (b / (t * nu * x.powf(d)), e)
        }
        SandwichClaim::Gbound => {
            let (g, e) = g_base(sym, 0.0, y, cfg)?;
            let (k, tail) = conc(cx.ld(), sym.d, x)?;
            let h = k + tail;
            (g * h * h / k_fn(cx.ld(), 1, x)?, e)
        }
        SandwichClaim::Glambda => {
            let (g, e) = g_base(sym, o.lambda, y, cfg)?;
            let b = cx.b();
            let u = x.powi(-2);
            let den = o.lambda + b.phi(u);
            (g * den * den / (u * b.phi_prime(u)), e)
        }
        SandwichClaim::GlambdaInt => {
            let (g, e) = g_base(sym, o.lambda, y, cfg)?;
            let b = cx.b();
            let lam = o.lambda;
            let half = d / 2.0;
            let int = integral_to(
                |u| {
                    let den = lam + b.phi(u);
                    b.phi_prime(u) * u.powf(half) / (den * den)
                },
                2.0 * y,
            );
            (g * x.powf(-d) / int, e)
        }
        SandwichClaim::Nuapprox => {
            let nu = nu_eval(cx.ld(), x)?;
            let u = x.powi(-2);
            (nu / (x.powf(-d - 4.0) * cx.b().phi_second(u).abs()), 1e-9)
        }
        SandwichClaim::MuEst => {
            let mu = cx.b().mu_density().ok_or_else(|| Error::MissingNu("subordinator density unknown".into()))?;
            let s = x;
            (mu(s) / (3.0 * E * s.powi(-3) * cx.b().phi_second(1.0 / s).abs()), 1e-14)
        }
        SandwichClaim::Ksbm => {
            let b = cx.b();
            let half = d / 2.0;
            let lhs = integral_to(|u| u.powf(half) * b.phi_prime(u), 2.0 * x.ln());
            let rhs = x.powf(d) * k_fn(cx.ld(), sym.d, 1.0 / x)?;
            (lhs / rhs, 1e-9)
        }
        SandwichClaim::R2kd => {
            let k = k_fn(cx.ld(), sym.d, x)?;
            (x * x * k / cx.b().phi_prime(x.powi(-2)), 1e-9)
        }
        SandwichClaim::Exit => {
            let (k, tail) = conc(cx.ld(), sym.d, x)?;
            let th = t * (k + tail);
            let (c1, c2) = (o.exit_c1, o.exit_c2);
            // (c1^{-1} e^{−th/c2}) / (c1 e^{−c2 th})
            (((c2 - 1.0 / c2) * th).exp() / (c1 * c1), 0.0)
        }
    };
    Ok(Some((v.0, v.1, tpsi)))
}

fn eval_grid(claim: SandwichClaim, cx: &Ctx, grid: &SandwichGrid) -> Result<Vec<(usize, f64, f64, (f64, f64, f64))>> {
    let ts: Vec<f64> = if claim.time_free() { vec![f64::NAN] } else { grid.t.clone() };
    let cells: Vec<(f64, f64)> = ts.iter().flat_map(|&t| grid.x.iter().map(move |&x| (t, x))).collect();
    let vals: Vec<Result<PointValue>> = cells.par_iter().map(|&(t, x)| sandwich_point(claim, cx, t, x)).collect();
    let mut out = Vec::new();
    for (i, (&(t, x), v)) in cells.iter().zip(vals).enumerate() {
        if let Some(v) = v? {
            out.push((i, t, x, v));
        }
    }
    if out.is_empty() {
        return domain(format!("no grid point lies in the {} region", claim.id()));
    }
    Ok(out)
}

/// Smallest `c` from [`HKLB1_EXPONENTS`] for which the minimum of
/// `p / (tν e^{−ctψ})` over the grid is at least half its minimum over the
/// points with `tψ ≤ 1`.
fn fit_hklb1(vals: &[(usize, f64, f64, (f64, f64, f64))]) -> Option<f64> {
    let near = vals.iter().filter(|v| v.3 .2 <= 1.0).map(|v| v.3 .0).fold(f64::INFINITY, f64::min);
    HKLB1_EXPONENTS.into_iter().find(|&c| {
        let all = vals.iter().map(|v| v.3 .0 * (c * v.3 .2).exp()).fold(f64::INFINITY, f64::min);
        let base = if near.is_finite() {
            vals.iter()
                .filter(|v| v.3 .2 <= 1.0)
                .map(|v| v.3 .0 * (c * v.3 .2).exp())
                .fold(f64::INFINITY, f64::min)
        } else {
            all
        };
        all >= 0.5 * base
    })
}

/// Ratio of the computed quantity to the claimed envelope on a grid.
pub fn sandwich_check(claim: SandwichClaim, sym: &SymbolSpec, grid: &SandwichGrid, opts: &SandwichOptions) -> Result<EstimateReport> {
    grid.validate(claim.time_free())?;
    opts.cfg.validate()?;
    let d = sym.d;
    match claim {
        SandwichClaim::Gbound if d < 6 => return domain("GBOUND is stated for d >= 6"),
        SandwichClaim::Nuapprox if d < 3 => return domain("NUAPPROX is stated for d >= 3"),
        SandwichClaim::Thm4 => {
            ell_at(sym, 1.0)?;
        }
        _ => {}
    }
    let needs_nu = !matches!(
        claim,
        SandwichClaim::Thm4 | SandwichClaim::Bgr | SandwichClaim::PhiPrime | SandwichClaim::Glambda | SandwichClaim::GlambdaInt | SandwichClaim::MuEst
    );
    let ld = if needs_nu { Some(LevyDensity::from_symbol(sym)?) } else { None };
    let b = if claim.needs_bernstein() { Some(bernstein_of(sym)?) } else { None };
    let cx = Ctx { sym, ld, b, opts };

    let mut vals = eval_grid(claim, &cx, grid)?;
    let mut notes = Vec::new();
    let mut constant = opts.constant.or(claim.built_in_constant());
    if claim == SandwichClaim::Hklb1 {
        match fit_hklb1(&vals) {
            Some(c) => {
                notes.push(format!("exponent constant c = {c}"));
                for v in vals.iter_mut() {
                    v.3 .0 *= (c * v.3 .2).exp();
                }
            }
            None => notes.push("no exponent constant from the candidate set fits the grid".into()),
        }
    }
    let ts = |t: f64| if t.is_nan() { None } else { Some(t) };
    let points: Vec<ReportPoint> = vals
        .iter()
        .map(|&(i, t, x, (ratio, rel_err, _))| ReportPoint {
            k: i as f64,
            t: ts(t),
            ln_x: x.ln(),
            x,
            ratio,
            rel_err,
            deviation: None,
        })
        .collect();
    let (c_min, c_max) = min_max(points.iter().map(|p| p.ratio));
    let finite = c_min.is_finite() && c_max.is_finite() && c_min > 0.0;
    let mut drift = None;
    let verdict = match claim.side() {
        Side::Two => {
            if finite && opts.refine {
                let fine = eval_grid(claim, &cx, &grid.refined())?;
                let (a, b) = min_max(fine.iter().map(|v| v.3 .0));
                let dr = ((b / a) / (c_max / c_min) - 1.0).abs();
                drift = Some(dr);
                if dr < 0.1 {
                    Verdict::Consistent
                } else {
                    Verdict::Inconclusive
                }
            } else if finite {
                Verdict::Consistent
            } else {
                Verdict::Inconclusive
            }
        }
        Side::Upper => match constant {
            Some(c) if points.iter().any(|p| p.ratio > c * (1.0 + 10.0 * p.rel_err) + 1e-12) => Verdict::Violated,
            _ if c_max.is_finite() && c_min >= 0.0 => Verdict::Consistent,
            _ => Verdict::Inconclusive,
        },
        Side::Lower => match constant {
            Some(c) if points.iter().any(|p| p.ratio < c * (1.0 - 10.0 * p.rel_err) - 1e-12) => Verdict::Violated,
            _ if finite && notes.iter().all(|n| n.starts_with("exponent")) => Verdict::Consistent,
            _ => Verdict::Inconclusive,
        },
    };
    if constant.is_none() {
        constant = match claim.side() {
            Side::Upper => Some(c_max),
            Side::Lower => Some(c_min),
            Side::Two => None,
        };
    }
    if claim == SandwichClaim::Hklb1 {
        constant = notes.first().and_then(|n| n.strip_prefix("exponent constant c = ")).and_then(|s| s.parse().ok());
    }
    Ok(EstimateReport {
        claim: claim.id().into(),
        family: sym.family.name().into(),
        d,
        points,
        limit: None,
        c_min,
        c_max,
        trend: Vec::new(),
        verdict,
        constant,
        drift,
        notes,
    })
}

// ---------------------------------------------------------------- equivalences

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Equivalence {
    Thm5,
    Thm5Inf,
    Thm9,
    Equig,
}

impl Equivalence {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_uppercase().as_str() {
            "THM5" => Equivalence::Thm5,
            "THM5INF" => Equivalence::Thm5Inf,
            "THM9" => Equivalence::Thm9,
            "EQUIG" => Equivalence::Equig,
            _ => return Err(Error::Parse(format!("unknown equivalence '{s}'"))),
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Leg {
    pub name: String,
    /// Defining ratio along the shared sweep, indexed like `EquivalenceReport::ks`.
    pub values: Vec<f64>,
    pub holds: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Agreement {
    AllConsistent,
    Discrepancy,
    /// The auxiliary function is not slowly varying on the sweep.
    NonSlowlyVarying,
}

#[derive(Debug, Clone, Serialize)]
pub struct EquivalenceReport {
    pub which: Equivalence,
    /// `|x| = 10^{−k}` along the sweep.
    pub ks: Vec<f64>,
    /// Constant shared by the limit legs.
    pub c: Option<f64>,
    pub legs: Vec<Leg>,
    pub outcome: Agreement,
}

/// The last value stays within a factor 4 of the largest one.
fn bounded_below(v: &[f64]) -> bool {
    let mx = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    v.last().is_some_and(|&l| l > 0.0 && l >= 0.25 * mx)
}

fn converges_to(v: &[f64], c: f64, tol: f64) -> bool {
    v.last().is_some_and(|&l| (l / c - 1.0).abs() < tol)
}

fn agreement(legs: &[Leg]) -> Agreement {
    if legs.iter().all(|l| l.holds) || legs.iter().all(|l| !l.holds) {
        Agreement::AllConsistent
    } else {
        Agreement::Discrepancy
    }
}

/// Evaluates every leg of an equivalence on a shared sweep `|x| = 10^{−k}`
/// (`10^{k}` for the at-infinity version).
pub fn equivalence_diagnostics(sym: &SymbolSpec, which: Equivalence, ks: &[f64], cfg: &InversionConfig) -> Result<EquivalenceReport> {
    if ks.len() < 2 {
        return domain("equivalence sweeps need at least two points");
    }
    let d = sym.d;
    let dd = d as f64;
    match which {
        Equivalence::Thm5 | Equivalence::Thm5Inf => {
            let ld = LevyDensity::from_symbol(sym)?;
            let inf = which == Equivalence::Thm5Inf;
            let ys: Vec<f64> = ks.iter().map(|&k| if inf { -k * LN_10 } else { k * LN_10 }).collect();
            let ell = |y: f64| -> f64 {
                if inf {
                    ell_increment(sym, y)
                } else {
                    sym.ell_ln(y).unwrap_or_else(|| ell_increment(sym, y))
                }
            };
            let c = sv_constant(d);
            let sv: Vec<f64> = ys.iter().map(|&y| ell(y + 2f64.ln()) / ell(y)).collect();
            let slow = sv.last().is_some_and(|s| (s - 1.0).abs() < 0.05);
            let de_haan: Vec<f64> =
                ys.iter().map(|&y| (sym.psi_ln(y + 2f64.ln()) - sym.psi_ln(y)) / ell(y) / 2f64.ln()).collect();
            let p_leg: Vec<f64> = ys
                .par_iter()
                .map(|&y| {
                    let t = 1e-3 / sym.psi_ln(y);
                    p_base(sym, t, y, 0.0, cfg).map(|(b, _)| b / (t * ell(y)))
                })
                .collect::<Result<_>>()?;
            let nu_leg: Vec<f64> = ys
                .iter()
                .map(|&y| nu_eval(&ld, (-y).exp()).map(|nu| nu * (-dd * y).exp() / ell(y)))
                .collect::<Result<_>>()?;
            let legs = vec![
                Leg { name: "DE_HAAN".into(), holds: slow && converges_to(&de_haan, 1.0, 0.05), values: de_haan },
                Leg { name: "DENSITY_RATIO".into(), holds: slow && converges_to(&p_leg, c, 0.1), values: p_leg },
                Leg { name: "NU_RATIO".into(), holds: slow && converges_to(&nu_leg, c, 0.1), values: nu_leg },
            ];
            let outcome = if slow { agreement(&legs) } else { Agreement::NonSlowlyVarying };
            Ok(EquivalenceReport { which, ks: ks.to_vec(), c: Some(c), legs, outcome })
        }
        Equivalence::Thm9 => {
            let b = bernstein_of(sym)?;
            if d < 3 {
                return domain("the subordinate equivalence is stated for d >= 3");
            }
            let ld = LevyDensity::from_symbol(sym)?;
            let sc = scaling_exponents(|u| b.phi_prime(u), 1.0, 1e8, 64)?;
            let ys: Vec<f64> = ks.iter().map(|&k| k * LN_10).collect();
            let p_leg: Vec<f64> = ys
                .par_iter()
                .map(|&y| {
                    let u = (2.0 * y).exp();
                    let t = 0.5 / sym.psi_ln(y);
                    p_base(sym, t, y, 0.0, cfg).map(|(bv, _)| bv / (t * u * b.phi_prime(u)))
                })
                .collect::<Result<_>>()?;
            let nu_leg: Vec<f64> = ys
                .iter()
                .map(|&y| {
                    let u = (2.0 * y).exp();
                    nu_eval(&ld, (-y).exp()).map(|nu| nu * (-(dd + 2.0) * y).exp() / b.phi_prime(u))
                })
                .collect::<Result<_>>()?;
            let legs = vec![
                Leg { name: "PHI_PRIME_WUSC".into(), values: vec![sc.alpha_lo, sc.alpha_hi], holds: sc.alpha_hi < 0.0 },
                Leg { name: "DENSITY_LOWER".into(), holds: bounded_below(&p_leg), values: p_leg },
                Leg { name: "NU_LOWER".into(), holds: bounded_below(&nu_leg), values: nu_leg },
            ];
            Ok(EquivalenceReport { which, ks: ks.to_vec(), c: None, outcome: agreement(&legs), legs })
        }
        Equivalence::Equig => {
            if d < 6 {
                return domain("the Green lower-bound equivalence is stated for d >= 6");
            }
            let ld = LevyDensity::from_symbol(sym)?;
            let sc = scaling_exponents(|u| sym.psi(u), 1e2, 1e30, 64)?;
            let ys: Vec<f64> = ks.iter().map(|&k| k * LN_10).collect();
            let g_leg: Vec<f64> = ys
                .par_iter()
                .map(|&y| {
                    let (g, _) = g_base(sym, 0.0, y, cfg)?;
                    let (k, tail) = conc(&ld, d, (-y).exp())?;
                    Ok(g * (k + tail))
                })
                .collect::<Result<_>>()?;
            let legs = vec![
                Leg { name: "PSI_WLSC".into(), values: vec![sc.alpha_lo, sc.alpha_hi], holds: sc.alpha_lo > 0.1 },
                Leg { name: "GREEN_LOWER".into(), holds: bounded_below(&g_leg), values: g_leg },
            ];
            Ok(EquivalenceReport { which, ks: ks.to_vec(), c: None, outcome: agreement(&legs), legs })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> InversionConfig {
        InversionConfig::default()
    }

    #[test]
    fn constants() {
        assert!((asym_constant(ConstantClaim::Sv, 1).unwrap() - 0.5).abs() < 1e-15);
        assert!((asym_constant(ConstantClaim::Sv, 3).unwrap() - 1.0 / (4.0 * PI)).abs() < 1e-15);
        assert!((asym_constant(ConstantClaim::Rv(1.0), 1).unwrap() - 1.0 / PI).abs() < 1e-15);
        assert!(asym_constant(ConstantClaim::Rv(2.0), 1).is_err());
        // SV constant against the display with Γ evaluated directly
        for d in 1..=10 {
            let dd = d as f64;
            let want = crate::special_fn::gamma(dd / 2.0) / (2.0 * PI.powf(dd / 2.0));
            assert!((sv_constant(d) / want - 1.0).abs() < 1e-14, "d={d}");
        }
    }

    #[test]
    fn rv_matches_cauchy_tail() {
        // p(t,x) ~ t/(πx²) for d = 1
        let (t, x) = (1e-3, 1.0);
        let p = crate::transforms::cauchy_density(1, t, x);
        assert!((p / (t / x.powi(2)) - rv_constant(1.0, 1)).abs() < 1e-5);
    }

    #[test]
    fn riesz_constant_forms() {
        let r = riesz_diagnostic(1.0, 3, &[0.5, 2.0], &cfg()).unwrap();
        assert!(r.matches_classical);
        assert!(!r.matches_pi_positive);
        assert!((r.constants.classical - 1.0 / (2.0 * PI * PI)).abs() < 1e-15);
    }

    #[test]
    fn rv_sweep_cauchy() {
        let s = SymbolSpec::stable(1.0, 1).unwrap();
        let r = asym_ratio_sweep(AsymClaim::Rv, &s, &AsymClaim::Rv.default_sweep(), &cfg()).unwrap();
        assert!(r.final_deviation().unwrap() < 0.01);
        assert_eq!(r.verdict, Verdict::Consistent);
    }

    #[test]
    fn nu_sweep_gamma() {
        let s = SymbolSpec::subordinate_bm(Bernstein::Gamma, 1).unwrap();
        let r = asym_ratio_sweep(AsymClaim::Nu, &s, &SweepSpec::Points(vec![(1e-4, 1e-4)]), &cfg()).unwrap();
        assert!(r.final_deviation().unwrap() < 0.1);
    }

    #[test]
    fn unreachable_and_missing() {
        let s = SymbolSpec::geometric_stable(1.0, 1).unwrap();
        // ψ(u) ≥ 700 needs u ≈ e^{700}; fine. A level beyond the f64 exponent range is not.
        let sweep = SweepSpec::Levels { t: 1e-300, t_psi: vec![1.0] };
        assert!(matches!(
            asym_ratio_sweep(AsymClaim::Large, &s, &sweep, &cfg()),
            Err(Error::RegimeUnreachable(_))
        ));
        let ig = SymbolSpec::iterated_geometric(2.0, 0.5, 1).unwrap();
        assert!(matches!(
            asym_ratio_sweep(AsymClaim::Nu, &ig, &AsymClaim::Nu.default_sweep(), &cfg()),
            Err(Error::MissingNu(_))
        ));
        let st = SymbolSpec::stable(1.5, 1).unwrap();
        assert!(matches!(
            asym_ratio_sweep(AsymClaim::Sv, &st, &AsymClaim::Sv.default_sweep(), &cfg()),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn ratio1_skips_infinite_origin() {
        let s = SymbolSpec::geometric_stable(1.0, 1).unwrap();
        let sweep = SweepSpec::Levels { t: 0.5, t_psi: vec![5.0] };
        assert!(matches!(
            asym_ratio_sweep(AsymClaim::Ratio1, &s, &sweep, &cfg()),
            Err(Error::RegimeUnreachable(_))
        ));
    }

    #[test]
    fn gub3_cauchy() {
        let s = SymbolSpec::stable(1.0, 1).unwrap();
        let opts = SandwichOptions { constant: Some(10.0), ..Default::default() };
        let r = sandwich_check(SandwichClaim::Gub3, &s, &SandwichClaim::Gub3.default_grid(), &opts).unwrap();
        assert_eq!(r.verdict, Verdict::Consistent);
        // p/(t|x|^{-1}K_1) = x²/(2(t²+x²)) for the Cauchy law
        assert!(r.c_max < 0.5 + 1e-12);
    }

    #[test]
    fn mu_estimate_gamma() {
        let s = SymbolSpec::subordinate_bm(Bernstein::Gamma, 3).unwrap();
        let r = sandwich_check(SandwichClaim::MuEst, &s, &SandwichClaim::MuEst.default_grid(), &Default::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Consistent);
        // e^{−s}(1+s)²/(3e) peaks at s = 1
        assert!((r.c_max - 4.0 / (3.0 * E * E)).abs() < 1e-2);
    }

    #[test]
    fn two_sided_never_violated() {
        let s = SymbolSpec::subordinate_bm(Bernstein::Gamma, 3).unwrap();
        let opts = SandwichOptions { constant: Some(1e-6), ..Default::default() };
        let r = sandwich_check(SandwichClaim::R2kd, &s, &SandwichClaim::R2kd.default_grid(), &opts).unwrap();
        assert_ne!(r.verdict, Verdict::Violated);
    }

    #[test]
    fn explicit_constant_can_fail() {
        let s = SymbolSpec::stable(1.0, 1).unwrap();
        let opts = SandwichOptions { constant: Some(0.1), ..Default::default() };
        let r = sandwich_check(SandwichClaim::Gub3, &s, &SandwichClaim::Gub3.default_grid(), &opts).unwrap();
        assert_eq!(r.verdict, Verdict::Violated);
    }

    #[test]
    fn exit_envelopes_ordered() {
        let s = SymbolSpec::stable(1.0, 2).unwrap();
        let r = sandwich_check(SandwichClaim::Exit, &s, &SandwichClaim::Exit.default_grid(), &Default::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Consistent);
        assert!(r.c_max <= 0.25);
    }

    #[test]
    fn claim_preconditions() {
        let s = SymbolSpec::stable(1.0, 3).unwrap();
        assert!(sandwich_check(SandwichClaim::Gbound, &s, &SandwichClaim::Gbound.default_grid(), &Default::default()).is_err());
        let g = SymbolSpec::geometric_stable(1.0, 3).unwrap();
        assert!(matches!(
            sandwich_check(SandwichClaim::Ksbm, &g, &SandwichClaim::Ksbm.default_grid(), &Default::default()),
            Err(Error::Unsupported(_))
        ));
        assert!(SandwichClaim::parse("gub3").is_ok());
        assert!(SandwichClaim::parse("nope").is_err());
        assert!(AsymClaim::parse("green_inf").is_ok());
    }

    #[test]
    fn equivalence_stable_not_slowly_varying() {
        let s = SymbolSpec::stable(1.0, 1).unwrap();
        let ks: Vec<f64> = (1..=4).map(f64::from).collect();
        let r = equivalence_diagnostics(&s, Equivalence::Thm5, &ks, &cfg()).unwrap();
        assert_eq!(r.outcome, Agreement::NonSlowlyVarying);
    }

    #[test]
    fn equivalence_gamma_nu_leg() {
        let s = SymbolSpec::subordinate_bm(Bernstein::Gamma, 1).unwrap();
        let ks: Vec<f64> = (1..=6).map(f64::from).collect();
        let r = equivalence_diagnostics(&s, Equivalence::Thm5, &ks, &cfg()).unwrap();
        assert_eq!(r.outcome, Agreement::AllConsistent);
        let nu = &r.legs[2].values;
        // ν(x)|x|/ℓ = e^{−x}/2
        for (k, v) in ks.iter().zip(nu) {
            let x = 10f64.powf(-k);
            assert!((v - 0.5 * (-x).exp()).abs() < 1e-8, "k={k} {v}");
        }
    }

    #[test]
    fn refined_grid_interleaves() {
        let g = SandwichGrid { t: vec![1.0, 4.0], x: vec![0.01] };
        assert_eq!(g.refined(), SandwichGrid { t: vec![1.0, 2.0, 4.0], x: vec![0.01] });
    }
}
