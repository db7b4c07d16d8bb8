//! Lévy–Khintchine exponents of isotropic unimodal processes, their
//! auxiliary (de Haan) functions and the elementary inequalities they obey.

use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::Serialize;
use serde_json::Value;

use crate::error::{domain, Error, Result};
use crate::quad::{integrate, Tol};
use crate::special_fn::{bessel_j_unchecked, gamma, ln_gamma, sphere_area};

/// `log(1 + e^z)` without overflow.
pub(crate) fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// `softplus(a + h) − softplus(a)` without cancellation.
fn softplus_diff(a: f64, h: f64) -> f64 {
    let b = a + h;
    if a.min(b) > 0.0 {
        h + ((-b).exp().ln_1p() - (-a).exp().ln_1p())
    } else if a.max(b) < 30.0 {
        (a.exp() * h.exp_m1() / (1.0 + a.exp())).ln_1p()
    } else {
        softplus(b) - softplus(a)
    }
}

/// `p^β − q^β` for `p, q > 0` given `p − q`.
fn pow_diff(q: f64, diff: f64, beta: f64) -> f64 {
    q.powf(beta) * (beta * (diff / q).ln_1p()).exp_m1()
}

/// Radial profile supplied by the caller.
#[derive(Clone)]
pub struct RadialFunction {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    /// Whether the underlying process is isotropic unimodal.
    pub unimodal: bool,
    /// Whether `f` is known to be nondecreasing on `[0, ∞)`.
    pub monotone: bool,
}

impl RadialFunction {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        RadialFunction { f: Arc::new(f), unimodal: false, monotone: false }
    }

    pub fn unimodal(mut self, yes: bool) -> Self {
        self.unimodal = yes;
        self
    }

    pub fn monotone(mut self, yes: bool) -> Self {
        self.monotone = yes;
        self
    }

    pub fn eval(&self, u: f64) -> f64 {
        (self.f)(u)
    }
}

impl fmt::Debug for RadialFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialFunction")
            .field("unimodal", &self.unimodal)
            .field("monotone", &self.monotone)
            .finish_non_exhaustive()
    }
}

/// Bernstein functions used as subordinators of Brownian motion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "bernstein", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Bernstein {
    /// `φ(λ) = log(1 + λ)`.
    Gamma,
    /// `φ(λ) = λ^γ`, `0 < γ < 1`.
    StableSub { gamma: f64 },
    /// `φ(λ) = (log(1 + λ^{α/2}))^β`.
    GeomSub { alpha: f64, beta: f64 },
}

impl Bernstein {
    pub fn phi(&self, lam: f64) -> f64 {
        match *self {
            Bernstein::Gamma => lam.ln_1p(),
            Bernstein::StableSub { gamma } => lam.powf(gamma),
            Bernstein::GeomSub { alpha, beta } => (lam.powf(alpha / 2.0)).ln_1p().powf(beta),
        }
    }

    /// `φ(e^y)`, usable for arguments far beyond the `f64` range.
    pub fn phi_ln(&self, y: f64) -> f64 {
        match *self {
            Bernstein::Gamma => softplus(y),
            Bernstein::StableSub { gamma } => (gamma * y).exp(),
            Bernstein::GeomSub { alpha, beta } => softplus(alpha / 2.0 * y).powf(beta),
        }
    }

    pub fn phi_prime(&self, lam: f64) -> f64 {
        match *self {
            Bernstein::Gamma => 1.0 / (1.0 + lam),
            Bernstein::StableSub { gamma } => gamma * lam.powf(gamma - 1.0),
            Bernstein::GeomSub { alpha, beta } => {
                let a = alpha / 2.0;
                let la = lam.powf(a);
                let g = la.ln_1p();
                let g1 = a * la / (lam * (1.0 + la));
                beta * g.powf(beta - 1.0) * g1
            }
        }
    }

    pub fn phi_second(&self, lam: f64) -> f64 {
        match *self {
            Bernstein::Gamma => -1.0 / ((1.0 + lam) * (1.0 + lam)),
            Bernstein::StableSub { gamma } => gamma * (gamma - 1.0) * lam.powf(gamma - 2.0),
            Bernstein::GeomSub { alpha, beta } => {
                let a = alpha / 2.0;
                let la = lam.powf(a);
                let g = la.ln_1p();
                let g1 = a * la / (lam * (1.0 + la));
                let g2 = a * la / (lam * lam) * ((a - 1.0) - la) / ((1.0 + la) * (1.0 + la));
                beta * (beta - 1.0) * g.powf(beta - 2.0) * g1 * g1 + beta * g.powf(beta - 1.0) * g2
            }
        }
    }

    /// Density of the Lévy measure of the subordinator, when known in closed form.
    pub fn mu_density(&self) -> Option<Box<dyn Fn(f64) -> f64 + Send + Sync>> {
        match *self {
            Bernstein::Gamma => Some(Box::new(|s: f64| (-s).exp() / s)),
            Bernstein::StableSub { gamma: g } => {
                let c = g / gamma(1.0 - g);
                Some(Box::new(move |s: f64| c * s.powf(-1.0 - g)))
            }
            Bernstein::GeomSub { .. } => None,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Bernstein::Gamma => Ok(()),
            Bernstein::StableSub { gamma } => {
                if gamma > 0.0 && gamma < 1.0 {
                    Ok(())
                } else {
                    domain(format!("STABLE_SUB needs 0 < gamma < 1, got {gamma}"))
                }
            }
            Bernstein::GeomSub { alpha, beta } => {
                if !(alpha > 0.0 && alpha <= 2.0) {
                    domain(format!("GEOM_SUB needs 0 < alpha <= 2, got {alpha}"))
                } else if !(beta > 0.0 && beta <= 1.0) {
                    domain(format!("GEOM_SUB needs 0 < beta <= 1, got {beta}"))
                } else {
                    Ok(())
                }
            }
        }
    }
}

/// Supported exponent families.
#[derive(Debug, Clone)]
pub enum Family {
    /// `ψ(u) = log(1 + u^α)`.
    GeometricStable { alpha: f64 },
    /// `ψ(u) = (log(1 + u^α))^β`.
    IteratedGeometric { alpha: f64, beta: f64 },
    /// Lévy density `1_{|x|<1} |x|^{-d}`.
    TruncatedLog,
    /// `ψ(u) = u^α`.
    Stable { alpha: f64 },
    /// `ψ(u) = u²`.
    Gaussian,
    /// `ψ(u) = φ(u²)`.
    SubordinateBm(Bernstein),
    Custom(RadialFunction),
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::GeometricStable { .. } => "GEOMETRIC_STABLE",
            Family::IteratedGeometric { .. } => "ITERATED_GEOMETRIC",
            Family::TruncatedLog => "TRUNCATED_LOG",
            Family::Stable { .. } => "STABLE",
            Family::Gaussian => "GAUSSIAN",
            Family::SubordinateBm(_) => "SUBORDINATE_BM",
            Family::Custom(_) => "CUSTOM",
        }
    }
}

/// An exponent family together with the ambient dimension.
#[derive(Debug, Clone)]
pub struct SymbolSpec {
    pub family: Family,
    pub d: usize,
}

fn param(params: &Value, key: &str) -> Result<f64> {
    params
        .get(key)
        .and_then(Value::as_f64)
        .ok_or_else(|| Error::Parse(format!("missing numeric parameter '{key}'")))
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 2.0 {
        Ok(())
    } else {
        domain(format!("alpha must lie in (0, 2], got {alpha}"))
    }
}

impl SymbolSpec {
    pub fn new(family: Family, d: usize) -> Result<Self> {
        if d == 0 {
            return domain("dimension must be at least 1");
        }
        match &family {
            Family::GeometricStable { alpha } | Family::Stable { alpha } => check_alpha(*alpha)?,
            Family::IteratedGeometric { alpha, beta } => {
                check_alpha(*alpha)?;
                if !(*beta > 0.0 && *beta <= 1.0) {
                    return domain(format!("beta must lie in (0, 1], got {beta}"));
                }
            }
            Family::SubordinateBm(b) => b.validate()?,
            _ => {}
        }
        Ok(SymbolSpec { family, d })
    }

    pub fn geometric_stable(alpha: f64, d: usize) -> Result<Self> {
        Self::new(Family::GeometricStable { alpha }, d)
    }

    pub fn iterated_geometric(alpha: f64, beta: f64, d: usize) -> Result<Self> {
        Self::new(Family::IteratedGeometric { alpha, beta }, d)
    }

    pub fn stable(alpha: f64, d: usize) -> Result<Self> {
        Self::new(Family::Stable { alpha }, d)
    }

    pub fn gaussian(d: usize) -> Result<Self> {
        Self::new(Family::Gaussian, d)
    }

    pub fn truncated_log(d: usize) -> Result<Self> {
        Self::new(Family::TruncatedLog, d)
    }

    pub fn subordinate_bm(b: Bernstein, d: usize) -> Result<Self> {
        Self::new(Family::SubordinateBm(b), d)
    }

    pub fn custom(f: RadialFunction, d: usize) -> Result<Self> {
        Self::new(Family::Custom(f), d)
    }

    /// Parse `{"family": ..., "d": ..., "params": {...}}`.
    pub fn from_json(v: &Value) -> Result<Self> {
        let fam = v
            .get("family")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Parse("missing string field 'family'".into()))?;
        let d = v
            .get("d")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Parse("missing integer field 'd'".into()))? as usize;
        let empty = Value::Object(Default::default());
        let p = v.get("params").unwrap_or(&empty);
        let family = match fam {
            "GEOMETRIC_STABLE" => Family::GeometricStable { alpha: param(p, "alpha")? },
            "ITERATED_GEOMETRIC" => Family::IteratedGeometric {
                alpha: param(p, "alpha")?,
                beta: param(p, "beta")?,
            },
            "TRUNCATED_LOG" => Family::TruncatedLog,
            "STABLE" => Family::Stable { alpha: param(p, "alpha")? },
            "GAUSSIAN" => Family::Gaussian,
            "SUBORDINATE_BM" => {
                let b = p
                    .get("bernstein")
                    .and_then(Value::as_str)
                    .ok_or_else(|| Error::Parse("SUBORDINATE_BM needs params.bernstein".into()))?;
                Family::SubordinateBm(match b {
                    "GAMMA" => Bernstein::Gamma,
                    "STABLE_SUB" => Bernstein::StableSub { gamma: param(p, "gamma")? },
                    "GEOM_SUB" => Bernstein::GeomSub {
                        alpha: param(p, "alpha")?,
                        beta: param(p, "beta")?,
                    },
                    other => return Err(Error::Parse(format!("unknown Bernstein family '{other}'"))),
                })
            }
            "CUSTOM" => {
                return Err(Error::Unsupported(
                    "CUSTOM symbols need a callable and cannot be read from JSON".into(),
                ))
            }
            other => return Err(Error::Parse(format!("unknown family '{other}'"))),
        };
        Self::new(family, d)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_json(&v)
    }

    pub fn to_json(&self) -> Value {
        use serde_json::json;
        let params = match &self.family {
            Family::GeometricStable { alpha } | Family::Stable { alpha } => json!({ "alpha": alpha }),
            Family::IteratedGeometric { alpha, beta } => json!({ "alpha": alpha, "beta": beta }),
            Family::SubordinateBm(b) => serde_json::to_value(b).unwrap_or(Value::Null),
            _ => json!({}),
        };
        json!({ "family": self.family.name(), "d": self.d, "params": params })
    }

    /// `ψ(u)` for `u ≥ 0`.
    pub fn psi(&self, u: f64) -> f64 {
        let u = u.abs();
        match &self.family {
            Family::GeometricStable { alpha } => u.powf(*alpha).ln_1p(),
            Family::IteratedGeometric { alpha, beta } => u.powf(*alpha).ln_1p().powf(*beta),
            Family::TruncatedLog => sphere_area(self.d as f64) * trunc_log_integral(self.d, u),
            Family::Stable { alpha } => u.powf(*alpha),
            Family::Gaussian => u * u,
            Family::SubordinateBm(b) => b.phi(u * u),
            Family::Custom(f) => f.eval(u),
        }
    }

    pub fn psi_checked(&self, u: f64) -> Result<f64> {
        if !u.is_finite() {
            return domain(format!("psi needs a finite argument, got {u}"));
        }
        Ok(self.psi(u))
    }

    /// `ψ(e^y)`; stays finite where `e^y` overflows.
    pub fn psi_ln(&self, y: f64) -> f64 {
        match &self.family {
            Family::GeometricStable { alpha } => softplus(alpha * y),
            Family::IteratedGeometric { alpha, beta } => softplus(alpha * y).powf(*beta),
            Family::TruncatedLog => {
                let om = sphere_area(self.d as f64);
                if y > 600.0 {
                    om * (y + trunc_log_constant(self.d))
                } else {
                    om * trunc_log_integral(self.d, y.exp())
                }
            }
            Family::Stable { alpha } => (alpha * y).exp(),
            Family::Gaussian => (2.0 * y).exp(),
            Family::SubordinateBm(b) => b.phi_ln(2.0 * y),
            Family::Custom(f) => f.eval(y.exp()),
        }
    }

    /// `ψ(e^{y+h}) − ψ(e^y)`. The step is passed separately so that it
    /// survives rounding when `|y|` is large; the closed-form families avoid
    /// cancellation entirely.
    pub fn psi_ln_diff(&self, y: f64, h: f64) -> f64 {
        match &self.family {
            Family::GeometricStable { alpha } => softplus_diff(alpha * y, alpha * h),
            Family::IteratedGeometric { alpha, beta } => {
                pow_diff(softplus(alpha * y), softplus_diff(alpha * y, alpha * h), *beta)
            }
            Family::Stable { alpha } => (alpha * y).exp() * (alpha * h).exp_m1(),
            Family::Gaussian => (2.0 * y).exp() * (2.0 * h).exp_m1(),
            _ => self.psi_ln(y + h) - self.psi_ln(y),
        }
    }

    /// Auxiliary function `ℓ` for exponents in the de Haan class, in closed form.
    pub fn ell(&self, u: f64) -> Option<f64> {
        self.ell_ln(u.abs().ln())
    }

    /// `ℓ(e^y)`.
    pub fn ell_ln(&self, y: f64) -> Option<f64> {
        match &self.family {
            Family::GeometricStable { alpha } => Some(*alpha),
            Family::IteratedGeometric { alpha, beta } => {
                Some(alpha * beta * softplus(alpha * y).powf(beta - 1.0))
            }
            Family::TruncatedLog => Some(sphere_area(self.d as f64)),
            Family::SubordinateBm(Bernstein::Gamma) => Some(2.0),
            Family::SubordinateBm(Bernstein::GeomSub { alpha, beta }) => {
                Some(alpha * beta * softplus(alpha * y).powf(beta - 1.0))
            }
            _ => None,
        }
    }

    /// Whether the exponent is slowly varying at infinity (de Haan class).
    pub fn is_de_haan(&self) -> bool {
        self.ell_ln(0.0).is_some()
    }

    pub fn is_unimodal(&self) -> bool {
        match &self.family {
            Family::Custom(f) => f.unimodal,
            _ => true,
        }
    }

    pub fn is_monotone(&self) -> bool {
        match &self.family {
            Family::Custom(f) => f.monotone,
            _ => true,
        }
    }

    /// `ψ*(u) = sup_{0 ≤ s ≤ u} ψ(s)`.
    pub fn psi_star(&self, u: f64) -> f64 {
        let u = u.abs();
        if self.is_monotone() {
            return self.psi(u);
        }
        sup_on_interval(|s| self.psi(s), u)
    }
}

/// Grid search over 256 points followed by golden-section refinement.
pub(crate) fn sup_on_interval<F: Fn(f64) -> f64>(f: F, u: f64) -> f64 {
    const N: usize = 256;
    if u == 0.0 {
        return f(0.0);
    }
    let h = u / (N - 1) as f64;
    let vals: Vec<f64> = (0..N).map(|k| f(k as f64 * h)).collect();
    let mut best = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    // Refine around every local maximum of the grid.
    for k in 0..N {
        let left = if k > 0 { vals[k - 1] } else { f64::NEG_INFINITY };
        let right = if k + 1 < N { vals[k + 1] } else { f64::NEG_INFINITY };
        if vals[k] >= left && vals[k] >= right {
            let a = (k as f64 - 1.0).max(0.0) * h;
            let b = ((k + 1) as f64 * h).min(u);
            best = best.max(golden_max(&f, a, b));
        }
    }
    best
}

fn golden_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut best = fc.max(fd);
    for _ in 0..80 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
        best = best.max(fc).max(fd);
        if (b - a).abs() <= 1e-15 * (a.abs() + b.abs()).max(1e-300) {
            break;
        }
    }
    best
}

/// Finite-difference estimate `(ψ(λx) − ψ(x)) / log λ` of the auxiliary function.
pub fn ell_estimate(sym: &SymbolSpec, x: f64, lam: f64) -> Result<f64> {
    if !(lam > 0.0) || !lam.is_finite() {
        return domain(format!("lambda must be positive and finite, got {lam}"));
    }
    let ll = lam.ln();
    if ll.abs() < 1e-9 {
        return domain("lambda too close to 1: log(lambda) vanishes");
    }
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("x must be positive and finite, got {x}"));
    }
    let y = x.ln();
    Ok((sym.psi_ln(y + ll) - sym.psi_ln(y)) / ll)
}

// Truncated-log exponent: ψ(u) = ω_d I_d(u) with
// I_d(u) = ∫_0^u (1 − Λ_d(s)) / s ds,  Λ_d(s) = Γ(d/2) (2/s)^ν J_ν(s),  ν = d/2 − 1.

const TL_SERIES_MAX: f64 = 8.0;
const TL_ASYM_MIN: f64 = 30.0;

fn one_minus_lambda(d: usize, s: f64) -> f64 {
    let nu = d as f64 / 2.0 - 1.0;
    if s < 2.0 {
        // 1 − Λ_d(s) = Σ_{k≥1} (−1)^{k+1} Γ(d/2) (s/2)^{2k} / (k! Γ(k + d/2))
        let q = s * s / 4.0;
        let mut b = 1.0;
        let mut sum = 0.0;
        for k in 1..60 {
            let kf = k as f64;
            b *= q / (kf * (kf + nu));
            let term = if k % 2 == 1 { b } else { -b };
            sum += term;
            if b < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        let lam = (gamma(nu + 1.0).ln() + nu * (2.0 / s).ln()).exp() * bessel_j_unchecked(nu, s);
        1.0 - lam
    }
}

fn trunc_log_series(d: usize, u: f64) -> f64 {
    let nu = d as f64 / 2.0 - 1.0;
    let q = u * u / 4.0;
    let mut b = 1.0;
    let mut sum = 0.0;
    for k in 1..200 {
        let kf = k as f64;
        b *= q / (kf * (kf + nu));
        let term = b / (2.0 * kf);
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// `∫_v^∞ Λ_d(s)/s ds` for `v ≥ 30` from the Hankel expansion of `J_ν`
/// integrated term by term.
fn trunc_log_tail(d: usize, v: f64) -> f64 {
    let nu = d as f64 / 2.0 - 1.0;
    let mu = 4.0 * nu * nu;
    let c0 = (ln_gamma(nu + 1.0) + nu * 2f64.ln()).exp() * (2.0 / PI).sqrt();
    let phi = (0.5 * nu + 0.25) * PI;
    // Σ_k i^k a_k I(k + ν + 3/2), I(p) = ∫_v^∞ s^{-p} e^{is} ds.
    let (mut re, mut im) = (0.0, 0.0);
    let mut a = 1.0;
    let mut last_a = f64::INFINITY;
    for k in 0..40 {
        if k > 0 {
            let odd = 2.0 * k as f64 - 1.0;
            a *= (mu - odd * odd) / (8.0 * k as f64);
            if a == 0.0 {
                break;
            }
        }
        let mag = a.abs() * v.powi(-(k as i32));
        if mag > last_a {
            break;
        }
        last_a = mag;
        let p = k as f64 + nu + 1.5;
        let (ir, ii) = osc_power_tail(p, v);
        // multiply by a_k i^k
        let (tr, ti) = match k % 4 {
            0 => (ir, ii),
            1 => (-ii, ir),
            2 => (-ir, -ii),
            _ => (ii, -ir),
        };
        re += a * tr;
        im += a * ti;
        if mag < 1e-18 {
            break;
        }
    }
    // Re[e^{-iφ}(re + i im)]
    c0 * (re * phi.cos() + im * phi.sin())
}

/// `∫_v^∞ s^{-p} e^{is} ds` by repeated integration by parts.
fn osc_power_tail(p: f64, v: f64) -> (f64, f64) {
    // i e^{iv} v^{-p} Σ_m (−i)^m (p)_m v^{-m}
    let (mut sr, mut si) = (0.0, 0.0);
    let mut c = 1.0;
    let mut last = f64::INFINITY;
    for m in 0..80 {
        if m > 0 {
            c *= (p + m as f64 - 1.0) / v;
        }
        if c.abs() > last {
            break;
        }
        last = c.abs();
        match m % 4 {
            0 => sr += c,
            1 => si -= c,
            2 => sr -= c,
            _ => si += c,
        }
        if c.abs() < 1e-18 {
            break;
        }
    }
    let scale = v.powf(-p);
    let (cv, sv) = (v.cos(), v.sin());
    // i e^{iv} = (−sin v, cos v)
    let (er, ei) = (-sv, cv);
    (scale * (er * sr - ei * si), scale * (er * si + ei * sr))
}

struct TlConstants {
    /// Integral from 0 to `TL_SERIES_MAX + k`, for `k = 0, 1, ...` up to `TL_ASYM_MIN`.
    nodes: Vec<f64>,
    constant: f64,
}

fn trunc_log_constants(d: usize) -> &'static TlConstants {
    static CACHE: OnceLock<std::sync::Mutex<Vec<(usize, &'static TlConstants)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    if let Some((_, c)) = guard.iter().find(|(k, _)| *k == d) {
        return c;
    }
    let mut nodes = vec![trunc_log_series(d, TL_SERIES_MAX)];
    let mut a = TL_SERIES_MAX;
    while a < TL_ASYM_MIN {
        let b = (a + 1.0).min(TL_ASYM_MIN);
        let piece = integrate(|s| one_minus_lambda(d, s) / s, a, b, Tol::new(1e-14, 1e-13)).value;
        nodes.push(nodes[nodes.len() - 1] + piece);
        a = b;
    }
    let at_end = nodes[nodes.len() - 1];
    let constant = at_end - TL_ASYM_MIN.ln() - trunc_log_tail(d, TL_ASYM_MIN);
    let c: &'static TlConstants = Box::leak(Box::new(TlConstants { nodes, constant }));
    guard.push((d, c));
    c
}

fn trunc_log_constant(d: usize) -> f64 {
    trunc_log_constants(d).constant
}

fn trunc_log_integral(d: usize, u: f64) -> f64 {
    if u <= TL_SERIES_MAX {
        trunc_log_series(d, u)
    } else if u <= TL_ASYM_MIN {
        // Start from the nearest tabulated node below u.
        let c = trunc_log_constants(d);
        let k = ((u - TL_SERIES_MAX).floor() as usize).min(c.nodes.len() - 1);
        let a = TL_SERIES_MAX + k as f64;
        c.nodes[k] + integrate(|s| one_minus_lambda(d, s) / s, a, u, Tol::new(1e-14, 1e-13)).value
    } else {
        u.ln() + trunc_log_constant(d) + trunc_log_tail(d, u)
    }
}

/// Regular-variation diagnostics for a positive radial function on a grid.
#[derive(Debug, Clone, Serialize)]
pub struct ScalingReport {
    /// Lower scaling exponent (5% quantile of pairwise log-slopes).
    pub alpha_lo: f64,
    /// Upper scaling exponent (95% quantile of pairwise log-slopes).
    pub alpha_hi: f64,
    pub raw_min: f64,
    pub raw_max: f64,
    /// Best `c` in `f(λx) ≥ c λ^{alpha_lo} f(x)` over the grid.
    pub c_lower: f64,
    /// Best `C` in `f(λx) ≤ C λ^{alpha_hi} f(x)` over the grid.
    pub c_upper: f64,
    /// Least-squares slope of `log f(λx)/f(x)` against `log λ`.
    pub ls_slope: f64,
    pub fit_residual: f64,
    pub x0: f64,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let j = (i + 1).min(sorted.len() - 1);
    let w = pos - i as f64;
    sorted[i] * (1.0 - w) + sorted[j] * w
}

/// Lower and upper scaling exponents of `f` on `[x_lo, x_hi]` over `n`
/// logarithmically spaced points.
pub fn scaling_exponents<F: Fn(f64) -> f64>(f: F, x_lo: f64, x_hi: f64, n: usize) -> Result<ScalingReport> {
    if !(x_lo > 0.0 && x_hi > x_lo) || n < 3 {
        return domain("scaling_exponents needs 0 < x_lo < x_hi and n >= 3");
    }
    let (a, b) = (x_lo.ln(), x_hi.ln());
    let ly: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let lx = a + (b - a) * k as f64 / (n - 1) as f64;
            (lx, f(lx.exp()))
        })
        .collect();
    if ly.iter().any(|&(_, v)| !(v > 0.0) || !v.is_finite()) {
        return domain("scaling_exponents needs a positive finite function on the grid");
    }
    let lf: Vec<(f64, f64)> = ly.iter().map(|&(x, v)| (x, v.ln())).collect();
    let mut slopes = Vec::with_capacity(n * (n - 1) / 2);
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for i in 0..n {
        for j in i + 1..n {
            let dl = lf[j].0 - lf[i].0;
            let df = lf[j].1 - lf[i].1;
            slopes.push(df / dl);
            sxx += dl * dl;
            sxy += dl * df;
        }
    }
    let ls = sxy / sxx;
    let mut sorted = slopes.clone();
    sorted.sort_by(|x, y| x.total_cmp(y));
    let alpha_lo = quantile(&sorted, 0.05);
    let alpha_hi = quantile(&sorted, 0.95);
    let (mut c_lo, mut c_hi) = (f64::INFINITY, 0f64);
    let mut res = 0.0;
    let mut cnt = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let dl = lf[j].0 - lf[i].0;
            let df = lf[j].1 - lf[i].1;
            c_lo = c_lo.min((df - alpha_lo * dl).exp());
            c_hi = c_hi.max((df - alpha_hi * dl).exp());
            res += (df - ls * dl).powi(2);
            cnt += 1.0;
        }
    }
    Ok(ScalingReport {
        alpha_lo,
        alpha_hi,
        raw_min: sorted[0],
        raw_max: sorted[sorted.len() - 1],
        c_lower: c_lo,
        c_upper: c_hi,
        ls_slope: ls,
        fit_residual: (res / cnt).sqrt(),
        x0: x_lo,
    })
}

/// Worst-case outcome of one inequality over a grid. `margin` is the minimum
/// of `(rhs − lhs)/|rhs|`; the inequality holds on the grid iff `margin ≥ 0`.
#[derive(Debug, Clone, Serialize)]
pub struct InequalityCheck {
    pub name: String,
    pub margin: f64,
    pub worst_at: Vec<f64>,
    pub points: usize,
    pub holds: bool,
}

impl InequalityCheck {
    fn new(name: &str) -> Self {
        InequalityCheck {
            name: name.to_string(),
            margin: f64::INFINITY,
            worst_at: vec![],
            points: 0,
            holds: true,
        }
    }

    pub(crate) fn record(&mut self, lhs: f64, rhs: f64, at: &[f64], slack: f64) {
        self.points += 1;
        let m = if rhs == 0.0 && lhs == 0.0 { 0.0 } else { (rhs - lhs) / rhs.abs().max(1e-300) };
        if m.is_nan() {
            self.holds = false;
            self.worst_at = at.to_vec();
            self.margin = f64::NAN;
            return;
        }
        if m < self.margin {
            self.margin = m;
            self.worst_at = at.to_vec();
        }
        if m < -slack {
            self.holds = false;
        }
    }
}

const FP_SLACK: f64 = 1e-12;

/// Check `ψ(ru) ≤ ψ*(ru) ≤ 2(r² + 1) ψ*(u)` and `ψ* ≤ π² ψ` (unimodal case)
/// for all pairs drawn from `grid`.
pub fn check_symbol_inequalities(sym: &SymbolSpec, grid: &[f64]) -> Vec<InequalityCheck> {
    let mut star_mono = InequalityCheck::new("PSI_LE_PSI_STAR");
    let mut doubling = InequalityCheck::new("PSI_STAR_DOUBLING");
    let mut unimodal = InequalityCheck::new("PSI_STAR_LE_PI2_PSI");
    let stars: Vec<f64> = grid.iter().map(|&u| sym.psi_star(u)).collect();
    for (i, &u) in grid.iter().enumerate() {
        if sym.is_unimodal() {
            unimodal.record(stars[i], PI * PI * sym.psi(u), &[u], FP_SLACK);
        }
        for &r in grid {
            let ru = r * u;
            let s_ru = sym.psi_star(ru);
            star_mono.record(sym.psi(ru), s_ru, &[r, u], FP_SLACK);
            doubling.record(s_ru, 2.0 * (r * r + 1.0) * stars[i], &[r, u], FP_SLACK);
        }
    }
    let mut out = vec![star_mono, doubling];
    if sym.is_unimodal() {
        out.push(unimodal);
    }
    out
}

/// Potter bound `ℓ(x) ≤ C max(x/y, y/x)^ε ℓ(y)` with `ε = 0.1`, `C = 2` for
/// all pairs from `grid`. The bound is asymptotic, so `grid` should sit well
/// inside the regime where `ℓ` is slowly varying. `None` unless the symbol
/// has a de Haan auxiliary function.
pub fn check_potter(sym: &SymbolSpec, grid: &[f64]) -> Option<InequalityCheck> {
    if !sym.is_de_haan() {
        return None;
    }
    let mut potter = InequalityCheck::new("POTTER_ELL");
    for &x in grid {
        for &y in grid {
            if let (Some(lx), Some(ly)) = (sym.ell(x), sym.ell(y)) {
                let q = (x / y).max(y / x);
                potter.record(lx, 2.0 * q.powf(0.1) * ly, &[x, y], FP_SLACK);
            }
        }
    }
    Some(potter)
}

/// Check `u φ'(u) ≤ φ(u)` and that `u² φ'(u)` is nondecreasing on `grid`
/// (assumed sorted).
pub fn check_bernstein(b: &Bernstein, grid: &[f64]) -> Vec<InequalityCheck> {
    let mut first = InequalityCheck::new("U_PHI_PRIME_LE_PHI");
    let mut mono = InequalityCheck::new("U2_PHI_PRIME_NONDECREASING");
    let mut prev: Option<(f64, f64)> = None;
    for &u in grid {
        first.record(u * b.phi_prime(u), b.phi(u), &[u], FP_SLACK);
        let w = u * u * b.phi_prime(u);
        if let Some((pu, pw)) = prev {
            mono.record(pw, w, &[pu, u], FP_SLACK);
        }
        prev = Some((u, w));
    }
    vec![first, mono]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    #[test]
    fn geometric_stable_at_one() {
        let s = SymbolSpec::geometric_stable(1.0, 1).unwrap();
        assert!(close(s.psi(1.0), 2f64.ln(), 1e-15));
        assert!(close(s.psi_ln(0.0), 2f64.ln(), 1e-15));
    }

    #[test]
    fn iterated_geometric_at_one() {
        let s = SymbolSpec::iterated_geometric(2.0, 0.5, 1).unwrap();
        assert!(close(s.psi(1.0), 2f64.ln().sqrt(), 1e-15));
        assert!(close(s.psi(1.0), 0.832_554_611_157_697_7, 1e-12));
    }

    #[test]
    fn log_space_matches_direct() {
        let s = SymbolSpec::iterated_geometric(1.5, 0.3, 2).unwrap();
        for &u in &[1e-3, 0.7, 5.0, 1e6] {
            assert!(close(s.psi_ln(f64::ln(u)), s.psi(u), 1e-13));
        }
        // far beyond f64 range
        let v = s.psi_ln(1e5);
        assert!(close(v, (1.5e5f64).powf(0.3), 1e-12));
    }

    #[test]
    fn truncated_log_constants() {
        // I_1 is the entire cosine integral, I_1(u) − log u → Euler's constant.
        assert!(close(trunc_log_constant(1), 0.577_215_664_901_532_9, 1e-12));
        assert!(close(trunc_log_constant(2), -0.115_931_515_658_412_45, 1e-11));
    }

    #[test]
    fn truncated_log_continuous_across_branches() {
        for d in 1..=4 {
            for &u in &[TL_SERIES_MAX, TL_ASYM_MIN] {
                let lo = trunc_log_integral(d, u * (1.0 - 1e-12));
                let hi = trunc_log_integral(d, u * (1.0 + 1e-12));
                assert!((lo - hi).abs() < 1e-11, "d={d} u={u} {lo} {hi}");
            }
        }
    }

    #[test]
    fn truncated_log_d3_closed_form() {
        // I_3(u) = Cin(u) + sin(u)/u − 1; compare through Cin = I_1.
        for &u in &[0.3, 5.0, 12.0, 45.0, 300.0] {
            let i3 = trunc_log_integral(3, u);
            let want = trunc_log_integral(1, u) + u.sin() / u - 1.0;
            assert!((i3 - want).abs() < 1e-11, "u={u} {i3} {want}");
        }
    }

    #[test]
    fn psi_star_of_sin_squared() {
        let f = RadialFunction::new(|u: f64| u.sin().powi(2));
        let s = SymbolSpec::custom(f, 1).unwrap();
        assert!(close(s.psi_star(PI), 1.0, 1e-12));
        let g = SymbolSpec::gaussian(3).unwrap();
        assert_eq!(g.psi_star(2.0), 4.0);
    }

    #[test]
    fn ell_estimate_far_out() {
        let gs = SymbolSpec::geometric_stable(1.0, 1).unwrap();
        assert!(close(ell_estimate(&gs, 1e10, std::f64::consts::E).unwrap(), 1.0, 1e-9));
        let tl = SymbolSpec::truncated_log(3).unwrap();
        assert!(close(ell_estimate(&tl, 1e5, std::f64::consts::E).unwrap(), 4.0 * PI, 1e-6));
        // The auxiliary function of (log(1+x^α))^β is αβ (log(1+x^α))^{β−1}.
        let ig = SymbolSpec::iterated_geometric(2.0, 0.5, 1).unwrap();
        let x = 1e12;
        let est = ell_estimate(&ig, x, std::f64::consts::E).unwrap();
        assert!(close(est, ig.ell(x).unwrap(), 2e-2));
        assert!(ell_estimate(&gs, 1.0, 1.0 + 1e-12).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let s = SymbolSpec::from_json_str(
            r#"{"family":"SUBORDINATE_BM","d":3,"params":{"bernstein":"STABLE_SUB","gamma":0.25}}"#,
        )
        .unwrap();
        let back = SymbolSpec::from_json(&s.to_json()).unwrap();
        assert!(close(back.psi(2.0), 2f64.sqrt(), 1e-15));
        assert!(matches!(
            SymbolSpec::from_json_str(r#"{"family":"CUSTOM","d":1}"#),
            Err(Error::Unsupported(_))
        ));
        assert!(matches!(
            SymbolSpec::from_json_str(r#"{"family":"STABLE","d":1,"params":{"alpha":2.5}}"#),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn scaling_of_power_law() {
        let r = scaling_exponents(|x: f64| x.powf(1.3), 1.0, 1e4, 40).unwrap();
        assert!((r.alpha_lo - 1.3).abs() < 1e-10 && (r.alpha_hi - 1.3).abs() < 1e-10);
        let gs = SymbolSpec::geometric_stable(1.0, 1).unwrap();
        let r = scaling_exponents(|x| gs.psi(x), 1e2, 1e8, 60).unwrap();
        assert!(r.alpha_lo < 0.25 && r.alpha_hi < 0.25);
    }

    #[test]
    fn bernstein_derivatives() {
        let b = Bernstein::GeomSub { alpha: 1.2, beta: 0.6 };
        for &u in &[0.1, 1.0, 7.0] {
            let h = 1e-5 * u;
            let d1 = (b.phi(u + h) - b.phi(u - h)) / (2.0 * h);
            let d2 = (b.phi_prime(u + h) - b.phi_prime(u - h)) / (2.0 * h);
            assert!(close(b.phi_prime(u), d1, 1e-7));
            assert!(close(b.phi_second(u), d2, 1e-6));
        }
        let grid: Vec<f64> = (0..50).map(|k| 1e-3 * 1.3f64.powi(k)).collect();
        assert!(check_bernstein(&b, &grid).iter().all(|c| c.holds));
    }
}
