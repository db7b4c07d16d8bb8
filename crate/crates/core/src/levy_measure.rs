//! Lévy densities, their lower-dimensional marginals, the concentration
//! functions `K_j` and `h_j`, and the structural relations between them.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::kernels::stable_unit_density;
use crate::quad::{integrate, integrate_points, QuadratureResult, Tol};
use crate::special_fn::{beta_inc, gamma, gamma_p, gamma_q, sphere_area};
use crate::symbols::{Bernstein, Family, SymbolSpec};

const NU_TOL: f64 = 1e-11;
const MOMENT_TOL: f64 = 1e-10;

/// How `ν` is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum NuSource {
    ClosedForm,
    Subordination,
}

#[derive(Clone)]
enum Kind {
    /// `c r^{-d-α}`.
    Stable { alpha: f64 },
    /// `1_{r<1} r^{-d}`.
    TruncatedLog,
    /// Brownian motion with variance `2s` per coordinate, time-changed by `μ`.
    GaussianMixture(Bernstein),
    /// Gamma-time mixture of the α-stable law: `∫ s_α(u, ·) e^{-u}/u du`.
    GammaStable { alpha: f64 },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

/// Radial Lévy density `ν` of an isotropic unimodal process in `R^d`.
#[derive(Clone)]
pub struct LevyDensity {
    kind: Kind,
    pub d: usize,
    pub source: NuSource,
    /// `ν` vanishes for `r ≥ support`.
    pub support: f64,
}

impl std::fmt::Debug for LevyDensity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let k = match &self.kind {
            Kind::Stable { alpha } => format!("Stable({alpha})"),
            Kind::TruncatedLog => "TruncatedLog".into(),
            Kind::GaussianMixture(b) => format!("GaussianMixture({b:?})"),
            Kind::GammaStable { alpha } => format!("GammaStable({alpha})"),
            Kind::Custom(_) => "Custom".into(),
        };
        f.debug_struct("LevyDensity")
            .field("kind", &k)
            .field("d", &self.d)
            .field("source", &self.source)
            .finish()
    }
}

/// Constant of the α-stable Lévy density `c r^{-d-α}` for `ψ(u) = u^α`.
pub fn stable_nu_constant(alpha: f64, d: usize) -> f64 {
    let d = d as f64;
    alpha * 2f64.powf(alpha - 1.0) * gamma((d + alpha) / 2.0) / (PI.powf(d / 2.0) * gamma(1.0 - alpha / 2.0))
}

impl LevyDensity {
    /// The Lévy density of `sym`, or `MISSING_NU` when no representation is available.
    pub fn from_symbol(sym: &SymbolSpec) -> Result<Self> {
        let d = sym.d;
        let (kind, source, support) = match &sym.family {
            Family::Stable { alpha } if *alpha < 2.0 => (Kind::Stable { alpha: *alpha }, NuSource::ClosedForm, f64::INFINITY),
            Family::TruncatedLog => (Kind::TruncatedLog, NuSource::ClosedForm, 1.0),
            Family::SubordinateBm(b) => {
                if b.mu_density().is_none() {
                    return Err(Error::MissingNu(format!(
                        "{:?} has no closed-form subordinator Lévy density",
                        b
                    )));
                }
                (Kind::GaussianMixture(*b), NuSource::Subordination, f64::INFINITY)
            }
            Family::GeometricStable { alpha } => {
                if *alpha == 2.0 {
                    (Kind::GaussianMixture(Bernstein::Gamma), NuSource::Subordination, f64::INFINITY)
                } else {
                    (Kind::GammaStable { alpha: *alpha }, NuSource::Subordination, f64::INFINITY)
                }
            }
            other => {
                return Err(Error::MissingNu(format!("no Lévy density available for {}", other.name())));
            }
        };
        Ok(LevyDensity { kind, d, source, support })
    }

    /// A user-supplied radial density, assumed nonincreasing.
    pub fn custom(d: usize, support: f64, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        LevyDensity { kind: Kind::Custom(Arc::new(f)), d, source: NuSource::ClosedForm, support }
    }

    /// Same measure, but always through the Gaussian-mixture quadrature when
    /// the family admits one (used to cross-check closed forms).
    pub fn subordination(b: Bernstein, d: usize) -> Result<Self> {
        if b.mu_density().is_none() {
            return Err(Error::MissingNu(format!("{b:?} has no subordinator density")));
        }
        Ok(LevyDensity { kind: Kind::GaussianMixture(b), d, source: NuSource::Subordination, support: f64::INFINITY })
    }

    fn nu_in_dim(&self, j: usize, r: f64) -> Result<f64> {
        match &self.kind {
            Kind::Stable { alpha } => Ok(stable_nu_constant(*alpha, j) * r.powf(-(j as f64) - alpha)),
            Kind::TruncatedLog => {
                if j != self.d {
                    return Err(Error::Unsupported("truncated-log marginal needs the spherical reduction".into()));
                }
                Ok(if r < 1.0 { r.powi(-(j as i32)) } else { 0.0 })
            }
            Kind::GaussianMixture(b) => gaussian_mixture_nu(b, j, r),
            Kind::GammaStable { alpha } => gamma_stable_nu(*alpha, j, r),
            Kind::Custom(f) => {
                if j != self.d {
                    return Err(Error::Unsupported("custom marginal needs the spherical reduction".into()));
                }
                Ok(f(r))
            }
        }
    }

    /// Whether the `j`-dimensional marginal has its own closed or mixture representation.
    fn marginal_is_native(&self) -> bool {
        !matches!(self.kind, Kind::TruncatedLog | Kind::Custom(_))
    }
}

fn gaussian_mixture_nu(b: &Bernstein, d: usize, r: f64) -> Result<f64> {
    let mu = b.mu_density().ok_or_else(|| Error::MissingNu(format!("{b:?}")))?;
    let dh = d as f64 / 2.0;
    let center = (r * r / 4.0).ln();
    let f = |y: f64| {
        let s = y.exp();
        (4.0 * PI * s).powf(-dh) * (-r * r / (4.0 * s)).exp() * mu(s) * s
    };
    Ok(integrate_y_line(&f, center - 6.0, center + 4.0, NU_TOL)?.value)
}

/// Integrate a positive function of `y` over the whole line, starting from
/// `[lo, hi]` and extending each side by panels until they are negligible.
fn integrate_y_line<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, rel: f64) -> Result<QuadratureResult> {
    let core = integrate(f, lo, hi, Tol::new(0.0, rel * 0.1));
    let mut acc = core;
    for dir in [-1.0f64, 1.0] {
        let mut a = if dir > 0.0 { hi } else { lo };
        let mut small = 0;
        for _ in 0..400 {
            let b = a + dir * 4.0;
            let (x0, x1) = if dir > 0.0 { (a, b) } else { (b, a) };
            let piece = integrate(f, x0, x1, Tol::new(0.0, rel * 0.1));
            acc = acc.plus(piece);
            if piece.value.abs() <= rel * 1e-3 * acc.value.abs() {
                small += 1;
                if small >= 2 {
                    break;
                }
            } else {
                small = 0;
            }
            a = b;
        }
        if small < 2 {
            return Err(Error::NonConverged("tail of a mixture integral did not decay".into()));
        }
    }
    Ok(acc)
}

fn gamma_stable_nu(alpha: f64, d: usize, r: f64) -> Result<f64> {
    if alpha == 1.0 {
        // Cauchy density at time u: c_d u (u² + r²)^{-(d+1)/2}
        let dd = d as f64;
        let c = gamma((dd + 1.0) / 2.0) * PI.powf(-(dd + 1.0) / 2.0);
        let f = |y: f64| {
            let u = y.exp();
            c * (-u).exp() * u * (u * u + r * r).powf(-(dd + 1.0) / 2.0)
        };
        return Ok(integrate_y_line(&f, r.ln() - 6.0, r.ln() + 4.0, NU_TOL)?.value);
    }
    // s_α(u, r) = u^{-d/α} s_α(1, u^{-1/α} r)
    let dd = d as f64;
    let f = |y: f64| {
        let u = y.exp();
        let rho = (-y / alpha).exp() * r;
        (-u).exp() * (-dd / alpha * y).exp() * stable_unit_density(alpha, d, rho).unwrap_or(f64::NAN)
    };
    let c = alpha * r.ln();
    let q = integrate_y_line(&f, c - 6.0, c + 4.0, 1e-9)?;
    if !q.value.is_finite() {
        return Err(Error::NonConverged("stable density evaluation failed".into()));
    }
    Ok(q.value)
}

/// `ν(r)`.
pub fn nu_eval(ld: &LevyDensity, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return domain(format!("nu_eval needs r > 0 (r={r}); ν is singular at the origin"));
    }
    if r >= ld.support {
        return Ok(0.0);
    }
    ld.nu_in_dim(ld.d, r)
}

/// `ν_j(r)` by the spherical reduction
/// `ν_j(r) = |S^{d-j-1}| ∫_0^∞ ν(√(s² + r²)) s^{d-j-1} ds`.
pub fn nu_marginal_reduction(ld: &LevyDensity, j: usize, r: f64) -> Result<f64> {
    check_j(ld, j)?;
    if j == ld.d {
        return nu_eval(ld, r);
    }
    if r >= ld.support {
        return Ok(0.0);
    }
    let m = ld.d - j;
    let area = if m == 1 { 2.0 } else { sphere_area(m as f64) };
    let smax = if ld.support.is_finite() { (ld.support * ld.support - r * r).sqrt() } else { f64::INFINITY };
    let f = |s: f64| {
        let rho = (s * s + r * r).sqrt();
        nu_eval(ld, rho).unwrap_or(f64::NAN) * s.powi(m as i32 - 1)
    };
    let q = if smax.is_finite() {
        integrate_points(f, &[0.0, smax.min(r), smax], Tol::new(0.0, 1e-10))
    } else {
        let head = integrate_points(&f, &[0.0, r], Tol::new(0.0, 1e-10));
        let g = |y: f64| {
            let s = y.exp();
            f(s) * s
        };
        let tail = integrate_up(&g, r, f64::INFINITY, 1e-10)?;
        QuadratureResult { value: head.value + tail, ..head }
    };
    if !q.value.is_finite() {
        return Err(Error::NonConverged(format!("marginal quadrature failed at r={r}")));
    }
    Ok(area * q.value)
}

fn integrate_y_line_one_side<F: Fn(f64) -> f64>(f: &F, hi: f64, rel: f64) -> Result<f64> {
    let mut acc = 0.0;
    let mut a = hi;
    let mut small = 0;
    for _ in 0..400 {
        let b = a - 4.0;
        let piece = integrate(f, b, a, Tol::new(0.0, rel * 0.1)).value;
        acc += piece;
        if piece.abs() <= rel * 1e-3 * acc.abs() {
            small += 1;
            if small >= 2 {
                return Ok(acc);
            }
        } else {
            small = 0;
        }
        a = b;
    }
    Err(Error::NonConverged("lower tail did not decay".into()))
}

/// `ν_j(r)`: native `j`-dimensional representation when the family has one
/// (stable laws and Gaussian mixtures project to the same form), otherwise the
/// spherical reduction.
pub fn nu_marginal(ld: &LevyDensity, j: usize, r: f64) -> Result<f64> {
    check_j(ld, j)?;
    if !(r > 0.0) {
        return domain(format!("nu_marginal needs r > 0 (r={r})"));
    }
    if j == ld.d {
        return nu_eval(ld, r);
    }
    if ld.marginal_is_native() {
        ld.nu_in_dim(j, r)
    } else {
        nu_marginal_reduction(ld, j, r)
    }
}

fn check_j(ld: &LevyDensity, j: usize) -> Result<()> {
    if j == 0 || j > ld.d {
        return domain(format!("marginal index j must lie in [1, {}], got {j}", ld.d));
    }
    Ok(())
}

/// `K_j(r) = r^{-2} ∫_{|y| ≤ r} |y|² ν_j(y) dy`.
pub fn k_fn(ld: &LevyDensity, j: usize, r: f64) -> Result<f64> {
    Ok(conc(ld, j, r)?.0)
}

/// `h_j(r) = ∫ min{1, r^{-2}|y|²} ν_j(y) dy`.
pub fn h_fn(ld: &LevyDensity, j: usize, r: f64) -> Result<f64> {
    let (k, tail) = conc(ld, j, r)?;
    Ok(k + tail)
}

/// `(K_j(r), ∫_{|y|>r} ν_j(y) dy)`.
pub fn conc(ld: &LevyDensity, j: usize, r: f64) -> Result<(f64, f64)> {
    check_j(ld, j)?;
    if !(r > 0.0) {
        return domain(format!("concentration functions need r > 0 (r={r})"));
    }
    match &ld.kind {
        Kind::Stable { alpha } => {
            let c = sphere_area(j as f64) * stable_nu_constant(*alpha, j) * r.powf(-alpha);
            Ok((c / (2.0 - alpha), c / alpha))
        }
        Kind::TruncatedLog if j == ld.d => {
            let om = sphere_area(j as f64);
            if r <= 1.0 {
                Ok((om / 2.0, om * (1.0 / r).ln()))
            } else {
                Ok((om / (2.0 * r * r), 0.0))
            }
        }
        Kind::GaussianMixture(Bernstein::StableSub { gamma: g }) => {
            let alpha = 2.0 * g;
            let c = sphere_area(j as f64) * stable_nu_constant(alpha, j) * r.powf(-alpha);
            Ok((c / (2.0 - alpha), c / alpha))
        }
        Kind::GaussianMixture(b) => gaussian_mixture_conc(b, j, r),
        Kind::GammaStable { alpha } if *alpha == 1.0 && j <= 3 => gamma_cauchy_conc(j, r),
        _ => projected_conc(ld, j, r),
    }
}

/// Moments of a Gaussian mixture through the regularized incomplete gamma:
/// with variance `2s` per coordinate, `|B|²/(4s) ~ Gamma(j/2)`, so
/// `E[|B|²; |B| ≤ r] = 2js P(j/2+1, r²/4s)` and `P(|B| > r) = Q(j/2, r²/4s)`.
fn gaussian_mixture_conc(b: &Bernstein, j: usize, r: f64) -> Result<(f64, f64)> {
    let mu = b.mu_density().ok_or_else(|| Error::MissingNu(format!("{b:?}")))?;
    let a = j as f64 / 2.0;
    let z0 = r * r / 4.0;
    let center = z0.ln();
    let km = |y: f64| {
        let s = y.exp();
        mu(s) * s * 2.0 * j as f64 * s * gamma_p(a + 1.0, z0 / s)
    };
    let tm = |y: f64| {
        let s = y.exp();
        mu(s) * s * gamma_q(a, z0 / s)
    };
    let k = integrate_y_line(&km, center - 4.0, center + 4.0, MOMENT_TOL)?.value / (r * r);
    let t = integrate_y_line(&tm, center - 4.0, center + 4.0, MOMENT_TOL)?.value;
    Ok((k, t))
}

/// Truncated second moment `E[|X|²; |X| ≤ q]` and tail `P(|X| > q)` of the
/// standard Cauchy law in `R^j`, `j ≤ 3`.
fn cauchy_moments(j: usize, q: f64) -> (f64, f64) {
    let at = q.atan();
    match j {
        1 => {
            let m = if q < 0.1 {
                let mut s = 0.0;
                for k in 1..12 {
                    let p = (2 * k + 1) as i32;
                    let t = q.powi(p) / p as f64;
                    s += if k % 2 == 1 { t } else { -t };
                }
                s
            } else {
                q - at
            };
            (2.0 / PI * m, 2.0 / PI * (1.0 / q).atan())
        }
        2 => {
            let w = (1.0 + q * q).sqrt();
            let a = q * q / (w + 1.0);
            (a * a / w, 1.0 / w)
        }
        _ => {
            let m = if q < 0.1 {
                let mut s = 0.0;
                for k in 2..14 {
                    let p = (2 * k + 1) as i32;
                    let c = 0.5 - 1.5 / p as f64;
                    let t = c * q.powi(p);
                    s += if k % 2 == 0 { t } else { -t };
                }
                s
            } else {
                q - 1.5 * at + q / (2.0 * (1.0 + q * q))
            };
            (4.0 / PI * m, 2.0 / PI * ((1.0 / q).atan() + q / (1.0 + q * q)))
        }
    }
}

/// Gamma-time mixture of Cauchy laws: `E[|X_u|²; |X_u| ≤ r] = u² m(r/u)`.
fn gamma_cauchy_conc(j: usize, r: f64) -> Result<(f64, f64)> {
    let km = |y: f64| {
        let u = y.exp();
        (-u).exp() * u * u * cauchy_moments(j, r / u).0
    };
    let tm = |y: f64| {
        let u = y.exp();
        (-u).exp() * cauchy_moments(j, r / u).1
    };
    let c = r.ln();
    let k = integrate_y_line(&km, c - 4.0, c + 4.0, MOMENT_TOL)?.value / (r * r);
    let t = integrate_y_line(&tm, c - 4.0, c + 4.0, MOMENT_TOL)?.value;
    Ok((k, t))
}

/// Concentration functions of the `j`-marginal computed in `R^d`: writing
/// `y = ρθ` with `θ` uniform on the sphere, `c² = |θ_{1..j}|²` is
/// Beta(j/2, (d−j)/2) distributed.
fn projected_conc(ld: &LevyDensity, j: usize, r: f64) -> Result<(f64, f64)> {
    let d = ld.d;
    let om = sphere_area(d as f64);
    let nu = |rho: f64| nu_eval(ld, rho).unwrap_or(f64::NAN);
    let (a, bb) = (j as f64 / 2.0, (d - j) as f64 / 2.0);
    // E[c²; c ≤ q] and P(c > q)
    let second = |q: f64| -> f64 {
        if j == d {
            if q >= 1.0 {
                1.0
            } else {
                0.0
            }
        } else {
            (j as f64 / d as f64) * beta_inc(a + 1.0, bb, (q * q).min(1.0))
        }
    };
    let exceed = |q: f64| -> f64 {
        if j == d {
            if q >= 1.0 {
                0.0
            } else {
                1.0
            }
        } else {
            1.0 - beta_inc(a, bb, (q * q).min(1.0))
        }
    };
    let dd = d as i32;
    // ρ ≤ r: c ≤ r/ρ always holds.
    let inner = |y: f64| {
        let rho = y.exp();
        rho.powi(dd + 2) * nu(rho)
    };
    let head = integrate_down(&inner, r.min(ld.support), MOMENT_TOL)?;
    let mut k = head * (j as f64 / d as f64);
    let mut t = 0.0;
    if ld.support > r {
        let outer_k = |y: f64| {
            let rho = y.exp();
            rho.powi(dd + 2) * nu(rho) * second(r / rho)
        };
        let outer_t = |y: f64| {
            let rho = y.exp();
            rho.powi(dd) * nu(rho) * exceed(r / rho)
        };
        if j < d {
            k += integrate_up(&outer_k, r, ld.support, MOMENT_TOL)?;
        }
        t = integrate_up(&outer_t, r, ld.support, MOMENT_TOL)?;
    }
    let k = om * k / (r * r);
    let t = om * t;
    if !k.is_finite() || !t.is_finite() {
        return Err(Error::NonConverged(format!("moment integrals failed at r={r}")));
    }
    Ok((k, t))
}

/// `∫_{-∞}^{ln a} g(y) dy` for `g` decaying as `y → −∞`.
fn integrate_down<F: Fn(f64) -> f64>(g: &F, a: f64, rel: f64) -> Result<f64> {
    let top = a.ln();
    integrate_y_line_one_side(g, top, rel)
        .map_err(|_| Error::DivergentHead("small-radius moment integral does not converge".into()))
}

/// `∫_{ln a}^{ln b} g(y) dy` with `b` possibly infinite.
fn integrate_up<F: Fn(f64) -> f64>(g: &F, a: f64, b: f64, rel: f64) -> Result<f64> {
    if b.is_finite() {
        let (la, lb) = (a.ln(), b.ln());
        let n = ((lb - la) / 2.0).ceil().max(1.0) as usize;
        let pts: Vec<f64> = (0..=n).map(|k| la + (lb - la) * k as f64 / n as f64).collect();
        return Ok(integrate_points(g, &pts, Tol::new(0.0, rel)).value);
    }
    let mut acc = 0.0;
    let mut lo = a.ln();
    let mut small = 0;
    for _ in 0..400 {
        let piece = integrate(g, lo, lo + 4.0, Tol::new(0.0, rel * 0.1)).value;
        acc += piece;
        if piece.abs() <= rel * 1e-3 * acc.abs() || (acc == 0.0 && piece == 0.0) {
            small += 1;
            if small >= 2 {
                return Ok(acc);
            }
        } else {
            small = 0;
        }
        lo += 4.0;
    }
    Err(Error::NonConverged("tail moment integral did not decay".into()))
}

/// `∫_r^∞ s^{d-2} ν(s) ds`, the tail term of the comparison between `K_1` and `K_d`.
fn tail_moment(ld: &LevyDensity, r: f64) -> Result<f64> {
    if r >= ld.support {
        return Ok(0.0);
    }
    let d = ld.d as i32;
    let g = |y: f64| {
        let s = y.exp();
        s.powi(d - 1) * nu_eval(ld, s).unwrap_or(f64::NAN)
    };
    integrate_up(&g, r, ld.support, MOMENT_TOL)
}

/// Structural relations between `ν`, `K_j`, `h_j` and `ψ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Relation {
    /// `h'(r) = −2K(r)/r`.
    Eq46,
    /// `h(r) ≍ ψ(1/r)`.
    Hcomp,
    /// `λ² h(λr) ≥ h(r)`, `λ ≥ 1`.
    Eq55,
    /// `λ² K_j(λr) ≥ K_j(r)`.
    Ksc1,
    /// `λ^{-j} K_j(λr) ≤ K_j(r)`.
    Ksc2,
    /// `ν(r) ≤ (d+2)/ω_d · r^{-d} K_d(r)`.
    Ksc3,
    /// `|ψ(λx) − ψ(x)| ≤ 3 K_1(1/x)`, `λ ∈ [1, 2]`.
    K1Increment,
    /// `K_d(r) ≤ d K_1(r)`.
    KdLeK1,
    /// `C K_1(r) ≤ K_d(r) + r ∫_r^∞ s^{d−2} ν(s) ds`.
    Lem3,
}

impl Relation {
    pub const ALL: [Relation; 9] = [
        Relation::Eq46,
        Relation::Hcomp,
        Relation::Eq55,
        Relation::Ksc1,
        Relation::Ksc2,
        Relation::Ksc3,
        Relation::K1Increment,
        Relation::KdLeK1,
        Relation::Lem3,
    ];

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_uppercase().as_str() {
            "EQ46" => Relation::Eq46,
            "HCOMP" => Relation::Hcomp,
            "EQ55" => Relation::Eq55,
            "KSC1" => Relation::Ksc1,
            "KSC2" => Relation::Ksc2,
            "KSC3" => Relation::Ksc3,
            "K1_INCREMENT" => Relation::K1Increment,
            "KD_LE_K1" => Relation::KdLeK1,
            "LEM3" => Relation::Lem3,
            _ => return Err(Error::Parse(format!("unknown relation '{s}'"))),
        })
    }

    /// Whether the relation is a proven inequality with an explicit constant.
    pub fn is_assertable(&self) -> bool {
        !matches!(self, Relation::Hcomp | Relation::Lem3)
    }
}

/// Outcome of one relation over a grid.
#[derive(Debug, Clone, Serialize)]
pub struct RelationReport {
    pub relation: Relation,
    pub points: usize,
    pub failures: usize,
    /// Minimum of `(rhs − lhs)/|rhs|` over the grid.
    pub worst_margin: f64,
    pub worst_at: Vec<f64>,
    /// Empirical `[inf, sup]` of the comparison ratio (HCOMP, LEM3, K1_INCREMENT).
    pub constant: Option<(f64, f64)>,
    /// Largest relative residual (EQ46).
    pub max_residual: Option<f64>,
    pub errors: Vec<String>,
}

impl RelationReport {
    fn new(relation: Relation) -> Self {
        RelationReport {
            relation,
            points: 0,
            failures: 0,
            worst_margin: f64::INFINITY,
            worst_at: vec![],
            constant: None,
            max_residual: None,
            errors: vec![],
        }
    }

    pub fn holds(&self) -> bool {
        self.failures == 0 && self.errors.is_empty()
    }

    fn record(&mut self, lhs: f64, rhs: f64, at: &[f64], slack: f64) {
        self.points += 1;
        let m = (rhs - lhs) / rhs.abs().max(1e-300);
        if m.is_nan() || m < self.worst_margin {
            self.worst_margin = m;
            self.worst_at = at.to_vec();
        }
        if m.is_nan() || m < -slack {
            self.failures += 1;
        }
    }

    fn ratio(&mut self, v: f64) {
        let (lo, hi) = self.constant.unwrap_or((f64::INFINITY, f64::NEG_INFINITY));
        self.constant = Some((lo.min(v), hi.max(v)));
    }
}

/// Relative slack within which an inequality still counts as satisfied:
/// ten times the quadrature tolerance of the moment integrals.
pub const RELATION_SLACK: f64 = 1e-8;

/// Central difference of `h` with one Richardson step.
fn h_derivative(ld: &LevyDensity, j: usize, r: f64, step: f64) -> Result<f64> {
    let cd = |hh: f64| -> Result<f64> { Ok((h_fn(ld, j, r + hh)? - h_fn(ld, j, r - hh)?) / (2.0 * hh)) };
    let d1 = cd(step * r)?;
    let d2 = cd(0.5 * step * r)?;
    Ok((4.0 * d2 - d1) / 3.0)
}

/// Evaluate one relation on radii `grid`; `lambdas` supplies the scale
/// factors (used cyclically for K1_INCREMENT, as a full product otherwise).
pub fn check_concentration_relations(
    ld: &LevyDensity,
    sym: &SymbolSpec,
    relation: Relation,
    grid: &[f64],
    lambdas: &[f64],
) -> RelationReport {
    let mut rep = RelationReport::new(relation);
    let d = ld.d;
    for (i, &r) in grid.iter().enumerate() {
        let res: Result<()> = (|| {
            match relation {
                Relation::Eq46 => {
                    let dh = h_derivative(ld, d, r, 1e-3)?;
                    let k = k_fn(ld, d, r)?;
                    let want = -2.0 * k / r;
                    let resid = ((dh - want) / want).abs();
                    rep.points += 1;
                    if resid > rep.max_residual.unwrap_or(-1.0) {
                        rep.max_residual = Some(resid);
                        rep.worst_at = vec![r];
                        rep.worst_margin = -resid;
                    }
                }
                Relation::Hcomp => {
                    let v = h_fn(ld, d, r)? / sym.psi(1.0 / r);
                    rep.points += 1;
                    rep.ratio(v);
                }
                Relation::Eq55 => {
                    let h = h_fn(ld, d, r)?;
                    for &l in lambdas {
                        rep.record(h, l * l * h_fn(ld, d, l * r)?, &[r, l], RELATION_SLACK);
                    }
                }
                Relation::Ksc1 | Relation::Ksc2 => {
                    for j in [1, d] {
                        let k = k_fn(ld, j, r)?;
                        for &l in lambdas {
                            let kl = k_fn(ld, j, l * r)?;
                            if relation == Relation::Ksc1 {
                                rep.record(k, l * l * kl, &[r, l, j as f64], RELATION_SLACK);
                            } else {
                                rep.record(kl * l.powi(-(j as i32)), k, &[r, l, j as f64], RELATION_SLACK);
                            }
                        }
                        if d == 1 {
                            break;
                        }
                    }
                }
                Relation::Ksc3 => {
                    let c = (d as f64 + 2.0) / sphere_area(d as f64);
                    let rhs = c * r.powi(-(d as i32)) * k_fn(ld, d, r)?;
                    rep.record(nu_eval(ld, r)?, rhs, &[r], RELATION_SLACK);
                }
                Relation::K1Increment => {
                    let l = lambdas[i % lambdas.len()];
                    let x = r;
                    let lhs = (sym.psi(l * x) - sym.psi(x)).abs();
                    let k1 = k_fn(ld, 1, 1.0 / x)?;
                    rep.record(lhs, 3.0 * k1, &[x, l], RELATION_SLACK);
                    if k1 > 0.0 {
                        rep.ratio(lhs / k1);
                    }
                }
                Relation::KdLeK1 => {
                    rep.record(k_fn(ld, d, r)?, d as f64 * k_fn(ld, 1, r)?, &[r], RELATION_SLACK);
                }
                Relation::Lem3 => {
                    let k1 = k_fn(ld, 1, r)?;
                    let rhs = k_fn(ld, d, r)? + r * tail_moment(ld, r)?;
                    rep.points += 1;
                    rep.ratio(rhs / k1);
                }
            }
            Ok(())
        })();
        if let Err(e) = res {
            rep.errors.push(format!("r={r}: {e}"));
        }
    }
    rep
}

/// Trend classification of `K_d(r)/h(r)` as `r → 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ProfileFlag {
    Slow,
    Scaling,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct KdOverH {
    pub points: Vec<(f64, f64)>,
    pub flag: ProfileFlag,
}

/// `(r, K_d(r)/h(r))` on a log grid, with a trend flag: SLOW when the ratio
/// decreases toward small `r` and drops by more than a factor 4 over the
/// grid, SCALING when it stays within a factor 2.
pub fn kd_over_h_profile(ld: &LevyDensity, r_lo: f64, r_hi: f64, n: usize) -> Result<KdOverH> {
    if !(r_lo > 0.0 && r_hi > r_lo) || n < 2 {
        return domain("kd_over_h_profile needs 0 < r_lo < r_hi and n >= 2");
    }
    let (a, b) = (r_lo.ln(), r_hi.ln());
    let mut pts = Vec::with_capacity(n);
    for k in 0..n {
        let r = (a + (b - a) * k as f64 / (n - 1) as f64).exp();
        let (kd, tail) = conc(ld, ld.d, r)?;
        pts.push((r, kd / (kd + tail)));
    }
    let first = pts[0].1;
    let last = pts[n - 1].1;
    let monotone = pts.windows(2).all(|w| w[1].1 >= w[0].1 * (1.0 - 1e-9));
    let (mn, mx) = pts
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.1), hi.max(p.1)));
    let flag = if monotone && first < 0.25 * last {
        ProfileFlag::Slow
    } else if mn > 0.0 && mx / mn < 2.0 {
        ProfileFlag::Scaling
    } else {
        ProfileFlag::Inconclusive
    };
    Ok(KdOverH { points: pts, flag })
}

/// Closed-form `ν(r) = e^{-r}/r` of the gamma-subordinated Brownian motion in
/// one dimension; used as a reference.
pub fn gamma_bm_nu_1d(r: f64) -> f64 {
    (-r).exp() / r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    #[test]
    fn truncated_log_values() {
        let ld = LevyDensity::from_symbol(&SymbolSpec::truncated_log(2).unwrap()).unwrap();
        assert_eq!(nu_eval(&ld, 0.5).unwrap(), 4.0);
        assert_eq!(nu_eval(&ld, 2.0).unwrap(), 0.0);
        assert_eq!(nu_marginal(&ld, 1, 2.0).unwrap(), 0.0);
        let om = 2.0 * PI;
        assert!(close(k_fn(&ld, 2, 0.5).unwrap(), om / 2.0, 1e-15));
        assert!(close(h_fn(&ld, 2, 0.5).unwrap(), om * (0.5 + 2f64.ln()), 1e-15));
    }

    #[test]
    fn gamma_subordination_matches_closed_form() {
        let ld = LevyDensity::subordination(Bernstein::Gamma, 1).unwrap();
        for k in 0..30 {
            let r = 0.05 * (200f64).powf(k as f64 / 29.0);
            let v = nu_eval(&ld, r).unwrap();
            assert!(close(v, gamma_bm_nu_1d(r), 1e-8), "r={r} {v}");
        }
    }

    #[test]
    fn stable_sub_mixture_matches_stable_constant() {
        let ld = LevyDensity::subordination(Bernstein::StableSub { gamma: 0.35 }, 3).unwrap();
        let r = 0.8;
        let v = nu_eval(&ld, r).unwrap();
        let want = stable_nu_constant(0.7, 3) * r.powf(-3.7);
        assert!(close(v, want, 1e-8), "{v} {want}");
    }

    #[test]
    fn marginal_routes_agree() {
        let ld = LevyDensity::subordination(Bernstein::Gamma, 3).unwrap();
        for &r in &[0.1, 0.7, 3.0] {
            let native = nu_marginal(&ld, 1, r).unwrap();
            let reduced = nu_marginal_reduction(&ld, 1, r).unwrap();
            assert!(close(native, reduced, 1e-7), "r={r} {native} {reduced}");
        }
        let st = LevyDensity::from_symbol(&SymbolSpec::stable(1.2, 3).unwrap()).unwrap();
        let a = nu_marginal(&st, 2, 0.6).unwrap();
        let b = nu_marginal_reduction(&st, 2, 0.6).unwrap();
        assert!(close(a, b, 1e-8), "{a} {b}");
    }

    #[test]
    fn concentration_routes_agree() {
        // Gaussian-mixture closed moments versus projected moments in R^3.
        let mix = LevyDensity::subordination(Bernstein::Gamma, 3).unwrap();
        let proj = LevyDensity::custom(3, f64::INFINITY, move |r| gaussian_mixture_nu(&Bernstein::Gamma, 3, r).unwrap());
        for &r in &[0.05, 0.4, 2.0] {
            for j in [1, 3] {
                let (k1, t1) = conc(&mix, j, r).unwrap();
                let (k2, t2) = conc(&proj, j, r).unwrap();
                assert!(close(k1, k2, 1e-7), "K j={j} r={r} {k1} {k2}");
                assert!(close(t1, t2, 1e-7), "tail j={j} r={r} {t1} {t2}");
            }
        }
    }

    #[test]
    fn gamma_cauchy_moments_match_projection() {
        for d in 1..=3 {
            let ld = LevyDensity::from_symbol(&SymbolSpec::geometric_stable(1.0, d).unwrap()).unwrap();
            let proj = LevyDensity::custom(d, f64::INFINITY, move |r| gamma_stable_nu(1.0, d, r).unwrap());
            for &r in &[0.02, 0.5, 4.0] {
                for j in 1..=d {
                    let (k1, t1) = conc(&ld, j, r).unwrap();
                    let (k2, t2) = conc(&proj, j, r).unwrap();
                    assert!(close(k1, k2, 1e-7), "K d={d} j={j} r={r} {k1} {k2}");
                    assert!(close(t1, t2, 1e-7), "tail d={d} j={j} r={r} {t1} {t2}");
                }
            }
        }
    }

    #[test]
    fn stable_concentration_closed_form() {
        let st = LevyDensity::from_symbol(&SymbolSpec::stable(0.8, 2).unwrap()).unwrap();
        let c = stable_nu_constant(0.8, 2);
        let proj = LevyDensity::custom(2, f64::INFINITY, move |r| c * r.powf(-2.8));
        let (k1, t1) = conc(&st, 2, 0.3).unwrap();
        let (k2, t2) = conc(&proj, 2, 0.3).unwrap();
        assert!(close(k1, k2, 1e-8) && close(t1, t2, 1e-8));
    }

    #[test]
    fn eq46_truncated_log() {
        let sym = SymbolSpec::truncated_log(1).unwrap();
        let ld = LevyDensity::from_symbol(&sym).unwrap();
        let grid: Vec<f64> = (0..20).map(|k| 0.05 + 0.85 * k as f64 / 19.0).collect();
        let rep = check_concentration_relations(&ld, &sym, Relation::Eq46, &grid, &[]);
        assert!(rep.max_residual.unwrap() < 1e-6, "{rep:?}");
    }

    #[test]
    fn kd_over_h_flags() {
        let tl = LevyDensity::from_symbol(&SymbolSpec::truncated_log(3).unwrap()).unwrap();
        assert_eq!(kd_over_h_profile(&tl, 1e-6, 0.9, 12).unwrap().flag, ProfileFlag::Slow);
        let st = LevyDensity::from_symbol(&SymbolSpec::stable(1.3, 2).unwrap()).unwrap();
        let p = kd_over_h_profile(&st, 1e-3, 1.0, 8).unwrap();
        assert_eq!(p.flag, ProfileFlag::Scaling);
        assert!(close(p.points[0].1, 1.3 / 2.0, 1e-12));
    }

    #[test]
    fn missing_nu() {
        let ig = SymbolSpec::iterated_geometric(2.0, 0.5, 1).unwrap();
        assert!(matches!(LevyDensity::from_symbol(&ig), Err(Error::MissingNu(_))));
    }
}
