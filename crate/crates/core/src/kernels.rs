//! Stable reference densities, the gamma-time subordination route for
//! geometric stable processes, the example envelopes, and kernel tables.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::quad::{integrate, QuadratureResult, Tol};
use crate::special_fn::{ln_gamma, sphere_area};
use crate::symbols::SymbolSpec;
use crate::transforms::{cauchy_density, density_from_symbol, gaussian_density, InversionConfig};

/// `s(t, x)` for `ψ(u) = u^α`: closed forms at `α ∈ {1, 2}`, Hankel inversion otherwise.
pub fn stable_density(alpha: f64, d: usize, t: f64, x_norm: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return domain(format!("alpha must lie in (0, 2], got {alpha}"));
    }
    if !(t > 0.0) || !(x_norm >= 0.0) {
        return domain("stable_density needs t > 0 and x_norm >= 0");
    }
    if alpha == 1.0 {
        return Ok(cauchy_density(d, t, x_norm));
    }
    if alpha == 2.0 {
        return Ok(gaussian_density(d, t, x_norm));
    }
    if x_norm == 0.0 {
        return Ok(stable_density_at_origin(alpha, d) * t.powf(-(d as f64) / alpha));
    }
    let sym = SymbolSpec::stable(alpha, d)?;
    // s(t, x) = t^{-d/α} s(1, t^{-1/α} x)
    let rho = t.powf(-1.0 / alpha) * x_norm;
    let q = density_from_symbol(&sym, 1.0, rho, &InversionConfig::default())?;
    Ok(q.value * t.powf(-(d as f64) / alpha))
}

/// `s(1, 0) = Γ(d/α) / (α 2^{d−1} π^{d/2} Γ(d/2))`.
pub fn stable_density_at_origin(alpha: f64, d: usize) -> f64 {
    let dd = d as f64;
    (ln_gamma(dd / alpha) - ln_gamma(dd / 2.0)).exp() / (alpha * 2f64.powf(dd - 1.0) * PI.powf(dd / 2.0))
}

/// Natural cubic spline of `ln s(1, ρ)` against `ln ρ`.
struct StableTable {
    lo: f64,
    h: f64,
    y: Vec<f64>,
    m: Vec<f64>,
}

const TABLE_LO: f64 = -8.0;
const TABLE_HI: f64 = 10.0;
const TABLE_STEP: f64 = 0.02;

impl StableTable {
    fn build(alpha: f64, d: usize) -> Result<Self> {
        let n = ((TABLE_HI - TABLE_LO) / TABLE_STEP).round() as usize + 1;
        let sym = SymbolSpec::stable(alpha, d)?;
        let cfg = InversionConfig { rel_tol: 1e-11, ..Default::default() };
        let mut y = Vec::with_capacity(n);
        for k in 0..n {
            let rho = (TABLE_LO + TABLE_STEP * k as f64).exp();
            let v = density_from_symbol(&sym, 1.0, rho, &cfg)?.value;
            if !(v > 0.0) {
                return Err(Error::NonConverged(format!("stable density not positive at rho={rho}")));
            }
            y.push(v.ln());
        }
        // Second derivatives of the natural spline (tridiagonal solve).
        let h = TABLE_STEP;
        let mut m = vec![0.0; n];
        let mut c = vec![0.0; n];
        let mut r = vec![0.0; n];
        for i in 1..n - 1 {
            let rhs = 6.0 * (y[i + 1] - 2.0 * y[i] + y[i - 1]) / (h * h);
            let denom = 4.0 - c[i - 1];
            c[i] = 1.0 / denom;
            r[i] = (rhs - r[i - 1]) / denom;
        }
        for i in (1..n - 1).rev() {
            m[i] = r[i] - c[i] * m[i + 1];
        }
        Ok(StableTable { lo: TABLE_LO, h, y, m })
    }

    fn eval_ln(&self, lx: f64) -> Option<f64> {
        let n = self.y.len();
        let pos = (lx - self.lo) / self.h;
        if !(pos >= 0.0) || pos > (n - 1) as f64 {
            return None;
        }
        let i = (pos.floor() as usize).min(n - 2);
        let t = pos - i as f64;
        let (a, b) = (1.0 - t, t);
        let h2 = self.h * self.h / 6.0;
        Some(
            a * self.y[i]
                + b * self.y[i + 1]
                + h2 * ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]),
        )
    }
}

fn stable_table(alpha: f64, d: usize) -> Result<Arc<StableTable>> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, usize), Arc<StableTable>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = (alpha.to_bits(), d);
    if let Some(t) = cache.lock().unwrap_or_else(|e| e.into_inner()).get(&key) {
        return Ok(t.clone());
    }
    let t = Arc::new(StableTable::build(alpha, d)?);
    cache.lock().unwrap_or_else(|e| e.into_inner()).insert(key, t.clone());
    Ok(t)
}

/// Leading terms of the large-radius expansion
/// `s(1, ρ) ≈ Σ_k (−1)^{k+1}/k! 2^{kα} Γ(kα/2+1) Γ((kα+d)/2) sin(πkα/2) π^{−d/2−1} ρ^{−kα−d}`.
fn stable_far(alpha: f64, d: usize, rho: f64) -> f64 {
    let dd = d as f64;
    let mut s = 0.0;
    for k in 1..=4 {
        let kf = k as f64;
        let ka = kf * alpha;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        let ln_mag = ka * 2f64.ln() + ln_gamma(ka / 2.0 + 1.0) + ln_gamma((ka + dd) / 2.0) - ln_gamma(kf + 1.0)
            - (dd / 2.0 + 1.0) * PI.ln()
            - (ka + dd) * rho.ln();
        s += sign * (PI * ka / 2.0).sin() * ln_mag.exp();
    }
    s
}

/// Small-radius series `s(1, ρ) = Σ_k (−1)^k Γ((d+2k)/α) (ρ/2)^{2k} / (α 2^{d−1} π^{d/2} k! Γ(k+d/2))`.
fn stable_near(alpha: f64, d: usize, rho: f64) -> f64 {
    let dd = d as f64;
    let pre = 1.0 / (alpha * 2f64.powf(dd - 1.0) * PI.powf(dd / 2.0));
    let mut s = 0.0;
    for k in 0..6 {
        let kf = k as f64;
        let ln_t = ln_gamma((dd + 2.0 * kf) / alpha) - ln_gamma(kf + 1.0) - ln_gamma(kf + dd / 2.0)
            + 2.0 * kf * (rho / 2.0).ln().max(-700.0);
        let term = ln_t.exp();
        s += if k % 2 == 0 { term } else { -term };
    }
    pre * s
}

/// `s(1, ρ)`: the isotropic α-stable density at time one and radius `ρ`.
/// Away from `α ∈ {1, 2}` values come from a cached spline of Hankel
/// inversions, with series beyond the tabulated range.
pub fn stable_unit_density(alpha: f64, d: usize, rho: f64) -> Result<f64> {
    let dd = d as f64;
    if alpha == 2.0 {
        return Ok((4.0 * PI).powf(-dd / 2.0) * (-rho * rho / 4.0).exp());
    }
    if alpha == 1.0 {
        return Ok(cauchy_density(d, 1.0, rho));
    }
    let lx = rho.ln();
    if lx < TABLE_LO {
        return Ok(stable_near(alpha, d, rho));
    }
    if lx > TABLE_HI {
        return Ok(stable_far(alpha, d, rho));
    }
    let table = stable_table(alpha, d)?;
    table
        .eval_ln(lx)
        .map(f64::exp)
        .ok_or_else(|| Error::Domain(format!("rho={rho} outside the stable table")))
}

/// Geometric stable density by gamma-time subordination,
/// `p(t, x) = Γ(t)^{-1} ∫_0^∞ e^{−u} u^{t−1} s(u, x) du`.
pub fn geometric_stable_density(alpha: f64, d: usize, t: f64, x_norm: f64) -> Result<QuadratureResult> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return domain(format!("alpha must lie in (0, 2], got {alpha}"));
    }
    if !(t > 0.0) || !(x_norm >= 0.0) {
        return domain("geometric_stable_density needs t > 0 and x_norm >= 0");
    }
    let dd = d as f64;
    if x_norm == 0.0 {
        if t <= dd / alpha {
            return Err(Error::P0Infinite);
        }
        // Γ(t)^{-1} s(1,0) ∫ e^{−u} u^{t−1−d/α} du
        let v = stable_density_at_origin(alpha, d) * (ln_gamma(t - dd / alpha) - ln_gamma(t)).exp();
        return Ok(QuadratureResult::exact(v));
    }
    let err = std::cell::Cell::new(None);
    // s(u, x) = u^{−d/α} s(1, u^{−1/α} x), integrated in y = ln u.
    let f = |y: f64| {
        let u = y.exp();
        let s = if alpha == 1.0 {
            cauchy_density(d, u, x_norm)
        } else {
            let rho = (-y / alpha).exp() * x_norm;
            match stable_density(alpha, d, 1.0, rho) {
                Ok(v) => v * (-dd / alpha * y).exp(),
                Err(e) => {
                    err.set(Some(e));
                    0.0
                }
            }
        };
        (-u).exp() * (t * y).exp() * s
    };
    // Gamma weight peaks at u ≈ t; the stable factor switches at u ≈ |x|^α.
    let c1 = t.max(1e-3).ln();
    let c2 = alpha * x_norm.ln();
    let (lo, hi) = (c1.min(c2) - 4.0, c1.max(c2).max(0.0) + 4.0);
    let core = integrate(&f, lo, hi, Tol::new(0.0, 1e-12));
    let mut acc = core;
    let mut a = lo;
    let mut small = 0;
    for _ in 0..400 {
        let piece = integrate(&f, a - 4.0, a, Tol::new(0.0, 1e-12));
        acc = acc.plus(piece);
        a -= 4.0;
        if piece.value.abs() <= 1e-15 * acc.value.abs() {
            small += 1;
            if small >= 2 {
                break;
            }
        } else {
            small = 0;
        }
    }
    let top = integrate(&f, hi, hi + 5.0, Tol::new(0.0, 1e-12));
    acc = acc.plus(top);
    if let Some(e) = err.take() {
        return Err(e);
    }
    if small < 2 {
        return Err(Error::NonConverged("gamma-time integral did not decay toward u = 0".into()));
    }
    Ok(acc.scaled((-ln_gamma(t)).exp()))
}

/// The closed-form envelopes of the worked examples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Example {
    /// Truncated-log Lévy density: `t|x|^{2ω_d t − d}` for `t ∈ (0,1)`, `|x| ≤ 1`.
    Ex1 { d: usize },
    /// `ψ = (log(1+u^α))^β` near the origin.
    Ex2 { d: usize, alpha: f64, beta: f64, t0: f64, r0: f64 },
    /// `ψ = log(1 + u^α)`, global.
    Ex3 { d: usize, alpha: f64 },
    /// `ψ = (log(1 + u^α))^{1/2}`, global.
    Ex4 { d: usize, alpha: f64 },
}

impl Example {
    pub fn parse(id: &str, d: usize, alpha: f64, beta: f64) -> Result<Self> {
        Ok(match id.to_ascii_uppercase().as_str() {
            "EX1" => Example::Ex1 { d },
            "EX2" => Example::Ex2 { d, alpha, beta, t0: 0.5, r0: 0.2 },
            "EX3" => Example::Ex3 { d, alpha },
            "EX4" => Example::Ex4 { d, alpha },
            _ => return Err(Error::Parse(format!("unknown example '{id}'"))),
        })
    }
}

/// Which case of an example formula applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ExampleRegime {
    NearOrigin,
    /// `|x| ≥ 1` (example 3) or `|x| ≥ 1/2` (example 4).
    Far,
    /// `|x| < 1`, `t > d/α`.
    NearSupercritical,
    /// `|x| < 1`, `t ≤ d/α`.
    NearSubcritical,
    /// `t ≥ t₁ = 3d/α`.
    LargeTime,
    /// `t√(α/d) ≤ 1 + 2√(−d log|x|)`.
    NearLow,
    /// `t√(α/d) ≥ 1 + 2√(−d log|x|)`.
    NearHigh,
}

/// Envelope value of an example at `(t, |x|)` and the case used.
pub fn example_estimate(ex: Example, t: f64, x: f64) -> Result<(f64, ExampleRegime)> {
    if !(t > 0.0) || !(x > 0.0) {
        return domain("example envelopes need t > 0 and |x| > 0");
    }
    match ex {
        Example::Ex1 { d } => {
            if t >= 1.0 || x > 1.0 {
                return Err(Error::OutOfRegime(format!("example 1 needs t < 1 and |x| <= 1 (t={t}, x={x})")));
            }
            let om = sphere_area(d as f64);
            Ok((t * x.powf(2.0 * om * t - d as f64), ExampleRegime::NearOrigin))
        }
        Example::Ex2 { d, alpha, beta, t0, r0 } => {
            if t >= t0 || x > r0 {
                return Err(Error::OutOfRegime(format!("example 2 needs t < {t0} and |x| <= {r0}")));
            }
            let v = t * x.powi(-(d as i32)) * (1.0 / x).ln_1p().powf(beta - 1.0)
                * (-t * x.powf(-alpha).ln_1p().powf(beta)).exp();
            Ok((v, ExampleRegime::NearOrigin))
        }
        Example::Ex3 { d, alpha } => {
            let dd = d as f64;
            let t1 = 3.0 * dd / alpha;
            if t >= t1 {
                let v = t.powf(-dd / alpha).min(t * x.powf(-dd - alpha));
                return Ok((v, ExampleRegime::LargeTime));
            }
            if x >= 1.0 {
                return Ok((t * x.powf(-dd - alpha), ExampleRegime::Far));
            }
            let lg = (2.0 * x.powf(-alpha)).ln();
            if t > dd / alpha {
                Ok((t * lg.min(1.0 / (t - dd / alpha)), ExampleRegime::NearSupercritical))
            } else {
                Ok((t * (lg + x.powf(alpha * t - dd)), ExampleRegime::NearSubcritical))
            }
        }
        Example::Ex4 { d, alpha } => {
            let dd = d as f64;
            if x >= 0.5 {
                let v = (t * x.powf(-dd - alpha / 2.0)).min(t.powf(-2.0 * dd / alpha));
                return Ok((v, ExampleRegime::Far));
            }
            let lx = x.ln();
            if t * (alpha / dd).sqrt() >= 1.0 + 2.0 * (-dd * lx).sqrt() {
                return Ok((t.powf(-2.0 * dd / alpha), ExampleRegime::NearHigh));
            }
            let s = (-alpha * lx).sqrt();
            let v = t * x.powf(-dd) / s * (-t * s).exp() - t * alpha * lx;
            Ok((v, ExampleRegime::NearLow))
        }
    }
}

/// Status of one kernel-table entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EntryFlag {
    Ok,
    P0Infinite,
    NonConverged,
    Error,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct KernelEntry {
    pub t: f64,
    pub x: f64,
    pub p: f64,
    pub abs_err: f64,
    pub flag: EntryFlag,
}

/// One transition-density evaluation packaged as a table entry.
pub fn kernel_entry(sym: &SymbolSpec, t: f64, x: f64, cfg: &InversionConfig) -> KernelEntry {
    match density_from_symbol(sym, t, x, cfg) {
        Ok(q) => KernelEntry {
            t,
            x,
            p: q.value,
            abs_err: q.abs_err,
            flag: if q.converged { EntryFlag::Ok } else { EntryFlag::NonConverged },
        },
        Err(Error::P0Infinite) => KernelEntry { t, x, p: f64::INFINITY, abs_err: 0.0, flag: EntryFlag::P0Infinite },
        Err(Error::NonConverged(_)) => KernelEntry { t, x, p: f64::NAN, abs_err: f64::NAN, flag: EntryFlag::NonConverged },
        Err(_) => KernelEntry { t, x, p: f64::NAN, abs_err: f64::NAN, flag: EntryFlag::Error },
    }
}

/// Dense `p(t, x)` table; entries are stored row-major by `t`.
#[derive(Debug, Clone, Serialize)]
pub struct KernelTable {
    pub t_values: Vec<f64>,
    pub x_values: Vec<f64>,
    pub entries: Vec<KernelEntry>,
}

impl KernelTable {
    pub fn row(&self, i: usize) -> &[KernelEntry] {
        let n = self.x_values.len();
        &self.entries[i * n..(i + 1) * n]
    }

    /// Whether every row is nonincreasing in `x` over its finite entries.
    pub fn rows_nonincreasing(&self, rel_slack: f64) -> bool {
        (0..self.t_values.len()).all(|i| {
            let row: Vec<f64> = self.row(i).iter().filter(|e| e.flag == EntryFlag::Ok).map(|e| e.p).collect();
            row.windows(2).all(|w| w[1] <= w[0] * (1.0 + rel_slack))
        })
    }

    pub fn from_entries(t_values: Vec<f64>, x_values: Vec<f64>, entries: Vec<KernelEntry>) -> Self {
        KernelTable { t_values, x_values, entries }
    }
}

fn check_grid(v: &[f64], name: &str, allow_zero: bool) -> Result<()> {
    if v.is_empty() {
        return domain(format!("{name} grid is empty"));
    }
    for w in v.windows(2) {
        if !(w[1] > w[0]) {
            return domain(format!("{name} grid must be strictly increasing"));
        }
    }
    if v[0] < 0.0 || (!allow_zero && v[0] == 0.0) {
        return domain(format!("{name} grid must be positive"));
    }
    Ok(())
}

/// Evaluate `p(t, x)` on the product grid; failures become flagged entries.
pub fn build_kernel_table(sym: &SymbolSpec, t_values: &[f64], x_values: &[f64], cfg: &InversionConfig) -> Result<KernelTable> {
    check_grid(t_values, "t", false)?;
    check_grid(x_values, "x", true)?;
    let mut entries = Vec::with_capacity(t_values.len() * x_values.len());
    for &t in t_values {
        for &x in x_values {
            entries.push(kernel_entry(sym, t, x, cfg));
        }
    }
    Ok(KernelTable::from_entries(t_values.to_vec(), x_values.to_vec(), entries))
}

/// `p(t, 0)` comparison value `t^{1−d/α}/(t − d/α)` for `t > d/α`.
pub fn geometric_stable_origin_envelope(alpha: f64, d: usize, t: f64) -> Option<f64> {
    let q = d as f64 / alpha;
    (t > q).then(|| t.powf(1.0 - q) / (t - q))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    #[test]
    fn stable_closed_forms_at_origin() {
        assert!(close(stable_density(2.0, 1, 1.0, 0.0).unwrap(), 0.282_094_791_773_878_1, 1e-14));
        assert!(close(stable_density(1.0, 2, 1.0, 0.0).unwrap(), 1.0 / (2.0 * PI), 1e-14));
        assert!(close(stable_density_at_origin(1.0, 2), 1.0 / (2.0 * PI), 1e-13));
        assert!(close(stable_density_at_origin(2.0, 3), (4.0 * PI).powf(-1.5), 1e-13));
    }

    #[test]
    fn stable_self_similarity() {
        let (alpha, d) = (1.4, 2);
        for &(t, x) in &[(0.3, 0.7), (2.5, 1.9), (1.7, 0.05)] {
            let lhs = stable_density(alpha, d, t, x).unwrap();
            let rhs = t.powf(-(d as f64) / alpha) * stable_density(alpha, d, 1.0, t.powf(-1.0 / alpha) * x).unwrap();
            assert!(close(lhs, rhs, 1e-10));
        }
    }

    #[test]
    fn stable_series_match_inversion() {
        let (alpha, d) = (1.5, 1);
        let near = stable_near(alpha, d, 0.01);
        let inv = stable_density(alpha, d, 1.0, 0.01).unwrap();
        assert!(close(near, inv, 1e-9), "{near} {inv}");
        let far = stable_far(alpha, d, 200.0);
        let inv = stable_density(alpha, d, 1.0, 200.0).unwrap();
        assert!(close(far, inv, 1e-7), "{far} {inv}");
    }

    #[test]
    fn stable_table_interpolation() {
        for &rho in &[0.013, 0.5, 3.3, 41.0] {
            let a = stable_unit_density(0.8, 2, rho).unwrap();
            let b = stable_density(0.8, 2, 1.0, rho).unwrap();
            assert!(close(a, b, 1e-7), "rho={rho} {a} {b}");
        }
    }

    #[test]
    fn subordination_matches_inversion() {
        let sym = SymbolSpec::geometric_stable(1.0, 1).unwrap();
        let a = geometric_stable_density(1.0, 1, 1.0, 1.0).unwrap().value;
        let b = density_from_symbol(&sym, 1.0, 1.0, &InversionConfig::default()).unwrap().value;
        assert!(close(a, b, 1e-9), "{a} {b}");
        let sym = SymbolSpec::geometric_stable(1.5, 2).unwrap();
        let a = geometric_stable_density(1.5, 2, 0.7, 0.3).unwrap().value;
        let b = density_from_symbol(&sym, 0.7, 0.3, &InversionConfig::default()).unwrap().value;
        assert!(close(a, b, 1e-8), "{a} {b}");
    }

    #[test]
    fn geometric_stable_origin() {
        assert_eq!(geometric_stable_density(1.0, 1, 0.5, 0.0), Err(Error::P0Infinite));
        // t = 2 > d/α = 1: p(2, 0) = s(1,0) Γ(1)/Γ(2) = 1/π
        let v = geometric_stable_density(1.0, 1, 2.0, 0.0).unwrap().value;
        assert!(close(v, 1.0 / PI, 1e-14));
        let sym = SymbolSpec::geometric_stable(1.0, 1).unwrap();
        let w = density_from_symbol(&sym, 2.0, 0.0, &InversionConfig::default()).unwrap().value;
        assert!(close(w, 1.0 / PI, 1e-8), "{w}");
    }

    #[test]
    fn example_values() {
        let (v, r) = example_estimate(Example::Ex1 { d: 1 }, 0.25, 0.5).unwrap();
        assert!(close(v, 0.25, 1e-15));
        assert_eq!(r, ExampleRegime::NearOrigin);
        let ex3 = Example::Ex3 { d: 1, alpha: 1.0 };
        assert_eq!(example_estimate(ex3, 0.7, 3.0).unwrap().1, ExampleRegime::Far);
        let (v, r) = example_estimate(ex3, 0.5, 0.1).unwrap();
        assert_eq!(r, ExampleRegime::NearSubcritical);
        assert!(close(v, 0.5 * (20f64.ln() + 10f64.sqrt()), 1e-14));
        let ex4 = Example::Ex4 { d: 1, alpha: 1.0 };
        assert_eq!(example_estimate(ex4, 50.0, 0.1).unwrap(), (50f64.powi(-2), ExampleRegime::NearHigh));
        assert!(matches!(example_estimate(Example::Ex1 { d: 1 }, 0.5, 2.0), Err(Error::OutOfRegime(_))));
    }

    #[test]
    fn table_rows() {
        let sym = SymbolSpec::stable(1.0, 1).unwrap();
        let xs: Vec<f64> = (0..10).map(|k| 0.1 * 1.5f64.powi(k)).collect();
        let tab = build_kernel_table(&sym, &[0.5, 1.0], &xs, &InversionConfig::default()).unwrap();
        assert!(tab.rows_nonincreasing(0.0));
        let gs = SymbolSpec::geometric_stable(1.0, 1).unwrap();
        let tab = build_kernel_table(&gs, &[0.5], &[0.0, 0.1], &InversionConfig::default()).unwrap();
        assert_eq!(tab.entries[0].flag, EntryFlag::P0Infinite);
        assert!(build_kernel_table(&sym, &[1.0], &[], &InversionConfig::default()).is_err());
    }
}
