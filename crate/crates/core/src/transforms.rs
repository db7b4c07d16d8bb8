//! Radial Fourier (Hankel) inversion of `e^{-tψ}` and `(λ+ψ)^{-1}`, the
//! Gaussian-weighted Laplace functionals of `|X_t|²`, and the Tauberian ratios
//! built from them.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::quad::{integrate, integrate_doubling, integrate_points, QuadratureResult, Tail, Tol, wynn_best, WYNN_WINDOW};
use crate::special_fn::{bessel_j_unchecked, gamma, ln_gamma, sphere_area, ZeroStream};
use crate::symbols::{Family, SymbolSpec};

/// Series acceleration applied to the Bessel-cell partial sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Acceleration {
    None,
    Euler,
    WynnEps,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct InversionConfig {
    pub rel_tol: f64,
    pub max_zeros: usize,
    pub acceleration: Acceleration,
    /// Radius (in frequency units) below which the integrand is treated as
    /// the non-oscillatory head; `None` means the first Bessel zero over `|x|`.
    pub split_radius: Option<f64>,
    /// Short-circuit families with closed-form densities (Cauchy, Gaussian).
    pub use_closed_forms: bool,
}

impl Default for InversionConfig {
    fn default() -> Self {
        InversionConfig {
            rel_tol: 1e-9,
            max_zeros: 10_000,
            acceleration: Acceleration::WynnEps,
            split_radius: None,
            use_closed_forms: true,
        }
    }
}

impl InversionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol <= 1e-2) {
            return domain(format!("rel_tol must lie in (0, 1e-2], got {}", self.rel_tol));
        }
        if self.max_zeros < 8 {
            return domain("max_zeros must be at least 8");
        }
        Ok(())
    }
}

/// `u^{d/2} J_{d/2-1}(u)`.
fn radial_kernel(d: usize, u: f64) -> f64 {
    match d {
        1 => (2.0 / PI).sqrt() * u.cos(),
        3 => (2.0 / PI).sqrt() * u * u.sin(),
        _ => u.powf(d as f64 / 2.0) * bessel_j_unchecked(d as f64 / 2.0 - 1.0, u),
    }
}

fn sum_window_wynn(sums: &[f64]) -> f64 {
    let start = sums.len().saturating_sub(WYNN_WINDOW);
    wynn_best(&sums[start..]).0
}

fn sum_window_euler(sums: &[f64]) -> f64 {
    // Repeated averaging of consecutive partial sums.
    let k = sums.len().min(24);
    let mut row: Vec<f64> = sums[sums.len() - k..].to_vec();
    while row.len() > 1 {
        row = row.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    }
    row[0]
}

/// `∫_0^∞ g(u) u^{d/2} J_{d/2−1}(u) du`, summed cell by cell between
/// consecutive Bessel zeros with the partial sums accelerated.
///
/// `head_end` is a frequency below which `g` may have structure; cells start
/// at the first zero beyond it. Constants are annihilated (Abel sense), so
/// callers may subtract one from `g` to reduce cancellation.
pub fn hankel_scaled<G: Fn(f64) -> f64>(g: G, d: usize, head_end: f64, cfg: &InversionConfig) -> Result<QuadratureResult> {
    cfg.validate()?;
    if d == 0 {
        return domain("dimension must be at least 1");
    }
    let nu = d as f64 / 2.0 - 1.0;
    let f = |u: f64| g(u) * radial_kernel(d, u);
    let mut zeros = ZeroStream::new(nu);
    let mut z = zeros.next().unwrap_or(PI);
    let mut used = 1;
    while z < head_end && used < cfg.max_zeros {
        z = zeros.next().unwrap_or(z + PI);
        used += 1;
    }
    let tol = Tol::new(0.0, cfg.rel_tol * 1e-2);
    // Head in the logarithmic variable, extended downward until negligible.
    let fy = |y: f64| {
        let u = y.exp();
        f(u) * u
    };
    let top = z.ln();
    let mut head = integrate(&fy, top - 3.0, top, tol);
    let mut lo = top - 3.0;
    let mut small = 0;
    for _ in 0..500 {
        let piece = integrate(&fy, lo - 4.0, lo, tol);
        head = head.plus(piece);
        lo -= 4.0;
        if piece.value.abs() <= cfg.rel_tol * 1e-3 * head.value.abs() || piece.value == 0.0 {
            small += 1;
            if small >= 2 {
                break;
            }
        } else {
            small = 0;
        }
    }
    if small < 2 || !head.value.is_finite() {
        return Err(Error::DivergentHead("integrand is not integrable near the origin".into()));
    }
    let mut sums = vec![head.value];
    let mut acc = head;
    let mut a = z;
    let mut last_est = f64::NAN;
    let mut prev_est = f64::NAN;
    let mut quiet = 0;
    let mut stable = 0;
    let mut cells = 0;
    let mut abs_err = head.abs_err;
    while used < cfg.max_zeros {
        let b = zeros.next().unwrap_or(a + PI);
        used += 1;
        let cell = integrate_points(&f, &[a, b], Tol::new(cfg.rel_tol * 1e-3 * acc.value.abs(), cfg.rel_tol * 1e-2));
        cells += 1;
        abs_err += cell.abs_err;
        acc = acc.plus(cell);
        let s = acc.value;
        sums.push(s);
        a = b;
        // Plain convergence: the cells themselves have become negligible.
        if cell.value.abs() <= 0.1 * cfg.rel_tol * s.abs() {
            quiet += 1;
            if quiet >= 3 {
                let mut out = acc;
                out.abs_err = abs_err + cell.value.abs();
                out.rel_err = out.abs_err / s.abs().max(1e-300);
                out.tail_terms = cells;
                return Ok(out);
            }
        } else {
            quiet = 0;
        }
        if s == 0.0 && cell.value == 0.0 && cells > 3 {
            let mut out = acc;
            out.tail_terms = cells;
            return Ok(out);
        }
        let est = match cfg.acceleration {
            Acceleration::None => s,
            Acceleration::Euler => sum_window_euler(&sums),
            Acceleration::WynnEps => sum_window_wynn(&sums),
        };
        if cells >= 8 && est.is_finite() {
            let tol_abs = cfg.rel_tol * est.abs();
            if (est - last_est).abs() <= tol_abs && (est - prev_est).abs() <= tol_abs {
                stable += 1;
                if stable >= 2 {
                    let spread = (est - last_est).abs().max((est - prev_est).abs());
                    let mut out = QuadratureResult::new(est, spread + abs_err * 1e-2, acc.nodes, true);
                    out.tail_terms = cells;
                    return Ok(out);
                }
            } else {
                stable = 0;
            }
        }
        prev_est = last_est;
        last_est = est;
    }
    let mut out = QuadratureResult::new(last_est, (last_est - prev_est).abs(), acc.nodes, false);
    out.tail_terms = cells;
    Err(Error::NonConverged(format!(
        "Hankel partial sums did not settle within {} zeros (last estimate {:e}, spread {:e})",
        cfg.max_zeros,
        out.value,
        out.abs_err
    )))
}

/// `(2π)^{-d} ∫_{R^d} F(|ξ|) e^{-i⟨ξ,x⟩} dξ` at `|x| = x_norm > 0`.
pub fn hankel_inverse<F: Fn(f64) -> f64>(f: F, d: usize, x_norm: f64, cfg: &InversionConfig) -> Result<QuadratureResult> {
    if !(x_norm > 0.0) {
        return domain(format!("hankel_inverse needs x_norm > 0 (got {x_norm})"));
    }
    let head = cfg.split_radius.map(|s| s * x_norm).unwrap_or(0.0);
    let q = hankel_scaled(|u| f(u / x_norm), d, head, cfg)?;
    Ok(q.scaled((2.0 * PI).powf(-(d as f64) / 2.0) * x_norm.powi(-(d as i32))))
}

/// Closed-form Cauchy density `Γ((d+1)/2) π^{-(d+1)/2} t (t² + x²)^{-(d+1)/2}`.
pub fn cauchy_density(d: usize, t: f64, x: f64) -> f64 {
    let dd = d as f64;
    gamma((dd + 1.0) / 2.0) * PI.powf(-(dd + 1.0) / 2.0) * t * (t * t + x * x).powf(-(dd + 1.0) / 2.0)
}

/// Closed-form Gaussian density for `ψ(u) = u²`: `(4πt)^{-d/2} e^{-x²/4t}`.
pub fn gaussian_density(d: usize, t: f64, x: f64) -> f64 {
    (4.0 * PI * t).powf(-(d as f64) / 2.0) * (-x * x / (4.0 * t)).exp()
}

fn closed_form(sym: &SymbolSpec, t: f64, x: f64) -> Option<f64> {
    match sym.family {
        Family::Stable { alpha } if alpha == 1.0 => Some(cauchy_density(sym.d, t, x)),
        Family::Stable { alpha } if alpha == 2.0 => Some(gaussian_density(sym.d, t, x)),
        Family::Gaussian => Some(gaussian_density(sym.d, t, x)),
        _ => None,
    }
}

/// Frequency where `tψ` reaches `level`, searched on a log scale.
fn psi_level(sym: &SymbolSpec, t: f64, level: f64) -> f64 {
    let (mut lo, mut hi) = (-60.0f64, 60.0f64);
    if t * sym.psi_ln(hi) < level {
        return f64::INFINITY;
    }
    if t * sym.psi_ln(lo) >= level {
        return lo.exp();
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if t * sym.psi_ln(mid) < level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi.exp()
}

/// `p(t, 0) = (2π)^{-d} ω_d ∫_0^∞ s^{d−1} e^{−tψ(s)} ds`, or `P0_INFINITE`.
pub fn density_at_origin(sym: &SymbolSpec, t: f64, cfg: &InversionConfig) -> Result<QuadratureResult> {
    let d = sym.d as i32;
    let f = |s: f64| s.powi(d - 1) * (-t * sym.psi(s)).exp();
    let knee = psi_level(sym, t, 1.0).min(1e6).max(1e-6);
    let head = integrate_points(&f, &[0.0, knee], Tol::new(0.0, cfg.rel_tol * 0.1));
    let tail = match integrate_doubling(&f, knee, Tol::new(0.0, cfg.rel_tol)) {
        Tail::Finite(q) => q,
        Tail::Divergent => return Err(Error::P0Infinite),
    };
    let c = (2.0 * PI).powi(-d) * sphere_area(d as f64);
    Ok(head.plus(tail).scaled(c))
}

/// Transition density `p(t, x)` at `|x| = x_norm`.
pub fn density_from_symbol(sym: &SymbolSpec, t: f64, x_norm: f64, cfg: &InversionConfig) -> Result<QuadratureResult> {
    if !(t > 0.0) {
        return domain(format!("t must be positive (got {t})"));
    }
    if !(x_norm >= 0.0) || !x_norm.is_finite() {
        return domain(format!("x_norm must be finite and nonnegative (got {x_norm})"));
    }
    cfg.validate()?;
    if cfg.use_closed_forms {
        if let Some(v) = closed_form(sym, t, x_norm) {
            return Ok(QuadratureResult::exact(v));
        }
    }
    if x_norm == 0.0 {
        return density_at_origin(sym, t, cfg);
    }
    let ln_x = x_norm.ln();
    let q = density_scaled(sym, t, ln_x, 0.0, cfg)?;
    Ok(q.scaled((2.0 * PI).powf(-(sym.d as f64) / 2.0) * (-(sym.d as f64) * ln_x).exp()))
}

/// `∫ u^{d/2} e^{−t(ψ(u/x) − c)} J_{d/2−1}(u) du` with `x = e^{ln_x}`,
/// i.e. `(2π)^{d/2} x^d e^{tc} p(t, x)`. Stays finite for `|ln x|` far
/// beyond the `f64` range of `x`.
pub fn density_scaled(sym: &SymbolSpec, t: f64, ln_x: f64, c: f64, cfg: &InversionConfig) -> Result<QuadratureResult> {
    let d = sym.d;
    // Frequencies (in u) where e^{-tψ(u/x)} has dropped to one half.
    let u_half = psi_level(sym, t, 2f64.ln()) * ln_x.exp();
    let decays_fast = u_half.is_finite() && u_half < 20.0 && psi_level(sym, t, 40.0) * ln_x.exp() < 1e4;
    let head_end = match cfg.split_radius {
        Some(s) => s * ln_x.exp(),
        None if decays_fast => u_half,
        None => 0.0,
    };
    if decays_fast && c == 0.0 {
        hankel_scaled(|u| (-t * sym.psi_ln(u.ln() - ln_x)).exp(), d, head_end, cfg)
    } else {
        // e^{−t(ψ−c)} − 1: the constant integrates to zero and removing it
        // avoids cancellation when the exponent varies slowly.
        let q = hankel_scaled(|u| (-t * (sym.psi_ln(u.ln() - ln_x) - c)).exp_m1(), d, head_end, cfg)?;
        Ok(q)
    }
}

/// `∫_0^a s^{d−1}/ψ(s) ds` by halving panels; `None` if it diverges.
pub(crate) fn transience_integral(sym: &SymbolSpec, lam: f64) -> Option<f64> {
    let d = sym.d as i32;
    let f = |s: f64| s.powi(d - 1) / (lam + sym.psi(s));
    let mut hi = 1.0f64;
    let mut acc = 0.0;
    let mut prev: Option<f64> = None;
    let mut slow = 0;
    for _ in 0..1000 {
        let lo = hi / 2.0;
        let v = integrate(&f, lo, hi, Tol::new(0.0, 1e-10)).value;
        acc += v;
        if let Some(p) = prev {
            if p > 0.0 && v / p > 1.0 - 1e-3 {
                slow += 1;
                if slow >= 5 {
                    return None;
                }
            } else {
                slow = 0;
                if v <= 1e-14 * acc {
                    return Some(acc);
                }
            }
        }
        prev = Some(v);
        hi = lo;
        if hi < 1e-300 {
            break;
        }
    }
    Some(acc)
}

/// `G^λ(x) = ∫_0^∞ e^{−λt} p(t, x) dt` by inverting `(λ + ψ)^{−1}`.
pub fn resolvent_from_symbol(sym: &SymbolSpec, lam: f64, x_norm: f64, cfg: &InversionConfig) -> Result<QuadratureResult> {
    if !(lam >= 0.0) {
        return domain(format!("lambda must be nonnegative (got {lam})"));
    }
    if !(x_norm > 0.0) {
        return domain(format!("x_norm must be positive (got {x_norm})"));
    }
    if lam == 0.0 && transience_integral(sym, 0.0).is_none() {
        return Err(Error::NotTransient(format!(
            "∫ s^(d-1)/ψ(s) ds diverges at the origin for {} in d={}",
            sym.family.name(),
            sym.d
        )));
    }
    let ln_x = x_norm.ln();
    let q = resolvent_scaled(sym, lam, ln_x, cfg)?;
    Ok(q.scaled((2.0 * PI).powf(-(sym.d as f64) / 2.0) * x_norm.powi(-(sym.d as i32))))
}

/// `∫ u^{d/2} (λ + ψ(u/x))^{−1} J_{d/2−1}(u) du`, `x = e^{ln_x}`.
pub fn resolvent_scaled(sym: &SymbolSpec, lam: f64, ln_x: f64, cfg: &InversionConfig) -> Result<QuadratureResult> {
    let c = 1.0 / (lam + sym.psi_ln(-ln_x));
    let head_end = cfg.split_radius.map(|s| s * ln_x.exp()).unwrap_or(0.0);
    hankel_scaled(|u| 1.0 / (lam + sym.psi_ln(u.ln() - ln_x)) - c, sym.d, head_end, cfg)
}

/// Gaussian-weighted Laplace functional `E e^{−λ|X_t|²}` written through `ψ`:
/// `2^{1−d}/Γ(d/2) ∫_0^∞ e^{−tψ(r√λ)} e^{−r²/4} r^{d−1} dr`.
pub fn laplace_u(sym: &SymbolSpec, t: f64, lam: f64) -> Result<f64> {
    if !(lam > 0.0) || !(t >= 0.0) {
        return domain(format!("laplace_U needs lam > 0, t >= 0 (lam={lam}, t={t})"));
    }
    Ok(laplace_u_ln(sym, t, lam.ln(), 0.0))
}

fn gauss_weight(d: usize) -> f64 {
    (((1 - d as i32) as f64) * 2f64.ln() - ln_gamma(d as f64 / 2.0)).exp()
}

fn gauss_radial_integral<F: Fn(f64) -> f64>(d: usize, f: F) -> f64 {
    let d = d as i32;
    let g = |r: f64| f(r) * (-r * r / 4.0).exp() * r.powi(d - 1);
    let upper = 2.0 * (2.0 * (d as f64) + 80.0).sqrt() + 4.0;
    let mut pts = vec![0.0, 1e-8, 1e-6, 1e-4, 1e-2, 0.1, 0.5, 1.0, 2.0, 4.0];
    let mut r = 6.0;
    while r < upper {
        pts.push(r);
        r += 2.0;
    }
    pts.push(upper);
    integrate_points(g, &pts, Tol::new(1e-300, 1e-13)).value
}

/// `E e^{−λ|X_t|²} · e^{tc}` with `λ = e^{ln_lam}`.
pub fn laplace_u_ln(sym: &SymbolSpec, t: f64, ln_lam: f64, c: f64) -> f64 {
    let h = 0.5 * ln_lam;
    let w = gauss_weight(sym.d);
    w * gauss_radial_integral(sym.d, |r| (-t * (sym.psi_ln(r.ln() + h) - c)).exp())
}

/// `(E e^{−λ|X_t|²} − E e^{−λe^{dl}|X_t|²}) e^{tc}` with `λ = e^{ln_lam}`,
/// from the integrand difference.
pub fn laplace_u_diff_ln(sym: &SymbolSpec, t: f64, ln_lam: f64, dl: f64, c: f64) -> f64 {
    let h = 0.5 * ln_lam;
    let w = gauss_weight(sym.d);
    w * gauss_radial_integral(sym.d, |r| {
        let y = r.ln() + h;
        let a = sym.psi_ln(y);
        let ba = sym.psi_ln_diff(y, 0.5 * dl);
        // e^{−t(a−c)} − e^{−t(b−c)} = e^{−t(a−c)} (1 − e^{−t(b−a)})
        -(-t * (a - c)).exp() * (-t * ba).exp_m1()
    })
}

pub fn laplace_u_diff(sym: &SymbolSpec, t: f64, lam1: f64, lam2: f64) -> Result<f64> {
    if !(lam1 > 0.0 && lam2 > 0.0) {
        return domain("laplace_U differences need positive arguments");
    }
    Ok(laplace_u_diff_ln(sym, t, lam1.ln(), (lam2 / lam1).ln(), 0.0))
}

/// `U_t(r) = P(0 < |X_t|² ≤ r)` by integrating the density over the ball of radius `√r`.
pub fn u_t(sym: &SymbolSpec, t: f64, r: f64, cfg: &InversionConfig) -> Result<f64> {
    moment_of_density(sym, t, r, 0, cfg).map(|v| v * sphere_area(sym.d as f64))
}

/// `Q_t(r) = ∫_0^{√r} u^{d+1} p(t, u) du`.
pub fn q_t(sym: &SymbolSpec, t: f64, r: f64, cfg: &InversionConfig) -> Result<f64> {
    moment_of_density(sym, t, r, 2, cfg)
}

fn moment_of_density(sym: &SymbolSpec, t: f64, r: f64, extra: i32, cfg: &InversionConfig) -> Result<f64> {
    if !(r > 0.0 && t > 0.0) {
        return domain("Q_t/U_t need t > 0 and r > 0");
    }
    let top = r.sqrt().ln();
    let d = sym.d as i32;
    let err = std::cell::Cell::new(None);
    let g = |y: f64| {
        let u = y.exp();
        match density_from_symbol(sym, t, u, cfg) {
            Ok(q) => q.value * u.powi(d + extra),
            Err(e) => {
                err.set(Some(e));
                0.0
            }
        }
    };
    let mut acc = 0.0;
    let mut hi = top;
    let mut small = 0;
    for _ in 0..200 {
        let lo = hi - 3.0;
        let n = 3;
        let pts: Vec<f64> = (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect();
        let v = integrate_points(&g, &pts, Tol::new(0.0, (cfg.rel_tol * 10.0).max(1e-8))).value;
        acc += v;
        if let Some(e) = err.take() {
            return Err(e);
        }
        if v.abs() <= 1e-10 * acc.abs() {
            small += 1;
            if small >= 2 {
                return Ok(acc);
            }
        } else {
            small = 0;
        }
        hi = lo;
    }
    Err(Error::NonConverged("density moment near the origin did not converge".into()))
}

/// Which Tauberian limit a ratio approximates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TauberianRegime {
    /// `tψ(√λ) → 0`.
    Small,
    /// `tψ(√λ) → ∞` with bounded auxiliary function.
    Large,
}

#[derive(Debug, Clone, Serialize)]
pub struct TauberianReport {
    pub regime: TauberianRegime,
    pub t: f64,
    pub ln_lam: f64,
    pub t_psi: f64,
    /// Symmetric log-difference estimate of `−λ ∂_λ E e^{−λ|X_t|²}` over the normaliser.
    pub ratio: f64,
    /// Monotonicity brackets from the difference quotients with ratio `a`.
    pub lower: f64,
    pub upper: f64,
    pub a: f64,
    pub warning: Option<String>,
}

/// `λ L{dQ_t}(λ) / (tℓ(√λ))` (SMALL) or the same divided by `e^{−tψ(√λ)}`
/// (LARGE), where `λ L{dQ_t}(λ) := −λ ∂_λ E e^{−λ|X_t|²}`. The derivative is
/// bracketed by `(L(λ)−L(aλ))/(a−1) ≤ λL{dQ}(λ) ≤ a(L(λ/a)−L(λ))/(a−1)`.
pub fn tauberian_ratio(sym: &SymbolSpec, t: f64, ln_lam: f64, regime: TauberianRegime, a: f64) -> Result<TauberianReport> {
    if !(a > 1.0) {
        return domain("bracket parameter a must exceed 1");
    }
    let ell = sym
        .ell_ln(0.5 * ln_lam)
        .ok_or_else(|| Error::Unsupported(format!("{} has no auxiliary function", sym.family.name())))?;
    let psi = sym.psi_ln(0.5 * ln_lam);
    let tpsi = t * psi;
    let c = if regime == TauberianRegime::Large { psi } else { 0.0 };
    let la = a.ln();
    let norm = t * ell;
    let lower = laplace_u_diff_ln(sym, t, ln_lam, la, c) / (a - 1.0) / norm;
    let upper = a / (a - 1.0) * laplace_u_diff_ln(sym, t, ln_lam - la, la, c) / norm;
    let eps = 0.01f64;
    let mid = laplace_u_diff_ln(sym, t, ln_lam - eps, 2.0 * eps, c) / (2.0 * eps) / norm;
    let warning = match regime {
        TauberianRegime::Small if tpsi > 0.1 => Some(format!("REGIME_MISMATCH: tψ(√λ) = {tpsi:.3e} is not small")),
        TauberianRegime::Large if tpsi < 3.0 => Some(format!("REGIME_MISMATCH: tψ(√λ) = {tpsi:.3e} is not large")),
        _ => None,
    };
    Ok(TauberianReport { regime, t, ln_lam, t_psi: tpsi, ratio: mid, lower, upper, a, warning })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::RadialFunction;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    fn raw() -> InversionConfig {
        InversionConfig { use_closed_forms: false, ..Default::default() }
    }

    #[test]
    fn cauchy_by_inversion() {
        for d in 1..=3 {
            let s = SymbolSpec::stable(1.0, d).unwrap();
            for &(t, x) in &[(1.0, 1.0), (0.5, 0.01), (2.0, 10.0), (0.5, 10.0)] {
                let q = density_from_symbol(&s, t, x, &raw()).unwrap();
                let want = cauchy_density(d, t, x);
                assert!(close(q.value, want, 1e-9), "d={d} t={t} x={x} {} {want}", q.value);
            }
        }
    }

    #[test]
    fn cauchy_origin() {
        let s = SymbolSpec::stable(1.0, 1).unwrap();
        let q = density_from_symbol(&s, 1.0, 0.0, &raw()).unwrap();
        assert!(close(q.value, 1.0 / PI, 1e-9));
    }

    #[test]
    fn gaussian_origin_and_bulk() {
        let g = SymbolSpec::gaussian(2).unwrap();
        assert!(close(density_from_symbol(&g, 1.0, 0.0, &raw()).unwrap().value, 1.0 / (4.0 * PI), 1e-9));
        let g3 = SymbolSpec::gaussian(3).unwrap();
        let v = density_from_symbol(&g3, 1.0, 1.0, &raw()).unwrap().value;
        assert!(close(v, (4.0 * PI).powf(-1.5) * (-0.25f64).exp(), 1e-9));
    }

    #[test]
    fn geometric_stable_origin_infinite() {
        let s = SymbolSpec::geometric_stable(1.0, 1).unwrap();
        assert_eq!(density_from_symbol(&s, 0.5, 0.0, &raw()), Err(Error::P0Infinite));
    }

    #[test]
    fn newtonian_potential() {
        let g = SymbolSpec::gaussian(3).unwrap();
        for &x in &[0.1, 1.0, 7.0] {
            let v = resolvent_from_symbol(&g, 0.0, x, &raw()).unwrap().value;
            assert!(close(v, 1.0 / (4.0 * PI * x), 1e-8), "x={x} {v}");
        }
    }

    #[test]
    fn riesz_potential() {
        let s = SymbolSpec::stable(1.0, 3).unwrap();
        let v = resolvent_from_symbol(&s, 0.0, 1.0, &raw()).unwrap().value;
        assert!(close(v, 1.0 / (2.0 * PI * PI), 1e-8), "{v}");
        assert!(close(v, 0.050_660_591_821_168_88, 1e-8));
        let c = SymbolSpec::stable(1.0, 1).unwrap();
        assert!(matches!(resolvent_from_symbol(&c, 0.0, 1.0, &raw()), Err(Error::NotTransient(_))));
    }

    #[test]
    fn laplace_functional_values() {
        let g = SymbolSpec::gaussian(1).unwrap();
        assert!(close(laplace_u(&g, 0.0, 3.0).unwrap(), 1.0, 1e-12));
        // E e^{−λX²} with X ~ N(0, 2t): (1 + 4λt)^{-1/2}
        assert!(close(laplace_u(&g, 1.0, 1.0).unwrap(), 1.0 / 5f64.sqrt(), 1e-12));
        let s = SymbolSpec::geometric_stable(1.0, 2).unwrap();
        let (a, b) = (laplace_u(&s, 0.3, 2.0).unwrap(), laplace_u(&s, 0.3, 5.0).unwrap());
        assert!(a > b);
        assert!(close(laplace_u_diff(&s, 0.3, 2.0, 5.0).unwrap(), a - b, 1e-10));
    }

    #[test]
    fn custom_symbol_roundtrip() {
        let f = RadialFunction::new(|u: f64| u).monotone(true).unimodal(true);
        let s = SymbolSpec::custom(f, 1).unwrap();
        let v = density_from_symbol(&s, 1.0, 2.0, &raw()).unwrap().value;
        assert!(close(v, 1.0 / (5.0 * PI), 1e-9));
    }
}
