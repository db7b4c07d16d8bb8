//! Quadrature building blocks: a 21-point Gauss–Kronrod rule, a globally
//! adaptive integrator on finite intervals, helpers for half-lines, and the
//! Wynn epsilon extrapolation table used for oscillatory tails.

use serde::Serialize;

/// Value plus error bookkeeping for any numerical integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub abs_err: f64,
    pub rel_err: f64,
    pub nodes: usize,
    pub converged: bool,
    /// Number of Bessel-zero cells consumed (zero for non-oscillatory integrals).
    pub tail_terms: usize,
}

impl QuadratureResult {
    pub fn exact(value: f64) -> Self {
        QuadratureResult {
            value,
            abs_err: 0.0,
            rel_err: 0.0,
            nodes: 0,
            converged: true,
            tail_terms: 0,
        }
    }

    pub(crate) fn new(value: f64, abs_err: f64, nodes: usize, converged: bool) -> Self {
        let rel_err = if value != 0.0 { abs_err / value.abs() } else { abs_err };
        QuadratureResult {
            value,
            abs_err,
            rel_err,
            nodes,
            converged,
            tail_terms: 0,
        }
    }

    /// Multiply value and absolute error by a constant factor.
    pub fn scaled(mut self, c: f64) -> Self {
        self.value *= c;
        self.abs_err *= c.abs();
        self
    }

    /// Combine two independent pieces of a split integral.
    pub fn plus(self, other: QuadratureResult) -> Self {
        let mut r = QuadratureResult::new(
            self.value + other.value,
            self.abs_err + other.abs_err,
            self.nodes + other.nodes,
            self.converged && other.converged,
        );
        r.tail_terms = self.tail_terms + other.tail_terms;
        r
    }
}

/// Absolute and relative tolerance pair.
#[derive(Debug, Clone, Copy)]
pub struct Tol {
    pub abs: f64,
    pub rel: f64,
}

impl Tol {
    pub fn rel(rel: f64) -> Self {
        Tol { abs: 0.0, rel }
    }
    pub fn new(abs: f64, rel: f64) -> Self {
        Tol { abs, rel }
    }
    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// One 21-point Gauss–Kronrod panel. Returns (kronrod value, error estimate).
pub fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = WGK[10] * fc;
    let mut rg = 0.0;
    let mut resabs = rk.abs();
    let mut fv = [0.0f64; 20];
    for j in 0..10 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        fv[2 * j] = f1;
        fv[2 * j + 1] = f2;
        rk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            rg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * rk;
    let mut resasc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        resasc += WGK[j] * ((fv[2 * j] - mean).abs() + (fv[2 * j + 1] - mean).abs());
    }
    let result = rk * h;
    let resabs = resabs * h.abs();
    let resasc = resasc * h.abs();
    let mut err = ((rk - rg) * h).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (result, err)
}

const MAX_PANELS: usize = 4000;

/// Globally adaptive Gauss–Kronrod integration of `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tol) -> QuadratureResult {
    integrate_points(f, &[a, b], tol)
}

/// Adaptive integration over `[pts[0], pts[last]]` with forced breakpoints.
pub fn integrate_points<F: Fn(f64) -> f64>(f: F, pts: &[f64], tol: Tol) -> QuadratureResult {
    let mut panels: Vec<(f64, f64, f64, f64)> = Vec::with_capacity(64);
    for w in pts.windows(2) {
        if w[1] != w[0] {
            let (v, e) = gk21(&f, w[0], w[1]);
            panels.push((w[0], w[1], v, e));
        }
    }
    let mut nodes = 21 * panels.len();
    loop {
        let total: f64 = panels.iter().map(|p| p.2).sum();
        let err: f64 = panels.iter().map(|p| p.3).sum();
        if err <= tol.target(total) || !err.is_finite() && !total.is_finite() {
            return QuadratureResult::new(total, err, nodes, err.is_finite());
        }
        if panels.len() >= MAX_PANELS {
            return QuadratureResult::new(total, err, nodes, false);
        }
        let (imax, _) = panels
            .iter()
            .enumerate()
            .fold((0usize, -1.0f64), |acc, (i, p)| if p.3 > acc.1 { (i, p.3) } else { acc });
        let (a, b, _, _) = panels[imax];
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            return QuadratureResult::new(total, err, nodes, false);
        }
        let (v1, e1) = gk21(&f, a, m);
        let (v2, e2) = gk21(&f, m, b);
        nodes += 42;
        panels[imax] = (a, m, v1, e1);
        panels.push((m, b, v2, e2));
    }
}

/// Integrate over `[a, b]` with `0 < a < b` in the variable `y = ln x`.
/// Suited to integrands spread over many decades.
pub fn integrate_log<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tol) -> QuadratureResult {
    debug_assert!(a > 0.0 && b > a);
    let (la, lb) = (a.ln(), b.ln());
    let n = ((lb - la) / 2.0).ceil().max(1.0) as usize;
    let pts: Vec<f64> = (0..=n).map(|k| la + (lb - la) * k as f64 / n as f64).collect();
    integrate_points(
        |y| {
            let x = y.exp();
            f(x) * x
        },
        &pts,
        tol,
    )
}

/// Outcome of a half-line integral computed by interval doubling.
#[derive(Debug, Clone, Copy)]
pub enum Tail {
    Finite(QuadratureResult),
    Divergent,
}

/// Integrate a non-negative `f` over `[a, ∞)` (`a > 0`) by doubling the upper
/// limit. Divergence is declared when the ratio of consecutive increments
/// stays above `1 − 1e−3` for five doublings in a row.
pub fn integrate_doubling<F: Fn(f64) -> f64>(f: F, a: f64, tol: Tol) -> Tail {
    let mut lo = a;
    let mut acc = QuadratureResult::exact(0.0);
    let mut prev: Option<f64> = None;
    let mut slow = 0;
    for _ in 0..2000 {
        let hi = 2.0 * lo;
        let inc = integrate_log(&f, lo, hi, Tol::new(tol.abs * 1e-3, tol.rel * 0.1));
        acc = acc.plus(inc);
        let v = inc.value;
        if let Some(p) = prev {
            let ratio = if p > 0.0 { v / p } else { 0.0 };
            if ratio > 1.0 - 1e-3 {
                slow += 1;
                if slow >= 5 {
                    return Tail::Divergent;
                }
            } else {
                slow = 0;
                if ratio < 1.0 {
                    let rest = v * ratio / (1.0 - ratio);
                    if rest.abs() <= tol.target(acc.value) * 0.1 {
                        let mut out = acc;
                        out.value += rest;
                        out.abs_err += rest.abs() * 0.1;
                        return Tail::Finite(out);
                    }
                }
            }
        }
        if v == 0.0 && acc.value != 0.0 {
            return Tail::Finite(acc);
        }
        prev = Some(v);
        lo = hi;
        if !lo.is_finite() {
            break;
        }
    }
    if acc.value.is_finite() {
        Tail::Finite(QuadratureResult { converged: false, ..acc })
    } else {
        Tail::Divergent
    }
}

/// Wynn's epsilon algorithm on a stream of partial sums.
///
/// The full table is rebuilt over the last [`WYNN_WINDOW`] sums and the even
/// column whose last two entries agree best is returned. Higher columns of a
/// sequence that is already (nearly) exactly extrapolated are rounding noise.
#[derive(Debug, Clone, Default)]
pub struct WynnEpsilon {
    sums: Vec<f64>,
    history: Vec<f64>,
}

pub const WYNN_WINDOW: usize = 48;

/// Best epsilon-table estimate of the limit of `sums` and its error proxy.
pub fn wynn_best(sums: &[f64]) -> (f64, f64) {
    let n = sums.len();
    match n {
        0 => return (f64::NAN, f64::INFINITY),
        1 => return (sums[0], f64::INFINITY),
        _ => {}
    }
    let scale = sums.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut best = (sums[n - 1], (sums[n - 1] - sums[n - 2]).abs());
    // prev = column k−1, cur = column k; column −1 is zero.
    let mut prev = vec![0.0; n + 1];
    let mut cur = sums.to_vec();
    let mut k = 0;
    while cur.len() >= 3 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for j in 0..cur.len() - 1 {
            let diff = cur[j + 1] - cur[j];
            if diff == 0.0 || !diff.is_finite() {
                break;
            }
            next.push(prev[j + 1] + 1.0 / diff);
        }
        if next.len() < cur.len() - 1 {
            break;
        }
        k += 1;
        prev = cur;
        cur = next;
        if k % 2 == 0 && cur.len() >= 2 {
            let m = cur.len();
            let e = cur[m - 1];
            if !e.is_finite() || e.abs() > 1e6 * scale.max(1e-300) {
                break;
            }
            let err = (e - cur[m - 2]).abs();
            if err < best.1 {
                best = (e, err);
            }
        }
    }
    best
}

impl WynnEpsilon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Feed the next partial sum and return the current extrapolated limit.
    pub fn push(&mut self, s: f64) -> f64 {
        self.sums.push(s);
        let start = self.sums.len().saturating_sub(WYNN_WINDOW);
        let (est, _) = wynn_best(&self.sums[start..]);
        self.history.push(est);
        est
    }

    pub fn len(&self) -> usize {
        self.history.len()
    }

    pub fn is_empty(&self) -> bool {
        self.history.is_empty()
    }

    /// Spread of the last three estimates, used as an error proxy.
    pub fn spread(&self) -> f64 {
        let h = &self.history;
        if h.len() < 3 {
            return f64::INFINITY;
        }
        let k = h.len();
        (h[k - 1] - h[k - 2]).abs().max((h[k - 1] - h[k - 3]).abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gk21_is_exact_for_polynomials() {
        let (v, _) = gk21(&|x: f64| x.powi(20) + 3.0 * x * x, 0.0, 1.0);
        assert!((v - (1.0 / 21.0 + 1.0)).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let r = integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, Tol::rel(1e-10));
        assert!((r.value - 2.0).abs() < 1e-8, "{:?}", r);
    }

    #[test]
    fn log_variable_integral() {
        let r = integrate_log(|x: f64| 1.0 / x, 1e-8, 1e8, Tol::rel(1e-12));
        assert!((r.value - 16.0 * 10f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn doubling_detects_divergence() {
        assert!(matches!(integrate_doubling(|x: f64| 1.0 / x, 1.0, Tol::rel(1e-10)), Tail::Divergent));
        match integrate_doubling(|x: f64| x.powf(-2.5), 1.0, Tol::rel(1e-10)) {
            Tail::Finite(r) => assert!((r.value - 1.0 / 1.5).abs() < 1e-8, "{:?}", r),
            Tail::Divergent => panic!("convergent tail flagged divergent"),
        }
    }

    #[test]
    fn wynn_sums_alternating_harmonic() {
        let mut w = WynnEpsilon::new();
        let mut s = 0.0;
        let mut est = 0.0;
        for k in 1..=20 {
            s += if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
            est = w.push(s);
        }
        assert!((est - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn wynn_abel_sums_divergent_alternating() {
        // 1 - 2 + 3 - 4 + ... = 1/4 in the Abel sense.
        let mut w = WynnEpsilon::new();
        let mut s = 0.0;
        let mut est = 0.0;
        for k in 1..=12 {
            s += if k % 2 == 1 { k as f64 } else { -(k as f64) };
            est = w.push(s);
        }
        assert!((est - 0.25).abs() < 1e-12);
    }
}
