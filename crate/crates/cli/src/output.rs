//! CSV formatting and SVG plots.

use std::fmt::Write as _;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt17(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt17).unwrap_or_default()
}

pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut buf = header.join(",");
        buf.push('\n');
        Csv { buf }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.buf.push_str(&fields.join(","));
        self.buf.push('\n');
    }

    pub fn finish(self) -> String {
        self.buf
    }
}

/// Self-contained line plot on log10 axes. `pts` are already `(log10 x, log10 y)`;
/// non-finite points are dropped.
pub fn svg_log10(title: &str, x_label: &str, y_label: &str, pts: &[(f64, f64)]) -> String {
    let pts: Vec<(f64, f64)> = pts.iter().copied().filter(|(x, y)| x.is_finite() && y.is_finite()).collect();
    let (w, h, m) = (640.0, 420.0, 60.0);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle">{}</text>"#, w / 2.0, escape(title));
    if pts.is_empty() {
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">no plottable points</text>"#, w / 2.0, h / 2.0);
        s.push_str("</svg>\n");
        return s;
    }
    let span = |v: &mut dyn Iterator<Item = f64>| {
        let (lo, hi) = v.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
        let (lo, hi) = (lo.floor(), hi.ceil());
        if hi > lo { (lo, hi) } else { (lo - 1.0, hi + 1.0) }
    };
    let (x0, x1) = span(&mut pts.iter().map(|p| p.0));
    let (y0, y1) = span(&mut pts.iter().map(|p| p.1));
    let px = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
    let py = |y: f64| h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m);
    let _ = writeln!(
        s,
        r#"<path d="M{m} {} H{} M{m} {} V{m}" stroke="black" fill="none"/>"#,
        h - m,
        w - m,
        h - m
    );
    let mut e = x0;
    while e <= x1 {
        let _ = writeln!(
            s,
            r#"<line x1="{0:.2}" y1="{1}" x2="{0:.2}" y2="{2}" stroke="black"/><text x="{0:.2}" y="{3}" text-anchor="middle">1e{4}</text>"#,
            px(e),
            h - m,
            h - m + 5.0,
            h - m + 18.0,
            e as i64
        );
        e += 1.0;
    }
    let mut e = y0;
    while e <= y1 {
        let _ = writeln!(
            s,
            r#"<line x1="{0}" y1="{1:.2}" x2="{2}" y2="{1:.2}" stroke="black"/><text x="{3}" y="{4:.2}" text-anchor="end">1e{5}</text>"#,
            m - 5.0,
            py(e),
            m,
            m - 8.0,
            py(e) + 4.0,
            e as i64
        );
        e += 1.0;
    }
    let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
    let _ = writeln!(s, r#"<polyline points="{}" stroke="steelblue" stroke-width="2" fill="none"/>"#, path.join(" "));
    for &(x, y) in &pts {
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="steelblue"/>"#, px(x), py(y));
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, w / 2.0, h - 15.0, escape(x_label));
    let _ = writeln!(
        s,
        r#"<text x="15" y="{0}" text-anchor="middle" transform="rotate(-90 15 {0})">{1}</text>"#,
        h / 2.0,
        escape(y_label)
    );
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        for v in [0.1, 1.0 / 3.0, 1e-300, 6.02214076e23, -2.5] {
            assert_eq!(fmt17(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt17(f64::INFINITY), "inf");
    }

    #[test]
    fn svg_is_closed() {
        let s = svg_log10("t", "x", "y", &[(0.0, -1.0), (1.0, -2.0), (f64::NEG_INFINITY, 0.0)]);
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
        assert!(!s.contains("href"));
    }
}
