//! Grid and list syntax: `lo:hi:Nlog`, `lo:hi:Nlin`, or comma-separated values.

use crate::CliError;

/// Parse a grid or list. The result is checked to be finite and strictly increasing.
pub fn parse_values(s: &str) -> Result<Vec<f64>, CliError> {
    let v = parse_sequence(s)?;
    if v.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(CliError::config(format!("grid '{s}' must be strictly increasing")));
    }
    Ok(v)
}

/// Like [`parse_values`] but keeps the given order.
pub fn parse_sequence(s: &str) -> Result<Vec<f64>, CliError> {
    let s = s.trim();
    let v = if s.contains(':') { parse_grid(s)? } else { parse_list(s)? };
    if v.is_empty() {
        return Err(CliError::config(format!("empty grid '{s}'")));
    }
    Ok(v)
}

fn num(s: &str) -> Result<f64, CliError> {
    let v: f64 = s.trim().parse().map_err(|_| CliError::config(format!("bad number '{s}'")))?;
    if !v.is_finite() {
        return Err(CliError::config(format!("non-finite number '{s}'")));
    }
    Ok(v)
}

fn parse_list(s: &str) -> Result<Vec<f64>, CliError> {
    if s.is_empty() {
        return Ok(vec![]);
    }
    s.split(',').map(num).collect()
}

fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::config(format!("grid '{s}' must look like lo:hi:Nlog or lo:hi:Nlin")));
    }
    let (lo, hi) = (num(parts[0])?, num(parts[1])?);
    let spec = parts[2].trim();
    let (n, log) = if let Some(n) = spec.strip_suffix("log") {
        (n, true)
    } else if let Some(n) = spec.strip_suffix("lin") {
        (n, false)
    } else {
        return Err(CliError::config(format!("grid count '{spec}' needs a log or lin suffix")));
    };
    let n: usize = n.parse().map_err(|_| CliError::config(format!("bad grid count '{spec}'")))?;
    if n == 0 {
        return Ok(vec![]);
    }
    if n == 1 {
        if lo != hi {
            return Err(CliError::config(format!("a one-point grid needs lo == hi in '{s}'")));
        }
        return Ok(vec![lo]);
    }
    if log && !(lo > 0.0 && hi > 0.0) {
        return Err(CliError::config(format!("log grid '{s}' needs positive bounds")));
    }
    Ok((0..n)
        .map(|i| {
            let f = i as f64 / (n - 1) as f64;
            if i == n - 1 {
                hi
            } else if log {
                (lo.ln() + f * (hi / lo).ln()).exp()
            } else {
                lo + f * (hi - lo)
            }
        })
        .collect())
}
