use crate::{Error, Result};

fn check_values(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InsufficientData("no values".into()));
    }
    if let Some(bad) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::arg(format!(
            "values must be finite and non-negative, found {bad}"
        )));
    }
    Ok(())
}

/// Complementary cumulative distribution: `(x, P(X >= x))` for every distinct
/// value, largest `x` first.
pub fn ccdf(values: &[f64]) -> Result<Vec<(f64, f64)>> {
    check_values(values)?;
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    let n = sorted.len() as f64;
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (i, &x) in sorted.iter().enumerate() {
        // i + 1 values are >= x once all copies of x are counted.
        match out.last_mut() {
            Some(last) if last.0 == x => last.1 = (i + 1) as f64 / n,
            _ => out.push((x, (i + 1) as f64 / n)),
        }
    }
    Ok(out)
}

/// Continuous maximum-likelihood (Hill) exponent of a power-law density
/// `p(x) ~ x^-alpha` fitted to the values at or above `xmin`.
pub fn tail_exponent(values: &[f64], xmin: f64) -> Result<f64> {
    check_values(values)?;
    if !(xmin > 0.0 && xmin.is_finite()) {
        return Err(Error::arg(format!("xmin must be positive, got {xmin}")));
    }
    let (n, log_sum) = values
        .iter()
        .filter(|&&x| x >= xmin)
        .fold((0usize, 0.0f64), |(n, s), &x| (n + 1, s + (x / xmin).ln()));
    if n < 10 {
        return Err(Error::InsufficientData(format!(
            "{n} samples at or above xmin = {xmin}, need at least 10"
        )));
    }
    if log_sum <= 0.0 {
        return Err(Error::InsufficientData(
            "every tail sample equals xmin".into(),
        ));
    }
    Ok(1.0 + n as f64 / log_sum)
}
