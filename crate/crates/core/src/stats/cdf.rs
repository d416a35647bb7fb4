use serde::Serialize;

use super::StatsError;
use crate::tableio::format_number;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CdfPoint {
    pub value: f64,
    pub probability: f64,
}

/// Empirical CDF with plotting position `i / N` (1-based rank).
///
/// Output is sorted by value. Repeated values collapse to one point carrying
/// the highest rank's probability, so the last point is always at 1.0.
pub fn empirical_cdf(values: &[f64]) -> Result<Vec<CdfPoint>, StatsError> {
    if values.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFiniteInput);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;

    let mut out: Vec<CdfPoint> = Vec::with_capacity(sorted.len());
    for (i, v) in sorted.into_iter().enumerate() {
        let probability = (i + 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last.value == v => last.probability = probability,
            _ => out.push(CdfPoint {
                value: v,
                probability,
            }),
        }
    }
    Ok(out)
}

/// Smallest value whose cumulative probability reaches `p`.
pub fn quantile(cdf: &[CdfPoint], p: f64) -> Option<f64> {
    cdf.iter().find(|pt| pt.probability >= p).map(|pt| pt.value)
}

/// `value,probability` rows with a header line.
pub fn cdf_to_csv(cdf: &[CdfPoint]) -> String {
    let mut out = String::from("value,probability\n");
    for pt in cdf {
        out.push_str(&format_number(pt.value));
        out.push(',');
        out.push_str(&format_number(pt.probability));
        out.push('\n');
    }
    out
}
