//! Rank correlation and ranking-quality metrics.
//!
//! Spearman uses fractional (average) ranks for ties, Kendall is the
//! tie-corrected tau-b, and NDCG uses linear gain with a `log2(rank + 1)`
//! discount. All three depend on the predicted scores only through their
//! order, so any strictly increasing transform leaves them unchanged.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::ranking::descending_order;

fn check_pair(x: &[f64], y: &[f64], min_len: usize) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < min_len {
        return Err(Error::TooFewObservations {
            needed: min_len,
            found: x.len(),
        });
    }
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(Error::InvalidParameter("NaN in input"));
    }
    Ok(())
}

/// 1-based ranks in ascending value order; tied values share the mean of
/// the positions they span.
pub fn fractional_ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && values[idx[end]] == values[idx[start]] {
            end += 1;
        }
        // positions start+1 ..= end
        let avg = (start + 1 + end) as f64 / 2.0;
        for &i in &idx[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation);
    }
    Ok((sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0))
}

/// Spearman's rank correlation coefficient.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y, 2)?;
    pearson(&fractional_ranks(x), &fractional_ranks(y))
}

/// Kendall's tau-b.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y, 2)?;
    let n = x.len();
    let (mut concordant, mut discordant) = (0i64, 0i64);
    let (mut tied_x, mut tied_y) = (0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let dx = x[i].total_cmp(&x[j]) as i8;
            let dy = y[i].total_cmp(&y[j]) as i8;
            if x[i] == x[j] {
                tied_x += 1;
            }
            if y[i] == y[j] {
                tied_y += 1;
            }
            if x[i] != x[j] && y[i] != y[j] {
                if dx == dy {
                    concordant += 1;
                } else {
                    discordant += 1;
                }
            }
        }
    }
    let pairs = (n * (n - 1) / 2) as i64;
    let denom = ((pairs - tied_x) * (pairs - tied_y)) as f64;
    if denom == 0.0 {
        return Err(Error::UndefinedCorrelation);
    }
    Ok(((concordant - discordant) as f64 / libm::sqrt(denom)).clamp(-1.0, 1.0))
}

fn dcg<I: IntoIterator<Item = f64>>(gains: I) -> f64 {
    gains
        .into_iter()
        .enumerate()
        .map(|(k, g)| g / libm::log2(k as f64 + 2.0))
        .sum()
}

/// Normalized discounted cumulative gain of the ordering induced by
/// `predicted` (descending, ties by ascending index) against `relevance`.
///
/// When every relevance is zero the ideal DCG is zero and the result is
/// defined as 1.0. Unlike the correlations, the arguments are not
/// interchangeable.
pub fn ndcg(predicted: &[f64], relevance: &[f64]) -> Result<f64> {
    check_pair(predicted, relevance, 1)?;
    if relevance.iter().any(|&r| r < 0.0) {
        return Err(Error::InvalidParameter("relevance must be non-negative"));
    }
    let actual = dcg(descending_order(predicted)
        .into_iter()
        .map(|i| relevance[i]));
    let mut ideal_rel = relevance.to_vec();
    ideal_rel.sort_by(|a, b| b.total_cmp(a));
    let ideal = dcg(ideal_rel);
    if ideal == 0.0 {
        return Ok(1.0);
    }
    Ok((actual / ideal).clamp(0.0, 1.0))
}
