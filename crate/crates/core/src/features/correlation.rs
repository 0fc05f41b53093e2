//! Pearson-based removal of redundant features.

use std::cmp::Ordering;

use crate::error::{Error, Result};

/// Pearson correlation of two equally long columns; `None` when either
/// column is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

fn constant(col: &[f64]) -> bool {
    col.iter().all(|&v| v == col[0])
}

fn row_order(a: &Vec<f64>, b: &Vec<f64>) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Indices of the features that survive: walking features in order, every
/// later feature with `|r| >= threshold` against a kept one is dropped.
/// Constant columns are always kept.
pub fn filter_correlated(rows: &[Vec<f64>], threshold: f64) -> Result<Vec<usize>> {
    if rows.len() < 3 {
        return Err(Error::invalid("correlation filter needs at least three rows"));
    }
    let width = rows[0].len();
    if let Some(r) = rows.iter().find(|r| r.len() != width) {
        return Err(Error::LayoutMismatch {
            expected: width,
            actual: r.len(),
        });
    }
    // A canonical row order makes the float sums, and so the result,
    // independent of input order.
    let mut sorted: Vec<&Vec<f64>> = rows.iter().collect();
    sorted.sort_by(|a, b| row_order(a, b));
    let cols: Vec<Vec<f64>> = (0..width).map(|j| sorted.iter().map(|r| r[j]).collect()).collect();
    let flat: Vec<bool> = cols.iter().map(|c| constant(c)).collect();

    let mut dropped = vec![false; width];
    for i in 0..width {
        if dropped[i] || flat[i] {
            continue;
        }
        for j in i + 1..width {
            if dropped[j] || flat[j] {
                continue;
            }
            if pearson(&cols[i], &cols[j]).is_some_and(|r| r.abs() >= threshold) {
                dropped[j] = true;
            }
        }
    }
    Ok((0..width).filter(|&j| !dropped[j]).collect())
}
