//! ℓp norms, best k-term approximation and supports.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::IndexSet;

/// Best k-term approximation of a signal in some ℓp norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KTermApprox {
    pub k: usize,
    /// `β_k(x)`: `x` on `kept`, zero elsewhere.
    pub approx: Vec<f64>,
    /// `σ_k(x)_p = ‖x − β_k(x)‖_p`.
    pub error_p: f64,
    pub kept: IndexSet,
}

fn check_exponent(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        Err(Error::UnsupportedExponent(p))
    } else {
        Ok(())
    }
}

pub(crate) fn check_finite(x: &[f64], what: &str) -> Result<()> {
    match x.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::contract(format!("{what} entry {i} is not finite"))),
        None => Ok(()),
    }
}

/// `‖x‖_p` for `p >= 1`; pass `f64::INFINITY` for the max norm.
pub fn lp_norm(x: &[f64], p: f64) -> Result<f64> {
    check_exponent(p)?;
    Ok(lp_norm_unchecked(x, p))
}

pub(crate) fn lp_norm_unchecked(x: &[f64], p: f64) -> f64 {
    let max = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max == 0.0 || p.is_infinite() {
        return max;
    }
    if p == 1.0 {
        return x.iter().map(|v| v.abs()).sum();
    }
    // Scale by the largest magnitude so large p cannot overflow.
    let sum: f64 = x.iter().map(|v| (v.abs() / max).powf(p)).sum();
    max * sum.powf(1.0 / p)
}

/// Indices of the `k` largest magnitudes, ties broken toward the lower index,
/// returned in ascending index order.
pub fn largest_indices(x: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&i, &j| x[j].abs().total_cmp(&x[i].abs()).then(i.cmp(&j)));
    order.truncate(k);
    order.sort_unstable();
    order
}

/// Keeps the `k` largest-magnitude entries of `x`.
pub fn best_k_term(x: &[f64], k: usize, p: f64) -> Result<KTermApprox> {
    check_exponent(p)?;
    check_finite(x, "signal")?;
    if k > x.len() {
        return Err(Error::contract(format!(
            "k = {k} exceeds signal length {}",
            x.len()
        )));
    }
    let kept = largest_indices(x, k);
    let mut approx = vec![0.0; x.len()];
    let mut tail = x.to_vec();
    for &i in &kept {
        approx[i] = x[i];
        tail[i] = 0.0;
    }
    Ok(KTermApprox {
        k,
        approx,
        error_p: lp_norm_unchecked(&tail, p),
        kept: IndexSet::new(kept, x.len())?,
    })
}

/// `σ_k(x)_p`.
pub fn sigma_k(x: &[f64], k: usize, p: f64) -> Result<f64> {
    best_k_term(x, k, p).map(|a| a.error_p)
}

/// Indices with `|x_i| > tol`.
pub fn support(x: &[f64], tol: f64) -> IndexSet {
    let idx = x
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() > tol)
        .map(|(i, _)| i)
        .collect();
    IndexSet::new(idx, x.len()).expect("indices are increasing and in range")
}
