//! Error-bound constants for OMP and checkers that evaluate each inequality
//! on concrete instances.
//!
//! With `α = ⌈16 + 15δ⌉` the decoder `OMP_{2(α−1)k}` satisfies, under the
//! RIP premise `δ_k + (1+δ)δ_{αk} ≤ δ` and `RIP(L, δ)` with
//! `L = k(N/k)^{2−2/p}`,
//!
//! ```text
//! ‖x* − x‖_q ≤ C0 σ_k(x)_p / k^{1/p−1/q} + C1 k^{1/q−1/2} ε
//! ```
//!
//! for `1 ≤ p ≤ q ≤ 2`, `p ≠ 2`. The ℓ2 case holds in probability for
//! `OMP_{(α−1)k}` with constant `C3`. Every verifier returns a
//! [`BoundReport`] rather than asserting, and carries the premise status.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, DenseMatrix, IndexSet};
use crate::omp::{omp_decode, OmpOptions};
use crate::report::{BoundReport, PremiseStatus};
use crate::sensing::{check_rip_order, check_rip_premise, PremiseOptions};
use crate::signal::{best_k_term, lp_norm, sigma_k, support};

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta <= 1.0 {
        Ok(())
    } else {
        Err(Error::contract(format!(
            "δ must lie in (0, 1], got {delta}"
        )))
    }
}

/// `⌈16 + 15δ⌉`.
///
/// Values within `1e-12` (relative) of an integer are taken to be that
/// integer, so `δ = 1/15` maps to 17 despite rounding in `15·(1/15)`.
pub fn alpha_of(delta: f64) -> Result<u32> {
    check_delta(delta)?;
    let v = 16.0 + 15.0 * delta;
    let nearest = v.round();
    let a = if (v - nearest).abs() <= 1e-12 * v {
        nearest
    } else {
        v.ceil()
    };
    Ok(a as u32)
}

/// RIP order `L = k(N/k)^{2−2/p}`, rounded up and clamped to `[k, N]`.
pub fn rip_order_l(cols: usize, k: usize, p: f64) -> usize {
    let raw = k as f64 * (cols as f64 / k as f64).powf(2.0 - 2.0 / p);
    let nearest = raw.round();
    let l = if (raw - nearest).abs() <= 1e-9 * raw.max(1.0) {
        nearest
    } else {
        raw.ceil()
    };
    (l as usize).clamp(k, cols.max(k))
}

/// The closed-form constants for a given `δ` and `q`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremConstants {
    pub delta: f64,
    pub alpha: u32,
    pub q: f64,
    #[serde(rename = "C0")]
    pub c0: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
    /// Only available when a boundedness constant is supplied.
    #[serde(rename = "C3")]
    pub c3: Option<f64>,
}

/// `C0`, `C1` (for exponent `q`), `C2`, and `C3` when `c_bound` is given.
pub fn constants(delta: f64, q: f64, c_bound: Option<f64>) -> Result<TheoremConstants> {
    let alpha = alpha_of(delta)?;
    if !(1.0..=2.0).contains(&q) {
        return Err(Error::contract(format!("q must lie in [1, 2], got {q}")));
    }
    if let Some(c) = c_bound {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::contract(format!(
                "boundedness constant must be positive, got {c}"
            )));
        }
    }
    let root = (11.0 + 20.0 * delta).sqrt();
    let inflation = (2.0 * alpha as f64).powf(1.0 / q - 0.5);
    let c_prime = 2.0 * (1.0 + delta) * (root + 1.0) + 1.0;
    let c1 = inflation * c_prime;
    let c0 = 1.0 + c1 + inflation;
    let c2 = 2.0 * (1.0 + delta) * (root + 1.0) + 3.0;
    let c3 = c_bound.map(|c| 1.0 + (c * (1.0 + delta)).sqrt() * (1.0 + root));
    Ok(TheoremConstants {
        delta,
        alpha,
        q,
        c0,
        c1,
        c2,
        c3,
    })
}

fn check_pq(p: f64, q: f64) -> Result<()> {
    if !(1.0 <= p && p <= q && q <= 2.0) {
        return Err(Error::contract(format!(
            "need 1 <= p <= q <= 2, got p = {p}, q = {q}"
        )));
    }
    if p == 2.0 {
        return Err(Error::ExcludedCase(
            "(p, q) = (2, 2) has no deterministic bound; use the ℓ2 in-probability check".into(),
        ));
    }
    Ok(())
}

/// `C0 σ_k(x)_p / k^{1/p−1/q} + C1 k^{1/q−1/2} ε`.
pub fn theorem1_rhs(x: &[f64], k: usize, p: f64, q: f64, epsilon: f64, delta: f64) -> Result<f64> {
    check_pq(p, q)?;
    if k == 0 {
        return Err(Error::contract("k must be at least 1"));
    }
    if !(epsilon >= 0.0) {
        return Err(Error::contract(format!(
            "ε must be nonnegative, got {epsilon}"
        )));
    }
    let c = constants(delta, q, None)?;
    let kf = k as f64;
    let sigma = sigma_k(x, k.min(x.len()), p)?;
    Ok(c.c0 * sigma / kf.powf(1.0 / p - 1.0 / q) + c.c1 * kf.powf(1.0 / q - 0.5) * epsilon)
}

/// Checks both RIP conditions assumed by the `(q, p)` bound: `RIP(L, δ)` and
/// `δ_k + (1+δ)δ_{αk} ≤ δ`. Returns the combined status and both reports.
pub fn theorem1_premise(
    phi: &DenseMatrix,
    k: usize,
    p: f64,
    delta: f64,
    opts: &PremiseOptions,
) -> Result<(PremiseStatus, Vec<BoundReport>)> {
    let order_l = rip_order_l(phi.cols(), k, p);
    let rip_l = check_rip_order(phi, order_l, delta, opts)?;
    let compound = check_rip_premise(phi, k, delta, opts)?;
    let status = PremiseStatus::all([&rip_l, &compound].iter().filter_map(|r| r.premise_status));
    Ok((status, vec![rip_l, compound]))
}

/// Decodes `y = Φx + e` with `OMP_{2(α−1)k}` and compares `‖x* − x‖_q`
/// with [`theorem1_rhs`] at `ε = ‖e‖₂`.
#[allow(clippy::too_many_arguments)]
pub fn verify_theorem1(
    phi: &DenseMatrix,
    x: &[f64],
    e: &[f64],
    k: usize,
    p: f64,
    q: f64,
    delta: f64,
    premise: PremiseStatus,
) -> Result<BoundReport> {
    check_pq(p, q)?;
    let alpha = alpha_of(delta)?;
    if k == 0 {
        return Err(Error::contract("k must be at least 1"));
    }
    let iterations = 2 * (alpha as usize - 1) * k;
    if iterations > phi.cols() {
        return Err(Error::IterationBudget {
            iterations,
            cols: phi.cols(),
        });
    }
    if e.len() != phi.rows() {
        return Err(Error::Dimension {
            expected: phi.rows(),
            actual: e.len(),
            context: "noise length must equal row count",
        });
    }
    let y = linalg::add(&phi.matvec(x)?, e);
    let result = omp_decode(phi, &y, &OmpOptions::new(iterations))?;
    let epsilon = linalg::norm2(e);
    let lhs = lp_norm(&linalg::sub(&result.estimate, x), q)?;
    let rhs = theorem1_rhs(x, k, p, q, epsilon, delta)?;
    Ok(BoundReport::new("theorem1", lhs, rhs)
        .with_premise(premise)
        .with("k", k)
        .with("p", p)
        .with("q", q)
        .with("delta", delta)
        .with("alpha", alpha)
        .with("epsilon", epsilon)
        .with("rip_order_l", rip_order_l(phi.cols(), k, p))
        .with("sigma_k_p", sigma_k(x, k, p)?)
        .with("iterations", iterations)
        .with("iterations_run", result.iterations_run)
        .with("stopped_early", result.stopped_early))
}

/// Decodes `y = Φx` with `OMP_{(α−1)k}` and compares `‖x* − x‖₂` with
/// `C3 σ_k(x)₂`. The context records whether the boundedness event
/// `‖Φ(x − β_k(x))‖₂² ≤ C‖x − β_k(x)‖₂²` occurred for this draw.
pub fn verify_theorem2(
    phi: &DenseMatrix,
    x: &[f64],
    k: usize,
    delta: f64,
    c_bound: f64,
    premise: PremiseStatus,
) -> Result<BoundReport> {
    let c = constants(delta, 2.0, Some(c_bound))?;
    if k == 0 {
        return Err(Error::contract("k must be at least 1"));
    }
    let iterations = (c.alpha as usize - 1) * k;
    if iterations > phi.cols() {
        return Err(Error::IterationBudget {
            iterations,
            cols: phi.cols(),
        });
    }
    let y = phi.matvec(x)?;
    let result = omp_decode(phi, &y, &OmpOptions::new(iterations))?;
    let best = best_k_term(x, k, 2.0)?;
    let tail = linalg::sub(x, &best.approx);
    let tail_image = phi.matvec(&tail)?;
    let bounded = linalg::dot(&tail_image, &tail_image) <= c_bound * linalg::dot(&tail, &tail);
    let lhs = linalg::norm2(&linalg::sub(&result.estimate, x));
    let c3 = c.c3.expect("boundedness constant supplied");
    Ok(BoundReport::new("theorem2", lhs, c3 * best.error_p)
        .with_premise(premise)
        .with("k", k)
        .with("delta", delta)
        .with("alpha", c.alpha)
        .with("c_bound", c_bound)
        .with("C3", c3)
        .with("sigma_k_2", best.error_p)
        .with("bounded_event", bounded)
        .with("iterations", iterations)
        .with("iterations_run", result.iterations_run)
        .with("stopped_early", result.stopped_early))
}

/// Runs `OMP_s` with `s = (α−1)‖x̄‖₀` on `y` and compares
/// `‖Φx* − y‖₂²` with `(11+20δ)‖Φx̄ − y‖₂²`.
pub fn verify_zhang(
    phi: &DenseMatrix,
    y: &[f64],
    reference: &[f64],
    delta: f64,
    premise_opts: &PremiseOptions,
) -> Result<BoundReport> {
    let alpha = alpha_of(delta)?;
    if reference.len() != phi.cols() {
        return Err(Error::Dimension {
            expected: phi.cols(),
            actual: reference.len(),
            context: "reference signal length must equal column count",
        });
    }
    let sparsity = support(reference, 0.0).len();
    if sparsity == 0 {
        return Err(Error::contract(
            "reference signal must have at least one nonzero",
        ));
    }
    let iterations = (alpha as usize - 1) * sparsity;
    if iterations > phi.cols() {
        return Err(Error::IterationBudget {
            iterations,
            cols: phi.cols(),
        });
    }
    let result = omp_decode(phi, y, &OmpOptions::new(iterations))?;
    let fit = linalg::sub(&phi.matvec(&result.estimate)?, y);
    let reference_fit = linalg::sub(&phi.matvec(reference)?, y);
    let lhs = linalg::dot(&fit, &fit);
    let rhs = (11.0 + 20.0 * delta) * linalg::dot(&reference_fit, &reference_fit);
    let premise = check_rip_premise(phi, sparsity, delta, premise_opts)?;
    Ok(BoundReport::new("zhang", lhs, rhs)
        .with_premise(
            premise
                .premise_status
                .unwrap_or(PremiseStatus::Inconclusive),
        )
        .with("sparsity", sparsity)
        .with("delta", delta)
        .with("alpha", alpha)
        .with("iterations", iterations)
        .with("iterations_run", result.iterations_run)
        .with("premise", &premise))
}

/// `‖Φz‖₂ ≤ √(1+δ)(‖z‖₂ + ‖z‖_p / k^{1/p−1/2})`, where `δ` should bound
/// `δ_L` from above for `L` as in [`rip_order_l`].
pub fn verify_lemma1(
    phi: &DenseMatrix,
    z: &[f64],
    k: usize,
    p: f64,
    delta: f64,
) -> Result<BoundReport> {
    if !(1.0..2.0).contains(&p) {
        return Err(Error::contract(format!("p must lie in [1, 2), got {p}")));
    }
    if k == 0 {
        return Err(Error::contract("k must be at least 1"));
    }
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::contract(format!(
            "δ must be nonnegative, got {delta}"
        )));
    }
    let lhs = linalg::norm2(&phi.matvec(z)?);
    let rhs =
        (1.0 + delta).sqrt() * (linalg::norm2(z) + lp_norm(z, p)? / (k as f64).powf(1.0 / p - 0.5));
    Ok(BoundReport::new("lemma1", lhs, rhs)
        .with("k", k)
        .with("p", p)
        .with("delta", delta)
        .with("rip_order_l", rip_order_l(phi.cols(), k, p)))
}

/// `σ_k(z)_q ≤ ‖z‖_p / k^{1/p−1/q}` for `1 ≤ p ≤ q`.
pub fn verify_lemma2(z: &[f64], k: usize, p: f64, q: f64) -> Result<BoundReport> {
    if !(p >= 1.0 && p <= q) {
        return Err(Error::contract(format!(
            "need 1 <= p <= q, got p = {p}, q = {q}"
        )));
    }
    if k == 0 || k > z.len() {
        return Err(Error::contract(format!(
            "k must lie in [1, {}], got {k}",
            z.len()
        )));
    }
    let r = if q.is_infinite() {
        1.0 / p
    } else {
        1.0 / p - 1.0 / q
    };
    let lhs = sigma_k(z, k, q)?;
    let rhs = lp_norm(z, p)? / (k as f64).powf(r);
    Ok(BoundReport::new("lemma2", lhs, rhs)
        .with("k", k)
        .with("p", p)
        .with("q", q))
}

/// `‖b‖_q / k^{1/q−1/2} ≤ ‖b‖₂` for `b ∈ R^k`, `1 ≤ q < 2`.
pub fn verify_holder(b: &[f64], q: f64) -> Result<BoundReport> {
    if !(1.0..2.0).contains(&q) {
        return Err(Error::contract(format!("q must lie in [1, 2), got {q}")));
    }
    if b.is_empty() {
        return Err(Error::contract("vector must be nonempty"));
    }
    let k = b.len() as f64;
    let lhs = lp_norm(b, q)? / k.powf(1.0 / q - 0.5);
    let rhs = lp_norm(b, 2.0)?;
    Ok(BoundReport::new("holder", lhs, rhs)
        .with("len", b.len())
        .with("q", q))
}

/// Output of the known-support least-squares decoder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleEstimate {
    pub estimate: Vec<f64>,
    /// False when `Φ_{T0}` is rank deficient and the minimum-norm solution
    /// was returned instead of `(Φ_{T0}ᵀΦ_{T0})⁻¹Φ_{T0}ᵀy`.
    pub full_rank: bool,
}

/// Least squares on a known support `T0`, zero elsewhere.
pub fn oracle_ls_decoder(phi: &DenseMatrix, y: &[f64], t0: &IndexSet) -> Result<OracleEstimate> {
    let sol = linalg::least_squares_with_rank(phi, y, t0)?;
    Ok(OracleEstimate {
        estimate: sol.coefficients,
        full_rank: sol.rank == t0.len(),
    })
}
