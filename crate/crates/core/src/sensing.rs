//! Random sensing matrices and restricted-isometry estimates.

use serde::{Deserialize, Serialize};

use crate::bounds::alpha_of;
use crate::error::{Error, Result};
use crate::linalg::{self, extremal_eigenvalues, DenseMatrix, IndexSet, SymmetricMatrix};
use crate::report::{BoundReport, PremiseStatus, BOUND_SLACK};
use crate::rng::Stream;
use crate::signal::check_finite;

/// Default cap on the number of supports examined by [`rip_delta_exact`].
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 2_000_000;

/// Default number of random supports per order when a premise check has to
/// fall back to sampling.
pub const DEFAULT_PREMISE_SAMPLES: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ensemble {
    /// i.i.d. `N(0, 1/n)` entries.
    Gaussian,
    /// i.i.d. `±1/√n` entries.
    Bernoulli,
    /// A square matrix with orthonormal columns (orthogonalized Gaussian).
    Orthogonal,
}

/// Ensemble and dimensions of a random matrix, without a seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixShape {
    pub ensemble: Ensemble,
    pub rows: usize,
    pub cols: usize,
}

impl MatrixShape {
    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::contract(format!(
                "matrix dimensions must be positive, got {}x{}",
                self.rows, self.cols
            )));
        }
        match self.ensemble {
            Ensemble::Orthogonal if self.rows != self.cols => Err(Error::contract(format!(
                "orthogonal ensemble needs a square matrix, got {}x{}",
                self.rows, self.cols
            ))),
            Ensemble::Gaussian | Ensemble::Bernoulli if self.rows > self.cols => {
                Err(Error::contract(format!(
                    "random ensembles need rows <= cols, got {}x{}",
                    self.rows, self.cols
                )))
            }
            _ => Ok(()),
        }
    }

    /// Draws a matrix from `stream`. Entries are drawn in row-major order.
    pub fn draw(&self, stream: &mut Stream) -> Result<DenseMatrix> {
        self.validate()?;
        let (n, big_n) = (self.rows, self.cols);
        let scale = 1.0 / (n as f64).sqrt();
        let entries: Vec<f64> = match self.ensemble {
            Ensemble::Gaussian => (0..n * big_n).map(|_| stream.normal() * scale).collect(),
            Ensemble::Bernoulli => (0..n * big_n).map(|_| stream.sign() * scale).collect(),
            Ensemble::Orthogonal => {
                let g: Vec<f64> = (0..n * n).map(|_| stream.normal()).collect();
                let g = DenseMatrix::from_row_major(n, n, &g)?;
                return linalg::orthonormal_factor(&g);
            }
        };
        DenseMatrix::from_row_major(n, big_n, &entries)
    }
}

/// A fully specified random matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixSpec {
    #[serde(flatten)]
    pub shape: MatrixShape,
    pub seed: u64,
}

impl MatrixSpec {
    pub fn new(ensemble: Ensemble, rows: usize, cols: usize, seed: u64) -> Self {
        Self {
            shape: MatrixShape {
                ensemble,
                rows,
                cols,
            },
            seed,
        }
    }
}

/// Draws the matrix described by `spec` from stream 0 of its seed.
pub fn generate(spec: &MatrixSpec) -> Result<DenseMatrix> {
    spec.shape.draw(&mut Stream::new(spec.seed))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RipMethod {
    Exact,
    MonteCarloLowerBound,
}

/// A restricted isometry constant `δ_k` or a lower bound on it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RipEstimate {
    pub k: usize,
    pub delta: f64,
    pub method: RipMethod,
    pub supports_examined: u128,
    pub seed: Option<u64>,
    /// A support attaining `delta`.
    pub support: IndexSet,
}

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step.
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// `max(λ_max − 1, 1 − λ_min)` of a principal Gram submatrix.
fn isometry_deviation(gram: &SymmetricMatrix, support: &[usize]) -> f64 {
    let (lo, hi) = extremal_eigenvalues(&gram.principal(support));
    (hi - 1.0).max(1.0 - lo)
}

fn check_order(phi: &DenseMatrix, k: usize) -> Result<()> {
    if k == 0 || k > phi.cols() {
        return Err(Error::contract(format!(
            "RIP order must lie in [1, {}], got {k}",
            phi.cols()
        )));
    }
    Ok(())
}

/// Exact `δ_k` by enumerating every support of size `k`.
pub fn rip_delta_exact(phi: &DenseMatrix, k: usize) -> Result<RipEstimate> {
    rip_delta_exact_with_budget(phi, k, DEFAULT_ENUMERATION_BUDGET)
}

pub fn rip_delta_exact_with_budget(
    phi: &DenseMatrix,
    k: usize,
    budget: u128,
) -> Result<RipEstimate> {
    check_order(phi, k)?;
    let required = binomial(phi.cols(), k);
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }
    let gram = phi.gram();
    let n = phi.cols();
    let mut combo: Vec<usize> = (0..k).collect();
    let mut best = (f64::NEG_INFINITY, combo.clone());
    let mut examined: u128 = 0;
    loop {
        let dev = isometry_deviation(&gram, &combo);
        examined += 1;
        if dev > best.0 {
            best = (dev, combo.clone());
        }
        // Next combination in lexicographic order.
        let mut i = k;
        while i > 0 && combo[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        combo[i - 1] += 1;
        for j in i..k {
            combo[j] = combo[j - 1] + 1;
        }
    }
    Ok(RipEstimate {
        k,
        delta: best.0.max(0.0),
        method: RipMethod::Exact,
        supports_examined: examined,
        seed: None,
        support: IndexSet::new(best.1, n)?,
    })
}

/// Lower bound on `δ_k` from `samples` uniformly random supports. When
/// `samples` covers every support the exact value is returned instead.
pub fn rip_delta_lower_bound(
    phi: &DenseMatrix,
    k: usize,
    samples: usize,
    seed: u64,
) -> Result<RipEstimate> {
    check_order(phi, k)?;
    if samples == 0 {
        return Err(Error::contract("samples must be at least 1"));
    }
    if samples as u128 >= binomial(phi.cols(), k) {
        let mut exact = rip_delta_exact_with_budget(phi, k, u128::MAX)?;
        exact.seed = Some(seed);
        return Ok(exact);
    }
    let gram = phi.gram();
    let mut stream = Stream::new(seed);
    let mut best = (f64::NEG_INFINITY, Vec::new());
    for _ in 0..samples {
        let support = stream.sample_indices(phi.cols(), k);
        let dev = isometry_deviation(&gram, &support);
        if dev > best.0 {
            best = (dev, support);
        }
    }
    Ok(RipEstimate {
        k,
        delta: best.0.max(0.0),
        method: RipMethod::MonteCarloLowerBound,
        supports_examined: samples as u128,
        seed: Some(seed),
        support: IndexSet::new(best.1, phi.cols())?,
    })
}

/// Upper bound on `δ_s` valid for every order `s`: by eigenvalue interlacing,
/// the spectrum of any principal Gram submatrix lies inside that of `ΦᵀΦ`.
pub fn rip_delta_upper_bound(phi: &DenseMatrix) -> f64 {
    let (lo, hi) = extremal_eigenvalues(&phi.gram());
    (hi - 1.0).max(1.0 - lo).max(0.0)
}

/// How a premise check estimates RIP constants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PremiseOptions {
    /// Enumerate supports when `C(N, order)` fits in `budget`.
    pub use_exact: bool,
    pub budget: u128,
    /// Random supports per order when enumeration is off or too expensive.
    pub samples: usize,
    pub seed: u64,
}

impl Default for PremiseOptions {
    fn default() -> Self {
        Self {
            use_exact: true,
            budget: DEFAULT_ENUMERATION_BUDGET,
            samples: DEFAULT_PREMISE_SAMPLES,
            seed: 0,
        }
    }
}

/// Two-sided knowledge about one `δ_s`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaBounds {
    pub order: usize,
    pub lower: f64,
    pub upper: f64,
    pub method: RipMethod,
}

impl DeltaBounds {
    pub fn is_exact(&self) -> bool {
        self.method == RipMethod::Exact
    }
}

/// Brackets `δ_order` using enumeration when allowed, else sampling plus the
/// interlacing upper bound.
pub fn delta_bounds(
    phi: &DenseMatrix,
    order: usize,
    opts: &PremiseOptions,
    global_upper: f64,
) -> Result<DeltaBounds> {
    check_order(phi, order)?;
    if opts.use_exact && binomial(phi.cols(), order) <= opts.budget {
        let exact = rip_delta_exact_with_budget(phi, order, opts.budget)?;
        return Ok(DeltaBounds {
            order,
            lower: exact.delta,
            upper: exact.delta,
            method: RipMethod::Exact,
        });
    }
    let samples = opts.samples.max(1);
    let est = rip_delta_lower_bound(phi, order, samples, opts.seed ^ order as u64)?;
    let upper = if est.method == RipMethod::Exact {
        est.delta
    } else {
        global_upper
    };
    Ok(DeltaBounds {
        order,
        lower: est.delta,
        upper: upper.max(est.delta),
        method: est.method,
    })
}

/// Decides `δ_k + (1+δ)·δ_{αk} ≤ δ` with `α = ⌈16 + 15δ⌉`.
///
/// The report's `lhs` is the certified upper value when the premise holds and
/// the lower value otherwise; the two estimates are recorded in `context`.
pub fn check_rip_premise(
    phi: &DenseMatrix,
    k: usize,
    delta: f64,
    opts: &PremiseOptions,
) -> Result<BoundReport> {
    let alpha = alpha_of(delta)?;
    check_order(phi, k)?;
    let big = alpha as usize * k;
    let base = BoundReport::new("rip_premise", f64::NAN, delta)
        .with("k", k)
        .with("alpha", alpha)
        .with("alpha_k", big)
        .with("delta", delta);
    if big > phi.cols() {
        return Ok(base
            .with("cols", phi.cols())
            .with_premise(PremiseStatus::PremiseUndefined));
    }
    let global = rip_delta_upper_bound(phi);
    let small = delta_bounds(phi, k, opts, global)?;
    let large = delta_bounds(phi, big, opts, global)?;
    let lhs_lower = small.lower + (1.0 + delta) * large.lower;
    let lhs_upper = small.upper + (1.0 + delta) * large.upper;
    let slack = BOUND_SLACK * delta.max(1.0);
    let (status, lhs) = if lhs_upper <= delta + slack {
        (PremiseStatus::Holds, lhs_upper)
    } else if lhs_lower > delta + slack {
        (PremiseStatus::Refuted, lhs_lower)
    } else {
        (PremiseStatus::Inconclusive, lhs_lower)
    };
    let mut report = BoundReport::new("rip_premise", lhs, delta)
        .with_premise(status)
        .with("lhs_lower", lhs_lower)
        .with("lhs_upper", lhs_upper)
        .with("delta_k", &small)
        .with("delta_alpha_k", &large)
        .with("interlacing_upper", global);
    for (key, value) in base.context {
        report.context.insert(key, value);
    }
    Ok(report)
}

/// Decides `δ_order < δ`, the `RIP(order, δ)` condition.
pub fn check_rip_order(
    phi: &DenseMatrix,
    order: usize,
    delta: f64,
    opts: &PremiseOptions,
) -> Result<BoundReport> {
    if order == 0 {
        return Err(Error::contract("RIP order must be at least 1"));
    }
    if order > phi.cols() {
        return Ok(BoundReport::new("rip_order", f64::NAN, delta)
            .with("order", order)
            .with_premise(PremiseStatus::PremiseUndefined));
    }
    let bounds = delta_bounds(phi, order, opts, rip_delta_upper_bound(phi))?;
    let (status, lhs) = if bounds.upper < delta {
        (PremiseStatus::Holds, bounds.upper)
    } else if bounds.lower >= delta {
        (PremiseStatus::Refuted, bounds.lower)
    } else {
        (PremiseStatus::Inconclusive, bounds.lower)
    };
    Ok(BoundReport::new("rip_order", lhs, delta)
        .with_premise(status)
        .with("order", order)
        .with("delta_bounds", &bounds))
}

/// Fraction of `trials` fresh draws of `shape` with `‖Φx‖₂² ≤ C‖x‖₂²`.
/// Trial `t` draws its matrix from stream `t` of `seed`.
pub fn boundedness_probability(
    shape: &MatrixShape,
    x: &[f64],
    bound: f64,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    shape.validate()?;
    if trials == 0 {
        return Err(Error::contract("trials must be at least 1"));
    }
    if !(bound > 0.0) {
        return Err(Error::contract(format!(
            "boundedness constant must be positive, got {bound}"
        )));
    }
    if x.len() != shape.cols {
        return Err(Error::Dimension {
            expected: shape.cols,
            actual: x.len(),
            context: "signal length must equal column count",
        });
    }
    check_finite(x, "signal")?;
    let energy = linalg::dot(x, x);
    if energy == 0.0 {
        return Err(Error::contract(
            "boundedness is vacuous for the zero signal",
        ));
    }
    let mut hits = 0usize;
    for t in 0..trials {
        let phi = shape.draw(&mut Stream::substream(seed, t as u64))?;
        let image = phi.matvec(x)?;
        if linalg::dot(&image, &image) <= bound * energy {
            hits += 1;
        }
    }
    Ok(hits as f64 / trials as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn duplicated_columns() -> DenseMatrix {
        // Columns 0 and 1 are the same unit vector.
        DenseMatrix::from_columns(&[
            vec![1.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap()
    }

    #[test]
    fn shape_validation() {
        assert!(generate(&MatrixSpec::new(Ensemble::Orthogonal, 4, 5, 0)).is_err());
        assert!(generate(&MatrixSpec::new(Ensemble::Gaussian, 6, 5, 0)).is_err());
        assert!(generate(&MatrixSpec::new(Ensemble::Bernoulli, 0, 5, 0)).is_err());
        assert!(generate(&MatrixSpec::new(Ensemble::Gaussian, 5, 5, 0)).is_ok());
    }

    #[test]
    fn orthogonal_is_orthonormal() {
        for seed in [0, 1, 77] {
            let q = generate(&MatrixSpec::new(Ensemble::Orthogonal, 16, 16, seed)).unwrap();
            let g = q.gram();
            for i in 0..16 {
                for j in 0..16 {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((g.get(i, j) - want).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn bernoulli_entries() {
        let b = generate(&MatrixSpec::new(Ensemble::Bernoulli, 4, 9, 3)).unwrap();
        assert!(b.to_row_major().iter().all(|&v| v == 0.5 || v == -0.5));
    }

    #[test]
    fn gaussian_column_norms_concentrate() {
        let g = generate(&MatrixSpec::new(Ensemble::Gaussian, 50, 100, 12)).unwrap();
        let mean = g.columns().map(|c| linalg::dot(c, c)).sum::<f64>() / 100.0;
        assert!((0.8..=1.2).contains(&mean), "{mean}");
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = MatrixSpec::new(Ensemble::Gaussian, 5, 8, 99);
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
        let other = MatrixSpec::new(Ensemble::Gaussian, 5, 8, 100);
        assert_ne!(generate(&spec).unwrap(), generate(&other).unwrap());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(12, 2), 66);
        assert_eq!(binomial(12, 0), 1);
        assert_eq!(binomial(5, 6), 0);
        assert_eq!(binomial(64, 31), 1_777_090_076_065_542_336);
        assert_eq!(binomial(1000, 500), u128::MAX);
    }

    #[test]
    fn exact_delta_examples() {
        let q = generate(&MatrixSpec::new(Ensemble::Orthogonal, 8, 8, 4)).unwrap();
        for k in 1..=4 {
            let est = rip_delta_exact(&q, k).unwrap();
            assert!(est.delta < 1e-10);
            assert_eq!(est.supports_examined, binomial(8, k));
        }
        let est = rip_delta_exact(&duplicated_columns(), 2).unwrap();
        assert!((est.delta - 1.0).abs() < 1e-12);
        assert_eq!(est.support.as_slice(), &[0, 1]);
    }

    #[test]
    fn budget_is_enforced() {
        let g = generate(&MatrixSpec::new(Ensemble::Gaussian, 4, 30, 1)).unwrap();
        let err = rip_delta_exact_with_budget(&g, 3, 100).unwrap_err();
        assert!(matches!(
            err,
            Error::BudgetExceeded {
                required: 4060,
                budget: 100
            }
        ));
        assert!(rip_delta_exact(&g, 0).is_err());
        assert!(rip_delta_exact(&g, 31).is_err());
    }

    #[test]
    fn full_coverage_sampling_is_exact() {
        let g = generate(&MatrixSpec::new(Ensemble::Gaussian, 5, 7, 8)).unwrap();
        let exact = rip_delta_exact(&g, 2).unwrap();
        let lb = rip_delta_lower_bound(&g, 2, 21, 3).unwrap();
        assert_eq!(lb.delta, exact.delta);
        let partial = rip_delta_lower_bound(&g, 2, 5, 3).unwrap();
        assert_eq!(partial.method, RipMethod::MonteCarloLowerBound);
        assert!(partial.delta <= exact.delta + 1e-12);
        assert_eq!(partial, rip_delta_lower_bound(&g, 2, 5, 3).unwrap());
    }

    #[test]
    fn interlacing_bound_dominates() {
        let g = generate(&MatrixSpec::new(Ensemble::Gaussian, 6, 9, 5)).unwrap();
        let upper = rip_delta_upper_bound(&g);
        for k in 1..=9 {
            assert!(rip_delta_exact(&g, k).unwrap().delta <= upper + 1e-10);
        }
    }

    #[test]
    fn premise_examples() {
        let q = generate(&MatrixSpec::new(Ensemble::Orthogonal, 64, 64, 2)).unwrap();
        let r = check_rip_premise(&q, 1, 1.0, &PremiseOptions::default()).unwrap();
        assert_eq!(r.premise_status, Some(PremiseStatus::Holds));
        assert_eq!(r.context["alpha"], 31);
        assert!(r.lhs < 1e-10 && r.holds);

        let r = check_rip_premise(&duplicated_columns(), 2, 0.5, &PremiseOptions::default());
        // α·k = 2·24 > 4 columns.
        assert_eq!(
            r.unwrap().premise_status,
            Some(PremiseStatus::PremiseUndefined)
        );

        let r = check_rip_premise(&q, 3, 1.0, &PremiseOptions::default()).unwrap();
        assert_eq!(r.premise_status, Some(PremiseStatus::PremiseUndefined));
        assert!(!r.holds);

        assert!(check_rip_premise(&q, 1, 0.0, &PremiseOptions::default()).is_err());
        assert!(check_rip_premise(&q, 1, 1.5, &PremiseOptions::default()).is_err());
    }

    #[test]
    fn premise_refuted_by_duplicate_columns() {
        // 60 columns with 0 and 1 identical: δ_2 = 1 > 0.5 and α·k = 48 ≤ 60.
        let spec = MatrixSpec::new(Ensemble::Gaussian, 30, 60, 9);
        let g = generate(&spec).unwrap();
        let mut cols: Vec<Vec<f64>> = g.columns().map(<[f64]>::to_vec).collect();
        let norm = linalg::norm2(&cols[0]);
        cols[0].iter_mut().for_each(|v| *v /= norm);
        cols[1] = cols[0].clone();
        let phi = DenseMatrix::from_columns(&cols).unwrap();
        let opts = PremiseOptions {
            samples: 20,
            ..PremiseOptions::default()
        };
        let r = check_rip_premise(&phi, 2, 0.5, &opts).unwrap();
        assert_eq!(r.premise_status, Some(PremiseStatus::Refuted));
        assert!(!r.holds);
    }

    #[test]
    fn boundedness_examples() {
        let x: Vec<f64> = (0..16).map(|i| (i as f64 * 0.37).sin()).collect();
        let orth = MatrixShape {
            ensemble: Ensemble::Orthogonal,
            rows: 16,
            cols: 16,
        };
        assert_eq!(
            boundedness_probability(&orth, &x, 1.0 + 1e-9, 20, 1).unwrap(),
            1.0
        );

        for ensemble in [Ensemble::Gaussian, Ensemble::Bernoulli] {
            let shape = MatrixShape {
                ensemble,
                rows: 4,
                cols: 16,
            };
            assert_eq!(
                boundedness_probability(&shape, &x, 1e6, 100, 2).unwrap(),
                1.0
            );
        }
        assert!(boundedness_probability(&orth, &[0.0; 16], 2.0, 5, 1).is_err());
        assert!(boundedness_probability(&orth, &x, 0.0, 5, 1).is_err());
        assert!(boundedness_probability(&orth, &x, 2.0, 0, 1).is_err());
    }

    #[test]
    fn gaussian_boundedness_tail() {
        // ‖Φx‖² ~ χ²₅₀/50 for unit x; P(χ²₅₀ > 100) ≈ 2e-5.
        let shape = MatrixShape {
            ensemble: Ensemble::Gaussian,
            rows: 50,
            cols: 60,
        };
        let mut x = vec![0.0; 60];
        x[7] = 0.6;
        x[21] = -0.8;
        let frac = boundedness_probability(&shape, &x, 2.0, 1000, 5).unwrap();
        assert!(frac >= 0.99, "{frac}");
    }
}
