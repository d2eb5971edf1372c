//! Orthogonal matching pursuit.
//!
//! Starting from `r⁰ = y`, `c⁰ = 0`, `Λ⁰ = ∅`, each iteration
//!
//! 1. correlates the residual with every column, `h = Φᵀ r`;
//! 2. adds the unselected column with the largest `|h_j|` to `Λ`
//!    (lowest index on ties);
//! 3. re-solves least squares on `Λ` and recomputes the residual.
//!
//! The loop runs `M` times unless the residual vanishes (relative to
//! `‖y‖₂`) or no unselected column correlates with it, in which case the
//! result is flagged as stopped early.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, DenseMatrix, IndexSet};
use crate::signal::check_finite;

pub const DEFAULT_RESIDUAL_STOP_REL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OmpOptions {
    pub max_iterations: usize,
    #[serde(default = "default_stop")]
    pub residual_stop_rel: f64,
}

fn default_stop() -> f64 {
    DEFAULT_RESIDUAL_STOP_REL
}

impl OmpOptions {
    pub fn new(max_iterations: usize) -> Self {
        Self {
            max_iterations,
            residual_stop_rel: DEFAULT_RESIDUAL_STOP_REL,
        }
    }

    pub fn with_residual_stop(mut self, rel: f64) -> Self {
        self.residual_stop_rel = rel;
        self
    }
}

/// Decoder output together with the full iteration trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryResult {
    pub estimate: Vec<f64>,
    pub selected: IndexSet,
    pub chosen_order: Vec<usize>,
    /// `‖r^ℓ‖₂` for `ℓ = 0..=iterations_run`.
    pub residual_norms: Vec<f64>,
    pub iterations_run: usize,
    pub stopped_early: bool,
}

impl RecoveryResult {
    pub fn final_residual_norm(&self) -> f64 {
        *self.residual_norms.last().expect("trace starts with ‖y‖")
    }
}

/// Runs at most `opts.max_iterations` OMP iterations on `y`.
pub fn omp_decode(phi: &DenseMatrix, y: &[f64], opts: &OmpOptions) -> Result<RecoveryResult> {
    if y.len() != phi.rows() {
        return Err(Error::Dimension {
            expected: phi.rows(),
            actual: y.len(),
            context: "measurement length must equal row count",
        });
    }
    if opts.max_iterations == 0 {
        return Err(Error::contract("max_iterations must be at least 1"));
    }
    if opts.max_iterations > phi.cols() {
        return Err(Error::IterationBudget {
            iterations: opts.max_iterations,
            cols: phi.cols(),
        });
    }
    if !(opts.residual_stop_rel >= 0.0 && opts.residual_stop_rel.is_finite()) {
        return Err(Error::contract(format!(
            "residual_stop_rel must be a finite nonnegative number, got {}",
            opts.residual_stop_rel
        )));
    }
    check_finite(y, "measurement")?;

    let threshold = opts.residual_stop_rel * linalg::norm2(y);
    let mut residual = y.to_vec();
    let mut estimate = vec![0.0; phi.cols()];
    let mut selected = IndexSet::empty();
    let mut chosen_order = Vec::with_capacity(opts.max_iterations);
    let mut residual_norms = vec![linalg::norm2(&residual)];
    let mut stopped_early = false;
    let mut factor = Some(GrowingQr::new(phi.rows(), opts.max_iterations));

    while chosen_order.len() < opts.max_iterations {
        if *residual_norms.last().unwrap() <= threshold {
            stopped_early = true;
            break;
        }
        let correlations = phi.transpose_matvec(&residual)?;
        let mut best: Option<(usize, f64)> = None;
        for (j, h) in correlations.iter().enumerate() {
            if selected.contains(j) {
                continue;
            }
            if best.is_none_or(|(_, b)| h.abs() > b) {
                best = Some((j, h.abs()));
            }
        }
        let index = match best {
            Some((j, mag)) if mag > 0.0 => j,
            _ => {
                stopped_early = true;
                break;
            }
        };
        selected.insert(index);
        chosen_order.push(index);

        estimate = match factor
            .as_mut()
            .and_then(|f| f.push(phi.column(index), y).then_some(f))
        {
            Some(f) => f.coefficients(&chosen_order, phi.cols()),
            None => {
                factor = None;
                linalg::least_squares_on_support(phi, y, &selected)?
            }
        };
        residual = linalg::sub(y, &phi.matvec(&estimate)?);
        residual_norms.push(linalg::norm2(&residual));
    }

    Ok(RecoveryResult {
        estimate,
        selected,
        iterations_run: chosen_order.len(),
        chosen_order,
        residual_norms,
        stopped_early,
    })
}

/// Thin QR factorization of the selected columns, grown one column per
/// iteration by Gram-Schmidt with one reorthogonalization pass.
///
/// Yields the same minimizer as [`linalg::least_squares_on_support`] while the
/// selected columns have full numerical rank; once a new column falls inside
/// the span of the others (`push` returns false) the caller switches to the
/// pivoted solver for the rest of the run.
struct GrowingQr {
    rows: usize,
    /// Orthonormal columns, concatenated.
    q: Vec<f64>,
    /// Columns of the upper-triangular factor.
    r: Vec<Vec<f64>>,
    /// `Qᵀy`.
    qty: Vec<f64>,
    largest_pivot: f64,
}

impl GrowingQr {
    fn new(rows: usize, capacity: usize) -> Self {
        Self {
            rows,
            q: Vec::with_capacity(rows * capacity),
            r: Vec::with_capacity(capacity),
            qty: Vec::with_capacity(capacity),
            largest_pivot: 0.0,
        }
    }

    fn basis(&self, i: usize) -> &[f64] {
        &self.q[i * self.rows..(i + 1) * self.rows]
    }

    fn push(&mut self, column: &[f64], y: &[f64]) -> bool {
        let s = self.r.len();
        let mut w = column.to_vec();
        let mut coeffs = vec![0.0; s + 1];
        for _pass in 0..2 {
            for i in 0..s {
                let c = linalg::dot(self.basis(i), &w);
                coeffs[i] += c;
                let qi = &self.q[i * self.rows..(i + 1) * self.rows];
                for (wk, qk) in w.iter_mut().zip(qi) {
                    *wk -= c * qk;
                }
            }
        }
        let rho = linalg::norm2(&w);
        let scale = self.largest_pivot.max(linalg::norm2(column));
        if rho <= linalg::RANK_TOLERANCE * scale || rho == 0.0 {
            return false;
        }
        w.iter_mut().for_each(|v| *v /= rho);
        coeffs[s] = rho;
        self.largest_pivot = self.largest_pivot.max(rho);
        self.qty.push(linalg::dot(&w, y));
        self.q.extend(w);
        self.r.push(coeffs);
        true
    }

    /// Solves `R c = Qᵀy` and scatters `c` onto `order` in a length-`cols` vector.
    fn coefficients(&self, order: &[usize], cols: usize) -> Vec<f64> {
        let s = self.r.len();
        let mut c = vec![0.0; s];
        for i in (0..s).rev() {
            let mut acc = self.qty[i];
            for j in (i + 1)..s {
                acc -= self.r[j][i] * c[j];
            }
            c[i] = acc / self.r[i][i];
        }
        let mut out = vec![0.0; cols];
        for (&j, v) in order.iter().zip(c) {
            out[j] = v;
        }
        out
    }
}
