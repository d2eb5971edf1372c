//! Seeded trial batches.
//!
//! Trial `t` draws, in order, its matrix (unless the batch shares one), its
//! signal and its noise from substream `t` of the master seed. A shared
//! matrix comes from the reserved stream [`SHARED_STREAM`]. Results do not
//! depend on how many worker threads run the trials.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::oracle_ls_decoder;
use crate::error::{Error, Result};
use crate::linalg::{self, DenseMatrix, IndexSet};
use crate::omp::{omp_decode, OmpOptions, DEFAULT_RESIDUAL_STOP_REL};
use crate::rng::{Stream, SHARED_STREAM};
use crate::sensing::MatrixShape;
use crate::signal::{lp_norm, sigma_k};
use crate::SCHEMA_VERSION;

use super::with_worker_pool;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Magnitude {
    /// `±1` on the support.
    Unit,
    /// Standard normal values on the support.
    Gaussian,
    /// `|x_(i)| = 1/i`, random signs, on a support of size `2k`.
    Decaying,
    /// The support is drawn but every value is zero (noise-only runs).
    Zero,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignalModel {
    pub sparsity: usize,
    pub magnitude: Magnitude,
}

impl SignalModel {
    /// Number of nonzeros the model places.
    pub fn support_size(&self) -> usize {
        match self.magnitude {
            Magnitude::Decaying => 2 * self.sparsity,
            _ => self.sparsity,
        }
    }

    /// Draws a signal of length `dim` with a uniformly random support.
    /// Returns the signal and its drawn support.
    pub fn draw(&self, dim: usize, stream: &mut Stream) -> (Vec<f64>, IndexSet) {
        let size = self.support_size();
        let mut x = vec![0.0; dim];
        let mut order = stream.shuffled_indices(dim, size);
        for (rank, &i) in order.iter().enumerate() {
            x[i] = match self.magnitude {
                Magnitude::Unit => stream.sign(),
                Magnitude::Gaussian => stream.normal(),
                Magnitude::Decaying => stream.sign() / (rank + 1) as f64,
                Magnitude::Zero => 0.0,
            };
        }
        order.sort_unstable();
        let support = IndexSet::new(order, dim).expect("distinct indices in range");
        (x, support)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Decoder {
    Omp {
        iterations: usize,
        #[serde(default = "default_stop")]
        residual_stop_rel: f64,
    },
    /// Least squares on the true (drawn) support.
    Oracle,
}

fn default_stop() -> f64 {
    DEFAULT_RESIDUAL_STOP_REL
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Metric {
    L1,
    L2,
    Lq {
        q: f64,
    },
    /// 1 when `‖x* − x‖₂ ≤ tol·‖x‖₂`, else 0.
    Success {
        tol: f64,
    },
    /// `‖x* − x‖_q · k^{1/p−1/q} / σ_k(x)_p`; undefined when `σ_k(x)_p = 0`.
    SigmaRatio {
        p: f64,
        q: f64,
    },
}

impl Metric {
    pub fn label(&self) -> String {
        match self {
            Metric::L1 => "l1".into(),
            Metric::L2 => "l2".into(),
            Metric::Lq { q } => format!("lq({q})"),
            Metric::Success { tol } => format!("success({tol:e})"),
            Metric::SigmaRatio { p, q } => format!("sigma_ratio({p},{q})"),
        }
    }

    fn validate(&self) -> std::result::Result<(), String> {
        match *self {
            Metric::Lq { q } if !(q >= 1.0) => Err(format!("lq.q must be >= 1, got {q}")),
            Metric::Success { tol } if !(tol >= 0.0 && tol.is_finite()) => {
                Err(format!("success.tol must be finite and >= 0, got {tol}"))
            }
            Metric::SigmaRatio { p, q } if !(1.0 <= p && p <= q) => Err(format!(
                "sigma_ratio needs 1 <= p <= q, got p = {p}, q = {q}"
            )),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub matrix: MatrixShape,
    /// Use one matrix for every trial instead of a fresh draw per trial.
    #[serde(default)]
    pub fixed_matrix: bool,
    pub signal: SignalModel,
    #[serde(default)]
    pub noise_l2: f64,
    pub trials: usize,
    pub decoder: Decoder,
    pub metrics: Vec<Metric>,
    pub master_seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, msg: String| Err(Error::contract(format!("config.{field}: {msg}")));
        if let Err(e) = self.matrix.validate() {
            return bad("matrix", e.to_string());
        }
        let cols = self.matrix.cols;
        if self.trials == 0 {
            return bad("trials", "must be at least 1".into());
        }
        if self.signal.support_size() > cols {
            return bad(
                "signal.sparsity",
                format!(
                    "support of size {} exceeds {cols} columns",
                    self.signal.support_size()
                ),
            );
        }
        if !(self.noise_l2 >= 0.0 && self.noise_l2.is_finite()) {
            return bad(
                "noise_l2",
                format!("must be finite and >= 0, got {}", self.noise_l2),
            );
        }
        match self.decoder {
            Decoder::Omp {
                iterations,
                residual_stop_rel,
            } => {
                if iterations == 0 || iterations > cols {
                    return bad(
                        "decoder.iterations",
                        format!("must lie in [1, {cols}], got {iterations}"),
                    );
                }
                if !(residual_stop_rel >= 0.0 && residual_stop_rel.is_finite()) {
                    return bad(
                        "decoder.residual_stop_rel",
                        format!("must be finite and >= 0, got {residual_stop_rel}"),
                    );
                }
            }
            Decoder::Oracle => {
                if self.signal.support_size() == 0 {
                    return bad(
                        "signal.sparsity",
                        "oracle decoder needs a nonempty support".into(),
                    );
                }
            }
        }
        for (i, m) in self.metrics.iter().enumerate() {
            if let Err(msg) = m.validate() {
                return bad(&format!("metrics[{i}]"), msg);
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    /// Substream of the master seed that produced this trial.
    pub stream: u64,
    pub support: IndexSet,
    pub signal_l2: f64,
    pub noise_l2: f64,
    pub error_l2: f64,
    pub iterations: usize,
    pub stopped_early: bool,
    /// Requested metrics by label; `None` where undefined.
    pub metrics: BTreeMap<String, Option<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub max: f64,
}

impl Summary {
    fn of(values: &[f64]) -> Option<Summary> {
        if values.is_empty() {
            return None;
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let median = if n % 2 == 1 {
            sorted[n / 2]
        } else {
            0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
        };
        Some(Summary {
            count: n,
            mean: values.iter().sum::<f64>() / n as f64,
            median,
            max: sorted[n - 1],
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub error_l2: Summary,
    /// Fraction of trials passing the first `success` metric, if requested.
    pub success_rate: Option<f64>,
    /// Largest defined value of the first `sigma_ratio` metric.
    pub worst_sigma_ratio: Option<f64>,
    pub metrics: BTreeMap<String, Option<Summary>>,
}

/// Recomputes the aggregates from per-trial records.
pub fn aggregate(config: &ExperimentConfig, records: &[TrialRecord]) -> Aggregates {
    let errors: Vec<f64> = records.iter().map(|r| r.error_l2).collect();
    let values_of = |label: &str| -> Vec<f64> {
        records
            .iter()
            .filter_map(|r| r.metrics.get(label).copied().flatten())
            .collect()
    };
    let mut metrics = BTreeMap::new();
    for m in &config.metrics {
        let label = m.label();
        metrics.insert(label.clone(), Summary::of(&values_of(&label)));
    }
    let success_rate = config.metrics.iter().find_map(|m| match m {
        Metric::Success { .. } => {
            let v = values_of(&m.label());
            Some(v.iter().sum::<f64>() / records.len() as f64)
        }
        _ => None,
    });
    let worst_sigma_ratio = config.metrics.iter().find_map(|m| match m {
        Metric::SigmaRatio { .. } => values_of(&m.label()).into_iter().reduce(f64::max),
        _ => None,
    });
    Aggregates {
        error_l2: Summary::of(&errors).expect("at least one trial"),
        success_rate,
        worst_sigma_ratio,
        metrics,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub v: u32,
    pub config: ExperimentConfig,
    pub records: Vec<TrialRecord>,
    pub aggregates: Aggregates,
    /// Seconds since the Unix epoch; set by front ends, never by
    /// [`run_experiment`], and excluded from reproducibility comparisons.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
}

fn run_trial(
    config: &ExperimentConfig,
    shared: Option<&DenseMatrix>,
    trial: usize,
) -> Result<TrialRecord> {
    let stream_id = trial as u64;
    let mut stream = Stream::substream(config.master_seed, stream_id);
    let owned;
    let phi = match shared {
        Some(m) => m,
        None => {
            owned = config.matrix.draw(&mut stream)?;
            &owned
        }
    };
    let (x, drawn_support) = config.signal.draw(phi.cols(), &mut stream);
    let noise = if config.noise_l2 > 0.0 {
        stream.sphere_vector(phi.rows(), config.noise_l2)
    } else {
        vec![0.0; phi.rows()]
    };
    let y = linalg::add(&phi.matvec(&x)?, &noise);

    let (estimate, iterations, stopped_early) = match config.decoder {
        Decoder::Omp {
            iterations,
            residual_stop_rel,
        } => {
            let opts = OmpOptions::new(iterations).with_residual_stop(residual_stop_rel);
            let res = omp_decode(phi, &y, &opts)?;
            (res.estimate, res.iterations_run, res.stopped_early)
        }
        Decoder::Oracle => {
            let est = oracle_ls_decoder(phi, &y, &drawn_support)?;
            (est.estimate, 0, false)
        }
    };

    let diff = linalg::sub(&estimate, &x);
    let error_l2 = linalg::norm2(&diff);
    let signal_l2 = linalg::norm2(&x);
    let k = config.signal.sparsity;
    let mut metrics = BTreeMap::new();
    for m in &config.metrics {
        let value = match *m {
            Metric::L1 => Some(lp_norm(&diff, 1.0)?),
            Metric::L2 => Some(error_l2),
            Metric::Lq { q } => Some(lp_norm(&diff, q)?),
            Metric::Success { tol } => Some(if error_l2 <= tol * signal_l2 {
                1.0
            } else {
                0.0
            }),
            Metric::SigmaRatio { p, q } => {
                let sigma = sigma_k(&x, k, p)?;
                if sigma > 0.0 && k > 0 {
                    let scale = (k as f64).powf(1.0 / p - 1.0 / q);
                    Some(lp_norm(&diff, q)? * scale / sigma)
                } else {
                    None
                }
            }
        };
        metrics.insert(m.label(), value);
    }
    Ok(TrialRecord {
        trial,
        stream: stream_id,
        support: drawn_support,
        signal_l2,
        noise_l2: linalg::norm2(&noise),
        error_l2,
        iterations,
        stopped_early,
        metrics,
    })
}

/// Runs every trial of `config` and aggregates the results.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let shared = if config.fixed_matrix {
        Some(
            config
                .matrix
                .draw(&mut Stream::substream(config.master_seed, SHARED_STREAM))?,
        )
    } else {
        None
    };
    let records = with_worker_pool(|| {
        (0..config.trials)
            .into_par_iter()
            .map(|t| run_trial(config, shared.as_ref(), t))
            .collect::<Result<Vec<_>>>()
    })?;
    let aggregates = aggregate(config, &records);
    Ok(ExperimentReport {
        v: SCHEMA_VERSION,
        config: config.clone(),
        records,
        aggregates,
        timestamp: None,
    })
}
