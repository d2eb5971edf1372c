//! Randomized verification suites: many draws of one inequality checker.
//!
//! Trial `t` draws from substream `t` of `seed`, matrix first (unless the
//! suite shares one), then the signal, then the noise.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    rip_order_l, theorem1_premise, verify_holder, verify_lemma1, verify_lemma2, verify_theorem1,
    verify_theorem2, verify_zhang,
};
use crate::error::{Error, Result};
use crate::linalg::{self, DenseMatrix};
use crate::report::{BoundReport, PremiseStatus};
use crate::rng::{Stream, SHARED_STREAM};
use crate::sensing::{
    check_rip_premise, rip_delta_exact_with_budget, MatrixShape, PremiseOptions,
    DEFAULT_ENUMERATION_BUDGET, DEFAULT_PREMISE_SAMPLES,
};
use crate::SCHEMA_VERSION;

use super::experiment::SignalModel;
use super::with_worker_pool;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Theorem1,
    Theorem2,
    Zhang,
    Lemma1,
    Lemma2,
    Holder,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Theorem1,
        Suite::Theorem2,
        Suite::Zhang,
        Suite::Lemma1,
        Suite::Lemma2,
        Suite::Holder,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Theorem1 => "theorem1",
            Suite::Theorem2 => "theorem2",
            Suite::Zhang => "zhang",
            Suite::Lemma1 => "lemma1",
            Suite::Lemma2 => "lemma2",
            Suite::Holder => "holder",
        }
    }

    fn needs_matrix(self) -> bool {
        !matches!(self, Suite::Lemma2 | Suite::Holder)
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::contract(format!("unknown suite `{s}`")))
    }
}

fn default_k() -> usize {
    1
}
fn default_p() -> f64 {
    1.0
}
fn default_q() -> f64 {
    2.0
}
fn default_delta() -> f64 {
    1.0
}
fn default_c_bound() -> f64 {
    1.0
}
fn default_trials() -> usize {
    100
}
fn default_dim() -> usize {
    32
}
fn default_true() -> bool {
    true
}
fn default_budget() -> u128 {
    DEFAULT_ENUMERATION_BUDGET
}
fn default_samples() -> usize {
    DEFAULT_PREMISE_SAMPLES
}

/// Parameters shared by all suites; each suite reads the fields it needs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    /// Required by the matrix-based suites.
    #[serde(default)]
    pub matrix: Option<MatrixShape>,
    #[serde(default)]
    pub fixed_matrix: bool,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default = "default_q")]
    pub q: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Noise norm `‖e‖₂` (theorem1, zhang).
    #[serde(default)]
    pub noise_l2: f64,
    /// Boundedness constant `C` (theorem2).
    #[serde(default = "default_c_bound")]
    pub c_bound: f64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    /// Signal model; absent means a dense standard normal vector.
    #[serde(default)]
    pub signal: Option<SignalModel>,
    /// Vector length for lemma2.
    #[serde(default = "default_dim")]
    pub dim: usize,
    /// Enumerate RIP constants exactly when within `budget` supports.
    #[serde(default = "default_true")]
    pub use_exact: bool,
    #[serde(default = "default_budget")]
    pub budget: u128,
    #[serde(default = "default_samples")]
    pub premise_samples: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("every field has a default")
    }
}

impl VerifyConfig {
    fn premise_options(&self) -> PremiseOptions {
        PremiseOptions {
            use_exact: self.use_exact,
            budget: self.budget,
            samples: self.premise_samples,
            seed: self.seed,
        }
    }

    pub fn validate(&self, suite: Suite) -> Result<()> {
        let bad = |field: &str, msg: String| Err(Error::contract(format!("config.{field}: {msg}")));
        if self.trials == 0 {
            return bad("trials", "must be at least 1".into());
        }
        if self.k == 0 {
            return bad("k", "must be at least 1".into());
        }
        if !(self.noise_l2 >= 0.0 && self.noise_l2.is_finite()) {
            return bad(
                "noise_l2",
                format!("must be finite and >= 0, got {}", self.noise_l2),
            );
        }
        if suite.needs_matrix() {
            let Some(shape) = &self.matrix else {
                return bad("matrix", format!("required by the {suite} suite"));
            };
            if let Err(e) = shape.validate() {
                return bad("matrix", e.to_string());
            }
            if let Some(model) = &self.signal {
                if model.support_size() > shape.cols {
                    return bad(
                        "signal.sparsity",
                        format!(
                            "support of size {} exceeds {} columns",
                            model.support_size(),
                            shape.cols
                        ),
                    );
                }
            }
        }
        if suite == Suite::Lemma2 && self.k > self.dim {
            return bad("k", format!("must not exceed dim = {}", self.dim));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub v: u32,
    pub suite: Suite,
    pub config: VerifyConfig,
    pub trials: usize,
    pub holds: usize,
    pub violations: usize,
    /// Violations on instances whose premise was certified to hold.
    pub counterexamples: usize,
    pub premise_counts: BTreeMap<String, usize>,
    pub reports: Vec<BoundReport>,
}

impl SuiteReport {
    pub fn all_hold(&self) -> bool {
        self.violations == 0
    }
}

fn draw_signal(config: &VerifyConfig, dim: usize, stream: &mut Stream) -> Vec<f64> {
    match &config.signal {
        Some(model) => model.draw(dim, stream).0,
        None => stream.normal_vector(dim),
    }
}

fn noise(config: &VerifyConfig, rows: usize, stream: &mut Stream) -> Vec<f64> {
    if config.noise_l2 > 0.0 {
        stream.sphere_vector(rows, config.noise_l2)
    } else {
        vec![0.0; rows]
    }
}

/// Premise status and, for lemma1, the `δ` to test with.
#[derive(Clone)]
struct MatrixFacts {
    premise: Option<PremiseStatus>,
    delta: f64,
}

fn matrix_facts(suite: Suite, config: &VerifyConfig, phi: &DenseMatrix) -> Result<MatrixFacts> {
    let opts = config.premise_options();
    let mut facts = MatrixFacts {
        premise: None,
        delta: config.delta,
    };
    match suite {
        Suite::Theorem1 => {
            facts.premise = Some(theorem1_premise(phi, config.k, config.p, config.delta, &opts)?.0)
        }
        Suite::Theorem2 => {
            facts.premise = check_rip_premise(phi, config.k, config.delta, &opts)?.premise_status;
        }
        Suite::Lemma1 if config.use_exact => {
            let order = rip_order_l(phi.cols(), config.k, config.p);
            facts.delta = rip_delta_exact_with_budget(phi, order, config.budget)?.delta;
        }
        _ => {}
    }
    Ok(facts)
}

fn run_trial(
    suite: Suite,
    config: &VerifyConfig,
    shared: Option<&(DenseMatrix, MatrixFacts)>,
    trial: usize,
) -> Result<BoundReport> {
    let mut stream = Stream::substream(config.seed, trial as u64);
    let owned;
    let matrix = match (shared, &config.matrix) {
        (Some(pair), _) => Some(pair),
        (None, Some(shape)) if suite.needs_matrix() => {
            let phi = shape.draw(&mut stream)?;
            let facts = matrix_facts(suite, config, &phi)?;
            owned = (phi, facts);
            Some(&owned)
        }
        _ => None,
    };
    let unpremised = PremiseStatus::Inconclusive;
    let report = match (suite, matrix) {
        (Suite::Theorem1, Some((phi, facts))) => {
            let x = draw_signal(config, phi.cols(), &mut stream);
            let e = noise(config, phi.rows(), &mut stream);
            verify_theorem1(
                phi,
                &x,
                &e,
                config.k,
                config.p,
                config.q,
                config.delta,
                facts.premise.unwrap_or(unpremised),
            )?
        }
        (Suite::Theorem2, Some((phi, facts))) => {
            let x = draw_signal(config, phi.cols(), &mut stream);
            verify_theorem2(
                phi,
                &x,
                config.k,
                config.delta,
                config.c_bound,
                facts.premise.unwrap_or(unpremised),
            )?
        }
        (Suite::Zhang, Some((phi, _))) => {
            let model = config.signal.unwrap_or(SignalModel {
                sparsity: config.k,
                magnitude: super::experiment::Magnitude::Gaussian,
            });
            let (reference, _) = model.draw(phi.cols(), &mut stream);
            let e = noise(config, phi.rows(), &mut stream);
            let y = linalg::add(&phi.matvec(&reference)?, &e);
            verify_zhang(phi, &y, &reference, config.delta, &config.premise_options())?
        }
        (Suite::Lemma1, Some((phi, facts))) => {
            let z = draw_signal(config, phi.cols(), &mut stream);
            verify_lemma1(phi, &z, config.k, config.p, facts.delta)?
        }
        (Suite::Lemma2, _) => {
            let z = draw_signal(config, config.dim, &mut stream);
            verify_lemma2(&z, config.k, config.p, config.q)?
        }
        (Suite::Holder, _) => {
            let b = draw_signal(config, config.k, &mut stream);
            verify_holder(&b, config.q)?
        }
        _ => unreachable!("validated configs carry a matrix for matrix suites"),
    };
    Ok(report.with("trial", trial))
}

/// Runs `config.trials` randomized checks of one inequality.
pub fn run_suite(suite: Suite, config: &VerifyConfig) -> Result<SuiteReport> {
    config.validate(suite)?;
    let shared = match (&config.matrix, config.fixed_matrix && suite.needs_matrix()) {
        (Some(shape), true) => {
            let phi = shape.draw(&mut Stream::substream(config.seed, SHARED_STREAM))?;
            let facts = matrix_facts(suite, config, &phi)?;
            Some((phi, facts))
        }
        _ => None,
    };
    let reports = with_worker_pool(|| {
        (0..config.trials)
            .into_par_iter()
            .map(|t| run_trial(suite, config, shared.as_ref(), t))
            .collect::<Result<Vec<_>>>()
    })?;
    let holds = reports.iter().filter(|r| r.holds).count();
    let counterexamples = reports.iter().filter(|r| r.is_counterexample()).count();
    let mut premise_counts = BTreeMap::new();
    for r in &reports {
        if let Some(status) = r.premise_status {
            let key = serde_json::to_value(status)?
                .as_str()
                .unwrap_or_default()
                .to_string();
            *premise_counts.entry(key).or_insert(0) += 1;
        }
    }
    Ok(SuiteReport {
        v: SCHEMA_VERSION,
        suite,
        config: config.clone(),
        trials: reports.len(),
        holds,
        violations: reports.len() - holds,
        counterexamples,
        premise_counts,
        reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensing::Ensemble;

    fn orthogonal(n: usize) -> Option<MatrixShape> {
        Some(MatrixShape {
            ensemble: Ensemble::Orthogonal,
            rows: n,
            cols: n,
        })
    }

    #[test]
    fn pure_inequalities_hold() {
        for suite in [Suite::Lemma2, Suite::Holder] {
            let config = VerifyConfig {
                k: 3,
                p: 1.0,
                q: 1.5,
                trials: 200,
                ..VerifyConfig::default()
            };
            let report = run_suite(suite, &config).unwrap();
            assert_eq!(report.violations, 0, "{suite}");
            assert!(report.premise_counts.is_empty());
        }
    }

    #[test]
    fn lq_suite_on_shared_orthogonal_matrix() {
        let config = VerifyConfig {
            matrix: orthogonal(64),
            fixed_matrix: true,
            k: 1,
            noise_l2: 0.01,
            trials: 20,
            ..VerifyConfig::default()
        };
        let report = run_suite(Suite::Theorem1, &config).unwrap();
        assert_eq!(report.violations, 0);
        assert_eq!(report.premise_counts.get("holds"), Some(&20));
    }

    #[test]
    fn image_bound_suite_with_exact_delta() {
        let config = VerifyConfig {
            matrix: Some(MatrixShape {
                ensemble: Ensemble::Gaussian,
                rows: 6,
                cols: 9,
            }),
            k: 1,
            p: 1.5,
            trials: 30,
            ..VerifyConfig::default()
        };
        let report = run_suite(Suite::Lemma1, &config).unwrap();
        assert_eq!(report.violations, 0);
    }

    #[test]
    fn residual_fit_and_l2_suites_run() {
        let base = VerifyConfig {
            matrix: orthogonal(40),
            k: 1,
            trials: 5,
            use_exact: false,
            premise_samples: 10,
            ..VerifyConfig::default()
        };
        let zhang = run_suite(Suite::Zhang, &base).unwrap();
        assert_eq!(zhang.violations, 0);
        let t2 = run_suite(Suite::Theorem2, &base).unwrap();
        assert_eq!(t2.violations, 0);
    }

    #[test]
    fn missing_matrix_is_a_contract_error() {
        let err = run_suite(Suite::Theorem2, &VerifyConfig::default()).unwrap_err();
        assert!(err.to_string().contains("config.matrix"), "{err}");
        assert!("theorem3".parse::<Suite>().is_err());
        assert_eq!("zhang".parse::<Suite>().unwrap(), Suite::Zhang);
    }
}
