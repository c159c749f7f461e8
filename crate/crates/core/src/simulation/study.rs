//! Multi-replication studies.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::extension::{extend_sample, ExtensionConfig};
use crate::regression::fit_ols;
use crate::rng;
use crate::simulation::metrics::{hits_false_positives, mse, relative_mse};
use crate::simulation::scenario::{gen_scenario_with_rng, ScenarioSpec};
use crate::stats::{mean, median, sample_sd};
use crate::tuning::{select_alphas, CvPlan};

/// Metrics of one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationRecord {
    pub replication: usize,
    pub mse_pse: f64,
    pub mse_exte: f64,
    /// `None` when the extended estimate recovered the truth exactly.
    pub mse_r: Option<f64>,
    pub hits: f64,
    pub false_positives: f64,
    pub extended_size: usize,
    pub alpha_st: f64,
    pub alpha_ch: f64,
    pub beta_pse: Vec<f64>,
    pub beta_exte: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationFailure {
    pub replication: usize,
    pub code: &'static str,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricSummary {
    pub metric: &'static str,
    pub mean: f64,
    pub sd: f64,
    pub median: f64,
    pub count: usize,
}

impl MetricSummary {
    fn of(metric: &'static str, values: &[f64]) -> Self {
        MetricSummary {
            metric,
            mean: mean(values),
            sd: sample_sd(values),
            median: median(values),
            count: values.len(),
        }
    }
}

/// Names of the per-replication metrics, in report order.
pub const METRICS: [&str; 8] = [
    "mse_pse",
    "mse_exte",
    "mse_r",
    "hits",
    "false_positives",
    "extended_size",
    "alpha_st",
    "alpha_ch",
];

impl ReplicationRecord {
    /// Value of a named metric; `None` for an undefined `mse_r`.
    pub fn metric(&self, name: &str) -> Option<f64> {
        match name {
            "mse_pse" => Some(self.mse_pse),
            "mse_exte" => Some(self.mse_exte),
            "mse_r" => self.mse_r,
            "hits" => Some(self.hits),
            "false_positives" => Some(self.false_positives),
            "extended_size" => Some(self.extended_size as f64),
            "alpha_st" => Some(self.alpha_st),
            "alpha_ch" => Some(self.alpha_ch),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyReport {
    pub per_replication: Vec<ReplicationRecord>,
    pub failures: Vec<ReplicationFailure>,
    pub aggregates: Vec<MetricSummary>,
    pub scenario: ScenarioSpec,
    pub config: ExtensionConfig,
    pub use_cv: bool,
}

impl StudyReport {
    pub fn aggregate(&self, metric: &str) -> Option<&MetricSummary> {
        self.aggregates.iter().find(|m| m.metric == metric)
    }

    pub fn mean_of(&self, metric: &str) -> f64 {
        self.aggregate(metric).map_or(f64::NAN, |m| m.mean)
    }
}

/// Aggregates recomputed from the per-replication records.
pub fn summarize(records: &[ReplicationRecord]) -> Vec<MetricSummary> {
    METRICS
        .iter()
        .map(|&name| {
            let values: Vec<f64> = records.iter().filter_map(|r| r.metric(name)).collect();
            MetricSummary::of(name, &values)
        })
        .collect()
}

/// One replication of the full pipeline.
pub fn run_replication(
    spec: &ScenarioSpec,
    config: &ExtensionConfig,
    index: usize,
    cv: Option<&CvPlan>,
) -> Result<ReplicationRecord> {
    let mut stream = rng::stream(spec.seed, index as u64);
    let data = gen_scenario_with_rng(spec, &mut stream)?;
    let config = match cv {
        Some(template) => {
            let plan = CvPlan {
                seed: stream.random(),
                ..template.clone()
            };
            select_alphas(&data.prob_sample, &data.nonprob_sample, &plan)?.config(config.norm_scope)
        }
        None => *config,
    };
    let base = fit_ols(&data.prob_sample)?;
    let result = extend_sample(&data.prob_sample, &data.nonprob_sample, &config)?;
    let beta_pse: Vec<f64> = base.coefficients.iter().copied().collect();
    let beta_exte: Vec<f64> = result.extended_fit.coefficients.iter().copied().collect();
    let (hits, false_positives) = hits_false_positives(&result, &data.target_flags)?;
    Ok(ReplicationRecord {
        replication: index,
        mse_pse: mse(&beta_pse, &spec.beta0)?,
        mse_exte: mse(&beta_exte, &spec.beta0)?,
        mse_r: relative_mse(&beta_pse, &beta_exte, &spec.beta0)?.ratio(),
        hits,
        false_positives,
        extended_size: result.extended_size(),
        alpha_st: config.alpha_st,
        alpha_ch: config.alpha_ch,
        beta_pse,
        beta_exte,
    })
}

/// Runs `n_datasets` replications; with `use_cv` the levels are chosen per
/// dataset by cross-validation on the default reduced grid.
pub fn run_study(
    spec: &ScenarioSpec,
    config: &ExtensionConfig,
    n_datasets: usize,
    use_cv: bool,
) -> Result<StudyReport> {
    let plan = use_cv.then(CvPlan::default);
    run_study_with_plan(spec, config, n_datasets, plan.as_ref())
}

/// [`run_study`] with an explicit cross-validation plan (its seed is
/// replaced per replication).
pub fn run_study_with_plan(
    spec: &ScenarioSpec,
    config: &ExtensionConfig,
    n_datasets: usize,
    cv: Option<&CvPlan>,
) -> Result<StudyReport> {
    spec.validate()?;
    config.validate()?;
    let outcomes: Vec<Result<ReplicationRecord>> = (0..n_datasets)
        .into_par_iter()
        .map(|i| run_replication(spec, config, i, cv))
        .collect();

    let mut per_replication = Vec::with_capacity(n_datasets);
    let mut failures = Vec::new();
    for (i, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(r) => per_replication.push(r),
            Err(e) => failures.push(ReplicationFailure {
                replication: i,
                code: e.code(),
                message: e.to_string(),
            }),
        }
    }
    if failures.len() * 10 > n_datasets {
        return Err(Error::TooManyFailures {
            failed: failures.len(),
            total: n_datasets,
        });
    }
    Ok(StudyReport {
        aggregates: summarize(&per_replication),
        per_replication,
        failures,
        scenario: spec.clone(),
        config: *config,
        use_cv: cv.is_some(),
    })
}
