//! Standard errors for the extended-sample estimator.
//!
//! The model-based ("naive") errors of the extended fit treat the admitted
//! rows as if they were part of a random sample and come out far too small.
//! The bootstrap reruns the whole screening pipeline on resampled data, and
//! for simulated scenarios the spread of estimates over fresh draws gives the
//! actual sampling error for comparison.

use nalgebra::DVector;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::extension::{extend_sample, screen_self, ExtensionConfig};
use crate::regression::{fit_ols, naive_standard_errors, Dataset};
use crate::rng::{self, StreamRng};
use crate::simulation::scenario::{gen_replication, PollutionMode, ScenarioSpec};
use crate::stats::{columnwise_mean, columnwise_sd};

/// Redraws allowed per replication before the bootstrap gives up.
pub const MAX_RETRIES: usize = 10;

/// How bootstrap samples are drawn. Only stratified resampling is offered:
/// `S₀` and `S^NP` are resampled separately with their sizes preserved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResampleScheme {
    #[default]
    Stratified,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapSpec {
    pub n_boot: usize,
    pub seed: u64,
    pub resample_scheme: ResampleScheme,
}

impl BootstrapSpec {
    pub fn new(n_boot: usize, seed: u64) -> Result<Self> {
        if n_boot < 2 {
            return Err(Error::Domain(format!(
                "n_boot = {n_boot}; at least two replications are needed for a standard deviation"
            )));
        }
        Ok(BootstrapSpec {
            n_boot,
            seed,
            resample_scheme: ResampleScheme::Stratified,
        })
    }
}

impl Default for BootstrapSpec {
    fn default() -> Self {
        BootstrapSpec::new(100, 0).expect("valid default")
    }
}

fn resample(data: &Dataset, rng: &mut StreamRng) -> Dataset {
    let n = data.n();
    let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
    data.select(&idx)
}

/// Runs `estimate` once per replication, each on its own stream, retrying
/// failed draws up to [`MAX_RETRIES`] times.
fn replicate<F>(spec: &BootstrapSpec, estimate: F) -> Result<Vec<DVector<f64>>>
where
    F: Fn(&mut StreamRng) -> Result<DVector<f64>> + Sync,
{
    BootstrapSpec::new(spec.n_boot, spec.seed)?;
    let outcomes: Vec<(std::result::Result<DVector<f64>, usize>, usize)> = (0..spec.n_boot)
        .into_par_iter()
        .map(|b| {
            let mut stream = rng::stream(spec.seed, b as u64);
            let mut failed = 0;
            for _ in 0..=MAX_RETRIES {
                match estimate(&mut stream) {
                    Ok(beta) => return (Ok(beta), failed),
                    Err(_) => failed += 1,
                }
            }
            (Err(b), failed)
        })
        .collect();

    let attempts: usize = outcomes
        .iter()
        .map(|(o, failed)| failed + usize::from(o.is_ok()))
        .sum();
    let failed_total: usize = outcomes.iter().map(|(_, f)| f).sum();
    let mut draws = Vec::with_capacity(spec.n_boot);
    for (outcome, _) in outcomes {
        match outcome {
            Ok(beta) => draws.push(beta),
            Err(replication) => {
                return Err(Error::BootstrapDegenerate {
                    replication,
                    attempts: MAX_RETRIES + 1,
                    failure_rate: failed_total as f64 / attempts as f64,
                })
            }
        }
    }
    Ok(draws)
}

/// Extended-sample coefficients over bootstrap replications.
pub fn bootstrap_replicates(
    prob_sample: &Dataset,
    nonprob_sample: &Dataset,
    config: &ExtensionConfig,
    spec: &BootstrapSpec,
) -> Result<Vec<DVector<f64>>> {
    prob_sample.check_compatible(nonprob_sample)?;
    fit_ols(prob_sample)?;
    replicate(spec, |stream| {
        let s0 = resample(prob_sample, stream);
        let snp = resample(nonprob_sample, stream);
        Ok(extend_sample(&s0, &snp, config)?.extended_fit.coefficients)
    })
}

/// Bootstrap standard errors of the extended-sample coefficients (divisor
/// `n_boot − 1`).
pub fn bootstrap_se(
    prob_sample: &Dataset,
    nonprob_sample: &Dataset,
    config: &ExtensionConfig,
    spec: &BootstrapSpec,
) -> Result<Vec<f64>> {
    Ok(columnwise_sd(&bootstrap_replicates(prob_sample, nonprob_sample, config, spec)?))
}

/// Bootstrap standard errors of the reduced-sample fit: each resample is
/// screened against itself and refitted on the rows it keeps.
pub fn bootstrap_se_robustified(
    prob_sample: &Dataset,
    config: &ExtensionConfig,
    spec: &BootstrapSpec,
) -> Result<Vec<f64>> {
    fit_ols(prob_sample)?;
    let draws = replicate(spec, |stream| {
        let s0 = resample(prob_sample, stream);
        let screened = screen_self(&s0, config)?;
        let reduced = s0.select(&screened.included_ids);
        Ok(fit_ols(&reduced)?.coefficients)
    })?;
    Ok(columnwise_sd(&draws))
}

/// Spread of the extended-sample estimates over `n_rep` fresh draws of a
/// scenario with fixed pollution.
pub fn actual_se_approximation(scenario: &ScenarioSpec, config: &ExtensionConfig, n_rep: usize) -> Result<Vec<f64>> {
    Ok(columnwise_sd(&actual_replicates(scenario, config, n_rep)?))
}

fn actual_replicates(scenario: &ScenarioSpec, config: &ExtensionConfig, n_rep: usize) -> Result<Vec<DVector<f64>>> {
    if matches!(scenario.pollution_mode, PollutionMode::Random { .. }) {
        return Err(Error::Domain(
            "actual standard errors need a scenario with fixed pollution parameters".into(),
        ));
    }
    if n_rep < 2 {
        return Err(Error::Domain(format!("n_rep = {n_rep} < 2")));
    }
    (0..n_rep)
        .into_par_iter()
        .map(|i| {
            let data = gen_replication(scenario, i as u64)?;
            Ok(extend_sample(&data.prob_sample, &data.nonprob_sample, config)?
                .extended_fit
                .coefficients)
        })
        .collect()
}

/// The four kinds of standard error compared for a simulated setting.
#[derive(Debug, Clone, PartialEq)]
pub struct SeComparison {
    /// Model-based errors of the probability-sample fit, averaged over draws.
    pub prob_sample: Vec<f64>,
    /// Model-based errors of the extended fit, averaged over draws.
    pub naive: Vec<f64>,
    /// Spread of extended estimates over draws.
    pub actual: Vec<f64>,
    /// Bootstrap errors computed on the first draw.
    pub bootstrap: Vec<f64>,
}

impl SeComparison {
    pub fn rows(&self) -> [(&'static str, &[f64]); 4] {
        [
            ("prob_sample", &self.prob_sample),
            ("naive", &self.naive),
            ("actual", &self.actual),
            ("bootstrap", &self.bootstrap),
        ]
    }

    /// Coefficient-wise average over several comparisons.
    pub fn average(items: &[SeComparison]) -> SeComparison {
        let avg = |f: fn(&SeComparison) -> &Vec<f64>| {
            columnwise_mean(&items.iter().map(|c| f(c).clone()).collect::<Vec<_>>())
        };
        SeComparison {
            prob_sample: avg(|c| &c.prob_sample),
            naive: avg(|c| &c.naive),
            actual: avg(|c| &c.actual),
            bootstrap: avg(|c| &c.bootstrap),
        }
    }
}

/// Standard errors of one simulated study: `n_rep` draws from `scenario`
/// give the actual errors and averaged model-based errors; the bootstrap runs
/// on draw 0.
pub fn se_comparison(
    scenario: &ScenarioSpec,
    config: &ExtensionConfig,
    n_rep: usize,
    boot: &BootstrapSpec,
) -> Result<SeComparison> {
    let actual = actual_se_approximation(scenario, config, n_rep)?;
    let naive_pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..n_rep)
        .into_par_iter()
        .map(|i| {
            let data = gen_replication(scenario, i as u64)?;
            let result = extend_sample(&data.prob_sample, &data.nonprob_sample, config)?;
            Ok((
                naive_standard_errors(&result.base_fit).iter().copied().collect(),
                naive_standard_errors(&result.extended_fit).iter().copied().collect(),
            ))
        })
        .collect::<Result<_>>()?;
    let (prob, naive): (Vec<_>, Vec<_>) = naive_pairs.into_iter().unzip();
    let first = gen_replication(scenario, 0)?;
    let bootstrap = bootstrap_se(&first.prob_sample, &first.nonprob_sample, config, boot)?;
    Ok(SeComparison {
        prob_sample: columnwise_mean(&prob),
        naive: columnwise_mean(&naive),
        actual,
        bootstrap,
    })
}
