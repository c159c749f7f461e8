//! Screening of non-probability observations against a probability sample.
//!
//! Each candidate is added on its own to the probability sample `S₀` and the
//! augmented model is refitted. The candidate is admitted when
//!
//! * its studentized residual in the augmented fit satisfies `|r*| ≤ t_s`, and
//! * the relative coefficient change `‖β̂₀ − β̂₍ᵢ₎‖ / ‖β̂₀‖` is below `t_c`.
//!
//! `t_s` is the `(1 − α_st)` standard normal quantile. `t_c` is the empirical
//! `(1 − α_ch)` quantile of the leave-one-out relative changes inside `S₀`,
//! which describes how much a single observation from the target population
//! is expected to move the estimate.

use std::collections::BTreeSet;

use nalgebra::DVector;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quantile::{empirical_quantile, normal_quantile};
use crate::regression::{case_delta_beta, fit_ols, Dataset, Observation, OlsFit};

/// Norms of coefficient vectors below this are treated as zero.
pub const NORM_EPS: f64 = 1e-12;

/// Which coefficients enter the relative-change norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormScope {
    #[default]
    FullCoefficients,
    SlopesOnly,
}

impl NormScope {
    /// Euclidean norm of `beta` restricted to this scope.
    pub fn norm(self, beta: &DVector<f64>, has_intercept: bool) -> f64 {
        match self {
            NormScope::SlopesOnly if has_intercept => beta.rows(1, beta.len() - 1).norm(),
            _ => beta.norm(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtensionConfig {
    pub alpha_st: f64,
    pub alpha_ch: f64,
    pub norm_scope: NormScope,
}

impl Default for ExtensionConfig {
    fn default() -> Self {
        ExtensionConfig {
            alpha_st: 0.05,
            alpha_ch: 0.05,
            norm_scope: NormScope::FullCoefficients,
        }
    }
}

impl ExtensionConfig {
    pub fn new(alpha_st: f64, alpha_ch: f64, norm_scope: NormScope) -> Result<Self> {
        let config = ExtensionConfig {
            alpha_st,
            alpha_ch,
            norm_scope,
        };
        config.validate()?;
        Ok(config)
    }

    /// Same level for both gates.
    pub fn symmetric(alpha: f64) -> Result<Self> {
        Self::new(alpha, alpha, NormScope::FullCoefficients)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, a) in [("alpha_st", self.alpha_st), ("alpha_ch", self.alpha_ch)] {
            if !(a > 0.0 && a < 1.0) {
                return Err(Error::Domain(format!("{name} = {a} outside (0, 1)")));
            }
        }
        Ok(())
    }
}

/// Outcome of screening one candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateDecision {
    /// Position of the candidate in the non-probability sample.
    pub id: usize,
    pub studentized_residual: f64,
    pub relative_change: f64,
    pub residual_pass: bool,
    pub change_pass: bool,
    /// Set when the augmented fit could not be evaluated; the candidate is
    /// then excluded.
    pub diagnostic: Option<String>,
}

impl CandidateDecision {
    pub fn included(&self) -> bool {
        self.residual_pass && self.change_pass && self.diagnostic.is_none()
    }

    fn rejected(id: usize, diagnostic: String) -> Self {
        CandidateDecision {
            id,
            studentized_residual: f64::NAN,
            relative_change: f64::NAN,
            residual_pass: false,
            change_pass: false,
            diagnostic: Some(diagnostic),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionResult {
    /// Sorted ids of admitted candidates.
    pub included_ids: Vec<usize>,
    pub decisions: Vec<CandidateDecision>,
    pub t_s: f64,
    pub t_c: f64,
    pub base_fit: OlsFit,
    pub extended_fit: OlsFit,
    pub extended_sample: Dataset,
}

impl ExtensionResult {
    pub fn extended_size(&self) -> usize {
        self.extended_sample.n()
    }

    pub fn included_set(&self) -> BTreeSet<usize> {
        self.included_ids.iter().copied().collect()
    }
}

fn base_norm(fit: &OlsFit, scope: NormScope) -> Result<f64> {
    let norm = scope.norm(&fit.coefficients, fit.has_intercept());
    if norm.is_nan() || norm <= NORM_EPS {
        return Err(Error::DegenerateNorm { norm });
    }
    Ok(norm)
}

/// Relative leave-one-out changes `ch_i = ‖β̂₀ − β̂₋ᵢ‖ / ‖β̂₀‖` for every row of
/// the probability sample, computed from the closed-form deletion formula.
pub fn loo_change_distribution(base_fit: &OlsFit, scope: NormScope) -> Result<Vec<f64>> {
    let norm = base_norm(base_fit, scope)?;
    (0..base_fit.n())
        .map(|i| {
            let delta = case_delta_beta(base_fit, i)?;
            Ok(scope.norm(&delta, base_fit.has_intercept()) / norm)
        })
        .collect()
}

/// Change threshold: empirical `(1 − α_ch)` quantile of `changes`.
pub fn threshold_tc(changes: &[f64], alpha_ch: f64) -> Result<f64> {
    if !(alpha_ch > 0.0 && alpha_ch < 1.0) {
        return Err(Error::Domain(format!("alpha_ch = {alpha_ch} outside (0, 1)")));
    }
    if changes.iter().any(|c| *c < 0.0) {
        return Err(Error::Domain("negative relative change".into()));
    }
    empirical_quantile(changes, 1.0 - alpha_ch)
}

/// Residual threshold: standard normal `(1 − α_st)` quantile.
pub fn threshold_ts(alpha_st: f64) -> Result<f64> {
    if !(alpha_st > 0.0 && alpha_st < 1.0) {
        return Err(Error::Domain(format!("alpha_st = {alpha_st} outside (0, 1)")));
    }
    normal_quantile(1.0 - alpha_st)
}

/// Screens one candidate against `S₀` alone. Never fails: a candidate whose
/// augmented fit is degenerate comes back excluded with a diagnostic.
pub fn evaluate_candidate(
    prob_sample: &Dataset,
    candidate: &Observation,
    id: usize,
    config: &ExtensionConfig,
    t_s: f64,
    t_c: f64,
    base_fit: &OlsFit,
) -> CandidateDecision {
    let augmented = match prob_sample.push(candidate) {
        Ok(d) => d,
        Err(e) => return CandidateDecision::rejected(id, e.to_string()),
    };
    let fit = match fit_ols(&augmented) {
        Ok(f) => f,
        Err(e) => return CandidateDecision::rejected(id, e.to_string()),
    };
    let last = augmented.n() - 1;
    let stud = match fit.studentized_residual(last) {
        Ok(s) => s,
        Err(e) => return CandidateDecision::rejected(id, e.to_string()),
    };
    let norm = match base_norm(base_fit, config.norm_scope) {
        Ok(n) => n,
        Err(e) => return CandidateDecision::rejected(id, e.to_string()),
    };
    let shift = &base_fit.coefficients - &fit.coefficients;
    let change = config.norm_scope.norm(&shift, base_fit.has_intercept()) / norm;

    if !stud.is_finite() || !change.is_finite() {
        return CandidateDecision::rejected(id, "non-finite screening statistic".into());
    }
    CandidateDecision {
        id,
        studentized_residual: stud,
        relative_change: change,
        residual_pass: stud.abs() <= t_s,
        change_pass: change < t_c,
        diagnostic: None,
    }
}

/// Thresholds `(t_s, t_c)` calibrated on the probability sample.
pub fn calibrate_thresholds(base_fit: &OlsFit, config: &ExtensionConfig) -> Result<(f64, f64)> {
    config.validate()?;
    let changes = loo_change_distribution(base_fit, config.norm_scope)?;
    Ok((threshold_ts(config.alpha_st)?, threshold_tc(&changes, config.alpha_ch)?))
}

/// Screens every observation of `nonprob_sample` and fits the extended sample.
pub fn extend_sample(
    prob_sample: &Dataset,
    nonprob_sample: &Dataset,
    config: &ExtensionConfig,
) -> Result<ExtensionResult> {
    prob_sample.check_compatible(nonprob_sample)?;
    let base_fit = fit_ols(prob_sample)?;
    let (t_s, t_c) = calibrate_thresholds(&base_fit, config)?;

    let decisions: Vec<CandidateDecision> = (0..nonprob_sample.n())
        .into_par_iter()
        .map(|i| {
            let candidate = nonprob_sample.observation(i);
            evaluate_candidate(prob_sample, &candidate, i, config, t_s, t_c, &base_fit)
        })
        .collect();

    let included_ids: Vec<usize> = decisions
        .iter()
        .filter(|d| d.included())
        .map(|d| d.id)
        .collect();

    let (extended_sample, extended_fit) = if included_ids.is_empty() {
        (prob_sample.clone(), base_fit.clone())
    } else {
        let extended = prob_sample.concat(&nonprob_sample.select(&included_ids))?;
        let fit = fit_ols(&extended)?;
        (extended, fit)
    };

    Ok(ExtensionResult {
        included_ids,
        decisions,
        t_s,
        t_c,
        base_fit,
        extended_fit,
        extended_sample,
    })
}

/// Screens the probability sample against itself.
pub fn screen_self(prob_sample: &Dataset, config: &ExtensionConfig) -> Result<ExtensionResult> {
    extend_sample(prob_sample, prob_sample, config)
}

/// The probability sample reduced to the rows it admits when used as its own
/// candidate pool. Kept rows appear in their original order.
pub fn robustify(prob_sample: &Dataset, config: &ExtensionConfig) -> Result<Dataset> {
    let screened = screen_self(prob_sample, config)?;
    Ok(prob_sample.select(&screened.included_ids))
}
