//! Choice of the screening levels by k-fold cross-validation on the
//! probability sample.
//!
//! Each fold is held out in turn; the remaining rows act as the probability
//! sample for screening, and the extended fit predicts the held-out rows.
//! The score of a grid point is the mean squared prediction error over all
//! held-out rows.

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::extension::{extend_sample, ExtensionConfig, NormScope};
use crate::regression::Dataset;
use crate::rng;

pub const DEFAULT_FOLDS: usize = 5;
pub const DEFAULT_GRID: [f64; 4] = [0.3, 0.2, 0.1, 0.05];

#[derive(Debug, Clone, PartialEq)]
pub struct CvPlan {
    pub k: usize,
    /// `(α_st, α_ch)` pairs.
    pub grid: Vec<(f64, f64)>,
    pub reduced_grid: bool,
    pub norm_scope: NormScope,
    pub seed: u64,
}

impl CvPlan {
    /// Grid with `α_st = α_ch`.
    pub fn reduced(alphas: &[f64], k: usize, seed: u64) -> Result<Self> {
        let plan = CvPlan {
            k,
            grid: alphas.iter().map(|&a| (a, a)).collect(),
            reduced_grid: true,
            norm_scope: NormScope::FullCoefficients,
            seed,
        };
        plan.validate()?;
        Ok(plan)
    }

    /// Cartesian square of `alphas`.
    pub fn full(alphas: &[f64], k: usize, seed: u64) -> Result<Self> {
        let grid = alphas
            .iter()
            .flat_map(|&s| alphas.iter().map(move |&c| (s, c)))
            .collect();
        let plan = CvPlan {
            k,
            grid,
            reduced_grid: false,
            norm_scope: NormScope::FullCoefficients,
            seed,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn with_norm_scope(mut self, scope: NormScope) -> Self {
        self.norm_scope = scope;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::Domain(format!("fold count {} < 2", self.k)));
        }
        if self.grid.is_empty() {
            return Err(Error::Domain("empty alpha grid".into()));
        }
        for &(s, c) in &self.grid {
            ExtensionConfig::new(s, c, self.norm_scope)?;
        }
        Ok(())
    }

    fn config(&self, point: (f64, f64)) -> ExtensionConfig {
        ExtensionConfig {
            alpha_st: point.0,
            alpha_ch: point.1,
            norm_scope: self.norm_scope,
        }
    }
}

impl Default for CvPlan {
    fn default() -> Self {
        CvPlan::reduced(&DEFAULT_GRID, DEFAULT_FOLDS, 0).expect("default grid is valid")
    }
}

/// Random partition of `0..n` into `k` folds whose sizes differ by at most
/// one. Each fold is sorted.
pub fn kfold_split(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 || k > n {
        return Err(Error::InfeasibleSplit { n, k });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::stream(seed, 0));
    let mut folds = vec![Vec::with_capacity(n / k + 1); k];
    for (pos, idx) in order.into_iter().enumerate() {
        folds[pos % k].push(idx);
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

/// Mean squared prediction error over held-out rows for explicit folds.
pub fn cv_score_with_folds(
    prob_sample: &Dataset,
    nonprob_sample: &Dataset,
    config: &ExtensionConfig,
    folds: &[Vec<usize>],
) -> Result<f64> {
    let n = prob_sample.n();
    let fold_sse: Vec<f64> = folds
        .par_iter()
        .enumerate()
        .map(|(j, held_out)| {
            let mut in_fold = vec![false; n];
            for &i in held_out {
                in_fold[i] = true;
            }
            let training: Vec<usize> = (0..n).filter(|&i| !in_fold[i]).collect();
            let train = prob_sample.select(&training);
            let result = extend_sample(&train, nonprob_sample, config).map_err(|e| {
                Error::FoldDegenerate {
                    fold: j,
                    reason: e.to_string(),
                }
            })?;
            let fit = &result.extended_fit;
            Ok(held_out
                .iter()
                .map(|&i| {
                    let obs = prob_sample.observation(i);
                    let err = obs.response - fit.predict(&obs.predictors);
                    err * err
                })
                .sum::<f64>())
        })
        .collect::<Result<_>>()?;
    let held: usize = folds.iter().map(Vec::len).sum();
    Ok(fold_sse.iter().sum::<f64>() / held as f64)
}

/// Cross-validated squared prediction error of `config`.
pub fn cv_score(
    prob_sample: &Dataset,
    nonprob_sample: &Dataset,
    config: &ExtensionConfig,
    plan: &CvPlan,
) -> Result<f64> {
    let folds = kfold_split(prob_sample.n(), plan.k, plan.seed)?;
    cv_score_with_folds(prob_sample, nonprob_sample, config, &folds)
}

/// Score of one grid point; `None` when any fold degenerates.
#[derive(Debug, Clone, PartialEq)]
pub struct GridScore {
    pub alpha_st: f64,
    pub alpha_ch: f64,
    pub score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub alpha_st: f64,
    pub alpha_ch: f64,
    pub score: f64,
    pub scores: Vec<GridScore>,
}

impl Selection {
    pub fn config(&self, norm_scope: NormScope) -> ExtensionConfig {
        ExtensionConfig {
            alpha_st: self.alpha_st,
            alpha_ch: self.alpha_ch,
            norm_scope,
        }
    }
}

/// Scores every grid point on one shared partition and returns the best.
/// Ties go to the larger levels, which admit fewer candidates.
pub fn select_alphas(prob_sample: &Dataset, nonprob_sample: &Dataset, plan: &CvPlan) -> Result<Selection> {
    plan.validate()?;
    let folds = kfold_split(prob_sample.n(), plan.k, plan.seed)?;
    let scores: Vec<GridScore> = plan
        .grid
        .par_iter()
        .map(|&point| GridScore {
            alpha_st: point.0,
            alpha_ch: point.1,
            score: cv_score_with_folds(prob_sample, nonprob_sample, &plan.config(point), &folds).ok(),
        })
        .collect();

    let best = scores
        .iter()
        .filter_map(|g| g.score.map(|s| (s, g)))
        .min_by(|(sa, a), (sb, b)| {
            sa.total_cmp(sb)
                .then(b.alpha_st.total_cmp(&a.alpha_st))
                .then(b.alpha_ch.total_cmp(&a.alpha_ch))
        })
        .map(|(s, g)| (s, g.alpha_st, g.alpha_ch));

    match best {
        Some((score, alpha_st, alpha_ch)) => Ok(Selection {
            alpha_st,
            alpha_ch,
            score,
            scores,
        }),
        None => Err(Error::NoValidAlpha),
    }
}
