//! Regression estimation from a probability sample extended with screened
//! observations from a non-probability sample.
//!
//! A small probability sample `S₀` gives unbiased but noisy coefficient
//! estimates. A larger non-probability sample mixes observations from the
//! same population with polluted ones. Each non-probability observation is
//! added to `S₀` on its own and kept only if its studentized residual and
//! the relative change it causes in the coefficients both look like what
//! `S₀` itself produces. The kept rows form the extended sample.
//!
//! ```
//! use nonprob_extend::{extend_sample, Dataset, ExtensionConfig};
//!
//! let prob = Dataset::from_rows(
//!     &(0..30)
//!         .map(|i| {
//!             let x = i as f64 / 10.0;
//!             (1.0 + 2.0 * x + [0.3, -0.2, 0.1, -0.4, 0.2][i % 5], vec![x])
//!         })
//!         .collect::<Vec<_>>(),
//!     1,
//! )?;
//! let candidates = Dataset::from_rows(&[(3.05, vec![1.0]), (40.0, vec![1.5])], 1)?;
//! let result = extend_sample(&prob, &candidates, &ExtensionConfig::default())?;
//! assert_eq!(result.included_ids, vec![0]);
//! # Ok::<(), nonprob_extend::Error>(())
//! ```
//!
//! Modules:
//!
//! - [`regression`]: least squares and case diagnostics
//! - [`extension`]: screening and the extended sample
//! - [`tuning`]: cross-validated choice of the screening levels
//! - [`inference`]: naive, bootstrap and simulated standard errors
//! - [`simulation`]: scenario generators and replication studies
//! - [`io`] and [`cli`]: CSV and config files, the command-line workflows

pub mod cli;
pub mod error;
pub mod extension;
pub mod inference;
pub mod io;
pub mod quantile;
pub mod regression;
pub mod rng;
pub mod simulation;
pub mod stats;
pub mod tuning;

pub use error::{Error, Result};
pub use extension::{
    evaluate_candidate, extend_sample, loo_change_distribution, robustify, screen_self, threshold_tc,
    threshold_ts, CandidateDecision, ExtensionConfig, ExtensionResult, NormScope,
};
pub use inference::{actual_se_approximation, bootstrap_se, se_comparison, BootstrapSpec, SeComparison};
pub use regression::{case_delta_beta, fit_ols, naive_standard_errors, studentized_residuals, Dataset, Observation, OlsFit};
pub use simulation::{run_study, ScenarioSpec, StudyReport};
pub use tuning::{cv_score, kfold_split, select_alphas, CvPlan};
