//! Accuracy measures comparing the probability-sample and extended estimators.

use crate::error::{Error, Result};
use crate::extension::ExtensionResult;

/// Squared errors below this make the relative MSE meaningless.
pub const EXACT_RECOVERY_EPS: f64 = 1e-24;

/// `‖β̂ − β‖²`.
pub fn mse(beta_hat: &[f64], beta_true: &[f64]) -> Result<f64> {
    if beta_hat.len() != beta_true.len() {
        return Err(Error::Dimension(format!(
            "estimate has length {}, truth has length {}",
            beta_hat.len(),
            beta_true.len()
        )));
    }
    Ok(beta_hat
        .iter()
        .zip(beta_true)
        .map(|(a, b)| (a - b) * (a - b))
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RelativeMse {
    Ratio(f64),
    /// The extended estimate hit the truth, so there is no finite ratio.
    ExactRecovery,
}

impl RelativeMse {
    pub fn ratio(self) -> Option<f64> {
        match self {
            RelativeMse::Ratio(r) => Some(r),
            RelativeMse::ExactRecovery => None,
        }
    }
}

/// `‖β̂_P − β‖² / ‖β̂_ext − β‖²`; above one favors the extended sample.
pub fn relative_mse(beta_pse: &[f64], beta_exte: &[f64], beta_true: &[f64]) -> Result<RelativeMse> {
    let num = mse(beta_pse, beta_true)?;
    let den = mse(beta_exte, beta_true)?;
    if den <= EXACT_RECOVERY_EPS {
        return Ok(RelativeMse::ExactRecovery);
    }
    Ok(RelativeMse::Ratio(num / den))
}

/// Shares of target rows (hits) and polluted rows (false positives) that
/// were admitted. An empty stratum yields zero.
pub fn hits_false_positives(result: &ExtensionResult, target_flags: &[bool]) -> Result<(f64, f64)> {
    if result.decisions.len() != target_flags.len() {
        return Err(Error::Alignment(format!(
            "{} decisions but {} target flags",
            result.decisions.len(),
            target_flags.len()
        )));
    }
    let mut counts = [0usize; 2];
    let mut admitted = [0usize; 2];
    for &flag in target_flags {
        counts[usize::from(flag)] += 1;
    }
    for &id in &result.included_ids {
        let flag = *target_flags
            .get(id)
            .ok_or_else(|| Error::Alignment(format!("included id {id} has no flag")))?;
        admitted[usize::from(flag)] += 1;
    }
    let share = |k: usize| {
        if counts[k] == 0 {
            0.0
        } else {
            admitted[k] as f64 / counts[k] as f64
        }
    };
    Ok((share(1), share(0)))
}
