//! Generative settings for the simulation studies.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::regression::Dataset;
use crate::rng;

/// How the polluted part of the non-probability sample departs from the
/// target population.
#[derive(Debug, Clone, PartialEq)]
pub enum PollutionMode {
    /// Predictor means `mu0 + mu_shift` and coefficients `beta_polluted`.
    Fixed {
        mu_shift: Vec<f64>,
        beta_polluted: Vec<f64>,
    },
    /// Per dataset, every predictor mean is shifted by `sigma_loc · N(0,1)`
    /// and every coefficient by `sigma_par · N(0,1)`.
    Random { sigma_loc: f64, sigma_par: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub p: usize,
    pub n: usize,
    pub n1: usize,
    pub n2: usize,
    pub mu0: Vec<f64>,
    pub pairwise_corr: f64,
    /// Intercept first.
    pub beta0: Vec<f64>,
    pub noise_var_prob: f64,
    pub noise_var_target_np: f64,
    pub noise_var_polluted: f64,
    pub pollution_mode: PollutionMode,
    pub seed: u64,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Domain(m));
        if self.p == 0 {
            return bad("scenario needs at least one predictor".into());
        }
        if self.mu0.len() != self.p {
            return bad(format!("mu0 has length {}, expected {}", self.mu0.len(), self.p));
        }
        if self.beta0.len() != self.p + 1 {
            return bad(format!("beta0 has length {}, expected {}", self.beta0.len(), self.p + 1));
        }
        check_correlation(self.p, self.pairwise_corr)?;
        for (name, v) in [
            ("noise_var_prob", self.noise_var_prob),
            ("noise_var_target_np", self.noise_var_target_np),
            ("noise_var_polluted", self.noise_var_polluted),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("{name} = {v} must be a finite non-negative variance"));
            }
        }
        match &self.pollution_mode {
            PollutionMode::Fixed {
                mu_shift,
                beta_polluted,
            } => {
                if mu_shift.len() != self.p {
                    return bad(format!("mu_shift has length {}, expected {}", mu_shift.len(), self.p));
                }
                if beta_polluted.len() != self.p + 1 {
                    return bad(format!(
                        "beta_polluted has length {}, expected {}",
                        beta_polluted.len(),
                        self.p + 1
                    ));
                }
            }
            PollutionMode::Random {
                sigma_loc,
                sigma_par,
            } => {
                if !(*sigma_loc >= 0.0 && *sigma_par >= 0.0) {
                    return bad("pollution scales must be non-negative".into());
                }
            }
        }
        if self.n < self.p + 2 {
            return bad(format!("n = {} is below p + 2 = {}", self.n, self.p + 2));
        }
        Ok(())
    }

    pub fn with_sizes(mut self, n: usize, n1: usize, n2: usize) -> Self {
        self.n = n;
        self.n1 = n1;
        self.n2 = n2;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn univariate(beta_polluted: [f64; 2], noise_var_polluted: f64) -> Self {
        ScenarioSpec {
            p: 1,
            n: 40,
            n1: 200,
            n2: 200,
            mu0: vec![1.0],
            pairwise_corr: 0.0,
            beta0: vec![1.0, 1.0],
            noise_var_prob: 1.0,
            noise_var_target_np: 1.0,
            noise_var_polluted,
            pollution_mode: PollutionMode::Fixed {
                mu_shift: vec![1.0],
                beta_polluted: beta_polluted.to_vec(),
            },
            seed: 0,
        }
    }

    /// One predictor; polluted slope has the opposite sign.
    pub fn setting_a() -> Self {
        Self::univariate([2.0, -1.0], 4.0)
    }

    /// One predictor; polluted slope is milder but the noise is larger.
    pub fn setting_b() -> Self {
        Self::univariate([3.0, 0.5], 9.0)
    }

    pub fn setting_c() -> Self {
        Self::univariate([3.0, -2.0], 4.0)
    }

    /// Four correlated predictors with randomly shifted pollution.
    pub fn setting_1() -> Self {
        ScenarioSpec {
            p: 4,
            n: 40,
            n1: 200,
            n2: 200,
            mu0: vec![1.0; 4],
            pairwise_corr: 0.3,
            beta0: vec![1.0, 1.0, 2.0, 3.0, 4.0],
            noise_var_prob: 1.0,
            noise_var_target_np: 1.0,
            noise_var_polluted: 2.0,
            pollution_mode: PollutionMode::Random {
                sigma_loc: 1.0,
                sigma_par: 1.0,
            },
            seed: 0,
        }
    }

    pub fn setting_2(sigma_par: f64) -> Self {
        let mut s = Self::setting_1();
        s.pollution_mode = PollutionMode::Random {
            sigma_loc: 1.0,
            sigma_par,
        };
        s
    }

    /// Eight correlated predictors.
    pub fn setting_3() -> Self {
        ScenarioSpec {
            p: 8,
            n: 40,
            n1: 200,
            n2: 200,
            mu0: vec![1.0; 8],
            pairwise_corr: 0.3,
            beta0: setting_3_beta(),
            noise_var_prob: 1.0,
            noise_var_target_np: 1.0,
            noise_var_polluted: 4.0,
            pollution_mode: PollutionMode::Random {
                sigma_loc: 2.0,
                sigma_par: 1.0,
            },
            seed: 0,
        }
    }

    /// Setting 1 with the noise variances inverted: the probability sample is
    /// noisier than the polluted sample.
    pub fn setting_1_inverted_noise() -> Self {
        let mut s = Self::setting_1();
        s.noise_var_prob = 4.0;
        s.noise_var_target_np = 4.0;
        s.noise_var_polluted = 1.0;
        s
    }

    /// Four predictors, fixed pollution: means 2 and slopes shifted by
    /// `(1, −1, 1, −1)`.
    pub fn setting_b1() -> Self {
        let mut s = Self::setting_1();
        s.pollution_mode = PollutionMode::Fixed {
            mu_shift: vec![1.0; 4],
            beta_polluted: vec![1.0, 2.0, 1.0, 4.0, 3.0],
        };
        s
    }

    pub fn setting_b2() -> Self {
        let mut s = Self::setting_b1();
        s.noise_var_prob = 4.0;
        s.noise_var_target_np = 4.0;
        s.noise_var_polluted = 9.0;
        s
    }

    pub fn setting_b3() -> Self {
        let beta0 = setting_3_beta();
        let shift = [0.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0];
        let mut s = Self::setting_3();
        s.pollution_mode = PollutionMode::Fixed {
            mu_shift: vec![2.0; 8],
            beta_polluted: beta0.iter().zip(shift).map(|(b, d)| b + d).collect(),
        };
        s
    }

    /// Built-in scenario by name.
    pub fn preset(name: &str) -> Option<Self> {
        Some(match name {
            "a" | "setting_a" => Self::setting_a(),
            "b" | "setting_b" => Self::setting_b(),
            "c" | "setting_c" => Self::setting_c(),
            "1" | "setting_1" => Self::setting_1(),
            "2" | "setting_2" => Self::setting_2(2.0),
            "2-4" | "setting_2_sigma4" => Self::setting_2(4.0),
            "3" | "setting_3" => Self::setting_3(),
            "1-inverted" | "setting_1_inverted_noise" => Self::setting_1_inverted_noise(),
            "b1" | "setting_b1" => Self::setting_b1(),
            "b2" | "setting_b2" => Self::setting_b2(),
            "b3" | "setting_b3" => Self::setting_b3(),
            _ => return None,
        })
    }
}

fn setting_3_beta() -> Vec<f64> {
    vec![1.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0]
}

fn check_correlation(p: usize, rho: f64) -> Result<()> {
    let lower = if p > 1 { -1.0 / (p as f64 - 1.0) } else { -1.0 };
    if !(rho > lower && rho < 1.0) {
        return Err(Error::Domain(format!(
            "pairwise correlation {rho} outside ({lower}, 1) for {p} predictors"
        )));
    }
    Ok(())
}

/// `count` rows of a multivariate normal with mean `mu`, unit variances and
/// common pairwise correlation, via the Cholesky factor of the correlation
/// matrix.
pub fn gen_correlated_normals<R: Rng + ?Sized>(
    count: usize,
    mu: &[f64],
    pairwise_corr: f64,
    rng: &mut R,
) -> Result<DMatrix<f64>> {
    let p = mu.len();
    check_correlation(p.max(1), pairwise_corr)?;
    let corr = DMatrix::from_fn(p, p, |i, j| if i == j { 1.0 } else { pairwise_corr });
    let chol = corr
        .cholesky()
        .ok_or_else(|| Error::Domain("correlation matrix is not positive definite".into()))?;
    let l = chol.l();
    let mut out = DMatrix::zeros(count, p);
    let mut z = DVector::zeros(p);
    for i in 0..count {
        for v in z.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        let x = &l * &z;
        for j in 0..p {
            out[(i, j)] = mu[j] + x[j];
        }
    }
    Ok(out)
}

/// One generated dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedData {
    pub prob_sample: Dataset,
    pub nonprob_sample: Dataset,
    /// `true` where the non-probability row comes from the target population.
    pub target_flags: Vec<bool>,
    /// Predictor means used for the polluted rows.
    pub polluted_mu: Vec<f64>,
    /// Coefficients used for the polluted rows.
    pub polluted_beta: Vec<f64>,
}

fn draw_sample<R: Rng + ?Sized>(
    count: usize,
    mu: &[f64],
    corr: f64,
    beta: &[f64],
    noise_var: f64,
    rng: &mut R,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let x = gen_correlated_normals(count, mu, corr, rng)?;
    let sd = noise_var.sqrt();
    let y = DVector::from_fn(count, |i, _| {
        let signal = beta[0] + (0..mu.len()).map(|j| beta[j + 1] * x[(i, j)]).sum::<f64>();
        let eps: f64 = rng.sample(StandardNormal);
        signal + sd * eps
    });
    Ok((y, x))
}

/// Draws `S₀`, `S₁`, `S₂` from `spec` using `rng`; the non-probability sample
/// is the shuffled union of `S₁` and `S₂`.
pub fn gen_scenario_with_rng<R: Rng + ?Sized>(spec: &ScenarioSpec, rng: &mut R) -> Result<GeneratedData> {
    spec.validate()?;
    let p = spec.p;
    let (polluted_mu, polluted_beta) = match &spec.pollution_mode {
        PollutionMode::Fixed {
            mu_shift,
            beta_polluted,
        } => (
            spec.mu0.iter().zip(mu_shift).map(|(m, s)| m + s).collect::<Vec<_>>(),
            beta_polluted.clone(),
        ),
        PollutionMode::Random {
            sigma_loc,
            sigma_par,
        } => {
            let mu: Vec<f64> = spec
                .mu0
                .iter()
                .map(|m| m + sigma_loc * rng.sample::<f64, _>(StandardNormal))
                .collect();
            let beta: Vec<f64> = spec
                .beta0
                .iter()
                .map(|b| b + sigma_par * rng.sample::<f64, _>(StandardNormal))
                .collect();
            (mu, beta)
        }
    };

    let (y0, x0) = draw_sample(spec.n, &spec.mu0, spec.pairwise_corr, &spec.beta0, spec.noise_var_prob, rng)?;
    let (y1, x1) = draw_sample(
        spec.n1,
        &spec.mu0,
        spec.pairwise_corr,
        &spec.beta0,
        spec.noise_var_target_np,
        rng,
    )?;
    let (y2, x2) = draw_sample(
        spec.n2,
        &polluted_mu,
        spec.pairwise_corr,
        &polluted_beta,
        spec.noise_var_polluted,
        rng,
    )?;

    let m = spec.n1 + spec.n2;
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(rng);
    let mut y = DVector::zeros(m);
    let mut x = DMatrix::zeros(m, p);
    let mut target_flags = Vec::with_capacity(m);
    for (row, &src) in order.iter().enumerate() {
        let (yv, xs, k, flag) = if src < spec.n1 {
            (&y1, &x1, src, true)
        } else {
            (&y2, &x2, src - spec.n1, false)
        };
        y[row] = yv[k];
        x.row_mut(row).copy_from(&xs.row(k));
        target_flags.push(flag);
    }

    Ok(GeneratedData {
        prob_sample: Dataset::new(y0, x0, true)?,
        nonprob_sample: Dataset::new(y, x, true)?,
        target_flags,
        polluted_mu,
        polluted_beta,
    })
}

/// Draws the dataset for replication `index` of `spec`.
pub fn gen_replication(spec: &ScenarioSpec, index: u64) -> Result<GeneratedData> {
    gen_scenario_with_rng(spec, &mut rng::stream(spec.seed, index))
}

/// Draws one dataset from `spec.seed`.
pub fn gen_scenario(spec: &ScenarioSpec) -> Result<GeneratedData> {
    gen_replication(spec, 0)
}
