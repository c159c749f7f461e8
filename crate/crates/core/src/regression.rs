//! Least-squares fitting and the case diagnostics derived from it.
//!
//! Fits are computed from a Householder QR factorization of the design
//! matrix. The inverse cross-product `(XᵀX)⁻¹ = R⁻¹R⁻ᵀ` is recovered from the
//! triangular factor and the hat diagonals are the squared row norms of the
//! thin `Q` factor, so the normal equations are never formed.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Ratio of smallest to largest `|R_jj|` below which a design is singular.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Leverages within this distance of one are treated as degenerate.
pub const LEVERAGE_EPS: f64 = 1e-10;

/// Responses plus raw covariates. The constant column is never stored; fits
/// prepend it when `has_intercept` is set.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    responses: DVector<f64>,
    predictors: DMatrix<f64>,
    has_intercept: bool,
}

impl Dataset {
    pub fn new(responses: DVector<f64>, predictors: DMatrix<f64>, has_intercept: bool) -> Result<Self> {
        if responses.len() != predictors.nrows() {
            return Err(Error::InvalidDataset(format!(
                "{} responses but {} predictor rows",
                responses.len(),
                predictors.nrows()
            )));
        }
        if let Some(i) = responses.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset(format!("non-finite response at row {i}")));
        }
        if let Some(k) = predictors.iter().position(|v| !v.is_finite()) {
            // column-major storage
            let (row, col) = (k % predictors.nrows(), k / predictors.nrows());
            return Err(Error::InvalidDataset(format!(
                "non-finite predictor at row {row}, column {col}"
            )));
        }
        Ok(Dataset {
            responses,
            predictors,
            has_intercept,
        })
    }

    /// Intercept model from row slices `(y, x)`.
    pub fn from_rows(rows: &[(f64, Vec<f64>)], p: usize) -> Result<Self> {
        let n = rows.len();
        let mut x = DMatrix::zeros(n, p);
        let mut y = DVector::zeros(n);
        for (i, (yi, xi)) in rows.iter().enumerate() {
            if xi.len() != p {
                return Err(Error::InvalidDataset(format!(
                    "row {i} has {} predictors, expected {p}",
                    xi.len()
                )));
            }
            y[i] = *yi;
            for (j, v) in xi.iter().enumerate() {
                x[(i, j)] = *v;
            }
        }
        Dataset::new(y, x, true)
    }

    /// An intercept model with no rows and `p` predictors.
    pub fn empty(p: usize) -> Self {
        Dataset {
            responses: DVector::zeros(0),
            predictors: DMatrix::zeros(0, p),
            has_intercept: true,
        }
    }

    pub fn responses(&self) -> &DVector<f64> {
        &self.responses
    }

    pub fn predictors(&self) -> &DMatrix<f64> {
        &self.predictors
    }

    pub fn has_intercept(&self) -> bool {
        self.has_intercept
    }

    pub fn n(&self) -> usize {
        self.responses.len()
    }

    /// Number of raw covariates (excluding the intercept).
    pub fn p(&self) -> usize {
        self.predictors.ncols()
    }

    /// Number of fitted coefficients.
    pub fn n_coefficients(&self) -> usize {
        self.p() + usize::from(self.has_intercept)
    }

    pub fn is_empty(&self) -> bool {
        self.n() == 0
    }

    pub fn observation(&self, i: usize) -> Observation {
        Observation {
            response: self.responses[i],
            predictors: self.predictors.row(i).iter().copied().collect(),
        }
    }

    pub fn observations(&self) -> impl Iterator<Item = Observation> + '_ {
        (0..self.n()).map(|i| self.observation(i))
    }

    /// Design row for observation `i`, with the constant prepended if needed.
    pub fn design_row(&self, i: usize) -> DVector<f64> {
        design_row_of(self.predictors.row(i).iter().copied(), self.p(), self.has_intercept)
    }

    /// The design matrix the fit actually uses.
    pub fn design(&self) -> DMatrix<f64> {
        let offset = usize::from(self.has_intercept);
        let mut x = DMatrix::zeros(self.n(), self.n_coefficients());
        if self.has_intercept {
            x.column_mut(0).fill(1.0);
        }
        x.view_mut((0, offset), (self.n(), self.p()))
            .copy_from(&self.predictors);
        x
    }

    /// Rows in the order given by `indices`; indices may repeat.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        let y = DVector::from_iterator(indices.len(), indices.iter().map(|&i| self.responses[i]));
        let x = self.predictors.select_rows(indices);
        Dataset {
            responses: y,
            predictors: x,
            has_intercept: self.has_intercept,
        }
    }

    /// Rows of `self` followed by rows of `other`.
    pub fn concat(&self, other: &Dataset) -> Result<Dataset> {
        self.check_compatible(other)?;
        let n = self.n() + other.n();
        let mut y = DVector::zeros(n);
        y.rows_mut(0, self.n()).copy_from(&self.responses);
        y.rows_mut(self.n(), other.n()).copy_from(&other.responses);
        let mut x = DMatrix::zeros(n, self.p());
        x.view_mut((0, 0), (self.n(), self.p()))
            .copy_from(&self.predictors);
        x.view_mut((self.n(), 0), (other.n(), self.p()))
            .copy_from(&other.predictors);
        Ok(Dataset {
            responses: y,
            predictors: x,
            has_intercept: self.has_intercept,
        })
    }

    /// Appends a single observation.
    pub fn push(&self, obs: &Observation) -> Result<Dataset> {
        if obs.predictors.len() != self.p() {
            return Err(Error::Dimension(format!(
                "observation has {} predictors, dataset has {}",
                obs.predictors.len(),
                self.p()
            )));
        }
        let n = self.n();
        let y = self.responses.clone().insert_row(n, obs.response);
        let mut x = self.predictors.clone().insert_row(n, 0.0);
        for (j, v) in obs.predictors.iter().enumerate() {
            x[(n, j)] = *v;
        }
        Dataset::new(y, x, self.has_intercept)
    }

    pub fn check_compatible(&self, other: &Dataset) -> Result<()> {
        if self.p() != other.p() || self.has_intercept != other.has_intercept {
            return Err(Error::Dimension(format!(
                "datasets disagree: p = {} vs {}, intercept = {} vs {}",
                self.p(),
                other.p(),
                self.has_intercept,
                other.has_intercept
            )));
        }
        Ok(())
    }
}

/// One `(y, x)` pair, without the intercept column.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub response: f64,
    pub predictors: Vec<f64>,
}

fn design_row_of(values: impl Iterator<Item = f64>, p: usize, intercept: bool) -> DVector<f64> {
    let lead = usize::from(intercept);
    let mut row = DVector::zeros(p + lead);
    if intercept {
        row[0] = 1.0;
    }
    for (j, v) in values.enumerate() {
        row[j + lead] = v;
    }
    row
}

/// A fitted least-squares model with its diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub coefficients: DVector<f64>,
    pub residuals: DVector<f64>,
    pub hat_diagonals: DVector<f64>,
    pub sigma2_hat: f64,
    pub dof: usize,
    pub xtx_inverse: DMatrix<f64>,
    design: DMatrix<f64>,
    has_intercept: bool,
}

impl OlsFit {
    /// The design matrix used for the fit (intercept column included).
    pub fn design(&self) -> &DMatrix<f64> {
        &self.design
    }

    pub fn has_intercept(&self) -> bool {
        self.has_intercept
    }

    pub fn n(&self) -> usize {
        self.residuals.len()
    }

    pub fn residual_sum_of_squares(&self) -> f64 {
        self.residuals.norm_squared()
    }

    /// Fitted value for an observation with raw covariates `x`.
    pub fn predict(&self, x: &[f64]) -> f64 {
        let row = design_row_of(x.iter().copied(), x.len(), self.has_intercept);
        row.dot(&self.coefficients)
    }

    pub fn studentized_residual(&self, i: usize) -> Result<f64> {
        if self.sigma2_hat <= 0.0 {
            return Err(Error::DegenerateFit);
        }
        let h = self.hat_diagonals[i];
        if h >= 1.0 - LEVERAGE_EPS {
            return Err(Error::LeverageDegenerate { index: i, leverage: h });
        }
        Ok(self.residuals[i] / (self.sigma2_hat.sqrt() * (1.0 - h).sqrt()))
    }
}

/// Least-squares fit of `data` (intercept prepended when configured).
pub fn fit_ols(data: &Dataset) -> Result<OlsFit> {
    let n = data.n();
    let q = data.n_coefficients();
    if n < q + 1 {
        return Err(Error::InsufficientRows {
            rows: n,
            params: q,
            needed: q + 1,
        });
    }
    let design = data.design();
    let qr = design.clone().qr();
    let r = qr.r();

    let diag = r.diagonal().map(f64::abs);
    let (min, max) = (diag.min(), diag.max());
    if q > 0 && (max == 0.0 || min / max < RANK_TOLERANCE) {
        return Err(Error::SingularDesign {
            condition: if min == 0.0 { f64::INFINITY } else { max / min },
        });
    }

    let q_thin = qr.q();
    let qty = q_thin.tr_mul(data.responses());
    let coefficients = r
        .solve_upper_triangular(&qty)
        .ok_or(Error::SingularDesign { condition: f64::INFINITY })?;
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(q, q))
        .ok_or(Error::SingularDesign { condition: f64::INFINITY })?;
    let xtx_inverse = &r_inv * r_inv.transpose();

    let hat_diagonals = DVector::from_iterator(n, q_thin.row_iter().map(|row| row.norm_squared()));
    let residuals = data.responses() - &design * &coefficients;
    let dof = n - q;
    let sigma2_hat = residuals.norm_squared() / dof as f64;

    Ok(OlsFit {
        coefficients,
        residuals,
        hat_diagonals,
        sigma2_hat,
        dof,
        xtx_inverse,
        design,
        has_intercept: data.has_intercept(),
    })
}

/// Internally studentized residuals `r_i / (σ̂ √(1 − h_ii))`.
pub fn studentized_residuals(fit: &OlsFit) -> Result<DVector<f64>> {
    let mut out = DVector::zeros(fit.n());
    for i in 0..fit.n() {
        out[i] = fit.studentized_residual(i)?;
    }
    Ok(out)
}

/// `β̂ − β̂₍ᵢ₎` from deleting observation `index`, in closed form:
/// `(XᵀX)⁻¹ xᵢ rᵢ / (1 − hᵢᵢ)`.
pub fn case_delta_beta(fit: &OlsFit, index: usize) -> Result<DVector<f64>> {
    let h = fit.hat_diagonals[index];
    if h >= 1.0 - LEVERAGE_EPS {
        return Err(Error::LeverageDegenerate { index, leverage: h });
    }
    let x_i = fit.design.row(index).transpose();
    Ok(&fit.xtx_inverse * x_i * (fit.residuals[index] / (1.0 - h)))
}

/// Model-based standard errors `sqrt(diag(σ̂² (XᵀX)⁻¹))`.
pub fn naive_standard_errors(fit: &OlsFit) -> DVector<f64> {
    fit.xtx_inverse
        .diagonal()
        .map(|v| (fit.sigma2_hat * v).sqrt())
}
