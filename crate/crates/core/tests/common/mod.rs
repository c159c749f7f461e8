#![allow(clippy::needless_range_loop)]

#![allow(dead_code)]

use nonprob_extend::Dataset;
use rand::Rng;
use rand_distr::StandardNormal;

pub type Matrix = Vec<Vec<f64>>;

/// Intercept-augmented design rows.
pub fn design_rows(data: &Dataset) -> Matrix {
    (0..data.n())
        .map(|i| {
            let mut row = vec![1.0];
            row.extend(data.predictors().row(i).iter().copied());
            row
        })
        .collect()
}

pub fn responses(data: &Dataset) -> Vec<f64> {
    data.responses().iter().copied().collect()
}

pub fn transpose(a: &Matrix) -> Matrix {
    let (r, c) = (a.len(), a[0].len());
    (0..c).map(|j| (0..r).map(|i| a[i][j]).collect()).collect()
}

pub fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let inner = b.len();
    a.iter()
        .map(|row| {
            (0..b[0].len())
                .map(|j| (0..inner).map(|k| row[k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

pub fn matvec(a: &Matrix, v: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
}

/// Gauss-Jordan elimination with partial pivoting on `[a | b]`.
pub fn solve(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let m = b[0].len();
    let mut aug: Matrix = a
        .iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().chain(rb).copied().collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| aug[i][col].abs().total_cmp(&aug[j][col].abs()))
            .unwrap();
        aug.swap(col, pivot);
        let d = aug[col][col];
        assert!(d.abs() > 1e-14, "oracle hit a singular system");
        for v in aug[col].iter_mut() {
            *v /= d;
        }
        for row in 0..n {
            if row != col {
                let f = aug[row][col];
                if f != 0.0 {
                    for k in 0..n + m {
                        aug[row][k] -= f * aug[col][k];
                    }
                }
            }
        }
    }
    aug.into_iter().map(|r| r[n..].to_vec()).collect()
}

pub fn identity(n: usize) -> Matrix {
    (0..n).map(|i| (0..n).map(|j| f64::from(i == j)).collect()).collect()
}

pub fn inverse(a: &Matrix) -> Matrix {
    solve(a, &identity(a.len()))
}

/// Coefficients from the normal equations `XᵀX β = Xᵀy`.
pub fn normal_equations(x: &Matrix, y: &[f64]) -> Vec<f64> {
    let xt = transpose(x);
    let xtx = matmul(&xt, x);
    let xty: Matrix = matvec(&xt, y).into_iter().map(|v| vec![v]).collect();
    solve(&xtx, &xty).into_iter().map(|r| r[0]).collect()
}

pub fn ols(data: &Dataset) -> Vec<f64> {
    normal_equations(&design_rows(data), &responses(data))
}

/// `X (XᵀX)⁻¹ Xᵀ`, assembled explicitly.
pub fn hat_matrix(x: &Matrix) -> Matrix {
    let xt = transpose(x);
    let inv = inverse(&matmul(&xt, x));
    matmul(&matmul(x, &inv), &xt)
}

pub fn residuals(x: &Matrix, y: &[f64], beta: &[f64]) -> Vec<f64> {
    matvec(x, beta).iter().zip(y).map(|(f, y)| y - f).collect()
}

/// `rᵢ / (σ̂ √(1 − hᵢᵢ))` from the explicit hat matrix.
pub fn studentized(data: &Dataset) -> Vec<f64> {
    let x = design_rows(data);
    let y = responses(data);
    let h = hat_matrix(&x);
    let r: Vec<f64> = (0..y.len())
        .map(|i| y[i] - (0..y.len()).map(|j| h[i][j] * y[j]).sum::<f64>())
        .collect();
    let dof = (y.len() - x[0].len()) as f64;
    let sigma = (r.iter().map(|v| v * v).sum::<f64>() / dof).sqrt();
    (0..y.len()).map(|i| r[i] / (sigma * (1.0 - h[i][i]).sqrt())).collect()
}

/// Coefficients refitted without row `i`.
pub fn refit_without(data: &Dataset, i: usize) -> Vec<f64> {
    let keep: Vec<usize> = (0..data.n()).filter(|&j| j != i).collect();
    ols(&data.select(&keep))
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Standard normal CDF from the Maclaurin series of erf.
pub fn normal_cdf(z: f64) -> f64 {
    let x = z / std::f64::consts::SQRT_2;
    let mut term = x;
    let mut sum = x;
    let mut n = 0.0;
    while term.abs() > 1e-17 * sum.abs().max(1e-300) {
        n += 1.0;
        term *= -x * x / n;
        sum += term / (2.0 * n + 1.0);
        if n > 500.0 {
            break;
        }
    }
    0.5 * (1.0 + 2.0 / std::f64::consts::PI.sqrt() * sum)
}

/// Inverse of [`normal_cdf`] by bisection on `[-8, 8]`.
pub fn normal_quantile_bisect(p: f64) -> f64 {
    let (mut lo, mut hi) = (-8.0f64, 8.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if normal_cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Gaussian dataset `y = 1 + Σ (j+1)·x_j + ε` drawn from `rng`.
pub fn gaussian_dataset<R: Rng>(n: usize, p: usize, noise: f64, rng: &mut R) -> Dataset {
    let rows: Vec<(f64, Vec<f64>)> = (0..n)
        .map(|_| {
            let x: Vec<f64> = (0..p).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let signal = 1.0 + x.iter().enumerate().map(|(j, v)| (j as f64 + 1.0) * v).sum::<f64>();
            (signal + noise * rng.sample::<f64, _>(StandardNormal), x)
        })
        .collect();
    Dataset::from_rows(&rows, p).unwrap()
}

/// Deterministic dataset built from trigonometric patterns, independent of
/// any random number generator.
pub fn patterned_dataset(n: usize, p: usize) -> Dataset {
    let rows: Vec<(f64, Vec<f64>)> = (0..n)
        .map(|i| {
            let x: Vec<f64> = (0..p)
                .map(|j| ((i * (j + 2)) as f64 * 0.7 + j as f64).sin() * (1.0 + j as f64))
                .collect();
            let y = 0.5 - x.iter().enumerate().map(|(j, v)| (-1f64).powi(j as i32) * v).sum::<f64>()
                + ((i * i) as f64 * 0.37).cos();
            (y, x)
        })
        .collect();
    Dataset::from_rows(&rows, p).unwrap()
}
