//! Least squares via Householder QR, with HC1 heteroskedasticity-robust
//! standard errors.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use super::design::DesignMatrix;
use super::spec::CategoryField;
use super::HedonicError;

/// Relative threshold on `|r_jj| / ||x_j||` below which column `j` is taken
/// to lie in the span of the columns before it.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    /// `None` when the standard error is zero.
    pub t_stat: Option<f64>,
    /// Two-sided normal p-value.
    pub p_value: Option<f64>,
    pub stars: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFit {
    pub spec_name: String,
    pub coefficients: Vec<Coefficient>,
    pub r_squared: f64,
    pub adj_r_squared: f64,
    pub n: usize,
    pub k: usize,
    pub spec_fingerprint: String,
    pub feature_fingerprint: Option<String>,
    pub log_scale_factor: f64,
    pub controls: Vec<CategoryField>,
    #[serde(skip)]
    pub residuals: Vec<f64>,
}

impl ModelFit {
    pub fn coefficient(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.name == name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.coefficients.iter().map(|c| c.name.as_str())
    }
}

/// Significance stars of a two-sided p-value: `*** p<0.01, ** p<0.05, * p<0.1`.
pub fn stars(p: f64) -> &'static str {
    if p < 0.01 {
        "***"
    } else if p < 0.05 {
        "**"
    } else if p < 0.1 {
        "*"
    } else {
        ""
    }
}

/// Two-sided p-value of a t-statistic under the standard normal.
pub fn normal_p_value(t: f64) -> f64 {
    erfc(t.abs() / std::f64::consts::SQRT_2)
}

pub(crate) fn inference(name: String, estimate: f64, std_error: f64) -> Coefficient {
    let (t_stat, p_value) = if std_error > 0.0 {
        let t = estimate / std_error;
        (Some(t), Some(normal_p_value(t)))
    } else {
        (None, None)
    };
    Coefficient {
        name,
        estimate,
        std_error,
        t_stat,
        p_value,
        stars: p_value.map(stars).unwrap_or("").to_string(),
    }
}

/// Pieces of the QR factorisation reused by the estimators.
struct Factorization {
    coefficients: DVector<f64>,
    /// `(X'X)^-1 = R^-1 R^-T`
    xtx_inv: DMatrix<f64>,
}

fn factorize(x: &DMatrix<f64>, y: &DVector<f64>, names: &[String]) -> Result<Factorization, HedonicError> {
    let (n, k) = x.shape();
    if n <= k {
        return Err(HedonicError::InsufficientObservations { n, k });
    }
    let qr = x.clone().qr();
    let r = qr.r();
    let dependent: Vec<usize> = (0..k)
        .filter(|&j| r[(j, j)].abs() <= RANK_TOLERANCE * x.column(j).norm())
        .collect();
    if !dependent.is_empty() {
        return Err(rank_error(x, names, &dependent));
    }
    let mut qty = y.clone();
    qr.q_tr_mul(&mut qty);
    let qty = qty.rows(0, k).into_owned();
    let coefficients = r
        .solve_upper_triangular(&qty)
        .expect("R has a non-zero diagonal");
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .expect("R has a non-zero diagonal");
    let xtx_inv = &r_inv * r_inv.transpose();
    Ok(Factorization {
        coefficients,
        xtx_inv,
    })
}

/// Names every dependent column together with the earlier independent
/// columns that reproduce it.
fn rank_error(x: &DMatrix<f64>, names: &[String], dependent: &[usize]) -> HedonicError {
    let mut details = Vec::new();
    for &j in dependent {
        let basis: Vec<usize> = (0..j).filter(|i| !dependent.contains(i)).collect();
        let mut partners = Vec::new();
        if !basis.is_empty() {
            let xb = x.select_columns(&basis);
            let target = x.column(j).into_owned();
            if let Ok(c) = xb.clone().svd(true, true).solve(&target, 1e-12) {
                let scale = c.amax().max(f64::MIN_POSITIVE);
                partners = basis
                    .iter()
                    .zip(c.iter())
                    .filter(|(_, w)| w.abs() > 1e-8 * scale)
                    .map(|(&i, _)| names[i].clone())
                    .collect();
            }
        }
        details.push(if partners.is_empty() {
            format!("{} is identically zero", names[j])
        } else {
            format!("{} ~ {}", names[j], partners.join(" + "))
        });
    }
    HedonicError::RankDeficiency {
        columns: dependent.iter().map(|&j| names[j].clone()).collect(),
        detail: details.join("; "),
    }
}

fn hc1_covariance(x: &DMatrix<f64>, residuals: &[f64], xtx_inv: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, k) = x.shape();
    // rows of X (X'X)^-1 weighted by the residuals give the sandwich as W'W
    let mut w = x * xtx_inv;
    for (i, e) in residuals.iter().enumerate() {
        w.row_mut(i).scale_mut(*e);
    }
    w.transpose() * w * (n as f64 / (n - k) as f64)
}

fn diag_sqrt(m: &DMatrix<f64>) -> Vec<f64> {
    m.diagonal().iter().map(|v| v.max(0.0).sqrt()).collect()
}

/// Fits ordinary least squares and attaches HC1 standard errors.
pub fn ols_fit(dm: &DesignMatrix) -> Result<ModelFit, HedonicError> {
    let f = factorize(&dm.x, &dm.response, &dm.names)?;
    let (n, k) = (dm.n(), dm.k());
    let fitted = &dm.x * &f.coefficients;
    let residuals: Vec<f64> = (&dm.response - fitted).iter().copied().collect();
    let rss: f64 = residuals.iter().map(|e| e * e).sum();
    let mean = dm.response.mean();
    let tss: f64 = dm.response.iter().map(|y| (y - mean).powi(2)).sum();
    let r_squared = if tss > 0.0 { 1.0 - rss / tss } else { 1.0 };
    let adj_r_squared = 1.0 - (1.0 - r_squared) * (n as f64 - 1.0) / (n - k) as f64;

    let se = diag_sqrt(&hc1_covariance(&dm.x, &residuals, &f.xtx_inv));
    let coefficients = dm
        .names
        .iter()
        .zip(f.coefficients.iter())
        .zip(se)
        .map(|((name, &b), s)| inference(name.clone(), b, s))
        .collect();

    Ok(ModelFit {
        spec_name: String::new(),
        coefficients,
        r_squared,
        adj_r_squared,
        n,
        k,
        spec_fingerprint: dm.spec_fingerprint.clone(),
        feature_fingerprint: dm.feature_fingerprint.clone(),
        log_scale_factor: dm.log_scale_factor,
        controls: dm.controls.clone(),
        residuals,
    })
}

/// HC1 sandwich standard errors,
/// `n/(n-k) (X'X)^-1 X' diag(e^2) X (X'X)^-1`, for a fit produced from `dm`.
pub fn robust_standard_errors(fit: &ModelFit, dm: &DesignMatrix) -> Result<Vec<f64>, HedonicError> {
    if fit.residuals.len() != dm.n() {
        return Err(HedonicError::Schema(format!(
            "fit carries {} residuals but the design has {} rows",
            fit.residuals.len(),
            dm.n()
        )));
    }
    let f = factorize(&dm.x, &dm.response, &dm.names)?;
    Ok(diag_sqrt(&hc1_covariance(&dm.x, &fit.residuals, &f.xtx_inv)))
}

/// Homoskedastic standard errors `sqrt(s^2 (X'X)^-1)` with `s^2 = RSS/(n-k)`.
pub fn classical_standard_errors(fit: &ModelFit, dm: &DesignMatrix) -> Result<Vec<f64>, HedonicError> {
    let f = factorize(&dm.x, &dm.response, &dm.names)?;
    let rss: f64 = fit.residuals.iter().map(|e| e * e).sum();
    let s2 = rss / (dm.n() - dm.k()) as f64;
    Ok(diag_sqrt(&(f.xtx_inv * s2)))
}
