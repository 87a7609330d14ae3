use serde::Serialize;

use crate::features::{FeatureVector, Measure};

use super::design::{log_measure, DesignRow};
use super::ols::ModelFit;
use super::spec::{log_column_name, INTERCEPT, LOG_SQUARED_LINE};
use super::HedonicError;

/// Inner product of the fitted coefficients with a row holding exactly the
/// fit's columns (in any order).
pub fn predict_log_price(fit: &ModelFit, row: &DesignRow) -> Result<f64, HedonicError> {
    if row.len() != fit.coefficients.len() {
        return Err(HedonicError::Schema(format!(
            "row has {} columns, the fit has {}",
            row.len(),
            fit.coefficients.len()
        )));
    }
    let mut total = 0.0;
    for c in &fit.coefficients {
        let mut hits = row.iter().filter(|(name, _)| *name == c.name);
        let value = match (hits.next(), hits.next()) {
            (Some((_, v)), None) => *v,
            (None, _) => return Err(HedonicError::Schema(format!("row lacks column {}", c.name))),
            (Some(_), Some(_)) => {
                return Err(HedonicError::Schema(format!("row repeats column {}", c.name)))
            }
        };
        total += c.estimate * value;
    }
    Ok(total)
}

/// Contribution of one information term to the log-price gap.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TermContribution {
    pub name: String,
    pub coefficient: f64,
    pub value_a: f64,
    pub value_b: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriceRatio {
    pub contributions: Vec<TermContribution>,
    pub log_ratio: f64,
    pub ratio: f64,
}

fn information_columns() -> Vec<(String, Measure, bool)> {
    let mut cols = Vec::new();
    for m in Measure::ALL {
        cols.push((log_column_name(m), m, false));
        if m == Measure::Line {
            cols.push((LOG_SQUARED_LINE.to_string(), m, true));
        }
    }
    cols
}

/// Projected price of painting `a` relative to painting `b` when every other
/// attribute is shared. Columns in `shared` must belong to the fit; they
/// cancel from the contrast.
pub fn price_ratio(
    fit: &ModelFit,
    a: &FeatureVector,
    b: &FeatureVector,
    shared: &DesignRow,
) -> Result<PriceRatio, HedonicError> {
    if !a.comparable_with(b) {
        return Err(HedonicError::ConfigMismatch(format!(
            "feature vectors differ in config or analyzed resolution ({} {}x{} vs {} {}x{})",
            a.config_fingerprint, a.width, a.height, b.config_fingerprint, b.width, b.height
        )));
    }
    if let Some(fp) = &fit.feature_fingerprint {
        if *fp != a.config_fingerprint {
            return Err(HedonicError::ConfigMismatch(format!(
                "model was fitted on features with fingerprint {fp}, got {}",
                a.config_fingerprint
            )));
        }
    }
    let info = information_columns();
    for (name, _) in shared {
        if fit.coefficient(name).is_none() || name == INTERCEPT {
            return Err(HedonicError::Schema(format!("{name} is not a shared attribute column of the fit")));
        }
        if info.iter().any(|(n, _, _)| n == name) {
            return Err(HedonicError::Schema(format!("{name} is an information term, not a shared attribute")));
        }
    }

    let scale = fit.log_scale_factor;
    let mut contributions = Vec::new();
    for (name, m, squared) in info {
        let Some(c) = fit.coefficient(&name) else {
            continue;
        };
        let transform = |fv: &FeatureVector| -> Result<f64, HedonicError> {
            let l = log_measure(fv.get(m), scale, m.label(), &fv.source_id)?;
            Ok(if squared { l * l } else { l })
        };
        let (value_a, value_b) = (transform(a)?, transform(b)?);
        contributions.push(TermContribution {
            name,
            coefficient: c.estimate,
            value_a,
            value_b,
            delta: c.estimate * (value_a - value_b),
        });
    }
    if contributions.is_empty() {
        return Err(HedonicError::MissingTerm(
            "the fit has no information terms to contrast".into(),
        ));
    }
    let log_ratio: f64 = contributions.iter().map(|t| t.delta).sum();
    Ok(PriceRatio {
        contributions,
        log_ratio,
        ratio: log_ratio.exp(),
    })
}
