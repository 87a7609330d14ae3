use nalgebra::{DMatrix, DVector};

use crate::features::{FeatureVector, Measure};

use super::spec::{ModelSpec, Term};
use super::{HedonicError, SaleRecord};

/// A row of named regressor values.
pub type DesignRow = Vec<(String, f64)>;

/// Response `ln(price)` and the named regressor columns of one specification.
#[derive(Debug, Clone)]
pub struct DesignMatrix {
    pub ids: Vec<String>,
    pub response: DVector<f64>,
    pub x: DMatrix<f64>,
    pub terms: Vec<Term>,
    pub names: Vec<String>,
    pub spec_fingerprint: String,
    /// Shared fingerprint of the feature rows, if any information term is used.
    pub feature_fingerprint: Option<String>,
    pub log_scale_factor: f64,
    /// Dummy families that contributed at least one column.
    pub controls: Vec<super::CategoryField>,
}

impl DesignMatrix {
    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn k(&self) -> usize {
        self.x.ncols()
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.names.iter().position(|n| n == name)?;
        Some(self.x.column(j).iter().copied().collect())
    }

    pub fn row(&self, i: usize) -> DesignRow {
        self.names
            .iter()
            .cloned()
            .zip(self.x.row(i).iter().copied())
            .collect()
    }
}

/// `ln(scale * v)`, rejecting non-positive measures.
pub fn log_measure(v: f64, scale: f64, what: &str, id: &str) -> Result<f64, HedonicError> {
    if !(v.is_finite() && v > 0.0) {
        return Err(HedonicError::Domain {
            id: id.to_string(),
            detail: format!("{what} = {v} has no logarithm"),
        });
    }
    Ok((scale * v).ln())
}

/// Value of a non-dummy term for a record and its features.
fn term_value(
    term: &Term,
    rec: &SaleRecord,
    fv: &FeatureVector,
    scale: f64,
) -> Result<f64, HedonicError> {
    Ok(match term {
        Term::Intercept => 1.0,
        Term::Log(m) => log_measure(fv.get(*m), scale, m.label(), &rec.id)?,
        Term::LogSquaredLine => {
            log_measure(fv.get(Measure::Line), scale, Measure::Line.label(), &rec.id)?.powi(2)
        }
        Term::Attribute(a) => a.value(rec),
        Term::Dummy { field, level } => f64::from(u8::from(field.level_of(rec) == *level)),
    })
}

/// Builds the regression design. Dummy levels that never occur in `records`
/// contribute no column.
pub fn build_design_matrix(
    records: &[SaleRecord],
    features: &[FeatureVector],
    spec: &ModelSpec,
) -> Result<DesignMatrix, HedonicError> {
    spec.validate()?;
    if records.len() != features.len() {
        return Err(HedonicError::Alignment {
            records: records.len(),
            features: features.len(),
        });
    }

    for rec in records {
        if !(rec.price.is_finite() && rec.price > 0.0) {
            return Err(HedonicError::Domain {
                id: rec.id.clone(),
                detail: format!("price = {} has no logarithm", rec.price),
            });
        }
        for fam in &spec.dummy_families {
            let level = fam.field.level_of(rec);
            if !fam.levels.contains(&level) {
                return Err(HedonicError::UnknownLevel {
                    id: rec.id.clone(),
                    field: fam.field.key().to_string(),
                    level,
                });
            }
        }
    }

    let feature_fingerprint = if spec.information_terms.is_empty() {
        None
    } else {
        let mut fps = features.iter().map(|f| &f.config_fingerprint);
        let first = fps.next().cloned();
        if let Some(fp) = &first {
            if let Some(other) = fps.find(|f| *f != fp) {
                return Err(HedonicError::ConfigMismatch(format!(
                    "feature rows mix config fingerprints {fp} and {other}"
                )));
            }
        }
        first
    };

    let mut terms = Vec::new();
    let mut controls = Vec::new();
    for term in spec.terms() {
        if let Term::Dummy { field, level } = &term {
            if !records.iter().any(|r| field.level_of(r) == *level) {
                log::warn!("{} level {level:?} does not occur in the data; column dropped", field.key());
                continue;
            }
            if !controls.contains(field) {
                controls.push(*field);
            }
        }
        terms.push(term);
    }

    let (n, k) = (records.len(), terms.len());
    let mut x = DMatrix::zeros(n, k);
    for (i, (rec, fv)) in records.iter().zip(features).enumerate() {
        for (j, term) in terms.iter().enumerate() {
            x[(i, j)] = term_value(term, rec, fv, spec.log_scale_factor)?;
        }
    }
    let response = DVector::from_iterator(n, records.iter().map(|r| r.price.ln()));

    Ok(DesignMatrix {
        ids: records.iter().map(|r| r.id.clone()).collect(),
        response,
        x,
        names: terms.iter().map(Term::to_string).collect(),
        terms,
        spec_fingerprint: spec.fingerprint(),
        feature_fingerprint,
        log_scale_factor: spec.log_scale_factor,
        controls,
    })
}
