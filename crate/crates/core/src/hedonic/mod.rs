//! Log-linear hedonic price regression with the information measures as
//! covariates.
//!
//! The response is `ln(price)`. Each selected measure enters as
//! `ln(1000 * V)` (the scale factor is part of [`ModelSpec`]), the line
//! measure optionally with its square, followed by the painting attributes
//! and 0/1 dummies for material, city, salesroom and sale year.

mod design;
mod ols;
mod predict;
mod report;
mod spec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use design::{build_design_matrix, DesignMatrix, DesignRow};
pub use ols::{
    classical_standard_errors, normal_p_value, ols_fit, robust_standard_errors, stars,
    Coefficient, ModelFit, RANK_TOLERANCE,
};
pub use predict::{predict_log_price, price_ratio, PriceRatio, TermContribution};
pub use report::{
    format_sig, hypothesis_report, render_table, HypothesisReport, HypothesisRow, Sign,
    STAR_LEGEND,
};
pub use spec::{
    log_column_name, AttributeTerm, CategoryField, DummyFamily, ModelSpec, Term, INTERCEPT,
    LOG_SQUARED_LINE, PRESETS,
};

#[derive(Debug, Error)]
pub enum HedonicError {
    #[error("{records} sale records but {features} feature vectors")]
    Alignment { records: usize, features: usize },
    #[error("record {id}: {detail}")]
    Domain { id: String, detail: String },
    #[error("record {id}: {field} level {level:?} is not declared in the model spec")]
    UnknownLevel {
        id: String,
        field: String,
        level: String,
    },
    #[error("design matrix is rank deficient: {detail}")]
    RankDeficiency { columns: Vec<String>, detail: String },
    #[error("need more observations than columns (n = {n}, k = {k})")]
    InsufficientObservations { n: usize, k: usize },
    #[error("schema mismatch: {0}")]
    Schema(String),
    #[error("incomparable features: {0}")]
    ConfigMismatch(String),
    #[error("missing information term {0}")]
    MissingTerm(String),
    #[error("invalid model spec: {0}")]
    Spec(String),
}

/// One auction observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaleRecord {
    pub id: String,
    /// Hammer price in USD.
    pub price: f64,
    pub sale_year: i32,
    /// Years between creation and sale.
    pub age: f64,
    /// Area in units of 1000 cm².
    pub surface: f64,
    pub signature: bool,
    pub dated: bool,
    pub material: String,
    pub city: String,
    pub salesroom: String,
    pub image_ref: String,
}
