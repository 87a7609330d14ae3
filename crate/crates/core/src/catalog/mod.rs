//! Sale-record catalogs, the on-disk feature cache, batch extraction and the
//! synthetic data generator.

mod cache;
mod extract;
mod feature_csv;
mod records;
mod synth;

use std::path::Path;

use thiserror::Error;

pub use cache::FeatureCache;
pub use extract::{extract_all, ExtractReport, RecordFailure};
pub use feature_csv::{features_to_bytes, load_features, parse_features, save_features};
pub use records::{
    catalog_to_bytes, load_catalog, load_catalog_in_window, parse_catalog, save_catalog,
    CATALOG_HEADER, DEFAULT_YEAR_WINDOW,
};
pub use synth::{
    default_coefficients, draw_composition, generate_synthetic, noise_sd_for_adjusted_r2,
    GroundTruth, SyntheticDataset, SyntheticPainting, MIN_SYNTHETIC_ROWS, SYNTHETIC_IMAGE_SIZE,
};

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("row {row}{}: {message}", column.as_ref().map(|c| format!(", column {c}")).unwrap_or_default())]
    Parse {
        row: usize,
        column: Option<String>,
        message: String,
    },
    #[error("row {row} (id {id}): {message}")]
    Validation {
        row: usize,
        id: String,
        message: String,
    },
    #[error("record {id}: {message}")]
    Record { id: String, message: String },
    #[error("invalid feature config: {0}")]
    Config(String),
    #[error("invalid synthetic request: {0}")]
    Synthetic(String),
}

impl CatalogError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CatalogError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }
}
