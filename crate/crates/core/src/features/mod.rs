//! The five information-quantity measures and the extraction pipeline that
//! produces a [`FeatureVector`] from a raster.
//!
//! The pipeline is: resolution alignment, grayscale, Sobel edges. Line and
//! space dispersion come from the edge map, colour and value from the aligned
//! RGB raster, and shape from the lateral symmetry of the grayscale image.

mod measures;
mod ssim;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fingerprint::fingerprint;
use crate::raster::{self, RgbRaster};

pub use measures::{
    hue_value, pixel_value, variance_of_color, variance_of_line, variance_of_space,
    variance_of_value,
};
pub use ssim::{lateral_ssim, variance_of_shape, SsimParams};

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("lateral symmetry needs an image at least 2 pixels wide, got {width}")]
    Geometry { width: u32 },
    #[error("invalid feature config: {0}")]
    Config(String),
}

/// How each dispersion is reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatisticMode {
    #[default]
    Variance,
    StdDev,
}

/// Denominators of the space measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceNormalization {
    /// Divide the x and y sums by `2X` and `2Y`.
    #[default]
    Dimensions,
    /// Divide both sums by twice the number of edge pixels.
    EdgeCount,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    pub edge_threshold: f64,
    pub resize_max_dim: u32,
    pub statistic_mode: StatisticMode,
    pub ssim_floor: f64,
    /// Divisor that maps hue degrees onto the unit interval.
    pub hue_scale: f64,
    pub space_normalization: SpaceNormalization,
    pub ssim: SsimParams,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            edge_threshold: raster::DEFAULT_EDGE_THRESHOLD,
            resize_max_dim: raster::DEFAULT_MAX_DIM,
            statistic_mode: StatisticMode::Variance,
            ssim_floor: 0.001,
            hue_scale: 360.0,
            space_normalization: SpaceNormalization::Dimensions,
            ssim: SsimParams::default(),
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<(), FeatureError> {
        let bad = |msg: &str| Err(FeatureError::Config(msg.to_string()));
        if !(self.edge_threshold.is_finite() && self.edge_threshold > 0.0) {
            return bad("edge_threshold must be positive");
        }
        if self.resize_max_dim == 0 {
            return bad("resize_max_dim must be at least 1");
        }
        if !(self.ssim_floor > 0.0 && self.ssim_floor < 1.0) {
            return bad("ssim_floor must lie in (0, 1)");
        }
        if !(self.hue_scale.is_finite() && self.hue_scale > 0.0) {
            return bad("hue_scale must be positive");
        }
        let s = &self.ssim;
        if !(s.k1 > 0.0 && s.k2 > 0.0 && s.dynamic_range > 0.0) {
            return bad("ssim constants must be positive");
        }
        Ok(())
    }

    /// Stable hash of the canonical JSON form; travels with every feature row.
    pub fn fingerprint(&self) -> String {
        fingerprint(self)
    }
}

/// The five measures for one image, plus the metadata needed to decide
/// whether two vectors are comparable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub source_id: String,
    pub v_line: f64,
    pub v_color: f64,
    pub v_value: f64,
    pub v_shape: f64,
    pub v_space: f64,
    /// Analyzed dimensions after resolution alignment.
    pub width: u32,
    pub height: u32,
    pub config_fingerprint: String,
}

/// Column order of the feature CSV.
pub const FEATURE_CSV_HEADER: [&str; 9] = [
    "source_id",
    "v_line",
    "v_color",
    "v_value",
    "v_shape",
    "v_space",
    "width",
    "height",
    "config_fingerprint",
];

/// The five measures in a fixed order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Line,
    Color,
    Value,
    Shape,
    Space,
}

impl Measure {
    pub const ALL: [Measure; 5] = [
        Measure::Line,
        Measure::Color,
        Measure::Value,
        Measure::Shape,
        Measure::Space,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Measure::Line => "V_line",
            Measure::Color => "V_color",
            Measure::Value => "V_value",
            Measure::Shape => "V_shape",
            Measure::Space => "V_space",
        }
    }
}

impl FeatureVector {
    pub fn get(&self, m: Measure) -> f64 {
        match m {
            Measure::Line => self.v_line,
            Measure::Color => self.v_color,
            Measure::Value => self.v_value,
            Measure::Shape => self.v_shape,
            Measure::Space => self.v_space,
        }
    }

    pub fn values(&self) -> [f64; 5] {
        Measure::ALL.map(|m| self.get(m))
    }

    pub fn with_source_id(mut self, id: impl Into<String>) -> Self {
        self.source_id = id.into();
        self
    }

    /// True when both vectors come from the same config at the same analyzed
    /// resolution.
    pub fn comparable_with(&self, other: &FeatureVector) -> bool {
        self.config_fingerprint == other.config_fingerprint
            && self.width == other.width
            && self.height == other.height
    }

    pub fn to_csv_record(&self) -> Vec<String> {
        vec![
            self.source_id.clone(),
            self.v_line.to_string(),
            self.v_color.to_string(),
            self.v_value.to_string(),
            self.v_shape.to_string(),
            self.v_space.to_string(),
            self.width.to_string(),
            self.height.to_string(),
            self.config_fingerprint.clone(),
        ]
    }

    pub fn from_csv_record(rec: &csv::StringRecord) -> Result<Self, String> {
        if rec.len() != FEATURE_CSV_HEADER.len() {
            return Err(format!(
                "expected {} fields, found {}",
                FEATURE_CSV_HEADER.len(),
                rec.len()
            ));
        }
        let real = |i: usize| -> Result<f64, String> {
            rec[i]
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("column {}: invalid number {:?}", FEATURE_CSV_HEADER[i], &rec[i]))
        };
        let dim = |i: usize| -> Result<u32, String> {
            rec[i]
                .trim()
                .parse::<u32>()
                .map_err(|_| format!("column {}: invalid dimension {:?}", FEATURE_CSV_HEADER[i], &rec[i]))
        };
        Ok(Self {
            source_id: rec[0].to_string(),
            v_line: real(1)?,
            v_color: real(2)?,
            v_value: real(3)?,
            v_shape: real(4)?,
            v_space: real(5)?,
            width: dim(6)?,
            height: dim(7)?,
            config_fingerprint: rec[8].to_string(),
        })
    }
}

/// Runs the full pipeline on one raster.
pub fn extract_features(img: &RgbRaster, cfg: &FeatureConfig) -> Result<FeatureVector, FeatureError> {
    cfg.validate()?;
    let aligned = raster::resize_to_budget(img, cfg.resize_max_dim);
    let gray = raster::to_grayscale(&aligned);
    let v_shape = variance_of_shape(&gray, cfg.ssim_floor, &cfg.ssim)?;
    let edges = raster::detect_edges(&gray, cfg.edge_threshold);
    Ok(FeatureVector {
        source_id: img.source_id().to_string(),
        v_line: variance_of_line(&edges, cfg.statistic_mode),
        v_color: variance_of_color(&aligned, cfg),
        v_value: variance_of_value(&aligned, cfg),
        v_shape,
        v_space: variance_of_space(&edges, cfg),
        width: aligned.width(),
        height: aligned.height(),
        config_fingerprint: cfg.fingerprint(),
    })
}
