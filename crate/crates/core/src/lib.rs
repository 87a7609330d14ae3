//! Information-quantity measures for painting images and hedonic auction-price
//! regressions that use them as covariates.

pub mod catalog;
pub mod features;
pub mod fingerprint;
pub mod hedonic;
pub mod raster;
pub mod summary;

pub use features::{extract_features, FeatureConfig, FeatureVector, Measure};
pub use raster::{decode_image, RgbPixel, RgbRaster};
