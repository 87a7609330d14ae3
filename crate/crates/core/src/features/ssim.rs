//! Global structural similarity between the left half of an image and the
//! mirrored right half, used as the lateral-symmetry score.

use serde::{Deserialize, Serialize};

use crate::raster::GrayRaster;

use super::FeatureError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SsimParams {
    pub k1: f64,
    pub k2: f64,
    /// Dynamic range of the grayscale signal.
    pub dynamic_range: f64,
}

impl Default for SsimParams {
    fn default() -> Self {
        Self {
            k1: 0.01,
            k2: 0.03,
            dynamic_range: 256.0,
        }
    }
}

impl SsimParams {
    pub fn c1(&self) -> f64 {
        (self.k1 * self.dynamic_range).powi(2)
    }

    pub fn c2(&self) -> f64 {
        (self.k2 * self.dynamic_range).powi(2)
    }
}

/// SSIM of the left half against the horizontally mirrored right half, using
/// whole-half means, variances and covariance. The middle column of an
/// odd-width image belongs to neither half.
pub fn lateral_ssim(gray: &GrayRaster, params: &SsimParams) -> Result<f64, FeatureError> {
    let (w, h) = (gray.width() as usize, gray.height() as usize);
    if w < 2 {
        return Err(FeatureError::Geometry { width: gray.width() });
    }
    let half = w / 2;
    let v = gray.values();
    // pixel (y, j) of the left half pairs with (y, w - 1 - j)
    let pairs = || {
        (0..h).flat_map(move |y| {
            let row = &v[y * w..(y + 1) * w];
            (0..half).map(move |j| (row[j], row[w - 1 - j]))
        })
    };
    let n = (half * h) as f64;
    let (sum_l, sum_r) = pairs().fold((0.0, 0.0), |(a, b), (l, r)| (a + l, b + r));
    let (mu_l, mu_r) = (sum_l / n, sum_r / n);
    let (mut var_l, mut var_r, mut cov) = (0.0, 0.0, 0.0);
    for (l, r) in pairs() {
        let (dl, dr) = (l - mu_l, r - mu_r);
        var_l += dl * dl;
        var_r += dr * dr;
        cov += dl * dr;
    }
    let (var_l, var_r, cov) = (var_l / n, var_r / n, cov / n);
    let (c1, c2) = (params.c1(), params.c2());
    Ok((2.0 * mu_l * mu_r + c1) * (2.0 * cov + c2)
        / ((mu_l * mu_l + mu_r * mu_r + c1) * (var_l + var_r + c2)))
}

/// Scaled inverse of the lateral SSIM, floored and clamped into (0, 1].
pub fn variance_of_shape(
    gray: &GrayRaster,
    ssim_floor: f64,
    params: &SsimParams,
) -> Result<f64, FeatureError> {
    let ssim = lateral_ssim(gray, params)?;
    Ok(shape_from_ssim(ssim, ssim_floor))
}

pub(crate) fn shape_from_ssim(ssim: f64, ssim_floor: f64) -> f64 {
    (1.0 / (1000.0 * ssim.max(ssim_floor))).min(1.0)
}
