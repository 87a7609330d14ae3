//! Pixel-level variance measures for line, colour, value and space.

use crate::raster::{EdgeMap, RgbPixel, RgbRaster};

use super::{FeatureConfig, SpaceNormalization, StatisticMode};

/// Population variance, computed in two passes about the first sample so that
/// a constant sample yields exactly zero. Empty input gives zero.
pub(crate) fn population_variance(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let (ss, n) = sum_squared_deviations(values);
    if n == 0 {
        0.0
    } else {
        ss / n as f64
    }
}

/// Sum of squared deviations about the mean and the sample size.
fn sum_squared_deviations(values: impl Iterator<Item = f64> + Clone) -> (f64, usize) {
    let mut it = values.clone();
    let Some(origin) = it.next() else {
        return (0.0, 0);
    };
    let mut n = 1usize;
    let mut sum = 0.0;
    for v in it {
        sum += v - origin;
        n += 1;
    }
    let mean = sum / n as f64;
    (values.map(|v| (v - origin - mean).powi(2)).sum(), n)
}

fn apply_mode(variance: f64, mode: StatisticMode) -> f64 {
    match mode {
        StatisticMode::Variance => variance,
        StatisticMode::StdDev => variance.sqrt(),
    }
}

/// Variance of the binary edge flags.
pub fn variance_of_line(edges: &EdgeMap, mode: StatisticMode) -> f64 {
    // Closed form p(1 - p) of a Bernoulli sample.
    let n = edges.flags().len() as f64;
    let p = edges.edge_count() as f64 / n;
    apply_mode(p * (1.0 - p), mode)
}

/// Hue angle in degrees, `None` for achromatic pixels (max = min).
///
/// Ties between channels resolve in R, G, B order; the tied branches agree.
pub fn hue_value(px: RgbPixel) -> Option<f64> {
    let (r, g, b) = (f64::from(px.r), f64::from(px.g), f64::from(px.b));
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let chroma = max - min;
    if chroma == 0.0 {
        return None;
    }
    let hue = if max == r {
        let h = 60.0 * (g - b) / chroma;
        if g < b {
            h + 360.0
        } else {
            h
        }
    } else if max == g {
        60.0 * (b - r) / chroma + 120.0
    } else {
        60.0 * (r - g) / chroma + 240.0
    };
    Some(hue)
}

/// Variance of the defined hues, each scaled by `1 / hue_scale`.
pub fn variance_of_color(img: &RgbRaster, cfg: &FeatureConfig) -> f64 {
    let scale = cfg.hue_scale;
    let hues = img
        .pixels()
        .iter()
        .filter_map(|&p| hue_value(p))
        .map(move |h| h / scale);
    apply_mode(population_variance(hues), cfg.statistic_mode)
}

const VALUE_GAMMA: f64 = 2.2;

fn value_normalizer() -> f64 {
    1.0 + 1.5f64.powf(VALUE_GAMMA) + 0.6f64.powf(VALUE_GAMMA)
}

/// Gamma-weighted lightness in [0, 1].
pub fn pixel_value(px: RgbPixel) -> f64 {
    let r = f64::from(px.r) / 255.0;
    let g = 1.5 * f64::from(px.g) / 255.0;
    let b = 0.6 * f64::from(px.b) / 255.0;
    let num = r.powf(VALUE_GAMMA) + g.powf(VALUE_GAMMA) + b.powf(VALUE_GAMMA);
    (num / value_normalizer()).sqrt()
}

/// Lookup table of `channel^2.2` terms so the per-pixel cost is three loads.
struct ValueTable {
    r: [f64; 256],
    g: [f64; 256],
    b: [f64; 256],
    norm: f64,
}

impl ValueTable {
    fn new() -> Self {
        let mut t = Self {
            r: [0.0; 256],
            g: [0.0; 256],
            b: [0.0; 256],
            norm: value_normalizer(),
        };
        for c in 0..256usize {
            let v = c as f64 / 255.0;
            t.r[c] = v.powf(VALUE_GAMMA);
            t.g[c] = (1.5 * c as f64 / 255.0).powf(VALUE_GAMMA);
            t.b[c] = (0.6 * c as f64 / 255.0).powf(VALUE_GAMMA);
        }
        t
    }

    #[inline]
    fn value(&self, px: RgbPixel) -> f64 {
        ((self.r[px.r as usize] + self.g[px.g as usize] + self.b[px.b as usize]) / self.norm).sqrt()
    }
}

/// Variance of [`pixel_value`] over all pixels.
pub fn variance_of_value(img: &RgbRaster, cfg: &FeatureConfig) -> f64 {
    let table = ValueTable::new();
    let values = img.pixels().iter().map(|&p| table.value(p));
    apply_mode(population_variance(values), cfg.statistic_mode)
}

/// Spatial dispersion of edge pixels. Coordinates are 1-based and normalised
/// by the image dimensions; the squared deviations are divided by `2X` and
/// `2Y` (or by twice the edge count in [`SpaceNormalization::EdgeCount`] mode).
pub fn variance_of_space(edges: &EdgeMap, cfg: &FeatureConfig) -> f64 {
    let (w, h) = (edges.width(), edges.height());
    let coords: Vec<(f64, f64)> = edges
        .flags()
        .iter()
        .enumerate()
        .filter(|(_, &f)| f == 1)
        .map(|(i, _)| {
            let x = (i % w as usize) as f64 + 1.0;
            let y = (i / w as usize) as f64 + 1.0;
            (x / f64::from(w), y / f64::from(h))
        })
        .collect();
    if coords.len() < 2 {
        return 0.0;
    }
    let (ssx, _) = sum_squared_deviations(coords.iter().map(|c| c.0));
    let (ssy, _) = sum_squared_deviations(coords.iter().map(|c| c.1));
    match cfg.space_normalization {
        SpaceNormalization::Dimensions => ssx / (2.0 * f64::from(w)) + ssy / (2.0 * f64::from(h)),
        SpaceNormalization::EdgeCount => {
            let m = coords.len() as f64;
            ssx / (2.0 * m) + ssy / (2.0 * m)
        }
    }
}
