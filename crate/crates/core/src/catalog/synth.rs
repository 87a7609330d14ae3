use std::collections::BTreeMap;
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, LogNormal, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::features::{extract_features, FeatureConfig, FeatureVector, Measure};
use crate::hedonic::{build_design_matrix, log_column_name, ModelSpec, SaleRecord, INTERCEPT, LOG_SQUARED_LINE};
use crate::raster::{RgbPixel, RgbRaster};

use super::{save_catalog, CatalogError};

/// Side length of generated images.
pub const SYNTHETIC_IMAGE_SIZE: u32 = 96;

/// Smallest catalog the generator will produce.
pub const MIN_SYNTHETIC_ROWS: usize = 50;

// stream reserved for the price noise, so attributes and images do not depend on noise_sd
const NOISE_STREAM: u64 = u64::MAX;

const MATERIALS: [(&str, f64); 6] = [
    ("Board", 0.047),
    ("Burlap", 0.061),
    ("Canvas", 0.815),
    ("Cardboard", 0.022),
    ("Ceramic", 0.033),
    ("Others", 0.021),
];
const CITIES: [(&str, f64); 4] = [("London", 0.358), ("New York", 0.549), ("Paris", 0.063), ("Others", 0.031)];
const SALESROOMS: [(&str, f64); 3] = [("Christie's", 0.518), ("Sotheby's", 0.428), ("Others", 0.054)];

/// Coefficients of the full specification used when none are supplied.
///
/// Information and attribute terms take the benchmark estimates of the
/// all-measures column; the dummy effects are illustrative.
pub fn default_coefficients() -> BTreeMap<String, f64> {
    let mut c = BTreeMap::new();
    let mut set = |k: &str, v: f64| {
        c.insert(k.to_string(), v);
    };
    set(INTERCEPT, -53.36);
    set(&log_column_name(Measure::Line), 24.23);
    set(LOG_SQUARED_LINE, -2.728);
    set(&log_column_name(Measure::Color), 0.306);
    set(&log_column_name(Measure::Value), 0.459);
    set(&log_column_name(Measure::Shape), 0.242);
    set(&log_column_name(Measure::Space), 0.925);
    set("Surface", 0.107);
    set("Surface^2", -0.000643);
    set("Age", 0.0140);
    set("Signature", 0.0227);
    set("Dated", 0.329);
    for (level, v) in [("Board", 0.2), ("Burlap", 0.3), ("Canvas", 0.5), ("Cardboard", -0.1), ("Ceramic", -0.4)] {
        set(&format!("material:{level}"), v);
    }
    for (level, v) in [("London", 0.3), ("New York", 0.4), ("Paris", 0.1)] {
        set(&format!("city:{level}"), v);
    }
    for (level, v) in [("Christie's", 0.6), ("Sotheby's", 0.55)] {
        set(&format!("salesroom:{level}"), v);
    }
    for year in 2001..=2018 {
        set(&format!("sale_year:{year}"), 0.03 * f64::from(year - 2000));
    }
    c
}

/// Noise level at which the expected adjusted R² equals `target`, given the
/// sample variance of the noiseless log price.
///
/// Adjusted R² compares unbiased variance estimates, so its expectation is
/// close to `var / (var + sd²)` whatever the number of columns.
pub fn noise_sd_for_adjusted_r2(signal_variance: f64, target: f64) -> f64 {
    assert!(target > 0.0 && target < 1.0, "target must lie in (0, 1)");
    (signal_variance * (1.0 - target) / target).sqrt()
}

/// One generated painting.
#[derive(Debug, Clone)]
pub struct SyntheticPainting {
    pub record: SaleRecord,
    pub image: RgbRaster,
    /// Features of `image`, with the record id as source id.
    pub features: FeatureVector,
    /// `ln(price)` before noise.
    pub log_signal: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundTruth {
    pub coefficients: BTreeMap<String, f64>,
    pub noise_sd: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct SyntheticDataset {
    pub paintings: Vec<SyntheticPainting>,
    pub truth: GroundTruth,
    pub spec: ModelSpec,
}

impl SyntheticDataset {
    pub fn records(&self) -> Vec<SaleRecord> {
        self.paintings.iter().map(|p| p.record.clone()).collect()
    }

    pub fn features(&self) -> Vec<FeatureVector> {
        self.paintings.iter().map(|p| p.features.clone()).collect()
    }

    /// Same paintings with fresh `N(0, noise_sd)` price noise drawn from
    /// `noise_seed`.
    pub fn redraw_noise(&self, noise_sd: f64, noise_seed: u64) -> Self {
        let mut rng = noise_rng(noise_seed);
        let normal = Normal::new(0.0, 1.0).expect("standard normal");
        let mut out = self.clone();
        for p in &mut out.paintings {
            p.record.price = (p.log_signal + noise_sd * normal.sample(&mut rng)).exp();
        }
        out.truth.noise_sd = noise_sd;
        out
    }

    /// Writes `catalog.csv`, `images/<id>.png` and `ground_truth.json`.
    pub fn write_to_dir(&self, dir: &Path) -> Result<(), CatalogError> {
        let images = dir.join("images");
        std::fs::create_dir_all(&images).map_err(|e| CatalogError::io(&images, e))?;
        self.paintings.par_iter().try_for_each(|p| {
            let path = dir.join(&p.record.image_ref);
            std::fs::write(&path, p.image.encode_png()).map_err(|e| CatalogError::io(&path, e))
        })?;
        save_catalog(&dir.join("catalog.csv"), &self.records())?;
        let truth = dir.join("ground_truth.json");
        let mut json = serde_json::to_vec_pretty(&self.truth).expect("ground truth serializes");
        json.push(b'\n');
        std::fs::write(&truth, json).map_err(|e| CatalogError::io(&truth, e))
    }
}

fn noise_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(NOISE_STREAM);
    rng
}

fn pick<'a>(rng: &mut ChaCha8Rng, table: &[(&'a str, f64)]) -> &'a str {
    let dist = WeightedIndex::new(table.iter().map(|t| t.1)).expect("positive weights");
    table[dist.sample(rng)].0
}

fn chromatic(rng: &mut ChaCha8Rng) -> RgbPixel {
    loop {
        let px = RgbPixel::new(rng.random(), rng.random(), rng.random());
        let hi = px.r.max(px.g).max(px.b);
        let lo = px.r.min(px.g).min(px.b);
        if hi - lo >= 30 {
            return px;
        }
    }
}

/// A shape fill far enough from `bg` in brightness to produce edges.
fn contrasting(rng: &mut ChaCha8Rng, bg: RgbPixel) -> RgbPixel {
    let luma = |p: RgbPixel| 0.3 * f64::from(p.r) + 0.59 * f64::from(p.g) + 0.11 * f64::from(p.b);
    loop {
        let px = chromatic(rng);
        if (luma(px) - luma(bg)).abs() >= 30.0 {
            return px;
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Shape {
    Rect { x0: f64, y0: f64, x1: f64, y1: f64 },
    Ellipse { cx: f64, cy: f64, rx: f64, ry: f64 },
    Triangle([(f64, f64); 3]),
}

impl Shape {
    fn contains(&self, x: f64, y: f64) -> bool {
        match *self {
            Shape::Rect { x0, y0, x1, y1 } => x >= x0 && x <= x1 && y >= y0 && y <= y1,
            Shape::Ellipse { cx, cy, rx, ry } => ((x - cx) / rx).powi(2) + ((y - cy) / ry).powi(2) <= 1.0,
            Shape::Triangle([a, b, c]) => {
                let side = |p: (f64, f64), q: (f64, f64)| (q.0 - p.0) * (y - p.1) - (q.1 - p.1) * (x - p.0);
                let (d1, d2, d3) = (side(a, b), side(b, c), side(c, a));
                let neg = d1 < 0.0 || d2 < 0.0 || d3 < 0.0;
                let pos = d1 > 0.0 || d2 > 0.0 || d3 > 0.0;
                !(neg && pos)
            }
        }
    }

    fn random(rng: &mut ChaCha8Rng, size: f64) -> Self {
        let at = |rng: &mut ChaCha8Rng| rng.random_range(0.0..size);
        match rng.random_range(0..3) {
            0 => {
                let (a, b, c, d) = (at(rng), at(rng), at(rng), at(rng));
                Shape::Rect {
                    x0: a.min(b),
                    x1: a.max(b),
                    y0: c.min(d),
                    y1: c.max(d),
                }
            }
            1 => {
                let (cx, cy) = (at(rng), at(rng));
                let rx = rng.random_range(size * 0.05..size * 0.45);
                let ry = rng.random_range(size * 0.05..size * 0.45);
                Shape::Ellipse { cx, cy, rx, ry }
            }
            _ => Shape::Triangle([(at(rng), at(rng)), (at(rng), at(rng)), (at(rng), at(rng))]),
        }
    }
}

/// Draws a random composition of rectangles, ellipses and triangles on a
/// coloured background, optionally mirrored or speckled.
pub fn draw_composition(rng: &mut ChaCha8Rng, size: u32) -> RgbRaster {
    let s = f64::from(size);
    let bg = chromatic(rng);
    let n_shapes = rng.random_range(1..=12);
    let shapes: Vec<(Shape, RgbPixel)> = (0..n_shapes)
        .map(|_| (Shape::random(rng, s), contrasting(rng, bg)))
        .collect();
    let mirror = rng.random_bool(0.25);
    let speckle = if rng.random_bool(0.4) { rng.random_range(5u8..60) } else { 0 };

    let mut img = RgbRaster::from_fn(size, size, |x, y| {
        let x = if mirror && x >= size / 2 { size - 1 - x } else { x };
        let (px, py) = (f64::from(x) + 0.5, f64::from(y) + 0.5);
        shapes
            .iter()
            .rev()
            .find(|(shape, _)| shape.contains(px, py))
            .map_or(bg, |&(_, c)| c)
    })
    .expect("non-empty raster");
    if speckle > 0 {
        let jitter = |v: u8, d: i16| (i16::from(v) + d).clamp(0, 255) as u8;
        let amp = i16::from(speckle);
        img = RgbRaster::from_fn(size, size, |x, y| {
            let p = img.pixel(x, y);
            RgbPixel::new(
                jitter(p.r, rng.random_range(-amp..=amp)),
                jitter(p.g, rng.random_range(-amp..=amp)),
                jitter(p.b, rng.random_range(-amp..=amp)),
            )
        })
        .expect("non-empty raster");
    }
    img
}

fn draw_record(rng: &mut ChaCha8Rng, i: usize) -> SaleRecord {
    let age: f64 = Beta::new(0.806, 1.46).expect("valid beta").sample(rng);
    let surface: f64 = LogNormal::new(1.185, 1.155).expect("valid lognormal").sample(rng);
    let id = format!("syn{i:04}");
    SaleRecord {
        image_ref: format!("images/{id}.png"),
        id,
        price: 1.0,
        sale_year: rng.random_range(2000..=2018),
        age: (47.0 + 78.0 * age).round(),
        surface: (surface.clamp(0.016, 163.5) * 1000.0).round() / 1000.0,
        signature: rng.random_bool(0.564),
        dated: rng.random_bool(0.617),
        material: pick(rng, &MATERIALS).to_string(),
        city: pick(rng, &CITIES).to_string(),
        salesroom: pick(rng, &SALESROOMS).to_string(),
    }
}

fn draw_painting(seed: u64, i: usize, cfg: &FeatureConfig) -> (SaleRecord, RgbRaster, FeatureVector) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i as u64);
    let record = draw_record(&mut rng, i);
    loop {
        let image = draw_composition(&mut rng, SYNTHETIC_IMAGE_SIZE);
        let fv = extract_features(&image, cfg).expect("synthetic rasters are valid");
        // every measure must have a logarithm
        if fv.values().iter().all(|v| *v > 0.0) {
            let fv = fv.with_source_id(&record.id);
            return (record, image.with_source_id(fv.source_id.clone()), fv);
        }
    }
}

/// Generates `n` paintings whose log prices follow the full hedonic
/// specification with the given coefficients plus `N(0, noise_sd)` noise.
///
/// Names missing from `coefficients` get a zero coefficient. Images and
/// attributes depend only on `seed` and the row index; the noise comes from
/// a separate stream, so changing `noise_sd` leaves the design unchanged.
pub fn generate_synthetic(
    seed: u64,
    n: usize,
    coefficients: &BTreeMap<String, f64>,
    noise_sd: f64,
    cfg: &FeatureConfig,
) -> Result<SyntheticDataset, CatalogError> {
    if n < MIN_SYNTHETIC_ROWS {
        return Err(CatalogError::Synthetic(format!("n must be at least {MIN_SYNTHETIC_ROWS}, got {n}")));
    }
    if !(noise_sd.is_finite() && noise_sd >= 0.0) {
        return Err(CatalogError::Synthetic(format!("noise_sd must be non-negative, got {noise_sd}")));
    }
    cfg.validate().map_err(|e| CatalogError::Config(e.to_string()))?;
    let spec = ModelSpec::full();
    let names: Vec<String> = spec.terms().iter().map(ToString::to_string).collect();
    if let Some(unknown) = coefficients.keys().find(|k| !names.contains(k)) {
        return Err(CatalogError::Synthetic(format!("no term named {unknown:?} in the full specification")));
    }
    let full: BTreeMap<String, f64> = names
        .iter()
        .map(|k| (k.clone(), coefficients.get(k).copied().unwrap_or(0.0)))
        .collect();

    let drawn: Vec<_> = (0..n).into_par_iter().map(|i| draw_painting(seed, i, cfg)).collect();
    let (records, rest): (Vec<SaleRecord>, Vec<_>) = drawn.into_iter().map(|(r, img, fv)| (r, (img, fv))).unzip();
    let features: Vec<FeatureVector> = rest.iter().map(|(_, fv)| fv.clone()).collect();
    let dm = build_design_matrix(&records, &features, &spec).map_err(|e| CatalogError::Synthetic(e.to_string()))?;
    let beta: Vec<f64> = dm.names.iter().map(|name| full[name]).collect();

    let mut noise_rng = noise_rng(seed);
    let normal = Normal::new(0.0, 1.0).expect("standard normal");

    let paintings = records
        .into_iter()
        .zip(rest)
        .enumerate()
        .map(|(i, (mut record, (image, features)))| {
            let log_signal: f64 = dm.x.row(i).iter().zip(&beta).map(|(x, b)| x * b).sum();
            let eps = noise_sd * normal.sample(&mut noise_rng);
            record.price = (log_signal + eps).exp();
            SyntheticPainting {
                record,
                image,
                features,
                log_signal,
            }
        })
        .collect();

    Ok(SyntheticDataset {
        paintings,
        truth: GroundTruth {
            coefficients: full,
            noise_sd,
            seed,
        },
        spec,
    })
}
