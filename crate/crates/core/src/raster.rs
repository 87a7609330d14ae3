//! Image decoding and the preprocessing shared by every measure: resolution
//! alignment, floating-point grayscale and Sobel edge detection.

use image::imageops::{self, FilterType};
use image::{ImageBuffer, Rgb};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default Sobel magnitude threshold on the 0–255 grayscale scale.
pub const DEFAULT_EDGE_THRESHOLD: f64 = 80.0;

/// Default longest side after resolution alignment.
pub const DEFAULT_MAX_DIM: u32 = 1024;

#[derive(Debug, Error)]
pub enum RasterError {
    #[error("cannot decode image: {0}")]
    Decode(String),
    #[error("invalid raster dimensions {width}x{height}")]
    Dimension { width: u32, height: u32 },
    #[error("pixel buffer holds {actual} pixels, expected {expected}")]
    PixelCount { expected: usize, actual: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RgbPixel {
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

impl RgbPixel {
    pub const fn new(r: u8, g: u8, b: u8) -> Self {
        Self { r, g, b }
    }

    pub const fn gray(v: u8) -> Self {
        Self { r: v, g: v, b: v }
    }
}

impl From<[u8; 3]> for RgbPixel {
    fn from([r, g, b]: [u8; 3]) -> Self {
        Self { r, g, b }
    }
}

/// A decoded image: `width * height` RGB pixels in row-major order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbRaster {
    width: u32,
    height: u32,
    pixels: Vec<RgbPixel>,
    source_id: String,
}

impl RgbRaster {
    pub fn new(
        width: u32,
        height: u32,
        pixels: Vec<RgbPixel>,
        source_id: impl Into<String>,
    ) -> Result<Self, RasterError> {
        if width == 0 || height == 0 {
            return Err(RasterError::Dimension { width, height });
        }
        let expected = width as usize * height as usize;
        if pixels.len() != expected {
            return Err(RasterError::PixelCount {
                expected,
                actual: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
            source_id: source_id.into(),
        })
    }

    /// Raster filled with a single colour.
    pub fn filled(width: u32, height: u32, px: RgbPixel) -> Result<Self, RasterError> {
        Self::new(width, height, vec![px; width as usize * height as usize], "")
    }

    /// Builds a raster by evaluating `f(x, y)` for every pixel (0-based).
    pub fn from_fn(
        width: u32,
        height: u32,
        mut f: impl FnMut(u32, u32) -> RgbPixel,
    ) -> Result<Self, RasterError> {
        let mut pixels = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels, "")
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[RgbPixel] {
        &self.pixels
    }

    pub fn pixel(&self, x: u32, y: u32) -> RgbPixel {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    pub fn with_source_id(mut self, id: impl Into<String>) -> Self {
        self.source_id = id.into();
        self
    }

    /// Left-right mirror image.
    pub fn mirrored(&self) -> Self {
        let w = self.width as usize;
        let pixels = self
            .pixels
            .chunks_exact(w)
            .flat_map(|row| row.iter().rev().copied())
            .collect();
        Self {
            width: self.width,
            height: self.height,
            pixels,
            source_id: self.source_id.clone(),
        }
    }

    fn to_image_buffer(&self) -> ImageBuffer<Rgb<u8>, Vec<u8>> {
        let raw = self.pixels.iter().flat_map(|p| [p.r, p.g, p.b]).collect();
        ImageBuffer::from_raw(self.width, self.height, raw).expect("buffer size matches dimensions")
    }

    /// Encodes the raster as PNG.
    pub fn encode_png(&self) -> Vec<u8> {
        let mut out = std::io::Cursor::new(Vec::new());
        self.to_image_buffer()
            .write_to(&mut out, image::ImageFormat::Png)
            .expect("in-memory PNG encoding");
        out.into_inner()
    }
}

/// Per-pixel real grayscale in [0, 255].
#[derive(Debug, Clone, PartialEq)]
pub struct GrayRaster {
    width: u32,
    height: u32,
    values: Vec<f64>,
}

impl GrayRaster {
    pub fn new(width: u32, height: u32, values: Vec<f64>) -> Result<Self, RasterError> {
        if width == 0 || height == 0 {
            return Err(RasterError::Dimension { width, height });
        }
        let expected = width as usize * height as usize;
        if values.len() != expected {
            return Err(RasterError::PixelCount {
                expected,
                actual: values.len(),
            });
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, x: u32, y: u32) -> f64 {
        self.values[y as usize * self.width as usize + x as usize]
    }
}

/// Binary edge flags, one per pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeMap {
    width: u32,
    height: u32,
    flags: Vec<u8>,
}

impl EdgeMap {
    /// Builds an edge map from flags; any non-zero flag is stored as 1.
    pub fn new(width: u32, height: u32, flags: Vec<u8>) -> Result<Self, RasterError> {
        if width == 0 || height == 0 {
            return Err(RasterError::Dimension { width, height });
        }
        let expected = width as usize * height as usize;
        if flags.len() != expected {
            return Err(RasterError::PixelCount {
                expected,
                actual: flags.len(),
            });
        }
        let flags = flags.into_iter().map(|f| u8::from(f != 0)).collect();
        Ok(Self {
            width,
            height,
            flags,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn flags(&self) -> &[u8] {
        &self.flags
    }

    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.flags[y as usize * self.width as usize + x as usize]
    }

    pub fn edge_count(&self) -> usize {
        self.flags.iter().filter(|&&f| f == 1).count()
    }
}

/// Decodes a PNG or JPEG payload. Transparent pixels are composited over white.
pub fn decode_image(bytes: &[u8]) -> Result<RgbRaster, RasterError> {
    let format = image::guess_format(bytes).map_err(|e| RasterError::Decode(e.to_string()))?;
    if !matches!(format, image::ImageFormat::Png | image::ImageFormat::Jpeg) {
        return Err(RasterError::Decode(format!(
            "unsupported format {format:?}"
        )));
    }
    let img = image::load_from_memory_with_format(bytes, format)
        .map_err(|e| RasterError::Decode(e.to_string()))?;
    let (width, height) = (img.width(), img.height());
    if width == 0 || height == 0 {
        return Err(RasterError::Dimension { width, height });
    }
    let pixels = if img.color().has_alpha() {
        img.to_rgba8()
            .pixels()
            .map(|p| {
                let [r, g, b, a] = p.0;
                RgbPixel::new(over_white(r, a), over_white(g, a), over_white(b, a))
            })
            .collect()
    } else {
        img.to_rgb8().pixels().map(|p| RgbPixel::from(p.0)).collect()
    };
    RgbRaster::new(width, height, pixels, "")
}

fn over_white(c: u8, a: u8) -> u8 {
    let (c, a) = (u32::from(c), u32::from(a));
    ((c * a + 255 * (255 - a) + 127) / 255) as u8
}

/// Target dimensions for a downscale whose longer side becomes `max_dim`.
pub fn budget_dimensions(width: u32, height: u32, max_dim: u32) -> (u32, u32) {
    let long = width.max(height);
    if long <= max_dim {
        return (width, height);
    }
    let scale = f64::from(max_dim) / f64::from(long);
    let shrink = |side: u32| ((f64::from(side) * scale).round() as u32).clamp(1, max_dim);
    if width >= height {
        (max_dim, shrink(height))
    } else {
        (shrink(width), max_dim)
    }
}

/// Downscale-only bilinear resize so that the longer side is at most `max_dim`.
///
/// # Panics
/// If `max_dim` is zero.
pub fn resize_to_budget(img: &RgbRaster, max_dim: u32) -> RgbRaster {
    assert!(max_dim >= 1, "max_dim must be at least 1");
    let (w, h) = budget_dimensions(img.width, img.height, max_dim);
    if (w, h) == (img.width, img.height) {
        return img.clone();
    }
    let resized = imageops::resize(&img.to_image_buffer(), w, h, FilterType::Triangle);
    let pixels = resized.pixels().map(|p| RgbPixel::from(p.0)).collect();
    RgbRaster::new(w, h, pixels, img.source_id.clone()).expect("resize keeps a valid shape")
}

/// Floating-point grayscale `0.3 R + 0.59 G + 0.11 B`, unrounded.
pub fn to_grayscale(img: &RgbRaster) -> GrayRaster {
    let values = img.pixels.iter().map(|&p| grayscale(p)).collect();
    GrayRaster {
        width: img.width,
        height: img.height,
        values,
    }
}

#[inline]
pub fn grayscale(p: RgbPixel) -> f64 {
    // the weighted sum can overshoot 255 by an ulp
    (0.3 * f64::from(p.r) + 0.59 * f64::from(p.g) + 0.11 * f64::from(p.b)).clamp(0.0, 255.0)
}

/// 3×3 Sobel edge detection with edge-replication padding. A pixel is an edge
/// iff its gradient magnitude is at least `threshold`.
///
/// # Panics
/// If `threshold` is not a positive finite number.
pub fn detect_edges(gray: &GrayRaster, threshold: f64) -> EdgeMap {
    assert!(
        threshold.is_finite() && threshold > 0.0,
        "edge threshold must be positive"
    );
    let (w, h) = (gray.width as usize, gray.height as usize);
    let v = &gray.values;
    let threshold_sq = threshold * threshold;
    let mut flags = vec![0u8; w * h];
    for y in 0..h {
        let up = y.saturating_sub(1) * w;
        let mid = y * w;
        let down = (y + 1).min(h - 1) * w;
        for x in 0..w {
            let l = x.saturating_sub(1);
            let r = (x + 1).min(w - 1);
            let gx = (v[up + r] + 2.0 * v[mid + r] + v[down + r])
                - (v[up + l] + 2.0 * v[mid + l] + v[down + l]);
            let gy = (v[down + l] + 2.0 * v[down + x] + v[down + r])
                - (v[up + l] + 2.0 * v[up + x] + v[up + r]);
            flags[mid + x] = u8::from(gx * gx + gy * gy >= threshold_sq);
        }
    }
    EdgeMap {
        width: gray.width,
        height: gray.height,
        flags,
    }
}
