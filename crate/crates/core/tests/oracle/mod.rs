//! Slow, independent reference implementations used as test oracles.
//!
//! Everything here is written from the textbook definitions with explicit
//! loops and no shared helpers from the library.

#![allow(dead_code, clippy::needless_range_loop)]

use paintinfo::RgbRaster;

/// Mean, then mean squared deviation.
pub fn two_pass_variance(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let n = xs.len() as f64;
    let mut mean = 0.0;
    for x in xs {
        mean += x;
    }
    mean /= n;
    let mut ss = 0.0;
    for x in xs {
        ss += (x - mean) * (x - mean);
    }
    ss / n
}

pub fn gray_grid(img: &RgbRaster) -> Vec<Vec<f64>> {
    (0..img.height())
        .map(|y| {
            (0..img.width())
                .map(|x| {
                    let p = img.pixel(x, y);
                    let g = 0.3 * p.r as f64 + 0.59 * p.g as f64 + 0.11 * p.b as f64;
                    g.clamp(0.0, 255.0)
                })
                .collect()
        })
        .collect()
}

/// Sobel magnitudes with replicated borders.
pub fn sobel_magnitude(g: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let h = g.len() as i64;
    let w = g[0].len() as i64;
    let at = |x: i64, y: i64| g[y.clamp(0, h - 1) as usize][x.clamp(0, w - 1) as usize];
    let kx = [[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]];
    let ky = [[-1.0, -2.0, -1.0], [0.0, 0.0, 0.0], [1.0, 2.0, 1.0]];
    let mut out = vec![vec![0.0; w as usize]; h as usize];
    for y in 0..h {
        for x in 0..w {
            let (mut gx, mut gy) = (0.0, 0.0);
            for dy in 0..3 {
                for dx in 0..3 {
                    let v = at(x + dx as i64 - 1, y + dy as i64 - 1);
                    gx += kx[dy][dx] * v;
                    gy += ky[dy][dx] * v;
                }
            }
            out[y as usize][x as usize] = (gx * gx + gy * gy).sqrt();
        }
    }
    out
}

/// True if some Sobel magnitude lies so close to `threshold` that rounding
/// could decide the edge flag.
pub fn threshold_is_ambiguous(img: &RgbRaster, threshold: f64) -> bool {
    sobel_magnitude(&gray_grid(img))
        .iter()
        .flatten()
        .any(|m| (m - threshold).abs() < 1e-6)
}

pub fn edge_grid(img: &RgbRaster, threshold: f64) -> Vec<Vec<u8>> {
    sobel_magnitude(&gray_grid(img))
        .iter()
        .map(|row| row.iter().map(|&m| u8::from(m >= threshold)).collect())
        .collect()
}

pub fn v_line(img: &RgbRaster, threshold: f64) -> f64 {
    let flags: Vec<f64> = edge_grid(img, threshold)
        .iter()
        .flatten()
        .map(|&f| f as f64)
        .collect();
    two_pass_variance(&flags)
}

/// Standard HSV hue in degrees via the sextant formula.
pub fn hue(r: u8, g: u8, b: u8) -> Option<f64> {
    let (r, g, b) = (r as f64, g as f64, b as f64);
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let c = max - min;
    if c == 0.0 {
        None
    } else if max == r {
        Some(60.0 * ((g - b) / c).rem_euclid(6.0))
    } else if max == g {
        Some(60.0 * ((b - r) / c + 2.0))
    } else {
        Some(60.0 * ((r - g) / c + 4.0))
    }
}

pub fn v_color(img: &RgbRaster) -> f64 {
    let hues: Vec<f64> = img
        .pixels()
        .iter()
        .filter_map(|p| hue(p.r, p.g, p.b))
        .map(|h| h / 360.0)
        .collect();
    two_pass_variance(&hues)
}

pub fn value(r: u8, g: u8, b: u8) -> f64 {
    let num = (r as f64 / 255.0).powf(2.2) + (1.5 * g as f64 / 255.0).powf(2.2) + (0.6 * b as f64 / 255.0).powf(2.2);
    let den = 1.0 + 1.5f64.powf(2.2) + 0.6f64.powf(2.2);
    (num / den).sqrt()
}

pub fn v_value(img: &RgbRaster) -> f64 {
    let vals: Vec<f64> = img.pixels().iter().map(|p| value(p.r, p.g, p.b)).collect();
    two_pass_variance(&vals)
}

pub fn v_space(img: &RgbRaster, threshold: f64) -> f64 {
    let edges = edge_grid(img, threshold);
    let (w, h) = (img.width() as f64, img.height() as f64);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (y, row) in edges.iter().enumerate() {
        for (x, &f) in row.iter().enumerate() {
            if f == 1 {
                xs.push((x + 1) as f64 / w);
                ys.push((y + 1) as f64 / h);
            }
        }
    }
    if xs.len() < 2 {
        return 0.0;
    }
    let m = xs.len() as f64;
    two_pass_variance(&xs) * m / (2.0 * w) + two_pass_variance(&ys) * m / (2.0 * h)
}

/// Global SSIM of the left half against the mirrored right half.
pub fn lateral_ssim(img: &RgbRaster) -> f64 {
    let g = gray_grid(img);
    let w = g[0].len();
    let half = w / 2;
    let mut left = Vec::new();
    let mut right = Vec::new();
    for row in &g {
        for j in 0..half {
            left.push(row[j]);
            right.push(row[w - 1 - j]);
        }
    }
    let n = left.len() as f64;
    let mean = |v: &[f64]| v.iter().sum::<f64>() / n;
    let (ml, mr) = (mean(&left), mean(&right));
    let mut cov = 0.0;
    for i in 0..left.len() {
        cov += (left[i] - ml) * (right[i] - mr);
    }
    cov /= n;
    let (vl, vr) = (two_pass_variance(&left), two_pass_variance(&right));
    let c1 = (0.01f64 * 256.0).powi(2);
    let c2 = (0.03f64 * 256.0).powi(2);
    (2.0 * ml * mr + c1) * (2.0 * cov + c2) / ((ml * ml + mr * mr + c1) * (vl + vr + c2))
}

pub fn v_shape(img: &RgbRaster) -> f64 {
    let s = lateral_ssim(img).max(0.001);
    (1.0 / (1000.0 * s)).min(1.0)
}

/// All five measures in the library's order, default config.
pub fn measures(img: &RgbRaster) -> [f64; 5] {
    let t = 80.0;
    [v_line(img, t), v_color(img), v_value(img), v_shape(img), v_space(img, t)]
}

/// `|a - b| <= tol * |b|`. Differences below 1e-24 also pass: a two-pass
/// variance of equal values that are not exactly representable leaves
/// residue around 1e-33 where the library returns exactly 0.
pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    let d = (a - b).abs();
    d <= tol * b.abs() || d <= 1e-24
}

/// Solves `A x = b` by Gauss-Jordan elimination with partial pivoting.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let k = b.len();
    for col in 0..k {
        let piv = (col..k)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in 0..k {
            if row != col {
                let f = a[row][col] / a[col][col];
                for c in col..k {
                    a[row][c] -= f * a[col][c];
                }
                b[row] -= f * b[col];
            }
        }
    }
    (0..k).map(|i| b[i] / a[i][i]).collect()
}

pub fn invert(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let k = a.len();
    let cols: Vec<Vec<f64>> = (0..k)
        .map(|j| solve(a.to_vec(), (0..k).map(|i| f64::from(u8::from(i == j))).collect()))
        .collect();
    (0..k).map(|i| (0..k).map(|j| cols[j][i]).collect()).collect()
}

pub fn xtx(x: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let k = x[0].len();
    let mut m = vec![vec![0.0; k]; k];
    for row in x {
        for i in 0..k {
            for j in 0..k {
                m[i][j] += row[i] * row[j];
            }
        }
    }
    m
}

/// OLS coefficients from the normal equations `X'X b = X'y`.
pub fn normal_equations(x: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let k = x[0].len();
    let mut xty = vec![0.0; k];
    for (row, yi) in x.iter().zip(y) {
        for j in 0..k {
            xty[j] += row[j] * yi;
        }
    }
    solve(xtx(x), xty)
}

/// HC1 standard errors from the dense sandwich formula.
pub fn hc1(x: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let (n, k) = (x.len(), x[0].len());
    let b = normal_equations(x, y);
    let bread = invert(&xtx(x));
    let mut meat = vec![vec![0.0; k]; k];
    for (row, yi) in x.iter().zip(y) {
        let fitted: f64 = row.iter().zip(&b).map(|(a, c)| a * c).sum();
        let e2 = (yi - fitted).powi(2);
        for i in 0..k {
            for j in 0..k {
                meat[i][j] += e2 * row[i] * row[j];
            }
        }
    }
    let mul = |a: &[Vec<f64>], c: &[Vec<f64>]| -> Vec<Vec<f64>> {
        (0..k)
            .map(|i| (0..k).map(|j| (0..k).map(|l| a[i][l] * c[l][j]).sum()).collect())
            .collect()
    };
    let v = mul(&mul(&bread, &meat), &bread);
    let scale = n as f64 / (n - k) as f64;
    (0..k).map(|i| (scale * v[i][i]).sqrt()).collect()
}
