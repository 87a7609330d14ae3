//! Descriptive statistics of feature rows: one line per measure and the
//! Pearson correlation matrix.

use std::fmt::Write;

use serde::Serialize;

use crate::features::{FeatureVector, Measure};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureSummary {
    pub measure: Measure,
    pub obs: usize,
    pub mean: f64,
    /// Sample standard deviation; 0 for a single observation.
    pub sd: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureSummary {
    pub rows: Vec<MeasureSummary>,
    /// `None` where a measure has zero variance.
    pub correlation: [[Option<f64>; 5]; 5],
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sum of cross deviations from the means.
fn co_deviation(xs: &[f64], ys: &[f64]) -> f64 {
    let (mx, my) = (mean(xs), mean(ys));
    xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum()
}

pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let sxx = co_deviation(xs, xs);
    let syy = co_deviation(ys, ys);
    if xs.len() < 2 || sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some((co_deviation(xs, ys) / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Summarises a non-empty set of feature rows; `None` for empty input.
pub fn summarize(features: &[FeatureVector]) -> Option<FeatureSummary> {
    if features.is_empty() {
        return None;
    }
    let columns: Vec<Vec<f64>> = Measure::ALL
        .iter()
        .map(|&m| features.iter().map(|f| f.get(m)).collect())
        .collect();
    let n = features.len();
    let rows = Measure::ALL
        .iter()
        .zip(&columns)
        .map(|(&measure, xs)| MeasureSummary {
            measure,
            obs: n,
            mean: mean(xs),
            sd: if n > 1 {
                (co_deviation(xs, xs) / (n - 1) as f64).sqrt()
            } else {
                0.0
            },
            min: xs.iter().copied().fold(f64::INFINITY, f64::min),
            max: xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
        .collect();
    let mut correlation = [[None; 5]; 5];
    for i in 0..5 {
        for j in 0..=i {
            let r = pearson(&columns[i], &columns[j]);
            correlation[i][j] = r;
            correlation[j][i] = r;
        }
    }
    Some(FeatureSummary { rows, correlation })
}

impl FeatureSummary {
    /// Statistics table followed by the lower triangle of the correlation
    /// matrix.
    pub fn render(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{:<10}{:>8}{:>12}{:>12}{:>12}{:>12}", "Variable", "Obs", "Mean", "Std. Dev.", "Min", "Max").unwrap();
        for r in &self.rows {
            writeln!(
                out,
                "{:<10}{:>8}{:>12.4}{:>12.4}{:>12.4}{:>12.4}",
                r.measure.label(),
                r.obs,
                r.mean,
                r.sd,
                r.min,
                r.max
            )
            .unwrap();
        }
        out.push('\n');
        write!(out, "{:<10}", "Corr").unwrap();
        for m in Measure::ALL {
            write!(out, "{:>10}", m.label()).unwrap();
        }
        out.push('\n');
        for (i, m) in Measure::ALL.iter().enumerate() {
            write!(out, "{:<10}", m.label()).unwrap();
            for j in 0..=i {
                match self.correlation[i][j] {
                    Some(r) => write!(out, "{r:>10.3}").unwrap(),
                    None => write!(out, "{:>10}", "n/a").unwrap(),
                }
            }
            out.push('\n');
        }
        out
    }
}
