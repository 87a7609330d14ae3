//! Sign checks on the information coefficients and the plain-text regression
//! table.

use std::fmt::Write as _;

use serde::Serialize;

use crate::features::Measure;

use super::ols::ModelFit;
use super::spec::{log_column_name, AttributeTerm, CategoryField, INTERCEPT, LOG_SQUARED_LINE};
use super::HedonicError;

pub const STAR_LEGEND: &str = "*** p<0.01, ** p<0.05, * p<0.1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Positive,
    Negative,
    Zero,
}

impl Sign {
    fn of(x: f64) -> Self {
        if x > 0.0 {
            Sign::Positive
        } else if x < 0.0 {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisRow {
    pub term: String,
    pub coefficient: f64,
    pub std_error: f64,
    pub t_stat: Option<f64>,
    pub stars: String,
    pub sign: Sign,
    pub expected: Sign,
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub rows: Vec<HypothesisRow>,
}

impl HypothesisReport {
    /// True when every information term has its expected sign and is
    /// significant at the 10% level or better.
    pub fn supported(&self) -> bool {
        self.rows.iter().all(|r| r.consistent && !r.stars.is_empty())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<16} {:>12} {:>12} {:>8} {:>9} {:>10}", "term", "coef", "robust se", "t", "expected", "verdict");
        for r in &self.rows {
            let t = r.t_stat.map(|t| format!("{t:.2}")).unwrap_or_else(|| "n/a".into());
            let expected = match r.expected {
                Sign::Positive => "+",
                Sign::Negative => "-",
                Sign::Zero => "0",
            };
            let verdict = match (r.consistent, r.stars.is_empty()) {
                (true, false) => "supported",
                (true, true) => "weak",
                (false, _) => "contrary",
            };
            let _ = writeln!(
                out,
                "{:<16} {:>12} {:>12} {:>8} {:>9} {:>10}",
                r.term,
                format!("{}{}", format_sig(r.coefficient), r.stars),
                format!("({})", format_sig(r.std_error)),
                t,
                expected,
                verdict
            );
        }
        out
    }
}

/// Checks that every information coefficient is positive (the line quadratic,
/// when present, negative) and reports its robust t-statistic and stars.
pub fn hypothesis_report(fit: &ModelFit) -> Result<HypothesisReport, HedonicError> {
    let mut rows = Vec::new();
    for m in Measure::ALL {
        let mut wanted = vec![(log_column_name(m), Sign::Positive, true)];
        if m == Measure::Line {
            wanted.push((LOG_SQUARED_LINE.to_string(), Sign::Negative, false));
        }
        for (name, expected, required) in wanted {
            let Some(c) = fit.coefficient(&name) else {
                if required {
                    return Err(HedonicError::MissingTerm(name));
                }
                continue;
            };
            let sign = Sign::of(c.estimate);
            rows.push(HypothesisRow {
                term: name,
                coefficient: c.estimate,
                std_error: c.std_error,
                t_stat: c.t_stat,
                stars: c.stars.clone(),
                sign,
                expected,
                consistent: sign == expected,
            });
        }
    }
    Ok(HypothesisReport { rows })
}

/// Four significant figures; scientific notation outside [1e-4, 1e5).
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..5).contains(&exp) {
        let decimals = (3 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        let s = format!("{x:.3e}");
        match s.split_once('e') {
            Some((mantissa, e)) => {
                let e: i32 = e.parse().unwrap_or(0);
                let sign = if e < 0 { '-' } else { '+' };
                format!("{mantissa}e{sign}{:02}", e.abs())
            }
            None => s,
        }
    }
}

fn thousands(n: usize) -> String {
    let digits = n.to_string();
    let mut out = String::new();
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(ch);
    }
    out
}

enum Line {
    Section(&'static str),
    Coef { label: String, name: String },
    Control(CategoryField),
}

fn layout() -> Vec<Line> {
    let mut lines = vec![Line::Section("Painting Information")];
    for m in Measure::ALL {
        lines.push(Line::Coef {
            label: format!("log({})", m.label()),
            name: log_column_name(m),
        });
        if m == Measure::Line {
            lines.push(Line::Coef {
                label: "log²(V_line)".into(),
                name: LOG_SQUARED_LINE.into(),
            });
        }
    }
    lines.push(Line::Section("Painting Attribute"));
    for a in AttributeTerm::ALL {
        let label = match a {
            AttributeTerm::SurfaceSquared => "Surface²".to_string(),
            other => other.column_name().to_string(),
        };
        lines.push(Line::Coef {
            label,
            name: a.column_name().into(),
        });
    }
    lines.push(Line::Control(CategoryField::Material));
    lines.push(Line::Section("Other Control"));
    for f in [CategoryField::City, CategoryField::Salesroom, CategoryField::SaleYear] {
        lines.push(Line::Control(f));
    }
    lines.push(Line::Coef {
        label: "Constant".into(),
        name: INTERCEPT.into(),
    });
    lines
}

/// Renders fits side by side: coefficient with stars, robust standard error in
/// parentheses beneath, dummy families as "control", then observations and
/// adjusted R².
pub fn render_table(fits: &[&ModelFit]) -> String {
    let label_w = 22;
    let col_w = 16;
    let mut out = String::new();
    let rule = "-".repeat(label_w + col_w * fits.len());
    let row = |out: &mut String, label: &str, cells: &[String]| {
        let _ = write!(out, "{label:<label_w$}");
        for c in cells {
            let _ = write!(out, "{c:>col_w$}");
        }
        out.push('\n');
    };

    out.push_str(&rule);
    out.push('\n');
    let headers: Vec<String> = fits
        .iter()
        .enumerate()
        .map(|(i, f)| {
            if f.spec_name.is_empty() {
                format!("({})", i + 1)
            } else {
                f.spec_name.clone()
            }
        })
        .collect();
    row(&mut out, "VARIABLES", &headers);
    row(&mut out, "", &vec!["log(p)".to_string(); fits.len()]);
    out.push_str(&rule);
    out.push('\n');

    for line in layout() {
        match line {
            Line::Section(title) => row(&mut out, title, &[]),
            Line::Coef { label, name } => {
                let coefs: Vec<Option<_>> = fits.iter().map(|f| f.coefficient(&name)).collect();
                let est: Vec<String> = coefs
                    .iter()
                    .map(|c| c.map(|c| format!("{}{}", format_sig(c.estimate), c.stars)).unwrap_or_default())
                    .collect();
                let se: Vec<String> = coefs
                    .iter()
                    .map(|c| c.map(|c| format!("({})", format_sig(c.std_error))).unwrap_or_default())
                    .collect();
                row(&mut out, &label, &est);
                row(&mut out, "", &se);
            }
            Line::Control(field) => {
                let cells: Vec<String> = fits
                    .iter()
                    .map(|f| if f.controls.contains(&field) { "control".into() } else { String::new() })
                    .collect();
                row(&mut out, field.label(), &cells);
            }
        }
    }
    out.push_str(&rule);
    out.push('\n');
    let obs: Vec<String> = fits.iter().map(|f| thousands(f.n)).collect();
    row(&mut out, "Observations", &obs);
    let adj: Vec<String> = fits.iter().map(|f| format!("{:.3}", f.adj_r_squared)).collect();
    row(&mut out, "Adj-R-squared", &adj);
    out.push_str(&rule);
    out.push('\n');
    out.push_str("Robust standard errors in parentheses\n");
    out.push_str(STAR_LEGEND);
    out.push('\n');
    out
}
