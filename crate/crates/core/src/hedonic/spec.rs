use std::fmt;

use serde::{Deserialize, Serialize};

use crate::features::Measure;
use crate::fingerprint::fingerprint;

use super::{HedonicError, SaleRecord};

/// Non-image painting attributes, entered untransformed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttributeTerm {
    Surface,
    SurfaceSquared,
    Age,
    Signature,
    Dated,
}

impl AttributeTerm {
    pub const ALL: [AttributeTerm; 5] = [
        AttributeTerm::Surface,
        AttributeTerm::SurfaceSquared,
        AttributeTerm::Age,
        AttributeTerm::Signature,
        AttributeTerm::Dated,
    ];

    pub fn column_name(self) -> &'static str {
        match self {
            AttributeTerm::Surface => "Surface",
            AttributeTerm::SurfaceSquared => "Surface^2",
            AttributeTerm::Age => "Age",
            AttributeTerm::Signature => "Signature",
            AttributeTerm::Dated => "Dated",
        }
    }

    pub fn value(self, rec: &SaleRecord) -> f64 {
        match self {
            AttributeTerm::Surface => rec.surface,
            AttributeTerm::SurfaceSquared => rec.surface * rec.surface,
            AttributeTerm::Age => rec.age,
            AttributeTerm::Signature => f64::from(u8::from(rec.signature)),
            AttributeTerm::Dated => f64::from(u8::from(rec.dated)),
        }
    }
}

/// Which categorical field of a [`SaleRecord`] a dummy family encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CategoryField {
    Material,
    City,
    Salesroom,
    SaleYear,
}

impl CategoryField {
    pub const ALL: [CategoryField; 4] = [
        CategoryField::Material,
        CategoryField::City,
        CategoryField::Salesroom,
        CategoryField::SaleYear,
    ];

    pub fn key(self) -> &'static str {
        match self {
            CategoryField::Material => "material",
            CategoryField::City => "city",
            CategoryField::Salesroom => "salesroom",
            CategoryField::SaleYear => "sale_year",
        }
    }

    /// Row label in rendered tables.
    pub fn label(self) -> &'static str {
        match self {
            CategoryField::Material => "Material",
            CategoryField::City => "City",
            CategoryField::Salesroom => "Salesroom",
            CategoryField::SaleYear => "Salesyear",
        }
    }

    pub fn level_of(self, rec: &SaleRecord) -> String {
        match self {
            CategoryField::Material => rec.material.clone(),
            CategoryField::City => rec.city.clone(),
            CategoryField::Salesroom => rec.salesroom.clone(),
            CategoryField::SaleYear => rec.sale_year.to_string(),
        }
    }
}

/// One categorical control. Every level except `base` becomes a 0/1 column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DummyFamily {
    pub field: CategoryField,
    pub levels: Vec<String>,
    pub base: String,
}

impl DummyFamily {
    pub fn new(field: CategoryField, levels: &[&str], base: &str) -> Self {
        Self {
            field,
            levels: levels.iter().map(|s| s.to_string()).collect(),
            base: base.to_string(),
        }
    }

    pub fn column_name(&self, level: &str) -> String {
        format!("{}:{}", self.field.key(), level)
    }
}

/// A regressor of the hedonic model.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Intercept,
    /// `ln(scale * V)`
    Log(Measure),
    /// `ln(scale * V_line)^2`
    LogSquaredLine,
    Attribute(AttributeTerm),
    Dummy { field: CategoryField, level: String },
}

pub const INTERCEPT: &str = "Constant";
pub const LOG_SQUARED_LINE: &str = "log(V_line)^2";

pub fn log_column_name(m: Measure) -> String {
    format!("log({})", m.label())
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Intercept => f.write_str(INTERCEPT),
            Term::Log(m) => f.write_str(&log_column_name(*m)),
            Term::LogSquaredLine => f.write_str(LOG_SQUARED_LINE),
            Term::Attribute(a) => f.write_str(a.column_name()),
            Term::Dummy { field, level } => write!(f, "{}:{}", field.key(), level),
        }
    }
}

/// Regressor set of one hedonic specification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    #[serde(default)]
    pub name: String,
    pub information_terms: Vec<Measure>,
    #[serde(default)]
    pub line_quadratic: bool,
    pub attribute_terms: Vec<AttributeTerm>,
    pub dummy_families: Vec<DummyFamily>,
    #[serde(default = "default_log_scale")]
    pub log_scale_factor: f64,
}

fn default_log_scale() -> f64 {
    1000.0
}

/// Named nested specifications.
pub const PRESETS: [&str; 3] = ["attributes", "line-color", "full"];

impl ModelSpec {
    /// Material, city, salesroom and sale-year families with "Others" and the
    /// first sample year as bases.
    pub fn default_dummy_families() -> Vec<DummyFamily> {
        let years: Vec<String> = (2000..=2018).map(|y: i32| y.to_string()).collect();
        let years: Vec<&str> = years.iter().map(String::as_str).collect();
        vec![
            DummyFamily::new(
                CategoryField::Material,
                &["Board", "Burlap", "Canvas", "Cardboard", "Ceramic", "Others"],
                "Others",
            ),
            DummyFamily::new(
                CategoryField::City,
                &["London", "New York", "Paris", "Others"],
                "Others",
            ),
            DummyFamily::new(
                CategoryField::Salesroom,
                &["Christie's", "Sotheby's", "Others"],
                "Others",
            ),
            DummyFamily::new(CategoryField::SaleYear, &years, "2000"),
        ]
    }

    /// Attributes and controls only.
    pub fn attributes_only() -> Self {
        Self {
            name: "(1)".into(),
            information_terms: vec![],
            line_quadratic: false,
            attribute_terms: AttributeTerm::ALL.to_vec(),
            dummy_families: Self::default_dummy_families(),
            log_scale_factor: default_log_scale(),
        }
    }

    /// Adds line (with its quadratic) and colour.
    pub fn line_and_color() -> Self {
        Self {
            name: "(2)".into(),
            information_terms: vec![Measure::Line, Measure::Color],
            line_quadratic: true,
            ..Self::attributes_only()
        }
    }

    /// All five measures plus the line quadratic.
    pub fn full() -> Self {
        Self {
            name: "(3)".into(),
            information_terms: Measure::ALL.to_vec(),
            line_quadratic: true,
            ..Self::attributes_only()
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "attributes" => Some(Self::attributes_only()),
            "line-color" => Some(Self::line_and_color()),
            "full" => Some(Self::full()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), HedonicError> {
        let bad = |msg: String| Err(HedonicError::Spec(msg));
        if !(self.log_scale_factor.is_finite() && self.log_scale_factor > 0.0) {
            return bad("log_scale_factor must be positive".into());
        }
        if self.line_quadratic && !self.information_terms.contains(&Measure::Line) {
            return bad("the line quadratic needs log(V_line) among the information terms".into());
        }
        for fam in &self.dummy_families {
            let bases = fam.levels.iter().filter(|l| **l == fam.base).count();
            if bases == 0 {
                return bad(format!(
                    "base level {:?} is not a declared {} level",
                    fam.base,
                    fam.field.key()
                ));
            }
        }
        Ok(())
    }

    /// Columns in design order, before dropping levels absent from the data.
    pub fn terms(&self) -> Vec<Term> {
        let mut terms = vec![Term::Intercept];
        for &m in &self.information_terms {
            terms.push(Term::Log(m));
            if m == Measure::Line && self.line_quadratic {
                terms.push(Term::LogSquaredLine);
            }
        }
        terms.extend(self.attribute_terms.iter().map(|&a| Term::Attribute(a)));
        for fam in &self.dummy_families {
            for level in fam.levels.iter().filter(|l| **l != fam.base) {
                terms.push(Term::Dummy {
                    field: fam.field,
                    level: level.clone(),
                });
            }
        }
        terms
    }

    pub fn fingerprint(&self) -> String {
        fingerprint(self)
    }
}
