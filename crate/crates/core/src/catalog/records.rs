use std::collections::HashSet;
use std::ops::RangeInclusive;
use std::path::Path;

use crate::hedonic::SaleRecord;

use super::CatalogError;

/// Exact, positional header of a catalog file.
pub const CATALOG_HEADER: [&str; 11] = [
    "id",
    "price_usd",
    "sale_year",
    "age",
    "surface_1000cm2",
    "signature",
    "dated",
    "material",
    "city",
    "salesroom",
    "image_path",
];

/// Sale years accepted by [`load_catalog`].
pub const DEFAULT_YEAR_WINDOW: RangeInclusive<i32> = 1700..=2100;

pub fn load_catalog(path: &Path) -> Result<Vec<SaleRecord>, CatalogError> {
    load_catalog_in_window(path, DEFAULT_YEAR_WINDOW)
}

/// Loads and validates a catalog, rejecting sale years outside `years`.
pub fn load_catalog_in_window(
    path: &Path,
    years: RangeInclusive<i32>,
) -> Result<Vec<SaleRecord>, CatalogError> {
    let bytes = std::fs::read(path).map_err(|e| CatalogError::io(path, e))?;
    parse_catalog(&bytes, years)
}

pub fn parse_catalog(bytes: &[u8], years: RangeInclusive<i32>) -> Result<Vec<SaleRecord>, CatalogError> {
    let text = std::str::from_utf8(bytes).map_err(|e| CatalogError::Parse {
        row: 0,
        column: None,
        message: format!("catalog is not UTF-8: {e}"),
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(text.as_bytes());
    let mut rows = reader.records();

    let header = match rows.next() {
        Some(h) => h.map_err(|e| csv_error(1, e))?,
        None => {
            return Err(CatalogError::Parse {
                row: 1,
                column: None,
                message: "empty file".into(),
            })
        }
    };
    if header.iter().ne(CATALOG_HEADER.iter().copied()) {
        return Err(CatalogError::Parse {
            row: 1,
            column: None,
            message: format!(
                "header must be exactly `{}`, found `{}`",
                CATALOG_HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }

    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, rec) in rows.enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| csv_error(row, e))?;
        let record = parse_row(&rec, row, &years)?;
        if !seen.insert(record.id.clone()) {
            return Err(CatalogError::Validation {
                row,
                id: record.id,
                message: "duplicate id".into(),
            });
        }
        out.push(record);
    }
    Ok(out)
}

fn csv_error(row: usize, e: csv::Error) -> CatalogError {
    let row = e.position().map(|p| p.line() as usize).unwrap_or(row);
    CatalogError::Parse {
        row,
        column: None,
        message: e.to_string(),
    }
}

fn parse_row(
    rec: &csv::StringRecord,
    row: usize,
    years: &RangeInclusive<i32>,
) -> Result<SaleRecord, CatalogError> {
    let id = rec[0].trim().to_string();
    let parse_err = |col: usize, message: String| CatalogError::Parse {
        row,
        column: Some(CATALOG_HEADER[col].to_string()),
        message,
    };
    let invalid = |message: String| CatalogError::Validation {
        row,
        id: id.clone(),
        message,
    };
    let number = |col: usize| -> Result<f64, CatalogError> {
        let raw = rec[col].trim();
        raw.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| parse_err(col, format!("not a number: {raw:?}")))
    };
    let text = |col: usize| -> Result<String, CatalogError> {
        let v = rec[col].trim();
        if v.is_empty() {
            Err(parse_err(col, "empty field".into()))
        } else {
            Ok(v.to_string())
        }
    };
    let flag = |col: usize| -> Result<bool, CatalogError> {
        match rec[col].trim() {
            "0" => Ok(false),
            "1" => Ok(true),
            other => Err(invalid(format!("{} must be 0 or 1, found {other:?}", CATALOG_HEADER[col]))),
        }
    };

    if id.is_empty() {
        return Err(parse_err(0, "empty id".into()));
    }
    let price = number(1)?;
    if price <= 0.0 {
        return Err(invalid(format!("price_usd must be positive, found {price}")));
    }
    let sale_year = rec[2]
        .trim()
        .parse::<i32>()
        .map_err(|_| invalid(format!("unparseable sale_year {:?}", &rec[2])))?;
    if !years.contains(&sale_year) {
        return Err(invalid(format!(
            "sale_year {sale_year} outside {}..={}",
            years.start(),
            years.end()
        )));
    }
    let age = number(3)?;
    if age < 0.0 {
        return Err(invalid(format!("age must be non-negative, found {age}")));
    }
    let surface = number(4)?;
    if surface <= 0.0 {
        return Err(invalid(format!("surface_1000cm2 must be positive, found {surface}")));
    }
    Ok(SaleRecord {
        price,
        sale_year,
        age,
        surface,
        signature: flag(5)?,
        dated: flag(6)?,
        material: text(7)?,
        city: text(8)?,
        salesroom: text(9)?,
        image_ref: text(10)?,
        id,
    })
}

pub fn catalog_to_bytes(records: &[SaleRecord]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CATALOG_HEADER).expect("in-memory write");
    for r in records {
        w.write_record([
            r.id.clone(),
            r.price.to_string(),
            r.sale_year.to_string(),
            r.age.to_string(),
            r.surface.to_string(),
            u8::from(r.signature).to_string(),
            u8::from(r.dated).to_string(),
            r.material.clone(),
            r.city.clone(),
            r.salesroom.clone(),
            r.image_ref.clone(),
        ])
        .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn save_catalog(path: &Path, records: &[SaleRecord]) -> Result<(), CatalogError> {
    std::fs::write(path, catalog_to_bytes(records)).map_err(|e| CatalogError::io(path, e))
}
