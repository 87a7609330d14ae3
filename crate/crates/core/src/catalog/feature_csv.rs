use std::path::Path;

use crate::features::{FeatureVector, FEATURE_CSV_HEADER};

use super::CatalogError;

pub fn features_to_bytes(rows: &[FeatureVector]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(FEATURE_CSV_HEADER).expect("in-memory write");
    for fv in rows {
        w.write_record(fv.to_csv_record()).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn save_features(path: &Path, rows: &[FeatureVector]) -> Result<(), CatalogError> {
    std::fs::write(path, features_to_bytes(rows)).map_err(|e| CatalogError::io(path, e))
}

pub fn parse_features(bytes: &[u8]) -> Result<Vec<FeatureVector>, CatalogError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).from_reader(bytes);
    let mut rows = reader.records();
    let parse_err = |row: usize, message: String| CatalogError::Parse {
        row,
        column: None,
        message,
    };
    let header = rows
        .next()
        .ok_or_else(|| parse_err(1, "empty file".into()))?
        .map_err(|e| parse_err(1, e.to_string()))?;
    if header.iter().ne(FEATURE_CSV_HEADER.iter().copied()) {
        return Err(parse_err(
            1,
            format!("header must be exactly `{}`", FEATURE_CSV_HEADER.join(",")),
        ));
    }
    rows.enumerate()
        .map(|(i, rec)| {
            let rec = rec.map_err(|e| parse_err(i + 2, e.to_string()))?;
            FeatureVector::from_csv_record(&rec).map_err(|m| parse_err(i + 2, m))
        })
        .collect()
}

pub fn load_features(path: &Path) -> Result<Vec<FeatureVector>, CatalogError> {
    let bytes = std::fs::read(path).map_err(|e| CatalogError::io(path, e))?;
    parse_features(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bitwise() {
        let fv = FeatureVector {
            source_id: "a,b".into(),
            v_line: 0.1 + 0.2,
            v_color: 1.0 / 3.0,
            v_value: 2f64.sqrt() / 7.0,
            v_shape: 1e-3,
            v_space: 0.0625,
            width: 96,
            height: 80,
            config_fingerprint: "0123456789abcdef".into(),
        };
        let back = parse_features(&features_to_bytes(&[fv.clone(), fv.clone()])).unwrap();
        assert_eq!(back, vec![fv.clone(), fv]);
    }

    #[test]
    fn bad_rows_are_reported() {
        let mut bytes = features_to_bytes(&[]);
        bytes.extend_from_slice(b"x,0.1,nan,0.1,0.1,0.1,8,8,c\n");
        assert!(matches!(parse_features(&bytes), Err(CatalogError::Parse { row: 2, .. })));
        assert!(parse_features(b"").is_err());
        assert!(parse_features(b"id,v\n").is_err());
    }
}
