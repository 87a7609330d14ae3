use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::features::{extract_features, FeatureConfig, FeatureVector};
use crate::fingerprint::content_hash;
use crate::hedonic::SaleRecord;
use crate::raster::decode_image;

use super::{CatalogError, FeatureCache};

/// A record whose image could not be processed.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordFailure {
    /// Position in the input list.
    pub index: usize,
    pub id: String,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct ExtractReport {
    /// Successful records, in input order.
    pub features: Vec<(SaleRecord, FeatureVector)>,
    pub failures: Vec<RecordFailure>,
    /// Distinct images whose features were computed in this run.
    pub computed: usize,
}

impl ExtractReport {
    pub fn is_complete(&self) -> bool {
        self.failures.is_empty()
    }
}

fn image_path(root: &Path, rec: &SaleRecord) -> PathBuf {
    root.join(&rec.image_ref)
}

fn compute(path: &Path, hash: &str, cfg: &FeatureConfig) -> Result<FeatureVector, String> {
    let bytes = std::fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let img = decode_image(&bytes).map_err(|e| format!("{}: {e}", path.display()))?;
    let fv = extract_features(&img.with_source_id(hash), cfg).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(fv)
}

/// Extracts features for every record under one config.
///
/// Images are identified by content hash, so records sharing a file (or
/// identical files under different names) are analysed once. The cache is
/// consulted first and receives every new vector. With `fail_fast`, the first
/// failure in input order is returned as an error; otherwise failures are
/// collected in the report.
pub fn extract_all(
    records: &[SaleRecord],
    image_root: &Path,
    cfg: &FeatureConfig,
    cache: &FeatureCache,
    fail_fast: bool,
) -> Result<ExtractReport, CatalogError> {
    cfg.validate().map_err(|e| CatalogError::Config(e.to_string()))?;
    let fp = cfg.fingerprint();

    let hashes: Vec<Result<String, String>> = records
        .par_iter()
        .map(|rec| {
            let path = image_path(image_root, rec);
            std::fs::read(&path)
                .map(|b| content_hash(&b))
                .map_err(|e| format!("{}: {e}", path.display()))
        })
        .collect();

    let fail = |index: usize, message: String, failures: &mut Vec<RecordFailure>| -> Result<(), CatalogError> {
        let failure = RecordFailure {
            index,
            id: records[index].id.clone(),
            message,
        };
        if fail_fast {
            return Err(CatalogError::Record {
                id: failure.id,
                message: failure.message,
            });
        }
        failures.push(failure);
        Ok(())
    };

    // first record index per uncached hash
    let mut pending: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, h) in hashes.iter().enumerate() {
        if let Ok(h) = h {
            if !pending.contains_key(h.as_str()) && cache.get(h, &fp).is_none() {
                pending.insert(h, i);
            }
        }
    }
    let jobs: Vec<(&str, usize)> = pending.into_iter().collect();
    let computed: BTreeMap<&str, Result<FeatureVector, String>> = jobs
        .par_iter()
        .map(|&(h, i)| (h, compute(&image_path(image_root, &records[i]), h, cfg)))
        .collect();
    for (h, res) in &computed {
        if let Ok(fv) = res {
            cache.insert(h, fv.clone());
        }
    }

    let mut report = ExtractReport {
        computed: computed.values().filter(|r| r.is_ok()).count(),
        ..Default::default()
    };
    let mut failures = Vec::new();
    for (i, (rec, h)) in records.iter().zip(&hashes).enumerate() {
        let h = match h {
            Ok(h) => h,
            Err(msg) => {
                fail(i, msg.clone(), &mut failures)?;
                continue;
            }
        };
        match computed.get(h.as_str()) {
            Some(Err(msg)) => fail(i, msg.clone(), &mut failures)?,
            Some(Ok(fv)) => report.features.push((rec.clone(), fv.clone())),
            None => {
                let fv = cache
                    .get(h, &fp)
                    .expect("uncached hashes were computed above");
                report.features.push((rec.clone(), fv));
            }
        }
    }
    report.failures = failures;
    Ok(report)
}
