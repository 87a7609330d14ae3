//! Stable content fingerprints for configs, specs and files.

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Hex length of config and spec fingerprints.
const FINGERPRINT_LEN: usize = 16;

/// Hash of the canonical JSON form of `value` (object keys sorted).
pub fn fingerprint<T: Serialize + ?Sized>(value: &T) -> String {
    let canonical = serde_json::to_value(value)
        .and_then(|v| serde_json::to_string(&v))
        .expect("config types serialize to JSON");
    let digest = Sha256::digest(canonical.as_bytes());
    hex::encode(digest)[..FINGERPRINT_LEN].to_string()
}

/// Full SHA-256 of raw bytes, hex encoded.
pub fn content_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
