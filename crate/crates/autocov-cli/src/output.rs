//! Report envelope: every output file embeds the artifact version, the seed
//! and a hash of the canonicalized configuration, so a rerun of the same
//! config reproduces byte-identical numeric payloads.

use autocov::Result;
use serde::Serialize;
use std::fs;
use std::path::{Path, PathBuf};

/// FNV-1a 64-bit over the canonical config JSON. Deterministic provenance
/// fingerprint, not a cryptographic hash.
pub fn config_hash(canonical_json: &str) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in canonical_json.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}

#[derive(Serialize)]
pub struct Envelope<C: Serialize, R: Serialize> {
    pub version: &'static str,
    pub config_hash: String,
    pub seed: u64,
    pub config: C,
    pub result: R,
}

pub fn envelope<C: Serialize, R: Serialize>(seed: u64, config: C, result: R) -> Envelope<C, R> {
    let canonical = serde_json::to_string(&config).expect("config serializes");
    Envelope {
        version: env!("CARGO_PKG_VERSION"),
        config_hash: config_hash(&canonical),
        seed,
        config,
        result,
    }
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

/// Writes the envelope as pretty JSON into `dir/name` and echoes a compact
/// form to stdout.
pub fn emit<C: Serialize, R: Serialize>(
    env: &Envelope<C, R>,
    out: Option<&Path>,
    name: &str,
) -> Result<Option<PathBuf>> {
    println!("{}", serde_json::to_string_pretty(env).expect("report serializes"));
    if let Some(dir) = out {
        ensure_dir(dir)?;
        let path = dir.join(name);
        fs::write(&path, serde_json::to_string_pretty(env).expect("report serializes"))?;
        return Ok(Some(path));
    }
    Ok(None)
}
