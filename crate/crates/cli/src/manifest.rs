//! `manifest.txt`: config hash plus a SHA-256 per output file.

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const MANIFEST_NAME: &str = "manifest.txt";

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes the manifest for `files` (relative to `outdir`), sorted by name.
pub fn write_manifest(outdir: &Path, config_text: &str, files: &[PathBuf]) -> CliResult<PathBuf> {
    let mut names: Vec<&PathBuf> = files.iter().collect();
    names.sort();
    names.dedup();
    let mut text = format!("config_sha256 {}\n", sha256_hex(config_text.as_bytes()));
    for name in names {
        let path = outdir.join(name);
        let bytes = fs::read(&path).map_err(CliError::io(&path))?;
        text.push_str(&format!("{}  {}\n", sha256_hex(&bytes), name.display()));
    }
    let path = outdir.join(MANIFEST_NAME);
    fs::write(&path, text).map_err(CliError::io(&path))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
