//! Configuration, commands and report formats behind the `quarterpinch`
//! binary.

pub mod certify;
pub mod config;
pub mod scan;
pub mod verify;

use std::path::PathBuf;

pub use config::{resolve, FamilyName, Provenance, Resolved, RunConfig};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "QUARTERPINCH_OUT_DIR";

/// Where a command writes: an explicit path, else `dir/default_name`, else stdout.
pub fn output_path(cfg: &RunConfig, out_dir: Option<PathBuf>, default_name: &str) -> Option<PathBuf> {
    cfg.out.clone().or_else(|| out_dir.map(|d| d.join(default_name)))
}

/// JSON document with provenance in front.
#[derive(Debug, serde::Serialize)]
pub struct Document<T> {
    pub provenance: Provenance,
    #[serde(flatten)]
    pub body: T,
}
