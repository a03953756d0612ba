//! Run configuration: defaults, optional TOML file, command-line overrides.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use quarterpinch::ScanParams;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum FamilyName {
    /// Real hyperbolic space in polar coordinates (real dimension 2n).
    Hyperbolic,
    /// Complex hyperbolic space, all structure constants +2.
    Complex,
    /// Same warping, structure constants 0.
    Integrable,
    /// Integrable metric with `v = d sinh 2r`.
    DFold,
    /// Integrable metric with `v = σ sinh 2r`, σ rising 1 → d.
    SigmaWarp,
    /// Structure constants kept at 2 while σ rises 1 → d.
    RemarkCounterexample,
    /// The assembled three-stage metric.
    Composite,
}

impl fmt::Display for FamilyName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = serde_json::to_value(self).expect("unit variant");
        f.write_str(v.as_str().expect("string tag"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Complex dimension.
    pub n: usize,
    /// Fold number of the cone.
    pub d: u32,
    pub epsilon: f64,
    /// Transition derivative bound; `None` picks it automatically.
    pub delta: Option<f64>,
    pub grid_pitch: f64,
    /// Radius range for non-composite pinch scans.
    pub r_min: f64,
    pub r_max: f64,
    pub seed: u64,
    pub n_samples: usize,
    pub n_refine: usize,
    pub scan_tol: f64,
    pub inflation: f64,
    pub family: FamilyName,
    pub n3_oracle: bool,
    pub skip_stage1: bool,
    pub oracle_step: f64,
    pub oracle_tolerance: f64,
    pub n3_tolerance: f64,
    /// Test mode: perturb one closed-form constant before comparing.
    pub inject_fault: bool,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let scan = ScanParams::default();
        RunConfig {
            n: 2,
            d: 3,
            epsilon: 0.05,
            delta: None,
            grid_pitch: 0.01,
            r_min: quarterpinch::metric::R_MIN,
            r_max: quarterpinch::metric::R_MAX,
            seed: scan.seed,
            n_samples: scan.n_samples,
            n_refine: scan.n_refine,
            scan_tol: scan.tol,
            inflation: quarterpinch::composite::DEFAULT_INFLATION,
            family: FamilyName::Complex,
            n3_oracle: false,
            skip_stage1: false,
            oracle_step: quarterpinch::oracle::DEFAULT_STEP,
            oracle_tolerance: 1e-4,
            n3_tolerance: 1e-3,
            inject_fault: false,
            out: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Default,
    File,
    Flag,
}

/// Where every key of the effective configuration came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolved {
    pub config: RunConfig,
    pub sources: BTreeMap<String, Source>,
    pub config_file: Option<PathBuf>,
}

fn as_map(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => unreachable!("configs serialize to objects"),
    }
}

/// Merges defaults, the TOML file (if any) and explicit flag values, in
/// increasing precedence, then validates the result.
pub fn resolve(file: Option<&Path>, flags: Map<String, Value>) -> Result<Resolved> {
    let mut merged = as_map(serde_json::to_value(RunConfig::default())?);
    let mut sources: BTreeMap<String, Source> = merged.keys().map(|k| (k.clone(), Source::Default)).collect();
    if let Some(path) = file {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let table: toml::Table = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        for (k, v) in as_map(serde_json::to_value(table)?) {
            if !merged.contains_key(&k) {
                bail!("unknown key `{k}` in {}", path.display());
            }
            sources.insert(k.clone(), Source::File);
            merged.insert(k, v);
        }
    }
    for (k, v) in flags {
        if !merged.contains_key(&k) {
            bail!("unknown option `{k}`");
        }
        sources.insert(k.clone(), Source::Flag);
        merged.insert(k, v);
    }
    let config: RunConfig = serde_json::from_value(Value::Object(merged)).context("invalid configuration")?;
    config.validate()?;
    Ok(Resolved { config, sources, config_file: file.map(Path::to_path_buf) })
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, x: f64| -> Result<()> {
            if !(x > 0.0 && x.is_finite()) {
                bail!("{name} must be positive and finite, got {x}");
            }
            Ok(())
        };
        if !(2..=8).contains(&self.n) {
            bail!("n must be between 2 and 8, got {}", self.n);
        }
        if self.d == 0 {
            bail!("d must be at least 1");
        }
        positive("epsilon", self.epsilon)?;
        if let Some(delta) = self.delta {
            positive("delta", delta)?;
        }
        positive("grid_pitch", self.grid_pitch)?;
        if self.grid_pitch > quarterpinch::composite::MAX_PITCH {
            bail!("grid_pitch must be at most {}, got {}", quarterpinch::composite::MAX_PITCH, self.grid_pitch);
        }
        positive("r_min", self.r_min)?;
        if !(self.r_max > self.r_min && self.r_max.is_finite()) {
            bail!("r_max must exceed r_min");
        }
        if self.n_samples == 0 || self.n_refine == 0 {
            bail!("n_samples and n_refine must be at least 1");
        }
        positive("scan_tol", self.scan_tol)?;
        if !(self.inflation >= 0.0 && self.inflation.is_finite()) {
            bail!("inflation must be non-negative, got {}", self.inflation);
        }
        positive("oracle_step", self.oracle_step)?;
        if self.oracle_step > 0.1 {
            bail!("oracle_step must be at most 0.1");
        }
        positive("oracle_tolerance", self.oracle_tolerance)?;
        positive("n3_tolerance", self.n3_tolerance)?;
        Ok(())
    }

    pub fn scan_params(&self) -> ScanParams {
        ScanParams {
            n_samples: self.n_samples,
            n_refine: self.n_refine,
            tol: self.scan_tol,
            seed: self.seed,
            epsilon: self.epsilon,
        }
    }

    /// SHA-256 of the effective configuration, output path excluded.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out = None;
        let bytes = serde_json::to_vec(&c).expect("config serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Provenance block attached to every output document.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config_hash: String,
    pub seed: u64,
    pub config: RunConfig,
    pub sources: BTreeMap<String, Source>,
    pub config_file: Option<PathBuf>,
}

impl Provenance {
    pub fn new(command: &'static str, r: &Resolved) -> Self {
        Provenance {
            tool: "quarterpinch",
            version: env!("CARGO_PKG_VERSION"),
            command,
            config_hash: r.config.hash(),
            seed: r.config.seed,
            config: r.config.clone(),
            sources: r.sources.clone(),
            config_file: r.config_file.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn flags_beat_file_beat_defaults() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "epsilon = 0.1\nd = 5").unwrap();
        let mut flags = Map::new();
        flags.insert("d".into(), Value::from(4));
        let r = resolve(Some(f.path()), flags).unwrap();
        assert_eq!(r.config.epsilon, 0.1);
        assert_eq!(r.config.d, 4);
        assert_eq!(r.config.n, 2);
        assert_eq!(r.sources["epsilon"], Source::File);
        assert_eq!(r.sources["d"], Source::Flag);
        assert_eq!(r.sources["n"], Source::Default);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "epsilom = 0.1").unwrap();
        assert!(resolve(Some(f.path()), Map::new()).is_err());
    }

    #[test]
    fn bad_values_are_rejected() {
        for (k, v) in [("epsilon", Value::from(-1.0)), ("grid_pitch", Value::from(0.2)), ("n", Value::from(1))] {
            let mut flags = Map::new();
            flags.insert(k.into(), v);
            assert!(resolve(None, flags).is_err(), "{k}");
        }
    }

    #[test]
    fn hash_ignores_output_path() {
        let a = RunConfig::default();
        let b = RunConfig { out: Some("x.json".into()), ..RunConfig::default() };
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), RunConfig { seed: 1, ..RunConfig::default() }.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
