use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{Map, Value};

use quarterpinch_cli::scan::COLUMNS_HELP;
use quarterpinch_cli::{certify, output_path, resolve, scan, verify, Document, FamilyName, Provenance, OUT_DIR_ENV};

#[derive(Parser)]
#[command(name = "quarterpinch", version, about = "Curvature verification and pinching certificates for warped polar metrics")]
struct Cli {
    /// TOML file with configuration keys; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for outputs when --out is not given.
    #[arg(long, global = true, env = OUT_DIR_ENV)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compare closed-form curvature with the finite-difference oracle.
    VerifyClosedForms(Flags),
    /// Write a per-radius curvature table for one metric family.
    #[command(after_help = COLUMNS_HELP)]
    PinchScan(Flags),
    /// Assemble the interpolated metric and certify its pinching.
    Certify(Flags),
}

#[derive(Args, Default)]
struct Flags {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<u32>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Transition derivative bound; chosen automatically when absent.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    grid_pitch: Option<f64>,
    #[arg(long)]
    r_min: Option<f64>,
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n_samples: Option<usize>,
    #[arg(long)]
    n_refine: Option<usize>,
    #[arg(long)]
    inflation: Option<f64>,
    #[arg(long, value_enum)]
    family: Option<FamilyName>,
    /// Also check the six-dimensional chart.
    #[arg(long)]
    n3_oracle: bool,
    /// Keep the structure constants at 2 during the angle warp (demonstration).
    #[arg(long)]
    skip_stage1: bool,
    /// Perturb one closed-form constant before comparing (self-test).
    #[arg(long, hide = true)]
    inject_fault: bool,
    /// Output file; overrides the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Flags {
    fn to_map(&self) -> Map<String, Value> {
        let mut m = Map::new();
        let mut put = |k: &str, v: Option<Value>| {
            if let Some(v) = v {
                m.insert(k.to_string(), v);
            }
        };
        put("n", self.n.map(Value::from));
        put("d", self.d.map(Value::from));
        put("epsilon", self.epsilon.map(Value::from));
        put("delta", self.delta.map(Value::from));
        put("grid_pitch", self.grid_pitch.map(Value::from));
        put("r_min", self.r_min.map(Value::from));
        put("r_max", self.r_max.map(Value::from));
        put("seed", self.seed.map(Value::from));
        put("n_samples", self.n_samples.map(Value::from));
        put("n_refine", self.n_refine.map(Value::from));
        put("inflation", self.inflation.map(Value::from));
        put("family", self.family.map(|f| Value::from(f.to_string())));
        put("n3_oracle", self.n3_oracle.then_some(Value::Bool(true)));
        put("skip_stage1", self.skip_stage1.then_some(Value::Bool(true)));
        put("inject_fault", self.inject_fault.then_some(Value::Bool(true)));
        put("out", self.out.as_ref().map(|p| Value::from(p.to_string_lossy().into_owned())));
        m
    }
}

fn emit(path: Option<PathBuf>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            }
            std::fs::write(&p, bytes).with_context(|| format!("writing {}", p.display()))?;
            eprintln!("wrote {}", p.display());
        }
        None => std::io::stdout().write_all(bytes)?,
    }
    Ok(())
}

fn json<T: serde::Serialize>(doc: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(doc)?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn run(cli: Cli) -> Result<bool> {
    let (name, flags) = match &cli.command {
        Command::VerifyClosedForms(f) => ("verify-closed-forms", f),
        Command::PinchScan(f) => ("pinch-scan", f),
        Command::Certify(f) => ("certify", f),
    };
    let resolved = resolve(cli.config.as_deref(), flags.to_map())?;
    let cfg = &resolved.config;
    let provenance = Provenance::new(name, &resolved);
    match cli.command {
        Command::VerifyClosedForms(_) => {
            let report = verify::run(cfg)?;
            for f in &report.families {
                eprintln!("{} {:<40} max deviation {:.3e} (tolerance {:.0e})", if f.pass { "ok  " } else { "FAIL" }, f.family, f.max_deviation, f.tolerance);
            }
            if !report.pass {
                let worst = report.families.iter().filter(|f| !f.pass).max_by(|a, b| a.max_deviation.total_cmp(&b.max_deviation));
                if let Some(w) = worst.and_then(|f| f.worst.as_ref().map(|o| (f, o))) {
                    eprintln!("worst offender: {} at {:?}, slot {:?}: closed form {} vs oracle {}", w.0.family, w.1.point, w.1.slot, w.1.closed_form, w.1.oracle);
                }
            }
            let pass = report.pass;
            emit(output_path(cfg, cli.out_dir, "closed_forms.json"), &json(&Document { provenance, body: report })?)?;
            Ok(pass)
        }
        Command::PinchScan(_) => {
            let rows = scan::run(cfg)?;
            let mut bytes = Vec::new();
            scan::write_csv(&rows, &mut bytes)?;
            let default_name = format!("profile_{}.csv", cfg.family);
            let path = output_path(cfg, cli.out_dir, &default_name);
            if let Some(p) = &path {
                let mut meta = p.clone().into_os_string();
                meta.push(".provenance.json");
                emit(Some(meta.into()), &json(&provenance)?)?;
            }
            emit(path, &bytes)?;
            Ok(true)
        }
        Command::Certify(_) => {
            let outcome = certify::run(cfg);
            match (&outcome.certificate, &outcome.error) {
                (Some(c), _) => eprintln!(
                    "{}: K in [{:.6}, {:.6}] over {} radii, margin {:.4}, worst r = {:.3} ({})",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.k_min,
                    c.k_max,
                    c.grid_points,
                    c.margin,
                    c.worst.r,
                    c.worst.stage.label()
                ),
                (None, Some(e)) => eprintln!("FAIL: {e}"),
                (None, None) => {}
            }
            let pass = outcome.pass;
            emit(output_path(cfg, cli.out_dir, "certificate.json"), &json(&Document { provenance, body: outcome })?)?;
            Ok(pass)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
