//! Per-radius curvature profile of a named metric family.

use anyhow::Result;
use quarterpinch::composite::{assemble, certify_grid, evaluate, AssembleOptions};
use quarterpinch::pinching::radius_grid;
use quarterpinch::{
    components, make_complex_hyperbolic_polar, make_d_fold, make_hyperbolic_polar, make_integrable,
    make_naive_warp, make_sigma_warp, required_length, scan_extremes_at, CurvTensor, MetricSpec, TransitionProfile,
    WarpProfile,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{FamilyName, RunConfig};

/// Column reference printed by `pinch-scan --help`.
pub const COLUMNS_HELP: &str = "\
Output columns (one row per grid radius, sorted by r):
  r              radius
  stage          stage label (the family name outside the composite)
  k_pair         K(Y1, Y2), first horizontal pair
  k_horiz_vert   K(Y1, Y_theta)
  k_horiz_rad    K(Y1, Y_r)
  k_vert_rad     K(Y_theta, Y_r)
  mixed_vert     R(Y1, Y2, Y_theta, Y_r)
  mixed_pairs    R(Y1, Y2, Y3, Y4), empty when n = 2
  k_min, k_max   extremes of the Grassmannian scan
  error_bound    frozen-coefficient error bound (0 where exact)";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileRow {
    pub r: f64,
    pub stage: String,
    pub k_pair: f64,
    pub k_horiz_vert: f64,
    pub k_horiz_rad: f64,
    pub k_vert_rad: f64,
    pub mixed_vert: f64,
    pub mixed_pairs: Option<f64>,
    pub k_min: f64,
    pub k_max: f64,
    pub error_bound: f64,
}

fn row(t: &CurvTensor<f64>, r: f64, stage: String, k_min: f64, k_max: f64, error_bound: f64) -> ProfileRow {
    let dim = t.dim();
    let (th, rr) = (dim - 2, dim - 1);
    ProfileRow {
        r,
        stage,
        k_pair: t.get(0, 1, 0, 1),
        k_horiz_vert: t.get(0, th, 0, th),
        k_horiz_rad: t.get(0, rr, 0, rr),
        k_vert_rad: t.get(th, rr, th, rr),
        mixed_vert: t.get(0, 1, th, rr),
        mixed_pairs: (dim >= 6).then(|| t.get(0, 1, 2, 3)),
        k_min,
        k_max,
        error_bound,
    }
}

/// σ rising 1 → d on `[r_min + 1, (r_min + r_max) / 2]`, with the smallest
/// derivative bound that interval allows.
pub fn scan_sigma(cfg: &RunConfig) -> Result<TransitionProfile<f64>> {
    let r_a = cfg.r_min + 1.0;
    let r_b = 0.5 * (cfg.r_min + cfg.r_max);
    let span = cfg.d as f64 - 1.0;
    if span <= 0.0 || r_b <= r_a {
        anyhow::bail!("sigma transition needs d > 1 and r_max > r_min + 2");
    }
    let len = r_b - r_a;
    let mut delta = (quarterpinch::warp::SMOOTHSTEP_MAX_D1 * span / len)
        .max(quarterpinch::warp::SMOOTHSTEP_MAX_D2 * span / (len * len));
    while required_length(delta, 1.0, cfg.d as f64) > len {
        delta *= 1.0 + 1e-12;
    }
    Ok(TransitionProfile::rising(r_a, r_b, 1.0, cfg.d as f64, delta)?)
}

fn family_spec(cfg: &RunConfig) -> Result<MetricSpec<f64>> {
    let n = cfg.n;
    Ok(match cfg.family {
        FamilyName::Hyperbolic => make_hyperbolic_polar(2 * n)?,
        FamilyName::Complex => make_complex_hyperbolic_polar(n, &vec![1; n - 1])?,
        FamilyName::Integrable => make_integrable(n)?,
        FamilyName::DFold => make_d_fold(n, cfg.d)?,
        FamilyName::SigmaWarp => make_sigma_warp(n, scan_sigma(cfg)?)?,
        FamilyName::RemarkCounterexample => {
            let mut spec = make_naive_warp(n, WarpProfile::Transition(scan_sigma(cfg)?))?;
            spec.structure_constants = make_complex_hyperbolic_polar::<f64>(n, &vec![1; n - 1])?.structure_constants;
            spec
        }
        FamilyName::Composite => unreachable!("composite is handled separately"),
    })
}

pub fn run(cfg: &RunConfig) -> Result<Vec<ProfileRow>> {
    let scan = cfg.scan_params();
    if cfg.family == FamilyName::Composite {
        let opts = AssembleOptions {
            skip_stage1: cfg.skip_stage1,
            inflation: cfg.inflation,
            scan,
            ..AssembleOptions::default()
        };
        let delta = cfg.delta.unwrap_or(cfg.epsilon / 40.0);
        let cm = assemble(cfg.n, cfg.d, cfg.epsilon, delta, &opts)?;
        let rows: Result<Vec<ProfileRow>, _> = certify_grid(&cm, cfg.grid_pitch)
            .par_iter()
            .map(|&r| {
                evaluate(&cm, r, &scan).map(|(c, t)| row(&t, r, c.stage.label().into(), c.k_min, c.k_max, c.error_bound))
            })
            .collect();
        return Ok(rows?);
    }
    let spec = family_spec(cfg)?;
    let label = cfg.family.to_string();
    Ok(radius_grid(cfg.r_min, cfg.r_max, cfg.grid_pitch)
        .par_iter()
        .map(|&r| {
            let t = components(&spec, r);
            let rep = scan_extremes_at(&t, &scan, r);
            row(&t, r, label.clone(), rep.k_min, rep.k_max, 0.0)
        })
        .collect())
}

pub fn write_csv<W: std::io::Write>(rows: &[ProfileRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
