//! Three-stage interpolation from complex hyperbolic space to a `d`-fold
//! cone and back, with an end-to-end pinching certificate.
//!
//! Along r the metric runs through five regions:
//!
//! | region      | radii        | model                                              |
//! |-------------|--------------|----------------------------------------------------|
//! | core        | `r ≤ r₁`     | complex hyperbolic                                 |
//! | unwind      | `[r₁, r₂]`   | brackets `b(α(r))`, α falling 1 → 0                 |
//! | angle warp  | `[r₂, r₃]`   | integrable, `v = σ sinh 2r`, σ rising 1 → d         |
//! | rewind      | `[r₃, r₄]`   | per sector, brackets `b(α_rev(r))`, α_rev 0 → 1    |
//! | outer       | `r ≥ r₄`     | complex hyperbolic in every sector                 |
//!
//! From `r₃` on, the θ-circle is cut into `d` equal arcs and each arc is
//! rescaled to total angle 2π, which turns `d · sinh 2r` back into `sinh 2r`.
//! The unwind and rewind regions use frozen structure constants; the terms
//! this drops are covered by widening the target interval by
//! `inflation × stage1_error_bound`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curvature::{components_complex, components_sigma_warp, CurvTensor};
use crate::metric::{
    cone_angle, make_complex_hyperbolic_polar, make_d_fold, make_integrable, make_naive_warp, BracketCoefficient,
    MetricError, MetricSpec, R_MIN,
};
use crate::pinching::{find_threshold_r, radius_grid, scan_extremes_at, PinchError, ScanParams, TwoPlane};
use crate::warp::{required_length, TransitionError, TransitionProfile, WarpProfile};

/// Default widening factor applied to [`stage1_error_bound`].
pub const DEFAULT_INFLATION: f64 = 10.0;
/// Extra radius added after the last threshold.
pub const R1_MARGIN: f64 = 1.0;
/// Radius swept past `r₄`.
pub const OUTER_SWEEP: f64 = 2.0;
/// Largest grid pitch `certify` accepts.
pub const MAX_PITCH: f64 = 0.05;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CompositeError {
    #[error("infeasible parameters: {0}")]
    InfeasibleParameters(String),
    #[error("radius {0} is outside the domain")]
    OutOfDomain(f64),
    #[error("radius {0} is not in an unwinding or rewinding region")]
    OutOfStage(f64),
    #[error("sector {sector} out of range for d = {d}")]
    InvalidSector { sector: usize, d: u32 },
    #[error("grid pitch {0} is above the allowed maximum")]
    InvalidPitch(f64),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Transition(#[from] TransitionError),
    #[error(transparent)]
    Pinch(#[from] PinchError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Core,
    Unwind,
    AngleWarp,
    Rewind,
    Outer,
    /// Brackets kept at ±2 while σ grows (naive mode only).
    NaiveWarp,
    /// Brackets ±2 with `v = d sinh 2r` (naive mode only).
    NaiveFold,
}

impl Stage {
    pub fn label(self) -> &'static str {
        match self {
            Stage::Core => "core",
            Stage::Unwind => "unwind",
            Stage::AngleWarp => "angle_warp",
            Stage::Rewind => "rewind",
            Stage::Outer => "outer",
            Stage::NaiveWarp => "naive_warp",
            Stage::NaiveFold => "naive_fold",
        }
    }

    pub fn has_error_bound(self) -> bool {
        matches!(self, Stage::Unwind | Stage::Rewind)
    }
}

/// Knobs for [`assemble`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssembleOptions {
    /// Sign of each pair's structure constant; all `+1` when empty.
    pub sign_pattern: Vec<i32>,
    /// Keep the brackets at ±2 through the angle warp (demonstrates failure).
    pub skip_stage1: bool,
    pub inflation: f64,
    pub scan: ScanParams,
}

impl Default for AssembleOptions {
    fn default() -> Self {
        AssembleOptions { sign_pattern: Vec::new(), skip_stage1: false, inflation: DEFAULT_INFLATION, scan: ScanParams::default() }
    }
}

/// Radii that fix `r₁`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Start of the pinched tail of the integrable metric at `ε/2`.
    pub integrable: f64,
    /// Same for complex hyperbolic space.
    pub complex: f64,
    /// Radius beyond which the widened bracket slack is at most `ε/4`.
    pub slack: f64,
}

impl Thresholds {
    pub fn r1(&self) -> f64 {
        self.integrable.max(self.complex).max(self.slack) + R1_MARGIN
    }
}

/// Computes the thresholds that place `r₁`.
pub fn plan_thresholds(n: usize, epsilon: f64, inflation: f64, scan: &ScanParams) -> Result<Thresholds, CompositeError> {
    let signs = vec![1; n.saturating_sub(1)];
    let gi = make_integrable::<f64>(n)?;
    let cn = make_complex_hyperbolic_polar::<f64>(n, &signs)?;
    let integrable = find_threshold_r(&gi, epsilon / 2.0, scan)?.r_threshold;
    let complex = find_threshold_r(&cn, epsilon / 2.0, scan)?.r_threshold;
    // inflation · 2e^{−2r} ≤ ε/4
    let slack = (0.5 * (8.0 * inflation / epsilon).ln()).max(R_MIN);
    Ok(Thresholds { integrable, complex, slack })
}

/// One arc of the θ-circle beyond `r₃`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sector {
    pub index: usize,
    pub arc_start: f64,
    pub arc_length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeMetric {
    pub n: usize,
    pub d: u32,
    pub epsilon: f64,
    pub delta: f64,
    pub radii: [f64; 4],
    pub thresholds: Thresholds,
    /// 1 → 0 on `[r₁, r₂]`.
    pub alpha: TransitionProfile<f64>,
    /// 1 → d on `[r₂, r₃]`.
    pub sigma: TransitionProfile<f64>,
    /// 0 → 1 on `[r₃, r₄]`.
    pub alpha_rev: TransitionProfile<f64>,
    pub sectors: Vec<Sector>,
    pub sign_pattern: Vec<i32>,
    pub skip_stage1: bool,
    pub inflation: f64,
    /// The construction needs a normal injectivity radius at least this large.
    pub injectivity_radius_required: f64,
    core: MetricSpec<f64>,
    unwind: MetricSpec<f64>,
    rewind: MetricSpec<f64>,
    naive_warp: MetricSpec<f64>,
    naive_fold: MetricSpec<f64>,
}

fn scheduled(base: &MetricSpec<f64>, signs: &[i32], alpha: &TransitionProfile<f64>) -> MetricSpec<f64> {
    let mut spec = base.clone();
    spec.structure_constants = signs
        .iter()
        .map(|&s| BracketCoefficient::Schedule { sign: s as f64, alpha: alpha.clone() })
        .collect();
    spec
}

/// Builds the composite metric for a fixed `δ`, reusing precomputed thresholds.
pub fn assemble_with(
    n: usize,
    d: u32,
    epsilon: f64,
    delta: f64,
    thresholds: Thresholds,
    opts: &AssembleOptions,
) -> Result<CompositeMetric, CompositeError> {
    if n < 2 {
        return Err(MetricError::DimensionTooSmall { got: n, min: 2 }.into());
    }
    if d <= 2 {
        return Err(CompositeError::InfeasibleParameters(format!("fold number must exceed 2, got {d}")));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(CompositeError::InfeasibleParameters(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(CompositeError::InfeasibleParameters(format!("delta must be positive, got {delta}")));
    }
    let worst_radial = opts.inflation * 2.0 * delta;
    if !opts.skip_stage1 && worst_radial >= 0.75 * epsilon {
        return Err(CompositeError::InfeasibleParameters(format!(
            "delta = {delta} gives a widening of up to {worst_radial}, which leaves no room inside epsilon = {epsilon}"
        )));
    }
    let signs = if opts.sign_pattern.is_empty() { vec![1; n - 1] } else { opts.sign_pattern.clone() };
    let core = make_complex_hyperbolic_polar::<f64>(n, &signs)?;

    let len_alpha = required_length(delta, 0.0, 1.0);
    let len_sigma = required_length(delta, 1.0, d as f64);
    let r1 = thresholds.r1();
    let r2 = r1 + len_alpha;
    let r3 = r2 + len_sigma;
    let r4 = r3 + len_alpha;
    let alpha = TransitionProfile::falling(r1, r2, 0.0, 1.0, delta)?;
    let sigma = TransitionProfile::rising(r2, r3, 1.0, d as f64, delta)?;
    let alpha_rev = TransitionProfile::rising(r3, r4, 0.0, 1.0, delta)?;

    let unwind = scheduled(&core, &signs, &alpha);
    let rewind = scheduled(&core, &signs, &alpha_rev);
    let mut naive_warp = make_naive_warp(n, WarpProfile::Transition(sigma.clone()))?;
    naive_warp.structure_constants = core.structure_constants.clone();
    let mut naive_fold = make_naive_warp(n, WarpProfile::constant(d as f64))?;
    naive_fold.structure_constants = core.structure_constants.clone();

    let arc = 2.0 * PI / d as f64;
    let sectors = (0..d as usize).map(|index| Sector { index, arc_start: index as f64 * arc, arc_length: arc }).collect();
    Ok(CompositeMetric {
        n,
        d,
        epsilon,
        delta,
        radii: [r1, r2, r3, r4],
        thresholds,
        alpha,
        sigma,
        alpha_rev,
        sectors,
        sign_pattern: signs,
        skip_stage1: opts.skip_stage1,
        inflation: opts.inflation,
        injectivity_radius_required: r3,
        core,
        unwind,
        rewind,
        naive_warp,
        naive_fold,
    })
}

/// Builds the composite metric, computing the thresholds first.
pub fn assemble(n: usize, d: u32, epsilon: f64, delta: f64, opts: &AssembleOptions) -> Result<CompositeMetric, CompositeError> {
    if d <= 2 {
        return Err(CompositeError::InfeasibleParameters(format!("fold number must exceed 2, got {d}")));
    }
    if !(epsilon > 0.0) {
        return Err(CompositeError::InfeasibleParameters(format!("epsilon must be positive, got {epsilon}")));
    }
    let thresholds = plan_thresholds(n, epsilon, opts.inflation, &opts.scan)?;
    assemble_with(n, d, epsilon, delta, thresholds, opts)
}

/// Radial and bracket-slack parts of the frozen-coefficient error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorBound {
    /// `2|α'(r)|`
    pub radial: f64,
    /// `2e^{−2r}`
    pub slack: f64,
}

impl ErrorBound {
    pub fn total(&self) -> f64 {
        self.radial + self.slack
    }
}

impl CompositeMetric {
    pub fn stage_at(&self, r: f64) -> Stage {
        let [r1, r2, r3, r4] = self.radii;
        if self.skip_stage1 {
            return if r <= r2 {
                Stage::Core
            } else if r <= r3 {
                Stage::NaiveWarp
            } else {
                Stage::NaiveFold
            };
        }
        if r <= r1 {
            Stage::Core
        } else if r <= r2 {
            Stage::Unwind
        } else if r <= r3 {
            Stage::AngleWarp
        } else if r <= r4 {
            Stage::Rewind
        } else {
            Stage::Outer
        }
    }

    /// Stages in order of increasing r.
    pub fn stages(&self) -> Vec<Stage> {
        if self.skip_stage1 {
            vec![Stage::Core, Stage::NaiveWarp, Stage::NaiveFold]
        } else {
            vec![Stage::Core, Stage::Unwind, Stage::AngleWarp, Stage::Rewind, Stage::Outer]
        }
    }

    /// Radii separating consecutive stages.
    pub fn boundaries(&self) -> Vec<f64> {
        let [r1, r2, r3, r4] = self.radii;
        if self.skip_stage1 {
            vec![r2, r3]
        } else {
            vec![r1, r2, r3, r4]
        }
    }

    /// The formula of one stage evaluated at r, regardless of where r falls.
    pub fn curvature_in_stage(&self, stage: Stage, r: f64) -> CurvTensor<f64> {
        let spec = match stage {
            Stage::Core | Stage::Outer => &self.core,
            Stage::Unwind => &self.unwind,
            Stage::Rewind => &self.rewind,
            Stage::AngleWarp => return components_sigma_warp(self.n, &self.sigma, r),
            Stage::NaiveWarp => &self.naive_warp,
            Stage::NaiveFold => &self.naive_fold,
        };
        components_complex(spec, r).expect("composite stages are complex polar")
    }

    /// The pre-sector metric at the end of the angle warp.
    pub fn d_fold(&self) -> MetricSpec<f64> {
        make_d_fold(self.n, self.d).expect("d validated at assembly")
    }
}

/// Curvature of the composite metric at r in the given sector.
pub fn curvature_at(cm: &CompositeMetric, r: f64, sector: usize) -> Result<CurvTensor<f64>, CompositeError> {
    if !(r.is_finite() && r >= R_MIN) {
        return Err(CompositeError::OutOfDomain(r));
    }
    if sector >= cm.d as usize {
        return Err(CompositeError::InvalidSector { sector, d: cm.d });
    }
    // sectors carry identical metrics
    Ok(cm.curvature_in_stage(cm.stage_at(r), r))
}

/// Error of the frozen-coefficient model in the unwind and rewind regions.
pub fn stage1_error_bound(cm: &CompositeMetric, r: f64) -> Result<ErrorBound, CompositeError> {
    let [r1, r2, r3, r4] = cm.radii;
    let profile = if (r1..=r2).contains(&r) {
        &cm.alpha
    } else if (r3..=r4).contains(&r) {
        &cm.alpha_rev
    } else {
        return Err(CompositeError::OutOfStage(r));
    };
    Ok(ErrorBound { radial: 2.0 * profile.eval(r).d1.abs(), slack: 2.0 * (-2.0 * r).exp() })
}

/// Per-sector description beyond `r₃`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorDescription {
    pub index: usize,
    pub arc_start: f64,
    pub arc_length: f64,
    /// Total angle of the sector after rescaling its arc to `[0, 2π)`.
    pub total_angle: f64,
    pub rewind_interval: [f64; 2],
    pub metric_beyond_r4: String,
}

pub fn sector_decompose(cm: &CompositeMetric) -> Vec<SectorDescription> {
    let per_sector = cone_angle(&cm.d_fold()).expect("d-fold has a cone point") / cm.d as f64;
    cm.sectors
        .iter()
        .map(|s| SectorDescription {
            index: s.index,
            arc_start: s.arc_start,
            arc_length: s.arc_length,
            total_angle: per_sector,
            rewind_interval: [cm.radii[2], cm.radii[3]],
            metric_beyond_r4: "complex hyperbolic".into(),
        })
        .collect()
}

/// Worst radius of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub r: f64,
    pub stage: Stage,
    pub k_min: f64,
    pub k_max: f64,
    pub widening: f64,
    pub margin: f64,
    pub plane_min: TwoPlane<f64>,
    pub plane_max: TwoPlane<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageJump {
    pub r: f64,
    pub from: Stage,
    pub to: Stage,
    pub max_jump: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeAngles {
    pub core: f64,
    pub pre_sector: f64,
    pub per_sector: f64,
}

/// Outcome of [`certify`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PinchCertificate {
    pub pass: bool,
    pub n: usize,
    pub d: u32,
    pub epsilon: f64,
    pub delta: f64,
    pub radii: [f64; 4],
    pub thresholds: Thresholds,
    pub grid_pitch: f64,
    pub grid_points: usize,
    /// Radius/sector evaluations represented; sectors share one evaluation.
    pub sector_evaluations: usize,
    pub failures: usize,
    pub k_min: f64,
    pub k_max: f64,
    pub widened_k_min: f64,
    pub widened_k_max: f64,
    pub margin: f64,
    pub worst: Witness,
    pub max_error_bound: f64,
    pub inflation: f64,
    pub max_bianchi_relative: f64,
    pub stage_jumps: Vec<StageJump>,
    pub cone_angles: ConeAngles,
    pub sectors: Vec<SectorDescription>,
    pub injectivity_radius_required: f64,
    pub skip_stage1: bool,
    pub model_note: String,
}

/// Everything computed at one grid radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeRow {
    pub r: f64,
    pub stage: Stage,
    pub k_min: f64,
    pub k_max: f64,
    pub error_bound: f64,
    pub widening: f64,
    pub margin: f64,
    pub bianchi_relative: f64,
    pub plane_min: TwoPlane<f64>,
    pub plane_max: TwoPlane<f64>,
}

/// Evaluates one grid radius.
pub fn evaluate(cm: &CompositeMetric, r: f64, scan: &ScanParams) -> Result<(CompositeRow, CurvTensor<f64>), CompositeError> {
    let tensor = curvature_at(cm, r, 0)?;
    let stage = cm.stage_at(r);
    let report = scan_extremes_at(&tensor, scan, r);
    let error_bound = if stage.has_error_bound() { stage1_error_bound(cm, r)?.total() } else { 0.0 };
    let widening = cm.inflation * error_bound;
    let max_abs = tensor.max_abs().max(f64::MIN_POSITIVE);
    let row = CompositeRow {
        r,
        stage,
        k_min: report.k_min,
        k_max: report.k_max,
        error_bound,
        widening,
        margin: report.margin(cm.epsilon, widening),
        bianchi_relative: tensor.bianchi_residual() / max_abs,
        plane_min: report.witness_min,
        plane_max: report.witness_max,
    };
    Ok((row, tensor))
}

/// Sweep radii: uniform pitch on `[r_min, r₄ + 2]` plus the stage boundaries.
pub fn certify_grid(cm: &CompositeMetric, pitch: f64) -> Vec<f64> {
    let mut grid = radius_grid(R_MIN, cm.radii[3] + OUTER_SWEEP, pitch);
    grid.extend(cm.boundaries());
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// Rows for every radius of the sweep.
pub fn profile(cm: &CompositeMetric, pitch: f64, scan: &ScanParams) -> Result<Vec<CompositeRow>, CompositeError> {
    if !(pitch > 0.0 && pitch <= MAX_PITCH) {
        return Err(CompositeError::InvalidPitch(pitch));
    }
    certify_grid(cm, pitch).par_iter().map(|&r| evaluate(cm, r, scan).map(|x| x.0)).collect()
}

#[derive(Debug, Clone)]
struct Aggregate {
    points: usize,
    failures: usize,
    k_min: f64,
    k_max: f64,
    widened_min: f64,
    widened_max: f64,
    max_bound: f64,
    max_bianchi: f64,
    worst: Option<CompositeRow>,
}

impl Aggregate {
    fn empty() -> Self {
        Aggregate {
            points: 0,
            failures: 0,
            k_min: f64::INFINITY,
            k_max: f64::NEG_INFINITY,
            widened_min: f64::INFINITY,
            widened_max: f64::NEG_INFINITY,
            max_bound: 0.0,
            max_bianchi: 0.0,
            worst: None,
        }
    }

    fn push(mut self, row: CompositeRow) -> Self {
        self.points += 1;
        if row.margin <= 0.0 {
            self.failures += 1;
        }
        self.k_min = self.k_min.min(row.k_min);
        self.k_max = self.k_max.max(row.k_max);
        self.widened_min = self.widened_min.min(row.k_min - row.widening);
        self.widened_max = self.widened_max.max(row.k_max + row.widening);
        self.max_bound = self.max_bound.max(row.error_bound);
        self.max_bianchi = self.max_bianchi.max(row.bianchi_relative);
        if worse(&row, self.worst.as_ref()) {
            self.worst = Some(row);
        }
        self
    }

    fn merge(mut self, other: Aggregate) -> Self {
        self.points += other.points;
        self.failures += other.failures;
        self.k_min = self.k_min.min(other.k_min);
        self.k_max = self.k_max.max(other.k_max);
        self.widened_min = self.widened_min.min(other.widened_min);
        self.widened_max = self.widened_max.max(other.widened_max);
        self.max_bound = self.max_bound.max(other.max_bound);
        self.max_bianchi = self.max_bianchi.max(other.max_bianchi);
        if let Some(w) = other.worst {
            if worse(&w, self.worst.as_ref()) {
                self.worst = Some(w);
            }
        }
        self
    }
}

/// Lower margin wins; ties go to the smaller radius so the result does not
/// depend on reduction order.
fn worse(row: &CompositeRow, current: Option<&CompositeRow>) -> bool {
    match current {
        None => true,
        Some(c) => row.margin < c.margin || (row.margin == c.margin && row.r < c.r),
    }
}

/// Component jumps between adjacent stage formulas at each boundary.
pub fn stage_jumps(cm: &CompositeMetric) -> Vec<StageJump> {
    let stages = cm.stages();
    cm.boundaries()
        .iter()
        .zip(stages.windows(2))
        .map(|(&r, pair)| {
            let a = cm.curvature_in_stage(pair[0], r);
            let b = cm.curvature_in_stage(pair[1], r);
            StageJump { r, from: pair[0], to: pair[1], max_jump: a.max_deviation(&b) }
        })
        .collect()
}

/// Sweeps `(r, 2-plane)` space and checks every widened extreme against
/// `(−4 − ε, −1 + ε)`. Sectors share one evaluation per radius.
pub fn certify(cm: &CompositeMetric, pitch: f64, scan: &ScanParams) -> Result<PinchCertificate, CompositeError> {
    if !(pitch > 0.0 && pitch <= MAX_PITCH) {
        return Err(CompositeError::InvalidPitch(pitch));
    }
    let grid = certify_grid(cm, pitch);
    let agg = grid
        .par_chunks(1024)
        .map(|chunk| {
            chunk.iter().try_fold(Aggregate::empty(), |acc, &r| evaluate(cm, r, scan).map(|(row, _)| acc.push(row)))
        })
        .try_reduce(Aggregate::empty, |a, b| Ok(a.merge(b)))?;

    let r3 = cm.radii[2];
    let sector_evaluations = grid.iter().map(|&r| if r >= r3 { cm.d as usize } else { 1 }).sum();
    let worst_row = agg.worst.expect("grid is never empty");
    let worst = Witness {
        r: worst_row.r,
        stage: worst_row.stage,
        k_min: worst_row.k_min,
        k_max: worst_row.k_max,
        widening: worst_row.widening,
        margin: worst_row.margin,
        plane_min: worst_row.plane_min,
        plane_max: worst_row.plane_max,
    };
    let cone_angles = ConeAngles {
        core: cone_angle(&cm.core)?,
        pre_sector: cone_angle(&cm.d_fold())?,
        per_sector: cone_angle(&cm.d_fold())? / cm.d as f64,
    };
    let model_note = if cm.skip_stage1 {
        "naive warp: structure constants stay at +-2 while v grows to d sinh 2r; no unwinding stage".to_string()
    } else {
        format!(
            "unwind and rewind regions use frozen structure constants c(r) = b(alpha(r)); the dropped derivative \
             terms are covered by widening the interval by {} x (2|alpha'| + 2 exp(-2r))",
            cm.inflation
        )
    };
    Ok(PinchCertificate {
        pass: agg.failures == 0,
        n: cm.n,
        d: cm.d,
        epsilon: cm.epsilon,
        delta: cm.delta,
        radii: cm.radii,
        thresholds: cm.thresholds,
        grid_pitch: pitch,
        grid_points: agg.points,
        sector_evaluations,
        failures: agg.failures,
        k_min: agg.k_min,
        k_max: agg.k_max,
        widened_k_min: agg.widened_min,
        widened_k_max: agg.widened_max,
        margin: worst.margin,
        worst,
        max_error_bound: agg.max_bound,
        inflation: cm.inflation,
        max_bianchi_relative: agg.max_bianchi,
        stage_jumps: stage_jumps(cm),
        cone_angles,
        sectors: sector_decompose(cm),
        injectivity_radius_required: cm.injectivity_radius_required,
        skip_stage1: cm.skip_stage1,
        model_note,
    })
}

/// Smallest `δ` tried before giving up.
pub const AUTO_DELTA_HALVINGS: usize = 6;

/// Starts at `δ = ε/40` and halves until the certificate passes with margin
/// at least `ε/10`. Returns the last attempt if none does.
pub fn assemble_auto(
    n: usize,
    d: u32,
    epsilon: f64,
    pitch: f64,
    opts: &AssembleOptions,
) -> Result<(CompositeMetric, PinchCertificate), CompositeError> {
    if d <= 2 {
        return Err(CompositeError::InfeasibleParameters(format!("fold number must exceed 2, got {d}")));
    }
    if !(epsilon > 0.0) {
        return Err(CompositeError::InfeasibleParameters(format!("epsilon must be positive, got {epsilon}")));
    }
    let thresholds = plan_thresholds(n, epsilon, opts.inflation, &opts.scan)?;
    let mut delta = epsilon / 40.0;
    let mut last = None;
    for _ in 0..=AUTO_DELTA_HALVINGS {
        let cm = assemble_with(n, d, epsilon, delta, thresholds, opts)?;
        let cert = certify(&cm, pitch, &opts.scan)?;
        if cert.pass && cert.margin >= epsilon / 10.0 {
            return Ok((cm, cert));
        }
        last = Some((cm, cert));
        delta /= 2.0;
    }
    Ok(last.expect("at least one attempt"))
}
