//! Closed-form curvature against the finite-difference coordinate oracle.

use anyhow::Result;
use quarterpinch::oracle::{chart_n2, chart_real, oracle_tensor, CoordinateMetric};
use quarterpinch::{components, CurvTensor, MetricSpec, TransitionProfile, WarpProfile};
use serde::Serialize;

use crate::config::RunConfig;

/// Amount added to the holomorphic-pair component when a fault is injected.
pub const FAULT_SIZE: f64 = 1e-2;

const BASE_POINTS: [[f64; 2]; 5] = [[0.1, -0.2], [0.0, 0.0], [0.4, 0.3], [-0.5, 0.2], [0.2, 0.6]];
const RADII: [f64; 5] = [0.3, 0.5, 1.0, 1.5, 2.0];

#[derive(Debug, Clone, Serialize)]
pub struct Offender {
    pub point: Vec<f64>,
    pub slot: [usize; 4],
    pub closed_form: f64,
    pub oracle: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FamilyCheck {
    pub family: String,
    pub evaluations: usize,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub worst: Option<Offender>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub pass: bool,
    pub families: Vec<FamilyCheck>,
    /// Family with the largest deviation relative to its tolerance.
    pub worst_family: Option<String>,
}

fn corrupted(t: CurvTensor<f64>, inject: bool) -> CurvTensor<f64> {
    if !inject {
        return t;
    }
    let n = t.dim();
    let mut full = t.expand_full().expect("closed forms are consistent").full().expect("expanded").to_vec();
    let at = |a: usize, b: usize, c: usize, d: usize| ((a * n + b) * n + c) * n + d;
    full[at(0, 1, 0, 1)] += FAULT_SIZE;
    full[at(1, 0, 1, 0)] += FAULT_SIZE;
    full[at(0, 1, 1, 0)] -= FAULT_SIZE;
    full[at(1, 0, 0, 1)] -= FAULT_SIZE;
    CurvTensor::from_full(n, full)
}

fn worst_slot(a: &CurvTensor<f64>, b: &CurvTensor<f64>) -> ([usize; 4], f64) {
    let n = a.dim();
    let mut best = ([0; 4], -1.0);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let d = (a.get(i, j, k, l) - b.get(i, j, k, l)).abs();
                    if d > best.1 {
                        best = ([i, j, k, l], d);
                    }
                }
            }
        }
    }
    best
}

struct Checker {
    check: FamilyCheck,
}

impl Checker {
    fn new(family: String, tolerance: f64) -> Self {
        Checker { check: FamilyCheck { family, evaluations: 0, max_deviation: 0.0, tolerance, pass: true, worst: None } }
    }

    fn compare(&mut self, chart: &dyn CoordinateMetric, spec: &MetricSpec<f64>, p: Vec<f64>, cfg: &RunConfig) -> Result<()> {
        let r = *p.last().expect("radius is the last coordinate");
        let fd = oracle_tensor(chart, &p, cfg.oracle_step)?;
        let cf = corrupted(components(spec, r), cfg.inject_fault);
        let (slot, dev) = worst_slot(&cf, &fd);
        self.check.evaluations += 1;
        if dev > self.check.max_deviation || self.check.worst.is_none() {
            self.check.max_deviation = dev;
            let [i, j, k, l] = slot;
            self.check.worst = Some(Offender { point: p, slot, closed_form: cf.get(i, j, k, l), oracle: fd.get(i, j, k, l) });
        }
        Ok(())
    }

    fn finish(mut self) -> FamilyCheck {
        self.check.pass = self.check.max_deviation <= self.check.tolerance;
        self.check
    }
}

fn n2_triples() -> Vec<(String, WarpProfile<f64>, WarpProfile<f64>, f64)> {
    let sigma = TransitionProfile::rising(0.2, 2.8, 1.0, 2.0, 5.0).expect("valid transition");
    let sigma_v = WarpProfile::product(WarpProfile::Transition(sigma), WarpProfile::Sinh2r);
    vec![
        ("h=cosh v=sinh2r c=2".into(), WarpProfile::Cosh, WarpProfile::Sinh2r, 2.0),
        ("h=cosh v=sinh2r c=1".into(), WarpProfile::Cosh, WarpProfile::Sinh2r, 1.0),
        ("h=cosh v=sinh2r c=0".into(), WarpProfile::Cosh, WarpProfile::Sinh2r, 0.0),
        ("h=cosh v=sigma*sinh2r c=0".into(), WarpProfile::Cosh, sigma_v.clone(), 0.0),
        ("h=cosh v=sigma*sinh2r c=2".into(), WarpProfile::Cosh, sigma_v, 2.0),
        ("h=cosh v=3sinh2r c=0".into(), WarpProfile::Cosh, WarpProfile::DSinh2r { d: 3.0 }, 0.0),
        ("h=1.5cosh v=sinh c=-1.3".into(), WarpProfile::scaled(1.5, WarpProfile::Cosh), WarpProfile::Sinh, -1.3),
    ]
}

pub fn run(cfg: &RunConfig) -> Result<VerifyReport> {
    let mut families = Vec::new();
    for (label, h, v, c) in n2_triples() {
        let spec = MetricSpec::complex(2, h.clone(), v.clone(), &[c])?;
        let chart = chart_n2(h, v, c);
        let mut ch = Checker::new(format!("n=2 chart, {label}"), cfg.oracle_tolerance);
        for x in BASE_POINTS {
            for r in RADII {
                ch.compare(&chart, &spec, vec![x[0], x[1], 0.3, r], cfg)?;
            }
        }
        families.push(ch.finish());
    }
    for n_real in [3usize, 4, 6] {
        for d in [1.0, 3.0] {
            let v = WarpProfile::scaled(d, WarpProfile::Sinh);
            let spec = MetricSpec::real(n_real, WarpProfile::Cosh, v.clone())?;
            let chart = chart_real(WarpProfile::Cosh, v, n_real);
            let mut ch = Checker::new(format!("real chart, dim {n_real}, v={d}sinh"), cfg.oracle_tolerance);
            for r in [0.3, 1.1, 2.0] {
                let mut p = vec![0.1; n_real - 2];
                p.extend([0.4, r]);
                ch.compare(&chart, &spec, p, cfg)?;
            }
            families.push(ch.finish());
        }
    }
    if cfg.n3_oracle {
        families.extend(n3_checks(cfg)?);
    }
    let pass = families.iter().all(|f| f.pass);
    let worst_family = families
        .iter()
        .max_by(|a, b| (a.max_deviation / a.tolerance).total_cmp(&(b.max_deviation / b.tolerance)))
        .map(|f| f.family.clone());
    Ok(VerifyReport { pass, families, worst_family })
}

#[cfg(feature = "n3-chart")]
fn n3_checks(cfg: &RunConfig) -> Result<Vec<FamilyCheck>> {
    use quarterpinch::oracle::chart_n3;
    let mut out = Vec::new();
    for (c1, c3) in [(2.0, 2.0), (2.0, -2.0), (2.0, 0.0), (1.0, -2.0)] {
        let chart = chart_n3(WarpProfile::Cosh, WarpProfile::Sinh2r, c1, c3)?;
        let spec = MetricSpec::complex(3, WarpProfile::Cosh, WarpProfile::Sinh2r, &[c1, c3])?;
        let mut ch = Checker::new(format!("n=3 chart, c=({c1}, {c3})"), cfg.n3_tolerance);
        for r in [0.5, 1.0, 2.0] {
            ch.compare(&chart, &spec, vec![0.0, 0.0, 0.0, 0.0, 0.2, r], cfg)?;
        }
        out.push(ch.finish());
    }
    Ok(out)
}

#[cfg(not(feature = "n3-chart"))]
fn n3_checks(_cfg: &RunConfig) -> Result<Vec<FamilyCheck>> {
    anyhow::bail!("this build has no n=3 chart; rebuild with the n3-chart feature")
}
