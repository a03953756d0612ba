//! End-to-end certificate for the assembled metric.

use quarterpinch::composite::{assemble, assemble_auto, certify, AssembleOptions, PinchCertificate};
use serde::Serialize;

use crate::config::RunConfig;

#[derive(Debug, Clone, Serialize)]
pub struct Tolerances {
    pub grid_pitch: f64,
    pub scan_tol: f64,
    pub n_samples: usize,
    pub n_refine: usize,
    pub inflation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertifyOutcome {
    pub pass: bool,
    pub tolerances: Tolerances,
    /// Present when the metric could be assembled.
    pub certificate: Option<PinchCertificate>,
    /// Why no certificate was produced.
    pub error: Option<String>,
}

pub fn run(cfg: &RunConfig) -> CertifyOutcome {
    let scan = cfg.scan_params();
    let opts = AssembleOptions {
        skip_stage1: cfg.skip_stage1,
        inflation: cfg.inflation,
        scan,
        ..AssembleOptions::default()
    };
    let tolerances = Tolerances {
        grid_pitch: cfg.grid_pitch,
        scan_tol: cfg.scan_tol,
        n_samples: cfg.n_samples,
        n_refine: cfg.n_refine,
        inflation: cfg.inflation,
    };
    let result = match cfg.delta {
        Some(delta) => assemble(cfg.n, cfg.d, cfg.epsilon, delta, &opts).and_then(|cm| certify(&cm, cfg.grid_pitch, &scan)),
        None => assemble_auto(cfg.n, cfg.d, cfg.epsilon, cfg.grid_pitch, &opts).map(|(_, cert)| cert),
    };
    match result {
        Ok(cert) => CertifyOutcome { pass: cert.pass, tolerances, certificate: Some(cert), error: None },
        Err(e) => CertifyOutcome { pass: false, tolerances, certificate: None, error: Some(e.to_string()) },
    }
}
