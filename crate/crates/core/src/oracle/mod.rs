//! Independent check of the closed forms: explicit coordinate charts and a
//! generic finite-difference Levi-Civita pipeline.
//!
//! Christoffel symbols come from central differences of the metric
//! components, the Riemann tensor from central differences of the
//! Christoffels, Richardson-extrapolated in the outer step. The coordinate
//! tensor is then contracted with the chart's orthonormal frame so it can be
//! compared slot by slot with [`crate::curvature`].

mod charts;

pub use charts::{
    chart_n2, chart_real, BaseChart, BaseModel, ConnectionForm, FlatChart, SphereChart, WarpedChart,
};
#[cfg(feature = "n3-chart")]
pub use charts::chart_n3;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::curvature::CurvTensor;

/// Symmetry residual above which [`fd_riemann`] gives up.
pub const MAX_SYMMETRY_RESIDUAL: f64 = 1e-3;

/// Default outer (Riemann) step.
pub const DEFAULT_STEP: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("point {point:?} lies outside the chart ({reason})")]
    PointOutsideChart { point: Vec<f64>, reason: String },
    #[error("finite-difference symmetry residual {residual:e} exceeds {limit:e}")]
    StepTooLarge { residual: f64, limit: f64 },
    #[error("base calibration did not converge: kappa = {kappa}, holomorphic curvature = {curvature}")]
    CalibrationFailed { kappa: f64, curvature: f64 },
    #[error("metric is singular at {0:?}")]
    Singular(Vec<f64>),
}

/// Human-readable description of a chart.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartMeta {
    pub base: String,
    pub connection: String,
}

/// A metric given by its components in one coordinate chart.
pub trait CoordinateMetric: Sync {
    fn dim(&self) -> usize;

    /// Symmetric positive-definite component matrix at `p`.
    fn components(&self, p: &[f64]) -> Result<DMatrix<f64>, OracleError>;

    /// Orthonormal frame at `p`, each vector in coordinate components.
    fn frame_at(&self, p: &[f64]) -> Result<Vec<DVector<f64>>, OracleError>;

    fn meta(&self) -> ChartMeta;
}

fn shifted(p: &[f64], k: usize, h: f64) -> Vec<f64> {
    let mut q = p.to_vec();
    q[k] += h;
    q
}

/// `Γ^e_{ab}` at `p`, flattened as `[(e * n + a) * n + b]`.
fn christoffel(m: &dyn CoordinateMetric, p: &[f64], h1: f64) -> Result<Vec<f64>, OracleError> {
    let n = m.dim();
    let g = m.components(p)?;
    let ginv = g.clone().try_inverse().ok_or_else(|| OracleError::Singular(p.to_vec()))?;
    let mut dg = Vec::with_capacity(n);
    for k in 0..n {
        let plus = m.components(&shifted(p, k, h1))?;
        let minus = m.components(&shifted(p, k, -h1))?;
        dg.push((plus - minus) / (2.0 * h1));
    }
    let mut gamma = vec![0.0; n * n * n];
    for a in 0..n {
        for b in 0..n {
            for f in 0..n {
                let lowered = 0.5 * (dg[a][(f, b)] + dg[b][(f, a)] - dg[f][(a, b)]);
                for e in 0..n {
                    gamma[(e * n + a) * n + b] += ginv[(e, f)] * lowered;
                }
            }
        }
    }
    Ok(gamma)
}

/// `∂_a Γ^e_{bc}` flattened as `[((a * n + e) * n + b) * n + c]`.
fn christoffel_derivative(m: &dyn CoordinateMetric, p: &[f64], h1: f64, h2: f64) -> Result<Vec<f64>, OracleError> {
    let n = m.dim();
    let mut out = vec![0.0; n * n * n * n];
    for a in 0..n {
        let plus = christoffel(m, &shifted(p, a, h2), h1)?;
        let minus = christoffel(m, &shifted(p, a, -h2), h1)?;
        for (k, (x, y)) in plus.iter().zip(&minus).enumerate() {
            out[a * n * n * n + k] = (x - y) / (2.0 * h2);
        }
    }
    Ok(out)
}

fn assemble(m: &dyn CoordinateMetric, p: &[f64], h1: f64, dgamma: &[f64]) -> Result<Vec<f64>, OracleError> {
    let n = m.dim();
    let g = m.components(p)?;
    let gamma = christoffel(m, p, h1)?;
    let gm = |e: usize, a: usize, b: usize| gamma[(e * n + a) * n + b];
    let dgm = |a: usize, e: usize, b: usize, c: usize| dgamma[((a * n + e) * n + b) * n + c];
    // R^e_{dab} = ∂_aΓ^e_{bd} − ∂_bΓ^e_{ad} + Γ^e_{af}Γ^f_{bd} − Γ^e_{bf}Γ^f_{ad}
    let mut up = vec![0.0; n * n * n * n];
    for e in 0..n {
        for d in 0..n {
            for a in 0..n {
                for b in 0..n {
                    let mut v = dgm(a, e, b, d) - dgm(b, e, a, d);
                    for f in 0..n {
                        v += gm(e, a, f) * gm(f, b, d) - gm(e, b, f) * gm(f, a, d);
                    }
                    up[((e * n + d) * n + a) * n + b] = v;
                }
            }
        }
    }
    // Rm_{abcd} = g_{ce} R^e_{dab}, so that Rm(X, Y, X, Y) is the sectional curvature
    let mut rm = vec![0.0; n * n * n * n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut v = 0.0;
                    for e in 0..n {
                        v += g[(c, e)] * up[((e * n + d) * n + a) * n + b];
                    }
                    rm[((a * n + b) * n + c) * n + d] = v;
                }
            }
        }
    }
    Ok(rm)
}

/// Inner (Christoffel) step for a given outer step.
pub fn inner_step(step: f64) -> f64 {
    (step / 10.0).min(1e-4)
}

/// Worst violation of the curvature symmetries, relative to the largest component.
pub fn coordinate_symmetry_residual(rm: &[f64], n: usize) -> f64 {
    let at = |a: usize, b: usize, c: usize, d: usize| rm[((a * n + b) * n + c) * n + d];
    let scale = rm.iter().fold(0.0_f64, |m, x| m.max(x.abs())).max(1e-300);
    let mut worst = 0.0_f64;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let v = at(a, b, c, d);
                    worst = worst
                        .max((v + at(b, a, c, d)).abs())
                        .max((v + at(a, b, d, c)).abs())
                        .max((v - at(c, d, a, b)).abs());
                }
            }
        }
    }
    worst / scale
}

/// Covariant Riemann tensor in coordinates, Richardson-extrapolated in the
/// outer step. Flattened as `[((a * n + b) * n + c) * n + d]`.
pub fn fd_riemann(m: &dyn CoordinateMetric, p: &[f64], step: f64) -> Result<Vec<f64>, OracleError> {
    let h1 = inner_step(step);
    let coarse = christoffel_derivative(m, p, h1, step)?;
    let fine = christoffel_derivative(m, p, h1, step / 2.0)?;
    let extrapolated: Vec<f64> = coarse.iter().zip(&fine).map(|(c, f)| (4.0 * f - c) / 3.0).collect();
    let rm = assemble(m, p, h1, &extrapolated)?;
    let residual = coordinate_symmetry_residual(&rm, m.dim());
    if residual > MAX_SYMMETRY_RESIDUAL {
        return Err(OracleError::StepTooLarge { residual, limit: MAX_SYMMETRY_RESIDUAL });
    }
    Ok(rm)
}

/// Plain central differences without extrapolation; its error is `O(step²)`.
pub fn fd_riemann_raw(m: &dyn CoordinateMetric, p: &[f64], step: f64) -> Result<Vec<f64>, OracleError> {
    let h1 = inner_step(step);
    let d = christoffel_derivative(m, p, h1, step)?;
    assemble(m, p, h1, &d)
}

/// Contracts a coordinate tensor with the chart's orthonormal frame at `p`.
pub fn frame_project(coord: &[f64], m: &dyn CoordinateMetric, p: &[f64]) -> Result<CurvTensor<f64>, OracleError> {
    let n = m.dim();
    let frame = m.frame_at(p)?;
    let mut cur = coord.to_vec();
    // contract one slot at a time; the contracted slot moves to the back
    for _ in 0..4 {
        let mut next = vec![0.0; n * n * n * n];
        for a in 0..n {
            for rest in 0..n * n * n {
                let mut v = 0.0;
                for i in 0..n {
                    v += frame[a][i] * cur[i * n * n * n + rest];
                }
                next[rest * n + a] = v;
            }
        }
        cur = next;
    }
    Ok(CurvTensor::from_full(n, cur))
}

/// FD Riemann tensor in the orthonormal frame.
pub fn oracle_tensor(m: &dyn CoordinateMetric, p: &[f64], step: f64) -> Result<CurvTensor<f64>, OracleError> {
    let coord = fd_riemann(m, p, step)?;
    frame_project(&coord, m, p)
}

/// Worst `|g(E_a, E_b) − δ_ab|` of the chart frame at `p`.
pub fn frame_orthonormality_error(m: &dyn CoordinateMetric, p: &[f64]) -> Result<f64, OracleError> {
    let g = m.components(p)?;
    let frame = m.frame_at(p)?;
    let mut worst = 0.0_f64;
    for (a, ea) in frame.iter().enumerate() {
        for (b, eb) in frame.iter().enumerate() {
            let v = (ea.transpose() * &g * eb)[(0, 0)];
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((v - target).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_space_has_no_curvature() {
        let m = FlatChart { dim: 3 };
        let rm = fd_riemann(&m, &[0.1, 0.2, 0.3], DEFAULT_STEP).unwrap();
        assert!(rm.iter().all(|x| x.abs() <= 1e-10));
    }

    #[test]
    fn unit_sphere_curvature_is_one() {
        let m = SphereChart { radius: 1.0 };
        let t = oracle_tensor(&m, &[1.1, 0.4], DEFAULT_STEP).unwrap();
        assert!((t.get(0, 1, 0, 1) - 1.0).abs() < 1e-5, "{}", t.get(0, 1, 0, 1));
        let big = SphereChart { radius: 2.0 };
        let t = oracle_tensor(&big, &[0.9, 0.0], DEFAULT_STEP).unwrap();
        assert!((t.get(0, 1, 0, 1) - 0.25).abs() < 1e-5);
    }

    #[test]
    fn projection_of_constant_curvature() {
        let m = SphereChart { radius: 1.0 };
        let p = [0.7, 0.0];
        let coord = fd_riemann(&m, &p, DEFAULT_STEP).unwrap();
        let t = frame_project(&coord, &m, &p).unwrap();
        assert!((t.get(0, 1, 0, 1) - 1.0).abs() < 1e-5);
        assert!((t.get(1, 0, 0, 1) + 1.0).abs() < 1e-5);
    }

    #[test]
    fn huge_step_is_rejected() {
        let m = SphereChart { radius: 1.0 };
        let err = fd_riemann(&m, &[0.5, 0.0], 0.4);
        assert!(matches!(err, Err(OracleError::StepTooLarge { .. })), "{err:?}");
    }
}
