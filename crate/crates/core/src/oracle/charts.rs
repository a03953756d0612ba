use nalgebra::{DMatrix, DVector};

use super::{fd_riemann, ChartMeta, CoordinateMetric, OracleError, DEFAULT_STEP};
use crate::warp::WarpProfile;

/// Euclidean space in Cartesian coordinates.
#[derive(Debug, Clone)]
pub struct FlatChart {
    pub dim: usize,
}

impl CoordinateMetric for FlatChart {
    fn dim(&self) -> usize {
        self.dim
    }

    fn components(&self, _p: &[f64]) -> Result<DMatrix<f64>, OracleError> {
        Ok(DMatrix::identity(self.dim, self.dim))
    }

    fn frame_at(&self, _p: &[f64]) -> Result<Vec<DVector<f64>>, OracleError> {
        Ok((0..self.dim).map(|i| DVector::from_fn(self.dim, |k, _| if k == i { 1.0 } else { 0.0 })).collect())
    }

    fn meta(&self) -> ChartMeta {
        ChartMeta { base: format!("flat R^{}", self.dim), connection: "none".into() }
    }
}

/// Round 2-sphere in colatitude/longitude `(ϑ, φ)`.
#[derive(Debug, Clone)]
pub struct SphereChart {
    pub radius: f64,
}

impl CoordinateMetric for SphereChart {
    fn dim(&self) -> usize {
        2
    }

    fn components(&self, p: &[f64]) -> Result<DMatrix<f64>, OracleError> {
        let s = p[0].sin();
        if s <= 0.0 {
            return Err(OracleError::PointOutsideChart { point: p.to_vec(), reason: "pole".into() });
        }
        let r2 = self.radius * self.radius;
        Ok(DMatrix::from_diagonal(&DVector::from_vec(vec![r2, r2 * s * s])))
    }

    fn frame_at(&self, p: &[f64]) -> Result<Vec<DVector<f64>>, OracleError> {
        let s = p[0].sin();
        Ok(vec![
            DVector::from_vec(vec![1.0 / self.radius, 0.0]),
            DVector::from_vec(vec![0.0, 1.0 / (self.radius * s)]),
        ])
    }

    fn meta(&self) -> ChartMeta {
        ChartMeta { base: format!("round sphere of radius {}", self.radius), connection: "none".into() }
    }
}

/// Base manifolds of the warped charts, all on the open unit ball.
#[derive(Debug, Clone, PartialEq)]
pub enum BaseModel {
    /// `4|dx|² / (1 − |x|²)²`, curvature −1.
    PoincareBall { dim: usize },
    /// `|dz|² / (1 − |z|²)²`, curvature −4.
    Disk,
    /// Hermitian metric `κ ∂∂̄(−log(1 − |z|²))` on the ball in C², coordinates
    /// `(x₁, y₁, x₂, y₂)` with `J∂x = ∂y`.
    ComplexBall { kappa: f64 },
}

impl BaseModel {
    pub fn dim(&self) -> usize {
        match self {
            BaseModel::PoincareBall { dim } => *dim,
            BaseModel::Disk => 2,
            BaseModel::ComplexBall { .. } => 4,
        }
    }

    fn radius_sq(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }

    fn check(&self, x: &[f64]) -> Result<f64, OracleError> {
        let s = Self::radius_sq(x);
        if s >= 1.0 {
            return Err(OracleError::PointOutsideChart { point: x.to_vec(), reason: "outside unit ball".into() });
        }
        Ok(s)
    }

    pub fn metric(&self, x: &[f64]) -> Result<DMatrix<f64>, OracleError> {
        let s = self.check(x)?;
        let n = self.dim();
        Ok(match self {
            BaseModel::PoincareBall { .. } => DMatrix::identity(n, n) * (4.0 / ((1.0 - s) * (1.0 - s))),
            BaseModel::Disk => DMatrix::identity(2, 2) / ((1.0 - s) * (1.0 - s)),
            BaseModel::ComplexBall { kappa } => {
                let w = 1.0 - s;
                let mut g = DMatrix::zeros(4, 4);
                for a in 0..2 {
                    for b in 0..2 {
                        let (xa, ya, xb, yb) = (x[2 * a], x[2 * a + 1], x[2 * b], x[2 * b + 1]);
                        // H_ab = κ (δ_ab / w + z̄_a z_b / w²)
                        let delta = if a == b { 1.0 } else { 0.0 };
                        let hr = kappa * (delta / w + (xa * xb + ya * yb) / (w * w));
                        let hi = kappa * (xa * yb - ya * xb) / (w * w);
                        g[(2 * a, 2 * b)] = hr;
                        g[(2 * a + 1, 2 * b + 1)] = hr;
                        g[(2 * a, 2 * b + 1)] = hi;
                        g[(2 * a + 1, 2 * b)] = -hi;
                    }
                }
                g
            }
        })
    }

    /// Orthonormal frame of the base. For the complex models it is J-adapted:
    /// `(e₁, Je₁, e₃, Je₃, …)`.
    pub fn frame(&self, x: &[f64]) -> Result<Vec<DVector<f64>>, OracleError> {
        let s = self.check(x)?;
        let n = self.dim();
        let unit = |i: usize, scale: f64| DVector::from_fn(n, |k, _| if k == i { scale } else { 0.0 });
        Ok(match self {
            BaseModel::PoincareBall { .. } => (0..n).map(|i| unit(i, 0.5 * (1.0 - s))).collect(),
            BaseModel::Disk => vec![unit(0, 1.0 - s), unit(1, 1.0 - s)],
            BaseModel::ComplexBall { .. } => {
                let g = self.metric(x)?;
                let inner = |u: &DVector<f64>, w: &DVector<f64>| (u.transpose() * &g * w)[(0, 0)];
                let j = |u: &DVector<f64>| DVector::from_vec(vec![-u[1], u[0], -u[3], u[2]]);
                let mut out: Vec<DVector<f64>> = Vec::with_capacity(4);
                for seed in [0, 2] {
                    let mut e = unit(seed, 1.0);
                    for f in &out {
                        let p = inner(&e, f);
                        e -= f * p;
                    }
                    let norm = inner(&e, &e).sqrt();
                    e /= norm;
                    let je = j(&e);
                    out.push(e);
                    out.push(je);
                }
                out
            }
        })
    }

    pub fn describe(&self) -> String {
        match self {
            BaseModel::PoincareBall { dim } => format!("Poincare ball of dimension {dim}, curvature -1"),
            BaseModel::Disk => "disk |dz|^2/(1-|z|^2)^2, curvature -4".into(),
            BaseModel::ComplexBall { kappa } => format!("ball in C^2, kappa = {kappa}"),
        }
    }
}

/// The base model on its own, as a coordinate metric.
#[derive(Debug, Clone)]
pub struct BaseChart(pub BaseModel);

impl CoordinateMetric for BaseChart {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn components(&self, p: &[f64]) -> Result<DMatrix<f64>, OracleError> {
        self.0.metric(p)
    }

    fn frame_at(&self, p: &[f64]) -> Result<Vec<DVector<f64>>, OracleError> {
        self.0.frame(p)
    }

    fn meta(&self) -> ChartMeta {
        ChartMeta { base: self.0.describe(), connection: "none".into() }
    }
}

/// `A = κ Σ_a (c_a / 2)(x_a dy_a − y_a dx_a) / (1 − |x|²)` on a base with
/// coordinates `(x₁, y₁, x₂, y₂, …)`.
///
/// On the disk, `dA = c · vol`. On the complex ball with equal coefficients,
/// `dA = c · ω` for the Kähler form `ω` of the κ-scaled metric.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionForm {
    pub coefficients: Vec<f64>,
    pub kappa: f64,
}

impl ConnectionForm {
    /// Components `A_k` at base point `x`.
    pub fn at(&self, x: &[f64]) -> Vec<f64> {
        let s: f64 = x.iter().map(|v| v * v).sum();
        let mut a = vec![0.0; x.len()];
        for (pair, c) in self.coefficients.iter().enumerate() {
            let f = self.kappa * c / (2.0 * (1.0 - s));
            let (xi, yi) = (2 * pair, 2 * pair + 1);
            a[xi] = -f * x[yi];
            a[yi] = f * x[xi];
        }
        a
    }

    /// `(dA)_{kl} = ∂_k A_l − ∂_l A_k` by central differences.
    pub fn exterior_derivative(&self, x: &[f64], step: f64) -> DMatrix<f64> {
        let n = x.len();
        let mut grad = DMatrix::zeros(n, n);
        for k in 0..n {
            let mut p = x.to_vec();
            let mut m = x.to_vec();
            p[k] += step;
            m[k] -= step;
            let (ap, am) = (self.at(&p), self.at(&m));
            for l in 0..n {
                grad[(k, l)] = (ap[l] - am[l]) / (2.0 * step);
            }
        }
        &grad - grad.transpose()
    }

    /// `dA(e_i, e_j)` for the base frame, i.e. the bracket constant the lift
    /// of `(e_i, e_j)` sees.
    pub fn measured_bracket(&self, base: &BaseModel, x: &[f64], i: usize, j: usize) -> Result<f64, OracleError> {
        let frame = base.frame(x)?;
        let da = self.exterior_derivative(x, 1e-5);
        Ok((frame[i].transpose() * da * &frame[j])[(0, 0)])
    }

    pub fn describe(&self) -> String {
        format!("kappa * sum c_a/2 (x dy - y dx)/(1-|x|^2), c = {:?}, kappa = {}", self.coefficients, self.kappa)
    }
}

/// `h(r)² g_base + scale² v(r)² (dθ − A)² + dr²` in coordinates
/// `(base…, θ, r)`.
#[derive(Debug, Clone)]
pub struct WarpedChart {
    pub base: BaseModel,
    pub h: WarpProfile<f64>,
    pub v: WarpProfile<f64>,
    pub vertical_scale: f64,
    pub connection: Option<ConnectionForm>,
}

impl WarpedChart {
    fn split<'a>(&self, p: &'a [f64]) -> Result<(&'a [f64], f64), OracleError> {
        let k = self.base.dim();
        let r = p[k + 1];
        if r <= 0.0 {
            return Err(OracleError::PointOutsideChart { point: p.to_vec(), reason: "r <= 0".into() });
        }
        Ok((&p[..k], r))
    }

    fn connection_at(&self, x: &[f64]) -> Vec<f64> {
        match &self.connection {
            Some(c) => c.at(x),
            None => vec![0.0; x.len()],
        }
    }
}

impl CoordinateMetric for WarpedChart {
    fn dim(&self) -> usize {
        self.base.dim() + 2
    }

    fn components(&self, p: &[f64]) -> Result<DMatrix<f64>, OracleError> {
        let (x, r) = self.split(p)?;
        let k = x.len();
        let n = k + 2;
        let gb = self.base.metric(x)?;
        let a = self.connection_at(x);
        let h = self.h.value(r);
        let sv = self.vertical_scale * self.v.value(r);
        let w = sv * sv;
        let mut g = DMatrix::zeros(n, n);
        for i in 0..k {
            for j in 0..k {
                g[(i, j)] = h * h * gb[(i, j)] + w * a[i] * a[j];
            }
            g[(i, k)] = -w * a[i];
            g[(k, i)] = -w * a[i];
        }
        g[(k, k)] = w;
        g[(k + 1, k + 1)] = 1.0;
        Ok(g)
    }

    fn frame_at(&self, p: &[f64]) -> Result<Vec<DVector<f64>>, OracleError> {
        let (x, r) = self.split(p)?;
        let k = x.len();
        let n = k + 2;
        let a = self.connection_at(x);
        let h = self.h.value(r);
        let sv = self.vertical_scale * self.v.value(r);
        let mut out = Vec::with_capacity(n);
        for e in self.base.frame(x)? {
            // horizontal lift e + A(e) ∂θ, scaled by 1/h
            let lift: f64 = (0..k).map(|i| a[i] * e[i]).sum();
            let mut y = DVector::zeros(n);
            for i in 0..k {
                y[i] = e[i] / h;
            }
            y[k] = lift / h;
            out.push(y);
        }
        out.push(DVector::from_fn(n, |i, _| if i == k { 1.0 / sv } else { 0.0 }));
        out.push(DVector::from_fn(n, |i, _| if i == k + 1 { 1.0 } else { 0.0 }));
        Ok(out)
    }

    fn meta(&self) -> ChartMeta {
        ChartMeta {
            base: self.base.describe(),
            connection: self.connection.as_ref().map_or("none".into(), |c| c.describe()),
        }
    }
}

/// Real polar chart: hyperbolic base of dimension `n_real − 2`.
pub fn chart_real(h: WarpProfile<f64>, v: WarpProfile<f64>, n_real: usize) -> WarpedChart {
    assert!(n_real >= 3, "real polar charts need dimension at least 3");
    WarpedChart {
        base: BaseModel::PoincareBall { dim: n_real - 2 },
        h,
        v,
        vertical_scale: 1.0,
        connection: None,
    }
}

/// Four-dimensional complex polar chart `(x, y, θ, r)` with bracket `c`.
pub fn chart_n2(h: WarpProfile<f64>, v: WarpProfile<f64>, c: f64) -> WarpedChart {
    WarpedChart {
        base: BaseModel::Disk,
        h,
        v,
        vertical_scale: 0.5,
        connection: Some(ConnectionForm { coefficients: vec![c], kappa: 1.0 }),
    }
}

/// Holomorphic sectional curvature of the complex ball at the origin, by FD.
#[cfg(feature = "n3-chart")]
fn holomorphic_curvature(kappa: f64) -> Result<f64, OracleError> {
    let chart = BaseChart(BaseModel::ComplexBall { kappa });
    let t = super::oracle_tensor(&chart, &[0.0; 4], DEFAULT_STEP)?;
    Ok(t.get(0, 1, 0, 1))
}

/// Six-dimensional complex polar chart `(x₁, y₁, x₂, y₂, θ, r)` with brackets
/// `c1` on the first holomorphic pair and `c3` on the second.
///
/// κ is calibrated so the FD holomorphic curvature of the base is −4. With
/// `c1 = c3` the bracket constants hold everywhere; otherwise only at the base
/// origin, where the connection's curvature has vanishing derivative.
#[cfg(feature = "n3-chart")]
pub fn chart_n3(h: WarpProfile<f64>, v: WarpProfile<f64>, c1: f64, c3: f64) -> Result<WarpedChart, OracleError> {
    let mut kappa = 1.0;
    let mut k = holomorphic_curvature(kappa)?;
    for _ in 0..8 {
        if (k + 4.0).abs() < 1e-7 {
            return Ok(WarpedChart {
                base: BaseModel::ComplexBall { kappa },
                h,
                v,
                vertical_scale: 0.5,
                connection: Some(ConnectionForm { coefficients: vec![c1, c3], kappa }),
            });
        }
        // holomorphic curvature scales as 1/κ
        kappa *= k / -4.0;
        if !(kappa.is_finite() && kappa > 0.0) {
            break;
        }
        k = holomorphic_curvature(kappa)?;
    }
    Err(OracleError::CalibrationFailed { kappa, curvature: k })
}

#[allow(dead_code)]
fn base_curvature(base: &BaseModel, x: &[f64]) -> Result<crate::curvature::CurvTensor<f64>, OracleError> {
    let chart = BaseChart(base.clone());
    let coord = fd_riemann(&chart, x, DEFAULT_STEP)?;
    super::frame_project(&coord, &chart, x)
}
