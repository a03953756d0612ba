//! Warped polar metric families and their named instances.
//!
//! Two families live on `E × S¹ × (0, ∞)`:
//!
//! * real polar: `h(r)² g_base + v(r)² dθ² + dr²` over real hyperbolic space,
//! * complex polar: `h(r)² g_base + ¼ v(r)² dθ² + dr²` over complex
//!   hyperbolic space, where the horizontal lifts of a holomorphic frame
//!   satisfy `[X_i, X_{i+1}] = c_i ∂θ`.
//!
//! Frame indices are 0-based. Indices `0..dim-2` are horizontal, `dim-2` is
//! the θ direction and `dim-1` is the radial direction. In the complex family
//! the horizontal indices come in holomorphic pairs `(2p, 2p+1)` and `c_p` is
//! the structure constant of pair `p`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;
use crate::warp::{effective_bracket, TransitionProfile, WarpProfile};

/// Default radial domain used by sweeps.
pub const R_MIN: f64 = 0.05;
pub const R_MAX: f64 = 30.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("dimension {got} is below the minimum {min}")]
    DimensionTooSmall { got: usize, min: usize },
    #[error("fold number {0} is not allowed")]
    InvalidFold(u32),
    #[error("sign pattern has length {got}, expected {expected}")]
    SignPatternLength { got: usize, expected: usize },
    #[error("sign pattern entry {0} is not +1 or -1")]
    InvalidSign(i32),
    #[error("structure constant list has length {got}, expected {expected}")]
    BracketCount { got: usize, expected: usize },
    #[error("v(0) = {0} is not zero, so there is no cone point")]
    NoConePoint(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    RealPolar,
    ComplexPolar,
}

/// Structure constant of one holomorphic pair, possibly varying with r.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BracketCoefficient<T> {
    Constant { value: T },
    /// `sign · (4α(r) − 2α(r)²)`
    Schedule { sign: T, alpha: TransitionProfile<T> },
}

impl<T: Scalar> BracketCoefficient<T> {
    pub fn value(&self, r: T) -> T {
        match self {
            BracketCoefficient::Constant { value } => *value,
            BracketCoefficient::Schedule { sign, alpha } => *sign * effective_bracket(alpha.value(r)),
        }
    }

    /// `dc/dr`; zero for constants.
    pub fn derivative(&self, r: T) -> T {
        match self {
            BracketCoefficient::Constant { .. } => T::zero(),
            BracketCoefficient::Schedule { sign, alpha } => {
                let j = alpha.eval(r);
                let four = T::lit(4.0);
                *sign * (four - four * j.value) * j.d1
            }
        }
    }
}

/// One instance of a warped polar metric family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSpec<T> {
    pub family: Family,
    /// Real dimension for the real family, complex dimension for the complex one.
    pub n: usize,
    pub h: WarpProfile<T>,
    pub v: WarpProfile<T>,
    /// One entry per holomorphic pair (`n − 1` entries); empty for the real family.
    pub structure_constants: Vec<BracketCoefficient<T>>,
}

/// Tangent vector in the orthonormal frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameVector<T> {
    pub coefficients: Vec<T>,
}

impl<T: Scalar> FrameVector<T> {
    pub fn new(coefficients: Vec<T>) -> Self {
        FrameVector { coefficients }
    }

    pub fn basis(dim: usize, i: usize) -> Self {
        let mut c = vec![T::zero(); dim];
        c[i] = T::one();
        FrameVector { coefficients: c }
    }

    pub fn dim(&self) -> usize {
        self.coefficients.len()
    }

    pub fn dot(&self, other: &Self) -> T {
        self.coefficients
            .iter()
            .zip(&other.coefficients)
            .fold(T::zero(), |acc, (a, b)| acc + *a * *b)
    }

    pub fn norm(&self) -> T {
        self.dot(self).sqrt()
    }
}

impl<T: Scalar> MetricSpec<T> {
    /// Generic complex polar metric with constant structure constants.
    pub fn complex(n: usize, h: WarpProfile<T>, v: WarpProfile<T>, c: &[T]) -> Result<Self, MetricError> {
        if n < 2 {
            return Err(MetricError::DimensionTooSmall { got: n, min: 2 });
        }
        if c.len() != n - 1 {
            return Err(MetricError::BracketCount { got: c.len(), expected: n - 1 });
        }
        Ok(MetricSpec {
            family: Family::ComplexPolar,
            n,
            h,
            v,
            structure_constants: c.iter().map(|&value| BracketCoefficient::Constant { value }).collect(),
        })
    }

    /// Generic real polar metric.
    pub fn real(n_real: usize, h: WarpProfile<T>, v: WarpProfile<T>) -> Result<Self, MetricError> {
        if n_real < 3 {
            return Err(MetricError::DimensionTooSmall { got: n_real, min: 3 });
        }
        Ok(MetricSpec { family: Family::RealPolar, n: n_real, h, v, structure_constants: Vec::new() })
    }

    pub fn dim(&self) -> usize {
        match self.family {
            Family::RealPolar => self.n,
            Family::ComplexPolar => 2 * self.n,
        }
    }

    pub fn theta_index(&self) -> usize {
        self.dim() - 2
    }

    pub fn radial_index(&self) -> usize {
        self.dim() - 1
    }

    pub fn n_pairs(&self) -> usize {
        match self.family {
            Family::RealPolar => 0,
            Family::ComplexPolar => self.n - 1,
        }
    }

    /// Coefficient of `v² dθ²` is `vertical_scale²`.
    pub fn vertical_scale(&self) -> T {
        match self.family {
            Family::RealPolar => T::one(),
            Family::ComplexPolar => T::lit(0.5),
        }
    }

    /// Structure constants frozen at r.
    pub fn brackets_at(&self, r: T) -> Vec<T> {
        self.structure_constants.iter().map(|c| c.value(r)).collect()
    }

    /// Orthonormal frame scaling: `Y_i = X_i / h`, `Y_θ = ∂θ / (scale · v)`, `Y_r = ∂r`.
    /// Returns the coordinate-to-frame factors `(1/h, 1/(scale v), 1)`.
    pub fn frame_scales(&self, r: T) -> (T, T, T) {
        let h = self.h.value(r);
        let v = self.v.value(r);
        (h.recip(), (self.vertical_scale() * v).recip(), T::one())
    }
}

/// Real hyperbolic space in polar coordinates about a codimension-two
/// totally geodesic subspace: `h = cosh`, `v = sinh`.
pub fn make_hyperbolic_polar<T: Scalar>(n_real: usize) -> Result<MetricSpec<T>, MetricError> {
    MetricSpec::real(n_real, WarpProfile::Cosh, WarpProfile::Sinh)
}

/// Complex hyperbolic space about a totally geodesic complex hypersurface:
/// `h = cosh`, `v = sinh 2r`, `c_p = 2 · sign_p`.
pub fn make_complex_hyperbolic_polar<T: Scalar>(
    n_complex: usize,
    sign_pattern: &[i32],
) -> Result<MetricSpec<T>, MetricError> {
    if n_complex < 2 {
        return Err(MetricError::DimensionTooSmall { got: n_complex, min: 2 });
    }
    if sign_pattern.len() != n_complex - 1 {
        return Err(MetricError::SignPatternLength { got: sign_pattern.len(), expected: n_complex - 1 });
    }
    let mut c = Vec::with_capacity(sign_pattern.len());
    for &s in sign_pattern {
        if s != 1 && s != -1 {
            return Err(MetricError::InvalidSign(s));
        }
        c.push(T::lit(2.0 * s as f64));
    }
    MetricSpec::complex(n_complex, WarpProfile::Cosh, WarpProfile::Sinh2r, &c)
}

/// All structure constants `+2`.
pub fn complex_hyperbolic<T: Scalar>(n_complex: usize) -> Result<MetricSpec<T>, MetricError> {
    let signs = vec![1; n_complex.saturating_sub(1)];
    make_complex_hyperbolic_polar(n_complex, &signs)
}

/// Same warping as complex hyperbolic space with every structure constant zero.
pub fn make_integrable<T: Scalar>(n_complex: usize) -> Result<MetricSpec<T>, MetricError> {
    if n_complex < 2 {
        return Err(MetricError::DimensionTooSmall { got: n_complex, min: 2 });
    }
    let c = vec![T::zero(); n_complex - 1];
    MetricSpec::complex(n_complex, WarpProfile::Cosh, WarpProfile::Sinh2r, &c)
}

/// Integrable metric with `v = d · sinh 2r`, so the θ-circle has cone angle `2dπ`.
///
/// `d = 1` is accepted and gives the integrable metric back; the composite
/// assembler is what insists on `d > 2`.
pub fn make_d_fold<T: Scalar>(n_complex: usize, d: u32) -> Result<MetricSpec<T>, MetricError> {
    if d == 0 {
        return Err(MetricError::InvalidFold(d));
    }
    let mut spec = make_integrable(n_complex)?;
    spec.v = WarpProfile::DSinh2r { d: T::lit(d as f64) };
    Ok(spec)
}

/// Integrable metric with `v = σ(r) · sinh 2r`.
pub fn make_sigma_warp<T: Scalar>(n_complex: usize, sigma: TransitionProfile<T>) -> Result<MetricSpec<T>, MetricError> {
    let mut spec = make_integrable(n_complex)?;
    spec.v = WarpProfile::product(WarpProfile::Transition(sigma), WarpProfile::Sinh2r);
    Ok(spec)
}

/// Complex hyperbolic brackets kept at `±2` while `v` is multiplied by a
/// profile `σ`. This is the naive way to open up the cone angle, and it
/// is not pinched.
pub fn make_naive_warp<T: Scalar>(n_complex: usize, sigma: WarpProfile<T>) -> Result<MetricSpec<T>, MetricError> {
    let mut spec = complex_hyperbolic(n_complex)?;
    spec.v = WarpProfile::product(sigma, WarpProfile::Sinh2r);
    Ok(spec)
}

/// `lim_{r→0} 2π · scale · v(r) / r`, by two rounds of Richardson extrapolation
/// on `r ∈ {1e-2, 5e-3, 2.5e-3}`.
pub fn cone_angle<T: Scalar>(spec: &MetricSpec<T>) -> Result<T, MetricError> {
    let v0 = spec.v.value(T::zero());
    if v0.abs() > T::epsilon().sqrt() {
        return Err(MetricError::NoConePoint(v0.to_f64_lossy()));
    }
    let two_pi = T::lit(2.0) * T::PI();
    let scale = spec.vertical_scale();
    let q = |r: T| two_pi * scale * spec.v.value(r) / r;
    let h = T::lit(1e-2);
    let two = T::lit(2.0);
    let (q0, q1, q2) = (q(h), q(h / two), q(h / (two * two)));
    // removes the O(r) term, then the O(r²) term
    let r1_coarse = two * q1 - q0;
    let r1_fine = two * q2 - q1;
    Ok((T::lit(4.0) * r1_fine - r1_coarse) / T::lit(3.0))
}
