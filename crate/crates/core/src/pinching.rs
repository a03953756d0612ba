//! Sectional curvatures of frame tensors and their extremes over 2-planes.
//!
//! A 2-plane `span(A, B)` with orthonormal `A, B` is represented by its
//! Plücker vector `P_ab = A_a B_b − A_b B_a` (a < b), and
//! `K = Pᵀ Op P` where `Op` is the curvature operator on `Λ²`. Extremes over
//! the Grassmannian are found by projected gradient ascent/descent from the
//! coordinate planes plus seeded Gaussian random planes.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curvature::{bivector_pairs, components, large_r_limit, CurvTensor};
use crate::metric::{FrameVector, MetricSpec, R_MAX, R_MIN};
use crate::scalar::Scalar;

/// Upper and lower ends of the pinching interval `[−4, −1]`.
pub const K_LOWER: f64 = -4.0;
pub const K_UPPER: f64 = -1.0;

/// Pitch of the threshold search grid.
pub const THRESHOLD_PITCH: f64 = 0.01;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PinchError {
    #[error("tensor dimension {tensor} does not match plane dimension {plane}")]
    DimensionMismatch { tensor: usize, plane: usize },
    #[error("vectors do not span a 2-plane")]
    DegeneratePlane,
    #[error("coefficients violate the constraint: {0}")]
    ConstraintViolated(String),
    #[error("no radius in [{r_min}, {r_max}] starts a pinched tail")]
    NeverPinched { r_min: f64, r_max: f64 },
}

/// Orthonormal pair spanning a 2-plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoPlane<T> {
    pub a: FrameVector<T>,
    pub b: FrameVector<T>,
}

impl<T: Scalar> TwoPlane<T> {
    /// Gram-Schmidt on `(a, b)`.
    pub fn new(a: Vec<T>, b: Vec<T>) -> Result<Self, PinchError> {
        if a.len() != b.len() {
            return Err(PinchError::DimensionMismatch { tensor: a.len(), plane: b.len() });
        }
        let (a, b) = orthonormalize(a, b).ok_or(PinchError::DegeneratePlane)?;
        Ok(TwoPlane { a: FrameVector::new(a), b: FrameVector::new(b) })
    }

    pub fn coordinate(dim: usize, i: usize, j: usize) -> Self {
        TwoPlane { a: FrameVector::basis(dim, i), b: FrameVector::basis(dim, j) }
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }
}

fn dot<T: Scalar>(x: &[T], y: &[T]) -> T {
    x.iter().zip(y).fold(T::zero(), |acc, (a, b)| acc + *a * *b)
}

fn orthonormalize<T: Scalar>(mut a: Vec<T>, mut b: Vec<T>) -> Option<(Vec<T>, Vec<T>)> {
    orthonormalize_in_place(&mut a, &mut b).then_some((a, b))
}

fn orthonormalize_in_place<T: Scalar>(a: &mut [T], b: &mut [T]) -> bool {
    let tiny = T::epsilon().sqrt();
    let na = dot(a, a).sqrt();
    if !(na > tiny) {
        return false;
    }
    a.iter_mut().for_each(|x| *x = *x / na);
    // two passes keep orthogonality at rounding level
    for _ in 0..2 {
        let p = dot(a, b);
        b.iter_mut().zip(a.iter()).for_each(|(y, x)| *y = *y - p * *x);
    }
    let nb = dot(b, b).sqrt();
    if !(nb > tiny * na.max(T::one())) {
        return false;
    }
    b.iter_mut().for_each(|x| *x = *x / nb);
    true
}

/// `R(A, B, A, B)` by full contraction over every index quadruple.
pub fn sectional_curvature<T: Scalar>(tensor: &CurvTensor<T>, plane: &TwoPlane<T>) -> Result<T, PinchError> {
    let n = tensor.dim();
    if plane.dim() != n {
        return Err(PinchError::DimensionMismatch { tensor: n, plane: plane.dim() });
    }
    let a = &plane.a.coefficients;
    let b = &plane.b.coefficients;
    let mut k = T::zero();
    for i in 0..n {
        for j in 0..n {
            let ab = a[i] * b[j];
            if ab == T::zero() {
                continue;
            }
            for p in 0..n {
                for q in 0..n {
                    k = k + tensor.get(i, j, p, q) * ab * a[p] * b[q];
                }
            }
        }
    }
    Ok(k)
}

/// Search settings for [`scan_extremes`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanParams {
    /// Random seed planes in addition to the coordinate planes.
    pub n_samples: usize,
    /// Gradient steps per seed.
    pub n_refine: usize,
    /// Stop once a step changes K by less than this.
    pub tol: f64,
    pub seed: u64,
    /// Pass iff every K lies in `(−4 − epsilon, −1 + epsilon)`.
    pub epsilon: f64,
}

impl Default for ScanParams {
    fn default() -> Self {
        ScanParams { n_samples: 8, n_refine: 150, tol: 1e-12, seed: 0x5eed, epsilon: 0.05 }
    }
}

/// Extremal sectional curvatures found at one radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PinchReport<T> {
    pub r: T,
    pub k_min: T,
    pub k_max: T,
    pub witness_min: TwoPlane<T>,
    pub witness_max: TwoPlane<T>,
    pub pass: bool,
}

impl<T: Scalar> PinchReport<T> {
    /// Whether `[k_min − widen, k_max + widen]` fits in `(−4 − ε, −1 + ε)`.
    pub fn passes(&self, epsilon: T, widen: T) -> bool {
        self.k_min - widen > T::lit(K_LOWER) - epsilon && self.k_max + widen < T::lit(K_UPPER) + epsilon
    }

    /// Distance from the widened extremes to the interval ends; negative on failure.
    pub fn margin(&self, epsilon: T, widen: T) -> T {
        let low = self.k_min - widen - (T::lit(K_LOWER) - epsilon);
        let high = T::lit(K_UPPER) + epsilon - (self.k_max + widen);
        low.min(high)
    }
}

/// Dense curvature operator plus the index pairs it is laid out on.
struct Operator<T> {
    dim: usize,
    pairs: Vec<(usize, usize)>,
    op: Vec<T>,
    scale: T,
}

impl<T: Scalar> Operator<T> {
    fn new(tensor: &CurvTensor<T>) -> Self {
        let dim = tensor.dim();
        let op = tensor.operator_matrix();
        let scale = op.iter().fold(T::zero(), |m, x| m.max(x.abs())).max(T::epsilon());
        Operator { dim, pairs: bivector_pairs(dim), op, scale }
    }

    /// K at `(a, b)`; leaves `Op·P` in `op_p`. `p` is scratch.
    fn eval(&self, a: &[T], b: &[T], p: &mut [T], op_p: &mut [T]) -> T {
        for (x, &(i, j)) in p.iter_mut().zip(&self.pairs) {
            *x = a[i] * b[j] - a[j] * b[i];
        }
        let m = p.len();
        let mut k = T::zero();
        for (row, out) in op_p.iter_mut().enumerate() {
            let s = self.op[row * m..(row + 1) * m].iter().zip(p.iter()).fold(T::zero(), |acc, (o, x)| acc + *o * *x);
            *out = s;
            k = k + s * p[row];
        }
        k
    }

    /// Riemannian gradient of K at the orthonormal pair `(a, b)`.
    fn gradient(&self, a: &[T], b: &[T], op_p: &[T], ga: &mut [T], gb: &mut [T]) {
        let two = T::lit(2.0);
        ga.fill(T::zero());
        gb.fill(T::zero());
        for (q, &(i, j)) in self.pairs.iter().enumerate() {
            let g = two * op_p[q];
            // G_ij = g, G_ji = −g; grad_A = G B, grad_B = −G A
            ga[i] = ga[i] + g * b[j];
            ga[j] = ga[j] - g * b[i];
            gb[i] = gb[i] - g * a[j];
            gb[j] = gb[j] + g * a[i];
        }
        for g in [ga, gb] {
            let pa = dot(g, a);
            let pb = dot(g, b);
            for k in 0..g.len() {
                g[k] = g[k] - pa * a[k] - pb * b[k];
            }
        }
    }

    /// Ascends `sign · K` from `(a, b)`. Returns the final K and plane.
    ///
    /// Trial steps follow Barzilai-Borwein and are cut back by Armijo.
    fn refine(&self, mut a: Vec<T>, mut b: Vec<T>, sign: T, n_refine: usize, tol: T) -> (T, Vec<T>, Vec<T>) {
        let n = self.dim;
        let m = self.pairs.len();
        let zeros = || vec![T::zero(); n];
        let (mut ga, mut gb, mut na, mut nb) = (zeros(), zeros(), zeros(), zeros());
        let (mut pa, mut pb, mut pga, mut pgb) = (zeros(), zeros(), zeros(), zeros());
        let mut scratch = vec![T::zero(); m];
        let mut op_p = vec![T::zero(); m];
        let mut trial_op = vec![T::zero(); m];
        let mut k = self.eval(&a, &b, &mut scratch, &mut op_p);
        let base_step = T::lit(0.25) / self.scale;
        let (min_step, max_step) = (base_step * T::lit(1e-6), base_step * T::lit(1e4));
        let armijo = T::lit(1e-4);
        let mut have_prev = false;
        for _ in 0..n_refine {
            self.gradient(&a, &b, &op_p, &mut ga, &mut gb);
            let g2 = dot(&ga, &ga) + dot(&gb, &gb);
            if g2 == T::zero() {
                break;
            }
            let mut step = base_step;
            if have_prev {
                let mut ss = T::zero();
                let mut sy = T::zero();
                for q in 0..n {
                    let (sa, sb) = (a[q] - pa[q], b[q] - pb[q]);
                    ss = ss + sa * sa + sb * sb;
                    sy = sy + sa * (ga[q] - pga[q]) + sb * (gb[q] - pgb[q]);
                }
                if sy != T::zero() {
                    step = (ss / sy.abs()).max(min_step).min(max_step);
                }
            }
            let mut accepted = None;
            for _ in 0..60 {
                for q in 0..n {
                    na[q] = a[q] + sign * step * ga[q];
                    nb[q] = b[q] + sign * step * gb[q];
                }
                if orthonormalize_in_place(&mut na, &mut nb) {
                    let nk = self.eval(&na, &nb, &mut scratch, &mut trial_op);
                    if sign * (nk - k) >= armijo * step * g2 {
                        accepted = Some(nk);
                        break;
                    }
                }
                step = step * T::lit(0.5);
            }
            let Some(nk) = accepted else { break };
            std::mem::swap(&mut pa, &mut a);
            std::mem::swap(&mut pb, &mut b);
            std::mem::swap(&mut a, &mut na);
            std::mem::swap(&mut b, &mut nb);
            std::mem::swap(&mut pga, &mut ga);
            std::mem::swap(&mut pgb, &mut gb);
            std::mem::swap(&mut op_p, &mut trial_op);
            have_prev = true;
            let change = (nk - k).abs();
            k = nk;
            if change < tol {
                break;
            }
        }
        (k, a, b)
    }
}

fn random_plane<T: Scalar>(dim: usize, rng: &mut ChaCha8Rng) -> Option<(Vec<T>, Vec<T>)> {
    let mut draw = || -> Vec<T> {
        (0..dim)
            .map(|_| {
                let x: f64 = StandardNormal.sample(rng);
                T::lit(x)
            })
            .collect()
    };
    let a = draw();
    let b = draw();
    orthonormalize(a, b)
}

/// Global min and max of K found by multi-start refinement. Deterministic
/// for a fixed seed.
pub fn scan_extremes<T: Scalar>(tensor: &CurvTensor<T>, params: &ScanParams) -> PinchReport<T> {
    scan_extremes_at(tensor, params, T::nan())
}

/// [`scan_extremes`] with the radius recorded in the report.
pub fn scan_extremes_at<T: Scalar>(tensor: &CurvTensor<T>, params: &ScanParams, r: T) -> PinchReport<T> {
    let dim = tensor.dim();
    let op = Operator::new(tensor);
    let tol = T::lit(params.tol).max(T::epsilon() * op.scale);
    let mut seeds: Vec<(Vec<T>, Vec<T>)> = Vec::new();
    for &(i, j) in &op.pairs {
        let a = FrameVector::<T>::basis(dim, i).coefficients;
        let b = FrameVector::<T>::basis(dim, j).coefficients;
        seeds.push((a, b));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    for _ in 0..params.n_samples {
        if let Some(p) = random_plane(dim, &mut rng) {
            seeds.push(p);
        }
    }
    let mut best_max: Option<(T, Vec<T>, Vec<T>)> = None;
    let mut best_min: Option<(T, Vec<T>, Vec<T>)> = None;
    for (a, b) in seeds {
        let hi = op.refine(a.clone(), b.clone(), T::one(), params.n_refine, tol);
        if best_max.as_ref().is_none_or(|m| hi.0 > m.0) {
            best_max = Some(hi);
        }
        let lo = op.refine(a, b, -T::one(), params.n_refine, tol);
        if best_min.as_ref().is_none_or(|m| lo.0 < m.0) {
            best_min = Some(lo);
        }
    }
    let (k_max, amax, bmax) = best_max.expect("at least one seed plane");
    let (k_min, amin, bmin) = best_min.expect("at least one seed plane");
    let mut report = PinchReport {
        r,
        k_min,
        k_max,
        witness_min: TwoPlane { a: FrameVector::new(amin), b: FrameVector::new(bmin) },
        witness_max: TwoPlane { a: FrameVector::new(amax), b: FrameVector::new(bmax) },
        pass: false,
    };
    report.pass = report.passes(T::lit(params.epsilon), T::zero());
    report
}

/// Closed-form K on the large-r limit tensor for the adapted frame
/// `A = a₁Y₁ + a₂Y₂ + a₃Y₃ + a₄Y_θ + a₅Y_r`, `B = b₁Y₁ + b₄Y_θ`, where
/// `(Y₁, Y₂)` is the first holomorphic pair and `Y₃` starts the second.
///
/// `K = −1 − 3(a₅b₄ + ½c₁a₂b₁)² + (c₁²/4 − 1)[(a₁b₄ + a₄b₁)² + a₂²b₄² + 4a₄²b₄²]
///      + (c₃²/4 − 1)a₃²b₄²`
pub fn reduced_k<T: Scalar>(c1: T, c3: T, a: [T; 5], b: [T; 2]) -> Result<T, PinchError> {
    let tol = T::lit(1e-9).max(T::epsilon() * T::lit(100.0));
    let one = T::one();
    let [a1, a2, a3, a4, a5] = a;
    let [b1, b4] = b;
    let na = a.iter().fold(T::zero(), |s, x| s + *x * *x);
    let nb = b1 * b1 + b4 * b4;
    let cross = a1 * b1 + a4 * b4;
    if (na - one).abs() > tol {
        return Err(PinchError::ConstraintViolated(format!("|a|² = {na}")));
    }
    if (nb - one).abs() > tol {
        return Err(PinchError::ConstraintViolated(format!("|b|² = {nb}")));
    }
    if cross.abs() > tol {
        return Err(PinchError::ConstraintViolated(format!("a₁b₁ + a₄b₄ = {cross}")));
    }
    let quarter = T::lit(0.25);
    let three = T::lit(3.0);
    let half = T::lit(0.5);
    let p1 = c1 * c1 * quarter - one;
    let p3 = c3 * c3 * quarter - one;
    let s = a5 * b4 + half * c1 * a2 * b1;
    let t = a1 * b4 + a4 * b1;
    Ok(-one - three * s * s + p1 * (t * t + a2 * a2 * b4 * b4 + T::lit(4.0) * a4 * a4 * b4 * b4) + p3 * a3 * a3 * b4 * b4)
}

/// Embeds the adapted-frame coefficients into a 6-dimensional frame plane.
pub fn adapted_plane<T: Scalar>(a: [T; 5], b: [T; 2]) -> Result<TwoPlane<T>, PinchError> {
    let z = T::zero();
    let av = vec![a[0], a[1], a[2], z, a[3], a[4]];
    let bv = vec![b[0], z, z, z, b[1], z];
    TwoPlane::new(av, bv)
}

/// Result of [`find_threshold_r`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport<T> {
    /// Smallest grid radius from which every sampled radius passes.
    pub r_threshold: T,
    /// True when the threshold is the left end of the grid.
    pub pinched_everywhere: bool,
    pub samples: usize,
    /// Worst margin over the pinched tail.
    pub tail_margin: T,
}

/// Uniform grid `r_min, r_min + pitch, …` up to `r_max`.
pub fn radius_grid<T: Scalar>(r_min: T, r_max: T, pitch: T) -> Vec<T> {
    let steps = ((r_max - r_min) / pitch + T::lit(1e-9)).floor().to_usize().unwrap_or(0);
    (0..=steps).map(|k| r_min + pitch * T::lit(k as f64)).collect()
}

/// Scans every radius of the grid and reports the start of the pinched tail.
///
/// Every grid point is scanned, so the answer does not assume the pass
/// region is an interval.
pub fn find_threshold_r<T: Scalar>(
    spec: &MetricSpec<T>,
    epsilon: T,
    params: &ScanParams,
) -> Result<ThresholdReport<T>, PinchError> {
    let grid = radius_grid(T::lit(R_MIN), T::lit(R_MAX), T::lit(THRESHOLD_PITCH));
    let reports: Vec<PinchReport<T>> =
        grid.par_iter().map(|&r| scan_extremes_at(&components(spec, r), params, r)).collect();
    let mut start = None;
    let mut tail_margin = T::infinity();
    for rep in reports.iter().rev() {
        if !rep.passes(epsilon, T::zero()) {
            break;
        }
        tail_margin = tail_margin.min(rep.margin(epsilon, T::zero()));
        start = Some(rep.r);
    }
    let r_threshold = start.ok_or(PinchError::NeverPinched { r_min: R_MIN, r_max: R_MAX })?;
    Ok(ThresholdReport {
        r_threshold,
        pinched_everywhere: r_threshold == grid[0],
        samples: grid.len(),
        tail_margin,
    })
}

/// Largest common `|c|` for which the large-r limit tensor with two pairs
/// still passes `(−4 − ε, −1 + ε)`. The amount by which it exceeds 2 is an
/// empirical value of the bracket slack.
pub fn bracket_slack<T: Scalar>(epsilon: T, params: &ScanParams) -> T {
    let passes = |c: T| scan_extremes(&large_r_limit(3, &[c, c]), params).passes(epsilon, T::zero());
    let (mut lo, mut hi) = (T::lit(2.0), T::lit(4.0));
    if !passes(lo) {
        return lo;
    }
    if passes(hi) {
        return hi;
    }
    for _ in 0..40 {
        let mid = T::lit(0.5) * (lo + hi);
        if passes(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}
