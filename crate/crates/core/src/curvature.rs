//! Closed-form (4,0) curvature tensors in the orthonormal frame.
//!
//! Convention: `R(a, b, a, b)` is the sectional curvature of `span(Y_a, Y_b)`.
//! Every quantity is built from the log-jets of `h` and `v`, so ratios such as
//! `v²/h⁴` are formed as `exp(2 ln v − 4 ln h)` and never overflow.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metric::{Family, MetricSpec};
use crate::scalar::{coth, sech2, Scalar};
use crate::warp::TransitionProfile;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurvatureError {
    #[error("expected a {expected:?} metric, got {got:?}")]
    WrongFamily { expected: Family, got: Family },
    #[error("components at canonical slot {slot:?} disagree: {a} vs {b}")]
    SymmetryConflict { slot: [usize; 4], a: f64, b: f64 },
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
}

/// One stored component `R_{ijkl}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Component<T> {
    pub idx: [usize; 4],
    pub value: T,
}

/// Curvature tensor: canonical sparse components plus an optional dense
/// `dim⁴` expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvTensor<T> {
    dim: usize,
    sparse: Vec<Component<T>>,
    full: Option<Vec<T>>,
}

/// Canonical representative of the symmetry orbit of `(i, j, k, l)` and the
/// sign relating them, or `None` when the orbit is forced to vanish.
pub fn canonical(idx: [usize; 4]) -> Option<([usize; 4], bool)> {
    let [mut i, mut j, mut k, mut l] = idx;
    if i == j || k == l {
        return None;
    }
    let mut negate = false;
    if i > j {
        std::mem::swap(&mut i, &mut j);
        negate = !negate;
    }
    if k > l {
        std::mem::swap(&mut k, &mut l);
        negate = !negate;
    }
    if (i, j) > (k, l) {
        std::mem::swap(&mut i, &mut k);
        std::mem::swap(&mut j, &mut l);
    }
    Some(([i, j, k, l], negate))
}

/// The eight slots in the orbit of `(i, j, k, l)` with their signs.
fn orbit(idx: [usize; 4]) -> [([usize; 4], bool); 8] {
    let [i, j, k, l] = idx;
    [
        ([i, j, k, l], false),
        ([j, i, k, l], true),
        ([i, j, l, k], true),
        ([j, i, l, k], false),
        ([k, l, i, j], false),
        ([l, k, i, j], true),
        ([k, l, j, i], true),
        ([l, k, j, i], false),
    ]
}

impl<T: Scalar> CurvTensor<T> {
    pub fn new(dim: usize) -> Self {
        CurvTensor { dim, sparse: Vec::new(), full: None }
    }

    /// Records `R_{ijkl} = value`, storing it in canonical form. Orbits that
    /// are forced to vanish are stored as-is so expansion can flag them.
    pub fn insert(&mut self, i: usize, j: usize, k: usize, l: usize, value: T) {
        self.full = None;
        match canonical([i, j, k, l]) {
            Some((idx, negate)) => {
                let value = if negate { -value } else { value };
                self.sparse.push(Component { idx, value });
            }
            None => self.sparse.push(Component { idx: [i, j, k, l], value }),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sparse(&self) -> &[Component<T>] {
        &self.sparse
    }

    pub fn full(&self) -> Option<&[T]> {
        self.full.as_deref()
    }

    #[inline]
    fn offset(&self, idx: [usize; 4]) -> usize {
        let n = self.dim;
        ((idx[0] * n + idx[1]) * n + idx[2]) * n + idx[3]
    }

    /// Builds the dense array from the sparse list, closing it under the
    /// curvature symmetries.
    pub fn expand_full(mut self) -> Result<Self, CurvatureError> {
        self.expand_in_place()?;
        Ok(self)
    }

    pub fn expand_in_place(&mut self) -> Result<(), CurvatureError> {
        let n = self.dim;
        let mut full = vec![T::zero(); n * n * n * n];
        let mut set = vec![false; n * n * n * n];
        let tol = T::epsilon() * T::lit(64.0);
        for c in &self.sparse {
            if let Some(&bad) = c.idx.iter().find(|&&x| x >= n) {
                return Err(CurvatureError::IndexOutOfRange { index: bad, dim: n });
            }
            let Some((canon, negate)) = canonical(c.idx) else {
                if c.value != T::zero() {
                    return Err(CurvatureError::SymmetryConflict {
                        slot: c.idx,
                        a: c.value.to_f64_lossy(),
                        b: 0.0,
                    });
                }
                continue;
            };
            let base = if negate { -c.value } else { c.value };
            for (slot, neg) in orbit(canon) {
                let val = if neg { -base } else { base };
                let o = self.offset(slot);
                if set[o] {
                    let prev = full[o];
                    let scale = prev.abs().max(val.abs()).max(T::one());
                    if (prev - val).abs() > tol * scale {
                        return Err(CurvatureError::SymmetryConflict {
                            slot,
                            a: prev.to_f64_lossy(),
                            b: val.to_f64_lossy(),
                        });
                    }
                } else {
                    full[o] = val;
                    set[o] = true;
                }
            }
        }
        self.full = Some(full);
        Ok(())
    }

    /// Wraps a dense array. Sparse entries are the nonzero canonical slots.
    pub fn from_full(dim: usize, full: Vec<T>) -> Self {
        assert_eq!(full.len(), dim.pow(4), "dense tensor has wrong length");
        let mut sparse = Vec::new();
        for i in 0..dim {
            for j in i + 1..dim {
                for k in 0..dim {
                    for l in k + 1..dim {
                        if (i, j) > (k, l) {
                            continue;
                        }
                        let v = full[((i * dim + j) * dim + k) * dim + l];
                        if v != T::zero() {
                            sparse.push(Component { idx: [i, j, k, l], value: v });
                        }
                    }
                }
            }
        }
        CurvTensor { dim, sparse, full: Some(full) }
    }

    /// Component lookup; uses the dense array when present.
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> T {
        if let Some(full) = &self.full {
            return full[self.offset([i, j, k, l])];
        }
        let Some((canon, negate)) = canonical([i, j, k, l]) else {
            return T::zero();
        };
        let hit = self.sparse.iter().find(|c| c.idx == canon).map(|c| c.value).unwrap_or(T::zero());
        if negate {
            -hit
        } else {
            hit
        }
    }

    pub fn max_abs(&self) -> T {
        self.sparse.iter().fold(T::zero(), |m, c| m.max(c.value.abs()))
    }

    /// `max |R_{ijkl} + R_{iklj} + R_{iljk}|` over all index quadruples.
    pub fn bianchi_residual(&self) -> T {
        let n = self.dim;
        let mut worst = T::zero();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let s = self.get(i, j, k, l) + self.get(i, k, l, j) + self.get(i, l, j, k);
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        worst
    }

    /// Largest violation of antisymmetry and pair symmetry in the dense array.
    pub fn symmetry_residual(&self) -> T {
        let n = self.dim;
        let mut worst = T::zero();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let v = self.get(i, j, k, l);
                        worst = worst
                            .max((v + self.get(j, i, k, l)).abs())
                            .max((v + self.get(i, j, l, k)).abs())
                            .max((v - self.get(k, l, i, j)).abs());
                    }
                }
            }
        }
        worst
    }

    /// Curvature operator on `Λ²`, indexed by pairs `a < b` in lexicographic
    /// order: `Op[(ab),(cd)] = R_{abcd}`. Row-major, side `dim(dim−1)/2`.
    pub fn operator_matrix(&self) -> Vec<T> {
        let pairs = bivector_pairs(self.dim);
        let m = pairs.len();
        let mut op = vec![T::zero(); m * m];
        for (p, &(a, b)) in pairs.iter().enumerate() {
            for (q, &(c, d)) in pairs.iter().enumerate() {
                op[p * m + q] = self.get(a, b, c, d);
            }
        }
        op
    }

    /// `max |self − other|` over every slot.
    pub fn max_deviation(&self, other: &Self) -> T {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut worst = T::zero();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        worst = worst.max((self.get(i, j, k, l) - other.get(i, j, k, l)).abs());
                    }
                }
            }
        }
        worst
    }
}

/// Index pairs `a < b` in lexicographic order.
pub fn bivector_pairs(dim: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(dim * (dim.saturating_sub(1)) / 2);
    for a in 0..dim {
        for b in a + 1..dim {
            out.push((a, b));
        }
    }
    out
}

/// Real polar family: horizontal/horizontal, horizontal/θ, horizontal/radial
/// and θ/radial sectional curvatures. Every other component vanishes.
pub fn components_real<T: Scalar>(spec: &MetricSpec<T>, r: T) -> Result<CurvTensor<T>, CurvatureError> {
    if spec.family != Family::RealPolar {
        return Err(CurvatureError::WrongFamily { expected: Family::RealPolar, got: spec.family });
    }
    let dim = spec.dim();
    let (th, rr) = (dim - 2, dim - 1);
    let h = spec.h.log_jet(r);
    let v = spec.v.log_jet(r);
    let inv_h2 = (-(h.ln + h.ln)).exp();
    let mut t = CurvTensor::new(dim);
    for i in 0..th {
        for j in i + 1..th {
            t.insert(i, j, i, j, -inv_h2 - h.d1 * h.d1);
        }
        t.insert(i, th, i, th, -h.d1 * v.d1);
        t.insert(i, rr, i, rr, -h.d2);
    }
    t.insert(th, rr, th, rr, -v.d2);
    t.expand_full()
}

/// Complex polar family with structure constants frozen at r.
pub fn components_complex<T: Scalar>(spec: &MetricSpec<T>, r: T) -> Result<CurvTensor<T>, CurvatureError> {
    if spec.family != Family::ComplexPolar {
        return Err(CurvatureError::WrongFamily { expected: Family::ComplexPolar, got: spec.family });
    }
    let c = spec.brackets_at(r);
    let h = spec.h.log_jet(r);
    let v = spec.v.log_jet(r);
    let two = T::lit(2.0);
    let inv_h2 = (-(h.ln + h.ln)).exp();
    let v2_h4 = (two * v.ln - T::lit(4.0) * h.ln).exp();
    let w = T::lit(0.5) * (v.ln - two * h.ln).exp();
    let derivs = WarpRatios { h1: h.d1, h2: h.d2, v1: v.d1, v2: v.d2 };
    complex_from_ratios(spec.n, &c, inv_h2, v2_h4, w, derivs).expand_full()
}

/// `h'/h`, `h''/h`, `v'/v`, `v''/v`.
#[derive(Debug, Clone, Copy)]
struct WarpRatios<T> {
    h1: T,
    h2: T,
    v1: T,
    v2: T,
}

/// Sparse complex-family components from the warp ratios.
/// `inv_h2 = 1/h²`, `v2_h4 = v²/h⁴`, `w = v/(2h²)`.
fn complex_from_ratios<T: Scalar>(n: usize, c: &[T], inv_h2: T, v2_h4: T, w: T, d: WarpRatios<T>) -> CurvTensor<T> {
    let dim = 2 * n;
    let (th, rr) = (dim - 2, dim - 1);
    let half = T::lit(0.5);
    let sixteenth = T::lit(1.0 / 16.0);
    let eighth = T::lit(0.125);
    let generic = -inv_h2 - d.h1 * d.h1;
    let mut t = CurvTensor::new(dim);
    for p in 0..n - 1 {
        let (i, j) = (2 * p, 2 * p + 1);
        let q = c[p] * c[p] * v2_h4 * sixteenth;
        t.insert(i, j, i, j, -d.h1 * d.h1 - T::lit(4.0) * inv_h2 - T::lit(3.0) * q);
        for a in [i, j] {
            t.insert(a, th, a, th, -d.h1 * d.v1 + q);
            t.insert(a, rr, a, rr, -d.h2);
        }
        let mixed = -c[p] * w * (d.v1 - d.h1);
        t.insert(i, j, th, rr, mixed);
        t.insert(i, th, j, rr, half * mixed);
        t.insert(i, rr, j, th, -half * mixed);
        for s in p + 1..n - 1 {
            let (k, l) = (2 * s, 2 * s + 1);
            for a in [i, j] {
                for b in [k, l] {
                    t.insert(a, b, a, b, generic);
                }
            }
            let u = -T::lit(2.0) * inv_h2 - c[p] * c[s] * v2_h4 * eighth;
            t.insert(i, j, k, l, u);
            t.insert(i, k, j, l, half * u);
            t.insert(i, l, j, k, -half * u);
        }
    }
    t.insert(th, rr, th, rr, -d.v2);
    t
}

/// Integrable metric warped by `σ`: `h = cosh`, `v = σ sinh 2r`, all brackets
/// zero. Written directly in `tanh`, `sech` and `coth 2r`, independently of
/// the log-jet path in [`components_complex`].
pub fn components_sigma_warp<T: Scalar>(n: usize, sigma: &TransitionProfile<T>, r: T) -> CurvTensor<T> {
    let s = sigma.eval(r);
    let s1 = s.d1 / s.value;
    let s2 = s.d2 / s.value;
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let one = T::one();
    let th = r.tanh();
    let sech_sq = sech2(r);
    let ct2 = coth(two * r);

    let dim = 2 * n;
    let (vt, rr) = (dim - 2, dim - 1);
    let mut t = CurvTensor::new(dim);
    for p in 0..n - 1 {
        let (i, j) = (2 * p, 2 * p + 1);
        t.insert(i, j, i, j, -one - T::lit(3.0) * sech_sq);
        for a in [i, j] {
            t.insert(a, vt, a, vt, -one - th * th - s1 * th);
            t.insert(a, rr, a, rr, -one);
        }
        for q in p + 1..n - 1 {
            let (k, l) = (2 * q, 2 * q + 1);
            for a in [i, j] {
                for b in [k, l] {
                    t.insert(a, b, a, b, -one);
                }
            }
            let u = -two * sech_sq;
            t.insert(i, j, k, l, u);
            t.insert(i, k, j, l, u / two);
            t.insert(i, l, j, k, -u / two);
        }
    }
    t.insert(vt, rr, vt, rr, -four - four * s1 * ct2 - s2);
    t.expand_full().expect("sigma-warp components are canonical by construction")
}

/// Limit of the complex-family tensor with `h = cosh`, `v = sinh 2r` as
/// `r → ∞` (tanh → 1, sech → 0), for the given structure constants.
pub fn large_r_limit<T: Scalar>(n: usize, c: &[T]) -> CurvTensor<T> {
    assert_eq!(c.len(), n - 1, "one structure constant per holomorphic pair");
    let d = WarpRatios { h1: T::one(), h2: T::one(), v1: T::lit(2.0), v2: T::lit(4.0) };
    complex_from_ratios(n, c, T::zero(), T::lit(4.0), T::one(), d)
        .expand_full()
        .expect("limit components are canonical by construction")
}

/// Dispatches on the metric family.
pub fn components<T: Scalar>(spec: &MetricSpec<T>, r: T) -> CurvTensor<T> {
    match spec.family {
        Family::RealPolar => components_real(spec, r),
        Family::ComplexPolar => components_complex(spec, r),
    }
    .expect("family dispatch matches")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{complex_hyperbolic, make_d_fold, make_hyperbolic_polar, make_integrable};
    use crate::warp::WarpProfile;

    #[test]
    fn single_component_orbit_has_eight_slots() {
        let mut t = CurvTensor::<f64>::new(4);
        t.insert(0, 1, 0, 1, -1.0);
        let t = t.expand_full().unwrap();
        let full = t.full().unwrap();
        assert_eq!(full.iter().filter(|x| **x != 0.0).count(), 4);
        // (0,1,0,1) has only four distinct slots; a generic orbit has eight
        let mut g = CurvTensor::<f64>::new(4);
        g.insert(0, 1, 2, 3, 1.0);
        let g = g.expand_full().unwrap();
        assert_eq!(g.full().unwrap().iter().filter(|x| **x != 0.0).count(), 8);
        assert_eq!(g.get(3, 2, 1, 0), 1.0);
        assert_eq!(g.get(1, 0, 2, 3), -1.0);
    }

    #[test]
    fn conflicting_entries_are_rejected() {
        let mut t = CurvTensor::<f64>::new(4);
        t.insert(0, 1, 2, 3, 1.0);
        t.insert(2, 3, 0, 1, 2.0);
        assert!(matches!(t.expand_full(), Err(CurvatureError::SymmetryConflict { .. })));
        let mut z = CurvTensor::<f64>::new(4);
        z.insert(0, 0, 1, 2, 1.0);
        assert!(matches!(z.expand_full(), Err(CurvatureError::SymmetryConflict { .. })));
        let mut s = CurvTensor::<f64>::new(4);
        s.insert(1, 0, 2, 3, 1.0);
        s.insert(0, 1, 3, 2, 1.0);
        s.expand_full().unwrap();
    }

    #[test]
    fn mixed_triple_satisfies_bianchi() {
        let t0 = 0.7;
        let mut t = CurvTensor::<f64>::new(4);
        t.insert(0, 1, 2, 3, t0);
        t.insert(0, 2, 1, 3, t0 / 2.0);
        t.insert(0, 3, 1, 2, -t0 / 2.0);
        let t = t.expand_full().unwrap();
        assert_eq!(t.bianchi_residual(), 0.0);
        let mut bad = CurvTensor::<f64>::new(4);
        bad.insert(0, 1, 2, 3, t0);
        bad.insert(0, 2, 1, 3, t0 / 2.0);
        bad.insert(0, 3, 1, 2, t0 / 2.0);
        let bad = bad.expand_full().unwrap();
        assert!(bad.bianchi_residual() > 0.1);
    }

    #[test]
    fn hyperbolic_components_are_minus_one() {
        let s = make_hyperbolic_polar::<f64>(5).unwrap();
        let t = components_real(&s, 1.3).unwrap();
        for c in t.sparse() {
            assert!((c.value + 1.0).abs() < 1e-14);
        }
        assert_eq!(t.sparse().len(), 10);
        assert!(matches!(
            components_complex(&s, 1.0),
            Err(CurvatureError::WrongFamily { .. })
        ));
    }

    #[test]
    fn complex_hyperbolic_constants_at_large_r() {
        let s = complex_hyperbolic::<f64>(3).unwrap();
        let t = components_complex(&s, 300.0).unwrap();
        let lim = large_r_limit(3, &[2.0, 2.0]);
        assert!(t.max_deviation(&lim) < 1e-12);
        assert!((t.get(0, 1, 0, 1) + 4.0).abs() < 1e-12);
        assert!((t.get(0, 2, 0, 2) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn integrable_matches_known_values() {
        let s = make_integrable::<f64>(2).unwrap();
        let r = 1.0_f64;
        let t = components_complex(&s, r).unwrap();
        let sech2 = 1.0 / r.cosh().powi(2);
        assert!((t.get(0, 1, 0, 1) - (-1.0 - 3.0 * sech2)).abs() < 1e-14);
        assert!((t.get(0, 2, 0, 2) - (-1.0 - r.tanh().powi(2))).abs() < 1e-14);
        assert!((t.get(2, 3, 2, 3) + 4.0).abs() < 1e-13);
        assert_eq!(t.get(0, 1, 2, 3), 0.0);
    }

    #[test]
    fn sigma_warp_agrees_with_log_jet_path() {
        let sigma = TransitionProfile::rising(0.5, 6.0, 1.0, 3.0, 1.0).unwrap();
        let mut spec = make_integrable::<f64>(3).unwrap();
        spec.v = WarpProfile::product(WarpProfile::Transition(sigma.clone()), WarpProfile::Sinh2r);
        for &r in &[0.05, 0.4, 1.0, 2.2, 3.7, 5.9, 9.0, 25.0] {
            let a = components_complex(&spec, r).unwrap();
            let b = components_sigma_warp(3, &sigma, r);
            assert!(a.max_deviation(&b) < 1e-12, "r = {r}: {}", a.max_deviation(&b));
        }
    }

    #[test]
    fn d_fold_matches_integrable() {
        let gi = make_integrable::<f64>(3).unwrap();
        for d in [2, 3, 5] {
            let gd = make_d_fold::<f64>(3, d).unwrap();
            for &r in &[0.05, 0.5, 3.0, 29.0] {
                let a = components_complex(&gi, r).unwrap();
                let b = components_complex(&gd, r).unwrap();
                assert!(a.max_deviation(&b) < 1e-12);
            }
        }
    }

    #[test]
    fn generic_over_f32() {
        let s = complex_hyperbolic::<f32>(2).unwrap();
        let t = components_complex(&s, 2.0_f32).unwrap();
        assert!((t.get(0, 1, 0, 1) + 4.0).abs() < 1e-5);
        assert!((t.get(0, 1, 2, 3) + 2.0).abs() < 1e-5);
    }
}
