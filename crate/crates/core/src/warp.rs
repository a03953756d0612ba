//! Warping functions of the radial coordinate.
//!
//! A [`WarpProfile`] is a scalar function `f(r)` with analytic first and second
//! derivatives. Profiles play the roles of the horizontal warp `h`, the
//! vertical warp `v`, the angle-growth factor `σ` and the unwinding weight `α`.
//!
//! Transitions between two constant levels use the quintic smoothstep
//! `S(t) = 6t⁵ − 15t⁴ + 10t³`, rescaled to `[r_a, r_b]` and clamped outside it.
//! `S` is C² with `S'` and `S''` vanishing at both ends, and
//! `max|S'| = 15/8`, `max|S''| = 10/√3`, which fixes the shortest interval
//! that keeps both derivatives of the rescaled profile below a bound `δ`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{coth, ln_cosh, ln_sinh, Scalar};

/// `max_{t∈[0,1]} |S'(t)|`, attained at t = 1/2.
pub const SMOOTHSTEP_MAX_D1: f64 = 15.0 / 8.0;
/// `max_{t∈[0,1]} |S''(t)|`, attained at t = (3 ± √3)/6.
pub const SMOOTHSTEP_MAX_D2: f64 = 5.773_502_691_896_258; // 10/√3

/// Grid size used by [`TransitionProfile::verify`].
pub const VERIFY_GRID: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransitionError {
    #[error("transition interval of length {length} is shorter than the required {required}")]
    IntervalTooShort { length: f64, required: f64 },
    #[error("invalid transition parameters: {0}")]
    InvalidParameters(String),
    #[error("transition invariant violated: {0}")]
    InvariantViolated(String),
}

/// Value and first two derivatives at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet<T> {
    pub value: T,
    pub d1: T,
    pub d2: T,
}

/// `ln f`, `f'/f` and `f''/f`.
///
/// Curvature formulas only ever need these ratios, and they stay finite long
/// after `cosh r` overflows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogJet<T> {
    pub ln: T,
    pub d1: T,
    pub d2: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `lo` before `r_a`, `hi` after `r_b`.
    Rising,
    /// `hi` before `r_a`, `lo` after `r_b`.
    Falling,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseShape {
    #[default]
    QuinticSmoothstep,
}

/// Unit quintic smoothstep and its first two derivatives, clamped to [0, 1].
pub fn smoothstep<T: Scalar>(t: T) -> Jet<T> {
    let zero = T::zero();
    let one = T::one();
    if t <= zero {
        return Jet { value: zero, d1: zero, d2: zero };
    }
    if t >= one {
        return Jet { value: one, d1: zero, d2: zero };
    }
    let l = T::lit;
    let t2 = t * t;
    let t3 = t2 * t;
    let s = one - t;
    Jet {
        value: t3 * (l(10.0) + t * (l(-15.0) + l(6.0) * t)),
        d1: l(30.0) * t2 * s * s,
        d2: l(60.0) * t * s * (one - t - t),
    }
}

/// Monotone C² transition between two levels over `[r_a, r_b]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionProfile<T> {
    r_a: T,
    r_b: T,
    lo: T,
    hi: T,
    delta: T,
    direction: Direction,
    #[serde(default)]
    shape: BaseShape,
}

/// Shortest `r_b − r_a` for which a transition between `lo` and `hi` keeps
/// `|f'|` and `|f''|` at or below `delta`.
pub fn required_length<T: Scalar>(delta: T, lo: T, hi: T) -> T {
    let span = (hi - lo).abs();
    let by_d1 = T::lit(SMOOTHSTEP_MAX_D1) * span / delta;
    let by_d2 = (T::lit(SMOOTHSTEP_MAX_D2) * span / delta).sqrt();
    by_d1.max(by_d2)
}

/// Builds a transition profile, rejecting intervals too short for `delta`.
pub fn make_transition<T: Scalar>(
    r_a: T,
    r_b: T,
    lo: T,
    hi: T,
    delta: T,
    direction: Direction,
) -> Result<TransitionProfile<T>, TransitionError> {
    let all_finite = [r_a, r_b, lo, hi, delta].iter().all(|x| x.is_finite());
    if !all_finite {
        return Err(TransitionError::InvalidParameters("non-finite input".into()));
    }
    if !(lo < hi) {
        return Err(TransitionError::InvalidParameters(format!(
            "need lo < hi, got lo = {lo}, hi = {hi}"
        )));
    }
    if !(delta > T::zero()) {
        return Err(TransitionError::InvalidParameters(format!(
            "need delta > 0, got {delta}"
        )));
    }
    let length = r_b - r_a;
    let required = required_length(delta, lo, hi);
    if !(length > T::zero()) || length < required {
        return Err(TransitionError::IntervalTooShort {
            length: length.to_f64_lossy(),
            required: required.to_f64_lossy(),
        });
    }
    Ok(TransitionProfile {
        r_a,
        r_b,
        lo,
        hi,
        delta,
        direction,
        shape: BaseShape::QuinticSmoothstep,
    })
}

/// Summary of a dense-grid verification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionCheck<T> {
    pub max_abs_d1: T,
    pub max_abs_d2: T,
    pub monotone: bool,
}

impl<T: Scalar> TransitionProfile<T> {
    pub fn rising(r_a: T, r_b: T, lo: T, hi: T, delta: T) -> Result<Self, TransitionError> {
        make_transition(r_a, r_b, lo, hi, delta, Direction::Rising)
    }

    pub fn falling(r_a: T, r_b: T, lo: T, hi: T, delta: T) -> Result<Self, TransitionError> {
        make_transition(r_a, r_b, lo, hi, delta, Direction::Falling)
    }

    pub fn r_a(&self) -> T {
        self.r_a
    }

    pub fn r_b(&self) -> T {
        self.r_b
    }

    pub fn lo(&self) -> T {
        self.lo
    }

    pub fn hi(&self) -> T {
        self.hi
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn length(&self) -> T {
        self.r_b - self.r_a
    }

    /// Position of `r` inside the interval, in [0, 1] after clamping.
    pub fn progress(&self, r: T) -> T {
        ((r - self.r_a) / self.length()).max(T::zero()).min(T::one())
    }

    pub fn eval(&self, r: T) -> Jet<T> {
        let len = self.length();
        let t = (r - self.r_a) / len;
        let s = smoothstep(t);
        let span = self.hi - self.lo;
        let (start, end, sign) = match self.direction {
            Direction::Rising => (self.lo, self.hi, T::one()),
            Direction::Falling => (self.hi, self.lo, -T::one()),
        };
        // past the midpoint, count from the far level so values near it stay accurate
        let value = if t <= T::lit(0.5) {
            start + sign * span * s.value
        } else {
            end - sign * span * smoothstep(T::one() - t).value
        };
        Jet {
            value,
            d1: sign * span * s.d1 / len,
            d2: sign * span * s.d2 / (len * len),
        }
    }

    pub fn value(&self, r: T) -> T {
        self.eval(r).value
    }

    /// Re-checks the construction invariants on a grid of `VERIFY_GRID + 1`
    /// points: plateau values, derivative bounds, C² junctions, monotonicity.
    pub fn verify(&self) -> Result<TransitionCheck<T>, TransitionError> {
        let n = VERIFY_GRID;
        let tol = T::epsilon() * T::lit(256.0);
        let (start, end) = match self.direction {
            Direction::Rising => (self.lo, self.hi),
            Direction::Falling => (self.hi, self.lo),
        };
        let scale = self.hi.abs().max(self.lo.abs()).max(T::one());
        let at_a = self.eval(self.r_a);
        let at_b = self.eval(self.r_b);
        if (at_a.value - start).abs() > tol * scale || (at_b.value - end).abs() > tol * scale {
            return Err(TransitionError::InvariantViolated("plateau values".into()));
        }
        if at_a.d2 != T::zero() || at_b.d2 != T::zero() || at_a.d1 != T::zero() || at_b.d1 != T::zero() {
            return Err(TransitionError::InvariantViolated("junction derivatives".into()));
        }
        let mut max_d1 = T::zero();
        let mut max_d2 = T::zero();
        let mut monotone = true;
        let mut prev = at_a.value;
        let len = self.length();
        for k in 0..=n {
            let r = self.r_a + len * T::lit(k as f64) / T::lit(n as f64);
            let j = self.eval(r);
            max_d1 = max_d1.max(j.d1.abs());
            max_d2 = max_d2.max(j.d2.abs());
            let step = j.value - prev;
            let wrong_way = match self.direction {
                Direction::Rising => step < -tol * scale,
                Direction::Falling => step > tol * scale,
            };
            if wrong_way {
                monotone = false;
            }
            prev = j.value;
        }
        let bound = self.delta * (T::one() + tol);
        if max_d1 > bound || max_d2 > bound {
            return Err(TransitionError::InvariantViolated(format!(
                "derivative bound exceeded: |f'| = {max_d1}, |f''| = {max_d2}, delta = {}",
                self.delta
            )));
        }
        if !monotone {
            return Err(TransitionError::InvariantViolated("not monotone".into()));
        }
        Ok(TransitionCheck { max_abs_d1: max_d1, max_abs_d2: max_d2, monotone })
    }
}

/// Coefficient of the holomorphic-pair bracket after partially unwinding the
/// horizontal distribution: `b = 4α − 2α²` for `α ∈ [0, 1]`.
pub fn effective_bracket<T: Scalar>(alpha: T) -> T {
    let two = T::lit(2.0);
    (two + two) * alpha - two * alpha * alpha
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    Cosh,
    Sinh,
    Sinh2r,
    DSinh2r,
    Product,
    Transition,
    Constant,
}

/// Scalar warping function of r with exact derivatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WarpProfile<T> {
    Constant { value: T },
    Cosh,
    Sinh,
    /// `sinh(2r)`
    Sinh2r,
    /// `d · sinh(2r)`
    DSinh2r { d: T },
    Product { left: Box<WarpProfile<T>>, right: Box<WarpProfile<T>> },
    Transition(TransitionProfile<T>),
}

impl<T: Scalar> WarpProfile<T> {
    pub fn constant(value: T) -> Self {
        WarpProfile::Constant { value }
    }

    pub fn product(left: WarpProfile<T>, right: WarpProfile<T>) -> Self {
        WarpProfile::Product { left: Box::new(left), right: Box::new(right) }
    }

    /// `d · p`
    pub fn scaled(d: T, p: WarpProfile<T>) -> Self {
        Self::product(Self::constant(d), p)
    }

    pub fn kind(&self) -> ProfileKind {
        match self {
            WarpProfile::Constant { .. } => ProfileKind::Constant,
            WarpProfile::Cosh => ProfileKind::Cosh,
            WarpProfile::Sinh => ProfileKind::Sinh,
            WarpProfile::Sinh2r => ProfileKind::Sinh2r,
            WarpProfile::DSinh2r { .. } => ProfileKind::DSinh2r,
            WarpProfile::Product { .. } => ProfileKind::Product,
            WarpProfile::Transition(_) => ProfileKind::Transition,
        }
    }

    pub fn eval(&self, r: T) -> Jet<T> {
        let two = T::lit(2.0);
        match self {
            WarpProfile::Constant { value } => Jet { value: *value, d1: T::zero(), d2: T::zero() },
            WarpProfile::Cosh => Jet { value: r.cosh(), d1: r.sinh(), d2: r.cosh() },
            WarpProfile::Sinh => Jet { value: r.sinh(), d1: r.cosh(), d2: r.sinh() },
            WarpProfile::Sinh2r => {
                let x = two * r;
                Jet { value: x.sinh(), d1: two * x.cosh(), d2: two * two * x.sinh() }
            }
            WarpProfile::DSinh2r { d } => {
                let x = two * r;
                Jet {
                    value: *d * x.sinh(),
                    d1: *d * two * x.cosh(),
                    d2: *d * two * two * x.sinh(),
                }
            }
            WarpProfile::Product { left, right } => {
                let a = left.eval(r);
                let b = right.eval(r);
                Jet {
                    value: a.value * b.value,
                    d1: a.d1 * b.value + a.value * b.d1,
                    d2: a.d2 * b.value + two * a.d1 * b.d1 + a.value * b.d2,
                }
            }
            WarpProfile::Transition(t) => t.eval(r),
        }
    }

    pub fn value(&self, r: T) -> T {
        self.eval(r).value
    }

    /// `(ln|f|, f'/f, f''/f)`, evaluated without forming `f` where it could
    /// overflow.
    pub fn log_jet(&self, r: T) -> LogJet<T> {
        let two = T::lit(2.0);
        let four = two * two;
        match self {
            WarpProfile::Constant { value } => {
                LogJet { ln: value.abs().ln(), d1: T::zero(), d2: T::zero() }
            }
            WarpProfile::Cosh => LogJet { ln: ln_cosh(r), d1: r.tanh(), d2: T::one() },
            WarpProfile::Sinh => LogJet { ln: ln_sinh(r), d1: coth(r), d2: T::one() },
            WarpProfile::Sinh2r => {
                let x = two * r;
                LogJet { ln: ln_sinh(x), d1: two * coth(x), d2: four }
            }
            WarpProfile::DSinh2r { d } => {
                let x = two * r;
                LogJet { ln: d.abs().ln() + ln_sinh(x), d1: two * coth(x), d2: four }
            }
            WarpProfile::Product { left, right } => {
                let a = left.log_jet(r);
                let b = right.log_jet(r);
                LogJet { ln: a.ln + b.ln, d1: a.d1 + b.d1, d2: a.d2 + two * a.d1 * b.d1 + b.d2 }
            }
            WarpProfile::Transition(t) => {
                let j = t.eval(r);
                LogJet { ln: j.value.abs().ln(), d1: j.d1 / j.value, d2: j.d2 / j.value }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_interval_is_too_short() {
        let err = make_transition(5.0, 5.0, 0.0, 1.0, 0.1, Direction::Falling).unwrap_err();
        assert!(matches!(err, TransitionError::IntervalTooShort { .. }));
    }

    #[test]
    fn rejects_bad_levels_and_bounds() {
        assert!(matches!(
            make_transition(0.0, 100.0, 1.0, 1.0, 0.1, Direction::Rising),
            Err(TransitionError::InvalidParameters(_))
        ));
        assert!(matches!(
            make_transition(0.0, 100.0, 0.0, 1.0, 0.0, Direction::Rising),
            Err(TransitionError::InvalidParameters(_))
        ));
    }

    #[test]
    fn sigma_transition_reaches_fold() {
        let d = 3.0;
        let delta = 0.05;
        let len = required_length(delta, 1.0, d);
        let s = TransitionProfile::rising(10.0, 10.0 + len, 1.0, d, delta).unwrap();
        assert_eq!(s.value(10.0), 1.0);
        assert_eq!(s.value(10.0 + len), d);
        assert_eq!(s.value(0.0), 1.0);
        assert_eq!(s.value(1e6), d);
        let check = s.verify().unwrap();
        assert!(check.monotone);
    }

    /// Grid search over 10⁶ points of the unit smoothstep, differentiating the
    /// polynomial numerically rather than through `smoothstep`.
    #[test]
    fn smoothstep_derivative_maxima_by_grid_search() {
        let poly = |t: f64| t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
        let n = 1_000_000;
        let h = 1e-4;
        let (mut m1, mut m2) = (0.0_f64, 0.0_f64);
        for k in 0..=n {
            let t = k as f64 / n as f64;
            let d1 = (poly(t + h) - poly(t - h)) / (2.0 * h);
            let d2 = (poly(t + h) - 2.0 * poly(t) + poly(t - h)) / (h * h);
            m1 = m1.max(d1.abs());
            m2 = m2.max(d2.abs());
        }
        assert!((m1 - SMOOTHSTEP_MAX_D1).abs() < 1e-6, "{m1}");
        assert!((m2 - SMOOTHSTEP_MAX_D2).abs() < 1e-5, "{m2}");

        let (delta, lo, hi) = (0.02, 0.0, 1.0);
        let expected = (m1 * (hi - lo) / delta).max((m2 * (hi - lo) / delta).sqrt());
        assert!((required_length(delta, lo, hi) - expected).abs() < 1e-4);
    }

    #[test]
    fn required_length_scaling() {
        for &delta in &[1e-4, 1e-2, 0.5, 10.0, 1e3] {
            let l = required_length(delta, 0.0, 1.0);
            let expected = (SMOOTHSTEP_MAX_D1 / delta).max((SMOOTHSTEP_MAX_D2 / delta).sqrt());
            assert!((l - expected).abs() <= 1e-12 * expected);
            assert_eq!(l, required_length(delta, 1.0, 2.0));
        }
        // 1/δ dominates for small δ, 1/√δ for large δ.
        assert!((required_length(1e-4, 0.0, 1.0) * 1e-4 - SMOOTHSTEP_MAX_D1).abs() < 1e-12);
        assert!((required_length(1e3, 0.0, 1.0) * 1e3_f64.sqrt() - SMOOTHSTEP_MAX_D2.sqrt()).abs() < 1e-9);
    }

    /// Bisection on the interval length using only the constructor's verdict.
    #[test]
    fn required_length_matches_bisection() {
        let (delta, lo, hi) = (0.01, 1.0, 3.0);
        let ok = |len: f64| make_transition(0.0, len, lo, hi, delta, Direction::Rising).is_ok();
        let (mut a, mut b) = (1e-3, 1e6);
        assert!(!ok(a) && ok(b));
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if ok(m) {
                b = m
            } else {
                a = m
            }
        }
        let l = required_length(delta, lo, hi);
        assert!((b - l).abs() <= 1e-9 * l, "bisection {b} vs {l}");
        assert!(ok(l));
        assert!(!ok(0.9 * l));
        let t = make_transition(0.0, l, lo, hi, delta, Direction::Rising).unwrap();
        t.verify().unwrap();
    }

    #[test]
    fn effective_bracket_values() {
        assert_eq!(effective_bracket(1.0), 2.0);
        assert_eq!(effective_bracket(0.0), 0.0);
        assert_eq!(effective_bracket(0.5), 1.5);
    }

    #[test]
    fn bracket_of_falling_alpha_is_nonincreasing() {
        let a = TransitionProfile::falling(2.0, 40.0, 0.0, 1.0, 0.1).unwrap();
        let mut prev = effective_bracket(a.value(0.0));
        for k in 0..=4000 {
            let b = effective_bracket(a.value(k as f64 * 0.011));
            assert!(b <= prev + 1e-15);
            prev = b;
        }
        assert_eq!(prev, 0.0);
    }

    #[test]
    fn log_jet_matches_jet() {
        let sigma = TransitionProfile::<f64>::rising(1.0, 9.0, 1.0, 2.5, 1.0).unwrap();
        let profiles = [
            WarpProfile::Cosh,
            WarpProfile::Sinh,
            WarpProfile::Sinh2r,
            WarpProfile::DSinh2r { d: 3.0 },
            WarpProfile::scaled(2.0, WarpProfile::Sinh),
            WarpProfile::product(WarpProfile::Transition(sigma), WarpProfile::Sinh2r),
        ];
        for p in &profiles {
            for &r in &[0.05, 0.7, 3.0, 5.5, 12.0] {
                let j = p.eval(r);
                let l = p.log_jet(r);
                assert!((l.ln - j.value.ln()).abs() < 1e-12 * j.value.ln().abs().max(1.0));
                assert!((l.d1 - j.d1 / j.value).abs() < 1e-12 * (j.d1 / j.value).abs().max(1.0));
                assert!((l.d2 - j.d2 / j.value).abs() < 1e-11 * (j.d2 / j.value).abs().max(1.0));
            }
        }
    }
}
