//! Curvature of warped polar metrics over real and complex hyperbolic space,
//! and certification that an interpolated metric is close to negatively
//! quarter-pinched.
//!
//! The analytic layers ([`warp`], [`metric`], [`curvature`], [`pinching`]) are
//! generic over [`Scalar`] (`f32` or `f64`). The coordinate oracle and the
//! composite certifier work in `f64`.

pub mod composite;
pub mod curvature;
pub mod metric;
pub mod oracle;
pub mod pinching;
pub mod scalar;
pub mod warp;

pub use composite::{
    assemble, assemble_auto, assemble_with, certify, curvature_at, sector_decompose, stage1_error_bound,
    AssembleOptions, CompositeError, CompositeMetric, PinchCertificate, Stage,
};
pub use curvature::{
    components, components_complex, components_real, components_sigma_warp, large_r_limit, Component,
    CurvTensor, CurvatureError,
};
pub use metric::{
    complex_hyperbolic, cone_angle, make_complex_hyperbolic_polar, make_d_fold, make_hyperbolic_polar,
    make_integrable, make_naive_warp, make_sigma_warp, BracketCoefficient, Family, FrameVector, MetricError,
    MetricSpec,
};
pub use pinching::{
    bracket_slack, find_threshold_r, reduced_k, scan_extremes, scan_extremes_at, sectional_curvature,
    PinchError, PinchReport, ScanParams, ThresholdReport, TwoPlane,
};
pub use scalar::Scalar;
pub use warp::{
    effective_bracket, make_transition, required_length, Direction, Jet, LogJet, TransitionError,
    TransitionProfile, WarpProfile,
};

pub type WarpProfileF64 = WarpProfile<f64>;
pub type WarpProfileF32 = WarpProfile<f32>;
pub type TransitionProfileF64 = TransitionProfile<f64>;
pub type TransitionProfileF32 = TransitionProfile<f32>;
pub type MetricSpecF64 = MetricSpec<f64>;
pub type MetricSpecF32 = MetricSpec<f32>;
pub type CurvTensorF64 = CurvTensor<f64>;
pub type CurvTensorF32 = CurvTensor<f32>;
pub type TwoPlaneF64 = TwoPlane<f64>;
pub type TwoPlaneF32 = TwoPlane<f32>;
pub type PinchReportF64 = PinchReport<f64>;
pub type PinchReportF32 = PinchReport<f32>;
