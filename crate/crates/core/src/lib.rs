//! Muckenhoupt weights on finite metric measure spaces.
//!
//! Exact, enumerable versions of the objects behind the self-improvement
//! of the `A_p` condition: balls and doubling, `A_p` constants, the
//! uncentered Hardy-Littlewood maximal operator, Whitney covers and
//! truncations, and the level-set/absorption pipeline that produces an
//! explicit `eps` with `w in A_{p-eps}`.

// `!(x > 0.0)` rejects NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod exec;
pub mod family;
pub mod fixtures;
pub mod maxop;
pub mod oracle;
pub mod selfimprove;
pub mod space;
pub mod verify;
pub mod weights;
pub mod whitney;

pub use error::{Error, Result};
pub use exec::Strategy;
pub use maxop::{maximal, maximal_weighted, maximal_with, norm_ratio, ScalarField};
pub use selfimprove::{
    epsilon_from_constants, epsilon_search, estar_constant, layer_cake_identity_check, self_improve,
    SelfImprovementConfig, SelfImprovementReport,
};
pub use space::{
    doubling_constant, enumerate_distinct_balls, generate, validate_metric, Ball, FiniteMetricMeasureSpace,
    MeasureSpec, MetricValidation, SpaceKind,
};
pub use weights::{ap_constant, dual_weight, Weight};
pub use whitney::{level_set, truncate, whitney_cover, PointSet};
