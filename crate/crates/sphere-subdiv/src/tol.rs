//! Centralized numerical tolerances.
//!
//! Every magic constant that decides "close enough" lives here with its
//! rationale, so the accept/renormalize/reject policy is auditable in one
//! place. All values are `f64`; generic code converts with `Real::of`.

/// Maximum deviation of a coordinate vector's norm from 1 that is accepted
/// silently when constructing a unit point. Machine-precision pipelines stay
/// well below this.
pub const UNIT_NORM: f64 = 1e-9;

/// Deviation band `(UNIT_NORM, UNIT_NORM_RENORMALIZE]` inside which file
/// ingestion renormalizes the row and records a warning instead of failing.
/// Covers data printed with ~7 significant digits.
pub const UNIT_NORM_RENORMALIZE: f64 = 1e-6;

/// Maximum inner product with the base point accepted when constructing a
/// tangent vector from raw components.
pub const TANGENT_ORTHOGONALITY: f64 = 1e-9;

/// Inner products in `[-1 - CLAMP, -1] ∪ [1, 1 + CLAMP]` are clamped to the
/// nearest valid value before `acos`; a larger excursion means the inputs were
/// never unit vectors and is reported as an error.
pub const INNER_PRODUCT_CLAMP: f64 = 1e-9;

/// Inner product threshold below which two points are treated as antipodal
/// (the logarithm is undefined there): `⟨x, y⟩ ≤ -1 + ANTIPODAL`.
pub const ANTIPODAL: f64 = 1e-9;

/// Maximum deviation of a weight sum from 1 for affine weight vectors
/// (configurations, mask sub-rules, coefficient paths). The built-in masks
/// are dyadic rationals, so exact sums are the norm.
pub const WEIGHT_SUM: f64 = 1e-12;

/// Default gradient-norm stopping threshold for the Karcher mean solvers.
pub const GRADIENT: f64 = 1e-12;

/// Default iteration cap for the Karcher mean solvers.
pub const MAX_SOLVER_ITERATIONS: usize = 100;

/// Smallest eigenvalue of the tangent Hessian the Newton solver accepts
/// before declaring the system singular.
pub const HESSIAN_FLOOR: f64 = 1e-10;

/// Conservative lower bound demanded of the denominator `2 - L(t)` at every
/// grid point during certificate evaluation.
pub const DENOMINATOR_GUARD: f64 = 1e-2;

/// Hard error threshold for `|2 - L(t)|`; below this the bound is meaningless
/// regardless of policy.
pub const DEGENERATE_DENOMINATOR: f64 = 1e-9;

/// Default step of the parameter grid on `[0, 1]` used to evaluate `L`,
/// monotonicity, and the speed bound.
pub const PATH_GRID_STEP: f64 = 1e-3;

/// Convergence threshold for the bootstrap fixed-point iteration on the
/// contraction constant.
pub const BOOTSTRAP_FIXED_POINT: f64 = 1e-14;

/// Safety factor applied to the grid supremum of the speed bound when `L`
/// fails the monotonicity probe and the supremum cannot be placed at `t = 1`.
pub const NONMONOTONE_GRID_SLACK: f64 = 1.01;

/// Slack added to certified-ball radii before flagging that a solver iterate
/// escaped, absorbing representation error in the distance itself.
pub const BALL_SLACK: f64 = 1e-12;
