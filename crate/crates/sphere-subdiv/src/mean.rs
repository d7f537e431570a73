//! Weighted Karcher means on the sphere and the conditions that make them
//! well defined.
//!
//! For points inside a geodesic ball `B_r(c)` and affine weights with
//! negative part `α₋`, the weighted mean (the minimizer of
//! `Σ_j α_j dist²(·, x_j)`) exists, is unique, and depends smoothly on the
//! data whenever there is a radius `r*` with
//!
//! ```text
//! (1 + 2α₋) · r  <  r*  ≤  Q(α₋) := (π/4) / (1 + (1 + π/2) α₋),
//! ```
//!
//! in which case the mean lies in `B_{r*}(c)` and is the unique stationary
//! point there. For `α₋ = 0` the condition reduces to `r < π/4`. This module
//! checks that feasibility, reports the radius budget it leaves, and solves
//! for the mean by Newton iteration on the tangent space or by fixed-point
//! iteration on the exponential map.

use crate::geometry::{
    exp_map, geodesic_distance, log_map, objective_gradient, objective_hessian_tangent,
    GeometryError, TangentVector, UnitPoint, WeightedConfiguration,
};
use crate::linalg;
use crate::scalar::Real;
use crate::tol;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeanError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("point {index} lies at distance {distance:.6} from the ball center, radius is {radius:.6}")]
    PointOutsideBall {
        index: usize,
        distance: f64,
        radius: f64,
    },
    #[error("tangent Hessian is not safely positive definite: λ_min = {lambda_min:.3e}")]
    SingularHessian { lambda_min: f64 },
    #[error("iterate left the certified ball: distance {distance:.6} exceeds radius {radius:.6}")]
    LeftCertifiedBall { distance: f64, radius: f64 },
    #[error("solver did not reach gradient tolerance within {iterations} iterations (‖grad‖ = {gradient_norm:.3e})")]
    DidNotConverge {
        iterations: usize,
        gradient_norm: f64,
    },
    #[error("span factor must be positive, got {0}")]
    NonPositiveSpan(f64),
}

/// Outcome of the feasibility check for a weighted mean over a ball.
#[derive(Debug, Clone)]
pub struct WellDefinednessReport<S> {
    /// Negative weight mass of the configuration.
    pub alpha_minus: S,
    /// Radius of the ball that was checked.
    pub radius: S,
    /// Lower end of the feasible uniqueness-radius interval, `(1 + 2α₋) r`.
    pub lower: S,
    /// Upper end `Q(α₋)`; equals `π/4` when `α₋ = 0`.
    pub upper: S,
    /// Whether the feasible interval is nonempty.
    pub well_defined: bool,
    /// Midpoint of the feasible interval when it is nonempty: a radius at
    /// which the mean is the unique stationary point.
    pub uniqueness_radius: Option<S>,
}

/// Upper bound `Q(α₋)` of the uniqueness-radius interval.
pub fn radius_budget<S: Real>(alpha_minus: S) -> S {
    S::FRAC_PI_4() / (S::one() + (S::one() + S::FRAC_PI_2()) * alpha_minus)
}

/// Checks that every configuration point lies in `B_r(center)` and that the
/// weighted mean over that ball is well defined and unique.
pub fn check_well_defined<S: Real>(
    config: &WeightedConfiguration<S>,
    center: &UnitPoint<S>,
    radius: S,
) -> Result<WellDefinednessReport<S>, MeanError> {
    for (index, p) in config.points().iter().enumerate() {
        let d = geodesic_distance(center, p)?;
        if d > radius + S::of(tol::BALL_SLACK) {
            return Err(MeanError::PointOutsideBall {
                index,
                distance: d.as_f64(),
                radius: radius.as_f64(),
            });
        }
    }
    let alpha_minus = config.negative_part();
    let lower = (S::one() + S::of(2.0) * alpha_minus) * radius;
    let upper = radius_budget(alpha_minus);
    let well_defined = lower < upper;
    let uniqueness_radius = well_defined.then(|| (lower + upper) / S::of(2.0));
    Ok(WellDefinednessReport {
        alpha_minus,
        radius,
        lower,
        upper,
        well_defined,
        uniqueness_radius,
    })
}

/// Largest input radius `r0` such that a configuration spread over
/// `B_{span_factor · r0}` with negative part `alpha_minus` passes
/// [`check_well_defined`]: the solution of `(1 + 2α₋) · span · r0 = Q(α₋)`.
/// For `alpha_minus = 0` this is `(π/4) / span_factor`.
pub fn max_input_radius<S: Real>(alpha_minus: S, span_factor: S) -> Result<S, MeanError> {
    if span_factor <= S::zero() {
        return Err(MeanError::NonPositiveSpan(span_factor.as_f64()));
    }
    Ok(radius_budget(alpha_minus) / ((S::one() + S::of(2.0) * alpha_minus) * span_factor))
}

/// Root-finding strategy for the stationarity equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverMethod {
    /// Newton's method on the tangent block of the objective Hessian.
    NewtonTangent,
    /// The classical fixed-point iteration `x ← exp_x(Σ_j α_j log_x(x_j))`.
    FixedPointGradient,
}

/// Ball the iterates are required to stay inside while solving.
#[derive(Debug, Clone)]
pub struct CertifiedBall<S> {
    pub center: UnitPoint<S>,
    pub radius: S,
}

#[derive(Debug, Clone)]
pub struct SolverSettings<S> {
    pub gradient_tolerance: S,
    pub max_iterations: usize,
    pub method: SolverMethod,
    /// When set, an iterate leaving the ball aborts with
    /// [`MeanError::LeftCertifiedBall`] instead of silently wandering off.
    pub certified_ball: Option<CertifiedBall<S>>,
}

impl<S: Real> Default for SolverSettings<S> {
    fn default() -> Self {
        Self {
            gradient_tolerance: S::of(tol::GRADIENT),
            max_iterations: tol::MAX_SOLVER_ITERATIONS,
            method: SolverMethod::NewtonTangent,
            certified_ball: None,
        }
    }
}

/// Default starting iterate: the normalized ambient average when its norm is
/// at least 1/2, otherwise the first configuration point.
pub fn default_initial<S: Real>(config: &WeightedConfiguration<S>) -> UnitPoint<S> {
    let dim = config.ambient_dim();
    let mut avg = vec![S::zero(); dim];
    for (p, &w) in config.points().iter().zip(config.weights()) {
        linalg::axpy(&mut avg, w, p.coords());
    }
    if linalg::norm(&avg) >= S::of(0.5) {
        UnitPoint::from_normalized(avg)
    } else {
        config.points()[0].clone()
    }
}

/// Minimizes `Σ_j α_j dist²(·, x_j)` to the requested gradient tolerance.
///
/// The caller is responsible for having verified well-definedness (for
/// example through [`check_well_defined`]); passing a certified ball in the
/// settings turns that promise into a runtime guard.
pub fn karcher_mean<S: Real>(
    config: &WeightedConfiguration<S>,
    settings: &SolverSettings<S>,
    initial: Option<&UnitPoint<S>>,
) -> Result<UnitPoint<S>, MeanError> {
    let mut x = match initial {
        Some(p) => p.clone(),
        None => default_initial(config),
    };
    let mut gradient_norm = S::nan();
    for _ in 0..settings.max_iterations {
        let grad = objective_gradient(config, &x)?;
        gradient_norm = grad.norm();
        if gradient_norm <= settings.gradient_tolerance {
            return Ok(x);
        }
        let step = match settings.method {
            SolverMethod::FixedPointGradient => grad.scaled(S::of(-0.5)),
            SolverMethod::NewtonTangent => newton_step(config, &x, &grad)?,
        };
        x = exp_map(&step);
        if let Some(ball) = &settings.certified_ball {
            let d = geodesic_distance(&x, &ball.center)?;
            if d > ball.radius + S::of(tol::BALL_SLACK) {
                return Err(MeanError::LeftCertifiedBall {
                    distance: d.as_f64(),
                    radius: ball.radius.as_f64(),
                });
            }
        }
    }
    Err(MeanError::DidNotConverge {
        iterations: settings.max_iterations,
        gradient_norm: gradient_norm.as_f64(),
    })
}

fn newton_step<S: Real>(
    config: &WeightedConfiguration<S>,
    x: &UnitPoint<S>,
    grad: &TangentVector<S>,
) -> Result<TangentVector<S>, MeanError> {
    let (block, basis) = objective_hessian_tangent(config, x)?;
    let lambda_min = block.symmetric_eigenvalues()[0];
    if lambda_min < S::of(tol::HESSIAN_FLOOR) {
        return Err(MeanError::SingularHessian {
            lambda_min: lambda_min.as_f64(),
        });
    }
    let rhs: Vec<S> = basis
        .iter()
        .map(|b| -linalg::dot(grad.components(), b))
        .collect();
    let sol = block.solve(&rhs).ok_or(MeanError::SingularHessian {
        lambda_min: lambda_min.as_f64(),
    })?;
    let mut comp = vec![S::zero(); x.ambient_dim()];
    for (c, b) in sol.iter().zip(basis.iter()) {
        linalg::axpy(&mut comp, *c, b);
    }
    Ok(TangentVector::projected(x.clone(), comp))
}

/// Point at parameter `beta` along the geodesic from `x` to `y`
/// (`beta = 0 ↦ x`, `beta = 1 ↦ y`). This is also the weighted mean of the
/// two points with weights `(1 - beta, beta)`.
pub fn geodesic_average<S: Real>(
    x: &UnitPoint<S>,
    y: &UnitPoint<S>,
    beta: S,
) -> Result<UnitPoint<S>, MeanError> {
    let l = log_map(x, y)?;
    Ok(exp_map(&l.scaled(beta)))
}
