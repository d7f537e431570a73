//! Intrinsic geometry of the unit sphere Σⁿ ⊂ ℝⁿ⁺¹.
//!
//! Points are unit vectors in ambient coordinates, tangent vectors at `x` are
//! ambient vectors orthogonal to `x`, and all derived quantities come from
//! the closed forms
//!
//! * `dist(x, y) = arccos⟨x, y⟩`,
//! * `exp_x(w) = cos‖w‖ · x + (sin‖w‖/‖w‖) · w`,
//! * `log_x(y) = (ρ/sin ρ) · (y − cos ρ · x)` with `ρ = dist(x, y)`,
//! * `grad_x dist²(x, y) = −2 · log_x(y)`,
//! * `Hess_x dist²(x, y) = 2(v vᵀ + ψ(ρ)(I − x xᵀ − v vᵀ))` where `v` is the
//!   unit tangent at `x` toward `y` and `ψ(s) = s/tan s`, `ψ(0) = 1`.
//!
//! The Hessian eigenvalues on the tangent space are therefore `2` (along `v`)
//! and `2ψ(ρ)` (orthogonal to `v`), which stay positive for `ρ < π/2`; that
//! window is where the weighted-mean machinery in [`crate::mean`] operates.

use crate::linalg::{self, SquareMatrix};
use crate::scalar::Real;
use crate::tol;
use thiserror::Error;

/// Errors from constructing or combining geometric primitives.
#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("ambient dimension must be at least 2, got {0}")]
    AmbientTooSmall(usize),
    #[error("coordinate norm deviates from 1 by {deviation:.3e} (tolerance {tolerance:.1e})")]
    NotUnitNorm { deviation: f64, tolerance: f64 },
    #[error("ambient dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("vector is not tangent at the base point: ⟨x, w⟩ = {inner:.3e}")]
    NotTangent { inner: f64 },
    #[error("inner product {value:.17} exceeds [-1, 1] beyond the clamp tolerance")]
    InnerProductOutOfRange { value: f64 },
    #[error("points are antipodal within tolerance; the logarithm is undefined")]
    AntipodalPoints,
    #[error("psi(s) = s/tan(s) evaluated outside [0, π/2): s = {value:.17}")]
    PsiDomain { value: f64 },
    #[error("configuration has no points")]
    EmptyConfiguration,
    #[error("weights must sum to 1: deviation {deviation:.3e}")]
    WeightsNotAffine { deviation: f64 },
    #[error("configuration has {points} points but {weights} weights")]
    WeightCountMismatch { points: usize, weights: usize },
}

/// A point on the unit sphere, stored as ambient coordinates of norm 1.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitPoint<S> {
    coords: Vec<S>,
}

impl<S: Real> UnitPoint<S> {
    /// Accepts coordinates whose norm deviates from 1 by at most
    /// [`tol::UNIT_NORM`].
    pub fn new(coords: Vec<S>) -> Result<Self, GeometryError> {
        if coords.len() < 2 {
            return Err(GeometryError::AmbientTooSmall(coords.len()));
        }
        let deviation = (linalg::norm(&coords) - S::one()).abs().as_f64();
        if deviation > tol::UNIT_NORM {
            return Err(GeometryError::NotUnitNorm {
                deviation,
                tolerance: tol::UNIT_NORM,
            });
        }
        Ok(Self { coords })
    }

    /// The ingestion policy: deviations up to [`tol::UNIT_NORM`] pass through,
    /// deviations up to [`tol::UNIT_NORM_RENORMALIZE`] are projected back to
    /// the sphere (the flag reports that this happened), anything larger is
    /// rejected.
    pub fn new_renormalized(coords: Vec<S>) -> Result<(Self, bool), GeometryError> {
        if coords.len() < 2 {
            return Err(GeometryError::AmbientTooSmall(coords.len()));
        }
        let norm = linalg::norm(&coords);
        let deviation = (norm - S::one()).abs().as_f64();
        if deviation <= tol::UNIT_NORM {
            return Ok((Self { coords }, false));
        }
        if deviation <= tol::UNIT_NORM_RENORMALIZE {
            let mut coords = coords;
            linalg::scale(&mut coords, S::one() / norm);
            return Ok((Self { coords }, true));
        }
        Err(GeometryError::NotUnitNorm {
            deviation,
            tolerance: tol::UNIT_NORM_RENORMALIZE,
        })
    }

    pub(crate) fn from_normalized(mut coords: Vec<S>) -> Self {
        let norm = linalg::norm(&coords);
        linalg::scale(&mut coords, S::one() / norm);
        Self { coords }
    }

    pub fn coords(&self) -> &[S] {
        &self.coords
    }

    /// Ambient dimension `n + 1`.
    pub fn ambient_dim(&self) -> usize {
        self.coords.len()
    }

    /// Intrinsic dimension `n` of the sphere the point lives on.
    pub fn manifold_dim(&self) -> usize {
        self.coords.len() - 1
    }
}

/// A tangent vector, stored as ambient components orthogonal to its base.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector<S> {
    base: UnitPoint<S>,
    components: Vec<S>,
}

impl<S: Real> TangentVector<S> {
    /// Rejects components whose inner product with the base exceeds
    /// [`tol::TANGENT_ORTHOGONALITY`].
    pub fn new(base: UnitPoint<S>, components: Vec<S>) -> Result<Self, GeometryError> {
        if components.len() != base.ambient_dim() {
            return Err(GeometryError::DimensionMismatch {
                expected: base.ambient_dim(),
                found: components.len(),
            });
        }
        let inner = linalg::dot(&components, base.coords()).as_f64();
        if inner.abs() > tol::TANGENT_ORTHOGONALITY {
            return Err(GeometryError::NotTangent { inner });
        }
        Ok(Self { base, components })
    }

    /// Internal constructor that removes whatever normal component numerical
    /// noise left behind.
    pub(crate) fn projected(base: UnitPoint<S>, mut components: Vec<S>) -> Self {
        let inner = linalg::dot(&components, base.coords());
        linalg::axpy(&mut components, -inner, base.coords());
        Self { base, components }
    }

    pub fn zero(base: UnitPoint<S>) -> Self {
        let dim = base.ambient_dim();
        Self {
            base,
            components: vec![S::zero(); dim],
        }
    }

    pub fn base(&self) -> &UnitPoint<S> {
        &self.base
    }

    pub fn components(&self) -> &[S] {
        &self.components
    }

    pub fn norm(&self) -> S {
        linalg::norm(&self.components)
    }

    pub fn scaled(&self, c: S) -> Self {
        let mut components = self.components.clone();
        linalg::scale(&mut components, c);
        Self {
            base: self.base.clone(),
            components,
        }
    }
}

/// Points with affine weights (summing to 1; individual weights may be
/// negative). The input of every weighted-mean computation.
#[derive(Debug, Clone)]
pub struct WeightedConfiguration<S> {
    points: Vec<UnitPoint<S>>,
    weights: Vec<S>,
}

impl<S: Real> WeightedConfiguration<S> {
    pub fn new(points: Vec<UnitPoint<S>>, weights: Vec<S>) -> Result<Self, GeometryError> {
        if points.is_empty() {
            return Err(GeometryError::EmptyConfiguration);
        }
        if points.len() != weights.len() {
            return Err(GeometryError::WeightCountMismatch {
                points: points.len(),
                weights: weights.len(),
            });
        }
        let dim = points[0].ambient_dim();
        for p in &points[1..] {
            if p.ambient_dim() != dim {
                return Err(GeometryError::DimensionMismatch {
                    expected: dim,
                    found: p.ambient_dim(),
                });
            }
        }
        let sum = weights.iter().fold(S::zero(), |acc, &w| acc + w);
        let deviation = (sum - S::one()).abs().as_f64();
        if deviation > tol::WEIGHT_SUM {
            return Err(GeometryError::WeightsNotAffine { deviation });
        }
        Ok(Self { points, weights })
    }

    pub fn points(&self) -> &[UnitPoint<S>] {
        &self.points
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn ambient_dim(&self) -> usize {
        self.points[0].ambient_dim()
    }

    /// Total negative weight mass `α₋ = Σ_j max(0, −α_j)`.
    pub fn negative_part(&self) -> S {
        self.weights.iter().fold(S::zero(), |acc, &w| {
            if w < S::zero() {
                acc - w
            } else {
                acc
            }
        })
    }

    /// Largest geodesic distance from `center` to a configuration point.
    pub fn max_distance_from(&self, center: &UnitPoint<S>) -> Result<S, GeometryError> {
        let mut max = S::zero();
        for p in &self.points {
            let d = geodesic_distance(center, p)?;
            if d > max {
                max = d;
            }
        }
        Ok(max)
    }
}

/// Geodesic distance `arccos⟨x, y⟩`, clamping inner products that exceed
/// `[-1, 1]` by at most [`tol::INNER_PRODUCT_CLAMP`].
///
/// Identical coordinate lists short-circuit to exactly zero: `⟨x, x⟩` can
/// round to just below one, and the arccos would report a spurious `1e-8`
/// separation for a point compared with its own copy.
pub fn geodesic_distance<S: Real>(
    x: &UnitPoint<S>,
    y: &UnitPoint<S>,
) -> Result<S, GeometryError> {
    if x.coords() == y.coords() {
        return Ok(S::zero());
    }
    Ok(clamped_acos(inner(x, y)?))
}

fn inner<S: Real>(x: &UnitPoint<S>, y: &UnitPoint<S>) -> Result<S, GeometryError> {
    if x.ambient_dim() != y.ambient_dim() {
        return Err(GeometryError::DimensionMismatch {
            expected: x.ambient_dim(),
            found: y.ambient_dim(),
        });
    }
    let c = linalg::dot(x.coords(), y.coords());
    if c.abs() > S::one() + S::of(tol::INNER_PRODUCT_CLAMP) {
        return Err(GeometryError::InnerProductOutOfRange { value: c.as_f64() });
    }
    Ok(c)
}

fn clamped_acos<S: Real>(c: S) -> S {
    if c >= S::one() {
        S::zero()
    } else if c <= -S::one() {
        S::PI()
    } else {
        c.acos()
    }
}

/// Exponential map. Injective for `‖w‖ < π`; callers wanting inverses should
/// stay inside that ball, but the formula itself is evaluated for any length.
pub fn exp_map<S: Real>(w: &TangentVector<S>) -> UnitPoint<S> {
    let theta = w.norm();
    let x = w.base().coords();
    let mut out = x.to_vec();
    if theta.as_f64() < 1e-9 {
        linalg::axpy(&mut out, S::one(), w.components());
    } else {
        linalg::scale(&mut out, theta.cos());
        linalg::axpy(&mut out, theta.sin() / theta, w.components());
    }
    UnitPoint::from_normalized(out)
}

/// Inverse of the exponential map at `x`. Errors when `y` is antipodal to `x`
/// within [`tol::ANTIPODAL`].
pub fn log_map<S: Real>(
    x: &UnitPoint<S>,
    y: &UnitPoint<S>,
) -> Result<TangentVector<S>, GeometryError> {
    let c = inner(x, y)?;
    if c <= -S::one() + S::of(tol::ANTIPODAL) {
        return Err(GeometryError::AntipodalPoints);
    }
    let rho = clamped_acos(c);
    if rho.as_f64() < 1e-9 {
        let mut comp = y.coords().to_vec();
        linalg::axpy(&mut comp, -S::one(), x.coords());
        return Ok(TangentVector::projected(x.clone(), comp));
    }
    let factor = rho / rho.sin();
    let mut comp = y.coords().to_vec();
    linalg::axpy(&mut comp, -c, x.coords());
    linalg::scale(&mut comp, factor);
    Ok(TangentVector::projected(x.clone(), comp))
}

/// `ψ(s) = s / tan(s)` on `[0, π/2)`, extended continuously by `ψ(0) = 1`.
pub fn psi<S: Real>(s: S) -> Result<S, GeometryError> {
    if s < S::zero() || s >= S::FRAC_PI_2() {
        return Err(GeometryError::PsiDomain { value: s.as_f64() });
    }
    if s.as_f64() < 1e-8 {
        return Ok(S::one() - s * s / S::of(3.0));
    }
    Ok(s / s.tan())
}

/// Gradient of `x ↦ dist²(x, y)`, namely `−2 log_x(y)`.
pub fn squared_distance_gradient<S: Real>(
    x: &UnitPoint<S>,
    y: &UnitPoint<S>,
) -> Result<TangentVector<S>, GeometryError> {
    Ok(log_map(x, y)?.scaled(S::of(-2.0)))
}

/// Ambient-coordinate Hessian of `x ↦ dist²(x, y)` restricted to the tangent
/// space at `x` (the normal direction is in its kernel). Requires
/// `dist(x, y) < π/2` so that `ψ` is defined.
pub fn squared_distance_hessian<S: Real>(
    x: &UnitPoint<S>,
    y: &UnitPoint<S>,
) -> Result<SquareMatrix<S>, GeometryError> {
    let w = log_map(x, y)?;
    let rho = w.norm();
    let d = x.ambient_dim();
    let two = S::of(2.0);
    let psi_rho = psi(rho)?;
    let mut h = SquareMatrix::identity(d);
    h.add_outer(-S::one(), x.coords());
    if rho.as_f64() < 1e-9 {
        let mut out = SquareMatrix::zeros(d);
        out.add_assign_scaled(two, &h);
        return Ok(out);
    }
    let v: Vec<S> = w.components().iter().map(|&c| c / rho).collect();
    h.add_outer(-S::one(), &v);
    let mut out = SquareMatrix::zeros(d);
    out.add_assign_scaled(two * psi_rho, &h);
    out.add_outer(two, &v);
    Ok(out)
}

/// Weighted objective `f(x) = Σ_j α_j dist²(x, x_j)`.
pub fn objective_value<S: Real>(
    config: &WeightedConfiguration<S>,
    x: &UnitPoint<S>,
) -> Result<S, GeometryError> {
    let mut acc = S::zero();
    for (p, &w) in config.points().iter().zip(config.weights()) {
        let d = geodesic_distance(x, p)?;
        acc = acc + w * d * d;
    }
    Ok(acc)
}

/// Gradient of the weighted objective, `−2 Σ_j α_j log_x(x_j)`.
pub fn objective_gradient<S: Real>(
    config: &WeightedConfiguration<S>,
    x: &UnitPoint<S>,
) -> Result<TangentVector<S>, GeometryError> {
    let dim = x.ambient_dim();
    let mut comp = vec![S::zero(); dim];
    for (p, &w) in config.points().iter().zip(config.weights()) {
        let l = log_map(x, p)?;
        linalg::axpy(&mut comp, S::of(-2.0) * w, l.components());
    }
    Ok(TangentVector::projected(x.clone(), comp))
}

/// Ambient-coordinate Hessian of the weighted objective at `x`.
pub fn objective_hessian_ambient<S: Real>(
    config: &WeightedConfiguration<S>,
    x: &UnitPoint<S>,
) -> Result<SquareMatrix<S>, GeometryError> {
    let dim = x.ambient_dim();
    let mut h = SquareMatrix::zeros(dim);
    for (p, &w) in config.points().iter().zip(config.weights()) {
        let hp = squared_distance_hessian(x, p)?;
        h.add_assign_scaled(w, &hp);
    }
    Ok(h)
}

/// The objective Hessian expressed in an orthonormal tangent basis at `x`
/// (the basis obtained by rotating `x` onto the last coordinate axis).
/// Returns the `n × n` block together with the basis vectors that define it.
pub fn objective_hessian_tangent<S: Real>(
    config: &WeightedConfiguration<S>,
    x: &UnitPoint<S>,
) -> Result<(SquareMatrix<S>, Vec<Vec<S>>), GeometryError> {
    let ambient = objective_hessian_ambient(config, x)?;
    let basis = linalg::tangent_basis(x.coords());
    let n = basis.len();
    let mut block = SquareMatrix::zeros(n);
    for (k, bk) in basis.iter().enumerate() {
        let hbk = ambient.matvec(bk);
        for (l, bl) in basis.iter().enumerate() {
            block.set(k, l, linalg::dot(&hbk, bl));
        }
    }
    Ok((block, basis))
}
