//! Mechanically checked contraction certificates for geodesic subdivision.
//!
//! The certificate machinery bounds how far a weighted Karcher mean can move
//! when its weights move. Each parity rule of a mask gets a coefficient path
//! `α(t) = base + t · slope` on `[0, 1]` from a degenerate rule concentrated
//! at a reference point `x̄` of the stencil (`t = 0`) to the actual sub-rule
//! (`t = 1`). The curve of means `γ(t)` solves
//! `grad f_{α(t)}(γ(t)) = 0`, and differentiating that identity gives
//!
//! ```text
//! ‖γ̇(t)‖ ≤ ‖H⁻¹‖ · ‖∂_t grad f_{α(t)}‖ ≤ 2 Σ_j |α̇_j| (C r t + ℓ_j r) / (2 − L(t)),
//! L(t) = Σ_j |α_j(t)| · (2 − 2ψ(C r t + ℓ_j r)),
//! ```
//!
//! valid as long as the stencil points stay within `ℓ_j r` of `x̄`, the mesh
//! size is at most `r`, and `γ` is assumed to stay within `C r t` of `x̄`.
//! If the supremum of the speed bound divided by `r` stays below `C`, the
//! assumption closes on itself and the rule is certified with the improved
//! constant; re-running the bound at each improved constant drives it to a
//! fixed point (the map is increasing in `C`, so the iterates decrease
//! monotonically once they decrease at all). Integrating the speed bound in
//! `t` yields the distance coefficient `d` with
//! `dist(mean, x̄) ≤ d · r`.
//!
//! Scheme level: with anchor positions `θ_e`, `θ_o` of the two reference
//! points on the parameter line, consecutive refined points are separated by
//! at most `μ · δ(x)` where
//! `μ = d_e + d_o + max(|θ_o − θ_e|, 1 − θ_o + θ_e)`, and refined points stay
//! within `(d_e + |θ_e|) · δ(x)` of their coarse parents. A scheme whose μ is
//! below 1 contracts the mesh size geometrically, which together with the
//! displacement bound makes the refinements a Cauchy sequence of polygons:
//! convergence follows without any further smoothness input.

use crate::geometry::{
    geodesic_distance, log_map, objective_hessian_tangent, psi, GeometryError, UnitPoint,
    WeightedConfiguration,
};
use crate::linalg;
use crate::mean::{karcher_mean, radius_budget, SolverMethod, SolverSettings};
use crate::schemes::{builtin_mask, Mask, SchemeError, SubRule};
use crate::tol;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CertifyError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error("coefficient path is malformed: {0}")]
    BadPath(String),
    #[error("denominator 2 - L(t) = {value:.3e} at t = {t} is below the degeneracy threshold")]
    DegenerateDenominator { t: f64, value: f64 },
    #[error("{assumption} violated: {lhs:.9} must stay below {rhs:.9}{context}")]
    AssumptionViolated {
        assumption: &'static str,
        lhs: f64,
        rhs: f64,
        context: String,
    },
    #[error("certificate parameters invalid: {0}")]
    BadParameters(String),
    #[error("no built-in certificate for scheme '{0}'")]
    NoBuiltinCertificate(String),
    #[error("solver failed while tracing the mean curve: {0}")]
    Trace(String),
}

/// Where the reference point `x̄` of a coefficient path sits in the stencil.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReferenceRule {
    /// The stencil point with this position (index into the stencil list).
    InputPoint(usize),
    /// Geodesic midpoint of two stencil points.
    GeodesicMidpoint(usize, usize),
    /// Point at parameter `beta` along the geodesic from the first to the
    /// second stencil point.
    WeightedAverage(usize, usize, f64),
}

/// Affine homotopy of stencil weights from a reference configuration to the
/// actual sub-rule, together with the geometry needed to bound the mean's
/// motion: offsets `ℓ_j` (distance of stencil point `j` from the reference in
/// mesh-size units), the stencil's span factor, and the reference's anchor
/// position on the parameter line.
#[derive(Debug, Clone)]
pub struct CoefficientPath {
    base: Vec<f64>,
    slope: Vec<f64>,
    offsets: Vec<f64>,
    reference: ReferenceRule,
    span_factor: f64,
    anchor_position: f64,
}

impl CoefficientPath {
    pub fn new(
        base: Vec<f64>,
        slope: Vec<f64>,
        offsets: Vec<f64>,
        reference: ReferenceRule,
        span_factor: f64,
        anchor_position: f64,
    ) -> Result<Self, CertifyError> {
        let n = base.len();
        if n == 0 {
            return Err(CertifyError::BadPath("empty coefficient path".into()));
        }
        if slope.len() != n || offsets.len() != n {
            return Err(CertifyError::BadPath(format!(
                "base/slope/offsets lengths differ: {}/{}/{}",
                n,
                slope.len(),
                offsets.len()
            )));
        }
        let base_sum: f64 = base.iter().sum();
        if (base_sum - 1.0).abs() > tol::WEIGHT_SUM {
            return Err(CertifyError::BadPath(format!(
                "base weights sum to {base_sum}, expected 1"
            )));
        }
        let slope_sum: f64 = slope.iter().sum();
        if slope_sum.abs() > tol::WEIGHT_SUM {
            return Err(CertifyError::BadPath(format!(
                "slope weights sum to {slope_sum}, expected 0"
            )));
        }
        if offsets.iter().any(|&l| l.is_nan() || l < 0.0) {
            return Err(CertifyError::BadPath("offsets must be nonnegative".into()));
        }
        if span_factor < 0.0 {
            return Err(CertifyError::BadPath("span factor must be nonnegative".into()));
        }
        let check_idx = |i: usize| -> Result<(), CertifyError> {
            if i >= n {
                Err(CertifyError::BadPath(format!(
                    "reference index {i} out of range for {n} stencil points"
                )))
            } else {
                Ok(())
            }
        };
        match reference {
            ReferenceRule::InputPoint(i) => check_idx(i)?,
            ReferenceRule::GeodesicMidpoint(i, j) => {
                check_idx(i)?;
                check_idx(j)?;
            }
            ReferenceRule::WeightedAverage(i, j, beta) => {
                check_idx(i)?;
                check_idx(j)?;
                if !(0.0..=1.0).contains(&beta) {
                    return Err(CertifyError::BadPath(format!(
                        "weighted-average parameter {beta} outside [0, 1]"
                    )));
                }
            }
        }
        Ok(Self {
            base,
            slope,
            offsets,
            reference,
            span_factor,
            anchor_position,
        })
    }

    /// Builds the path for a concrete sub-rule: the end weights are the
    /// rule's, offsets are the distances from the reference's position in
    /// the stencil, and span/anchor come from the stencil geometry.
    pub fn for_rule(
        rule: &SubRule<f64>,
        base: Vec<f64>,
        reference: ReferenceRule,
    ) -> Result<Self, CertifyError> {
        let n = rule.weights.len();
        if base.len() != n {
            return Err(CertifyError::BadPath(format!(
                "base has {} weights but the stencil has {}",
                base.len(),
                n
            )));
        }
        let position = |i: usize| rule.offsets[i] as f64;
        let anchor = match reference {
            ReferenceRule::InputPoint(i) => position(i),
            ReferenceRule::GeodesicMidpoint(i, j) => (position(i) + position(j)) / 2.0,
            ReferenceRule::WeightedAverage(i, j, beta) => {
                position(i) + beta * (position(j) - position(i))
            }
        };
        let offsets = (0..n).map(|j| (position(j) - anchor).abs()).collect();
        let slope = rule
            .weights
            .iter()
            .zip(&base)
            .map(|(&end, &b)| end - b)
            .collect();
        Self::new(base, slope, offsets, reference, rule.span_factor(), anchor)
    }

    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn slope(&self) -> &[f64] {
        &self.slope
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn reference(&self) -> ReferenceRule {
        self.reference
    }

    pub fn span_factor(&self) -> f64 {
        self.span_factor
    }

    pub fn anchor_position(&self) -> f64 {
        self.anchor_position
    }

    pub fn weights_at(&self, t: f64) -> Vec<f64> {
        self.base
            .iter()
            .zip(&self.slope)
            .map(|(&b, &s)| b + t * s)
            .collect()
    }

    pub fn alpha_minus_at(&self, t: f64) -> f64 {
        self.weights_at(t)
            .iter()
            .map(|&w| if w < 0.0 { -w } else { 0.0 })
            .sum()
    }

    /// `A = Σ_j |α̇_j|`.
    pub fn slope_mass(&self) -> f64 {
        self.slope.iter().map(|s| s.abs()).sum()
    }

    /// `B = Σ_j |α̇_j| ℓ_j`.
    pub fn slope_offset_mass(&self) -> f64 {
        self.slope
            .iter()
            .zip(&self.offsets)
            .map(|(s, l)| s.abs() * l)
            .sum()
    }

    /// A path with zero slope describes a mean that never moves.
    pub fn is_constant(&self) -> bool {
        self.slope_mass() == 0.0
    }
}

/// `L(t) = Σ_j |α_j(t)| (2 − 2ψ(c r t + ℓ_j r))`: the Hessian defect that
/// shrinks the invertibility margin `2 − L(t)`.
pub fn l_bound(path: &CoefficientPath, r: f64, c: f64, t: f64) -> Result<f64, CertifyError> {
    let weights = path.weights_at(t);
    let mut total = 0.0;
    for (w, &l) in weights.iter().zip(path.offsets()) {
        let arg = c * r * t + l * r;
        total += w.abs() * (2.0 - 2.0 * psi(arg)?);
    }
    Ok(total)
}

/// `2 Σ_j |α̇_j| (c r t + ℓ_j r)`: bound on `‖∂_t grad f_{α(t)}(γ(t))‖`.
pub fn gradient_derivative_bound(path: &CoefficientPath, r: f64, c: f64, t: f64) -> f64 {
    2.0 * r * (path.slope_mass() * c * t + path.slope_offset_mass())
}

/// The speed bound `‖γ̇(t)‖ ≤ gradient_derivative_bound / (2 − L(t))`.
pub fn speed_bound(path: &CoefficientPath, r: f64, c: f64, t: f64) -> Result<f64, CertifyError> {
    let denom = 2.0 - l_bound(path, r, c, t)?;
    if denom < tol::DEGENERATE_DENOMINATOR {
        return Err(CertifyError::DegenerateDenominator { t, value: denom });
    }
    Ok(gradient_derivative_bound(path, r, c, t) / denom)
}

/// `‖γ̇(0)‖ / r ≤ 2 B / (2 − L(0))`, independent of the contraction constant
/// because the curve starts at the reference point.
pub fn initial_speed_bound(path: &CoefficientPath, r: f64) -> Result<f64, CertifyError> {
    let denom = 2.0 - l_bound(path, r, 0.0, 0.0)?;
    if denom < tol::DEGENERATE_DENOMINATOR {
        return Err(CertifyError::DegenerateDenominator { t: 0.0, value: denom });
    }
    Ok(2.0 * path.slope_offset_mass() / denom)
}

/// One recorded inequality of a certificate run.
#[derive(Debug, Clone)]
pub struct AuditEntry {
    pub label: String,
    pub lhs: f64,
    pub relation: &'static str,
    pub rhs: f64,
    pub holds: bool,
}

impl AuditEntry {
    fn strict(label: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self {
            label: label.into(),
            lhs,
            relation: "<",
            rhs,
            holds: lhs < rhs,
        }
    }
}

/// Certified constants for one parity rule.
#[derive(Debug, Clone)]
pub struct RuleCertificate {
    /// The assumed contraction constant the run started from.
    pub c0: f64,
    /// The certified constant after driving the bound to its fixed point.
    pub c1: f64,
    /// The constant after a single re-evaluation at `c0`.
    pub c1_one_pass: f64,
    /// `‖γ̇(0)‖ / r` bound.
    pub initial_speed_coeff: f64,
    /// `dist(mean, x̄) ≤ distance_coeff · r`, the integral of the speed bound.
    pub distance_coeff: f64,
    pub l_at_zero: f64,
    pub l_at_one: f64,
    /// Whether `L` was nondecreasing on the evaluation grid (placing the
    /// supremum of the speed bound at `t = 1`).
    pub l_monotone: bool,
    pub fixed_point_iterations: usize,
    pub audit: Vec<AuditEntry>,
}

struct GridEval {
    sup_coeff: f64,
    l_monotone: bool,
    l_at_one: f64,
}

fn grid(step: f64) -> Vec<f64> {
    let k = (1.0 / step).ceil().max(1.0) as usize;
    let mut ts: Vec<f64> = (0..=k).map(|i| (i as f64 / k as f64).min(1.0)).collect();
    *ts.last_mut().expect("nonempty grid") = 1.0;
    ts
}

fn evaluate_grid(
    path: &CoefficientPath,
    r: f64,
    c: f64,
    ts: &[f64],
) -> Result<GridEval, CertifyError> {
    let mut l_prev = f64::NEG_INFINITY;
    let mut l_monotone = true;
    let mut sup = 0.0f64;
    let mut l_at_one = 0.0;
    for &t in ts {
        let l = l_bound(path, r, c, t)?;
        let denom = 2.0 - l;
        if denom < tol::DEGENERATE_DENOMINATOR {
            return Err(CertifyError::DegenerateDenominator { t, value: denom });
        }
        if denom < tol::DENOMINATOR_GUARD {
            return Err(CertifyError::AssumptionViolated {
                assumption: "denominator guard (Hessian invertibility margin)",
                lhs: tol::DENOMINATOR_GUARD,
                rhs: denom,
                context: format!(" (2 - L({t}) too small)"),
            });
        }
        if l < l_prev - 1e-12 {
            l_monotone = false;
        }
        l_prev = l;
        l_at_one = l;
        let coeff = gradient_derivative_bound(path, r, c, t) / denom / r;
        if coeff > sup {
            sup = coeff;
        }
    }
    let sup_coeff = if l_monotone {
        // L nondecreasing makes the bound's numerator and 1/(2-L) both
        // nondecreasing, so the supremum sits at t = 1.
        gradient_derivative_bound(path, r, c, 1.0) / (2.0 - l_at_one) / r
    } else {
        sup * tol::NONMONOTONE_GRID_SLACK
    };
    Ok(GridEval {
        sup_coeff,
        l_monotone,
        l_at_one,
    })
}

/// Integral over `t ∈ [0, 1]` of the speed bound divided by `r`: the distance
/// coefficient. With monotone `L` the integrand `2(A c t + B)/(2 − L(t))` is
/// bounded by replacing `L(t)` with `L(1)`, making the closed form
/// `2 (A c / 2 + B) / (2 − L(1))` an upper bound; otherwise an upper Riemann
/// sum over the grid is used.
fn distance_coefficient(
    path: &CoefficientPath,
    r: f64,
    c: f64,
    ts: &[f64],
    l_monotone: bool,
    l_at_one: f64,
) -> Result<f64, CertifyError> {
    if l_monotone {
        let a = path.slope_mass();
        let b = path.slope_offset_mass();
        return Ok(2.0 * (a * c / 2.0 + b) / (2.0 - l_at_one));
    }
    let mut total = 0.0;
    for pair in ts.windows(2) {
        let (t0, t1) = (pair[0], pair[1]);
        let f0 = speed_bound(path, r, c, t0)? / r;
        let f1 = speed_bound(path, r, c, t1)? / r;
        total += f0.max(f1) * (t1 - t0);
    }
    Ok(total * tol::NONMONOTONE_GRID_SLACK)
}

/// Runs the full certificate for one parity rule: well-definedness along the
/// path, the initial-speed gate, the fixed-point gate at `c0`, and the
/// bootstrap down to the fixed point. `r0` is the certified mesh size.
pub fn bootstrap(
    path: &CoefficientPath,
    r0: f64,
    c0: f64,
    grid_step: f64,
) -> Result<RuleCertificate, CertifyError> {
    if r0.is_nan() || r0 <= 0.0 {
        return Err(CertifyError::BadParameters(format!(
            "certified radius must be positive, got {r0}"
        )));
    }
    if c0 < 0.0 {
        return Err(CertifyError::BadParameters(format!(
            "contraction constant must be nonnegative, got {c0}"
        )));
    }
    if !(grid_step > 0.0 && grid_step <= 0.5) {
        return Err(CertifyError::BadParameters(format!(
            "grid step must lie in (0, 0.5], got {grid_step}"
        )));
    }
    let ts = grid(grid_step);
    let mut audit = Vec::new();

    // The weighted mean must stay well defined along the whole path when
    // the stencil sits in a ball of radius span_factor · r0.
    let ball = path.span_factor() * r0;
    let mut worst_margin = f64::INFINITY;
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    for &t in &ts {
        let am = path.alpha_minus_at(t);
        let lower = (1.0 + 2.0 * am) * ball;
        let upper = radius_budget(am);
        if upper - lower < worst_margin {
            worst_margin = upper - lower;
            worst = (t, lower, upper);
        }
    }
    audit.push(AuditEntry::strict(
        format!(
            "well-definedness along the path (worst at t = {:.3}): (1+2α₋)·span·r0 < Q(α₋)",
            worst.0
        ),
        worst.1,
        worst.2,
    ));
    if worst_margin <= 0.0 {
        return Err(CertifyError::AssumptionViolated {
            assumption: "well-definedness along the path",
            lhs: worst.1,
            rhs: worst.2,
            context: format!(" at t = {:.6}", worst.0),
        });
    }

    let l_at_zero = l_bound(path, r0, c0, 0.0)?;

    if path.is_constant() {
        // Degenerate homotopy: the mean sits at the reference point for all t.
        audit.push(AuditEntry {
            label: "constant path: speed vanishes identically".into(),
            lhs: 0.0,
            relation: "<=",
            rhs: 0.0,
            holds: true,
        });
        return Ok(RuleCertificate {
            c0,
            c1: 0.0,
            c1_one_pass: 0.0,
            initial_speed_coeff: 0.0,
            distance_coeff: 0.0,
            l_at_zero,
            l_at_one: l_bound(path, r0, c0, 1.0)?,
            l_monotone: true,
            fixed_point_iterations: 0,
            audit,
        });
    }

    // The curve must launch slower than the assumed contraction constant.
    let initial_speed_coeff = initial_speed_bound(path, r0)?;
    audit.push(AuditEntry::strict(
        "initial speed: 2B/(2−L(0)) < C0",
        initial_speed_coeff,
        c0,
    ));
    if initial_speed_coeff >= c0 {
        return Err(CertifyError::AssumptionViolated {
            assumption: "initial speed gate",
            lhs: initial_speed_coeff,
            rhs: c0,
            context: String::new(),
        });
    }

    // Plugging speed ≤ C0 · r into the bound must reproduce a value
    // below C0, otherwise the bootstrap has no room to contract.
    let first = evaluate_grid(path, r0, c0, &ts)?;
    let c1_one_pass = first.sup_coeff;
    audit.push(AuditEntry::strict(
        "fixed point: sup_t speed/r at C0 < C0",
        c1_one_pass,
        c0,
    ));
    if c1_one_pass >= c0 {
        return Err(CertifyError::AssumptionViolated {
            assumption: "contraction fixed-point gate",
            lhs: c1_one_pass,
            rhs: c0,
            context: String::new(),
        });
    }

    // Bootstrap: each certified constant re-enters the bound; the map is
    // increasing in C, so from c1 < c0 the iterates decrease toward the
    // fixed point.
    let mut c = c1_one_pass;
    let mut eval = first;
    let mut iterations = 0usize;
    for _ in 0..200 {
        let next = evaluate_grid(path, r0, c, &ts)?;
        iterations += 1;
        let improved = next.sup_coeff;
        eval = next;
        if improved >= c {
            break;
        }
        let gain = c - improved;
        c = improved;
        if gain < tol::BOOTSTRAP_FIXED_POINT {
            break;
        }
    }
    let c1 = c;
    audit.push(AuditEntry {
        label: format!("bootstrap fixed point after {iterations} iterations"),
        lhs: c1,
        relation: "<=",
        rhs: c1_one_pass,
        holds: c1 <= c1_one_pass,
    });

    let distance_coeff = distance_coefficient(path, r0, c1, &ts, eval.l_monotone, eval.l_at_one)?;

    Ok(RuleCertificate {
        c0,
        c1,
        c1_one_pass,
        initial_speed_coeff,
        distance_coeff,
        l_at_zero,
        l_at_one: eval.l_at_one,
        l_monotone: eval.l_monotone,
        fixed_point_iterations: iterations,
        audit,
    })
}

/// Everything needed to certify a scheme: the mask, its two coefficient
/// paths, the mesh-size radius `r0`, and per-rule contraction constants.
#[derive(Debug, Clone)]
pub struct SchemeCertificateSpec {
    pub name: String,
    pub mask: Mask<f64>,
    pub r0: f64,
    pub c0_even: f64,
    pub c0_odd: f64,
    pub even_path: CoefficientPath,
    pub odd_path: CoefficientPath,
    pub grid_step: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CertificateStatus {
    Certified,
    Failed(String),
}

/// The scheme-level certificate: per-rule constants plus the composed
/// contraction factor and displacement coefficient.
#[derive(Debug, Clone)]
pub struct Certificate {
    pub scheme: String,
    pub r0: f64,
    pub status: CertificateStatus,
    /// Contraction factor: consecutive refined points are within `mu · δ`.
    pub mu: Option<f64>,
    /// Refined points stay within `displacement_coeff · δ` of their parents.
    pub displacement_coeff: Option<f64>,
    pub even: Option<RuleCertificate>,
    pub odd: Option<RuleCertificate>,
    pub audit: Vec<AuditEntry>,
}

impl Certificate {
    pub fn is_certified(&self) -> bool {
        self.status == CertificateStatus::Certified
    }
}

/// Runs both rule certificates and composes them into the scheme-level
/// contraction and displacement bounds. Violated certificate gates are reported in
/// the returned certificate's status; only malformed inputs error out.
pub fn certify_scheme(spec: &SchemeCertificateSpec) -> Result<Certificate, CertifyError> {
    let mut audit = Vec::new();
    let mut fail: Option<String> = None;
    let mut run_rule = |label: &str, path: &CoefficientPath, c0: f64| -> Result<Option<RuleCertificate>, CertifyError> {
        match bootstrap(path, spec.r0, c0, spec.grid_step) {
            Ok(cert) => Ok(Some(cert)),
            Err(
                e @ (CertifyError::AssumptionViolated { .. }
                | CertifyError::DegenerateDenominator { .. }),
            ) => {
                fail.get_or_insert_with(|| format!("{label} rule: {e}"));
                Ok(None)
            }
            Err(e) => Err(e),
        }
    };
    let even = run_rule("even", &spec.even_path, spec.c0_even)?;
    let odd = run_rule("odd", &spec.odd_path, spec.c0_odd)?;

    if let Some(reason) = fail {
        for cert in [&even, &odd].into_iter().flatten() {
            audit.extend(cert.audit.iter().cloned());
        }
        return Ok(Certificate {
            scheme: spec.name.clone(),
            r0: spec.r0,
            status: CertificateStatus::Failed(reason),
            mu: None,
            displacement_coeff: None,
            even,
            odd,
            audit,
        });
    }
    let even_cert = even.expect("even rule certified");
    let odd_cert = odd.expect("odd rule certified");

    let theta_e = spec.even_path.anchor_position();
    let theta_o = spec.odd_path.anchor_position();
    let gap_even_odd = (theta_o - theta_e).abs();
    let gap_odd_even = (1.0 + theta_e - theta_o).abs();
    let mu =
        even_cert.distance_coeff + odd_cert.distance_coeff + gap_even_odd.max(gap_odd_even);
    let displacement = even_cert.distance_coeff + theta_e.abs();

    audit.extend(even_cert.audit.iter().cloned());
    audit.extend(odd_cert.audit.iter().cloned());
    let mu_entry = AuditEntry::strict("composed contraction factor: mu < 1", mu, 1.0);
    let certified = mu_entry.holds;
    audit.push(mu_entry);

    Ok(Certificate {
        scheme: spec.name.clone(),
        r0: spec.r0,
        status: if certified {
            CertificateStatus::Certified
        } else {
            CertificateStatus::Failed(format!(
                "composed contraction factor mu = {mu:.6} is not below 1"
            ))
        },
        mu: Some(mu),
        displacement_coeff: Some(displacement),
        even: Some(even_cert),
        odd: Some(odd_cert),
        audit,
    })
}

/// The certificates shipped with the built-in masks, including the mesh-size
/// radius each one is certified for.
pub fn builtin_certificate_spec(name: &str) -> Result<SchemeCertificateSpec, CertifyError> {
    let mask = builtin_mask(name)?;
    match name {
        "lane-riesenfeld-cubic" => {
            let even_rule = mask.even_rule();
            let odd_rule = mask.odd_rule();
            let even_path = CoefficientPath::for_rule(
                &even_rule,
                vec![0.0, 1.0, 0.0],
                ReferenceRule::InputPoint(1),
            )?;
            let odd_path = CoefficientPath::for_rule(
                &odd_rule,
                vec![0.5, 0.5],
                ReferenceRule::GeodesicMidpoint(0, 1),
            )?;
            Ok(SchemeCertificateSpec {
                name: name.into(),
                mask,
                r0: 0.6,
                c0_even: 0.69,
                c0_odd: 0.0,
                even_path,
                odd_path,
                grid_step: tol::PATH_GRID_STEP,
            })
        }
        "four-point" => {
            let even_rule = mask.even_rule();
            let odd_rule = mask.odd_rule();
            let even_path =
                CoefficientPath::for_rule(&even_rule, vec![1.0], ReferenceRule::InputPoint(0))?;
            let odd_path = CoefficientPath::for_rule(
                &odd_rule,
                vec![0.0, 0.5, 0.5, 0.0],
                ReferenceRule::GeodesicMidpoint(1, 2),
            )?;
            Ok(SchemeCertificateSpec {
                name: name.into(),
                mask,
                r0: 0.31,
                c0_even: 0.0,
                c0_odd: 0.45,
                even_path,
                odd_path,
                grid_step: tol::PATH_GRID_STEP,
            })
        }
        "neg-13-21" => {
            let even_rule = mask.even_rule();
            let odd_rule = mask.odd_rule();
            let even_path = CoefficientPath::for_rule(
                &even_rule,
                vec![0.0, 0.65, 0.35, 0.0],
                ReferenceRule::WeightedAverage(1, 2, 0.35),
            )?;
            let odd_path = CoefficientPath::for_rule(
                &odd_rule,
                vec![0.0, 0.35, 0.65, 0.0],
                ReferenceRule::WeightedAverage(1, 2, 0.65),
            )?;
            Ok(SchemeCertificateSpec {
                name: name.into(),
                mask,
                r0: 0.4,
                c0_even: 0.16,
                c0_odd: 0.16,
                even_path,
                odd_path,
                grid_step: tol::PATH_GRID_STEP,
            })
        }
        other => Err(CertifyError::NoBuiltinCertificate(other.to_string())),
    }
}

/// One sample of the traced mean curve.
#[derive(Debug, Clone)]
pub struct GammaSample {
    pub t: f64,
    /// `‖γ̇(t)‖` solved from the stationarity identity.
    pub speed: f64,
    /// The certificate's bound on that speed (at contraction constant `c`).
    pub speed_bound: f64,
    /// `dist(γ(t), x̄)`.
    pub distance_from_reference: f64,
    pub position: UnitPoint<f64>,
}

/// Resolves the reference point `x̄` of a path over concrete stencil points.
pub fn reference_point(
    points: &[UnitPoint<f64>],
    reference: ReferenceRule,
) -> Result<UnitPoint<f64>, CertifyError> {
    let fetch = |i: usize| -> Result<&UnitPoint<f64>, CertifyError> {
        points.get(i).ok_or_else(|| {
            CertifyError::BadPath(format!(
                "reference index {i} out of range for {} points",
                points.len()
            ))
        })
    };
    match reference {
        ReferenceRule::InputPoint(i) => Ok(fetch(i)?.clone()),
        ReferenceRule::GeodesicMidpoint(i, j) => {
            crate::mean::geodesic_average(fetch(i)?, fetch(j)?, 0.5)
                .map_err(|e| CertifyError::Trace(e.to_string()))
        }
        ReferenceRule::WeightedAverage(i, j, beta) => {
            crate::mean::geodesic_average(fetch(i)?, fetch(j)?, beta)
                .map_err(|e| CertifyError::Trace(e.to_string()))
        }
    }
}

/// Numerically traces the mean curve `γ(t)` over concrete stencil points and
/// returns its sampled speeds next to the certificate's speed bound
/// (evaluated at contraction constant `c`). Used to cross-check the analytic
/// bounds against the actual curve.
pub fn trace_gamma(
    points: &[UnitPoint<f64>],
    path: &CoefficientPath,
    r0: f64,
    c: f64,
    samples: usize,
) -> Result<Vec<GammaSample>, CertifyError> {
    if points.len() != path.len() {
        return Err(CertifyError::BadPath(format!(
            "{} stencil points for a path of length {}",
            points.len(),
            path.len()
        )));
    }
    if samples == 0 {
        return Err(CertifyError::BadParameters("samples must be positive".into()));
    }
    let reference = reference_point(points, path.reference())?;
    let settings = SolverSettings::<f64> {
        method: SolverMethod::NewtonTangent,
        ..SolverSettings::default()
    };
    let mut position = reference.clone();
    let mut out = Vec::with_capacity(samples + 1);
    for k in 0..=samples {
        let t = k as f64 / samples as f64;
        let config = WeightedConfiguration::new(points.to_vec(), path.weights_at(t))
            .map_err(CertifyError::Geometry)?;
        position = karcher_mean(&config, &settings, Some(&position))
            .map_err(|e| CertifyError::Trace(format!("solver failed at t = {t}: {e}")))?;
        let speed = curve_speed(points, path, &config, &position)?;
        out.push(GammaSample {
            t,
            speed,
            speed_bound: speed_bound(path, r0, c, t)?,
            distance_from_reference: geodesic_distance(&position, &reference)?,
            position: position.clone(),
        });
    }
    Ok(out)
}

fn curve_speed(
    points: &[UnitPoint<f64>],
    path: &CoefficientPath,
    config: &WeightedConfiguration<f64>,
    gamma: &UnitPoint<f64>,
) -> Result<f64, CertifyError> {
    // Differentiating grad f_{α(t)}(γ(t)) = 0 in t:
    //   H γ̇ = 2 Σ_j α̇_j log_γ(x_j).
    let (block, basis) = objective_hessian_tangent(config, gamma)?;
    let dim = gamma.ambient_dim();
    let mut rhs_ambient = vec![0.0f64; dim];
    for (p, &ds) in points.iter().zip(path.slope()) {
        let l = log_map(gamma, p)?;
        linalg::axpy(&mut rhs_ambient, 2.0 * ds, l.components());
    }
    let rhs: Vec<f64> = basis.iter().map(|b| linalg::dot(&rhs_ambient, b)).collect();
    let sol = block.solve(&rhs).ok_or_else(|| {
        CertifyError::Trace("tangent Hessian singular while computing the curve speed".into())
    })?;
    Ok(linalg::norm(&sol))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TIGHT: f64 = 1e-9;

    fn lr_even_path() -> CoefficientPath {
        let mask = builtin_mask("lane-riesenfeld-cubic").unwrap();
        CoefficientPath::for_rule(
            &mask.even_rule(),
            vec![0.0, 1.0, 0.0],
            ReferenceRule::InputPoint(1),
        )
        .unwrap()
    }

    #[test]
    fn path_geometry_is_derived_from_the_stencil() {
        let p = lr_even_path();
        assert_eq!(p.offsets(), &[1.0, 0.0, 1.0]);
        assert_eq!(p.slope(), &[0.125, -0.25, 0.125]);
        assert_eq!(p.span_factor(), 1.0);
        assert_eq!(p.anchor_position(), 0.0);
        assert_eq!(p.slope_mass(), 0.5);
        assert_eq!(p.slope_offset_mass(), 0.25);

        let spec = builtin_certificate_spec("neg-13-21").unwrap();
        assert_eq!(spec.even_path.offsets(), &[1.35, 0.35, 0.65, 1.65]);
        assert_eq!(spec.even_path.anchor_position(), 0.35);
        assert_eq!(spec.odd_path.offsets(), &[1.65, 0.65, 0.35, 1.35]);
        assert_eq!(spec.odd_path.anchor_position(), 0.65);
        assert!((spec.even_path.slope_offset_mass() - 0.1325).abs() < 1e-15);
        assert!((spec.odd_path.slope_offset_mass() - 0.1325).abs() < 1e-15);
    }

    #[test]
    fn l_bound_reference_values() {
        // 2 - L(1) for the cubic even rule at r = 0.25, C = 0.53 equals
        // 0.5·ψ(0.3825) + 1.5·ψ(0.1325) and lands near 1.97.
        let p = lr_even_path();
        let l1 = l_bound(&p, 0.25, 0.53, 1.0).unwrap();
        assert!((2.0 - l1 - 1.966586006383).abs() < TIGHT, "2-L(1) = {}", 2.0 - l1);

        let fp = builtin_certificate_spec("four-point").unwrap();
        let l0 = l_bound(&fp.odd_path, 0.31, 0.45, 0.0).unwrap();
        assert!((l0 - 0.016042378866).abs() < TIGHT, "L(0) = {l0}");

        let ng = builtin_certificate_spec("neg-13-21").unwrap();
        let l0 = l_bound(&ng.even_path, 0.4, 0.16, 0.0).unwrap();
        assert!((l0 - 0.024349331303).abs() < TIGHT, "L(0) = {l0}");
    }

    #[test]
    fn cubic_certificates_reach_published_constants() {
        let p = lr_even_path();
        let tight = bootstrap(&p, 0.25, 0.53, tol::PATH_GRID_STEP).unwrap();
        assert!((tight.c1_one_pass - 0.523750294499).abs() < TIGHT);
        assert!((tight.c1 - 0.516825590358).abs() < TIGHT);
        assert!((tight.distance_coeff - 0.385481191977).abs() < TIGHT);
        assert!((tight.initial_speed_coeff - 0.25).abs() < 1e-12);
        assert!(tight.l_monotone);

        let wide = bootstrap(&p, 0.6, 0.69, tol::PATH_GRID_STEP).unwrap();
        assert!((wide.c1_one_pass - 0.688294238434).abs() < TIGHT);
        assert!((wide.c1 - 0.682556774586).abs() < TIGHT);
        assert!((wide.distance_coeff - 0.485575217106).abs() < TIGHT);
        assert!(wide.c1_one_pass > wide.c1, "bootstrap must improve the one-pass constant");
    }

    #[test]
    fn four_point_certificate_reaches_published_constants() {
        let spec = builtin_certificate_spec("four-point").unwrap();
        let odd = bootstrap(&spec.odd_path, spec.r0, spec.c0_odd, spec.grid_step).unwrap();
        assert!((odd.initial_speed_coeff - 0.252021512291).abs() < TIGHT);
        assert!(odd.initial_speed_coeff < 50.0 / 198.0 + 1e-4);
        assert!((odd.c1_one_pass - 0.380906798643).abs() < TIGHT);
        assert!((odd.c1 - 0.352286302051).abs() < TIGHT);
        assert!((odd.distance_coeff - 0.306398963540).abs() < TIGHT);
    }

    #[test]
    fn neg_13_21_certificate_reaches_published_constants() {
        let spec = builtin_certificate_spec("neg-13-21").unwrap();
        let even = bootstrap(&spec.even_path, spec.r0, spec.c0_even, spec.grid_step).unwrap();
        assert!((even.initial_speed_coeff - 0.134133024729).abs() < TIGHT);
        assert!((even.c1_one_pass - 0.157704532971).abs() < TIGHT);
        assert!((even.c1 - 0.157322172345).abs() < TIGHT);
        assert!((even.distance_coeff - 0.147156307271).abs() < TIGHT);
    }

    #[test]
    fn scheme_compositions_match_published_mu() {
        let cert = certify_scheme(&builtin_certificate_spec("lane-riesenfeld-cubic").unwrap())
            .unwrap();
        assert!(cert.is_certified());
        assert!((cert.mu.unwrap() - 0.985575217106).abs() < TIGHT);
        assert!((cert.displacement_coeff.unwrap() - 0.485575217106).abs() < TIGHT);

        let cert = certify_scheme(&builtin_certificate_spec("four-point").unwrap()).unwrap();
        assert!(cert.is_certified());
        assert!((cert.mu.unwrap() - 0.806398963540).abs() < TIGHT);
        assert_eq!(cert.displacement_coeff.unwrap(), 0.0);

        let cert = certify_scheme(&builtin_certificate_spec("neg-13-21").unwrap()).unwrap();
        assert!(cert.is_certified());
        assert!((cert.mu.unwrap() - 0.994312614542).abs() < TIGHT);
        assert!((cert.displacement_coeff.unwrap() - 0.497156307271).abs() < TIGHT);
    }

    #[test]
    fn too_small_c0_fails_the_fixed_point_gate() {
        let spec = builtin_certificate_spec("four-point").unwrap();
        let err = bootstrap(&spec.odd_path, 0.31, 0.26, spec.grid_step).unwrap_err();
        match err {
            CertifyError::AssumptionViolated { assumption, lhs, rhs, .. } => {
                assert!(assumption.contains("fixed-point"));
                assert!((lhs - 0.325934901676).abs() < TIGHT);
                assert_eq!(rhs, 0.26);
            }
            other => panic!("expected fixed-point violation, got {other}"),
        }
        let mut failing = spec;
        failing.c0_odd = 0.26;
        let cert = certify_scheme(&failing).unwrap();
        assert!(!cert.is_certified());
        assert!(matches!(cert.status, CertificateStatus::Failed(ref m) if m.contains("fixed-point")));
    }

    #[test]
    fn radius_beyond_feasibility_fails_assumption_one() {
        let spec = builtin_certificate_spec("four-point").unwrap();
        let err = bootstrap(&spec.odd_path, 0.35, 0.45, spec.grid_step).unwrap_err();
        assert!(matches!(
            err,
            CertifyError::AssumptionViolated { assumption, .. }
            if assumption.contains("well-definedness")
        ));
    }

    #[test]
    fn collapsing_denominator_is_degenerate() {
        // Weights growing far beyond unit mass push L(t) = Σ|α_j(t)|(2-2ψ)
        // past 2 while every ψ argument stays inside its domain.
        let path = CoefficientPath::new(
            vec![0.0, 1.0],
            vec![6.0, -6.0],
            vec![0.2, 0.0],
            ReferenceRule::InputPoint(1),
            0.001,
            0.0,
        )
        .unwrap();
        let err = bootstrap(&path, 0.9, 1.3, 0.01).unwrap_err();
        assert!(
            matches!(err, CertifyError::DegenerateDenominator { .. })
                || matches!(
                    err,
                    CertifyError::AssumptionViolated { assumption, .. }
                    if assumption.contains("denominator")
                ),
            "unexpected error"
        );
    }

    #[test]
    fn bootstrap_is_monotone_in_c0_between_fixed_point_and_start() {
        let p = lr_even_path();
        let base = bootstrap(&p, 0.25, 0.53, tol::PATH_GRID_STEP).unwrap();
        for c0 in [0.5169, 0.517, 0.52, 0.525] {
            assert!(base.c1 < c0 && c0 < 0.53);
            let again = bootstrap(&p, 0.25, c0, tol::PATH_GRID_STEP).unwrap();
            assert!((again.c1 - base.c1).abs() < 1e-12, "fixed point must not depend on c0");
        }
    }

    #[test]
    fn traced_curve_stays_below_its_speed_bound() {
        let spec = builtin_certificate_spec("lane-riesenfeld-cubic").unwrap();
        let cert = bootstrap(&spec.even_path, 0.25, 0.53, tol::PATH_GRID_STEP).unwrap();
        // Asymmetric stencil along a great circle, staying within the
        // offsets ℓ = (1, 0, 1) at mesh size r; the asymmetry makes the mean
        // actually move along the homotopy.
        let r = 0.25f64;
        let points: Vec<UnitPoint<f64>> = [-0.85f64, 0.0, 1.0]
            .iter()
            .map(|&k| UnitPoint::new(vec![(k * r).cos(), (k * r).sin(), 0.0]).unwrap())
            .collect();
        let samples = trace_gamma(&points, &spec.even_path, r, cert.c1, 64).unwrap();
        assert_eq!(samples.len(), 65);
        for s in &samples {
            assert!(
                s.speed <= s.speed_bound * (1.0 + 1e-9) + 1e-12,
                "speed {} exceeds bound {} at t = {}",
                s.speed,
                s.speed_bound,
                s.t
            );
            assert!(s.distance_from_reference <= cert.c1 * r * s.t + 1e-12);
        }
        assert!(samples[0].speed.abs() < 1e-9 || samples[0].speed <= samples[0].speed_bound);
    }
}
