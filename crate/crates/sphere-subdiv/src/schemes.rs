//! Binary subdivision masks and their geodesic analogues on the sphere.
//!
//! A mask `a = (a_m)` with contiguous support defines the linear refinement
//! `(Sx)_i = Σ_j a_{i-2j} x_j`. Splitting by parity of the output index gives
//! an even rule and an odd rule, each a finite stencil of affine weights on
//! consecutive input points. The geodesic analogue replaces each weighted
//! affine combination by the weighted Karcher mean of the stencil points,
//! computed per output point by [`crate::mean::karcher_mean`].
//!
//! Every stencil evaluation is gated: the stencil is wrapped in the smallest
//! ball around its median point and [`crate::mean::check_well_defined`] must
//! accept it before the solver runs. The solver is then confined to the
//! uniqueness ball the gate reports, so a refinement that returns `Ok` used
//! only means that were provably well defined.

use crate::geometry::{geodesic_distance, GeometryError, UnitPoint, WeightedConfiguration};
use crate::mean::{
    check_well_defined, geodesic_average, karcher_mean, CertifiedBall, MeanError, SolverSettings,
};
use crate::scalar::Real;
use crate::tol;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SchemeError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Mean(#[from] MeanError),
    #[error("mask must have coefficients")]
    EmptyMask,
    #[error("mask is not affine-invariant: even weights sum to {even_sum}, odd weights to {odd_sum}")]
    NotAffine { even_sum: f64, odd_sum: f64 },
    #[error("unknown scheme '{0}'; known schemes: lane-riesenfeld-cubic, four-point, four-point(w), neg-13-21")]
    UnknownScheme(String),
    #[error("sequence needs at least {needed} points for this mask, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("well-definedness gate failed at output index {output_index}: (1+2α₋)·r = {lower:.6} must stay below Q(α₋) = {upper:.6} (α₋ = {alpha_minus}, stencil radius r = {radius:.6})")]
    GateViolation {
        output_index: i64,
        alpha_minus: f64,
        radius: f64,
        lower: f64,
        upper: f64,
    },
    #[error("mesh size {delta:.6} at level {level} (widest edge starts at point {edge_index}) is not below the certified radius {radius}")]
    DeltaExceedsRadius {
        level: usize,
        edge_index: usize,
        delta: f64,
        radius: f64,
    },
    #[error("truncated refinement produced a gap in output indices; mask sub-rules are irregular")]
    IrregularStencil,
}

/// Subdivision mask with contiguous support `first, first+1, …`.
#[derive(Debug, Clone)]
pub struct Mask<S> {
    name: Option<String>,
    first: i64,
    coeffs: Vec<S>,
}

/// One parity's stencil: affine weights on input offsets `i + offset`.
#[derive(Debug, Clone)]
pub struct SubRule<S> {
    /// Input offsets relative to the anchor index `i`, ascending.
    pub offsets: Vec<i64>,
    /// Weights aligned with `offsets`.
    pub weights: Vec<S>,
}

impl<S: Real> SubRule<S> {
    /// Half the stencil width in grid steps: the radius multiplier of the
    /// stencil ball around the median point when consecutive inputs are at
    /// distance at most one step.
    pub fn span_factor(&self) -> f64 {
        (*self.offsets.last().expect("stencil is nonempty") - self.offsets[0]) as f64 / 2.0
    }

    /// Negative weight mass of the stencil.
    pub fn negative_part(&self) -> S {
        self.weights.iter().fold(S::zero(), |acc, &w| {
            if w < S::zero() {
                acc - w
            } else {
                acc
            }
        })
    }
}

impl<S: Real> Mask<S> {
    /// Validates affine invariance: the even-indexed and odd-indexed
    /// coefficients must each sum to 1 within [`tol::WEIGHT_SUM`].
    pub fn new(first: i64, coeffs: Vec<S>) -> Result<Self, SchemeError> {
        if coeffs.is_empty() {
            return Err(SchemeError::EmptyMask);
        }
        let mut even_sum = S::zero();
        let mut odd_sum = S::zero();
        for (k, &c) in coeffs.iter().enumerate() {
            if (first + k as i64).rem_euclid(2) == 0 {
                even_sum = even_sum + c;
            } else {
                odd_sum = odd_sum + c;
            }
        }
        let tol = S::of(tol::WEIGHT_SUM);
        if (even_sum - S::one()).abs() > tol || (odd_sum - S::one()).abs() > tol {
            return Err(SchemeError::NotAffine {
                even_sum: even_sum.as_f64(),
                odd_sum: odd_sum.as_f64(),
            });
        }
        Ok(Self {
            name: None,
            first,
            coeffs,
        })
    }

    fn named(name: &str, first: i64, coeffs: Vec<S>) -> Result<Self, SchemeError> {
        let mut mask = Self::new(first, coeffs)?;
        mask.name = Some(name.to_string());
        Ok(mask)
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn first_index(&self) -> i64 {
        self.first
    }

    pub fn coefficients(&self) -> &[S] {
        &self.coeffs
    }

    /// The parity sub-rule producing outputs `2i + parity`. Zero coefficients
    /// are dropped from the stencil.
    pub fn sub_rule(&self, parity: u8) -> SubRule<S> {
        debug_assert!(parity < 2);
        let mut entries: Vec<(i64, S)> = Vec::new();
        for (k, &c) in self.coeffs.iter().enumerate() {
            let m = self.first + k as i64;
            if m.rem_euclid(2) != parity as i64 || c == S::zero() {
                continue;
            }
            // (Sx)_{2i+parity} collects a_{2k+parity} · x_{i-k}, so mask index
            // m contributes the input at offset -(m - parity)/2.
            let offset = -(m - parity as i64).div_euclid(2);
            entries.push((offset, c));
        }
        entries.sort_by_key(|&(o, _)| o);
        SubRule {
            offsets: entries.iter().map(|&(o, _)| o).collect(),
            weights: entries.iter().map(|&(_, w)| w).collect(),
        }
    }

    pub fn even_rule(&self) -> SubRule<S> {
        self.sub_rule(0)
    }

    pub fn odd_rule(&self) -> SubRule<S> {
        self.sub_rule(1)
    }

    /// Width of the widest sub-rule stencil, the minimum number of points a
    /// truncated sequence must have.
    pub fn min_points(&self) -> usize {
        let width = |r: &SubRule<S>| {
            (*r.offsets.last().expect("nonempty") - r.offsets[0]) as usize + 1
        };
        width(&self.even_rule()).max(width(&self.odd_rule()))
    }
}

/// Built-in masks by name. `four-point` accepts an optional tension
/// parameter, e.g. `four-point(0.0625)`; plain `four-point` uses `w = 1/16`.
pub fn builtin_mask(name: &str) -> Result<Mask<f64>, SchemeError> {
    match name {
        "lane-riesenfeld-cubic" => Mask::named(
            name,
            -2,
            vec![1.0 / 8.0, 1.0 / 2.0, 3.0 / 4.0, 1.0 / 2.0, 1.0 / 8.0],
        ),
        "four-point" => four_point_mask(1.0 / 16.0),
        "neg-13-21" => Mask::named(
            name,
            -4,
            vec![
                -1.0 / 32.0,
                -1.0 / 32.0,
                13.0 / 32.0,
                21.0 / 32.0,
                21.0 / 32.0,
                13.0 / 32.0,
                -1.0 / 32.0,
                -1.0 / 32.0,
            ],
        ),
        other => {
            if let Some(rest) = other
                .strip_prefix("four-point(")
                .and_then(|r| r.strip_suffix(')'))
            {
                let w: f64 = rest
                    .trim()
                    .parse()
                    .map_err(|_| SchemeError::UnknownScheme(other.to_string()))?;
                return four_point_mask(w);
            }
            Err(SchemeError::UnknownScheme(other.to_string()))
        }
    }
}

/// Interpolatory four-point mask with tension `w`.
pub fn four_point_mask(w: f64) -> Result<Mask<f64>, SchemeError> {
    let mut mask = Mask::named(
        "four-point",
        -3,
        vec![-w, 0.0, 0.5 + w, 1.0, 0.5 + w, 0.0, -w],
    )?;
    if w != 1.0 / 16.0 {
        mask.name = Some(format!("four-point({w})"));
    }
    Ok(mask)
}

/// How a finite point sequence is closed at its ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryRule {
    /// Indices wrap around: the sequence is a closed polygon.
    Periodic,
    /// Only outputs whose full stencil exists are produced; the sequence
    /// shrinks at both ends.
    Truncate,
}

/// An indexed sequence of sphere points subject to a boundary rule.
///
/// `start` is the global index of the first stored point; refinement doubles
/// global indices, which keeps output `2i` aligned with input `i` across
/// levels even when truncation trims the ends.
#[derive(Debug, Clone)]
pub struct PointSequence<S> {
    points: Vec<UnitPoint<S>>,
    start: i64,
    boundary: BoundaryRule,
}

impl<S: Real> PointSequence<S> {
    pub fn new(points: Vec<UnitPoint<S>>, boundary: BoundaryRule) -> Result<Self, SchemeError> {
        Self::with_start(points, 0, boundary)
    }

    pub fn with_start(
        points: Vec<UnitPoint<S>>,
        start: i64,
        boundary: BoundaryRule,
    ) -> Result<Self, SchemeError> {
        if points.len() < 2 {
            return Err(SchemeError::TooFewPoints {
                needed: 2,
                got: points.len(),
            });
        }
        let dim = points[0].ambient_dim();
        for p in &points[1..] {
            if p.ambient_dim() != dim {
                return Err(SchemeError::Geometry(GeometryError::DimensionMismatch {
                    expected: dim,
                    found: p.ambient_dim(),
                }));
            }
        }
        Ok(Self {
            points,
            start,
            boundary,
        })
    }

    pub fn points(&self) -> &[UnitPoint<S>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn start_index(&self) -> i64 {
        self.start
    }

    pub fn boundary(&self) -> BoundaryRule {
        self.boundary
    }

    pub fn ambient_dim(&self) -> usize {
        self.points[0].ambient_dim()
    }

    /// The point with global index `g`, respecting the boundary rule.
    pub fn point_at(&self, g: i64) -> Option<&UnitPoint<S>> {
        let n = self.points.len() as i64;
        match self.boundary {
            BoundaryRule::Periodic => {
                let idx = (g - self.start).rem_euclid(n);
                self.points.get(idx as usize)
            }
            BoundaryRule::Truncate => {
                let idx = g - self.start;
                if (0..n).contains(&idx) {
                    self.points.get(idx as usize)
                } else {
                    None
                }
            }
        }
    }

    /// Mesh size δ: the largest geodesic distance between consecutive points
    /// (including the closing edge when periodic).
    pub fn delta(&self) -> Result<S, GeometryError> {
        Ok(self.widest_edge()?.0)
    }

    /// Mesh size δ together with the position (offset from the start of the
    /// sequence) of the first endpoint of the widest edge.
    pub fn widest_edge(&self) -> Result<(S, usize), GeometryError> {
        let mut max = S::zero();
        let mut at = 0usize;
        for (i, pair) in self.points.windows(2).enumerate() {
            let d = geodesic_distance(&pair[0], &pair[1])?;
            if d > max {
                max = d;
                at = i;
            }
        }
        if self.boundary == BoundaryRule::Periodic && self.points.len() > 2 {
            let d = geodesic_distance(
                self.points.last().expect("nonempty"),
                &self.points[0],
            )?;
            if d > max {
                max = d;
                at = self.points.len() - 1;
            }
        }
        Ok((max, at))
    }
}

/// The linear refinement `(Sx)_i = Σ_j a_{i-2j} x_j` on raw coordinate rows
/// (any fixed row length, spheres not involved). Reference implementation
/// for tests and for comparing against the geodesic analogue.
pub fn linear_subdivide<S: Real>(
    mask: &Mask<S>,
    rows: &[Vec<S>],
    boundary: BoundaryRule,
) -> Result<Vec<Vec<S>>, SchemeError> {
    if rows.len() < 2 {
        return Err(SchemeError::TooFewPoints {
            needed: 2,
            got: rows.len(),
        });
    }
    let width = rows[0].len();
    for r in rows {
        if r.len() != width {
            return Err(SchemeError::Geometry(GeometryError::DimensionMismatch {
                expected: width,
                found: r.len(),
            }));
        }
    }
    let rules = [mask.even_rule(), mask.odd_rule()];
    let n = rows.len() as i64;
    let mut out = Vec::new();
    for g in 0..2 * n {
        let i = g.div_euclid(2);
        let rule = &rules[g.rem_euclid(2) as usize];
        let mut acc = vec![S::zero(); width];
        let mut complete = true;
        for (&off, &w) in rule.offsets.iter().zip(&rule.weights) {
            let j = i + off;
            let row = match boundary {
                BoundaryRule::Periodic => Some(&rows[j.rem_euclid(n) as usize]),
                BoundaryRule::Truncate => {
                    if (0..n).contains(&j) {
                        Some(&rows[j as usize])
                    } else {
                        None
                    }
                }
            };
            match row {
                Some(row) => crate::linalg::axpy(&mut acc, w, row),
                None => {
                    complete = false;
                    break;
                }
            }
        }
        if complete {
            out.push(acc);
        }
    }
    Ok(out)
}

fn stencil_center<S: Real>(points: &[UnitPoint<S>]) -> Result<UnitPoint<S>, MeanError> {
    let n = points.len();
    if n % 2 == 1 {
        Ok(points[n / 2].clone())
    } else {
        geodesic_average(&points[n / 2 - 1], &points[n / 2], S::of(0.5))
    }
}

fn refine_one<S: Real>(
    rule: &SubRule<S>,
    stencil: Vec<UnitPoint<S>>,
    output_index: i64,
    settings: &SolverSettings<S>,
) -> Result<UnitPoint<S>, SchemeError> {
    if stencil.len() == 1 {
        return Ok(stencil.into_iter().next().expect("one point"));
    }
    if stencil.len() == 2 && rule.weights.iter().all(|&w| w >= S::zero()) {
        let half = geodesic_distance(&stencil[0], &stencil[1])? / S::of(2.0);
        if half >= S::FRAC_PI_4() {
            return Err(SchemeError::GateViolation {
                output_index,
                alpha_minus: 0.0,
                radius: half.as_f64(),
                lower: half.as_f64(),
                upper: core::f64::consts::FRAC_PI_4,
            });
        }
        return Ok(geodesic_average(&stencil[0], &stencil[1], rule.weights[1])?);
    }
    let center = stencil_center(&stencil)?;
    let config = WeightedConfiguration::new(stencil, rule.weights.clone())?;
    let radius = config.max_distance_from(&center)?;
    let report = check_well_defined(&config, &center, radius)?;
    if !report.well_defined {
        return Err(SchemeError::GateViolation {
            output_index,
            alpha_minus: report.alpha_minus.as_f64(),
            radius: report.radius.as_f64(),
            lower: report.lower.as_f64(),
            upper: report.upper.as_f64(),
        });
    }
    let mut local = settings.clone();
    local.certified_ball = Some(CertifiedBall {
        center: center.clone(),
        radius: report.uniqueness_radius.expect("well defined"),
    });
    Ok(karcher_mean(&config, &local, Some(&center))?)
}

/// One level of the geodesic analogue: every output point is the gated
/// weighted Karcher mean of its stencil.
pub fn riemannian_subdivide<S: Real>(
    mask: &Mask<S>,
    seq: &PointSequence<S>,
    settings: &SolverSettings<S>,
) -> Result<PointSequence<S>, SchemeError> {
    if seq.boundary() == BoundaryRule::Truncate && seq.len() < mask.min_points() {
        return Err(SchemeError::TooFewPoints {
            needed: mask.min_points(),
            got: seq.len(),
        });
    }
    let rules = [mask.even_rule(), mask.odd_rule()];
    let n = seq.len() as i64;
    let mut outputs: Vec<(i64, UnitPoint<S>)> = Vec::with_capacity(2 * seq.len());
    for g in 2 * seq.start_index()..2 * (seq.start_index() + n) {
        let i = g.div_euclid(2);
        let rule = &rules[g.rem_euclid(2) as usize];
        let stencil: Option<Vec<UnitPoint<S>>> = rule
            .offsets
            .iter()
            .map(|&off| seq.point_at(i + off).cloned())
            .collect();
        let Some(stencil) = stencil else {
            continue;
        };
        outputs.push((g, refine_one(rule, stencil, g, settings)?));
    }
    if outputs.is_empty() {
        return Err(SchemeError::TooFewPoints {
            needed: mask.min_points(),
            got: seq.len(),
        });
    }
    for pair in outputs.windows(2) {
        if pair[1].0 - pair[0].0 != 1 {
            return Err(SchemeError::IrregularStencil);
        }
    }
    let start = outputs[0].0;
    PointSequence::with_start(
        outputs.into_iter().map(|(_, p)| p).collect(),
        start,
        seq.boundary(),
    )
}

/// Runs `levels` rounds of [`riemannian_subdivide`], returning every level
/// including the input. When `max_delta` is given, each level's mesh size
/// must stay strictly below it or refinement stops with
/// [`SchemeError::DeltaExceedsRadius`].
pub fn iterate<S: Real>(
    mask: &Mask<S>,
    seq: PointSequence<S>,
    levels: usize,
    settings: &SolverSettings<S>,
    max_delta: Option<S>,
) -> Result<Vec<PointSequence<S>>, SchemeError> {
    let mut out = Vec::with_capacity(levels + 1);
    out.push(seq);
    for level in 0..levels {
        if let Some(md) = max_delta {
            let (delta, edge_index) = out[level].widest_edge()?;
            if delta >= md {
                return Err(SchemeError::DeltaExceedsRadius {
                    level,
                    edge_index,
                    delta: delta.as_f64(),
                    radius: md.as_f64(),
                });
            }
        }
        let next = riemannian_subdivide(mask, &out[level], settings)?;
        out.push(next);
    }
    Ok(out)
}

/// Per-level mesh sizes, contraction ratios, and displacements of a
/// refinement run.
#[derive(Debug, Clone)]
pub struct RefinementDiagnostics {
    /// Mesh size δ of each level.
    pub deltas: Vec<f64>,
    /// `deltas[k+1] / deltas[k]`.
    pub contraction_ratios: Vec<f64>,
    /// `sup_i dist(level[k+1] at 2i, level[k] at i)` for each level pair.
    pub displacements: Vec<f64>,
    /// `displacements[k] / deltas[k]`.
    pub displacement_ratios: Vec<f64>,
}

pub fn diagnostics<S: Real>(
    levels: &[PointSequence<S>],
) -> Result<RefinementDiagnostics, SchemeError> {
    let mut deltas = Vec::with_capacity(levels.len());
    for seq in levels {
        deltas.push(seq.delta()?.as_f64());
    }
    let mut contraction_ratios = Vec::new();
    let mut displacements = Vec::new();
    let mut displacement_ratios = Vec::new();
    for pair in levels.windows(2) {
        let (coarse, fine) = (&pair[0], &pair[1]);
        let dc = coarse.delta()?.as_f64();
        let df = fine.delta()?.as_f64();
        contraction_ratios.push(if dc > 0.0 { df / dc } else { 0.0 });
        let mut disp = 0.0f64;
        for k in 0..coarse.len() as i64 {
            let i = coarse.start_index() + k;
            let (Some(before), Some(after)) = (coarse.point_at(i), fine.point_at(2 * i)) else {
                continue;
            };
            let d = geodesic_distance(before, after)?.as_f64();
            disp = disp.max(d);
        }
        displacements.push(disp);
        displacement_ratios.push(if dc > 0.0 { disp / dc } else { 0.0 });
    }
    Ok(RefinementDiagnostics {
        deltas,
        contraction_ratios,
        displacements,
        displacement_ratios,
    })
}
