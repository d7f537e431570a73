//! File formats: point sequences (CSV and JSON), certificate spec files, and
//! the JSON reports the command line tool emits.
//!
//! Point ingestion applies the renormalization policy from [`crate::tol`]:
//! rows within `1e-9` of unit norm pass through, rows within `1e-6` are
//! projected back to the sphere with a warning, anything farther is
//! rejected with its row number.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::certify::{
    Certificate, CertificateStatus, CertifyError, CoefficientPath, ReferenceRule,
    SchemeCertificateSpec,
};
use crate::geometry::{GeometryError, UnitPoint};
use crate::schemes::{builtin_mask, BoundaryRule, Mask, PointSequence, SchemeError, SubRule};
use crate::tol;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}:{line}: cannot parse '{token}' as a number")]
    Parse {
        path: String,
        line: usize,
        token: String,
    },
    #[error("{path}:{line}: row has {found} columns, expected {expected}")]
    Columns {
        path: String,
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("{path}: no points found")]
    Empty { path: String },
    #[error("row {row}: point norm deviates from 1 by {deviation:.3e}, beyond the renormalization band {band:.1e}")]
    NotOnSphere {
        row: usize,
        deviation: f64,
        band: f64,
    },
    #[error("{path}: unsupported extension (expected .csv or .json)")]
    UnknownExtension { path: String },
    #[error("{path}: {source}")]
    Json {
        path: String,
        source: serde_json::Error,
    },
    #[error("certificate spec: {0}")]
    Spec(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Certify(#[from] CertifyError),
}

fn io_err(path: &Path, source: std::io::Error) -> FormatError {
    FormatError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Raw content of a point file before sphere validation.
#[derive(Debug, Clone)]
pub struct PointFile {
    pub rows: Vec<Vec<f64>>,
    /// Only JSON files carry an explicit periodicity flag.
    pub periodic: Option<bool>,
}

#[derive(Debug, Serialize, Deserialize)]
struct PointFileJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dimension: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    periodic: Option<bool>,
    points: Vec<Vec<f64>>,
}

/// Reads a point file, dispatching on the `.csv` / `.json` extension.
pub fn read_points(path: &Path) -> Result<PointFile, FormatError> {
    match extension(path) {
        Some("csv") => read_points_csv(path),
        Some("json") => read_points_json(path),
        _ => Err(FormatError::UnknownExtension {
            path: path.display().to_string(),
        }),
    }
}

fn extension(path: &Path) -> Option<&str> {
    path.extension().and_then(|e| e.to_str())
}

/// CSV layout: one point per row, comma-separated ambient coordinates,
/// `#` starts a comment, blank lines ignored.
pub fn read_points_csv(path: &Path) -> Result<PointFile, FormatError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut expected = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for token in line.split(',') {
            let token = token.trim();
            let value: f64 = token.parse().map_err(|_| FormatError::Parse {
                path: path.display().to_string(),
                line: lineno + 1,
                token: token.to_string(),
            })?;
            row.push(value);
        }
        if let Some(expected) = expected {
            if row.len() != expected {
                return Err(FormatError::Columns {
                    path: path.display().to_string(),
                    line: lineno + 1,
                    expected,
                    found: row.len(),
                });
            }
        } else {
            expected = Some(row.len());
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(FormatError::Empty {
            path: path.display().to_string(),
        });
    }
    Ok(PointFile {
        rows,
        periodic: None,
    })
}

pub fn read_points_json(path: &Path) -> Result<PointFile, FormatError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let parsed: PointFileJson = serde_json::from_str(&text).map_err(|e| FormatError::Json {
        path: path.display().to_string(),
        source: e,
    })?;
    if parsed.points.is_empty() {
        return Err(FormatError::Empty {
            path: path.display().to_string(),
        });
    }
    if let Some(dim) = parsed.dimension {
        for (i, row) in parsed.points.iter().enumerate() {
            if row.len() != dim {
                return Err(FormatError::Columns {
                    path: path.display().to_string(),
                    line: i + 1,
                    expected: dim,
                    found: row.len(),
                });
            }
        }
    }
    Ok(PointFile {
        rows: parsed.points,
        periodic: parsed.periodic,
    })
}

/// Validates rows against the sphere and assembles a sequence. Returns the
/// renormalization warnings alongside.
pub fn to_sequence(
    rows: &[Vec<f64>],
    boundary: BoundaryRule,
) -> Result<(PointSequence<f64>, Vec<String>), FormatError> {
    let mut points = Vec::with_capacity(rows.len());
    let mut warnings = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        match UnitPoint::new_renormalized(row.clone()) {
            Ok((p, renormalized)) => {
                if renormalized {
                    let deviation = (crate::linalg::norm(row) - 1.0).abs();
                    warnings.push(format!(
                        "row {}: renormalized onto the sphere (norm deviation {deviation:.3e})",
                        i + 1
                    ));
                }
                points.push(p);
            }
            Err(GeometryError::NotUnitNorm { deviation, .. }) => {
                return Err(FormatError::NotOnSphere {
                    row: i + 1,
                    deviation,
                    band: tol::UNIT_NORM_RENORMALIZE,
                });
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok((PointSequence::new(points, boundary)?, warnings))
}

pub fn write_points_csv(path: &Path, seq: &PointSequence<f64>) -> Result<(), FormatError> {
    let mut text = String::new();
    for p in seq.points() {
        let row: Vec<String> = p.coords().iter().map(|c| format!("{c}")).collect();
        text.push_str(&row.join(","));
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| io_err(path, e))
}

pub fn write_points_json(path: &Path, seq: &PointSequence<f64>) -> Result<(), FormatError> {
    let json = PointFileJson {
        dimension: Some(seq.ambient_dim()),
        periodic: Some(seq.boundary() == BoundaryRule::Periodic),
        points: seq
            .points()
            .iter()
            .map(|p| p.coords().to_vec())
            .collect(),
    };
    let text = serde_json::to_string_pretty(&json).map_err(|e| FormatError::Json {
        path: path.display().to_string(),
        source: e,
    })?;
    fs::write(path, text).map_err(|e| io_err(path, e))
}

/// Scheme reference in a certificate spec: a built-in name or an inline mask.
#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SchemeField {
    Name(String),
    Inline { first: i64, coeffs: Vec<f64> },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum ReferenceField {
    InputPoint { index: usize },
    GeodesicMidpoint { i: usize, j: usize },
    WeightedAverage { i: usize, j: usize, beta: f64 },
}

impl From<ReferenceField> for ReferenceRule {
    fn from(f: ReferenceField) -> Self {
        match f {
            ReferenceField::InputPoint { index } => ReferenceRule::InputPoint(index),
            ReferenceField::GeodesicMidpoint { i, j } => ReferenceRule::GeodesicMidpoint(i, j),
            ReferenceField::WeightedAverage { i, j, beta } => {
                ReferenceRule::WeightedAverage(i, j, beta)
            }
        }
    }
}

/// One rule's path in a spec file. The end weights always come from the
/// mask's sub-rule; `base` and `reference` describe the start. `offsets` may
/// be given explicitly (looser values are allowed for conservative
/// certificates); omitted, they are derived from the stencil geometry.
#[derive(Debug, Serialize, Deserialize)]
pub struct PathField {
    pub base: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offsets: Option<Vec<f64>>,
    pub reference: ReferenceField,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PathsField {
    pub even: PathField,
    pub odd: PathField,
}

/// On-disk certificate spec.
#[derive(Debug, Serialize, Deserialize)]
pub struct CertificateSpecFile {
    pub scheme: SchemeField,
    pub r0: f64,
    #[serde(rename = "C0_even")]
    pub c0_even: f64,
    #[serde(rename = "C0_odd")]
    pub c0_odd: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_step: Option<f64>,
    pub paths: PathsField,
}

/// Reads a mask file: either a JSON string naming a built-in scheme or an
/// object `{"first": <index of the first coefficient>, "coeffs": [...]}`.
pub fn read_mask(path: &Path) -> Result<Mask<f64>, FormatError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let parsed: SchemeField = serde_json::from_str(&text).map_err(|e| FormatError::Json {
        path: path.display().to_string(),
        source: e,
    })?;
    match parsed {
        SchemeField::Name(name) => Ok(builtin_mask(&name)?),
        SchemeField::Inline { first, coeffs } => Ok(Mask::new(first, coeffs)?),
    }
}

pub fn read_certificate_spec(path: &Path) -> Result<SchemeCertificateSpec, FormatError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let parsed: CertificateSpecFile =
        serde_json::from_str(&text).map_err(|e| FormatError::Json {
            path: path.display().to_string(),
            source: e,
        })?;
    parsed.into_spec()
}

impl CertificateSpecFile {
    pub fn into_spec(self) -> Result<SchemeCertificateSpec, FormatError> {
        let (name, mask) = match self.scheme {
            SchemeField::Name(name) => (name.clone(), builtin_mask(&name)?),
            SchemeField::Inline { first, coeffs } => {
                ("custom".to_string(), Mask::new(first, coeffs)?)
            }
        };
        let even_path = build_path(&mask.even_rule(), self.paths.even, "even")?;
        let odd_path = build_path(&mask.odd_rule(), self.paths.odd, "odd")?;
        Ok(SchemeCertificateSpec {
            name,
            mask,
            r0: self.r0,
            c0_even: self.c0_even,
            c0_odd: self.c0_odd,
            even_path,
            odd_path,
            grid_step: self.grid_step.unwrap_or(tol::PATH_GRID_STEP),
        })
    }
}

fn build_path(
    rule: &SubRule<f64>,
    field: PathField,
    label: &str,
) -> Result<CoefficientPath, FormatError> {
    let reference: ReferenceRule = field.reference.into();
    let derived = CoefficientPath::for_rule(rule, field.base, reference)
        .map_err(|e| FormatError::Spec(format!("{label} path: {e}")))?;
    match field.offsets {
        None => Ok(derived),
        Some(offsets) => {
            for (given, computed) in offsets.iter().zip(derived.offsets()) {
                if given < computed {
                    return Err(FormatError::Spec(format!(
                        "{label} path: explicit offset {given} is tighter than the stencil geometry allows ({computed})"
                    )));
                }
            }
            CoefficientPath::new(
                derived.base().to_vec(),
                derived.slope().to_vec(),
                offsets,
                reference,
                derived.span_factor(),
                derived.anchor_position(),
            )
            .map_err(|e| FormatError::Spec(format!("{label} path: {e}")))
        }
    }
}

/// JSON mirror of a [`Certificate`].
#[derive(Debug, Serialize, Deserialize)]
pub struct CertificateReport {
    pub schema_version: u32,
    pub scheme: String,
    pub r0: f64,
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub displacement_coeff: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub even: Option<RuleReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub odd: Option<RuleReport>,
    pub audit: Vec<AuditLine>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RuleReport {
    pub c0: f64,
    pub c1: f64,
    pub c1_one_pass: f64,
    pub initial_speed_coeff: f64,
    pub distance_coeff: f64,
    pub l_at_zero: f64,
    pub l_at_one: f64,
    pub l_monotone: bool,
    pub fixed_point_iterations: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct AuditLine {
    pub label: String,
    pub lhs: f64,
    pub relation: String,
    pub rhs: f64,
    pub holds: bool,
}

impl From<&Certificate> for CertificateReport {
    fn from(cert: &Certificate) -> Self {
        let rule = |r: &crate::certify::RuleCertificate| RuleReport {
            c0: r.c0,
            c1: r.c1,
            c1_one_pass: r.c1_one_pass,
            initial_speed_coeff: r.initial_speed_coeff,
            distance_coeff: r.distance_coeff,
            l_at_zero: r.l_at_zero,
            l_at_one: r.l_at_one,
            l_monotone: r.l_monotone,
            fixed_point_iterations: r.fixed_point_iterations,
        };
        let (status, failure) = match &cert.status {
            CertificateStatus::Certified => ("certified".to_string(), None),
            CertificateStatus::Failed(reason) => ("failed".to_string(), Some(reason.clone())),
        };
        CertificateReport {
            schema_version: 1,
            scheme: cert.scheme.clone(),
            r0: cert.r0,
            status,
            failure,
            mu: cert.mu,
            displacement_coeff: cert.displacement_coeff,
            even: cert.even.as_ref().map(rule),
            odd: cert.odd.as_ref().map(rule),
            audit: cert
                .audit
                .iter()
                .map(|a| AuditLine {
                    label: a.label.clone(),
                    lhs: a.lhs,
                    relation: a.relation.to_string(),
                    rhs: a.rhs,
                    holds: a.holds,
                })
                .collect(),
        }
    }
}

/// JSON summary of a subdivision run.
#[derive(Debug, Serialize, Deserialize)]
pub struct SubdivisionReport {
    pub schema_version: u32,
    pub scheme: String,
    pub levels: usize,
    pub boundary: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certified_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certified_mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certified_displacement: Option<f64>,
    pub point_counts: Vec<usize>,
    pub deltas: Vec<f64>,
    pub contraction_ratios: Vec<f64>,
    pub displacements: Vec<f64>,
    pub displacement_ratios: Vec<f64>,
    pub warnings: Vec<String>,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), FormatError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| FormatError::Json {
        path: path.display().to_string(),
        source: e,
    })?;
    fs::write(path, text).map_err(|e| io_err(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certify::certify_scheme;

    fn tmp(name: &str) -> std::path::PathBuf {
        let mut p = std::env::temp_dir();
        p.push(format!("sphere-subdiv-test-{}-{name}", std::process::id()));
        p
    }

    #[test]
    fn csv_roundtrip_with_comments_and_renormalization() {
        let path = tmp("pts.csv");
        fs::write(
            &path,
            "# closed polygon\n1,0,0\n0.9999999,0.0001,0 # near miss\n0,1,0\n0,0,1\n",
        )
        .unwrap();
        let file = read_points_csv(&path).unwrap();
        assert_eq!(file.rows.len(), 4);
        let (seq, warnings) = to_sequence(&file.rows, BoundaryRule::Periodic).unwrap();
        assert_eq!(seq.len(), 4);
        assert_eq!(warnings.len(), 1, "one row sits in the renormalization band");

        let out = tmp("pts-out.csv");
        write_points_csv(&out, &seq).unwrap();
        let again = read_points_csv(&out).unwrap();
        let (seq2, warnings2) = to_sequence(&again.rows, BoundaryRule::Periodic).unwrap();
        assert!(warnings2.is_empty(), "written points are exactly unit norm");
        for (a, b) in seq.points().iter().zip(seq2.points()) {
            assert_eq!(a, b, "display formatting must round-trip f64 exactly");
        }
        fs::remove_file(&path).ok();
        fs::remove_file(&out).ok();
    }

    #[test]
    fn off_sphere_rows_are_rejected_with_row_number() {
        let err = to_sequence(
            &[vec![1.0, 0.0, 0.0], vec![0.5, 0.5, 0.0]],
            BoundaryRule::Periodic,
        )
        .unwrap_err();
        match err {
            FormatError::NotOnSphere { row, .. } => assert_eq!(row, 2),
            other => panic!("expected NotOnSphere, got {other}"),
        }
    }

    #[test]
    fn json_points_carry_periodicity() {
        let path = tmp("pts.json");
        fs::write(
            &path,
            r#"{"dimension": 3, "periodic": false, "points": [[1,0,0],[0,1,0],[0,0,1]]}"#,
        )
        .unwrap();
        let file = read_points_json(&path).unwrap();
        assert_eq!(file.periodic, Some(false));
        assert_eq!(file.rows.len(), 3);
        fs::remove_file(&path).ok();
    }

    #[test]
    fn spec_file_reproduces_builtin_certificate() {
        let text = r#"{
            "scheme": "neg-13-21",
            "r0": 0.4,
            "C0_even": 0.16,
            "C0_odd": 0.16,
            "paths": {
                "even": {
                    "base": [0.0, 0.65, 0.35, 0.0],
                    "reference": {"type": "weighted-average", "i": 1, "j": 2, "beta": 0.35}
                },
                "odd": {
                    "base": [0.0, 0.35, 0.65, 0.0],
                    "reference": {"type": "weighted-average", "i": 1, "j": 2, "beta": 0.65}
                }
            }
        }"#;
        let parsed: CertificateSpecFile = serde_json::from_str(text).unwrap();
        let spec = parsed.into_spec().unwrap();
        assert_eq!(spec.even_path.offsets(), &[1.35, 0.35, 0.65, 1.65]);
        let cert = certify_scheme(&spec).unwrap();
        assert!(cert.is_certified());
        let report = CertificateReport::from(&cert);
        let json = serde_json::to_string(&report).unwrap();
        let back: CertificateReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.status, "certified");
        assert!((back.mu.unwrap() - cert.mu.unwrap()).abs() < 1e-15);
    }

    #[test]
    fn tighter_offsets_than_geometry_are_rejected() {
        let text = r#"{
            "scheme": "lane-riesenfeld-cubic",
            "r0": 0.25,
            "C0_even": 0.53,
            "C0_odd": 0.0,
            "paths": {
                "even": {
                    "base": [0.0, 1.0, 0.0],
                    "offsets": [0.5, 0.0, 0.5],
                    "reference": {"type": "input-point", "index": 1}
                },
                "odd": {
                    "base": [0.5, 0.5],
                    "reference": {"type": "geodesic-midpoint", "i": 0, "j": 1}
                }
            }
        }"#;
        let parsed: CertificateSpecFile = serde_json::from_str(text).unwrap();
        let err = parsed.into_spec().unwrap_err();
        assert!(matches!(err, FormatError::Spec(_)));
    }
}
