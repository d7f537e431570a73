//! Command line front end: subdivision runs, certificate checks, the seeded
//! self-check suite, and SVG rendering.
//!
//! Exit codes: 0 on success (and for certified certificates), 1 when a
//! domain check fails (mesh-size gate, failed certificate, failed
//! validation), 2 for usage and file errors.

mod svg;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sphere_subdiv::certify::{
    builtin_certificate_spec, certify_scheme, Certificate, CertifyError, SchemeCertificateSpec,
};
use sphere_subdiv::formats::{
    self, CertificateReport, FormatError, SubdivisionReport,
};
use sphere_subdiv::mean::SolverSettings;
use sphere_subdiv::schemes::{
    builtin_mask, diagnostics, iterate, BoundaryRule, Mask, PointSequence, SchemeError,
};
use sphere_subdiv::validate::{run_validation, ValidateError, ValidationSettings, DEFAULT_SEED};

#[derive(Parser)]
#[command(
    name = "sphere-subdiv",
    version,
    about = "Subdivision schemes on the unit sphere with certified convergence"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Refine a point sequence and write per-level point files plus a
    /// diagnostics report
    Subdivide {
        /// Built-in scheme name (see `schemes`), or four-point(w) for a
        /// custom tension
        #[arg(long, conflicts_with = "mask_file")]
        scheme: Option<String>,
        /// JSON mask file: {"first": INDEX, "coeffs": [...]}
        #[arg(long)]
        mask_file: Option<PathBuf>,
        /// Input point file (.csv or .json)
        #[arg(long)]
        input: PathBuf,
        /// Output directory for level files and diagnostics.json
        #[arg(long)]
        output: PathBuf,
        /// Refinement levels
        #[arg(long, default_value_t = 1)]
        iterations: usize,
        /// Treat the input as an open polyline instead of a closed polygon
        #[arg(long)]
        open: bool,
        /// Mesh-size gate; defaults to the certified radius for built-in
        /// schemes and to none for custom masks
        #[arg(long)]
        max_delta: Option<f64>,
        /// Output format for level files
        #[arg(long, default_value = "csv", value_parser = ["csv", "json"])]
        format: String,
    },
    /// Check a convergence certificate and write the report
    Certify {
        /// Built-in scheme name
        #[arg(long, conflicts_with = "spec")]
        scheme: Option<String>,
        /// Certificate spec file (JSON)
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Where to write the certificate report (JSON)
        #[arg(long)]
        output: Option<PathBuf>,
        /// Override the certified mesh-size radius
        #[arg(long)]
        r0: Option<f64>,
        /// Override the starting contraction constant of the even rule
        #[arg(long)]
        c0_even: Option<f64>,
        /// Override the starting contraction constant of the odd rule
        #[arg(long)]
        c0_odd: Option<f64>,
        /// Evaluation grid step on the homotopy parameter
        #[arg(long)]
        grid_step: Option<f64>,
    },
    /// Run the seeded self-check suite and write the validation report
    Validate {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Random closed polygons per built-in scheme
        #[arg(long, default_value_t = 1000)]
        polygons: usize,
        /// Refinement levels per polygon
        #[arg(long, default_value_t = 4)]
        levels: usize,
        /// Samples in the exp/log round-trip check
        #[arg(long, default_value_t = 1000)]
        roundtrips: usize,
        /// Configurations in the finite-difference checks
        #[arg(long, default_value_t = 100)]
        derivative_configs: usize,
        /// Instances in the grid-search mean check
        #[arg(long, default_value_t = 20)]
        mean_instances: usize,
        /// Where to write the validation report (JSON)
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Render a point sequence on the 2-sphere (and optionally its
    /// refinement) to an SVG file
    Render {
        /// Built-in scheme name; required when iterations > 0
        #[arg(long)]
        scheme: Option<String>,
        /// Input point file (.csv or .json)
        #[arg(long)]
        input: PathBuf,
        /// Output SVG file
        #[arg(long)]
        output: PathBuf,
        /// Refinement levels to draw on top of the input polygon
        #[arg(long, default_value_t = 0)]
        iterations: usize,
        /// Treat the input as an open polyline instead of a closed polygon
        #[arg(long)]
        open: bool,
        /// View direction as "x,y,z" (default: the diagonal)
        #[arg(long)]
        view: Option<String>,
        /// Mesh-size gate; defaults to the certified radius for built-in
        /// schemes
        #[arg(long)]
        max_delta: Option<f64>,
    },
    /// List built-in schemes and their certified constants
    Schemes,
}

enum Failure {
    /// A domain check failed: gate violation, failed certificate, failed
    /// validation. Exit code 1.
    Domain(String),
    /// Bad arguments or file problems. Exit code 2.
    Usage(String),
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<SchemeError> for Failure {
    fn from(e: SchemeError) -> Self {
        match e {
            SchemeError::UnknownScheme(_) => Failure::Usage(e.to_string()),
            SchemeError::DeltaExceedsRadius { .. } | SchemeError::GateViolation { .. } => {
                Failure::Domain(format!(
                    "{e}\nhint: reduce the mesh size below the certified radius, for example by scaling the polygon toward its center or inserting intermediate points"
                ))
            }
            other => Failure::Domain(other.to_string()),
        }
    }
}

impl From<CertifyError> for Failure {
    fn from(e: CertifyError) -> Self {
        match e {
            CertifyError::BadPath(_)
            | CertifyError::BadParameters(_)
            | CertifyError::NoBuiltinCertificate(_) => Failure::Usage(e.to_string()),
            other => Failure::Domain(other.to_string()),
        }
    }
}

impl From<ValidateError> for Failure {
    fn from(e: ValidateError) -> Self {
        Failure::Domain(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Subdivide {
            scheme,
            mask_file,
            input,
            output,
            iterations,
            open,
            max_delta,
            format,
        } => cmd_subdivide(
            scheme, mask_file, &input, &output, iterations, open, max_delta, &format,
        ),
        Command::Certify {
            scheme,
            spec,
            output,
            r0,
            c0_even,
            c0_odd,
            grid_step,
        } => cmd_certify(scheme, spec, output, r0, c0_even, c0_odd, grid_step),
        Command::Validate {
            seed,
            polygons,
            levels,
            roundtrips,
            derivative_configs,
            mean_instances,
            output,
        } => cmd_validate(ValidationSettings {
            seed,
            polygons,
            levels,
            roundtrip_samples: roundtrips,
            derivative_configs,
            mean_instances,
        }, output),
        Command::Render {
            scheme,
            input,
            output,
            iterations,
            open,
            view,
            max_delta,
        } => cmd_render(scheme, &input, &output, iterations, open, view, max_delta),
        Command::Schemes => cmd_schemes(),
    }
}

/// Resolves the mask and, for built-ins with one, the scheme certificate.
fn resolve_scheme(
    scheme: Option<&str>,
    mask_file: Option<&Path>,
) -> Result<(Mask<f64>, Option<Certificate>), Failure> {
    let mask = match (scheme, mask_file) {
        (Some(name), None) => builtin_mask(name)?,
        (None, Some(path)) => formats::read_mask(path)?,
        (None, None) => {
            return Err(Failure::Usage(
                "pass --scheme <name> or --mask-file <path>".into(),
            ))
        }
        (Some(_), Some(_)) => unreachable!("clap rejects the combination"),
    };
    let certificate = scheme
        .and_then(|name| builtin_certificate_spec(name).ok())
        .map(|spec| certify_scheme(&spec))
        .transpose()?
        .filter(Certificate::is_certified);
    Ok((mask, certificate))
}

fn read_sequence(
    input: &Path,
    open: bool,
) -> Result<(PointSequence<f64>, Vec<String>), Failure> {
    let file = formats::read_points(input)?;
    let boundary = if open || file.periodic == Some(false) {
        BoundaryRule::Truncate
    } else {
        BoundaryRule::Periodic
    };
    let (seq, warnings) = formats::to_sequence(&file.rows, boundary)?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    Ok((seq, warnings))
}

#[allow(clippy::too_many_arguments)]
fn cmd_subdivide(
    scheme: Option<String>,
    mask_file: Option<PathBuf>,
    input: &Path,
    output: &Path,
    iterations: usize,
    open: bool,
    max_delta: Option<f64>,
    format: &str,
) -> Result<(), Failure> {
    if iterations < 1 {
        return Err(Failure::Usage("--iterations must be at least 1".into()));
    }
    let (mask, certificate) = resolve_scheme(scheme.as_deref(), mask_file.as_deref())?;
    let (seq, warnings) = read_sequence(input, open)?;
    let boundary = seq.boundary();
    let gate = max_delta.or(certificate.as_ref().map(|c| c.r0));

    let levels = iterate(&mask, seq, iterations, &SolverSettings::default(), gate)?;
    let diag = diagnostics(&levels)?;

    fs::create_dir_all(output).map_err(|e| {
        Failure::Usage(format!("{}: {e}", output.display()))
    })?;
    for (k, level) in levels.iter().enumerate() {
        let file = output.join(format!("level-{k:02}.{format}"));
        match format {
            "json" => formats::write_points_json(&file, level)?,
            _ => formats::write_points_csv(&file, level)?,
        }
    }
    let report = SubdivisionReport {
        schema_version: 1,
        scheme: mask.name().unwrap_or("custom").to_string(),
        levels: iterations,
        boundary: match boundary {
            BoundaryRule::Periodic => "closed".to_string(),
            BoundaryRule::Truncate => "open".to_string(),
        },
        certified_radius: certificate.as_ref().map(|c| c.r0),
        certified_mu: certificate.as_ref().and_then(|c| c.mu),
        certified_displacement: certificate.as_ref().and_then(|c| c.displacement_coeff),
        point_counts: levels.iter().map(PointSequence::len).collect(),
        deltas: diag.deltas.clone(),
        contraction_ratios: diag.contraction_ratios.clone(),
        displacements: diag.displacements.clone(),
        displacement_ratios: diag.displacement_ratios.clone(),
        warnings,
    };
    let report_path = output.join("diagnostics.json");
    formats::write_json(&report_path, &report)?;

    for (k, level) in levels.iter().enumerate() {
        if k == 0 {
            println!("level {k}: {} points, delta {:.6}", level.len(), diag.deltas[k]);
        } else {
            println!(
                "level {k}: {} points, delta {:.6}, ratio {:.6}, displacement {:.6}",
                level.len(),
                diag.deltas[k],
                diag.contraction_ratios[k - 1],
                diag.displacements[k - 1]
            );
        }
    }
    if let (Some(mu), Some(r0)) = (
        certificate.as_ref().and_then(|c| c.mu),
        certificate.as_ref().map(|c| c.r0),
    ) {
        println!("certified: radius {r0}, contraction factor {mu:.6}");
    }
    println!("wrote {} level files and {}", levels.len(), report_path.display());
    Ok(())
}

fn apply_overrides(
    mut spec: SchemeCertificateSpec,
    r0: Option<f64>,
    c0_even: Option<f64>,
    c0_odd: Option<f64>,
    grid_step: Option<f64>,
) -> SchemeCertificateSpec {
    if let Some(r0) = r0 {
        spec.r0 = r0;
    }
    if let Some(c) = c0_even {
        spec.c0_even = c;
    }
    if let Some(c) = c0_odd {
        spec.c0_odd = c;
    }
    if let Some(h) = grid_step {
        spec.grid_step = h;
    }
    spec
}

fn cmd_certify(
    scheme: Option<String>,
    spec_path: Option<PathBuf>,
    output: Option<PathBuf>,
    r0: Option<f64>,
    c0_even: Option<f64>,
    c0_odd: Option<f64>,
    grid_step: Option<f64>,
) -> Result<(), Failure> {
    let spec = match (scheme, spec_path) {
        (Some(name), None) => builtin_certificate_spec(&name)?,
        (None, Some(path)) => formats::read_certificate_spec(&path)?,
        _ => {
            return Err(Failure::Usage(
                "pass --scheme <built-in name> or --spec <file>".into(),
            ))
        }
    };
    let spec = apply_overrides(spec, r0, c0_even, c0_odd, grid_step);
    let cert = certify_scheme(&spec)?;
    let report = CertificateReport::from(&cert);
    if let Some(path) = &output {
        formats::write_json(path, &report)?;
    }

    println!("scheme: {} (radius {})", cert.scheme, cert.r0);
    for (label, rule) in [("even", &cert.even), ("odd", &cert.odd)] {
        if let Some(rule) = rule {
            println!(
                "  {label} rule: contraction constant {:.9} (one pass {:.9}), initial speed {:.9}, distance coefficient {:.9}",
                rule.c1, rule.c1_one_pass, rule.initial_speed_coeff, rule.distance_coeff
            );
        }
    }
    for entry in &cert.audit {
        println!(
            "  [{}] {}: {:.9} {} {:.9}",
            if entry.holds { "ok" } else { "FAIL" },
            entry.label,
            entry.lhs,
            entry.relation,
            entry.rhs
        );
    }
    if let (Some(mu), Some(c)) = (&cert.mu, &cert.displacement_coeff) {
        println!("  contraction factor {mu:.9}, displacement coefficient {c:.9}");
    }
    if let Some(path) = &output {
        println!("wrote {}", path.display());
    }
    if cert.is_certified() {
        println!("certified");
        Ok(())
    } else {
        Err(Failure::Domain(format!(
            "certificate failed: {}",
            report.failure.unwrap_or_else(|| "unknown".into())
        )))
    }
}

fn cmd_validate(
    settings: ValidationSettings,
    output: Option<PathBuf>,
) -> Result<(), Failure> {
    let report = run_validation(&settings)?;
    if let Some(path) = &output {
        formats::write_json(path, &report)?;
    }
    println!("seed: {}", report.seed);
    for check in &report.checks {
        println!(
            "  [{}] {}: {} cases, {} failures, tolerance {:e}, worst {:e}",
            if check.passed() { "ok" } else { "FAIL" },
            check.name,
            check.cases,
            check.failures,
            check.tolerance,
            check.worst
        );
        if let Some(detail) = &check.detail {
            println!("        {detail}");
        }
    }
    if let Some(path) = &output {
        println!("wrote {}", path.display());
    }
    if report.all_passed() {
        println!("all checks passed");
        Ok(())
    } else {
        Err(Failure::Domain("validation checks failed".into()))
    }
}

fn parse_view(view: Option<&str>) -> Result<[f64; 3], Failure> {
    let Some(text) = view else {
        return Ok(svg::default_view());
    };
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 3 {
        return Err(Failure::Usage(format!(
            "--view needs three comma-separated numbers, got '{text}'"
        )));
    }
    let mut v = [0.0f64; 3];
    for (slot, part) in v.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("cannot parse '{part}' in --view")))?;
    }
    Ok(v)
}

fn cmd_render(
    scheme: Option<String>,
    input: &Path,
    output: &Path,
    iterations: usize,
    open: bool,
    view: Option<String>,
    max_delta: Option<f64>,
) -> Result<(), Failure> {
    let view = parse_view(view.as_deref())?;
    let (seq, _) = read_sequence(input, open)?;
    let refined = if iterations == 0 {
        None
    } else {
        let Some(name) = scheme.as_deref() else {
            return Err(Failure::Usage(
                "--scheme is required when --iterations > 0".into(),
            ));
        };
        let (mask, certificate) = resolve_scheme(Some(name), None)?;
        let gate = max_delta.or(certificate.as_ref().map(|c| c.r0));
        let mut levels = iterate(
            &mask,
            seq.clone(),
            iterations,
            &SolverSettings::default(),
            gate,
        )?;
        levels.pop()
    };
    let svg_text = svg::render(&seq, refined.as_ref(), view)
        .map_err(|e| match e {
            svg::RenderError::DimensionUnsupported(_) => Failure::Usage(e.to_string()),
            svg::RenderError::DegenerateEdge(_) => Failure::Domain(e.to_string()),
        })?;
    fs::write(output, svg_text)
        .map_err(|e| Failure::Usage(format!("{}: {e}", output.display())))?;
    println!("wrote {}", output.display());
    Ok(())
}

fn cmd_schemes() -> Result<(), Failure> {
    for name in sphere_subdiv::validate::BUILTIN_SCHEMES {
        let mask = builtin_mask(name)?;
        let coeffs: Vec<String> = mask
            .coefficients()
            .iter()
            .map(|c| format!("{c}"))
            .collect();
        println!("{name}");
        println!(
            "  mask: first index {}, coefficients [{}]",
            mask.first_index(),
            coeffs.join(", ")
        );
        let spec = builtin_certificate_spec(name)?;
        let cert = certify_scheme(&spec)?;
        match (cert.mu, cert.displacement_coeff) {
            (Some(mu), Some(c)) if cert.is_certified() => println!(
                "  certified: radius {}, contraction factor {mu:.6}, displacement coefficient {c:.6}",
                cert.r0
            ),
            _ => println!("  no certificate"),
        }
    }
    println!("four-point(w) is also accepted for a custom tension w (no certificate)");
    Ok(())
}
