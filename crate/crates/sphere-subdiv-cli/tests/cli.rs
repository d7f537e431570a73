//! End-to-end tests of the command line binary: every subcommand, the exit
//! code contract, and determinism of the emitted reports.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sphere-subdiv"))
}

/// Fresh scratch directory for one test, cleaned up from earlier runs.
fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("sphere-subdiv-cli-{name}"));
    if dir.exists() {
        fs::remove_dir_all(&dir).expect("clear scratch dir");
    }
    fs::create_dir_all(&dir).expect("create scratch dir");
    dir
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("process exited with a code")
}

/// Closed m-gon around the north pole whose edges all have geodesic length
/// `edge`, written as CSV.
fn polygon_csv(path: &Path, sides: usize, edge: f64) {
    // On a geodesic circle of radius rho, consecutive vertices at planar
    // angle 2*pi/m sit at distance d with
    // cos d = cos^2 rho + sin^2 rho * cos(2*pi/m).
    let m = sides as f64;
    let angle = 2.0 * std::f64::consts::PI / m;
    let sin_rho = ((1.0 - edge.cos()) / (1.0 - angle.cos())).sqrt();
    assert!(sin_rho < 1.0, "edge too long for this vertex count");
    let rho = sin_rho.asin();
    let mut rows = Vec::new();
    for i in 0..sides {
        let t = angle * i as f64;
        let (x, y, z) = (
            rho.sin() * t.cos(),
            rho.sin() * t.sin(),
            rho.cos(),
        );
        rows.push(format!("{x},{y},{z}"));
    }
    fs::write(path, rows.join("\n") + "\n").expect("write polygon");
}

fn csv_rows(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .expect("read csv")
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(str::to_owned)
        .collect()
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).expect("read json")).expect("parse json")
}

#[test]
fn subdivide_hexagon_five_levels() {
    let dir = scratch("subdivide-hexagon");
    let input = dir.join("hexagon.csv");
    polygon_csv(&input, 6, 0.2);
    let out_dir = dir.join("out");

    let out = bin()
        .args(["subdivide", "--scheme", "lane-riesenfeld-cubic", "--iterations", "5"])
        .arg("--input")
        .arg(&input)
        .arg("--output")
        .arg(&out_dir)
        .output()
        .expect("run subdivide");
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));

    let finest = csv_rows(&out_dir.join("level-05.csv"));
    assert_eq!(finest.len(), 192, "6 * 2^5 points on the finest level");

    let diag = read_json(&out_dir.join("diagnostics.json"));
    assert_eq!(diag["schema_version"], 1);
    assert_eq!(diag["boundary"], "closed");
    let counts: Vec<u64> = diag["point_counts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_u64().unwrap())
        .collect();
    assert_eq!(counts, vec![6, 12, 24, 48, 96, 192]);
    let ratios = diag["contraction_ratios"].as_array().unwrap();
    assert_eq!(ratios.len(), 5);
    for r in ratios {
        let r = r.as_f64().unwrap();
        assert!(r <= 0.89, "contraction ratio {r} above the certified factor");
    }
    let delta0 = diag["deltas"][0].as_f64().unwrap();
    assert!((delta0 - 0.2).abs() < 1e-12, "input mesh size should be 0.2, got {delta0}");
}

#[test]
fn subdivide_constant_polygon_is_fixed() {
    let dir = scratch("subdivide-constant");
    let input = dir.join("constant.csv");
    let row = "0.6,0.48,0.6400000000000001";
    fs::write(&input, format!("{row}\n").repeat(6)).unwrap();
    let out_dir = dir.join("out");

    let out = bin()
        .args(["subdivide", "--scheme", "lane-riesenfeld-cubic", "--iterations", "3"])
        .arg("--input")
        .arg(&input)
        .arg("--output")
        .arg(&out_dir)
        .output()
        .expect("run subdivide");
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));

    let finest = csv_rows(&out_dir.join("level-03.csv"));
    assert_eq!(finest.len(), 48);
    for line in &finest {
        assert_eq!(line, row, "every refined point must equal the input point");
    }
    let diag = read_json(&out_dir.join("diagnostics.json"));
    for r in diag["contraction_ratios"].as_array().unwrap() {
        assert_eq!(r.as_f64().unwrap(), 0.0);
    }
    for d in diag["displacements"].as_array().unwrap() {
        assert_eq!(d.as_f64().unwrap(), 0.0);
    }
}

#[test]
fn subdivide_rejects_mesh_above_certified_radius() {
    let dir = scratch("subdivide-gate");
    let input = dir.join("big.csv");
    polygon_csv(&input, 4, 1.2);
    let out_dir = dir.join("out");

    let out = bin()
        .args(["subdivide", "--scheme", "neg-13-21"])
        .arg("--input")
        .arg(&input)
        .arg("--output")
        .arg(&out_dir)
        .output()
        .expect("run subdivide");
    assert_eq!(exit_code(&out), 1);
    let err = stderr_of(&out);
    assert!(
        err.contains("not below the certified radius 0.4"),
        "stderr should report the gate: {err}"
    );
    assert!(err.contains("widest edge"), "stderr should locate the edge: {err}");
    assert!(err.contains("hint:"), "stderr should carry a remediation hint: {err}");
}

#[test]
fn subdivide_open_polyline_truncates() {
    let dir = scratch("subdivide-open");
    let input = dir.join("hexagon.csv");
    polygon_csv(&input, 6, 0.2);
    let out_dir = dir.join("out");

    let out = bin()
        .args([
            "subdivide",
            "--scheme",
            "lane-riesenfeld-cubic",
            "--iterations",
            "2",
            "--open",
            "--format",
            "json",
        ])
        .arg("--input")
        .arg(&input)
        .arg("--output")
        .arg(&out_dir)
        .output()
        .expect("run subdivide");
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));

    let level1 = read_json(&out_dir.join("level-01.json"));
    assert_eq!(level1["periodic"], false);
    assert_eq!(level1["points"].as_array().unwrap().len(), 9);
    let level2 = read_json(&out_dir.join("level-02.json"));
    assert_eq!(level2["points"].as_array().unwrap().len(), 15);
    let diag = read_json(&out_dir.join("diagnostics.json"));
    assert_eq!(diag["boundary"], "open");
}

#[test]
fn subdivide_accepts_custom_mask_file() {
    let dir = scratch("subdivide-mask-file");
    let input = dir.join("hexagon.csv");
    polygon_csv(&input, 6, 0.2);
    let mask = dir.join("midpoint.json");
    fs::write(&mask, r#"{"first": 0, "coeffs": [0.5, 1.0, 0.5]}"#).unwrap();
    let out_dir = dir.join("out");

    let out = bin()
        .args(["subdivide", "--iterations", "2"])
        .arg("--mask-file")
        .arg(&mask)
        .arg("--input")
        .arg(&input)
        .arg("--output")
        .arg(&out_dir)
        .output()
        .expect("run subdivide");
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));
    // Geodesic midpoint insertion halves the mesh size on a closed polygon.
    let diag = read_json(&out_dir.join("diagnostics.json"));
    for r in diag["contraction_ratios"].as_array().unwrap() {
        let r = r.as_f64().unwrap();
        assert!((r - 0.5).abs() < 0.02, "midpoint scheme ratio near 0.5, got {r}");
    }
}

#[test]
fn certify_small_radius_variant() {
    let dir = scratch("certify-small-radius");
    let report_path = dir.join("cert.json");
    let out = bin()
        .args([
            "certify",
            "--scheme",
            "lane-riesenfeld-cubic",
            "--r0",
            "0.25",
            "--c0-even",
            "0.53",
        ])
        .arg("--output")
        .arg(&report_path)
        .output()
        .expect("run certify");
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));

    let report = read_json(&report_path);
    assert_eq!(report["status"], "certified");
    assert_eq!(report["r0"].as_f64().unwrap(), 0.25);
    let mu = report["mu"].as_f64().unwrap();
    assert!((mu - 0.885481191977).abs() < 1e-9, "mu = {mu}");
    let c1 = report["even"]["c1"].as_f64().unwrap();
    assert!((c1 - 0.516825590358).abs() < 1e-9, "c1 = {c1}");
}

#[test]
fn certify_builtin_large_radius_variant() {
    let out = bin()
        .args(["certify", "--scheme", "lane-riesenfeld-cubic"])
        .output()
        .expect("run certify");
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));
    let text = stdout_of(&out);
    assert!(text.contains("radius 0.6"), "stdout: {text}");
    assert!(text.contains("certified"), "stdout: {text}");
}

#[test]
fn certify_four_point_low_constant_names_the_failed_inequality() {
    let out = bin()
        .args(["certify", "--scheme", "four-point", "--c0-odd", "0.26"])
        .output()
        .expect("run certify");
    assert_eq!(exit_code(&out), 1);
    let err = stderr_of(&out);
    assert!(
        err.contains("contraction fixed-point gate"),
        "stderr must name the failed inequality: {err}"
    );
    assert!(err.contains("0.26"), "stderr should echo the constant: {err}");
}

#[test]
fn certify_radius_one_fails_well_definedness() {
    let out = bin()
        .args(["certify", "--scheme", "lane-riesenfeld-cubic", "--r0", "1.0"])
        .output()
        .expect("run certify");
    assert_eq!(exit_code(&out), 1);
    let err = stderr_of(&out);
    assert!(
        err.contains("well-definedness"),
        "stderr must name the failed gate: {err}"
    );
}

#[test]
fn certify_accepts_spec_file() {
    let dir = scratch("certify-spec-file");
    let spec_path = dir.join("spec.json");
    fs::write(
        &spec_path,
        r#"{
            "scheme": "lane-riesenfeld-cubic",
            "r0": 0.25,
            "C0_even": 0.53,
            "C0_odd": 0.0,
            "paths": {
                "even": {"base": [0.0, 1.0, 0.0],
                         "reference": {"type": "input-point", "index": 1}},
                "odd": {"base": [0.5, 0.5],
                        "reference": {"type": "geodesic-midpoint", "i": 0, "j": 1}}
            }
        }"#,
    )
    .unwrap();
    let report_path = dir.join("cert.json");
    let out = bin()
        .arg("certify")
        .arg("--spec")
        .arg(&spec_path)
        .arg("--output")
        .arg(&report_path)
        .output()
        .expect("run certify");
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));
    let report = read_json(&report_path);
    let mu = report["mu"].as_f64().unwrap();
    assert!((mu - 0.885481191977).abs() < 1e-9, "mu = {mu}");
}

#[test]
fn validate_small_run_passes() {
    let dir = scratch("validate-small");
    let report_path = dir.join("validation.json");
    let out = bin()
        .args([
            "validate",
            "--polygons",
            "5",
            "--roundtrips",
            "50",
            "--derivative-configs",
            "5",
            "--mean-instances",
            "2",
        ])
        .arg("--output")
        .arg(&report_path)
        .output()
        .expect("run validate");
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));

    let report = read_json(&report_path);
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["seed"], 7);
    let checks = report["checks"].as_array().unwrap();
    assert!(checks.len() >= 8, "expected the full check battery");
    for check in checks {
        assert_eq!(
            check["failures"].as_u64().unwrap(),
            0,
            "check {} reported failures",
            check["name"]
        );
    }
}

#[test]
fn validate_reports_are_deterministic() {
    let dir = scratch("validate-determinism");
    let args = [
        "validate",
        "--seed",
        "123",
        "--polygons",
        "3",
        "--roundtrips",
        "30",
        "--derivative-configs",
        "3",
        "--mean-instances",
        "1",
    ];
    let first = dir.join("first.json");
    let second = dir.join("second.json");
    for path in [&first, &second] {
        let out = bin().args(args).arg("--output").arg(path).output().unwrap();
        assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));
    }
    assert_eq!(
        fs::read(&first).unwrap(),
        fs::read(&second).unwrap(),
        "same seed and sizes must give byte-identical reports"
    );
}

#[test]
fn render_polygon_only() {
    let dir = scratch("render-polygon");
    let input = dir.join("hexagon.csv");
    polygon_csv(&input, 6, 0.2);
    let svg_path = dir.join("out.svg");

    let out = bin()
        .arg("render")
        .arg("--input")
        .arg(&input)
        .arg("--output")
        .arg(&svg_path)
        .output()
        .expect("run render");
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));

    let svg = fs::read_to_string(&svg_path).unwrap();
    assert_eq!(svg.matches("<circle").count(), 1, "one sphere outline");
    assert_eq!(svg.matches("<path").count(), 1, "polygon only at k = 0");
    assert!(svg.contains(" Z\""), "closed polygon path must be closed");
}

#[test]
fn render_refined_curve_and_determinism() {
    let dir = scratch("render-refined");
    let input = dir.join("hexagon.csv");
    polygon_csv(&input, 6, 0.2);
    let first = dir.join("a.svg");
    let second = dir.join("b.svg");

    for path in [&first, &second] {
        let out = bin()
            .args(["render", "--scheme", "lane-riesenfeld-cubic", "--iterations", "5"])
            .arg("--input")
            .arg(&input)
            .arg("--output")
            .arg(path)
            .output()
            .expect("run render");
        assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));
    }

    let svg = fs::read_to_string(&first).unwrap();
    assert_eq!(svg.matches("<circle").count(), 1);
    assert_eq!(svg.matches("<path").count(), 2, "polygon plus refined curve");
    assert_eq!(
        fs::read(&first).unwrap(),
        fs::read(&second).unwrap(),
        "same input and view must give byte-identical SVGs"
    );
}

#[test]
fn render_open_polyline_has_open_path() {
    let dir = scratch("render-open");
    let input = dir.join("hexagon.csv");
    polygon_csv(&input, 6, 0.2);
    let svg_path = dir.join("out.svg");

    let out = bin()
        .args(["render", "--open"])
        .arg("--input")
        .arg(&input)
        .arg("--output")
        .arg(&svg_path)
        .output()
        .expect("run render");
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));
    let svg = fs::read_to_string(&svg_path).unwrap();
    assert!(!svg.contains(" Z\""), "open polyline path must stay open");
}

#[test]
fn render_rejects_higher_dimensions() {
    let dir = scratch("render-dim");
    let input = dir.join("points4.csv");
    fs::write(&input, "1,0,0,0\n0,1,0,0\n0,0,1,0\n").unwrap();
    let svg_path = dir.join("out.svg");

    let out = bin()
        .arg("render")
        .arg("--input")
        .arg(&input)
        .arg("--output")
        .arg(&svg_path)
        .output()
        .expect("run render");
    assert_eq!(exit_code(&out), 2, "stderr: {}", stderr_of(&out));
    assert!(stderr_of(&out).contains("dimension"));
}

#[test]
fn schemes_lists_builtins() {
    let out = bin().arg("schemes").output().expect("run schemes");
    assert_eq!(exit_code(&out), 0);
    let text = stdout_of(&out);
    for name in ["lane-riesenfeld-cubic", "four-point", "neg-13-21"] {
        assert!(text.contains(name), "missing {name} in: {text}");
    }
    assert!(text.contains("contraction factor"));
}

#[test]
fn missing_input_is_a_usage_error() {
    let dir = scratch("missing-input");
    let out = bin()
        .args(["subdivide", "--scheme", "lane-riesenfeld-cubic"])
        .arg("--input")
        .arg(dir.join("does-not-exist.csv"))
        .arg("--output")
        .arg(dir.join("out"))
        .output()
        .expect("run subdivide");
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn unknown_scheme_is_a_usage_error() {
    let dir = scratch("unknown-scheme");
    let input = dir.join("hexagon.csv");
    polygon_csv(&input, 6, 0.2);
    let out = bin()
        .args(["subdivide", "--scheme", "no-such-scheme"])
        .arg("--input")
        .arg(&input)
        .arg("--output")
        .arg(dir.join("out"))
        .output()
        .expect("run subdivide");
    assert_eq!(exit_code(&out), 2, "stderr: {}", stderr_of(&out));
}

#[test]
fn bad_flags_exit_with_usage_code() {
    let out = bin().args(["subdivide", "--no-such-flag"]).output().unwrap();
    assert_eq!(exit_code(&out), 2);
}
