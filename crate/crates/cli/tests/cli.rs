use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn frontlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_frontlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

const CROSS_CTB: &str = "[ctb]
name = cross
domain = flat_torus
u_period = 2*pi
v_period = 2*pi
p11 = sin(u)
p12 = 0
p21 = 0
p22 = sin(v)
omega_u = 0
omega_v = 0
";

#[test]
fn gallery_list_names_every_entry() {
    let out = frontlab(&["gallery", "list"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 10);
    assert!(text.lines().any(|l| l == "wavy-parallel-torus"));
}

#[test]
fn analyze_swallowtail_reports_one_a3_at_origin() {
    let out = frontlab(&["analyze", "gallery:swallowtail"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["schema"], "frontlab-report");
    assert_eq!(r["kind"], "analysis");
    assert_eq!(r["body"]["counts"]["a3"], 1);
    let v = &r["body"]["vertices"][0];
    assert_eq!(v["verdict"], "A3");
    let p = v["point"].as_array().unwrap();
    assert!(p[0].as_f64().unwrap().abs() < 1e-8 && p[1].as_f64().unwrap().abs() < 1e-8);
}

#[test]
fn analyze_immersed_torus_has_empty_singular_set() {
    let r = json(&frontlab(&["analyze", "gallery:torus-immersed"]));
    assert_eq!(r["body"]["counts"]["curves"], 0);
    assert_eq!(r["body"]["vertices"].as_array().unwrap().len(), 0);
}

#[test]
fn bad_expression_exits_with_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.spec");
    fs::write(
        &path,
        "[surface]\nname = bad\ndomain = rectangle\nu_range = -1, 1\nv_range = -1, 1\nx = u+*v\ny = v\nz = 0\nnu_x = 0\nnu_y = 0\nnu_z = 1\n",
    )
    .unwrap();
    let out = frontlab(&["analyze", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("syntax error at byte 2"), "{err}");
}

#[test]
fn unknown_gallery_entry_is_an_input_error() {
    assert_eq!(frontlab(&["analyze", "gallery:nope"]).status.code(), Some(1));
}

#[test]
fn invalid_tolerance_is_an_input_error() {
    let out = frontlab(&["analyze", "gallery:cuspidal-edge", "--tol-nondeg", "0"]);
    assert_eq!(out.status.code(), Some(1));
    let out = frontlab(&["analyze", "gallery:cuspidal-edge", "--grid", "4"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn global_gb_passes_on_tori() {
    for name in ["gallery:parallel-torus", "gallery:torus-immersed"] {
        let out = frontlab(&["gb", name, "--global"]);
        assert_eq!(out.status.code(), Some(0), "{name}");
        let r = json(&out);
        assert_eq!(r["kind"], "gb-global");
        assert_eq!(r["body"]["pass"], true);
        let res = r["body"]["residual_eq_a"].as_f64().unwrap();
        let budget = r["body"]["budget_eq_a"].as_f64().unwrap();
        assert!(res.abs() < budget, "{name}: {res} vs {budget}");
    }
}

#[test]
fn global_gb_on_a_window_is_rejected() {
    assert_eq!(
        frontlab(&["gb", "gallery:swallowtail", "--global"]).status.code(),
        Some(1)
    );
}

#[test]
fn rank_zero_crossings_violate_the_hypothesis() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cross.spec");
    fs::write(&path, CROSS_CTB).unwrap();
    let out = frontlab(&["gb", path.to_str().unwrap(), "--global"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn local_gb_on_cuspidal_edge_triangles() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tri.json");
    fs::write(
        &path,
        r#"[
  {"name": "plus", "vertices": [[0.2, -0.3], [0.8, -0.3], [0.5, 0.4]]},
  {"name": "on-sigma", "vertices": [[0.0, -0.5], [0.6, 0.0], [0.0, 0.5]],
   "edges": ["segment", "segment", "singular"]}
]"#,
    )
    .unwrap();
    let out = frontlab(&["gb", "gallery:cuspidal-edge", "--local", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    let body = r["body"].as_array().unwrap();
    assert_eq!(body.len(), 2);
    for t in body {
        assert!(t["residual"].as_f64().unwrap().abs() < t["budget"].as_f64().unwrap());
    }
}

#[test]
fn local_gb_rejects_a_clockwise_triangle() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tri.json");
    fs::write(&path, r#"{"vertices": [[0.2, -0.3], [0.5, 0.4], [0.8, -0.3]]}"#).unwrap();
    let out = frontlab(&["gb", "gallery:cuspidal-edge", "--local", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn mesh_export_has_n_squared_vertices() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sw.obj");
    let out = frontlab(&[
        "export",
        "gallery:swallowtail",
        "--what",
        "mesh",
        "-o",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 40000);
    assert_eq!(text.lines().filter(|l| l.starts_with("#@ ")).count(), 40000);
    assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), 199 * 199);
}

#[test]
fn double_swallowtail_curves_form_four_branches() {
    let out = frontlab(&["export", "gallery:double-swallowtail", "--what", "singular-curves"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("curve,t,u,v,lambda"));
    let mut curves: Vec<&str> = lines.map(|l| l.split(',').next().unwrap()).collect();
    curves.dedup();
    assert_eq!(curves.len(), 4);
}

#[test]
fn csv_format_matches_singular_curve_export() {
    let a = frontlab(&["analyze", "gallery:swallowtail", "--format", "csv"]);
    let b = frontlab(&["export", "gallery:swallowtail", "--what", "singular-curves"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn reports_are_byte_identical_across_runs_and_thread_counts() {
    let args = ["export", "gallery:scherbak", "--what", "report"];
    let a = frontlab(&args);
    let b = Command::new(env!("CARGO_BIN_EXE_frontlab"))
        .args(args)
        .env("FRONTLAB_THREADS", "1")
        .output()
        .unwrap();
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["kind"], "analysis");
}

#[test]
fn gallery_run_checks_expectations() {
    let out = frontlab(&["gallery", "run", "cuspidal-edge", "swallowtail", "cuspidal-lips"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    let body = r["body"].as_array().unwrap();
    assert_eq!(body.len(), 3);
    assert!(body
        .iter()
        .all(|o| o["pass"] == true && !o["checks"].as_array().unwrap().is_empty()));
}

#[test]
fn gallery_spec_round_trips_through_analyze() {
    let out = frontlab(&["gallery", "spec", "swallowtail"]);
    assert!(out.status.success());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sw.spec");
    fs::write(&path, &out.stdout).unwrap();
    let r = json(&frontlab(&["analyze", path.to_str().unwrap()]));
    assert_eq!(r["body"]["counts"]["a3"], 1);
}

#[test]
fn output_file_receives_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = frontlab(&["analyze", "gallery:cuspidal-edge", "-o", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(r["body"]["counts"]["curves"], 1);
}
