use std::path::Path;
use std::process::{Command, Output};

use dslab_cli::config::{InitialData, ScenarioConfig};
use dslab_cli::{evolve, export, surface, verify, CliError};

fn dslab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dslab"))
        .args(args)
        .current_dir(dir)
        .env_remove("DSLAB_OUT")
        .output()
        .expect("binary runs")
}

fn small(initial: InitialData) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::default();
    cfg.grid.nx = 16;
    cfg.grid.ny = 16;
    cfg.initial = initial;
    cfg
}

fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect()
}

#[test]
fn plane_surface_has_flat_coordinates() {
    let tmp = tempfile::tempdir().unwrap();
    let r = surface::cmd_surface(&small(InitialData::Plane), tmp.path()).unwrap();
    assert_eq!(r.path_independence, 0.0);
    let text = std::fs::read_to_string(tmp.path().join("surface.csv")).unwrap();
    assert!(text.starts_with("x,y,X1,X2,X3,X4\n"));
    for row in csv_rows(&text) {
        let (x, y) = (row[0], row[1]);
        assert!((row[2] + y).abs() < 1e-12, "X1 = -y");
        assert!((row[3] + x).abs() < 1e-12, "X2 = -x");
        assert!(row[4].abs() < 1e-12 && row[5].abs() < 1e-12);
    }
}

#[test]
fn wave_obj_connectivity_and_projection() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = small(InitialData::default());
    cfg.grid.nx = 12;
    cfg.grid.ny = 10;
    cfg.output.projection = [1, 2, 4];
    surface::cmd_surface(&cfg, tmp.path()).unwrap();
    let obj = std::fs::read_to_string(tmp.path().join("surface.obj")).unwrap();
    assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 12 * 10);
    assert_eq!(
        obj.lines().filter(|l| l.starts_with("f ")).count(),
        2 * 11 * 9
    );
    assert!(obj.starts_with("# surface projection onto X1 X2 X4"));
    let rows = csv_rows(&std::fs::read_to_string(tmp.path().join("surface.csv")).unwrap());
    let v: Vec<f64> = obj
        .lines()
        .find(|l| l.starts_with("v "))
        .unwrap()
        .split_whitespace()
        .skip(1)
        .map(|c| c.parse().unwrap())
        .collect();
    assert_eq!(v, vec![rows[0][2], rows[0][3], rows[0][5]]);
    let geo: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("geometry.json")).unwrap())
            .unwrap();
    assert!(geo["curvature_residual"].as_f64().unwrap() < 1e-6);
    assert!(geo["conformal_factor_min"].as_f64().unwrap() > 0.0);
}

#[test]
fn fixed_point_gives_flat_drift() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = small(InitialData::Plane);
    cfg.flow.steps = 5;
    let m = evolve::cmd_evolve(&cfg, tmp.path()).unwrap();
    assert_eq!(m.records, 6);
    assert_eq!(m.drift.w_drift, 0.0);
    assert!(m.drift.j_drift.iter().all(|&d| d == 0.0));
    let lines = std::fs::read_to_string(tmp.path().join("diagnostics.jsonl")).unwrap();
    assert_eq!(lines.lines().count(), 6);
    let first: serde_json::Value = serde_json::from_str(lines.lines().next().unwrap()).unwrap();
    assert!(first.get("W").is_some() && first.get("J").is_some());
}

#[test]
fn zero_steps_write_single_records() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = small(InitialData::default());
    cfg.flow.steps = 0;
    let m = evolve::cmd_evolve(&cfg, tmp.path()).unwrap();
    assert_eq!(m.records, 1);
    let csv = std::fs::read_to_string(tmp.path().join("drift.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    let svg = std::fs::read_to_string(tmp.path().join("willmore_drift.svg")).unwrap();
    assert!(svg.contains("</svg>") && !svg.contains("NaN"));
}

#[test]
fn wave_level_two_keeps_willmore() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = small(InitialData::default());
    cfg.grid.nx = 32;
    cfg.grid.ny = 32;
    let m = evolve::cmd_evolve(&cfg, tmp.path()).unwrap();
    assert!(m.drift.w_drift < 1e-5);
    assert!(m.drift.dirac_residual_max < 1e-6);
}

#[test]
fn snapshots_are_written() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = small(InitialData::Profile {
        eta0: 0.4,
        amp: 0.3,
        kappa: 1.0,
    });
    cfg.flow.steps = 4;
    cfg.flow.snapshot_stride = 2;
    let m = evolve::cmd_evolve(&cfg, tmp.path()).unwrap();
    assert_eq!(m.snapshots.len(), 3);
    for s in &m.snapshots {
        assert!(tmp.path().join(s).is_file());
    }
}

#[test]
fn divergence_reports_the_step() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = small(InitialData::default());
    cfg.flow.blowup = 0.5;
    let err = evolve::cmd_evolve(&cfg, tmp.path()).unwrap_err();
    assert_eq!(err.exit_code(), 1);
    assert!(err.to_string().contains("step 1"), "{err}");
}

#[test]
fn export_reproduces_run_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let mut cfg = small(InitialData::Profile {
        eta0: 0.4,
        amp: 0.3,
        kappa: 1.0,
    });
    cfg.flow.steps = 10;
    evolve::cmd_evolve(&cfg, dir).unwrap();
    surface::cmd_surface(&cfg, dir).unwrap();
    let read = |n: &str| std::fs::read(dir.join(n)).unwrap();
    let (w, j, obj) = (
        read("willmore_drift.svg"),
        read("j_drift.svg"),
        read("surface.obj"),
    );
    std::fs::remove_file(dir.join("surface.obj")).unwrap();
    let files = export::cmd_export(dir, cfg.output.projection).unwrap();
    assert_eq!(files.len(), 3);
    assert_eq!(read("willmore_drift.svg"), w);
    assert_eq!(read("j_drift.svg"), j);
    assert_eq!(read("surface.obj"), obj);
    let rows = std::fs::read_to_string(dir.join("surface.csv"))
        .unwrap()
        .lines()
        .count()
        - 1;
    let verts = String::from_utf8(obj)
        .unwrap()
        .lines()
        .filter(|l| l.starts_with("v "))
        .count();
    assert_eq!(rows, verts);
}

#[test]
fn export_rejects_missing_and_corrupt_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = export::cmd_export(&tmp.path().join("none"), [1, 2, 3]).unwrap_err();
    assert_eq!(missing.exit_code(), 2);
    assert!(matches!(
        export::cmd_export(tmp.path(), [1, 2, 3]),
        Err(CliError::Config(_))
    ));
    std::fs::write(tmp.path().join("drift.csv"), "garbage\n").unwrap();
    assert!(export::cmd_export(tmp.path(), [1, 2, 3]).is_err());
}

#[test]
fn lift_scenario_from_files() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let spec = dslab_core::GridSpec::square(16).unwrap();
    let theta = dslab_core::ComplexField::zeros(spec);
    let eta = dslab_core::ComplexField::from_real_fn(spec, |x, _| 0.5 + 0.2 * x.sin());
    std::fs::write(dir.join("theta.csv"), theta.to_csv()).unwrap();
    std::fs::write(dir.join("eta.csv"), eta.to_csv()).unwrap();
    std::fs::write(
        dir.join("lift.toml"),
        "[grid]\nnx = 16\nny = 16\n[initial]\nkind = \"lift\"\ntheta = \"theta.csv\"\neta = \"eta.csv\"\n",
    )
    .unwrap();
    let cfg = ScenarioConfig::load(&dir.join("lift.toml")).unwrap();
    cfg.validate().unwrap();
    let r = surface::cmd_surface(&cfg, &dir.join("out")).unwrap();
    assert!(r.closedness < 1e-8, "{r:?}");
}

#[test]
fn verify_manifest_is_deterministic_in_process() {
    let mut cfg = ScenarioConfig::default();
    cfg.grid.nx = 16;
    cfg.grid.ny = 16;
    let a = serde_json::to_string(&verify::run_suite(&cfg).unwrap()).unwrap();
    let b = serde_json::to_string(&verify::run_suite(&cfg).unwrap()).unwrap();
    assert_eq!(a, b);
    cfg.seed += 1;
    let c = serde_json::to_string(&verify::run_suite(&cfg).unwrap()).unwrap();
    assert_ne!(a, c);
}

#[test]
fn binary_exit_codes_and_out_override() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let ok = dslab(&["surface", "--grid", "16,16", "--out", "s"], dir);
    assert_eq!(
        ok.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&ok.stderr)
    );
    assert!(dir.join("s/surface.obj").is_file());

    let env = Command::new(env!("CARGO_BIN_EXE_dslab"))
        .args(["surface", "--grid", "16,16", "--out", "ignored"])
        .current_dir(dir)
        .env("DSLAB_OUT", "from-env")
        .output()
        .unwrap();
    assert_eq!(env.status.code(), Some(0));
    assert!(dir.join("from-env/surface.csv").is_file());
    assert!(!dir.join("ignored").exists());

    assert_eq!(
        dslab(&["verify", "--config", "nope.toml"], dir)
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        dslab(&["verify", "--grid", "banana"], dir).status.code(),
        Some(2)
    );
    assert_eq!(
        dslab(&["evolve", "--level", "4"], dir).status.code(),
        Some(2)
    );
    assert_eq!(
        dslab(&["verify", "--a3-variant", "v2"], dir).status.code(),
        Some(2)
    );
    std::fs::write(dir.join("bad.toml"), "[grid]\nnx = 0\n").unwrap();
    assert_eq!(
        dslab(&["surface", "--config", "bad.toml"], dir)
            .status
            .code(),
        Some(2)
    );

    let printed = dslab(&["verify", "--a3-variant", "printed", "--out", "p"], dir);
    assert_eq!(printed.status.code(), Some(1));
    let m: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("p/verify.json")).unwrap()).unwrap();
    assert_eq!(m["a3_variant"], "printed");
    assert_eq!(m["a3_finding"]["resolved"], "v1");
}
