use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use smf_droplet_cli::config::RunConfig;

fn reference() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/reference.conf")
}

fn smfdrop(sub: &str, config: &Path, overrides: &[String]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_smfdrop"));
    cmd.arg(sub)
        .arg("--config")
        .arg(config)
        .env("RUST_LOG", "warn");
    for o in overrides {
        cmd.arg("--override").arg(o);
    }
    cmd.output().unwrap()
}

/// Reference config without the Gaussian seed keys, for file seeds.
fn file_seeded(dir: &Path) -> PathBuf {
    let text: String = fs::read_to_string(reference())
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with("seed."))
        .map(|l| format!("{l}\n"))
        .collect();
    let path = dir.join("file_seed.conf");
    fs::write(&path, text + "seed.profile = file\n").unwrap();
    path
}

fn overrides(dir: &Path, extra: &[&str]) -> Vec<String> {
    let mut v = vec![format!("output_dir={}", dir.display())];
    v.extend(extra.iter().map(|s| s.to_string()));
    v
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Small periodic box where the droplet reaches the boundary guard quickly.
const SMALL_BOX: &[&str] = &[
    "grid.n_points=128",
    "grid.length=12.566370614359172",
    "evolution.dt=2",
    "evolution.t_final=2e5",
    "evolution.snapshot_stride=1000",
    "a_bar=3e-5",
    "seed.relax=false",
    "seed.width=0.56",
];

#[test]
fn predict_reports_derived_quantities() {
    let o = smfdrop("predict", &reference(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = String::from_utf8(o.stdout).unwrap();
    let value = |key: &str| -> f64 {
        let line = out
            .lines()
            .find(|l| l.starts_with(&format!("{key} = ")))
            .unwrap_or_else(|| panic!("{key} missing in\n{out}"));
        line.split_whitespace().nth(2).unwrap().parse().unwrap()
    };
    assert!((value("p_th") - 2.0 * 1.14e-5 / (100.0 * 0.99)).abs() < 1e-20);
    assert!((value("predicted_width") - 0.5638).abs() < 1e-3);
    assert!((value("t_limit") - 4.408e5).abs() < 1e2);
    assert!((value("expected_gradient") - 1.81e-11).abs() < 0.03 * 1.81e-11);
}

#[test]
fn invalid_reflectivity_is_a_config_error_naming_the_key() {
    let o = smfdrop("predict", &reference(), &["mirror_R=1.5".into()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("mirror_R"), "{}", stderr(&o));
}

#[test]
fn unknown_key_is_a_config_error() {
    let o = smfdrop("predict", &reference(), &["evolution.dtt=1".into()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("evolution.dtt"));
}

#[test]
fn missing_config_file_is_a_config_error() {
    let o = smfdrop("run", Path::new("/nonexistent/smfdrop.conf"), &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn exceeding_the_heating_budget_aborts() {
    let dir = tempfile::tempdir().unwrap();
    let o = smfdrop(
        "run",
        &reference(),
        &overrides(dir.path(), &["evolution.t_final=5e5"]),
    );
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("t_limit"));
    assert!(!dir.path().join(".lock").exists());
}

#[test]
fn boundary_guard_aborts_with_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let mut extra = SMALL_BOX.to_vec();
    extra.push("mode=evolve");
    let o = smfdrop("run", &reference(), &overrides(dir.path(), &extra));
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let series = fs::read_to_string(dir.path().join("timeseries.csv")).unwrap();
    assert!(series.lines().count() > 3);
    assert!(dir.path().join("manifest.txt").exists());
}

#[test]
fn unconverged_relaxation_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let o = smfdrop(
        "run",
        &reference(),
        &overrides(
            dir.path(),
            &["mode=ground_state", "ground_state.max_steps=10"],
        ),
    );
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn locked_output_directory_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join(".lock"), "1\n").unwrap();
    let o = smfdrop(
        "run",
        &reference(),
        &overrides(dir.path(), &["mode=predict"]),
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("locked"));
}

#[test]
fn manifest_holds_the_canonical_config() {
    let dir = tempfile::tempdir().unwrap();
    let o = smfdrop(
        "run",
        &reference(),
        &overrides(dir.path(), &["mode=predict", "a_bar=2e-5"]),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let manifest = fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
    let config: String = manifest
        .lines()
        .filter(|l| !l.starts_with("derived.") && !l.starts_with("result."))
        .map(|l| format!("{l}\n"))
        .collect();
    let parsed = RunConfig::parse(&config, &[]).unwrap();
    assert_eq!(parsed.params.a_bar, 2e-5);
    assert_eq!(
        parsed.canonical(),
        RunConfig::parse(&parsed.canonical(), &[])
            .unwrap()
            .canonical()
    );
    assert!(manifest.contains("derived.p_th = "));
    assert!(manifest.contains("2*omega_r_bar/(b0*mirror_R)"));
}

#[test]
fn ground_state_file_seeds_a_later_run() {
    let dir = tempfile::tempdir().unwrap();
    let gs_dir = dir.path().join("gs");
    let o = smfdrop(
        "run",
        &reference(),
        &overrides(&gs_dir, &["mode=ground_state"]),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let snap = gs_dir.join("ground_state.csv");
    let text = fs::read_to_string(&snap).unwrap();
    let header = text.lines().find(|l| l.starts_with("x_bar")).unwrap();
    assert_eq!(
        header,
        "x_bar,re_psi,im_psi,density,forward_intensity,backward_intensity"
    );

    let run_dir = dir.path().join("evolve");
    let path = format!("seed.path={}", snap.display());
    let o = smfdrop(
        "run",
        &file_seeded(dir.path()),
        &overrides(
            &run_dir,
            &[
                "mode=evolve",
                "seed.relax=false",
                &path,
                "evolution.dt=1",
                "evolution.t_final=2e3",
                "evolution.snapshot_stride=500",
                "a_bar=0",
            ],
        ),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let index = fs::read_to_string(run_dir.join("snapshots/index.csv")).unwrap();
    assert_eq!(index.lines().count(), 1 + 5);
    let series = fs::read_to_string(run_dir.join("timeseries.csv")).unwrap();
    let widths: Vec<f64> = series
        .lines()
        .skip(2)
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    for w in &widths {
        assert!((w - widths[0]).abs() < 0.01 * widths[0], "{widths:?}");
    }
}

#[test]
fn seed_file_on_a_different_grid_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "x_bar,re_psi,im_psi\n0,1,0\n").unwrap();
    let path = format!("seed.path={}", bad.display());
    let o = smfdrop(
        "run",
        &file_seeded(dir.path()),
        &overrides(&dir.path().join("out"), &["mode=ground_state", &path]),
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("seed.path"));
}

#[test]
fn convergence_prints_the_halving_table() {
    let o = smfdrop(
        "convergence",
        &reference(),
        &["convergence.t_final=2e3".into()],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.starts_with("dt,relative_change\n"));
    assert!(out.contains("converged = true"));
}
