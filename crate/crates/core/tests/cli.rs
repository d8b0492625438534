//! End-to-end exercise of the command-line interface on a small problem.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hyperfit"))
}

fn run_ok(cmd: &mut Command) -> String {
    let out = cmd.output().expect("spawn hyperfit");
    let stdout = String::from_utf8_lossy(&out.stdout).to_string();
    let stderr = String::from_utf8_lossy(&out.stderr).to_string();
    assert!(
        out.status.success(),
        "command failed\nstdout: {stdout}\nstderr: {stderr}"
    );
    stdout
}

fn write_config(dir: &Path) -> PathBuf {
    let cfg = "
seed = 5

[geometry]
width = 30 mm
height = 30 mm
elem_size = 2.5 mm
thickness = 5 mm
hole = 15 15 6 4 20

[load]
snapshots = 2
stretch = 6 mm

[ddi]
nstar_ratio = 0.02
pseudo_stiffness = 1 MPa

[pann]
width = 4
restarts = 2
max_iters = 500
";
    let path = dir.join("config.txt");
    std::fs::write(&path, cfg).unwrap();
    path
}

#[test]
fn cli_stage_by_stage_and_pipeline() {
    let dir = std::env::temp_dir().join(format!("hyperfit-cli-{}", std::process::id()));
    std::fs::remove_dir_all(&dir).ok();
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = write_config(&dir);

    // generate -> noise -> ddi -> train -> eval, directory by directory.
    let raw = dir.join("raw");
    run_ok(bin()
        .arg("generate")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&raw));
    assert!(raw.join("dataset.txt").exists());
    assert!(raw.join("mesh.txt").exists());
    assert!(raw.join("snapshot_0001.txt").exists());

    let noisy = dir.join("noisy");
    run_ok(bin()
        .arg("noise")
        .arg("--in")
        .arg(&raw)
        .arg("--out")
        .arg(&noisy)
        .args(["--eta", "1e-4", "--omega", "1e-4", "--grid", "256", "--seed", "5"]));
    assert!(noisy.join("dataset.txt").exists());

    let ddi = dir.join("ddi");
    let stdout = run_ok(bin()
        .arg("ddi")
        .arg("--in")
        .arg(&noisy)
        .args(["--formulation", "ul", "--nstar-ratio", "0.02"])
        .args(["--pseudo-stiffness", "1", "--seed", "5"])
        .arg("--out")
        .arg(&ddi));
    assert!(stdout.contains("identified"), "{stdout}");
    assert!(ddi.join("database.txt").exists());
    assert!(ddi.join("mech_states.txt").exists());
    assert!(ddi.join("zeta_forces.txt").exists());

    let model = dir.join("pann").join("model.pann");
    std::fs::create_dir_all(model.parent().unwrap()).unwrap();
    run_ok(bin()
        .arg("train")
        .arg("--db")
        .arg(ddi.join("database.txt"))
        .args(["--width", "4", "--restarts", "2", "--max-iters", "500", "--seed", "5"])
        .arg("--out")
        .arg(&model));
    assert!(model.exists());

    let eval = dir.join("eval");
    let stdout = run_ok(bin()
        .arg("eval")
        .arg("--ddi")
        .arg(&ddi)
        .arg("--model")
        .arg(&model)
        .arg("--out")
        .arg(&eval));
    assert!(stdout.contains("R2"), "{stdout}");
    assert!(eval.join("r2.csv").exists());
    assert!(eval.join("paths.csv").exists());

    // Full pipeline in one command; metrics land in the manifest.
    let pipe = dir.join("pipe");
    let stdout = run_ok(bin()
        .arg("pipeline")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&pipe));
    assert!(stdout.contains("ddi.r2_mat"), "{stdout}");
    assert!(pipe.join("manifest.txt").exists());

    // Sweep over the pseudo stiffness, one formulation.
    let sweep = dir.join("sweep");
    let stdout = run_ok(bin()
        .arg("sweep")
        .arg("--config")
        .arg(&cfg)
        .args(["--param", "pseudo-stiffness", "--values", "0.5,1.0"])
        .args(["--formulations", "ul"])
        .arg("--out")
        .arg(&sweep));
    assert!(stdout.contains("r2_mat") || stdout.contains("parameter"), "{stdout}");
    let csv = std::fs::read_to_string(sweep.join("sweep_pseudo-stiffness.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3, "{csv}");

    // Generating from an explicit mesh file.
    let mesh_out = dir.join("mesh-gen");
    run_ok(bin()
        .arg("generate")
        .arg("--config")
        .arg(&cfg)
        .arg("--mesh")
        .arg(raw.join("mesh.txt"))
        .arg("--out")
        .arg(&mesh_out));
    assert!(mesh_out.join("dataset.txt").exists());

    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn cli_reports_config_errors() {
    let dir = std::env::temp_dir().join(format!("hyperfit-cli-err-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.txt");
    std::fs::write(&bad, "[noise]\neta = -1\nbogus = 2\n").unwrap();
    let out = bin()
        .arg("pipeline")
        .arg("--config")
        .arg(&bad)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("eta"), "{stderr}");
    assert!(stderr.contains("bogus"), "{stderr}");
    std::fs::remove_dir_all(&dir).ok();
}
