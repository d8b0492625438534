use hyperfit::continuum::NeoHookeParams;
use hyperfit::dataset::ExportMode;
use hyperfit::ddi::{run_ddi, DdiConfig, DdiInput, Formulation, StateCount};
use hyperfit::eval::{stress_path_compare, DeformationPath};
use hyperfit::fem::{export_raw_data, solve_forward, DirichletBc, ExportSpec, LoadProgram};
use hyperfit::mesh::{generate_plate_mesh, HoleSpec};
use hyperfit::pann::{train, Dataset, TrainConfig};

fn main() {
    let p = NeoHookeParams::new(1.0, 0.3).unwrap();
    let mesh = generate_plate_mesh(
        100.0,
        100.0,
        &[
            HoleSpec { cx: 35.0, cy: 62.0, a: 16.0, b: 9.0, angle_deg: -25.0 },
            HoleSpec { cx: 68.0, cy: 30.0, a: 13.0, b: 8.0, angle_deg: 15.0 },
        ],
        2.8,
        5.0,
    )
    .unwrap();
    let loads = LoadProgram {
        n_snap: 10,
        dirichlet: vec![
            DirichletBc { set: "bottom".into(), comp: 0, value: 0.0 },
            DirichletBc { set: "bottom".into(), comp: 1, value: 0.0 },
            DirichletBc { set: "top".into(), comp: 1, value: 50.0 },
        ],
        tractions: vec![],
        driven_set: "top".into(),
        driven_comp: 1,
    };
    let snaps = solve_forward(&mesh, &loads, &p).unwrap();
    let raw = export_raw_data(
        &mesh,
        &snaps,
        &ExportSpec {
            mode: ExportMode::Ideal,
            zeta_set: "top".into(),
            force_set: "bottom".into(),
            material: Some((1.0, 0.3)),
        },
    )
    .unwrap();
    let input = DdiInput::from_raw(&raw).unwrap();
    let mut cfg = DdiConfig::new(Formulation::UpdatedLagrangian, 10.0, 3);
    cfg.n_star = StateCount::Ratio(0.01);
    let result = run_ddi(&input, &cfg).unwrap();
    println!("database ready: {} states", result.database.len());

    for lambda_gr in [0.01, 0.005, 0.002, 0.001] {
        for (iters, restarts) in [(2000usize, 5usize), (6000, 8)] {
            let mut dataset = Dataset::from_database(&result.database).unwrap();
            dataset.shuffle_split(0.7, 7).unwrap();
            let report = train(
                &dataset,
                &TrainConfig {
                    width: 8,
                    lambda_gr,
                    restarts,
                    max_iters: iters,
                    seed: 7,
                },
            )
            .unwrap();
            let errors =
                stress_path_compare(&report.model, &p, &DeformationPath::ALL, (0.8, 1.4), 25)
                    .unwrap();
            let worst = errors.iter().map(|e| e.max_rel).fold(0.0_f64, f64::max);
            print!(
                "lgr={lambda_gr:5} iters={iters} restarts={restarts}: mse={:.3e} r2={:.5} worst={worst:.4}",
                report.calibration_mse, report.test_r2
            );
            for e in errors {
                print!("  {}={:.4}", e.path.as_str(), e.max_rel);
            }
            println!();
        }
    }
}
