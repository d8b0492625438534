use hyperfit::continuum::NeoHookeParams;
use hyperfit::dataset::{ExportMode, RawDataset};
use hyperfit::ddi::{run_ddi, DdiConfig, DdiInput, Formulation, StateCount};
use hyperfit::eval::{
    ddi_r2, estimate_stiffness_from_dataset, stress_path_compare, DeformationPath,
};
use hyperfit::fem::{export_raw_data, extract_doi, solve_forward, DirichletBc, ExportSpec, LoadProgram};
use hyperfit::mesh::{generate_plate_mesh, HoleSpec};
use hyperfit::noise::{apply_noise, NoiseConfig};
use hyperfit::pann::{train, Dataset, TrainConfig};
use std::time::Instant;

fn main() {
    let p = NeoHookeParams::new(1.0, 0.3).unwrap();
    let t0 = Instant::now();
    let mesh = generate_plate_mesh(
        100.0,
        300.0,
        &[
            HoleSpec { cx: 35.0, cy: 160.0, a: 16.0, b: 9.0, angle_deg: -25.0 },
            HoleSpec { cx: 68.0, cy: 115.0, a: 13.0, b: 8.0, angle_deg: 15.0 },
        ],
        3.5,
        5.0,
    )
    .unwrap();
    println!("full mesh: {} elements", mesh.num_elements());
    let loads = LoadProgram {
        n_snap: 10,
        dirichlet: vec![
            DirichletBc { set: "bottom".into(), comp: 0, value: 0.0 },
            DirichletBc { set: "bottom".into(), comp: 1, value: 0.0 },
            DirichletBc { set: "top".into(), comp: 0, value: 0.0 },
            DirichletBc { set: "top".into(), comp: 1, value: 210.0 },
        ],
        tractions: vec![],
        driven_set: "top".into(),
        driven_comp: 1,
    };
    let snaps = solve_forward(&mesh, &loads, &p).unwrap();
    println!("forward: {:?} (F_max = {:.3} N)", t0.elapsed(), snaps.last().unwrap().global_force);
    let (doi_mesh, doi_snaps) = extract_doi(&mesh, &snaps, &p, 40.0, 260.0).unwrap();
    println!("doi mesh: {} elements, {} nodes", doi_mesh.num_elements(), doi_mesh.num_nodes());
    let raw = export_raw_data(
        &doi_mesh,
        &doi_snaps,
        &ExportSpec {
            mode: ExportMode::Realistic,
            zeta_set: "top".into(),
            force_set: "bottom".into(),
            material: Some((1.0, 0.3)),
        },
    )
    .unwrap();

    // Thickness projection error (ideal vs realistic chain).
    let mut max_rel = 0.0_f64;
    for (snap, fe) in raw.snapshots.iter().zip(&doi_snaps) {
        let hq = match &snap.thickness {
            hyperfit::dataset::Thickness::Nodes(h) => raw.mesh.project_to_quadpoints(h),
            _ => unreachable!(),
        };
        for (a, l) in hq.iter().zip(&fe.lambda3) {
            max_rel = max_rel.max((a - l * 5.0).abs() / (l * 5.0));
        }
    }
    println!("thickness projection chain max rel error: {:.4}", max_rel);

    let estimate = estimate_stiffness_from_dataset(&raw).unwrap();
    println!("stiffness estimate: {estimate:.5} MPa -> pseudo stiffness {:.3}", 10.0 * estimate);

    let mut db_for_eta = Vec::new();
    for eta in [0.0, 1e-5, 1e-4, 5e-4] {
        let t0 = Instant::now();
        let mut noisy = raw.clone();
        apply_noise(
            &mut noisy,
            &NoiseConfig {
                omega: 1e-4,
                eta,
                delta_x: 100.0,
                grid_n: 1024,
                ell: 1.0 / 1024.0,
                seed: 7,
            },
        )
        .unwrap();
        let input = DdiInput::from_raw(&noisy).unwrap();
        let mut cfg = DdiConfig::new(Formulation::UpdatedLagrangian, 10.0 * estimate, 7);
        cfg.n_star = StateCount::Ratio(0.01);
        let result = run_ddi(&input, &cfg).unwrap();
        let (mech, mat) = ddi_r2(&result, &p).unwrap();
        println!(
            "eta={eta:6.0e}: iters={} conv={} R2_mech={:.5} R2_mat={:.5} ({:?})",
            result.iterations, result.converged, mech.pooled, mat.pooled, t0.elapsed()
        );
        if eta == 0.0 || eta == 5e-4 {
            db_for_eta.push((eta, result.database.clone()));
        }
    }

    for (eta, db) in &db_for_eta {
        let t0 = Instant::now();
        let mut dataset = Dataset::from_database(db).unwrap();
        dataset.shuffle_split(0.7, 7).unwrap();
        let report = train(
            &dataset,
            &TrainConfig {
                width: 8,
                lambda_gr: 0.01 * estimate,
                restarts: 5,
                max_iters: 2000,
                seed: 7,
            },
        )
        .unwrap();
        let errors = stress_path_compare(&report.model, &p, &DeformationPath::ALL, (0.8, 1.4), 25).unwrap();
        print!(
            "eta={eta:6.0e}: test_r2={:.5} cal_mse={:.3e} ({:?})",
            report.test_r2, report.calibration_mse, t0.elapsed()
        );
        for e in errors {
            print!("  {}={:.4}", e.path.as_str(), e.max_rel);
        }
        println!();
    }
}
