use hyperfit::continuum::NeoHookeParams;
use hyperfit::dataset::ExportMode;
use hyperfit::ddi::{run_ddi, DdiConfig, DdiInput, Formulation, StateCount};
use hyperfit::eval::ddi_r2;
use hyperfit::fem::{export_raw_data, solve_forward, DirichletBc, ExportSpec, LoadProgram};
use hyperfit::mesh::{generate_plate_mesh, HoleSpec};
use std::time::Instant;

fn main() {
    let p = NeoHookeParams::new(1.0, 0.3).unwrap();
    let t0 = Instant::now();
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
    println!(
        "mesh: {} elements, {} nodes ({:?})",
        mesh.num_elements(),
        mesh.num_nodes(),
        t0.elapsed()
    );
    let t0 = Instant::now();
    let loads = LoadProgram {
        n_snap: 10,
        dirichlet: vec![
            DirichletBc { set: "bottom".into(), comp: 1, value: 0.0 },
            DirichletBc { set: "bottom".into(), comp: 0, value: 0.0 },
            DirichletBc { set: "top".into(), comp: 1, value: 50.0 },
        ],
        tractions: vec![],
        driven_set: "top".into(),
        driven_comp: 1,
    };
    let snaps = solve_forward(&mesh, &loads, &p).unwrap();
    println!("forward solve: {:?}", t0.elapsed());
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
    let which = std::env::args().nth(1).unwrap_or_else(|| "base".into());
    match which.as_str() {
        "base" => {
            for formulation in [
                Formulation::UpdatedLagrangian,
                Formulation::TotalLagrangian,
                Formulation::AdaptedTotalLagrangian,
            ] {
                let t0 = Instant::now();
                let mut cfg = DdiConfig::new(formulation, 1.0, 3);
                cfg.n_star = StateCount::Ratio(0.01);
                let result = run_ddi(&input, &cfg).unwrap();
                let (mech, mat) = ddi_r2(&result, &p).unwrap();
                println!(
                    "{:>11}: iters={} minres={} converged={} elim={} R2_mech={:.5} R2_mat={:.5} eq_res={:.2e} ({:?})",
                    formulation.as_str(),
                    result.iterations,
                    result.minres_iterations,
                    result.converged,
                    result.eliminated_states,
                    mech.pooled,
                    mat.pooled,
                    result.equilibrium_residual,
                    t0.elapsed()
                );
            }
        }
        "ratio" => {
            for formulation in [
                Formulation::UpdatedLagrangian,
                Formulation::TotalLagrangian,
                Formulation::AdaptedTotalLagrangian,
            ] {
                for ratio in [1e-3, 5e-3, 1e-2, 5e-2] {
                    let t0 = Instant::now();
                    let mut cfg = DdiConfig::new(formulation, 1.0, 3);
                    cfg.n_star = StateCount::Ratio(ratio);
                    let result = run_ddi(&input, &cfg).unwrap();
                    let (mech, mat) = ddi_r2(&result, &p).unwrap();
                    println!(
                        "{:>11} ratio={ratio:.0e}: iters={} conv={} R2_mech={:.5} R2_mat={:.5} ({:?})",
                        formulation.as_str(),
                        result.iterations,
                        result.converged,
                        mech.pooled,
                        mat.pooled,
                        t0.elapsed()
                    );
                }
            }
        }
        "stiffness" => {
            for c_kpa in [1e1, 1e2, 1e3, 1e4, 1e5] {
                let t0 = Instant::now();
                let mut cfg = DdiConfig::new(Formulation::UpdatedLagrangian, c_kpa / 1000.0, 3);
                cfg.n_star = StateCount::Ratio(0.01);
                let result = run_ddi(&input, &cfg).unwrap();
                let (mech, mat) = ddi_r2(&result, &p).unwrap();
                println!(
                    "ul C={c_kpa:.0e} kPa: iters={} conv={} R2_mech={:.5} R2_mat={:.5} ({:?})",
                    result.iterations,
                    result.converged,
                    mech.pooled,
                    mat.pooled,
                    t0.elapsed()
                );
            }
        }
        other => panic!("unknown probe '{other}'"),
    }
}
