use hyperfit::continuum::NeoHookeParams;
use hyperfit::dataset::ExportMode;
use hyperfit::ddi::{run_ddi, DdiConfig, DdiInput, Formulation, StateCount};
use hyperfit::eval::{ddi_r2, estimate_stiffness_from_dataset};
use hyperfit::fem::{
    export_raw_data, extract_doi, solve_forward, DirichletBc, ExportSpec, LoadProgram,
};
use hyperfit::mesh::{generate_plate_mesh, HoleSpec};
use hyperfit::noise::{apply_noise, NoiseConfig};
use std::time::Instant;

fn main() {
    let eta: f64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(0.0);
    let stretch: f64 = std::env::args()
        .nth(2)
        .and_then(|s| s.parse().ok())
        .unwrap_or(175.0);
    let elem: f64 = std::env::args()
        .nth(3)
        .and_then(|s| s.parse().ok())
        .unwrap_or(3.3);
    let p = NeoHookeParams::new(1.0, 0.3).unwrap();
    let mesh = generate_plate_mesh(
        100.0,
        350.0,
        &[
            HoleSpec { cx: 36.0, cy: 198.0, a: 12.0, b: 7.0, angle_deg: -25.0 },
            HoleSpec { cx: 66.0, cy: 152.0, a: 10.0, b: 6.0, angle_deg: 15.0 },
        ],
        elem,
        5.0,
    )
    .unwrap();
    let loads = LoadProgram {
        n_snap: 10,
        dirichlet: vec![
            DirichletBc { set: "bottom".into(), comp: 0, value: 0.0 },
            DirichletBc { set: "bottom".into(), comp: 1, value: 0.0 },
            DirichletBc { set: "top".into(), comp: 0, value: 0.0 },
            DirichletBc { set: "top".into(), comp: 1, value: stretch },
        ],
        tractions: vec![],
        driven_set: "top".into(),
        driven_comp: 1,
    };
    let t0 = Instant::now();
    let snaps = solve_forward(&mesh, &loads, &p).unwrap();
    let (doi_mesh, doi_snaps) = extract_doi(&mesh, &snaps, &p, 65.0, 285.0).unwrap();
    println!("forward+cut: {:?}, {} elements", t0.elapsed(), doi_mesh.num_elements());
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
    let estimate = estimate_stiffness_from_dataset(&raw).unwrap();
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
    let t0 = Instant::now();
    let result = run_ddi(&input, &cfg).unwrap();
    let (mech, mat) = ddi_r2(&result, &p).unwrap();
    println!(
        "stretch={stretch} elem={elem} eta={eta:.0e}: iters={} minres={} conv={} R2_mech={:.5} R2_mat={:.5} ({:?})",
        result.iterations,
        result.minres_iterations,
        result.converged,
        mech.pooled,
        mat.pooled,
        t0.elapsed()
    );
}
