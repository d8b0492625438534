use hyperfit::continuum::NeoHookeParams;
use hyperfit::dataset::ExportMode;
use hyperfit::ddi::DdiInput;
use hyperfit::fem::{
    export_raw_data, extract_doi, solve_forward, DirichletBc, ExportSpec, LoadProgram,
};
use hyperfit::mesh::{generate_plate_mesh, HoleSpec};

fn main() {
    let elem: f64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(4.0);
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
        n_snap: 2,
        dirichlet: vec![
            DirichletBc { set: "bottom".into(), comp: 0, value: 0.0 },
            DirichletBc { set: "bottom".into(), comp: 1, value: 0.0 },
            DirichletBc { set: "top".into(), comp: 0, value: 0.0 },
            DirichletBc { set: "top".into(), comp: 1, value: 120.0 },
        ],
        tractions: vec![],
        driven_set: "top".into(),
        driven_comp: 1,
    };
    let snaps = solve_forward(&mesh, &loads, &p).unwrap();
    let (doi_mesh, doi_snaps) = extract_doi(&mesh, &snaps, &p, 65.0, 285.0).unwrap();
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
    println!(
        "elem={elem}: doi elements={} bottom nodes={} top nodes={}",
        doi_mesh.num_elements(),
        doi_mesh.boundary_set("bottom").unwrap().len(),
        doi_mesh.boundary_set("top").unwrap().len()
    );
    let (lo, hi) = doi_mesh.bounding_box();
    println!("bbox y: [{:.4}, {:.4}]", lo[1], hi[1]);

    let input = DdiInput::from_raw(&raw).unwrap();
    for tau in [0usize, 1] {
        let fe = &doi_snaps[tau];
        // Reconstructed vs exact forces at pi=1 nodes.
        let mut recon_sum = [0.0, 0.0];
        let mut exact_sum = [0.0, 0.0];
        let mut worst: (f64, usize) = (0.0, usize::MAX);
        for n in 0..doi_mesh.num_nodes() {
            if !input.pi[n] {
                continue;
            }
            let r = input.forces[tau][n];
            let e = fe.internal_forces[n];
            recon_sum[0] += r[0];
            recon_sum[1] += r[1];
            exact_sum[0] += e[0];
            exact_sum[1] += e[1];
            let d = ((r[0] - e[0]).powi(2) + (r[1] - e[1]).powi(2)).sqrt();
            if d > worst.0 {
                worst = (d, n);
            }
        }
        println!(
            "tau={tau}: global_force={:.4}; recon sum=({:.4},{:.4}) exact sum=({:.4},{:.4})",
            fe.global_force, recon_sum[0], recon_sum[1], exact_sum[0], exact_sum[1]
        );
        let n = worst.1;
        println!(
            "  worst node {n} at ({:.2},{:.2}): recon=({:.4},{:.4}) exact=({:.4},{:.4})",
            doi_mesh.node(n)[0],
            doi_mesh.node(n)[1],
            input.forces[tau][n][0],
            input.forces[tau][n][1],
            fe.internal_forces[n][0],
            fe.internal_forces[n][1]
        );
        // Largest exact interior force away from boundaries (should be ~0).
        let bottom: std::collections::BTreeSet<usize> =
            doi_mesh.boundary_set("bottom").unwrap().iter().copied().collect();
        let mut worst_int: (f64, usize) = (0.0, usize::MAX);
        for n in 0..doi_mesh.num_nodes() {
            if !input.pi[n] || bottom.contains(&n) {
                continue;
            }
            let e = fe.internal_forces[n];
            let d = (e[0].powi(2) + e[1].powi(2)).sqrt();
            if d > worst_int.0 {
                worst_int = (d, n);
            }
        }
        let n = worst_int.1;
        println!(
            "  worst interior |exact force| = {:.4e} at node {n} ({:.2},{:.2})",
            worst_int.0,
            doi_mesh.node(n)[0],
            doi_mesh.node(n)[1]
        );
    }
}
