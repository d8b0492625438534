use hyperfit::continuum::NeoHookeParams;
use hyperfit::dataset::ExportMode;
use hyperfit::fem::{
    export_raw_data, extract_doi, solve_forward, DirichletBc, ExportSpec, LoadProgram,
};
use hyperfit::mesh::{generate_plate_mesh, HoleSpec};

fn main() {
    let p = NeoHookeParams::new(1.0, 0.3).unwrap();
    for elem in [1.8, 2.2] {
        for stretch in [40.0, 70.0, 100.0] {
            let mesh = generate_plate_mesh(
                100.0,
                350.0,
                &[
                    HoleSpec { cx: 38.0, cy: 198.0, a: 18.0, b: 13.0, angle_deg: -25.0 },
                    HoleSpec { cx: 68.0, cy: 148.0, a: 14.0, b: 10.0, angle_deg: 15.0 },
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
            let snaps = match solve_forward(&mesh, &loads, &p) {
                Ok(s) => s,
                Err(e) => {
                    println!("elem={elem} stretch={stretch}: forward failed: {e}");
                    continue;
                }
            };
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
            let mut max_rel = 0.0_f64;
            let mut lam_min = f64::INFINITY;
            for (snap, fe) in raw.snapshots.iter().zip(&doi_snaps) {
                let hq = match &snap.thickness {
                    hyperfit::dataset::Thickness::Nodes(h) => raw.mesh.project_to_quadpoints(h),
                    _ => unreachable!(),
                };
                for (a, l) in hq.iter().zip(&fe.lambda3) {
                    max_rel = max_rel.max((a - l * 5.0).abs() / (l * 5.0));
                    lam_min = lam_min.min(*l);
                }
            }
            println!(
                "elem={elem} stretch={stretch}: doi_elems={} proj_err={:.4} lam3_min={:.3}",
                doi_mesh.num_elements(),
                max_rel,
                lam_min
            );
        }
    }
}
