use hyperfit::continuum::NeoHookeParams;
use hyperfit::dataset::ExportMode;
use hyperfit::fem::{
    export_raw_data, extract_doi, solve_forward, DirichletBc, ExportSpec, LoadProgram,
};
use hyperfit::mesh::{generate_plate_mesh, HoleSpec};

fn main() {
    let p = NeoHookeParams::new(1.0, 0.3).unwrap();
    let mesh = generate_plate_mesh(
        100.0,
        350.0,
        &[
            HoleSpec { cx: 38.0, cy: 198.0, a: 18.0, b: 13.0, angle_deg: -25.0 },
            HoleSpec { cx: 68.0, cy: 148.0, a: 14.0, b: 10.0, angle_deg: 15.0 },
        ],
        2.2,
        5.0,
    )
    .unwrap();
    let loads = LoadProgram {
        n_snap: 2,
        dirichlet: vec![
            DirichletBc { set: "bottom".into(), comp: 0, value: 0.0 },
            DirichletBc { set: "bottom".into(), comp: 1, value: 0.0 },
            DirichletBc { set: "top".into(), comp: 0, value: 0.0 },
            DirichletBc { set: "top".into(), comp: 1, value: 40.0 },
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
    let fe = doi_snaps.last().unwrap();
    let snap = raw.snapshots.last().unwrap();
    let h_nodes = match &snap.thickness {
        hyperfit::dataset::Thickness::Nodes(h) => h.clone(),
        _ => unreachable!(),
    };
    let hq = raw.mesh.project_to_quadpoints(&h_nodes);
    // Rank elements by relative error.
    let mut errs: Vec<(f64, usize)> = hq
        .iter()
        .zip(&fe.lambda3)
        .enumerate()
        .map(|(e, (a, l))| ((a - l * 5.0).abs() / (l * 5.0), e))
        .collect();
    errs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    println!("error percentiles: max={:.4} p99={:.4} p95={:.4} p50={:.4}",
        errs[0].0,
        errs[errs.len() / 100].0,
        errs[errs.len() / 20].0,
        errs[errs.len() / 2].0
    );
    for &(err, e) in errs.iter().take(8) {
        let conn = doi_mesh.element(e);
        let c = [
            (doi_mesh.node(conn[0])[0] + doi_mesh.node(conn[1])[0] + doi_mesh.node(conn[2])[0]) / 3.0,
            (doi_mesh.node(conn[0])[1] + doi_mesh.node(conn[1])[1] + doi_mesh.node(conn[2])[1]) / 3.0,
        ];
        let area = doi_mesh.element_area(e);
        println!(
            "elem {e}: err={err:.4} centroid=({:.1},{:.1}) area={:.3} lam3={:.4} hq_chain={:.4} nodal=({:.4},{:.4},{:.4})",
            c[0], c[1], area, fe.lambda3[e], hq[e] / 5.0,
            h_nodes[conn[0]] / 5.0, h_nodes[conn[1]] / 5.0, h_nodes[conn[2]] / 5.0
        );
        // lambda3 of elements sharing a node with e.
        let mut neigh = Vec::new();
        for (e2, conn2) in doi_mesh.elements().iter().enumerate() {
            if e2 != e && conn2.iter().any(|n| conn.contains(n)) {
                neigh.push((e2, fe.lambda3[e2], doi_mesh.element_area(e2)));
            }
        }
        let line: Vec<String> = neigh
            .iter()
            .map(|(e2, l, a)| format!("{e2}:{l:.4}(A{a:.2})"))
            .collect();
        println!("   neighbors: {}", line.join(" "));
    }
}
