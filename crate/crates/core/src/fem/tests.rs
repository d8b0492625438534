use super::*;
use crate::mesh::generate_plate_mesh;
use approx::assert_relative_eq;

fn material() -> NeoHookeParams {
    NeoHookeParams::new(1.0, 0.3).unwrap()
}

/// Rectangle with the bottom edge held in y and one corner pinned in x.
fn bar_mesh(w: f64, h: f64, target: f64) -> TriMesh {
    let mut mesh = generate_plate_mesh(w, h, &[], target, 2.0).unwrap();
    let pin = mesh
        .select_nodes(|x, y| x.abs() < 1e-9 && y.abs() < 1e-9);
    assert_eq!(pin.len(), 1);
    mesh.set_boundary("pin", pin);
    mesh
}

#[test]
fn zero_load_stays_at_rest() {
    let mesh = bar_mesh(4.0, 8.0, 1.0);
    let loads = LoadProgram {
        n_snap: 2,
        dirichlet: vec![
            DirichletBc { set: "bottom".into(), comp: 1, value: 0.0 },
            DirichletBc { set: "pin".into(), comp: 0, value: 0.0 },
        ],
        tractions: vec![],
        driven_set: "top".into(),
        driven_comp: 1,
    };
    let snaps = solve_forward(&mesh, &loads, &material()).unwrap();
    assert_eq!(snaps.len(), 2);
    for snap in &snaps {
        assert!(snap.u.iter().all(|u| u[0].abs() < 1e-12 && u[1].abs() < 1e-12));
        assert!(snap.lambda3.iter().all(|&l| (l - 1.0).abs() < 1e-12));
        assert!(snap.global_force.abs() < 1e-12);
    }
}

/// Independent uniaxial-stress solution: axial stretch from the nominal
/// traction by nested bisection on the raw stress formulas.
fn uniaxial_oracle(p: &NeoHookeParams, p_nominal: f64) -> (f64, f64) {
    let lateral_for = |axial: f64| -> f64 {
        let (mut lo, mut hi) = (0.3_f64, 2.0_f64);
        for _ in 0..200 {
            let s = 0.5 * (lo + hi);
            let i3 = s.powi(4) * axial * axial;
            let t11 = p.mu + (0.5 * p.lambda - 0.5 * (2.0 * p.mu + p.lambda) / i3) * axial * axial * s * s;
            if t11 > 0.0 {
                hi = s;
            } else {
                lo = s;
            }
        }
        0.5 * (lo + hi)
    };
    let p22 = |axial: f64| -> f64 {
        let s = lateral_for(axial);
        let i3 = s.powi(4) * axial * axial;
        let t22 = p.mu + (0.5 * p.lambda - 0.5 * (2.0 * p.mu + p.lambda) / i3) * s.powi(4);
        axial * t22
    };
    let (mut lo, mut hi) = (1.0, 3.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if p22(mid) > p_nominal {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let axial = 0.5 * (lo + hi);
    (axial, lateral_for(axial))
}

#[test]
fn uniform_traction_matches_uniaxial_solution() {
    let p = material();
    let p_nominal = 0.25;
    let mesh = bar_mesh(6.0, 12.0, 1.5);
    let loads = LoadProgram {
        n_snap: 4,
        dirichlet: vec![
            DirichletBc { set: "bottom".into(), comp: 1, value: 0.0 },
            DirichletBc { set: "pin".into(), comp: 0, value: 0.0 },
        ],
        tractions: vec![TractionBc {
            set: "top".into(),
            direction: [0.0, 1.0],
            p_max: p_nominal,
        }],
        driven_set: "top".into(),
        driven_comp: 1,
    };
    let snaps = solve_forward(&mesh, &loads, &p).unwrap();
    let (axial, lateral) = uniaxial_oracle(&p, p_nominal);

    let last = snaps.last().unwrap();
    let conn = Connectivity::reference(&mesh).unwrap();
    for e in 0..mesh.num_elements() {
        let f2d = conn.def_grad_2d(&mesh, e, &last.u);
        assert_relative_eq!(f2d[(0, 0)], lateral, epsilon = 1e-8, max_relative = 1e-8);
        assert_relative_eq!(f2d[(1, 1)], axial, epsilon = 1e-8, max_relative = 1e-8);
        assert!(f2d[(0, 1)].abs() < 1e-8 && f2d[(1, 0)].abs() < 1e-8);
        // Deformed thickness is the out-of-plane stretch times h0.
        assert_relative_eq!(last.lambda3[e], lateral, epsilon = 1e-8, max_relative = 1e-8);
    }
    // Nominal global force: traction times reference cross-section.
    assert_relative_eq!(
        last.global_force,
        p_nominal * 6.0 * mesh.h0(),
        max_relative = 1e-8
    );
}

#[test]
fn stretched_plate_with_hole_balances() {
    let p = material();
    let mut mesh = generate_plate_mesh(
        20.0,
        20.0,
        &[crate::mesh::HoleSpec {
            cx: 10.0,
            cy: 10.0,
            a: 4.0,
            b: 2.5,
            angle_deg: 25.0,
        }],
        2.0,
        1.0,
    )
    .unwrap();
    let pin = mesh.select_nodes(|x, y| x.abs() < 1e-9 && y.abs() < 1e-9);
    mesh.set_boundary("pin", pin);
    let loads = LoadProgram {
        n_snap: 3,
        dirichlet: vec![
            DirichletBc { set: "bottom".into(), comp: 1, value: 0.0 },
            DirichletBc { set: "pin".into(), comp: 0, value: 0.0 },
            DirichletBc { set: "top".into(), comp: 1, value: 4.0 },
        ],
        tractions: vec![],
        driven_set: "top".into(),
        driven_comp: 1,
    };
    let snaps = solve_forward(&mesh, &loads, &p).unwrap();
    for snap in &snaps {
        assert!(snap.global_force > 0.0);
        // Reaction resultants on opposite boundaries cancel.
        let bottom_sum: f64 = mesh
            .boundary_set("bottom")
            .unwrap()
            .iter()
            .map(|&n| snap.internal_forces[n][1])
            .sum();
        assert_relative_eq!(snap.global_force, -bottom_sum, max_relative = 1e-6);
        // Interior nodes are in equilibrium.
        let zeta: std::collections::BTreeSet<usize> = mesh
            .boundary_set("bottom")
            .unwrap()
            .iter()
            .chain(mesh.boundary_set("top").unwrap())
            .chain(mesh.boundary_set("pin").unwrap())
            .copied()
            .collect();
        let max_free: f64 = (0..mesh.num_nodes())
            .filter(|n| !zeta.contains(n))
            .map(|n| snap.internal_forces[n][0].abs().max(snap.internal_forces[n][1].abs()))
            .fold(0.0, f64::max);
        assert!(max_free < 1e-8 * snap.global_force.abs());
    }
}

#[test]
fn internal_forces_match_energy_gradient() {
    let p = material();
    let mesh = bar_mesh(3.0, 3.0, 1.0);
    let conn = Connectivity::reference(&mesh).unwrap();
    // A smooth nonuniform displacement state.
    let u: Vec<[f64; 2]> = mesh
        .nodes()
        .iter()
        .map(|pt| {
            [
                0.05 * pt[0] + 0.02 * pt[1] + 0.01 * pt[0] * pt[1],
                -0.03 * pt[0] + 0.08 * pt[1] - 0.005 * pt[0] * pt[0],
            ]
        })
        .collect();
    let state = assemble_state(&mesh, &conn, &u, &p).unwrap();
    let h = 1e-6;
    for n in 0..mesh.num_nodes() {
        for a in 0..2 {
            let mut up = u.clone();
            let mut um = u.clone();
            up[n][a] += h;
            um[n][a] -= h;
            let ep = assemble_state(&mesh, &conn, &up, &p).unwrap().total_energy;
            let em = assemble_state(&mesh, &conn, &um, &p).unwrap().total_energy;
            let fd = (ep - em) / (2.0 * h);
            assert_relative_eq!(state.internal_forces[n][a], fd, epsilon = 1e-9, max_relative = 1e-6);
        }
    }
}

#[test]
fn export_ideal_round_trips_bit_exactly() {
    let p = material();
    let mesh = bar_mesh(4.0, 8.0, 2.0);
    let loads = LoadProgram {
        n_snap: 2,
        dirichlet: vec![
            DirichletBc { set: "bottom".into(), comp: 1, value: 0.0 },
            DirichletBc { set: "pin".into(), comp: 0, value: 0.0 },
            DirichletBc { set: "top".into(), comp: 1, value: 1.5 },
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
    let dir = std::env::temp_dir().join(format!("hyperfit-ideal-rt-{}", std::process::id()));
    raw.write_dir(&dir).unwrap();
    let back = RawDataset::read_dir(&dir).unwrap();
    for (a, b) in raw.snapshots.iter().zip(&back.snapshots) {
        assert_eq!(a, b);
    }
    assert_eq!(back.meta, raw.meta);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn export_realistic_projection_exact_on_uniform_field() {
    // Homogeneous deformation: thickness is uniform, so the quad -> node
    // projection chain introduces no error.
    let p = material();
    let mesh = bar_mesh(6.0, 12.0, 2.0);
    let loads = LoadProgram {
        n_snap: 2,
        dirichlet: vec![
            DirichletBc { set: "bottom".into(), comp: 1, value: 0.0 },
            DirichletBc { set: "pin".into(), comp: 0, value: 0.0 },
        ],
        tractions: vec![TractionBc {
            set: "top".into(),
            direction: [0.0, 1.0],
            p_max: 0.2,
        }],
        driven_set: "top".into(),
        driven_comp: 1,
    };
    let snaps = solve_forward(&mesh, &loads, &p).unwrap();
    let raw = export_raw_data(
        &mesh,
        &snaps,
        &ExportSpec {
            mode: ExportMode::Realistic,
            zeta_set: "top".into(),
            force_set: "bottom".into(),
            material: None,
        },
    )
    .unwrap();
    for (fe, snap) in snaps.iter().zip(&raw.snapshots) {
        assert!(snap.forces_known.is_empty());
        let uniform = fe.lambda3[0] * mesh.h0();
        match &snap.thickness {
            Thickness::Nodes(h) => {
                assert!(h.iter().all(|&v| (v - uniform).abs() < 1e-9));
            }
            _ => panic!("realistic export must emit nodal thickness"),
        }
        // Round trip back onto quadrature points reproduces the field.
        let q = mesh.project_to_quadpoints(match &snap.thickness {
            Thickness::Nodes(h) => h,
            _ => unreachable!(),
        });
        for (a, b) in q.iter().zip(&fe.lambda3) {
            assert_relative_eq!(*a, b * mesh.h0(), epsilon = 1e-9);
        }
    }
}

#[test]
fn doi_extraction_carries_internal_tractions() {
    let p = material();
    let mesh = bar_mesh(4.0, 16.0, 1.0);
    let loads = LoadProgram {
        n_snap: 2,
        dirichlet: vec![
            DirichletBc { set: "bottom".into(), comp: 1, value: 0.0 },
            DirichletBc { set: "pin".into(), comp: 0, value: 0.0 },
            DirichletBc { set: "top".into(), comp: 1, value: 2.0 },
        ],
        tractions: vec![],
        driven_set: "top".into(),
        driven_comp: 1,
    };
    let snaps = solve_forward(&mesh, &loads, &p).unwrap();
    let (sub, sub_snaps) = extract_doi(&mesh, &snaps, &p, 4.0, 12.0).unwrap();
    assert!(!sub.boundary_set("bottom").unwrap().is_empty());
    assert!(!sub.boundary_set("top").unwrap().is_empty());
    for snap in &sub_snaps {
        // The cut bottom boundary carries the full axial force (downward).
        let bottom_sum: f64 = sub
            .boundary_set("bottom")
            .unwrap()
            .iter()
            .map(|&n| snap.internal_forces[n][1])
            .sum();
        assert_relative_eq!(bottom_sum, -snap.global_force, max_relative = 1e-6);
    }
}
