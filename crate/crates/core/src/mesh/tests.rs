use super::*;
use approx::assert_relative_eq;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

fn unit_triangle() -> TriMesh {
    TriMesh::new(
        vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
        vec![[0, 1, 2]],
        BTreeMap::new(),
        1.0,
    )
    .unwrap()
}

fn two_element_square() -> TriMesh {
    TriMesh::new(
        vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
        vec![[0, 1, 2], [0, 2, 3]],
        BTreeMap::new(),
        1.0,
    )
    .unwrap()
}

#[test]
fn rejects_inverted_element() {
    let r = TriMesh::new(
        vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
        vec![[0, 2, 1]],
        BTreeMap::new(),
        1.0,
    );
    assert!(r.is_err());
}

#[test]
fn def_grad_is_identity_at_rest() {
    let mesh = unit_triangle();
    let conn = Connectivity::reference(&mesh).unwrap();
    let f = conn.def_grad_2d(&mesh, 0, &[[0.0, 0.0]; 3]);
    assert_relative_eq!((f - nalgebra::Matrix2::identity()).norm(), 0.0, epsilon = 1e-15);
}

#[test]
fn affine_field_reproduced_exactly() {
    // u1 = 0.1 X1 gives F11 = 1.1 at every quadrature point of any mesh.
    let mesh = generate_plate_mesh(2.0, 1.0, &[], 0.3, 1.0).unwrap();
    let conn = Connectivity::reference(&mesh).unwrap();
    let u: Vec<[f64; 2]> = mesh.nodes().iter().map(|p| [0.1 * p[0], 0.0]).collect();
    for e in 0..mesh.num_elements() {
        let f = conn.def_grad_2d(&mesh, e, &u);
        assert_relative_eq!(f[(0, 0)], 1.1, epsilon = 1e-12);
        assert_relative_eq!(f[(0, 1)], 0.0, epsilon = 1e-12);
        assert_relative_eq!(f[(1, 0)], 0.0, epsilon = 1e-12);
        assert_relative_eq!(f[(1, 1)], 1.0, epsilon = 1e-12);
    }
}

#[test]
fn general_affine_patch_test() {
    // An arbitrary affine map is exact to machine precision (acceptance-level
    // patch test at 1e-12).
    let mesh = generate_plate_mesh(3.0, 2.0, &[], 0.4, 1.0).unwrap();
    let conn = Connectivity::reference(&mesh).unwrap();
    let grad = [[0.07, -0.04], [0.02, 0.11]];
    let u: Vec<[f64; 2]> = mesh
        .nodes()
        .iter()
        .map(|p| {
            [
                grad[0][0] * p[0] + grad[0][1] * p[1],
                grad[1][0] * p[0] + grad[1][1] * p[1],
            ]
        })
        .collect();
    for e in 0..mesh.num_elements() {
        let f = conn.def_grad_2d(&mesh, e, &u);
        for a in 0..2 {
            for b in 0..2 {
                let expected = if a == b { 1.0 } else { 0.0 } + grad[a][b];
                assert!((f[(a, b)] - expected).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn bmatrix_matches_interpolated_gradient() {
    // The Mandel strain operator applied to random nodal values must agree
    // with the symmetric gradient of the barycentric interpolant, evaluated
    // here by central finite differences as an independent route.
    let mesh = TriMesh::new(
        vec![[0.2, 0.1], [1.3, 0.4], [0.5, 1.2]],
        vec![[0, 1, 2]],
        BTreeMap::new(),
        1.0,
    )
    .unwrap();
    let conn = Connectivity::reference(&mesh).unwrap();
    let b = bmatrix_deformed(conn.grads(0));
    let mut rng = ChaCha12Rng::seed_from_u64(5);
    let u: Vec<[f64; 2]> = (0..3)
        .map(|_| [rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5])
        .collect();
    let uvec = nalgebra::SVector::<f64, 6>::from_iterator(u.iter().flat_map(|p| [p[0], p[1]]));
    let strain = b * uvec;

    // Independent route: interpolate u with barycentric coordinates and take
    // central differences around the centroid.
    let p = [mesh.node(0), mesh.node(1), mesh.node(2)];
    let interp = |x: f64, y: f64| -> [f64; 2] {
        let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
        let l1 = ((p[2][1] - p[0][1]) * (x - p[0][0]) - (p[2][0] - p[0][0]) * (y - p[0][1])) / det;
        let l2 = (-(p[1][1] - p[0][1]) * (x - p[0][0]) + (p[1][0] - p[0][0]) * (y - p[0][1])) / det;
        let l0 = 1.0 - l1 - l2;
        [
            l0 * u[0][0] + l1 * u[1][0] + l2 * u[2][0],
            l0 * u[0][1] + l1 * u[1][1] + l2 * u[2][1],
        ]
    };
    let (cx, cy) = (
        (p[0][0] + p[1][0] + p[2][0]) / 3.0,
        (p[0][1] + p[1][1] + p[2][1]) / 3.0,
    );
    let h = 1e-6;
    let dudx = [
        (interp(cx + h, cy)[0] - interp(cx - h, cy)[0]) / (2.0 * h),
        (interp(cx + h, cy)[1] - interp(cx - h, cy)[1]) / (2.0 * h),
    ];
    let dudy = [
        (interp(cx, cy + h)[0] - interp(cx, cy - h)[0]) / (2.0 * h),
        (interp(cx, cy + h)[1] - interp(cx, cy - h)[1]) / (2.0 * h),
    ];
    assert_relative_eq!(strain[0], dudx[0], epsilon = 1e-8);
    assert_relative_eq!(strain[1], dudy[1], epsilon = 1e-8);
    let shear = 0.5 * (dudy[0] + dudx[1]) * std::f64::consts::SQRT_2;
    assert_relative_eq!(strain[2], shear, epsilon = 1e-8);
}

#[test]
fn quadrature_recovers_total_area() {
    let mesh = generate_plate_mesh(
        10.0,
        8.0,
        &[HoleSpec {
            cx: 5.0,
            cy: 4.0,
            a: 1.5,
            b: 1.0,
            angle_deg: 30.0,
        }],
        0.5,
        1.0,
    )
    .unwrap();
    let conn = Connectivity::reference(&mesh).unwrap();
    let quad_area: f64 = (0..mesh.num_elements())
        .map(|e| Connectivity::WEIGHT * conn.jac_det(e))
        .sum();
    assert_relative_eq!(quad_area, mesh.total_area(), max_relative = 1e-10);
}

#[test]
fn thickness_projection_examples() {
    // Uniform values stay uniform.
    let mesh = two_element_square();
    let nodal = mesh.project_to_nodes(&[3.0, 3.0], &[1.0, 1.0]).unwrap();
    assert!(nodal.iter().all(|&v| (v - 3.0).abs() < 1e-14));

    // Node shared by two equal-weight elements with values 4 and 6 -> 5.
    let nodal = mesh.project_to_nodes(&[4.0, 6.0], &[2.0, 2.0]).unwrap();
    assert_relative_eq!(nodal[0], 5.0, epsilon = 1e-14);
    assert_relative_eq!(nodal[2], 5.0, epsilon = 1e-14);
    // Nodes on only one element keep its value.
    assert_relative_eq!(nodal[1], 4.0, epsilon = 1e-14);
    assert_relative_eq!(nodal[3], 6.0, epsilon = 1e-14);

    // Weighted mean with weights 1 and 3 of values 4 and 8 -> 7.
    let nodal = mesh.project_to_nodes(&[4.0, 8.0], &[1.0, 3.0]).unwrap();
    assert_relative_eq!(nodal[0], 7.0, epsilon = 1e-14);
}

#[test]
fn quadpoint_projection_examples() {
    let mesh = unit_triangle();
    assert_relative_eq!(
        mesh.project_to_quadpoints(&[3.0, 3.0, 3.0])[0],
        3.0,
        epsilon = 1e-15
    );
    assert_relative_eq!(
        mesh.project_to_quadpoints(&[1.0, 2.0, 3.0])[0],
        2.0,
        epsilon = 1e-15
    );
    // Uniform round trip node -> quad -> node is the identity.
    let mesh = two_element_square();
    let q = mesh.project_to_quadpoints(&[4.0; 4]);
    let back = mesh.project_to_nodes(&q, &[1.0, 1.0]).unwrap();
    assert!(back.iter().all(|&v| (v - 4.0).abs() < 1e-14));
}

#[test]
fn traction_single_edge() {
    let mesh = two_element_square();
    let f = mesh
        .traction_to_nodal_forces(&[0, 1], 2.0, [0.0, -1.0])
        .unwrap();
    // Edge length 1, h0 = 1: each end node gets p h0 L / 2 = 1.
    assert_eq!(f.len(), 2);
    for (_, fv) in &f {
        assert_relative_eq!(fv[1], -1.0, epsilon = 1e-14);
        assert_relative_eq!(fv[0], 0.0, epsilon = 1e-14);
    }
}

#[test]
fn traction_two_collinear_edges() {
    // Bottom edge of length 1 split at x = 0.5: quarters at the ends, half in
    // the middle.
    let mesh = TriMesh::new(
        vec![
            [0.0, 0.0],
            [0.5, 0.0],
            [1.0, 0.0],
            [0.0, 1.0],
            [0.5, 1.0],
            [1.0, 1.0],
        ],
        vec![[0, 1, 4], [0, 4, 3], [1, 2, 5], [1, 5, 4]],
        BTreeMap::new(),
        1.0,
    )
    .unwrap();
    let f: BTreeMap<usize, [f64; 2]> = mesh
        .traction_to_nodal_forces(&[0, 1, 2], 4.0, [0.0, 1.0])
        .unwrap()
        .into_iter()
        .collect();
    assert_relative_eq!(f[&0][1], 1.0, epsilon = 1e-14);
    assert_relative_eq!(f[&1][1], 2.0, epsilon = 1e-14);
    assert_relative_eq!(f[&2][1], 1.0, epsilon = 1e-14);

    // Total equals p h0 L for this partition of the edge.
    let total: f64 = f.values().map(|v| v[1]).sum();
    assert_relative_eq!(total, 4.0, epsilon = 1e-14);

    // Zero traction gives zero loads.
    let z = mesh
        .traction_to_nodal_forces(&[0, 1, 2], 0.0, [0.0, 1.0])
        .unwrap();
    assert!(z.iter().all(|(_, v)| v[0] == 0.0 && v[1] == 0.0));

    // Disconnected selections are rejected.
    assert!(mesh
        .traction_to_nodal_forces(&[0, 1, 3, 4], 1.0, [0.0, 1.0])
        .is_err());
}

#[test]
fn plate_mesh_unit_square() {
    let mesh = generate_plate_mesh(1.0, 1.0, &[], 0.5, 1.0).unwrap();
    assert_eq!(mesh.num_nodes(), 9);
    assert_eq!(mesh.num_elements(), 8);
    assert_eq!(mesh.boundary_set("bottom").unwrap().len(), 3);
    assert_eq!(mesh.boundary_set("top").unwrap().len(), 3);
}

#[test]
fn plate_mesh_hole_carving() {
    let hole = HoleSpec {
        cx: 5.0,
        cy: 5.0,
        a: 2.0,
        b: 1.2,
        angle_deg: -20.0,
    };
    let mesh = generate_plate_mesh(10.0, 10.0, &[hole], 0.4, 1.0).unwrap();
    for e in 0..mesh.num_elements() {
        let [a, b, c] = mesh.element(e);
        let cx = (mesh.node(a)[0] + mesh.node(b)[0] + mesh.node(c)[0]) / 3.0;
        let cy = (mesh.node(a)[1] + mesh.node(b)[1] + mesh.node(c)[1]) / 3.0;
        assert!(!hole.contains(cx, cy), "element {e} centroid inside hole");
        assert!(mesh.element_area(e) > 0.0);
    }
    assert!(!mesh.boundary_set("holes").unwrap().is_empty());
}

#[test]
fn plate_mesh_rejects_bad_holes() {
    let outside = HoleSpec {
        cx: 0.5,
        cy: 5.0,
        a: 2.0,
        b: 1.0,
        angle_deg: 0.0,
    };
    assert!(generate_plate_mesh(10.0, 10.0, &[outside], 0.5, 1.0).is_err());
    let h1 = HoleSpec {
        cx: 4.0,
        cy: 5.0,
        a: 2.0,
        b: 1.0,
        angle_deg: 0.0,
    };
    let h2 = HoleSpec {
        cx: 5.5,
        cy: 5.0,
        a: 2.0,
        b: 1.0,
        angle_deg: 0.0,
    };
    assert!(generate_plate_mesh(10.0, 10.0, &[h1, h2], 0.5, 1.0).is_err());
}

#[test]
fn mesh_text_round_trip() {
    let mesh = generate_plate_mesh(
        4.0,
        3.0,
        &[HoleSpec {
            cx: 2.0,
            cy: 1.5,
            a: 0.7,
            b: 0.5,
            angle_deg: 10.0,
        }],
        0.25,
        2.5,
    )
    .unwrap();
    let text = mesh.to_text();
    let back = TriMesh::from_text(&text, std::path::Path::new("mem")).unwrap();
    assert_eq!(back.num_nodes(), mesh.num_nodes());
    assert_eq!(back.num_elements(), mesh.num_elements());
    assert_eq!(back.h0(), mesh.h0());
    assert_eq!(back.nodes(), mesh.nodes());
    assert_eq!(back.elements(), mesh.elements());
    assert_eq!(back.boundary_sets(), mesh.boundary_sets());
}

#[test]
fn deformed_connectivity_reports_inverted_element() {
    let mesh = unit_triangle();
    let u = vec![[0.0, 0.0], [-2.0, 0.0], [0.0, 0.0]];
    let err = Connectivity::deformed(&mesh, &u).unwrap_err();
    assert!(err.to_string().contains("element 0"));
}

#[test]
fn submesh_extraction_preserves_geometry() {
    let mesh = generate_plate_mesh(2.0, 4.0, &[], 0.5, 1.0).unwrap();
    let (sub, map) = mesh.extract_submesh(|e| {
        let [a, b, c] = mesh.element(e);
        [a, b, c]
            .iter()
            .all(|&n| mesh.node(n)[1] >= 1.0 - 1e-9 && mesh.node(n)[1] <= 3.0 + 1e-9)
    });
    assert!(sub.num_elements() > 0);
    for (new_e, &old_e) in map.elem_new_to_old.iter().enumerate() {
        assert_relative_eq!(sub.element_area(new_e), mesh.element_area(old_e), epsilon = 1e-14);
    }
    for (new_n, &old_n) in map.node_new_to_old.iter().enumerate() {
        assert_eq!(sub.node(new_n), mesh.node(old_n));
    }
}
