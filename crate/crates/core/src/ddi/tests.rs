use super::solver::reassign_mapping;
use super::system::{equilibrium_residual, mechanical_stresses, SaddleSolver};
use super::workspace::Metric;
use super::*;
use crate::continuum::NeoHookeParams;
use crate::dataset::{DatasetMeta, ExportMode, RawDataset, Snapshot, Thickness};
use crate::fem::{export_raw_data, solve_forward, DirichletBc, ExportSpec, LoadProgram, TractionBc};
use crate::mesh::{generate_plate_mesh, TriMesh};
use approx::assert_relative_eq;
use std::collections::BTreeMap;

fn config(formulation: Formulation) -> DdiConfig {
    let mut cfg = DdiConfig::new(formulation, 1.0, 7);
    cfg.linear_rel_tol = 1e-11;
    cfg
}

/// Ideal dataset of a homogeneous bar under end traction.
fn bar_dataset(p_nominal: f64, n_snap: usize, target: f64) -> RawDataset {
    let p = NeoHookeParams::new(1.0, 0.3).unwrap();
    let mut mesh = generate_plate_mesh(4.0, 8.0, &[], target, 2.0).unwrap();
    let pin = mesh.select_nodes(|x, y| x.abs() < 1e-9 && y.abs() < 1e-9);
    mesh.set_boundary("pin", pin);
    let loads = LoadProgram {
        n_snap,
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
    export_raw_data(
        &mesh,
        &snaps,
        &ExportSpec {
            mode: ExportMode::Ideal,
            // Withhold the fixed bottom boundary so its reactions become the
            // unknown forces; the loaded top edge stays prescribed.
            zeta_set: "bottom".into(),
            force_set: "top".into(),
            material: Some((1.0, 0.3)),
        },
    )
    .unwrap()
}

/// Single-triangle input with zero displacement, for hand-checked values.
fn unit_triangle_input() -> DdiInput {
    let mesh = TriMesh::new(
        vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
        vec![[0, 1, 2]],
        BTreeMap::from([("zeta".into(), vec![2usize])]),
        2.0,
    )
    .unwrap();
    let snap = Snapshot {
        index: 1,
        displacements: vec![[0.0, 0.0]; 3],
        forces_known: vec![(0, [0.0, 0.0]), (1, [0.0, 0.0])],
        thickness: Thickness::QuadPoints(vec![2.0]),
        global_force: 0.0,
    };
    DdiInput::from_raw(&RawDataset {
        mesh,
        snapshots: vec![snap],
        meta: DatasetMeta {
            mode: ExportMode::Ideal,
            zeta_boundary: "zeta".into(),
            force_boundary: "zeta".into(),
            material: None,
        },
    })
    .unwrap()
}

#[test]
fn loss_hand_example() {
    // One point with weight w J0 h0 = 0.5 * 1 * 2 = 1; a strain gap of 0.1 in
    // the 11 component and no stress gap gives 0.5 * 0.1 * 1 * 0.1 = 5e-3.
    let input = unit_triangle_input();
    let cfg = config(Formulation::TotalLagrangian);
    let ws = DdiWorkspace::build(&input, &cfg).unwrap();
    assert_relative_eq!(ws.weights[0], 1.0, epsilon = 1e-14);
    let db = MaterialDatabase {
        formulation: cfg.formulation,
        strains: vec![[-0.1, 0.0, 0.0, 0.0]],
        stresses: vec![[0.0; 3]],
        weights: vec![1.0],
    };
    let stresses = vec![[0.0; 3]];
    let loss = ddi_loss(&ws, &stresses, &db, &[0]);
    assert_relative_eq!(loss, 5e-3, epsilon = 1e-15);

    // Exact match has zero loss.
    let db0 = MaterialDatabase {
        formulation: cfg.formulation,
        strains: vec![[0.0; 4]],
        stresses: vec![[0.0; 3]],
        weights: vec![1.0],
    };
    assert_eq!(ddi_loss(&ws, &stresses, &db0, &[0]), 0.0);

    // Doubling the strain gap quadruples the loss.
    let db2 = MaterialDatabase {
        formulation: cfg.formulation,
        strains: vec![[-0.2, 0.0, 0.0, 0.0]],
        stresses: vec![[0.0; 3]],
        weights: vec![1.0],
    };
    assert_relative_eq!(ddi_loss(&ws, &stresses, &db2, &[0]), 2e-2, epsilon = 1e-15);
}

#[test]
fn loss_counts_shear_twice() {
    // A pure 12 gap enters the contraction with both off-diagonal slots.
    let input = unit_triangle_input();
    let cfg = config(Formulation::TotalLagrangian);
    let ws = DdiWorkspace::build(&input, &cfg).unwrap();
    let db = MaterialDatabase {
        formulation: cfg.formulation,
        strains: vec![[0.0, 0.0, 0.0, SQRT2 * 0.1]],
        stresses: vec![[0.0; 3]],
        weights: vec![1.0],
    };
    let loss = ddi_loss(&ws, &[[0.0; 3]], &db, &[0]);
    assert_relative_eq!(loss, 0.5 * 2.0 * 0.01, epsilon = 1e-15);
}

#[test]
fn equilibrated_database_gives_zero_multipliers() {
    // Homogeneous bar, one snapshot, one material state: the uniform stress
    // state satisfies the prescribed-force rows exactly, so the multipliers
    // vanish. (With several snapshots a single shared state could not carry
    // the per-snapshot equilibrium and the multipliers would compensate.)
    let raw = bar_dataset(0.2, 1, 2.0);
    let input = DdiInput::from_raw(&raw).unwrap();
    let mut cfg = config(Formulation::UpdatedLagrangian);
    cfg.n_star = StateCount::Count(1);
    let ws = DdiWorkspace::build(&input, &cfg).unwrap();
    let solver = SaddleSolver::new(&ws);
    let mapping = vec![0usize; ws.n_points()];
    let sol = solver
        .solve(&ws, &mapping, 1, None, 1e-12, 200_000)
        .unwrap();
    let eta_max = sol
        .eta
        .iter()
        .flat_map(|v| v.iter())
        .fold(0.0_f64, |m, &v| m.max(v.abs()));
    let sigma_scale = sol.sigma_star[0]
        .iter()
        .fold(0.0_f64, |m, &v| m.max(v.abs()));
    assert!(sigma_scale > 1e-3, "uniform stress should be nonzero");
    // The forward solve leaves interior force residues of order 1e-9 times
    // the force scale, which bound how small eta can get.
    assert!(eta_max < 1e-7 * sigma_scale, "eta_max = {eta_max:e}");

    // Mechanical stresses equal the material stress when eta = 0.
    let stresses = mechanical_stresses(&ws, &mapping, &sol.sigma_star, &sol.eta);
    for s in &stresses {
        for c in 0..3 {
            assert_relative_eq!(s[c], sol.sigma_star[0][c], epsilon = 1e-10, max_relative = 1e-7);
        }
    }
    assert!(equilibrium_residual(&ws, &stresses) < 1e-9);
}

#[test]
fn saddle_solution_matches_dense_oracle() {
    let raw = bar_dataset(0.25, 2, 2.0);
    let input = DdiInput::from_raw(&raw).unwrap();
    let mut cfg = config(Formulation::UpdatedLagrangian);
    cfg.n_star = StateCount::Count(3);
    let dev = solver_oracle_deviation(&input, &cfg).unwrap();
    assert!(dev < 1e-8, "deviation {dev:e}");
    // The total Lagrangian route solves a different system; check it too.
    let mut cfg = config(Formulation::AdaptedTotalLagrangian);
    cfg.n_star = StateCount::Count(3);
    let dev = solver_oracle_deviation(&input, &cfg).unwrap();
    assert!(dev < 1e-8, "deviation {dev:e}");
}

#[test]
fn compatibility_rows_hold_after_solve() {
    // Eq-16 analog: per state, the weighted strain-operator image of eta sums
    // to zero.
    let raw = bar_dataset(0.25, 2, 1.6);
    let input = DdiInput::from_raw(&raw).unwrap();
    let mut cfg = config(Formulation::TotalLagrangian);
    cfg.n_star = StateCount::Count(4);
    let ws = DdiWorkspace::build(&input, &cfg).unwrap();
    let strain_features: Vec<Vec<f64>> = ws
        .strains
        .iter()
        .map(|e| vec![e[0], e[1], e[2], e[3] / SQRT2])
        .collect();
    let mut rng = crate::rng::substream(cfg.seed, "ddi-kmeans", 0);
    let mapping = init_mapping(&strain_features, 4, &mut rng, InitMode::KmeansStrain).unwrap();
    let solver = SaddleSolver::new(&ws);
    let sol = solver.solve(&ws, &mapping, 4, None, 1e-12, 200_000).unwrap();

    let mut per_state = vec![[0.0; 3]; 4];
    for tau in 0..ws.n_snap {
        for g in 0..ws.nq {
            let pt = tau * ws.nq + g;
            let b = &ws.bmats[pt];
            let w = ws.weights[pt];
            let nodes = ws.elem_nodes[g];
            for (alpha, &n) in nodes.iter().enumerate() {
                for c in 0..2 {
                    let d = ws.eta_index[2 * n + c];
                    if d == usize::MAX {
                        continue;
                    }
                    for comp in 0..3 {
                        per_state[mapping[pt]][comp] += w * b[(comp, 2 * alpha + c)] * sol.eta[tau][d];
                    }
                }
            }
        }
    }
    let scale = sol
        .sigma_star
        .iter()
        .flat_map(|s| s.iter())
        .fold(0.0_f64, |m, &v| m.max(v.abs()));
    for s in &per_state {
        for c in 0..3 {
            assert!(s[c].abs() <= 1e-8 * scale.max(1.0), "residual {:e}", s[c]);
        }
    }
}

#[test]
fn material_strain_update_is_weighted_mean() {
    let raw = bar_dataset(0.2, 1, 2.0);
    let input = DdiInput::from_raw(&raw).unwrap();
    let cfg = config(Formulation::UpdatedLagrangian);
    let mut cfg1 = cfg.clone();
    cfg1.n_star = StateCount::Count(1);
    let result = run_ddi(&input, &cfg1).unwrap();
    // Homogeneous bar: every strain equals the mean, the single state matches.
    let mean = {
        let mut acc = [0.0; 4];
        let mut wsum = 0.0;
        for (pt, e) in result.mech_strains.iter().enumerate() {
            let w = {
                // All weights equal in a uniform state; recompute from result
                // by inverting the database weight sum.
                let _ = pt;
                1.0
            };
            for c in 0..4 {
                acc[c] += w * e[c];
            }
            wsum += w;
        }
        acc.map(|v| v / wsum)
    };
    for c in 0..4 {
        assert_relative_eq!(result.database.strains[0][c], mean[c], epsilon = 1e-9, max_relative = 1e-6);
    }
    assert!(result.converged);
    assert!(result.mapping.iter().all(|&z| z == 0));
}

#[test]
fn adapted_update_reduces_to_mean_at_identity() {
    // With F = 1 everywhere the pulled-back metric is the constant one, so
    // the metric-weighted mean equals the plain weighted mean.
    let input = unit_triangle_input();
    let cfg_tl = config(Formulation::TotalLagrangian);
    let cfg_ada = config(Formulation::AdaptedTotalLagrangian);
    let ws_tl = DdiWorkspace::build(&input, &cfg_tl).unwrap();
    let ws_ada = DdiWorkspace::build(&input, &cfg_ada).unwrap();
    match &ws_ada.metric {
        Metric::PerPoint { strain, .. } => {
            let expected = nalgebra::Matrix4::from_diagonal(&nalgebra::Vector4::new(
                1.0, 1.0, 1.0, 1.0,
            ));
            assert!((strain[0] - expected).norm() < 1e-12);
        }
        _ => panic!("adapted metric expected"),
    }
    assert_eq!(ws_tl.weights, ws_ada.weights);
}

#[test]
fn reassignment_picks_nearest_state() {
    let input = unit_triangle_input();
    let cfg = config(Formulation::TotalLagrangian);
    let ws = DdiWorkspace::build(&input, &cfg).unwrap();
    // 1D toy: states at strain 0 and 1 in the 11 slot, the point sits at 0.4.
    let db = MaterialDatabase {
        formulation: cfg.formulation,
        strains: vec![[0.0; 4], [1.0, 0.0, 0.0, 0.0]],
        stresses: vec![[0.0; 3]; 2],
        weights: vec![1.0; 2],
    };
    // Shift the mechanical strain by faking the stress gap at zero and moving
    // the database instead: point strain is 0, state 0 at distance 0.4 wins
    // over state 1 at distance 0.6 once the point is placed at 0.4.
    let db_shifted = MaterialDatabase {
        formulation: cfg.formulation,
        strains: vec![[-0.4, 0.0, 0.0, 0.0], [0.6, 0.0, 0.0, 0.0]],
        stresses: vec![[0.0; 3]; 2],
        weights: vec![1.0; 2],
    };
    let assign = reassign_mapping(&ws, &[[0.0; 3]], &db_shifted);
    assert_eq!(assign, vec![0]);

    // A database containing the exact mechanical state maps to it.
    let assign = reassign_mapping(&ws, &[[0.0; 3]], &db);
    assert_eq!(assign, vec![0]);

    // Every assignment is distance-minimal under an exhaustive scan.
    for pt in 0..ws.n_points() {
        let z = assign[pt];
        for other in 0..db.len() {
            assert!(
                point_distance(&ws, pt, &[[0.0; 3]][pt], &db, z)
                    <= point_distance(&ws, pt, &[[0.0; 3]][pt], &db, other) + 1e-15
            );
        }
    }
}

#[test]
fn formulations_agree_at_small_strain() {
    // Strains of order 1e-5: the three formulations identify the same
    // database within 1e-8.
    let raw = bar_dataset(1e-5, 2, 2.0);
    let input = DdiInput::from_raw(&raw).unwrap();
    let mut results = Vec::new();
    for formulation in [
        Formulation::UpdatedLagrangian,
        Formulation::TotalLagrangian,
        Formulation::AdaptedTotalLagrangian,
    ] {
        let mut cfg = config(formulation);
        cfg.n_star = StateCount::Count(2);
        results.push(run_ddi(&input, &cfg).unwrap());
    }
    let reference = &results[0];
    for other in &results[1..] {
        assert_eq!(reference.mapping, other.mapping);
        for z in 0..reference.database.len() {
            for c in 0..4 {
                assert!(
                    (reference.database.strains[z][c] - other.database.strains[z][c]).abs() < 1e-8
                );
            }
            for c in 0..3 {
                assert!(
                    (reference.database.stresses[z][c] - other.database.stresses[z][c]).abs()
                        < 1e-8
                );
            }
        }
    }
}

#[test]
fn run_is_deterministic() {
    let raw = bar_dataset(0.2, 2, 2.0);
    let input = DdiInput::from_raw(&raw).unwrap();
    let mut cfg = config(Formulation::UpdatedLagrangian);
    cfg.n_star = StateCount::Ratio(0.05);
    let a = run_ddi(&input, &cfg).unwrap();
    let b = run_ddi(&input, &cfg).unwrap();
    assert_eq!(a.mapping, b.mapping);
    assert_eq!(a.database.strains, b.database.strains);
    assert_eq!(a.database.stresses, b.database.stresses);
    assert_eq!(a.iterations, b.iterations);
}

#[test]
fn zeta_forces_recover_reactions() {
    // The withheld bottom-boundary forces are recovered from equilibrium; on
    // the homogeneous bar they must balance the applied traction.
    let raw = bar_dataset(0.2, 2, 2.0);
    let input = DdiInput::from_raw(&raw).unwrap();
    let mut cfg = config(Formulation::UpdatedLagrangian);
    cfg.n_star = StateCount::Count(1);
    let result = run_ddi(&input, &cfg).unwrap();
    let applied = 0.2 * 4.0 * 2.0; // p * width * h0 per unit load factor
    for (tau, zeta) in result.zeta_forces.iter().enumerate() {
        let scale = (tau + 1) as f64 / input.n_snap as f64;
        let sum: f64 = zeta.iter().map(|(_, f)| f[1]).sum();
        assert_relative_eq!(sum, -applied * scale, max_relative = 1e-6);
    }
}

#[test]
fn database_text_round_trip() {
    let db = MaterialDatabase {
        formulation: Formulation::UpdatedLagrangian,
        strains: vec![[0.1, -0.05, 0.02, SQRT2 * 0.03], [0.0, 0.0, 0.0, 0.0]],
        stresses: vec![[0.4, 0.2, SQRT2 * 0.1], [0.0, 0.0, 0.0]],
        weights: vec![12.5, 3.25],
    };
    let text = db.to_text();
    let back = MaterialDatabase::from_text(&text, std::path::Path::new("mem")).unwrap();
    assert_eq!(back, db);
    assert_eq!(back.to_text(), text);
}

#[test]
fn all_pi_requires_pinning() {
    // Prescribing forces everywhere leaves the rigid modes unconstrained;
    // the solver demands explicit pins.
    let mesh = TriMesh::new(
        vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
        vec![[0, 1, 2]],
        BTreeMap::from([("all".into(), vec![0usize, 1, 2])]),
        1.0,
    )
    .unwrap();
    let snap = Snapshot {
        index: 1,
        displacements: vec![[0.0, 0.0]; 3],
        forces_known: vec![(0, [0.0, 0.0]), (1, [0.0, 0.0]), (2, [0.0, 0.0])],
        thickness: Thickness::QuadPoints(vec![1.0]),
        global_force: 0.0,
    };
    let raw = RawDataset {
        mesh,
        snapshots: vec![snap],
        meta: DatasetMeta {
            mode: ExportMode::Ideal,
            zeta_boundary: "all".into(),
            force_boundary: "all".into(),
            material: None,
        },
    };
    let input = DdiInput::from_raw(&raw).unwrap();
    let cfg = config(Formulation::TotalLagrangian);
    assert!(DdiWorkspace::build(&input, &cfg).is_err());
    let mut pinned = cfg.clone();
    pinned.pinned_eta = vec![(0, 0), (0, 1), (1, 1)];
    assert!(DdiWorkspace::build(&input, &pinned).is_ok());
}
