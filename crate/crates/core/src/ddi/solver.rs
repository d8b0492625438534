use nalgebra::{Matrix4, Vector4};

use super::kmeans::{init_mapping, InitMode};
use super::system::{
    equilibrium_residual, mechanical_stresses, recover_zeta_forces, SaddleSolution, SaddleSolver,
};
use super::workspace::{ddi_loss, DdiWorkspace, Metric};
use super::{DdiConfig, DdiInput, MaterialDatabase, SQRT2};
use crate::rng::substream;

/// Output of one identification run.
#[derive(Debug, Clone)]
pub struct DdiResult {
    pub database: MaterialDatabase,
    /// State index per point (pt = tau * n_quad + g).
    pub mapping: Vec<usize>,
    /// Mandel-active mechanical strains per point.
    pub mech_strains: Vec<[f64; 4]>,
    /// Mandel in-plane mechanical stresses per point.
    pub mech_stresses: Vec<[f64; 3]>,
    /// Recovered unknown boundary forces per snapshot.
    pub zeta_forces: Vec<Vec<(usize, [f64; 2])>>,
    pub iterations: usize,
    pub converged: bool,
    /// Total inner Krylov iterations across all outer iterations.
    pub minres_iterations: usize,
    /// States without assigned points in the final solve.
    pub eliminated_states: usize,
    /// Relative equilibrium residual at the prescribed-force dofs.
    pub equilibrium_residual: f64,
    /// Distance part of the loss at exit.
    pub loss: f64,
    pub n_quad: usize,
    pub n_snap: usize,
}

/// Runs the staggered identification: saddle-point solve, stress update,
/// material-strain update, mapping reassignment, until the mapping reaches a
/// fixed point or the iteration budget is exhausted.
pub fn run_ddi(input: &DdiInput, config: &DdiConfig) -> crate::Result<DdiResult> {
    let ws = DdiWorkspace::build(input, config)?;
    let n_pts = ws.n_points();
    let n_star = config.n_star.resolve(n_pts)?;

    // Initial mapping: clusters of the mechanical strains (plain components,
    // equal weighting).
    let strain_features: Vec<Vec<f64>> = ws
        .strains
        .iter()
        .map(|e| vec![e[0], e[1], e[2], e[3] / SQRT2])
        .collect();
    let mut rng = substream(config.seed, "ddi-kmeans", 0);
    let mut mapping = init_mapping(&strain_features, n_star, &mut rng, InitMode::KmeansStrain)?;

    let solver = SaddleSolver::new(&ws);
    let mut solution: Option<SaddleSolution> = None;
    let mut stresses = Vec::new();
    let mut database = MaterialDatabase {
        formulation: config.formulation,
        strains: vec![[0.0; 4]; n_star],
        stresses: vec![[0.0; 3]; n_star],
        weights: vec![0.0; n_star],
    };
    let mut converged = false;
    let mut iterations = 0;
    let mut minres_total = 0usize;
    // Inner solves run loose while the mapping is still moving; once it
    // reaches a fixed point the tolerance tightens to the configured value
    // and the fixed point is re-verified at full accuracy.
    let loose_tol = config.linear_rel_tol.max(1e-6);
    let mut tol = loose_tol;

    for iter in 0..config.max_iters {
        iterations = iter + 1;
        let sol = solver.solve(
            &ws,
            &mapping,
            n_star,
            solution.as_ref(),
            tol,
            config.minres_max_iters,
        )?;
        minres_total += sol.outcome.iterations;
        stresses = mechanical_stresses(&ws, &mapping, &sol.sigma_star, &sol.eta);
        update_material_states(&ws, &mapping, &stresses, &sol.sigma_star, &mut database);
        solution = Some(sol);

        if iter == 0 && config.stress_reinit && n_star > 1 {
            // One-time reinitialization against the stress range of the
            // database, now that stresses exist.
            let stress_features: Vec<Vec<f64>> =
                stresses.iter().map(|s| s.to_vec()).collect();
            let mut rng = substream(config.seed, "ddi-kmeans", 1);
            mapping = init_mapping(
                &stress_features,
                n_star,
                &mut rng,
                InitMode::KmeansStress(&database),
            )?;
            continue;
        }

        let new_mapping = reassign_mapping(&ws, &stresses, &database);
        if new_mapping == mapping {
            if tol <= config.linear_rel_tol {
                converged = true;
                break;
            }
            tol = config.linear_rel_tol;
            continue;
        }
        mapping = new_mapping;
    }

    let solution = solution.expect("at least one iteration ran");
    let zeta_forces = recover_zeta_forces(&ws, &stresses);
    let residual = equilibrium_residual(&ws, &stresses);
    let loss = ddi_loss(&ws, &stresses, &database, &mapping);
    Ok(DdiResult {
        database,
        mapping,
        mech_strains: ws.strains.clone(),
        mech_stresses: stresses,
        zeta_forces,
        iterations,
        converged,
        minres_iterations: minres_total,
        eliminated_states: solution.eliminated,
        equilibrium_residual: residual,
        loss,
        n_quad: ws.nq,
        n_snap: ws.n_snap,
    })
}

/// Weighted update of the material states from the current mapping: stresses
/// are taken from the saddle solve; strains are the weighted mean of the
/// assigned mechanical strains (under the per-point metric for the adapted
/// formulation). States without assigned points are left untouched.
fn update_material_states(
    ws: &DdiWorkspace,
    mapping: &[usize],
    _stresses: &[[f64; 3]],
    sigma_star: &[[f64; 3]],
    db: &mut MaterialDatabase,
) {
    let n_star = db.strains.len();
    db.stresses.copy_from_slice(sigma_star);
    let mut weight_sum = vec![0.0; n_star];
    for (pt, &z) in mapping.iter().enumerate() {
        weight_sum[z] += ws.weights[pt];
    }
    db.weights.copy_from_slice(&weight_sum);

    match &ws.metric {
        Metric::Constant { .. } => {
            let mut acc = vec![[0.0; 4]; n_star];
            for (pt, &z) in mapping.iter().enumerate() {
                let w = ws.weights[pt];
                for c in 0..4 {
                    acc[z][c] += w * ws.strains[pt][c];
                }
            }
            for z in 0..n_star {
                if weight_sum[z] > 0.0 {
                    for c in 0..4 {
                        db.strains[z][c] = acc[z][c] / weight_sum[z];
                    }
                }
            }
        }
        Metric::PerPoint { strain, .. } => {
            // Weighted mean under the per-point metric: solve the small
            // symmetric system per state.
            let mut lhs = vec![Matrix4::<f64>::zeros(); n_star];
            let mut rhs = vec![Vector4::<f64>::zeros(); n_star];
            for (pt, &z) in mapping.iter().enumerate() {
                let w = ws.weights[pt];
                let m = &strain[pt];
                lhs[z] += m * w;
                rhs[z] += m * Vector4::from_column_slice(&ws.strains[pt]) * w;
            }
            for z in 0..n_star {
                if weight_sum[z] <= 0.0 {
                    continue;
                }
                match lhs[z].lu().solve(&rhs[z]) {
                    Some(e) => db.strains[z] = [e[0], e[1], e[2], e[3]],
                    None => {
                        // Singular metric sum: fall back to the unweighted mean.
                        let mut acc = [0.0; 4];
                        let mut count = 0.0;
                        for (pt, &zz) in mapping.iter().enumerate() {
                            if zz == z {
                                for c in 0..4 {
                                    acc[c] += ws.strains[pt][c];
                                }
                                count += 1.0;
                            }
                        }
                        for c in 0..4 {
                            db.strains[z][c] = acc[c] / count;
                        }
                    }
                }
            }
        }
    }
}

/// Assigns every point to the database state minimizing the pointwise
/// distance under the formulation metric; ties break to the lowest index.
pub(crate) fn reassign_mapping(
    ws: &DdiWorkspace,
    stresses: &[[f64; 3]],
    db: &MaterialDatabase,
) -> Vec<usize> {
    let n_star = db.strains.len();
    (0..ws.n_points())
        .map(|pt| {
            let mut best = 0usize;
            let mut best_d = f64::INFINITY;
            for z in 0..n_star {
                let d = ws.distance(pt, &stresses[pt], db, z);
                if d < best_d {
                    best_d = d;
                    best = z;
                }
            }
            best
        })
        .collect()
}

/// Deviation between the iterative saddle-point solve and a dense LU solve of
/// the same first-iteration system, as max |x_it - x_dense| / max |x_dense|.
/// Intended for small verification meshes.
pub fn solver_oracle_deviation(input: &DdiInput, config: &DdiConfig) -> crate::Result<f64> {
    let ws = DdiWorkspace::build(input, config)?;
    let n_star = config.n_star.resolve(ws.n_points())?;
    let strain_features: Vec<Vec<f64>> = ws
        .strains
        .iter()
        .map(|e| vec![e[0], e[1], e[2], e[3] / SQRT2])
        .collect();
    let mut rng = substream(config.seed, "ddi-kmeans", 0);
    let mapping = init_mapping(&strain_features, n_star, &mut rng, InitMode::KmeansStrain)?;

    let solver = SaddleSolver::new(&ws);
    let (matrix, rhs, _active) = solver.assemble(&ws, &mapping, n_star);
    let mut x_it = vec![0.0; matrix.nrows()];
    let outcome = crate::linalg::minres(
        &matrix,
        &rhs,
        &mut x_it,
        &crate::linalg::MinresOptions {
            rel_tol: config.linear_rel_tol,
            max_iters: config.minres_max_iters,
            diagonal_scaling: true,
            scaling: None,
        },
    );
    if !outcome.converged {
        return Err(crate::Error::Solver("iterative solve did not converge".into()));
    }
    let dense = matrix.to_dense();
    let x_dense = dense
        .lu()
        .solve(&nalgebra::DVector::from_column_slice(&rhs))
        .ok_or_else(|| crate::Error::Solver("dense oracle solve failed".into()))?;
    let scale = x_dense.amax().max(1e-300);
    let dev = x_it
        .iter()
        .zip(x_dense.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0_f64, f64::max);
    Ok(dev / scale)
}
