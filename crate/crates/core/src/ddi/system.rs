use nalgebra::Vector3;

use super::workspace::DdiWorkspace;
use crate::linalg::{minres, CsrMatrix, MinresOptions, MinresOutcome};

/// Saddle-point system of one outer iteration: per-snapshot stiffness-like
/// diagonal blocks coupling the multipliers, off-diagonal blocks scattering
/// the material stresses of the currently assigned states, zero block below.
/// The diagonal blocks are fixed across iterations and their triplets are
/// kept; the coupling blocks are rebuilt from the mapping each time.
pub(crate) struct SaddleSolver {
    k_triplets: Vec<(usize, usize, f64)>,
    total_eta: usize,
}

pub(crate) struct SaddleSolution {
    /// Multipliers per snapshot (dense over the workspace eta dofs).
    pub eta: Vec<Vec<f64>>,
    /// Material stresses per state (Mandel in-plane); states without assigned
    /// points keep their previous value.
    pub sigma_star: Vec<[f64; 3]>,
    /// Number of states eliminated from this solve.
    pub eliminated: usize,
    pub outcome: MinresOutcome,
}

impl SaddleSolver {
    pub fn new(ws: &DdiWorkspace) -> Self {
        let total_eta = ws.n_snap * ws.n_eta;
        let mut k_triplets = Vec::new();
        for tau in 0..ws.n_snap {
            let offset = tau * ws.n_eta;
            for g in 0..ws.nq {
                let pt = tau * ws.nq + g;
                let b = &ws.bmats[pt];
                let w = ws.weights[pt];
                let local = b.transpose() * ws.stiff_ip(pt) * b * w;
                let dofs = elem_eta_dofs(ws, g);
                for (i, &di) in dofs.iter().enumerate() {
                    let Some(di) = di else { continue };
                    for (j, &dj) in dofs.iter().enumerate() {
                        let Some(dj) = dj else { continue };
                        k_triplets.push((offset + di, offset + dj, local[(i, j)]));
                    }
                }
            }
        }
        Self {
            k_triplets,
            total_eta,
        }
    }

    /// Assembles the full system for a given mapping. Returns the matrix, the
    /// right-hand side and the active-state list (states with assigned
    /// points, in ascending order).
    pub fn assemble(
        &self,
        ws: &DdiWorkspace,
        mapping: &[usize],
        n_star: usize,
    ) -> (CsrMatrix, Vec<f64>, Vec<usize>) {
        let mut counts = vec![0usize; n_star];
        for &z in mapping {
            counts[z] += 1;
        }
        let active: Vec<usize> = (0..n_star).filter(|&z| counts[z] > 0).collect();
        let mut z_to_active = vec![usize::MAX; n_star];
        for (i, &z) in active.iter().enumerate() {
            z_to_active[z] = i;
        }

        let n = self.total_eta + 3 * active.len();
        let mut triplets = self.k_triplets.clone();
        triplets.reserve(triplets.len() + 36 * mapping.len());
        for tau in 0..ws.n_snap {
            let offset = tau * ws.n_eta;
            for g in 0..ws.nq {
                let pt = tau * ws.nq + g;
                let za = z_to_active[mapping[pt]];
                let col0 = self.total_eta + 3 * za;
                let b = &ws.bmats[pt];
                let w = ws.weights[pt];
                let dofs = elem_eta_dofs(ws, g);
                for (i, &di) in dofs.iter().enumerate() {
                    let Some(di) = di else { continue };
                    for comp in 0..3 {
                        let v = w * b[(comp, i)];
                        if v != 0.0 {
                            triplets.push((offset + di, col0 + comp, v));
                            triplets.push((col0 + comp, offset + di, v));
                        }
                    }
                }
            }
        }

        let mut rhs = vec![0.0; n];
        for tau in 0..ws.n_snap {
            let offset = tau * ws.n_eta;
            for node in 0..ws.pi.len() {
                for c in 0..2 {
                    let d = ws.eta_index[2 * node + c];
                    if d != usize::MAX {
                        rhs[offset + d] = ws.forces[tau][node][c];
                    }
                }
            }
        }
        (CsrMatrix::from_triplets(n, n, &mut triplets), rhs, active)
    }

    pub fn solve(
        &self,
        ws: &DdiWorkspace,
        mapping: &[usize],
        n_star: usize,
        warm: Option<&SaddleSolution>,
        rel_tol: f64,
        max_iters: usize,
    ) -> crate::Result<SaddleSolution> {
        let (matrix, rhs, active) = self.assemble(ws, mapping, n_star);
        let n = matrix.nrows();
        let mut x = vec![0.0; n];
        if let Some(prev) = warm {
            for tau in 0..ws.n_snap {
                let offset = tau * ws.n_eta;
                x[offset..offset + ws.n_eta].copy_from_slice(&prev.eta[tau]);
            }
            for (i, &z) in active.iter().enumerate() {
                for c in 0..3 {
                    x[self.total_eta + 3 * i + c] = prev.sigma_star[z][c];
                }
            }
        }
        let outcome = minres(
            &matrix,
            &rhs,
            &mut x,
            &MinresOptions {
                rel_tol,
                max_iters,
                diagonal_scaling: true,
                scaling: Some(self.jacobi_schur_scaling(&matrix)),
            },
        );
        if !outcome.converged {
            return Err(crate::Error::Solver(format!(
                "saddle-point solve stalled at relative residual {:.3e} after {} iterations",
                outcome.rel_residual, outcome.iterations
            )));
        }
        let eta: Vec<Vec<f64>> = (0..ws.n_snap)
            .map(|tau| x[tau * ws.n_eta..(tau + 1) * ws.n_eta].to_vec())
            .collect();
        let mut sigma_star = match warm {
            Some(prev) => prev.sigma_star.clone(),
            None => vec![[0.0; 3]; n_star],
        };
        for (i, &z) in active.iter().enumerate() {
            for c in 0..3 {
                sigma_star[z][c] = x[self.total_eta + 3 * i + c];
            }
        }
        Ok(SaddleSolution {
            eta,
            sigma_star,
            eliminated: n_star - active.len(),
            outcome,
        })
    }
}

impl SaddleSolver {
    /// Symmetric scaling adapted to the block structure: multiplier dofs by
    /// the stiffness diagonal, stress dofs by the diagonal of the Jacobi
    /// Schur complement S^T diag(K)^-1 S.
    fn jacobi_schur_scaling(&self, matrix: &CsrMatrix) -> Vec<f64> {
        let n = matrix.nrows();
        let diag = matrix.diagonal();
        let mut d = vec![1.0; n];
        for i in 0..self.total_eta {
            if diag[i] > 0.0 {
                d[i] = 1.0 / diag[i].sqrt();
            }
        }
        for j in self.total_eta..n {
            let mut schur = 0.0;
            for (col, v) in matrix.row_entries(j) {
                if col < self.total_eta && diag[col] > 0.0 {
                    schur += v * v / diag[col];
                }
            }
            if schur > 0.0 {
                d[j] = 1.0 / schur.sqrt();
            }
        }
        d
    }
}

/// Multiplier dof per (local node, component) of element `g`, or None where
/// the dof does not exist (unknown-force node or pinned).
fn elem_eta_dofs(ws: &DdiWorkspace, g: usize) -> [Option<usize>; 6] {
    let nodes = ws.elem_nodes[g];
    let mut out = [None; 6];
    for (alpha, &n) in nodes.iter().enumerate() {
        for c in 0..2 {
            let d = ws.eta_index[2 * n + c];
            if d != usize::MAX {
                out[2 * alpha + c] = Some(d);
            }
        }
    }
    out
}

/// Mechanical stresses from the solved multipliers: the assigned material
/// stress plus the metric applied to the strain-operator image of eta.
pub(crate) fn mechanical_stresses(
    ws: &DdiWorkspace,
    mapping: &[usize],
    sigma_star: &[[f64; 3]],
    eta: &[Vec<f64>],
) -> Vec<[f64; 3]> {
    let mut out = Vec::with_capacity(ws.n_points());
    for tau in 0..ws.n_snap {
        for g in 0..ws.nq {
            let pt = tau * ws.nq + g;
            let b = &ws.bmats[pt];
            let dofs = elem_eta_dofs(ws, g);
            let mut beta = Vector3::zeros();
            for (i, &d) in dofs.iter().enumerate() {
                if let Some(d) = d {
                    let v = eta[tau][d];
                    for comp in 0..3 {
                        beta[comp] += b[(comp, i)] * v;
                    }
                }
            }
            let correction = ws.apply_stiff_ip(pt, &beta);
            let base = sigma_star[mapping[pt]];
            out.push([
                base[0] + correction[0],
                base[1] + correction[1],
                base[2] + correction[2],
            ]);
        }
    }
    out
}

/// Residual of the prescribed-force equilibrium rows for given mechanical
/// stresses: max over snapshots of |f - sum w B^T sigma| / |f| on the
/// multiplier dofs.
pub(crate) fn equilibrium_residual(
    ws: &DdiWorkspace,
    stresses: &[[f64; 3]],
) -> f64 {
    let mut worst: f64 = 0.0;
    for tau in 0..ws.n_snap {
        let mut resid = vec![0.0; ws.n_eta];
        let mut fnorm = 0.0;
        for node in 0..ws.pi.len() {
            for c in 0..2 {
                let d = ws.eta_index[2 * node + c];
                if d != usize::MAX {
                    resid[d] = ws.forces[tau][node][c];
                    fnorm += ws.forces[tau][node][c].powi(2);
                }
            }
        }
        for g in 0..ws.nq {
            let pt = tau * ws.nq + g;
            let b = &ws.bmats[pt];
            let w = ws.weights[pt];
            let s = stresses[pt];
            let dofs = elem_eta_dofs(ws, g);
            for (i, &d) in dofs.iter().enumerate() {
                if let Some(d) = d {
                    resid[d] -= w * (b[(0, i)] * s[0] + b[(1, i)] * s[1] + b[(2, i)] * s[2]);
                }
            }
        }
        let rnorm: f64 = resid.iter().map(|v| v * v).sum::<f64>().sqrt();
        worst = worst.max(rnorm / fnorm.sqrt().max(1e-300));
    }
    worst
}

/// Unknown boundary forces recovered from the converged mechanical stresses
/// at the nodes without prescribed forces.
pub(crate) fn recover_zeta_forces(
    ws: &DdiWorkspace,
    stresses: &[[f64; 3]],
) -> Vec<Vec<(usize, [f64; 2])>> {
    let n_nodes = ws.pi.len();
    let mut out = Vec::with_capacity(ws.n_snap);
    for tau in 0..ws.n_snap {
        let mut acc = vec![[0.0; 2]; n_nodes];
        for g in 0..ws.nq {
            let pt = tau * ws.nq + g;
            let b = &ws.bmats[pt];
            let w = ws.weights[pt];
            let s = stresses[pt];
            for (alpha, &n) in ws.elem_nodes[g].iter().enumerate() {
                if ws.pi[n] {
                    continue;
                }
                for c in 0..2 {
                    let i = 2 * alpha + c;
                    acc[n][c] += w * (b[(0, i)] * s[0] + b[(1, i)] * s[1] + b[(2, i)] * s[2]);
                }
            }
        }
        out.push(
            (0..n_nodes)
                .filter(|&n| !ws.pi[n])
                .map(|n| (n, acc[n]))
                .collect(),
        );
    }
    out
}
