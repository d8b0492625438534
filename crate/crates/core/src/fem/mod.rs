//! Nonlinear plane-stress finite-element solver producing virtual-experiment
//! snapshots under the neo-Hookean reference model.

mod plane_stress;

pub use plane_stress::{plane_stress_lambda3, plane_stress_response, PlaneStressState};

use std::collections::BTreeMap;

use crate::continuum::NeoHookeParams;
use crate::dataset::{DatasetMeta, ExportMode, RawDataset, Snapshot, Thickness};
use crate::linalg::BandedSym;
use crate::mesh::{Connectivity, TriMesh};

/// Prescribed displacement on one component of a boundary node set; the value
/// is the final magnitude, applied in equal increments.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletBc {
    pub set: String,
    pub comp: usize,
    pub value: f64,
}

/// Traction on a boundary edge polyline, scaled with the load factor.
#[derive(Debug, Clone, PartialEq)]
pub struct TractionBc {
    pub set: String,
    pub direction: [f64; 2],
    /// Final traction magnitude (MPa).
    pub p_max: f64,
}

/// Monotone load program: the final boundary conditions reached in `n_snap`
/// equal increments, each converged state emitted as one snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadProgram {
    pub n_snap: usize,
    pub dirichlet: Vec<DirichletBc>,
    pub tractions: Vec<TractionBc>,
    /// Boundary set whose reaction resultant is reported as the global
    /// testing force.
    pub driven_set: String,
    /// Component of the reaction resultant (0 = x, 1 = y).
    pub driven_comp: usize,
}

/// Converged state of one load increment.
#[derive(Debug, Clone)]
pub struct FeSnapshot {
    pub index: usize,
    pub u: Vec<[f64; 2]>,
    /// Out-of-plane stretch per quadrature point.
    pub lambda3: Vec<f64>,
    /// Internal nodal forces assembled over the mesh (reactions at driven
    /// nodes, ~0 at free nodes).
    pub internal_forces: Vec<[f64; 2]>,
    /// Global testing force: reaction resultant on the driven boundary (N).
    pub global_force: f64,
}

const NEWTON_MAX_ITERS: usize = 25;
const NEWTON_REL_TOL: f64 = 1e-9;
const NEWTON_ABS_TOL: f64 = 1e-12;
/// Smallest substep as a fraction of one load increment.
const MIN_SUBSTEP: f64 = 1.0 / 64.0;

/// Internal force assembly plus per-point plane-stress data at a displacement
/// state.
pub struct AssembledState {
    pub internal_forces: Vec<[f64; 2]>,
    pub lambda3: Vec<f64>,
    pub total_energy: f64,
}

/// Assembles internal nodal forces, per-point stretches and the total strain
/// energy at displacements `u`.
pub fn assemble_state(
    mesh: &TriMesh,
    conn: &Connectivity,
    u: &[[f64; 2]],
    p: &NeoHookeParams,
) -> crate::Result<AssembledState> {
    let h0 = mesh.h0();
    let mut forces = vec![[0.0; 2]; mesh.num_nodes()];
    let mut lambda3 = Vec::with_capacity(mesh.num_elements());
    let mut energy = 0.0;
    for e in 0..mesh.num_elements() {
        let f2d = conn.def_grad_2d(mesh, e, u);
        let state = plane_stress_response(&f2d, p)?;
        let vol = Connectivity::WEIGHT * conn.jac_det(e) * h0;
        energy += vol * state.psi;
        let grads = conn.grads(e);
        let conn_e = mesh.element(e);
        for (alpha, &n) in conn_e.iter().enumerate() {
            for a in 0..2 {
                let mut s = 0.0;
                for big_a in 0..2 {
                    s += state.piola_2d[(a, big_a)] * grads[alpha][big_a];
                }
                forces[n][a] += vol * s;
            }
        }
        lambda3.push(state.lambda3);
    }
    Ok(AssembledState {
        internal_forces: forces,
        lambda3,
        total_energy: energy,
    })
}

struct DofMap {
    /// free index per dof (2*node + comp), usize::MAX for constrained.
    free_index: Vec<usize>,
    n_free: usize,
    /// (dof, final prescribed value) pairs.
    prescribed: Vec<(usize, f64)>,
    half_bandwidth: usize,
}

fn build_dof_map(mesh: &TriMesh, loads: &LoadProgram) -> crate::Result<DofMap> {
    let n_dof = 2 * mesh.num_nodes();
    let mut prescribed_map: BTreeMap<usize, f64> = BTreeMap::new();
    for bc in &loads.dirichlet {
        if bc.comp > 1 {
            return Err(crate::Error::Config(format!(
                "Dirichlet component must be 0 or 1, got {}",
                bc.comp
            )));
        }
        for &n in mesh.boundary_set(&bc.set)? {
            prescribed_map.insert(2 * n + bc.comp, bc.value);
        }
    }
    let mut free_index = vec![usize::MAX; n_dof];
    let mut n_free = 0;
    for dof in 0..n_dof {
        if !prescribed_map.contains_key(&dof) {
            free_index[dof] = n_free;
            n_free += 1;
        }
    }
    if n_free == 0 {
        return Err(crate::Error::Config("all degrees of freedom are constrained".into()));
    }
    let mut hbw = 0usize;
    for conn in mesh.elements() {
        for &ni in conn {
            for &nj in conn {
                for a in 0..2 {
                    for b in 0..2 {
                        let (fi, fj) = (free_index[2 * ni + a], free_index[2 * nj + b]);
                        if fi != usize::MAX && fj != usize::MAX {
                            hbw = hbw.max(fi.abs_diff(fj));
                        }
                    }
                }
            }
        }
    }
    Ok(DofMap {
        free_index,
        n_free,
        prescribed: prescribed_map.into_iter().collect(),
        half_bandwidth: hbw,
    })
}

/// External nodal forces from the traction program at load factor `s`.
fn applied_forces(mesh: &TriMesh, loads: &LoadProgram, s: f64) -> crate::Result<Vec<[f64; 2]>> {
    let mut f = vec![[0.0; 2]; mesh.num_nodes()];
    for tr in &loads.tractions {
        let nodes = mesh.boundary_set(&tr.set)?;
        for (n, fv) in mesh.traction_to_nodal_forces(nodes, s * tr.p_max, tr.direction)? {
            f[n][0] += fv[0];
            f[n][1] += fv[1];
        }
    }
    Ok(f)
}

/// Solves the load program, emitting one converged snapshot per increment.
pub fn solve_forward(
    mesh: &TriMesh,
    loads: &LoadProgram,
    p: &NeoHookeParams,
) -> crate::Result<Vec<FeSnapshot>> {
    if loads.n_snap == 0 {
        return Err(crate::Error::Config("load program needs n_snap >= 1".into()));
    }
    let conn = Connectivity::reference(mesh)?;
    let dofs = build_dof_map(mesh, loads)?;
    let driven = mesh.boundary_set(&loads.driven_set)?.to_vec();

    let mut u = vec![[0.0; 2]; mesh.num_nodes()];
    let mut scale = 0.0_f64;
    let mut snapshots = Vec::with_capacity(loads.n_snap);

    for k in 1..=loads.n_snap {
        let target = k as f64 / loads.n_snap as f64;
        let mut step = target - scale;
        while scale < target - 1e-14 {
            let attempt = (scale + step).min(target);
            match newton_solve(mesh, &conn, &dofs, loads, p, &u, attempt) {
                Ok(u_new) => {
                    u = u_new;
                    scale = attempt;
                    // Grow back cautiously after a successful substep.
                    step = (step * 2.0).min(target - scale + 1e-30);
                }
                Err(e) => {
                    step *= 0.5;
                    if step < MIN_SUBSTEP / loads.n_snap as f64 {
                        return Err(crate::Error::Solver(format!(
                            "load stepping exhausted at factor {scale:.4}: {e}"
                        )));
                    }
                }
            }
        }
        let state = assemble_state(mesh, &conn, &u, p)?;
        let global_force = driven
            .iter()
            .map(|&n| state.internal_forces[n][loads.driven_comp])
            .sum();
        snapshots.push(FeSnapshot {
            index: k,
            u: u.clone(),
            lambda3: state.lambda3,
            internal_forces: state.internal_forces,
            global_force,
        });
    }
    Ok(snapshots)
}

fn newton_solve(
    mesh: &TriMesh,
    conn: &Connectivity,
    dofs: &DofMap,
    loads: &LoadProgram,
    p: &NeoHookeParams,
    u_start: &[[f64; 2]],
    scale: f64,
) -> crate::Result<Vec<[f64; 2]>> {
    let mut u = u_start.to_vec();
    for &(dof, value) in &dofs.prescribed {
        u[dof / 2][dof % 2] = scale * value;
    }
    let f_ext = applied_forces(mesh, loads, scale)?;
    let f_ext_norm = norm_free(&f_ext, dofs);

    let mut residual_norm = f64::INFINITY;
    for _iter in 0..NEWTON_MAX_ITERS {
        let state = assemble_state(mesh, conn, &u, p)?;
        let ref_norm = f_ext_norm.max(norm_all(&state.internal_forces));
        residual_norm = residual_free_norm(&state.internal_forces, &f_ext, dofs);
        if residual_norm <= (NEWTON_REL_TOL * ref_norm).max(NEWTON_ABS_TOL) {
            return Ok(u);
        }

        let (k, rhs) = assemble_system(mesh, conn, dofs, p, &u, &f_ext)?;
        let du = k.factorize()?.solve(&rhs);

        // Backtracking line search on the free-dof residual norm.
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..10 {
            let mut u_try = u.clone();
            for dof in 0..2 * mesh.num_nodes() {
                let fi = dofs.free_index[dof];
                if fi != usize::MAX {
                    u_try[dof / 2][dof % 2] += t * du[fi];
                }
            }
            match assemble_state(mesh, conn, &u_try, p) {
                Ok(s_try) => {
                    let r_try = residual_free_norm(&s_try.internal_forces, &f_ext, dofs);
                    if r_try < residual_norm * (1.0 - 1e-4 * t) || r_try < NEWTON_ABS_TOL {
                        u = u_try;
                        accepted = true;
                        break;
                    }
                }
                Err(_) => {} // element inverted or stretch solve failed: shrink
            }
            t *= 0.5;
        }
        if !accepted {
            return Err(crate::Error::Solver(format!(
                "line search stalled at residual {residual_norm:.3e}"
            )));
        }
    }
    Err(crate::Error::Solver(format!(
        "Newton did not converge in {NEWTON_MAX_ITERS} iterations (residual {residual_norm:.3e})"
    )))
}

fn assemble_system(
    mesh: &TriMesh,
    conn: &Connectivity,
    dofs: &DofMap,
    p: &NeoHookeParams,
    u: &[[f64; 2]],
    f_ext: &[[f64; 2]],
) -> crate::Result<(BandedSym, Vec<f64>)> {
    let h0 = mesh.h0();
    let mut k = BandedSym::zeros(dofs.n_free, dofs.half_bandwidth);
    let mut rhs = vec![0.0; dofs.n_free];
    for n in 0..mesh.num_nodes() {
        for a in 0..2 {
            let fi = dofs.free_index[2 * n + a];
            if fi != usize::MAX {
                rhs[fi] += f_ext[n][a];
            }
        }
    }
    for e in 0..mesh.num_elements() {
        let f2d = conn.def_grad_2d(mesh, e, u);
        let state = plane_stress_response(&f2d, p)?;
        let vol = Connectivity::WEIGHT * conn.jac_det(e) * h0;
        let grads = conn.grads(e);
        let conn_e = mesh.element(e);
        // Local internal force and stiffness.
        for (alpha, &ni) in conn_e.iter().enumerate() {
            for a in 0..2 {
                let fi = dofs.free_index[2 * ni + a];
                if fi == usize::MAX {
                    continue;
                }
                let mut fint = 0.0;
                for big_a in 0..2 {
                    fint += state.piola_2d[(a, big_a)] * grads[alpha][big_a];
                }
                rhs[fi] -= vol * fint;
                for (beta, &nj) in conn_e.iter().enumerate() {
                    for b in 0..2 {
                        let fj = dofs.free_index[2 * nj + b];
                        if fj == usize::MAX || fj > fi {
                            continue;
                        }
                        let mut kij = 0.0;
                        for big_a in 0..2 {
                            for big_b in 0..2 {
                                kij += grads[alpha][big_a]
                                    * state.tangent_2d[(2 * a + big_a, 2 * b + big_b)]
                                    * grads[beta][big_b];
                            }
                        }
                        k.add(fi, fj, vol * kij);
                    }
                }
            }
        }
    }
    Ok((k, rhs))
}

fn residual_free_norm(f_int: &[[f64; 2]], f_ext: &[[f64; 2]], dofs: &DofMap) -> f64 {
    let mut s = 0.0;
    for n in 0..f_int.len() {
        for a in 0..2 {
            if dofs.free_index[2 * n + a] != usize::MAX {
                let r = f_int[n][a] - f_ext[n][a];
                s += r * r;
            }
        }
    }
    s.sqrt()
}

fn norm_free(f: &[[f64; 2]], dofs: &DofMap) -> f64 {
    let mut s = 0.0;
    for n in 0..f.len() {
        for a in 0..2 {
            if dofs.free_index[2 * n + a] != usize::MAX {
                s += f[n][a] * f[n][a];
            }
        }
    }
    s.sqrt()
}

fn norm_all(f: &[[f64; 2]]) -> f64 {
    f.iter().map(|v| v[0] * v[0] + v[1] * v[1]).sum::<f64>().sqrt()
}

/// What to write out of a solved run.
#[derive(Debug, Clone)]
pub struct ExportSpec {
    pub mode: ExportMode,
    /// Boundary set whose nodal forces are withheld.
    pub zeta_set: String,
    /// Boundary set used for traction reconstruction by consumers.
    pub force_set: String,
    pub material: Option<(f64, f64)>,
}

/// Turns solved snapshots into a raw dataset.
///
/// Ideal mode emits the assembled internal nodal forces at every node outside
/// the unknown-force boundary, plus exact per-point thickness. Realistic mode
/// withholds nodal forces entirely and reports thickness at the nodes through
/// the deformed-area-weighted projection, imitating a stereo-DIC measurement
/// chain (the projection error is deliberate).
pub fn export_raw_data(
    mesh: &TriMesh,
    snapshots: &[FeSnapshot],
    spec: &ExportSpec,
) -> crate::Result<RawDataset> {
    let zeta: std::collections::BTreeSet<usize> =
        mesh.boundary_set(&spec.zeta_set)?.iter().copied().collect();
    mesh.boundary_set(&spec.force_set)?;
    let h0 = mesh.h0();
    let mut out = Vec::with_capacity(snapshots.len());
    for snap in snapshots {
        let thickness = match spec.mode {
            ExportMode::Ideal => {
                Thickness::QuadPoints(snap.lambda3.iter().map(|&l| l * h0).collect())
            }
            ExportMode::Realistic => {
                let elem_thickness: Vec<f64> = snap.lambda3.iter().map(|&l| l * h0).collect();
                let deformed = Connectivity::deformed(mesh, &snap.u)?;
                let weights: Vec<f64> =
                    (0..mesh.num_elements()).map(|e| deformed.jac_det(e)).collect();
                Thickness::Nodes(mesh.project_to_nodes(&elem_thickness, &weights)?)
            }
        };
        let forces_known = match spec.mode {
            ExportMode::Ideal => (0..mesh.num_nodes())
                .filter(|n| !zeta.contains(n))
                .map(|n| (n, snap.internal_forces[n]))
                .collect(),
            ExportMode::Realistic => Vec::new(),
        };
        out.push(Snapshot {
            index: snap.index,
            displacements: snap.u.clone(),
            forces_known,
            thickness,
            global_force: snap.global_force,
        });
    }
    Ok(RawDataset {
        mesh: mesh.clone(),
        snapshots: out,
        meta: DatasetMeta {
            mode: spec.mode,
            zeta_boundary: spec.zeta_set.clone(),
            force_boundary: spec.force_set.clone(),
            material: spec.material,
        },
    })
}

/// Cuts the domain of interest out of a solved specimen: keeps elements whose
/// nodes all lie in the band y in [y0, y1], remaps the snapshots onto the
/// submesh, re-assembles internal forces over the submesh (so cut-boundary
/// nodes carry the internal tractions) and tags fresh `bottom` / `top` sets
/// at the band edges. The global force is carried over unchanged.
pub fn extract_doi(
    mesh: &TriMesh,
    snapshots: &[FeSnapshot],
    p: &NeoHookeParams,
    y0: f64,
    y1: f64,
) -> crate::Result<(TriMesh, Vec<FeSnapshot>)> {
    let tol = 1e-9 * (y1 - y0).abs().max(1.0);
    let (mut sub, map) = mesh.extract_submesh(|e| {
        mesh.element(e)
            .iter()
            .all(|&n| mesh.node(n)[1] >= y0 - tol && mesh.node(n)[1] <= y1 + tol)
    });
    if sub.num_elements() == 0 {
        return Err(crate::Error::Mesh("domain of interest contains no elements".into()));
    }
    // The band edges need not coincide with mesh lines; tag the extremal node
    // rows actually present in the cut, with a tolerance well below any
    // element height but far above coordinate round-off.
    let row_tol = 1e-4 * (y1 - y0).abs().max(1.0);
    let (lo, hi) = sub.bounding_box();
    sub.set_boundary(
        "bottom",
        sub.select_nodes(|_, y| (y - lo[1]).abs() < row_tol),
    );
    sub.set_boundary("top", sub.select_nodes(|_, y| (y - hi[1]).abs() < row_tol));

    let conn = Connectivity::reference(&sub)?;
    let mut out = Vec::with_capacity(snapshots.len());
    for snap in snapshots {
        let u: Vec<[f64; 2]> = map.node_new_to_old.iter().map(|&n| snap.u[n]).collect();
        let state = assemble_state(&sub, &conn, &u, p)?;
        out.push(FeSnapshot {
            index: snap.index,
            u,
            lambda3: state.lambda3,
            internal_forces: state.internal_forces,
            global_force: snap.global_force,
        });
    }
    Ok((sub, out))
}

#[cfg(test)]
mod tests;
