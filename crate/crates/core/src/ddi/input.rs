use crate::dataset::{ExportMode, RawDataset};
use crate::mesh::TriMesh;

/// Everything the identification needs, normalized from a raw dataset:
/// displacements, per-point thickness, nodal forces where they are known and
/// the per-node indicator of force knowledge.
#[derive(Debug, Clone)]
pub struct DdiInput {
    pub mesh: TriMesh,
    pub n_snap: usize,
    /// Per snapshot, per node.
    pub displacements: Vec<Vec<[f64; 2]>>,
    /// Deformed thickness per snapshot, per quadrature point.
    pub thickness_q: Vec<Vec<f64>>,
    /// External nodal forces per snapshot; only meaningful where `pi` is true.
    pub forces: Vec<Vec<[f64; 2]>>,
    /// True where forces are prescribed in every snapshot and both directions.
    pub pi: Vec<bool>,
    pub global_force: Vec<f64>,
}

impl DdiInput {
    /// Prepares identification input from a raw dataset.
    ///
    /// Ideal datasets carry nodal forces directly; the indicator is derived
    /// from the per-snapshot force lists. Realistic datasets carry only the
    /// global force: a homogeneous nominal traction F/A0 is integrated along
    /// the force boundary (pointing away from the pulling direction), all
    /// other nodes outside the unknown-force boundary get zero force, and
    /// nodal thickness is averaged onto the quadrature points.
    pub fn from_raw(raw: &RawDataset) -> crate::Result<Self> {
        let mesh = raw.mesh.clone();
        let n_nodes = mesh.num_nodes();
        let n_snap = raw.snapshots.len();
        if n_snap == 0 {
            return Err(crate::Error::Config("dataset has no snapshots".into()));
        }
        let thickness_q = raw.thickness_at_quadpoints();
        for (tau, h) in thickness_q.iter().enumerate() {
            if h.len() != mesh.num_elements() {
                return Err(crate::Error::Config(format!(
                    "snapshot {}: thickness count {} does not match element count {}",
                    tau + 1,
                    h.len(),
                    mesh.num_elements()
                )));
            }
        }
        let displacements: Vec<Vec<[f64; 2]>> = raw
            .snapshots
            .iter()
            .map(|s| s.displacements.clone())
            .collect();
        let global_force: Vec<f64> = raw.snapshots.iter().map(|s| s.global_force).collect();

        let (forces, pi) = match raw.meta.mode {
            ExportMode::Ideal => {
                let mut pi = vec![true; n_nodes];
                let mut forces = Vec::with_capacity(n_snap);
                for snap in &raw.snapshots {
                    let mut f = vec![[f64::NAN, f64::NAN]; n_nodes];
                    for &(n, fv) in &snap.forces_known {
                        if n >= n_nodes {
                            return Err(crate::Error::Config(format!(
                                "force entry references node {n} out of {n_nodes}"
                            )));
                        }
                        f[n] = fv;
                    }
                    for n in 0..n_nodes {
                        if f[n][0].is_nan() {
                            pi[n] = false;
                        }
                    }
                    forces.push(f);
                }
                for f in &mut forces {
                    for (n, fv) in f.iter_mut().enumerate() {
                        if !pi[n] {
                            *fv = [0.0, 0.0];
                        }
                    }
                }
                (forces, pi)
            }
            ExportMode::Realistic => {
                let zeta = mesh.boundary_set(&raw.meta.zeta_boundary)?;
                let mut pi = vec![true; n_nodes];
                for &n in zeta {
                    pi[n] = false;
                }
                let f_nodes = mesh.boundary_set(&raw.meta.force_boundary)?.to_vec();
                let edge_len: f64 = polyline_length(&mesh, &f_nodes)?;
                let area0 = edge_len * mesh.h0();
                let mut forces = Vec::with_capacity(n_snap);
                for snap in &raw.snapshots {
                    let p_bar = snap.global_force / area0;
                    let mut f = vec![[0.0; 2]; n_nodes];
                    for (n, fv) in
                        mesh.traction_to_nodal_forces(&f_nodes, p_bar, [0.0, -1.0])?
                    {
                        f[n] = fv;
                    }
                    forces.push(f);
                }
                (forces, pi)
            }
        };

        if pi.iter().all(|&p| !p) {
            return Err(crate::Error::Config(
                "no node has prescribed forces; identification is underdetermined".into(),
            ));
        }
        Ok(Self {
            mesh,
            n_snap,
            displacements,
            thickness_q,
            forces,
            pi,
            global_force,
        })
    }

    pub fn n_points(&self) -> usize {
        self.n_snap * self.mesh.num_elements()
    }
}

fn polyline_length(mesh: &TriMesh, nodes: &[usize]) -> crate::Result<f64> {
    let set: std::collections::BTreeSet<usize> = nodes.iter().copied().collect();
    let mut total = 0.0;
    let mut found = false;
    let mut seen = std::collections::BTreeSet::new();
    for conn in mesh.elements() {
        for k in 0..3 {
            let (a, b) = (conn[k], conn[(k + 1) % 3]);
            if set.contains(&a) && set.contains(&b) && seen.insert((a.min(b), a.max(b))) {
                let (pa, pb) = (mesh.node(a), mesh.node(b));
                total += ((pb[0] - pa[0]).powi(2) + (pb[1] - pa[1]).powi(2)).sqrt();
                found = true;
            }
        }
    }
    if !found {
        return Err(crate::Error::Mesh(
            "force boundary contains no element edges".into(),
        ));
    }
    Ok(total)
}
