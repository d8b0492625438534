use nalgebra::{Matrix2, Matrix3, Matrix4, SMatrix};

use super::{DdiConfig, DdiInput, Formulation, MaterialDatabase};
use crate::continuum::{DefGrad, SymTensor2, SymTensor4};
use crate::mesh::{bmatrix_deformed, bmatrix_total, Connectivity};

/// Per-point metric of the loss: constant isotropic for the updated and
/// original total Lagrangian formulations, the pulled-back tensor for the
/// adapted one.
#[derive(Debug, Clone)]
pub(crate) enum Metric {
    Constant {
        scale: f64,
    },
    PerPoint {
        /// Mandel-active block of the strain metric per point.
        strain: Vec<Matrix4<f64>>,
        /// In-plane Mandel block of the inverse (stress) metric per point.
        stress_inv: Vec<Matrix3<f64>>,
        /// In-plane Mandel block of the metric, used by the stress update and
        /// the stiffness-like system blocks.
        stiff_ip: Vec<Matrix3<f64>>,
    },
}

/// Preprocessed identification data: mechanical strains, quadrature weights,
/// strain operators and the per-point metric. Everything here is fixed across
/// outer iterations.
pub struct DdiWorkspace {
    pub(crate) formulation: Formulation,
    pub(crate) n_snap: usize,
    pub(crate) nq: usize,
    /// Mandel-active mechanical strains per point (pt = tau * nq + g).
    pub(crate) strains: Vec<[f64; 4]>,
    /// Quadrature weight w J h per point.
    pub(crate) weights: Vec<f64>,
    /// Mandel strain operator per point.
    pub(crate) bmats: Vec<SMatrix<f64, 3, 6>>,
    pub(crate) elem_nodes: Vec<[usize; 3]>,
    pub(crate) metric: Metric,
    /// Multiplier dof index per (2 * node + comp); usize::MAX where absent.
    pub(crate) eta_index: Vec<usize>,
    pub(crate) n_eta: usize,
    pub(crate) forces: Vec<Vec<[f64; 2]>>,
    pub(crate) pi: Vec<bool>,
}

impl DdiWorkspace {
    pub fn build(input: &DdiInput, config: &DdiConfig) -> crate::Result<Self> {
        if config.pseudo_stiffness <= 0.0 {
            return Err(crate::Error::Config("pseudo stiffness must be > 0".into()));
        }
        let mesh = &input.mesh;
        let nq = mesh.num_elements();
        let n_snap = input.n_snap;
        let h0 = mesh.h0();
        let conn_ref = Connectivity::reference(mesh)?;

        let mut strains = Vec::with_capacity(nq * n_snap);
        let mut weights = Vec::with_capacity(nq * n_snap);
        let mut bmats = Vec::with_capacity(nq * n_snap);
        let mut metric_strain = Vec::new();
        let mut metric_stress_inv = Vec::new();
        let mut metric_stiff = Vec::new();
        let adapted = config.formulation == Formulation::AdaptedTotalLagrangian;

        for tau in 0..n_snap {
            let u = &input.displacements[tau];
            let conn_def = if config.formulation == Formulation::UpdatedLagrangian {
                Some(Connectivity::deformed(mesh, u)?)
            } else {
                None
            };
            for g in 0..nq {
                let h = input.thickness_q[tau][g];
                let lambda3 = h / h0;
                if lambda3 <= 0.0 {
                    return Err(crate::Error::Domain(format!(
                        "snapshot {}, point {g}: non-positive stretch from thickness",
                        tau + 1
                    )));
                }
                let f2d = conn_ref.def_grad_2d(mesh, g, u);
                let det_f2d = f2d.determinant();
                if det_f2d <= 0.0 {
                    return Err(crate::Error::Domain(format!(
                        "snapshot {}, point {g}: measured element inverted",
                        tau + 1
                    )));
                }
                match config.formulation {
                    Formulation::UpdatedLagrangian => {
                        let conn_def = conn_def.as_ref().unwrap();
                        strains.push(almansi_strain(&f2d, lambda3));
                        weights.push(Connectivity::WEIGHT * conn_def.jac_det(g) * h);
                        bmats.push(bmatrix_deformed(conn_def.grads(g)));
                    }
                    Formulation::TotalLagrangian | Formulation::AdaptedTotalLagrangian => {
                        strains.push(green_strain(&f2d, lambda3));
                        weights.push(Connectivity::WEIGHT * conn_ref.jac_det(g) * h0);
                        bmats.push(bmatrix_total(conn_ref.grads(g), &f2d));
                        if adapted {
                            let f = DefGrad::from_plane(&f2d, lambda3)?;
                            let (m_e, m_s_inv, m_stiff) =
                                adapted_metric(config.pseudo_stiffness, &f)?;
                            metric_strain.push(m_e);
                            metric_stress_inv.push(m_s_inv);
                            metric_stiff.push(m_stiff);
                        }
                    }
                }
            }
        }

        let metric = if adapted {
            Metric::PerPoint {
                strain: metric_strain,
                stress_inv: metric_stress_inv,
                stiff_ip: metric_stiff,
            }
        } else {
            Metric::Constant {
                scale: config.pseudo_stiffness,
            }
        };

        // Multiplier dofs: two per prescribed-force node, minus pins.
        let pinned: std::collections::BTreeSet<usize> = config
            .pinned_eta
            .iter()
            .map(|&(n, c)| 2 * n + c)
            .collect();
        let all_pi = input.pi.iter().all(|&p| p);
        if all_pi && pinned.len() < 3 {
            return Err(crate::Error::Config(
                "forces are prescribed at every node: pin at least three multiplier dofs \
                 to remove the rigid modes"
                    .into(),
            ));
        }
        let mut eta_index = vec![usize::MAX; 2 * mesh.num_nodes()];
        let mut n_eta = 0;
        for n in 0..mesh.num_nodes() {
            if !input.pi[n] {
                continue;
            }
            for c in 0..2 {
                if !pinned.contains(&(2 * n + c)) {
                    eta_index[2 * n + c] = n_eta;
                    n_eta += 1;
                }
            }
        }
        if n_eta == 0 {
            return Err(crate::Error::Config("no multiplier dofs remain".into()));
        }

        Ok(Self {
            formulation: config.formulation,
            n_snap,
            nq,
            strains,
            weights,
            bmats,
            elem_nodes: mesh.elements().to_vec(),
            metric,
            eta_index,
            n_eta,
            forces: input.forces.clone(),
            pi: input.pi.clone(),
        })
    }

    pub fn n_points(&self) -> usize {
        self.n_snap * self.nq
    }

    /// Pointwise squared distance between the mechanical state at `pt` (with
    /// stress `sigma`) and material state `z`, under the formulation metric.
    /// Quadrature weights are a positive per-point factor and do not change
    /// the minimizer, so they are left out here.
    pub(crate) fn distance(
        &self,
        pt: usize,
        sigma: &[f64; 3],
        db: &MaterialDatabase,
        z: usize,
    ) -> f64 {
        let de = sub4(&self.strains[pt], &db.strains[z]);
        let ds = sub3(sigma, &db.stresses[z]);
        match &self.metric {
            Metric::Constant { scale } => {
                scale * dot4(&de, &de) + dot3(&ds, &ds) / scale
            }
            Metric::PerPoint {
                strain, stress_inv, ..
            } => {
                let ev = nalgebra::Vector4::from_column_slice(&de);
                let sv = nalgebra::Vector3::from_column_slice(&ds);
                (ev.transpose() * strain[pt] * ev)[(0, 0)]
                    + (sv.transpose() * stress_inv[pt] * sv)[(0, 0)]
            }
        }
    }

    /// In-plane metric block applied to a Mandel vector (the stress update
    /// c : b eta term).
    pub(crate) fn apply_stiff_ip(&self, pt: usize, v: &nalgebra::Vector3<f64>) -> nalgebra::Vector3<f64> {
        match &self.metric {
            Metric::Constant { scale } => v * *scale,
            Metric::PerPoint { stiff_ip, .. } => stiff_ip[pt] * v,
        }
    }

    pub(crate) fn stiff_ip(&self, pt: usize) -> Matrix3<f64> {
        match &self.metric {
            Metric::Constant { scale } => Matrix3::identity() * *scale,
            Metric::PerPoint { stiff_ip, .. } => stiff_ip[pt],
        }
    }
}

/// Distance of one mechanical state to one database entry; exposed for
/// exhaustive verification of assignments.
pub fn point_distance(
    ws: &DdiWorkspace,
    pt: usize,
    sigma: &[f64; 3],
    db: &MaterialDatabase,
    z: usize,
) -> f64 {
    ws.distance(pt, sigma, db, z)
}

/// Distance part of the identification loss: one half of the weighted sum of
/// strain- and stress-gap quadratic forms over all points. The equilibrium
/// constraint terms vanish for equilibrated states and are not included.
pub fn ddi_loss(
    ws: &DdiWorkspace,
    stresses: &[[f64; 3]],
    db: &MaterialDatabase,
    mapping: &[usize],
) -> f64 {
    let mut total = 0.0;
    for pt in 0..ws.n_points() {
        total += 0.5 * ws.weights[pt] * ws.distance(pt, &stresses[pt], db, mapping[pt]);
    }
    total
}

/// Euler-Almansi strain in Mandel-active components from the in-plane
/// deformation gradient and the out-of-plane stretch.
fn almansi_strain(f2d: &Matrix2<f64>, lambda3: f64) -> [f64; 4] {
    let b2d = f2d * f2d.transpose();
    let b_inv = b2d.try_inverse().expect("det F2d > 0 checked");
    let e11 = 0.5 * (1.0 - b_inv[(0, 0)]);
    let e22 = 0.5 * (1.0 - b_inv[(1, 1)]);
    let e12 = 0.5 * (0.0 - b_inv[(0, 1)]);
    let e33 = 0.5 * (1.0 - 1.0 / (lambda3 * lambda3));
    [e11, e22, e33, super::SQRT2 * e12]
}

/// Green-Lagrange strain in Mandel-active components.
fn green_strain(f2d: &Matrix2<f64>, lambda3: f64) -> [f64; 4] {
    let c2d = f2d.transpose() * f2d;
    let e11 = 0.5 * (c2d[(0, 0)] - 1.0);
    let e22 = 0.5 * (c2d[(1, 1)] - 1.0);
    let e12 = 0.5 * c2d[(0, 1)];
    let e33 = 0.5 * (lambda3 * lambda3 - 1.0);
    [e11, e22, e33, super::SQRT2 * e12]
}

/// Metric blocks of the pulled-back pseudo stiffness at one point.
fn adapted_metric(
    scale: f64,
    f: &DefGrad,
) -> crate::Result<(Matrix4<f64>, Matrix3<f64>, Matrix3<f64>)> {
    let j = f.det();
    let c = f.right_cauchy_green();
    let c_inv = c
        .inverse()
        .ok_or_else(|| crate::Error::Domain("singular right Cauchy-Green tensor".into()))?;
    let tensor = SymTensor4::sym_outer(&c_inv).scaled(scale * j);
    let inverse = SymTensor4::sym_outer(&c).scaled(1.0 / (scale * j));
    Ok((
        tensor.mandel_active(),
        inverse.mandel_inplane(),
        tensor.mandel_inplane(),
    ))
}

pub(crate) fn sub4(a: &[f64; 4], b: &[f64; 4]) -> [f64; 4] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]]
}

pub(crate) fn sub3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn dot4(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

pub(crate) fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}
