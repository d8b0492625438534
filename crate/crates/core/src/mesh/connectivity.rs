use nalgebra::{Matrix2, SMatrix};

use super::TriMesh;

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Configuration in which shape-function gradients are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Config {
    Reference,
    Deformed,
}

/// Shape-function gradients and quadrature data for every element, evaluated
/// either in the reference or in a deformed configuration. One quadrature
/// point per linear triangle; the quadrature-point index equals the element
/// index throughout.
#[derive(Debug, Clone)]
pub struct Connectivity {
    config: Config,
    /// grads[e][alpha][dir]: derivative of shape function alpha w.r.t. the
    /// configuration coordinates.
    grads: Vec<[[f64; 2]; 3]>,
    /// Determinant of the isoparametric Jacobian (= 2 x element area).
    jac_det: Vec<f64>,
}

impl Connectivity {
    /// Natural-coordinate quadrature weight of the single point.
    pub const WEIGHT: f64 = 0.5;

    /// Builds gradients in the reference configuration.
    pub fn reference(mesh: &TriMesh) -> crate::Result<Self> {
        Self::build(mesh, None)
    }

    /// Builds gradients in the configuration displaced by `u` (two entries
    /// per node). Fails with the element index if any element inverts.
    pub fn deformed(mesh: &TriMesh, u: &[[f64; 2]]) -> crate::Result<Self> {
        Self::build(mesh, Some(u))
    }

    fn build(mesh: &TriMesh, u: Option<&[[f64; 2]]>) -> crate::Result<Self> {
        if let Some(u) = u {
            if u.len() != mesh.num_nodes() {
                return Err(crate::Error::Mesh(
                    "displacement array length does not match node count".into(),
                ));
            }
        }
        let pos = |n: usize| -> [f64; 2] {
            let p = mesh.node(n);
            match u {
                Some(u) => [p[0] + u[n][0], p[1] + u[n][1]],
                None => p,
            }
        };
        let mut grads = Vec::with_capacity(mesh.num_elements());
        let mut jac_det = Vec::with_capacity(mesh.num_elements());
        for e in 0..mesh.num_elements() {
            let [a, b, c] = mesh.element(e);
            let (p0, p1, p2) = (pos(a), pos(b), pos(c));
            let j11 = p1[0] - p0[0];
            let j12 = p2[0] - p0[0];
            let j21 = p1[1] - p0[1];
            let j22 = p2[1] - p0[1];
            let det = j11 * j22 - j12 * j21;
            if det <= 0.0 {
                return Err(crate::Error::Mesh(format!(
                    "element {e} is inverted (Jacobian determinant {det:.3e})"
                )));
            }
            // grad N = J^-T grad_xi N with grad_xi = [(-1,-1), (1,0), (0,1)],
            // so grad N_1 and grad N_2 are the rows of J^-1.
            let inv = [[j22 / det, -j12 / det], [-j21 / det, j11 / det]];
            let g1 = [inv[0][0], inv[0][1]];
            let g2 = [inv[1][0], inv[1][1]];
            grads.push([[-g1[0] - g2[0], -g1[1] - g2[1]], g1, g2]);
            jac_det.push(det);
        }
        Ok(Self {
            config: if u.is_some() {
                Config::Deformed
            } else {
                Config::Reference
            },
            grads,
            jac_det,
        })
    }

    pub fn config(&self) -> Config {
        self.config
    }

    pub fn grads(&self, e: usize) -> &[[f64; 2]; 3] {
        &self.grads[e]
    }

    pub fn jac_det(&self, e: usize) -> f64 {
        self.jac_det[e]
    }

    /// In-plane deformation gradient F_ab = delta_ab + sum_alpha N_,b u_a at
    /// the quadrature point of element `e`. Only valid on a reference
    /// connectivity.
    pub fn def_grad_2d(&self, mesh: &TriMesh, e: usize, u: &[[f64; 2]]) -> Matrix2<f64> {
        debug_assert_eq!(self.config, Config::Reference);
        let mut f = Matrix2::identity();
        let conn = mesh.element(e);
        for (alpha, &n) in conn.iter().enumerate() {
            for a in 0..2 {
                for b in 0..2 {
                    f[(a, b)] += self.grads[e][alpha][b] * u[n][a];
                }
            }
        }
        f
    }
}

/// Strain-displacement operator of element gradients in Mandel form: rows
/// (11, 22, sqrt2 * 12), columns (node 0 x, node 0 y, node 1 x, ...).
///
/// Contracts a Mandel in-plane stress to consistent nodal forces via
/// f = (w J h) B^T s.
pub fn bmatrix_deformed(grads: &[[f64; 2]; 3]) -> SMatrix<f64, 3, 6> {
    let mut b = SMatrix::<f64, 3, 6>::zeros();
    for alpha in 0..3 {
        let g = grads[alpha];
        b[(0, 2 * alpha)] = g[0];
        b[(1, 2 * alpha + 1)] = g[1];
        b[(2, 2 * alpha)] = g[1] / SQRT2;
        b[(2, 2 * alpha + 1)] = g[0] / SQRT2;
    }
    b
}

/// Total-Lagrangian strain operator relating nodal velocities to the rate of
/// Green-Lagrange strain: B_ABc = (F_cA N_,B + F_cB N_,A) / 2, in Mandel form
/// with reference gradients.
pub fn bmatrix_total(grads_ref: &[[f64; 2]; 3], f2d: &Matrix2<f64>) -> SMatrix<f64, 3, 6> {
    let mut b = SMatrix::<f64, 3, 6>::zeros();
    for alpha in 0..3 {
        let g = grads_ref[alpha];
        for c in 0..2 {
            let col = 2 * alpha + c;
            b[(0, col)] = f2d[(c, 0)] * g[0];
            b[(1, col)] = f2d[(c, 1)] * g[1];
            b[(2, col)] = (f2d[(c, 0)] * g[1] + f2d[(c, 1)] * g[0]) / SQRT2;
        }
    }
    b
}
