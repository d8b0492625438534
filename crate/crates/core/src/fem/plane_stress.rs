use nalgebra::{Matrix2, SMatrix};

use crate::continuum::{DefGrad, NeoHookeParams, SymTensor2};

/// Maximum iterations for the out-of-plane stretch solve.
const LAMBDA3_MAX_ITERS: usize = 50;
/// Absolute tolerance on the out-of-plane Cauchy stress (MPa).
const SIGMA33_TOL: f64 = 1e-12;

/// Solves for the out-of-plane stretch making sigma_33 vanish for the
/// neo-Hookean response at a given in-plane deformation gradient.
///
/// The residual T_33(lambda3) = mu + lambda d / 2 - (2 mu + lambda)/(2 lambda3^2)
/// with d = det(C_2d) is monotone in lambda3, so the scalar Newton iteration
/// converges from lambda3 = 1 for every admissible state.
pub fn plane_stress_lambda3(f2d: &Matrix2<f64>, p: &NeoHookeParams) -> crate::Result<f64> {
    let det_f2d = f2d.determinant();
    if !det_f2d.is_finite() || det_f2d <= 0.0 {
        return Err(crate::Error::Domain(format!(
            "in-plane deformation gradient must have positive determinant, got {det_f2d}"
        )));
    }
    let d = det_f2d * det_f2d; // det C_2d
    let two_mu_lam = 2.0 * p.mu + p.lambda;
    let constant = p.mu + 0.5 * p.lambda * d;
    let mut l3 = 1.0_f64;
    for _ in 0..LAMBDA3_MAX_ITERS {
        let t33 = constant - 0.5 * two_mu_lam / (l3 * l3);
        // sigma_33 = lambda3^2 T_33 / J with J = det(F2d) lambda3.
        let sigma33 = l3 * t33 / det_f2d;
        if sigma33.abs() <= SIGMA33_TOL {
            return Ok(l3);
        }
        let dt33 = two_mu_lam / (l3 * l3 * l3);
        let step = t33 / dt33;
        let mut next = l3 - step;
        if next <= 0.0 {
            next = 0.5 * l3;
        }
        l3 = next;
    }
    Err(crate::Error::Solver(format!(
        "plane-stress stretch iteration did not converge (det F2d = {det_f2d})"
    )))
}

/// Condensed plane-stress response of the neo-Hookean model at one
/// quadrature point.
#[derive(Debug, Clone)]
pub struct PlaneStressState {
    pub lambda3: f64,
    /// Full deformation gradient including the out-of-plane stretch.
    pub f: DefGrad,
    pub psi: f64,
    /// In-plane first Piola-Kirchhoff components P_aA.
    pub piola_2d: Matrix2<f64>,
    /// Condensed material tangent dP_aA/dF_bB as a 4x4 matrix in the slot
    /// order (11, 12, 21, 22).
    pub tangent_2d: SMatrix<f64, 4, 4>,
    pub cauchy: SymTensor2,
}

/// Index into the flattened in-plane slot order (11, 12, 21, 22).
fn slot(a: usize, b: usize) -> usize {
    2 * a + b
}

pub fn plane_stress_response(
    f2d: &Matrix2<f64>,
    p: &NeoHookeParams,
) -> crate::Result<PlaneStressState> {
    let lambda3 = plane_stress_lambda3(f2d, p)?;
    let f = DefGrad::from_plane(f2d, lambda3)?;
    let fm = f.matrix();
    let f_inv = f.inverse();
    let j = f.det();
    let i3 = j * j;

    // P = mu (F - F^-T) + lambda/2 (I3 - 1) F^-T.
    let coef = 0.5 * p.lambda * (i3 - 1.0) - p.mu;
    let piola = fm * p.mu + f_inv.transpose() * coef;
    let piola_2d = Matrix2::new(piola[(0, 0)], piola[(0, 1)], piola[(1, 0)], piola[(1, 1)]);

    // Full tangent A_iAjB = mu d_ij d_AB
    //   + (mu - lambda/2 (I3 - 1)) Finv_Aj Finv_Bi + lambda I3 Finv_Ai Finv_Bj
    // restricted to the five active slots, then condensed over the 33 slot.
    let c2 = p.mu - 0.5 * p.lambda * (i3 - 1.0);
    let c3 = p.lambda * i3;
    let a_full = |i: usize, aa: usize, jj: usize, bb: usize| -> f64 {
        let mut v = 0.0;
        if i == jj && aa == bb {
            v += p.mu;
        }
        v += c2 * f_inv[(aa, jj)] * f_inv[(bb, i)];
        v += c3 * f_inv[(aa, i)] * f_inv[(bb, jj)];
        v
    };
    let a33 = a_full(2, 2, 2, 2);
    let mut tangent_2d = SMatrix::<f64, 4, 4>::zeros();
    for a in 0..2 {
        for aa in 0..2 {
            for b in 0..2 {
                for bb in 0..2 {
                    let direct = a_full(a, aa, b, bb);
                    let coupling = a_full(a, aa, 2, 2) * a_full(2, 2, b, bb) / a33;
                    tangent_2d[(slot(a, aa), slot(b, bb))] = direct - coupling;
                }
            }
        }
    }

    // Cauchy stress via push-forward: sigma = P F^T / J.
    let sigma_m = piola * fm.transpose() / j;
    let cauchy = SymTensor2::from_matrix_symmetrized(&sigma_m);

    let c = f.right_cauchy_green();
    let inv = crate::continuum::invariants_unchecked(&c);
    Ok(PlaneStressState {
        lambda3,
        f,
        psi: p.energy(inv.i1, inv.i3),
        piola_2d,
        tangent_2d,
        cauchy,
    })
}
