//! Finite-strain kinematics, invariants, stress-measure transformations, the
//! neo-Hookean reference model and the pulled-back pseudo stiffness.
//!
//! Symmetric second-order tensors are stored as 6-component vectors in the
//! order (11, 22, 33, 12, 23, 13) with off-diagonal entries kept at their
//! tensor value (no engineering factor). Fourth-order tensors with minor
//! symmetry are stored as 6x6 matrices of plain components under the same
//! ordering; contraction helpers carry the off-diagonal weights.

mod neo_hooke;
mod tensor;

pub use nalgebra::Matrix3;
pub use neo_hooke::{neo_hooke, NeoHookeParams, NeoHookeResponse};
pub use tensor::{DefGrad, SymTensor2, SymTensor4, MANDEL_SCALE, VOIGT_PAIRS};

/// Kinematic quantities derived from a deformation gradient.
#[derive(Debug, Clone, Copy)]
pub struct Kinematics {
    /// Right Cauchy-Green tensor C = F^T F.
    pub c: SymTensor2,
    /// Left Cauchy-Green tensor b = F F^T.
    pub b: SymTensor2,
    /// Green-Lagrange strain E = (C - 1)/2.
    pub e_green: SymTensor2,
    /// Euler-Almansi strain e = (1 - b^-1)/2.
    pub e_almansi: SymTensor2,
    /// Jacobian determinant J = det F.
    pub j: f64,
}

/// Computes C, b, E, e and J for a deformation gradient with det F > 0.
pub fn kinematics(f: &DefGrad) -> Kinematics {
    let c = f.right_cauchy_green();
    let b = f.left_cauchy_green();
    let e_green = (c - SymTensor2::identity()).scaled(0.5);
    let b_inv = b.inverse().expect("b = F F^T is invertible for det F > 0");
    let e_almansi = (SymTensor2::identity() - b_inv).scaled(0.5);
    Kinematics {
        c,
        b,
        e_green,
        e_almansi,
        j: f.det(),
    }
}

/// Principal invariants of C plus the auxiliary invariant -2J.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantSet {
    /// I1 = tr C.
    pub i1: f64,
    /// I2 = tr Cof C.
    pub i2: f64,
    /// I3 = det C.
    pub i3: f64,
    /// I1* = -2 sqrt(I3) = -2J.
    pub i1_star: f64,
}

/// Computes the invariant set of a symmetric positive definite tensor.
pub fn invariants(c: &SymTensor2) -> crate::Result<InvariantSet> {
    if !c.is_positive_definite() {
        return Err(crate::Error::Domain(
            "invariants require a symmetric positive definite tensor".into(),
        ));
    }
    Ok(invariants_unchecked(c))
}

/// Same as [`invariants`] but skips the positive-definiteness check.
pub fn invariants_unchecked(c: &SymTensor2) -> InvariantSet {
    let i1 = c.trace();
    let i2 = c.cof().trace();
    let i3 = c.det();
    InvariantSet {
        i1,
        i2,
        i3,
        i1_star: -2.0 * i3.sqrt(),
    }
}

/// Stress measures obtained from a Cauchy stress by pull-back operations.
#[derive(Debug, Clone, Copy)]
pub struct StressMeasures {
    /// Kirchhoff stress tau = J sigma.
    pub kirchhoff: SymTensor2,
    /// First Piola-Kirchhoff stress P = J sigma F^-T (not symmetric).
    pub first_piola: nalgebra::Matrix3<f64>,
    /// Second Piola-Kirchhoff stress T = J F^-1 sigma F^-T.
    pub second_piola: SymTensor2,
}

/// Pulls a Cauchy stress back to Kirchhoff, first and second Piola-Kirchhoff.
pub fn stress_transform(sigma: &SymTensor2, f: &DefGrad) -> StressMeasures {
    let j = f.det();
    let f_inv = f.inverse();
    let s = sigma.to_matrix();
    let p = s * f_inv.transpose() * j;
    let t = f_inv * s * f_inv.transpose() * j;
    StressMeasures {
        kirchhoff: sigma.scaled(j),
        first_piola: p,
        second_piola: SymTensor2::from_matrix_symmetrized(&t),
    }
}

/// Push-forward of a second Piola-Kirchhoff stress: sigma = F T F^T / J.
pub fn push_forward_second_piola(t: &SymTensor2, f: &DefGrad) -> SymTensor2 {
    let m = f.matrix() * t.to_matrix() * f.matrix().transpose() / f.det();
    SymTensor2::from_matrix_symmetrized(&m)
}

/// Positive-definite metric weighting strain against stress gaps.
///
/// The constant variant is `scale` times the symmetric fourth-order identity.
/// The pulled-back variant transports that spatial tensor to the reference
/// configuration through a deformation gradient; its exact inverse is kept
/// alongside so no numerical inversion is needed downstream.
#[derive(Debug, Clone)]
pub enum PseudoStiffness {
    ConstantIsotropic { scale: f64 },
    PulledBack {
        scale: f64,
        tensor: SymTensor4,
        inverse: SymTensor4,
    },
}

impl PseudoStiffness {
    pub fn constant(scale: f64) -> crate::Result<Self> {
        if scale <= 0.0 {
            return Err(crate::Error::Domain("pseudo-stiffness scale must be > 0".into()));
        }
        Ok(PseudoStiffness::ConstantIsotropic { scale })
    }

    /// The fourth-order tensor itself.
    pub fn tensor(&self) -> SymTensor4 {
        match self {
            PseudoStiffness::ConstantIsotropic { scale } => SymTensor4::isotropic(*scale),
            PseudoStiffness::PulledBack { tensor, .. } => *tensor,
        }
    }

    /// The fourth-order inverse satisfying c : c^-1 = symmetric identity.
    pub fn inverse(&self) -> SymTensor4 {
        match self {
            PseudoStiffness::ConstantIsotropic { scale } => SymTensor4::isotropic(1.0 / *scale),
            PseudoStiffness::PulledBack { inverse, .. } => *inverse,
        }
    }

    pub fn scale(&self) -> f64 {
        match self {
            PseudoStiffness::ConstantIsotropic { scale } => *scale,
            PseudoStiffness::PulledBack { scale, .. } => *scale,
        }
    }
}

/// Pull-back of the constant isotropic metric `scale * identity` through F:
/// (scale J / 2) (C^-1_KM C^-1_LN + C^-1_KN C^-1_LM).
pub fn pullback_pseudo_stiffness(scale: f64, f: &DefGrad) -> crate::Result<PseudoStiffness> {
    if scale <= 0.0 {
        return Err(crate::Error::Domain("pseudo-stiffness scale must be > 0".into()));
    }
    let j = f.det();
    let c = f.right_cauchy_green();
    let c_inv = c
        .inverse()
        .ok_or_else(|| crate::Error::Domain("right Cauchy-Green tensor is singular".into()))?;
    let tensor = SymTensor4::sym_outer(&c_inv).scaled(scale * j);
    // sym_outer(A)^-1 = sym_outer(A^-1), so the inverse is available in closed form.
    let inverse = SymTensor4::sym_outer(&c).scaled(1.0 / (scale * j));
    Ok(PseudoStiffness::PulledBack {
        scale,
        tensor,
        inverse,
    })
}

#[cfg(test)]
mod tests;
