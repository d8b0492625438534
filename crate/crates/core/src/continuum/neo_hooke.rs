use super::{invariants_unchecked, push_forward_second_piola, DefGrad, SymTensor2};

/// Compressible neo-Hookean material, parameterized by initial Young's
/// modulus and Poisson's ratio (MPa / dimensionless).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeoHookeParams {
    pub e_mod: f64,
    pub nu: f64,
    pub mu: f64,
    pub lambda: f64,
}

impl NeoHookeParams {
    pub fn new(e_mod: f64, nu: f64) -> crate::Result<Self> {
        if e_mod <= 0.0 {
            return Err(crate::Error::Domain("Young's modulus must be > 0".into()));
        }
        if nu <= -1.0 || nu >= 0.5 {
            return Err(crate::Error::Domain(
                "Poisson's ratio must lie in (-1, 0.5)".into(),
            ));
        }
        Ok(Self {
            e_mod,
            nu,
            mu: e_mod / (2.0 * (1.0 + nu)),
            lambda: e_mod * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)),
        })
    }

    /// Strain energy density psi(I1, I3) in MPa.
    pub fn energy(&self, i1: f64, i3: f64) -> f64 {
        0.5 * (self.mu * (i1 - i3.ln() - 3.0)
            + 0.5 * self.lambda * (i3 - i3.ln() - 1.0))
    }

    /// Second Piola-Kirchhoff stress from the right Cauchy-Green tensor:
    /// T = mu 1 + (lambda/2 - (2 mu + lambda)/(2 I3)) Cof C.
    pub fn second_piola_from_c(&self, c: &SymTensor2) -> SymTensor2 {
        let i3 = c.det();
        let coef = 0.5 * self.lambda - 0.5 * (2.0 * self.mu + self.lambda) / i3;
        SymTensor2::identity().scaled(self.mu) + c.cof().scaled(coef)
    }

    /// Cauchy stress from the left Cauchy-Green tensor:
    /// sigma = (mu/J) b + (lambda J / 2 - (2 mu + lambda)/(2 J)) 1.
    pub fn cauchy_from_b(&self, b: &SymTensor2) -> SymTensor2 {
        let j = b.det().sqrt();
        let coef = 0.5 * self.lambda * j - 0.5 * (2.0 * self.mu + self.lambda) / j;
        b.scaled(self.mu / j) + SymTensor2::identity().scaled(coef)
    }
}

/// Energy and stress response of the neo-Hookean model at a deformation state.
#[derive(Debug, Clone, Copy)]
pub struct NeoHookeResponse {
    /// Strain energy density (MPa).
    pub psi: f64,
    /// Second Piola-Kirchhoff stress (MPa).
    pub second_piola: SymTensor2,
    /// Cauchy stress (MPa).
    pub cauchy: SymTensor2,
}

/// Evaluates the neo-Hookean energy and stresses at a deformation gradient.
pub fn neo_hooke(f: &DefGrad, p: &NeoHookeParams) -> NeoHookeResponse {
    let c = f.right_cauchy_green();
    let inv = invariants_unchecked(&c);
    let t = p.second_piola_from_c(&c);
    NeoHookeResponse {
        psi: p.energy(inv.i1, inv.i3),
        second_piola: t,
        cauchy: push_forward_second_piola(&t, f),
    }
}
