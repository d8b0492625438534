use super::*;
use approx::assert_relative_eq;
use nalgebra::Matrix3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

fn random_def_grad(rng: &mut ChaCha12Rng) -> DefGrad {
    loop {
        let m = Matrix3::from_fn(|i, j| {
            let base = if i == j { 1.0 } else { 0.0 };
            base + 0.4 * (rng.random::<f64>() - 0.5)
        });
        if m.determinant() > 0.2 {
            return DefGrad::new(m).unwrap();
        }
    }
}

fn random_spd(rng: &mut ChaCha12Rng) -> SymTensor2 {
    let a = Matrix3::from_fn(|_, _| rng.random::<f64>() - 0.5);
    let m = a.transpose() * a + Matrix3::identity() * 0.1;
    SymTensor2::from_matrix_symmetrized(&m)
}

fn random_sym(rng: &mut ChaCha12Rng) -> SymTensor2 {
    SymTensor2::new(std::array::from_fn(|_| rng.random::<f64>() - 0.5))
}

#[test]
fn kinematics_identity() {
    let k = kinematics(&DefGrad::identity());
    assert_eq!(k.c, SymTensor2::identity());
    assert_eq!(k.b, SymTensor2::identity());
    assert_eq!(k.e_green.norm(), 0.0);
    assert_eq!(k.e_almansi.norm(), 0.0);
    assert_eq!(k.j, 1.0);
}

#[test]
fn kinematics_uniaxial_stretch() {
    // F = diag(2,1,1): C11 = 4, E11 = 1.5; b11 = 4, e11 = (1 - 1/4)/2 = 0.375.
    let k = kinematics(&DefGrad::diag(2.0, 1.0, 1.0).unwrap());
    assert_relative_eq!(k.e_green.get(0, 0), 1.5, epsilon = 1e-14);
    assert_relative_eq!(k.e_almansi.get(0, 0), 0.375, epsilon = 1e-14);
    assert_relative_eq!(k.j, 2.0, epsilon = 1e-14);
}

#[test]
fn almansi_is_pullback_of_green() {
    let mut rng = ChaCha12Rng::seed_from_u64(11);
    for _ in 0..50 {
        let f = random_def_grad(&mut rng);
        let k = kinematics(&f);
        let f_inv = f.inverse();
        let e_from_pullback = f_inv.transpose() * k.e_green.to_matrix() * f_inv;
        let diff = (k.e_almansi.to_matrix() - e_from_pullback).norm();
        assert!(diff <= 1e-12 * (1.0 + k.e_almansi.to_matrix().norm()));
    }
}

#[test]
fn invariants_identity() {
    let i = invariants(&SymTensor2::identity()).unwrap();
    assert_eq!((i.i1, i.i2, i.i3, i.i1_star), (3.0, 3.0, 1.0, -2.0));
}

#[test]
fn invariants_uniaxial() {
    // C = diag(4,1,1): Cof C = diag(1,4,4), so (I1, I2, I3, I1*) = (6, 9, 4, -4).
    let i = invariants(&SymTensor2::diag(4.0, 1.0, 1.0)).unwrap();
    assert_relative_eq!(i.i1, 6.0, epsilon = 1e-14);
    assert_relative_eq!(i.i2, 9.0, epsilon = 1e-14);
    assert_relative_eq!(i.i3, 4.0, epsilon = 1e-14);
    assert_relative_eq!(i.i1_star, -4.0, epsilon = 1e-14);
}

#[test]
fn invariants_reject_indefinite() {
    assert!(invariants(&SymTensor2::diag(1.0, -1.0, 1.0)).is_err());
    assert!(invariants(&SymTensor2::diag(1.0, 0.0, 1.0)).is_err());
}

#[test]
fn invariant_identities_random_spd() {
    let mut rng = ChaCha12Rng::seed_from_u64(12);
    for _ in 0..50 {
        let c = random_spd(&mut rng);
        let i = invariants(&c).unwrap();
        let m = c.to_matrix();
        let tr_c2 = (m * m).trace();
        assert_relative_eq!(i.i2, 0.5 * (i.i1 * i.i1 - tr_c2), epsilon = 1e-12, max_relative = 1e-12);
        assert_relative_eq!(c.cof().det(), i.i3 * i.i3, epsilon = 1e-12, max_relative = 1e-12);
    }
}

#[test]
fn stress_transform_identity() {
    let sigma = SymTensor2::new([1.0, 2.0, 3.0, 0.4, 0.5, 0.6]);
    let s = stress_transform(&sigma, &DefGrad::identity());
    assert_eq!(s.kirchhoff, sigma);
    assert_eq!(s.second_piola, sigma);
    assert_relative_eq!((s.first_piola - sigma.to_matrix()).norm(), 0.0, epsilon = 1e-15);
}

#[test]
fn stress_transform_uniaxial() {
    // sigma = diag(1,0,0), F = diag(2,1,1): T = J F^-1 sigma F^-T = diag(0.5, 0, 0).
    let s = stress_transform(
        &SymTensor2::diag(1.0, 0.0, 0.0),
        &DefGrad::diag(2.0, 1.0, 1.0).unwrap(),
    );
    assert_relative_eq!(s.second_piola.get(0, 0), 0.5, epsilon = 1e-14);
    assert_relative_eq!(s.second_piola.get(1, 1), 0.0, epsilon = 1e-14);
}

#[test]
fn stress_transform_round_trip() {
    let mut rng = ChaCha12Rng::seed_from_u64(13);
    for _ in 0..50 {
        let f = random_def_grad(&mut rng);
        let sigma = random_sym(&mut rng);
        let s = stress_transform(&sigma, &f);
        let back = push_forward_second_piola(&s.second_piola, &f);
        assert!((back.to_matrix() - sigma.to_matrix()).norm() <= 1e-12 * (1.0 + sigma.norm()));
    }
}

#[test]
fn neo_hooke_reference_state() {
    let p = NeoHookeParams::new(1.0, 0.3).unwrap();
    let r = neo_hooke(&DefGrad::identity(), &p);
    assert_relative_eq!(r.psi, 0.0, epsilon = 1e-15);
    assert_relative_eq!(r.second_piola.norm(), 0.0, epsilon = 1e-15);
    assert_relative_eq!(r.cauchy.norm(), 0.0, epsilon = 1e-15);
}

#[test]
fn neo_hooke_lame_constants() {
    // E = 1 MPa, nu = 0.3: mu = 1/2.6, lambda = 0.3/(1.3 * 0.4).
    let p = NeoHookeParams::new(1.0, 0.3).unwrap();
    assert_relative_eq!(p.mu, 0.384615384615384615, epsilon = 1e-14);
    assert_relative_eq!(p.lambda, 0.576923076923076923, epsilon = 1e-14);
}

#[test]
fn neo_hooke_rejects_bad_params() {
    assert!(NeoHookeParams::new(0.0, 0.3).is_err());
    assert!(NeoHookeParams::new(1.0, 0.5).is_err());
    assert!(NeoHookeParams::new(1.0, -1.0).is_err());
}

/// Independent scalar evaluation of the stress formula for diagonal F,
/// written out from raw arithmetic rather than the tensor machinery.
fn oracle_t11_diag(mu: f64, lambda: f64, l1: f64, l2: f64, l3: f64) -> f64 {
    let (c1, c2, c3) = (l1 * l1, l2 * l2, l3 * l3);
    let i3 = c1 * c2 * c3;
    let cof_c11 = c2 * c3;
    mu + (0.5 * lambda - 0.5 * (2.0 * mu + lambda) / i3) * cof_c11
}

fn oracle_t33_diag(mu: f64, lambda: f64, l1: f64, l2: f64, l3: f64) -> f64 {
    oracle_t11_diag(mu, lambda, l3, l2, l1)
}

#[test]
fn neo_hooke_uniaxial_stress_curve_matches_oracle() {
    // Uniaxial stress along axis 1: lateral stretch solved by bisection on the
    // independently evaluated transverse stress.
    let p = NeoHookeParams::new(1.0, 0.3).unwrap();
    let mut lam = 0.5;
    while lam <= 2.01 {
        let mut lo = 0.2;
        let mut hi = 3.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if oracle_t33_diag(p.mu, p.lambda, lam, mid, mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let lat = 0.5 * (lo + hi);
        let f = DefGrad::diag(lam, lat, lat).unwrap();
        let r = neo_hooke(&f, &p);
        let t11_oracle = oracle_t11_diag(p.mu, p.lambda, lam, lat, lat);
        assert_relative_eq!(r.second_piola.get(0, 0), t11_oracle, epsilon = 1e-10, max_relative = 1e-10);
        // Transverse stress vanishes at the bisection solution.
        assert!(r.second_piola.get(1, 1).abs() < 1e-10);
        assert!(r.psi >= 0.0);
        lam += 0.1;
    }
}

#[test]
fn neo_hooke_first_piola_matches_energy_gradient() {
    let p = NeoHookeParams::new(1.0, 0.3).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(14);
    let h = 1e-6;
    for _ in 0..20 {
        let f = random_def_grad(&mut rng);
        let r = neo_hooke(&f, &p);
        let piola = stress_transform(&r.cauchy, &f).first_piola;
        for i in 0..3 {
            for j in 0..3 {
                let mut fp = *f.matrix();
                let mut fm = *f.matrix();
                fp[(i, j)] += h;
                fm[(i, j)] -= h;
                let psi_p = {
                    let fd = DefGrad::new(fp).unwrap();
                    neo_hooke(&fd, &p).psi
                };
                let psi_m = {
                    let fd = DefGrad::new(fm).unwrap();
                    neo_hooke(&fd, &p).psi
                };
                let fd_grad = (psi_p - psi_m) / (2.0 * h);
                assert_relative_eq!(piola[(i, j)], fd_grad, epsilon = 1e-8, max_relative = 1e-6);
            }
        }
    }
}

#[test]
fn neo_hooke_objectivity() {
    let p = NeoHookeParams::new(1.0, 0.3).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(15);
    for _ in 0..20 {
        let f = random_def_grad(&mut rng);
        // Rotation from a random axis-angle.
        let axis = nalgebra::Unit::new_normalize(nalgebra::Vector3::new(
            rng.random::<f64>() - 0.5,
            rng.random::<f64>() - 0.5,
            rng.random::<f64>() - 0.5,
        ));
        let q = nalgebra::Rotation3::from_axis_angle(&axis, rng.random::<f64>() * 3.0);
        let qf = DefGrad::new(q.matrix() * f.matrix()).unwrap();
        let (r, rq) = (neo_hooke(&f, &p), neo_hooke(&qf, &p));
        assert_relative_eq!(r.psi, rq.psi, epsilon = 1e-12, max_relative = 1e-12);
        let i_f = invariants_unchecked(&f.right_cauchy_green());
        let i_qf = invariants_unchecked(&qf.right_cauchy_green());
        assert_relative_eq!(i_f.i1, i_qf.i1, epsilon = 1e-12, max_relative = 1e-12);
        assert_relative_eq!(i_f.i2, i_qf.i2, epsilon = 1e-12, max_relative = 1e-12);
        assert_relative_eq!(i_f.i3, i_qf.i3, epsilon = 1e-12, max_relative = 1e-12);
    }
}

#[test]
fn pullback_identity_equals_constant() {
    let pb = pullback_pseudo_stiffness(2.5, &DefGrad::identity()).unwrap();
    let constant = PseudoStiffness::constant(2.5).unwrap();
    assert_eq!(pb.tensor(), constant.tensor());
    assert_eq!(pb.inverse(), constant.inverse());
}

#[test]
fn pullback_uniaxial_component() {
    // F = diag(2,1,1): C^-1_11 = 1/4, J = 2, so the 1111 component is
    // scale * J * C^-1_11^2 = 2 * scale / 16.
    let scale = 3.0;
    let pb = pullback_pseudo_stiffness(scale, &DefGrad::diag(2.0, 1.0, 1.0).unwrap()).unwrap();
    assert_relative_eq!(pb.tensor().components()[(0, 0)], 2.0 * scale / 16.0, epsilon = 1e-14);
}

#[test]
fn pullback_symmetry_and_definiteness() {
    let mut rng = ChaCha12Rng::seed_from_u64(16);
    for _ in 0..30 {
        let f = random_def_grad(&mut rng);
        let pb = pullback_pseudo_stiffness(1.0, &f).unwrap();
        let t = pb.tensor();
        assert!(t.has_major_symmetry(1e-12));
        assert!(t.is_positive_definite());
        for _ in 0..5 {
            let e = random_sym(&mut rng);
            assert!(t.quad_form(&e) >= 0.0);
        }
        // Closed-form inverse really is the tensor inverse.
        let prod = t.to_mandel() * pb.inverse().to_mandel();
        assert!((prod - nalgebra::Matrix6::identity()).norm() < 1e-10);
    }
}

#[test]
fn sym_tensor4_apply_and_quad_form() {
    // The isotropic tensor acts as scale * identity on symmetric tensors.
    let c = SymTensor4::isotropic(2.0);
    let e = SymTensor2::new([0.1, -0.2, 0.3, 0.05, -0.06, 0.07]);
    let r = c.apply(&e);
    assert!((r.to_matrix() - e.to_matrix() * 2.0).norm() < 1e-14);
    // Quadratic form doubles the full contraction e : e.
    assert_relative_eq!(c.quad_form(&e), 2.0 * e.dot(&e), epsilon = 1e-14);
}

#[test]
fn def_grad_rejects_inverted() {
    assert!(DefGrad::diag(-1.0, 1.0, 1.0).is_err());
    assert!(DefGrad::new(Matrix3::zeros()).is_err());
}
