use super::*;
use crate::continuum::{invariants_unchecked, kinematics, neo_hooke, NeoHookeParams};
use crate::ddi::SQRT2;
use crate::fem::plane_stress_response;
use approx::assert_relative_eq;
use nalgebra::Matrix3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

fn random_model(width: usize, rng: &mut ChaCha12Rng) -> PannModel {
    let s = 1.0 / (width as f64).sqrt();
    PannModel {
        w_outer: (0..width).map(|_| s * rng.random::<f64>()).collect(),
        w_inv: (0..width)
            .map(|_| std::array::from_fn(|_| s * rng.random::<f64>()))
            .collect(),
        w_star: (0..width)
            .map(|_| s * (2.0 * rng.random::<f64>() - 1.0))
            .collect(),
        bias: (0..width)
            .map(|_| 2.0 * rng.random::<f64>() - 1.0)
            .collect(),
        lambda_gr: 0.01,
    }
}

fn random_def_grad(rng: &mut ChaCha12Rng) -> DefGrad {
    loop {
        let m = Matrix3::from_fn(|i, j| {
            let base = if i == j { 1.0 } else { 0.0 };
            base + 0.4 * (rng.random::<f64>() - 0.5)
        });
        if m.determinant() > 0.3 {
            return DefGrad::new(m).unwrap();
        }
    }
}

#[test]
fn constant_network_degeneracy() {
    // One neuron, unit outer weight, all inner weights and bias zero: the
    // network is constant ln 2, the offset cancels it, the normalization
    // constant vanishes, and only the growth term remains.
    let model = PannModel {
        w_outer: vec![1.0],
        w_inv: vec![[0.0; 3]],
        w_star: vec![0.0],
        bias: vec![0.0],
        lambda_gr: 0.05,
    };
    assert_relative_eq!(model.energy_nn(&REFERENCE_INVARIANTS), 2.0_f64.ln(), epsilon = 1e-15);
    assert_relative_eq!(model.stress_normalization(), 0.0, epsilon = 1e-15);
    let f = DefGrad::diag(2.0, 1.0, 1.0).unwrap();
    let inv = invariants_unchecked(&f.right_cauchy_green());
    let j = 2.0_f64;
    assert_relative_eq!(
        model.energy(&inv),
        0.05 * (j + 1.0 / j - 2.0).powi(2),
        epsilon = 1e-14
    );
    // At J = 1 the growth stress also vanishes: total stress is zero even at
    // finite shear.
    let f_shear = DefGrad::new(Matrix3::new(1.0, 0.7, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0)).unwrap();
    let t = model.second_piola(&f_shear.right_cauchy_green()).unwrap();
    assert!(t.norm() < 1e-14);
}

#[test]
fn growth_term_blows_up_under_compression() {
    let mut rng = ChaCha12Rng::seed_from_u64(31);
    let model = random_model(4, &mut rng);
    let mut last = model
        .energy_at(&DefGrad::diag(0.9, 0.9, 0.9).unwrap())
        .unwrap();
    for k in 1..6 {
        let lam = 0.9_f64.powi(k + 1);
        let e = model.energy_at(&DefGrad::diag(lam, lam, lam).unwrap()).unwrap();
        assert!(e > last, "energy must grow towards J -> 0");
        last = e;
    }
    assert!(last > 10.0 * model.lambda_gr);
}

#[test]
fn normalizations_hold_for_random_parameters() {
    let mut rng = ChaCha12Rng::seed_from_u64(32);
    for _ in 0..50 {
        let model = random_model(6, &mut rng);
        let inv0 = invariants_unchecked(&crate::continuum::SymTensor2::identity());
        assert_eq!(model.energy(&inv0), 0.0);
        let p = model.first_piola(&DefGrad::identity()).unwrap();
        assert!(p.norm() < 1e-10, "P(1) = {}", p.norm());
    }
}

#[test]
fn normalization_constant_hand_value() {
    // Single neuron, W = 1, w = (1, 0, 0), b = 0: the preactivation at the
    // reference state is I1 = 3, so the constant is 2 sigmoid(3).
    let model = PannModel {
        w_outer: vec![1.0],
        w_inv: vec![[1.0, 0.0, 0.0]],
        w_star: vec![0.0],
        bias: vec![0.0],
        lambda_gr: 0.01,
    };
    let expected = 2.0 / (1.0 + (-3.0_f64).exp());
    assert_relative_eq!(model.stress_normalization(), expected, epsilon = 1e-15);
    assert_relative_eq!(model.stress_normalization(), 1.9051482536448664, epsilon = 1e-12);
}

#[test]
fn analytic_piola_matches_finite_differences() {
    let mut rng = ChaCha12Rng::seed_from_u64(33);
    let h = 1e-6;
    for _ in 0..10 {
        let model = random_model(5, &mut rng);
        let f = random_def_grad(&mut rng);
        let p = model.first_piola(&f).unwrap();
        let scale = p.norm().max(1e-8);
        for i in 0..3 {
            for j in 0..3 {
                let mut fp = *f.matrix();
                let mut fm = *f.matrix();
                fp[(i, j)] += h;
                fm[(i, j)] -= h;
                let ep = model.energy_at(&DefGrad::new(fp).unwrap()).unwrap();
                let em = model.energy_at(&DefGrad::new(fm).unwrap()).unwrap();
                let fd = (ep - em) / (2.0 * h);
                assert!(
                    (p[(i, j)] - fd).abs() <= 1e-6 * scale.max(fd.abs()),
                    "P[{i}{j}] = {} vs fd {}",
                    p[(i, j)],
                    fd
                );
            }
        }
    }
}

#[test]
fn parameter_gradient_matches_finite_differences() {
    let mut rng = ChaCha12Rng::seed_from_u64(34);
    let model = random_model(4, &mut rng);
    // A handful of plane-stress-like samples with nonzero targets.
    let samples: Vec<Sample> = (0..6)
        .map(|k| {
            let lam = 0.9 + 0.08 * k as f64;
            let c = [lam * lam, 1.0 / lam, 0.95, 0.1 * SQRT2];
            Sample {
                deformation: c,
                stress: [0.2 * k as f64, -0.1, 0.0, 0.05 * SQRT2],
                weight: 1.0,
            }
        })
        .collect();
    let (f0, grad) = pann_loss_and_grad(&model, &samples, StressMetric::TlT).unwrap();
    assert!(f0 > 0.0);
    let h = 1e-7;
    let mut idx = 0;
    let mut perturbed = |m: &PannModel, i: usize, delta: f64| -> PannModel {
        let mut out = m.clone();
        let w = m.width();
        if i < w {
            out.w_outer[i] += delta;
        } else if i < 4 * w {
            let a = (i - w) / 3;
            let d = (i - w) % 3;
            out.w_inv[a][d] += delta;
        } else if i < 5 * w {
            out.w_star[i - 4 * w] += delta;
        } else {
            out.bias[i - 5 * w] += delta;
        }
        let _ = idx;
        idx += 1;
        out
    };
    for i in 0..6 * model.width() {
        let (fp, _) = pann_loss_and_grad(&perturbed(&model, i, h), &samples, StressMetric::TlT).unwrap();
        let (fm, _) = pann_loss_and_grad(&perturbed(&model, i, -h), &samples, StressMetric::TlT).unwrap();
        let fd = (fp - fm) / (2.0 * h);
        assert!(
            (grad[i] - fd).abs() <= 1e-6 * (1.0 + fd.abs().max(grad[i].abs())),
            "grad[{i}] = {} vs fd {}",
            grad[i],
            fd
        );
    }

    // Same check through the Cauchy-stress metric.
    let samples_ul: Vec<Sample> = samples
        .iter()
        .map(|s| Sample {
            deformation: s.deformation,
            stress: s.stress,
            weight: 1.0,
        })
        .collect();
    let (_, grad_ul) = pann_loss_and_grad(&model, &samples_ul, StressMetric::UlSigma).unwrap();
    for i in 0..6 * model.width() {
        let (fp, _) =
            pann_loss_and_grad(&perturbed(&model, i, h), &samples_ul, StressMetric::UlSigma).unwrap();
        let (fm, _) =
            pann_loss_and_grad(&perturbed(&model, i, -h), &samples_ul, StressMetric::UlSigma).unwrap();
        let fd = (fp - fm) / (2.0 * h);
        assert!(
            (grad_ul[i] - fd).abs() <= 1e-6 * (1.0 + fd.abs().max(grad_ul[i].abs())),
            "ul grad[{i}] = {} vs fd {}",
            grad_ul[i],
            fd
        );
    }
}

#[test]
fn exact_predictions_zero_loss_and_gradient() {
    let mut rng = ChaCha12Rng::seed_from_u64(35);
    let model = random_model(4, &mut rng);
    // Targets generated by the model itself.
    let samples: Vec<Sample> = (0..5)
        .map(|k| {
            let lam: f64 = 0.95 + 0.04 * k as f64;
            let c = crate::continuum::SymTensor2::new([
                lam * lam,
                1.0 / lam,
                0.98,
                0.03,
                0.0,
                0.0,
            ]);
            let t = model.second_piola(&c).unwrap();
            Sample {
                deformation: [c.get(0, 0), c.get(1, 1), c.get(2, 2), SQRT2 * c.get(0, 1)],
                stress: [t.get(0, 0), t.get(1, 1), t.get(2, 2), SQRT2 * t.get(0, 1)],
                weight: 1.0,
            }
        })
        .collect();
    let (mse, grad) = pann_loss_and_grad(&model, &samples, StressMetric::TlT).unwrap();
    assert!(mse < 1e-28);
    assert!(grad.iter().all(|g| g.abs() < 1e-13));

    // Doubling all residuals quadruples the loss.
    let doubled: Vec<Sample> = samples
        .iter()
        .map(|s| {
            let mut out = s.clone();
            for c in 0..4 {
                // Targets shifted so the residual doubles from a unit shift.
                out.stress[c] += 0.1;
            }
            out
        })
        .collect();
    let (mse1, _) = pann_loss_and_grad(&model, &doubled, StressMetric::TlT).unwrap();
    let quadrupled: Vec<Sample> = samples
        .iter()
        .map(|s| {
            let mut out = s.clone();
            for c in 0..4 {
                out.stress[c] += 0.2;
            }
            out
        })
        .collect();
    let (mse2, _) = pann_loss_and_grad(&model, &quadrupled, StressMetric::TlT).unwrap();
    assert_relative_eq!(mse2, 4.0 * mse1, max_relative = 1e-12);
}

#[test]
fn network_is_midpoint_convex_in_invariants() {
    let mut rng = ChaCha12Rng::seed_from_u64(36);
    for _ in 0..20 {
        let model = random_model(6, &mut rng);
        for _ in 0..500 {
            let a: [f64; 4] = std::array::from_fn(|k| {
                if k == 3 {
                    -4.0 * rng.random::<f64>()
                } else {
                    4.0 * rng.random::<f64>()
                }
            });
            let b: [f64; 4] = std::array::from_fn(|k| {
                if k == 3 {
                    -4.0 * rng.random::<f64>()
                } else {
                    4.0 * rng.random::<f64>()
                }
            });
            let mid = std::array::from_fn(|k| 0.5 * (a[k] + b[k]));
            let lhs = model.energy_nn(&mid);
            let rhs = 0.5 * (model.energy_nn(&a) + model.energy_nn(&b));
            assert!(lhs <= rhs + 1e-12 * (1.0 + rhs.abs()));
        }
    }
}

#[test]
fn stress_is_objective_under_rotation() {
    let mut rng = ChaCha12Rng::seed_from_u64(37);
    for _ in 0..20 {
        let model = random_model(5, &mut rng);
        let f = random_def_grad(&mut rng);
        let axis = nalgebra::Unit::new_normalize(nalgebra::Vector3::new(
            rng.random::<f64>() - 0.5,
            rng.random::<f64>() - 0.5,
            rng.random::<f64>() - 0.5,
        ));
        let q = nalgebra::Rotation3::from_axis_angle(&axis, rng.random::<f64>() * 3.0);
        let qf = DefGrad::new(q.matrix() * f.matrix()).unwrap();

        let k = kinematics(&f);
        let kq = kinematics(&qf);
        let iv = invariants_unchecked(&k.c);
        let iv_q = invariants_unchecked(&kq.c);
        assert_relative_eq!(iv.i1, iv_q.i1, epsilon = 1e-10, max_relative = 1e-10);
        assert_relative_eq!(iv.i2, iv_q.i2, epsilon = 1e-10, max_relative = 1e-10);
        assert_relative_eq!(iv.i3, iv_q.i3, epsilon = 1e-10, max_relative = 1e-10);

        // Cauchy stress transforms as sigma(QbQ^T) = Q sigma(b) Q^T.
        let s = model.cauchy(&k.b).unwrap().to_matrix();
        let sq = model.cauchy(&kq.b).unwrap().to_matrix();
        let rotated = q.matrix() * s * q.matrix().transpose();
        assert!((sq - rotated).norm() <= 1e-10 * (1.0 + s.norm()));
    }
}

#[test]
fn recovers_its_own_samples() {
    // Data sampled exactly from one network is matched nearly perfectly by a
    // retrained one.
    let mut rng = ChaCha12Rng::seed_from_u64(38);
    let teacher = random_model(4, &mut rng);
    let mut samples = Vec::new();
    for k in 0..80 {
        let lam = 0.85 + 0.006 * k as f64;
        let shear = 0.15 * ((k % 7) as f64 / 6.0 - 0.5);
        let c = crate::continuum::SymTensor2::new([
            lam * lam,
            1.0 / lam,
            0.9 + 0.003 * k as f64,
            shear,
            0.0,
            0.0,
        ]);
        let t = teacher.second_piola(&c).unwrap();
        samples.push(Sample {
            deformation: [c.get(0, 0), c.get(1, 1), c.get(2, 2), SQRT2 * c.get(0, 1)],
            stress: [t.get(0, 0), t.get(1, 1), t.get(2, 2), SQRT2 * t.get(0, 1)],
            weight: 1.0,
        });
    }
    let mut dataset = Dataset {
        metric: StressMetric::TlT,
        samples,
        split: vec![],
        excluded: 0,
    };
    dataset.split = vec![Split::Calibration; dataset.samples.len()];
    dataset.shuffle_split(0.7, 3).unwrap();
    let report = train(
        &dataset,
        &TrainConfig {
            width: 4,
            lambda_gr: teacher.lambda_gr,
            restarts: 3,
            max_iters: 1500,
            seed: 4,
        },
    )
    .unwrap();
    assert!(
        report.test_r2 >= 0.9999,
        "self-recovery test R2 = {}",
        report.test_r2
    );
}

#[test]
fn fits_neo_hooke_plane_stress_states() {
    // Uniaxial, equibiaxial and shear plane-stress states of the reference
    // model, fitted with width 8.
    let p = NeoHookeParams::new(1.0, 0.3).unwrap();
    let mut samples = Vec::new();
    let mut push_state = |f2d: nalgebra::Matrix2<f64>| {
        let state = plane_stress_response(&f2d, &p).unwrap();
        let resp = neo_hooke(&state.f, &p);
        let c = state.f.right_cauchy_green();
        let t = resp.second_piola;
        samples.push(Sample {
            deformation: [c.get(0, 0), c.get(1, 1), c.get(2, 2), SQRT2 * c.get(0, 1)],
            stress: [t.get(0, 0), t.get(1, 1), t.get(2, 2), SQRT2 * t.get(0, 1)],
            weight: 1.0,
        });
    };
    let mut lam = 0.8;
    while lam <= 1.6 {
        push_state(nalgebra::Matrix2::new(lam, 0.0, 0.0, 1.0));
        push_state(nalgebra::Matrix2::new(lam, 0.0, 0.0, lam));
        let gamma = 0.5 * (lam - 1.0);
        push_state(nalgebra::Matrix2::new(1.0, gamma, 0.0, 1.0));
        lam += 0.05;
    }
    let n = samples.len();
    let mut dataset = Dataset {
        metric: StressMetric::TlT,
        samples,
        split: vec![Split::Calibration; n],
        excluded: 0,
    };
    dataset.shuffle_split(0.7, 9).unwrap();
    let report = train(
        &dataset,
        &TrainConfig {
            width: 8,
            lambda_gr: 0.01,
            restarts: 4,
            max_iters: 2500,
            seed: 11,
        },
    )
    .unwrap();
    assert!(
        report.test_r2 >= 0.999,
        "neo-Hooke fit test R2 = {} (restart losses {:?})",
        report.test_r2,
        report.restart_losses
    );
    // The trained weights respect the convexity constraints exactly.
    assert!(report.model.w_outer.iter().all(|&w| w >= 0.0));
    assert!(report.model.w_inv.iter().flatten().all(|&w| w >= 0.0));
}

#[test]
fn model_file_round_trip() {
    let mut rng = ChaCha12Rng::seed_from_u64(39);
    let model = random_model(3, &mut rng);
    let text = model.to_text();
    let back = PannModel::from_text(&text, std::path::Path::new("mem")).unwrap();
    assert_eq!(back, model);
    assert_eq!(back.to_text(), text);
}

#[test]
fn rejects_negative_weights() {
    let model = PannModel {
        w_outer: vec![-0.1],
        w_inv: vec![[0.0; 3]],
        w_star: vec![0.0],
        bias: vec![0.0],
        lambda_gr: 0.01,
    };
    assert!(model.validate().is_err());
}
