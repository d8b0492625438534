use super::*;
use crate::dataset::{DatasetMeta, ExportMode, Snapshot};
use crate::mesh::generate_plate_mesh;

fn toy_dataset() -> RawDataset {
    let mesh = generate_plate_mesh(10.0, 20.0, &[], 2.0, 5.0).unwrap();
    let snapshots = (1..=3)
        .map(|i| {
            let s = i as f64 / 3.0;
            Snapshot {
                index: i,
                displacements: mesh
                    .nodes()
                    .iter()
                    .map(|p| [0.01 * s * p[0], 0.1 * s * p[1]])
                    .collect(),
                forces_known: vec![],
                thickness: Thickness::Nodes(vec![5.0 - 0.2 * s; mesh.num_nodes()]),
                global_force: 10.0 * s,
            }
        })
        .collect();
    RawDataset {
        mesh,
        snapshots,
        meta: DatasetMeta {
            mode: ExportMode::Realistic,
            zeta_boundary: "top".into(),
            force_boundary: "bottom".into(),
            material: None,
        },
    }
}

#[test]
fn zero_noise_is_identity() {
    let reference = toy_dataset();
    let mut noisy = toy_dataset();
    let cfg = NoiseConfig {
        omega: 0.0,
        eta: 0.0,
        delta_x: 100.0,
        grid_n: 64,
        ell: 1.0 / 64.0,
        seed: 5,
    };
    apply_noise(&mut noisy, &cfg).unwrap();
    for (a, b) in reference.snapshots.iter().zip(&noisy.snapshots) {
        assert_eq!(a, b);
    }
}

#[test]
fn force_noise_bounded_and_deterministic() {
    let omega = 1e-4;
    let reference = toy_dataset();
    let mut a = toy_dataset();
    let mut b = toy_dataset();
    apply_force_noise(&mut a, omega, 42).unwrap();
    apply_force_noise(&mut b, omega, 42).unwrap();
    for ((sa, sb), sr) in a.snapshots.iter().zip(&b.snapshots).zip(&reference.snapshots) {
        assert_eq!(sa.global_force, sb.global_force);
        let rel = (sa.global_force / sr.global_force - 1.0).abs();
        assert!(rel <= omega);
        // Displacements untouched by force noise.
        assert_eq!(sa.displacements, sr.displacements);
    }
}

#[test]
fn force_multiplier_mean_is_one() {
    // Monte-Carlo check of the U[1-omega, 1+omega] draw.
    let omega = 0.5;
    let n = 100_000;
    let mut sum = 0.0;
    for i in 0..n {
        let mut rng = substream(7, "force-noise", i);
        let mult: f64 = 1.0 - omega + 2.0 * omega * rng.random::<f64>();
        assert!((1.0 - omega..=1.0 + omega).contains(&mult));
        sum += mult;
    }
    assert!((sum / n as f64 - 1.0).abs() < 1e-3);
}

#[test]
fn field_noise_bounds_hold_exactly() {
    let reference = toy_dataset();
    let mut noisy = toy_dataset();
    let cfg = NoiseConfig {
        omega: 0.0,
        eta: 5e-4,
        delta_x: 100.0,
        grid_n: 128,
        ell: 1.0 / 128.0,
        seed: 11,
    };
    apply_field_noise(&mut noisy, &cfg).unwrap();
    let amp = cfg.eta * cfg.delta_x;
    let mut changed = false;
    for (sn, sr) in noisy.snapshots.iter().zip(&reference.snapshots) {
        for (un, ur) in sn.displacements.iter().zip(&sr.displacements) {
            assert!((un[0] - ur[0]).abs() <= amp + 1e-15);
            assert!((un[1] - ur[1]).abs() <= amp + 1e-15);
            changed |= un != ur;
        }
        match (&sn.thickness, &sr.thickness) {
            (Thickness::Nodes(a), Thickness::Nodes(b)) => {
                for (x, y) in a.iter().zip(b) {
                    assert!((x - y).abs() <= 2.0 * amp + 1e-15);
                }
            }
            _ => panic!("thickness kind changed"),
        }
        // Global force untouched by field noise.
        assert_eq!(sn.global_force, sr.global_force);
    }
    assert!(changed);
}

#[test]
fn field_noise_deterministic() {
    let cfg = NoiseConfig {
        omega: 1e-4,
        eta: 1e-4,
        delta_x: 100.0,
        grid_n: 64,
        ell: 1.0 / 64.0,
        seed: 99,
    };
    let mut a = toy_dataset();
    let mut b = toy_dataset();
    apply_noise(&mut a, &cfg).unwrap();
    apply_noise(&mut b, &cfg).unwrap();
    for (sa, sb) in a.snapshots.iter().zip(&b.snapshots) {
        assert_eq!(sa, sb);
    }
}

#[test]
fn rejects_negative_amplitudes() {
    assert!(NoiseConfig::new(-1.0, 0.0, 100.0, 0).is_err());
    assert!(NoiseConfig::new(0.0, -1.0, 100.0, 0).is_err());
}
