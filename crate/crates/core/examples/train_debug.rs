use hyperfit::pann::{pann_loss_and_grad, Sample, StressMetric};
use rand::{Rng, SeedableRng};

fn main() {
    // Reconstructed training scenario: load the database produced by the
    // variance probe path (rebuild quickly on a coarse mesh) and inspect the
    // loss landscape from a stalled initialization.
    use hyperfit::continuum::NeoHookeParams;
    use hyperfit::dataset::ExportMode;
    use hyperfit::ddi::{run_ddi, DdiConfig, DdiInput, Formulation, StateCount};
    use hyperfit::fem::{export_raw_data, solve_forward, DirichletBc, ExportSpec, LoadProgram};
    use hyperfit::mesh::{generate_plate_mesh, HoleSpec};
    use hyperfit::pann::{Dataset, PannModel};

    let p = NeoHookeParams::new(1.0, 0.3).unwrap();
    let mesh = generate_plate_mesh(
        100.0,
        100.0,
        &[
            HoleSpec { cx: 35.0, cy: 62.0, a: 16.0, b: 9.0, angle_deg: -25.0 },
            HoleSpec { cx: 68.0, cy: 30.0, a: 13.0, b: 8.0, angle_deg: 15.0 },
        ],
        2.8,
        5.0,
    )
    .unwrap();
    let loads = LoadProgram {
        n_snap: 10,
        dirichlet: vec![
            DirichletBc { set: "bottom".into(), comp: 0, value: 0.0 },
            DirichletBc { set: "bottom".into(), comp: 1, value: 0.0 },
            DirichletBc { set: "top".into(), comp: 1, value: 50.0 },
        ],
        tractions: vec![],
        driven_set: "top".into(),
        driven_comp: 1,
    };
    let snaps = solve_forward(&mesh, &loads, &p).unwrap();
    let raw = export_raw_data(
        &mesh,
        &snaps,
        &ExportSpec {
            mode: ExportMode::Ideal,
            zeta_set: "top".into(),
            force_set: "bottom".into(),
            material: Some((1.0, 0.3)),
        },
    )
    .unwrap();
    let input = DdiInput::from_raw(&raw).unwrap();
    let mut cfg = DdiConfig::new(Formulation::UpdatedLagrangian, 10.0, 3);
    cfg.n_star = StateCount::Ratio(0.01);
    let result = run_ddi(&input, &cfg).unwrap();
    let dataset = Dataset::from_database(&result.database).unwrap();
    let samples: Vec<Sample> = dataset.samples.clone();
    println!("{} samples, metric {:?}", samples.len(), dataset.metric);

    // Stress statistics.
    let ss: f64 = samples
        .iter()
        .map(|s| s.stress.iter().map(|v| v * v).sum::<f64>())
        .sum::<f64>()
        / samples.len() as f64;
    println!("mean |stress|^2 per sample = {ss:.4}");

    // Replay several inits with plain projected gradient descent and a small
    // fixed step, tracking where they end up.
    for seed in [3u64, 4, 8] {
        let width = 8usize;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
        let s = 1.0 / (width as f64).sqrt();
        // Mirrors the trainer's init layout: W, w rows, w*, b.
        let mut model = PannModel {
            w_outer: (0..width).map(|_| s * rng.random::<f64>()).collect(),
            w_inv: (0..width)
                .map(|_| std::array::from_fn(|_| s * rng.random::<f64>()))
                .collect(),
            w_star: (0..width)
                .map(|_| s * (2.0 * rng.random::<f64>() - 1.0))
                .collect(),
            bias: (0..width)
                .map(|_| s * (2.0 * rng.random::<f64>() - 1.0))
                .collect(),
            lambda_gr: 0.01,
        };
        // Hmm: the trainer's init draws a flat vector; ordering differs but
        // the distribution is the same.
        let (f0, g0) = pann_loss_and_grad(&model, &samples, StressMetric::UlSigma).unwrap();
        let gmax = g0.iter().fold(0.0_f64, |m, &v| m.max(v.abs()));
        println!("seed {seed}: f0={f0:.4} |g|max={gmax:.4e}");
        // A few crude gradient steps to see if the loss is reducible at all.
        let mut f_prev = f0;
        for step in 0..2000 {
            let (f, g) = pann_loss_and_grad(&model, &samples, StressMetric::UlSigma).unwrap();
            let rate = 1e-3;
            for a in 0..width {
                model.w_outer[a] = (model.w_outer[a] - rate * g[a]).max(0.0);
                for d in 0..3 {
                    model.w_inv[a][d] = (model.w_inv[a][d] - rate * g[width + 3 * a + d]).max(0.0);
                }
                model.w_star[a] -= rate * g[4 * width + a];
                model.bias[a] -= rate * g[5 * width + a];
            }
            if step % 500 == 0 {
                println!("  gd step {step}: f={f:.5}");
            }
            f_prev = f;
        }
        println!("  gd final: f={f_prev:.5}");
    }
}
