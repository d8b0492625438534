use hyperfit::pann::{pann_loss_and_grad, PannModel, Sample, StressMetric};
use rand::Rng;

fn main() {
    // Synthetic plane-stress-like samples with realistic magnitudes.
    let mut samples = Vec::new();
    for k in 0..60 {
        let lam = 0.85_f64 + 0.012 * k as f64;
        let lat = 1.0 / lam.sqrt();
        let b = [lam * lam, lat * lat, lat * lat, 0.05 * std::f64::consts::SQRT_2];
        samples.push(Sample {
            deformation: b,
            stress: [
                0.5 * (lam - 1.0),
                0.1 * (lam - 1.0),
                0.0,
                0.02 * std::f64::consts::SQRT_2,
            ],
            weight: 1.0,
        });
    }

    for seed in 0..12u64 {
        let width = 8;
        let mut rng = hyperfit::rng::substream(seed, "pann-init", 0);
        let s = 1.0 / (width as f64).sqrt();
        // Exact trainer init order: W, w rows, w*, b.
        let w_outer: Vec<f64> = (0..width).map(|_| s * rng.random::<f64>()).collect();
        let w_inv: Vec<[f64; 3]> = (0..width)
            .map(|_| std::array::from_fn(|_| s * rng.random::<f64>()))
            .collect();
        let w_star: Vec<f64> = (0..width)
            .map(|_| s * (2.0 * rng.random::<f64>() - 1.0))
            .collect();
        let bias: Vec<f64> = (0..width)
            .map(|_| s * (2.0 * rng.random::<f64>() - 1.0))
            .collect();
        let model = PannModel {
            w_outer,
            w_inv,
            w_star,
            bias,
            lambda_gr: 0.01,
        };
        let (f0, grad) = pann_loss_and_grad(&model, &samples, StressMetric::UlSigma).unwrap();
        // Full finite-difference check.
        let h = 1e-7;
        let mut worst_rel = 0.0_f64;
        let mut worst_idx = 0usize;
        let perturb = |m: &PannModel, i: usize, delta: f64| -> PannModel {
            let mut out = m.clone();
            let w = m.width();
            if i < w {
                out.w_outer[i] += delta;
            } else if i < 4 * w {
                out.w_inv[(i - w) / 3][(i - w) % 3] += delta;
            } else if i < 5 * w {
                out.w_star[i - 4 * w] += delta;
            } else {
                out.bias[i - 5 * w] += delta;
            }
            out
        };
        for i in 0..6 * width {
            let (fp, _) = pann_loss_and_grad(&perturb(&model, i, h), &samples, StressMetric::UlSigma).unwrap();
            let (fm, _) = pann_loss_and_grad(&perturb(&model, i, -h), &samples, StressMetric::UlSigma).unwrap();
            let fd = (fp - fm) / (2.0 * h);
            let rel = (grad[i] - fd).abs() / (1.0 + fd.abs().max(grad[i].abs()));
            if rel > worst_rel {
                worst_rel = rel;
                worst_idx = i;
            }
        }
        println!(
            "seed={seed}: f0={f0:.4} worst grad rel dev {worst_rel:.3e} at idx {worst_idx}"
        );
    }
}
