use rand::Rng;

use super::{PannModel, REFERENCE_INVARIANTS};
use crate::continuum::{invariants_unchecked, SymTensor2};
use crate::ddi::{Formulation, MaterialDatabase, SQRT2};
use crate::rng::substream;

/// Which conjugate pair the calibration loss uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StressMetric {
    /// Cauchy stress as a function of the left Cauchy-Green tensor.
    UlSigma,
    /// Second Piola-Kirchhoff stress as a function of the right Cauchy-Green
    /// tensor.
    TlT,
}

impl StressMetric {
    pub fn as_str(&self) -> &'static str {
        match self {
            StressMetric::UlSigma => "ul",
            StressMetric::TlT => "tl",
        }
    }

    pub fn parse(s: &str) -> crate::Result<Self> {
        match s {
            "ul" => Ok(StressMetric::UlSigma),
            "tl" => Ok(StressMetric::TlT),
            other => Err(crate::Error::Config(format!(
                "unknown metric '{other}' (expected ul or tl)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Calibration,
    Test,
}

/// One training sample: a deformation tensor (b or C, depending on the
/// metric) and the conjugate stress, both in Mandel-active components
/// (11, 22, 33, sqrt2 * 12). Plane-stress data carries zero in the stress 33
/// slot, which is exactly what ties the out-of-plane response down.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub deformation: [f64; 4],
    pub stress: [f64; 4],
    pub weight: f64,
}

/// Calibration dataset with a disjoint calibration/test split.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub metric: StressMetric,
    pub samples: Vec<Sample>,
    pub split: Vec<Split>,
    /// Entries dropped because the reconstructed deformation tensor was not
    /// positive definite.
    pub excluded: usize,
}

impl Dataset {
    /// Converts an identified material database into training samples.
    pub fn from_database(db: &MaterialDatabase) -> crate::Result<Self> {
        let metric = match db.formulation {
            Formulation::UpdatedLagrangian => StressMetric::UlSigma,
            _ => StressMetric::TlT,
        };
        let mut samples = Vec::with_capacity(db.len());
        let mut excluded = 0;
        for z in 0..db.len() {
            let e = db.strain_components(z);
            let s = db.stresses[z];
            let deformation = match metric {
                StressMetric::UlSigma => {
                    // b = (1 - 2e)^-1, block diagonal in plane stress.
                    let a11 = 1.0 - 2.0 * e[0];
                    let a22 = 1.0 - 2.0 * e[1];
                    let a12 = -2.0 * e[3];
                    let a33 = 1.0 - 2.0 * e[2];
                    let det = a11 * a22 - a12 * a12;
                    if det <= 0.0 || a11 <= 0.0 || a33 <= 0.0 {
                        excluded += 1;
                        continue;
                    }
                    let b11 = a22 / det;
                    let b22 = a11 / det;
                    let b12 = -a12 / det;
                    [b11, b22, 1.0 / a33, SQRT2 * b12]
                }
                StressMetric::TlT => {
                    let c11 = 1.0 + 2.0 * e[0];
                    let c22 = 1.0 + 2.0 * e[1];
                    let c33 = 1.0 + 2.0 * e[2];
                    let c12 = 2.0 * e[3];
                    if c11 <= 0.0 || c33 <= 0.0 || c11 * c22 - c12 * c12 <= 0.0 {
                        excluded += 1;
                        continue;
                    }
                    [c11, c22, c33, SQRT2 * c12]
                }
            };
            samples.push(Sample {
                deformation,
                stress: [s[0], s[1], 0.0, s[2]],
                weight: db.weights[z],
            });
        }
        if samples.len() < 4 {
            return Err(crate::Error::Config(format!(
                "too few admissible samples ({}) after excluding {excluded}",
                samples.len()
            )));
        }
        let split = vec![Split::Calibration; samples.len()];
        Ok(Self {
            metric,
            samples,
            split,
            excluded,
        })
    }

    /// Random disjoint split; `calibration_fraction` of the samples train the
    /// model, the remainder evaluates generalization.
    pub fn shuffle_split(&mut self, calibration_fraction: f64, seed: u64) -> crate::Result<()> {
        if !(0.0..1.0).contains(&calibration_fraction) || calibration_fraction <= 0.0 {
            return Err(crate::Error::Config(
                "calibration fraction must lie in (0, 1)".into(),
            ));
        }
        let n = self.samples.len();
        let mut order: Vec<usize> = (0..n).collect();
        let mut rng = substream(seed, "pann-split", 0);
        // Fisher-Yates.
        for i in (1..n).rev() {
            let j = rng.random_range(0..=i);
            order.swap(i, j);
        }
        let n_cal = ((n as f64 * calibration_fraction).round() as usize).clamp(1, n - 1);
        let mut split = vec![Split::Test; n];
        for &i in order.iter().take(n_cal) {
            split[i] = Split::Calibration;
        }
        self.split = split;
        Ok(())
    }

    fn indices(&self, which: Split) -> Vec<usize> {
        (0..self.samples.len())
            .filter(|&i| self.split[i] == which)
            .collect()
    }
}

/// Index layout of the flattened parameter vector.
struct Layout {
    width: usize,
}

impl Layout {
    fn len(&self) -> usize {
        6 * self.width
    }
    fn w_outer(&self, a: usize) -> usize {
        a
    }
    fn w_inv(&self, a: usize, d: usize) -> usize {
        self.width + 3 * a + d
    }
    fn w_star(&self, a: usize) -> usize {
        4 * self.width + a
    }
    fn bias(&self, a: usize) -> usize {
        5 * self.width + a
    }
    /// Lower bound per slot: weights nonnegative, the rest free.
    fn lower_bound(&self, idx: usize) -> f64 {
        if idx < 4 * self.width {
            0.0
        } else {
            f64::NEG_INFINITY
        }
    }

    fn pack(&self, m: &PannModel) -> Vec<f64> {
        let mut x = vec![0.0; self.len()];
        for a in 0..self.width {
            x[self.w_outer(a)] = m.w_outer[a];
            for d in 0..3 {
                x[self.w_inv(a, d)] = m.w_inv[a][d];
            }
            x[self.w_star(a)] = m.w_star[a];
            x[self.bias(a)] = m.bias[a];
        }
        x
    }

    fn unpack(&self, x: &[f64], lambda_gr: f64) -> PannModel {
        PannModel {
            w_outer: (0..self.width).map(|a| x[self.w_outer(a)]).collect(),
            w_inv: (0..self.width)
                .map(|a| [x[self.w_inv(a, 0)], x[self.w_inv(a, 1)], x[self.w_inv(a, 2)]])
                .collect(),
            w_star: (0..self.width).map(|a| x[self.w_star(a)]).collect(),
            bias: (0..self.width).map(|a| x[self.bias(a)]).collect(),
            lambda_gr,
        }
    }
}

/// Per-sample quantities fixed during optimization.
struct Prepared {
    inv: [f64; 4],
    j: f64,
    /// Basis tensors of the stress expansion (Mandel-active).
    b1: [f64; 4],
    b2: [f64; 4],
    b3: [f64; 4],
    stress: [f64; 4],
}

fn prepare(samples: &[Sample], metric: StressMetric) -> crate::Result<Vec<Prepared>> {
    samples
        .iter()
        .map(|s| {
            let d = s.deformation;
            let tensor = SymTensor2::new([d[0], d[1], d[2], d[3] / SQRT2, 0.0, 0.0]);
            if !tensor.is_positive_definite() {
                return Err(crate::Error::Domain(
                    "sample deformation tensor is not positive definite".into(),
                ));
            }
            let inv = invariants_unchecked(&tensor);
            let iv = [inv.i1, inv.i2, inv.i3, inv.i1_star];
            let j = inv.i3.sqrt();
            let m = tensor.to_matrix();
            let m2 = m * m;
            let m_inv = tensor.inverse().unwrap();
            let mandel = |t: &SymTensor2| -> [f64; 4] {
                [t.get(0, 0), t.get(1, 1), t.get(2, 2), SQRT2 * t.get(0, 1)]
            };
            let (b1, b2, b3) = match metric {
                StressMetric::TlT => {
                    let b1 = [2.0, 2.0, 2.0, 0.0];
                    let i1_minus_c =
                        SymTensor2::from_matrix_symmetrized(&(nalgebra::Matrix3::identity() * inv.i1 - m));
                    let b2 = mandel(&i1_minus_c).map(|v| 2.0 * v);
                    let b3 = mandel(&m_inv).map(|v| 2.0 * inv.i3 * v);
                    (b1, b2, b3)
                }
                StressMetric::UlSigma => {
                    let two_over_j = 2.0 / j;
                    let b1 = mandel(&tensor).map(|v| two_over_j * v);
                    let ib_minus_b2 =
                        SymTensor2::from_matrix_symmetrized(&(m * inv.i1 - m2));
                    let b2 = mandel(&ib_minus_b2).map(|v| two_over_j * v);
                    let b3 = [
                        two_over_j * inv.i3,
                        two_over_j * inv.i3,
                        two_over_j * inv.i3,
                        0.0,
                    ];
                    (b1, b2, b3)
                }
            };
            Ok(Prepared {
                inv: iv,
                j,
                b1,
                b2,
                b3,
                stress: s.stress,
            })
        })
        .collect()
}

fn dot4(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

/// Mean squared stress error over `points` and its gradient w.r.t. the
/// flattened parameters. The stress-normalization constant is a function of
/// the weights and is differentiated through.
fn loss_and_grad(
    layout: &Layout,
    x: &[f64],
    lambda_gr: f64,
    points: &[Prepared],
) -> (f64, Vec<f64>) {
    let model = layout.unpack(x, lambda_gr);
    let width = layout.width;
    let n = points.len() as f64;

    // Reference-state activations feed the normalization constant.
    let act0 = model.activations(&REFERENCE_INVARIANTS);
    let n_const = model.stress_normalization();

    let mut mse = 0.0;
    let mut grad = vec![0.0; layout.len()];
    // Accumulated coefficient of the d n / d theta term.
    let mut n_coef = 0.0;

    for p in points {
        let act = model.activations(&p.inv);
        let mut g = [0.0; 4];
        for a in 0..width {
            let c = model.w_outer[a] * act.sig[a];
            g[0] += c * model.w_inv[a][0];
            g[1] += c * model.w_inv[a][1];
            g[2] += c * model.w_inv[a][2];
            g[3] += c * model.w_star[a];
        }
        let gr_prime =
            2.0 * lambda_gr * (p.j + 1.0 / p.j - 2.0) * (1.0 - 1.0 / (p.j * p.j));
        let d3 = g[2] - g[3] / p.j + (gr_prime - n_const) / (2.0 * p.j);

        let mut resid = [0.0; 4];
        for c in 0..4 {
            resid[c] = g[0] * p.b1[c] + g[1] * p.b2[c] + d3 * p.b3[c] - p.stress[c];
        }
        mse += dot4(&resid, &resid);

        let r1 = dot4(&resid, &p.b1);
        let r2 = dot4(&resid, &p.b2);
        let r3 = dot4(&resid, &p.b3);
        let scale = 2.0 / n;
        n_coef -= scale * r3 / (2.0 * p.j);
        // Coefficients of d g_gamma / d theta.
        let c_g = [r1, r2, r3, -r3 / p.j];
        for a in 0..width {
            let q = model.w_inv[a][0] * c_g[0]
                + model.w_inv[a][1] * c_g[1]
                + model.w_inv[a][2] * c_g[2]
                + model.w_star[a] * c_g[3];
            let w_sig = model.w_outer[a] * act.sig[a];
            let w_sig_prime = model.w_outer[a] * act.sig[a] * (1.0 - act.sig[a]);
            grad[layout.w_outer(a)] += scale * act.sig[a] * q;
            for d in 0..3 {
                grad[layout.w_inv(a, d)] +=
                    scale * (w_sig_prime * p.inv[d] * q + w_sig * c_g[d]);
            }
            grad[layout.w_star(a)] +=
                scale * (w_sig_prime * p.inv[3] * q + w_sig * c_g[3]);
            grad[layout.bias(a)] += scale * w_sig_prime * q;
        }
    }

    // Chain rule through the normalization constant (reference activations).
    const K: [f64; 4] = [1.0, 2.0, 1.0, -1.0];
    for a in 0..width {
        let q0 = model.w_inv[a][0] * K[0]
            + model.w_inv[a][1] * K[1]
            + model.w_inv[a][2] * K[2]
            + model.w_star[a] * K[3];
        let w_sig = model.w_outer[a] * act0.sig[a];
        let w_sig_prime = model.w_outer[a] * act0.sig[a] * (1.0 - act0.sig[a]);
        grad[layout.w_outer(a)] += n_coef * 2.0 * act0.sig[a] * q0;
        for d in 0..3 {
            grad[layout.w_inv(a, d)] +=
                n_coef * 2.0 * (w_sig_prime * REFERENCE_INVARIANTS[d] * q0 + w_sig * K[d]);
        }
        grad[layout.w_star(a)] +=
            n_coef * 2.0 * (w_sig_prime * REFERENCE_INVARIANTS[3] * q0 + w_sig * K[3]);
        grad[layout.bias(a)] += n_coef * 2.0 * w_sig_prime * q0;
    }

    (mse / n, grad)
}

/// Public loss/gradient entry for verification: evaluates the mean squared
/// error of `model` on the given samples and the analytic gradient w.r.t. all
/// network parameters in the order (W, w, w*, b).
pub fn pann_loss_and_grad(
    model: &PannModel,
    samples: &[Sample],
    metric: StressMetric,
) -> crate::Result<(f64, Vec<f64>)> {
    let layout = Layout {
        width: model.width(),
    };
    let points = prepare(samples, metric)?;
    let x = layout.pack(model);
    Ok(loss_and_grad(&layout, &x, model.lambda_gr, &points))
}

#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub width: usize,
    /// Growth modulus (MPa).
    pub lambda_gr: f64,
    pub restarts: usize,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            width: 8,
            lambda_gr: 0.01,
            restarts: 5,
            max_iters: 2000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub model: PannModel,
    pub calibration_mse: f64,
    pub test_mse: f64,
    /// Pooled stress coefficient of determination per split.
    pub calibration_r2: f64,
    pub test_r2: f64,
    /// Final calibration loss of every restart.
    pub restart_losses: Vec<f64>,
}

/// Calibrates the network on the calibration split by bound-constrained
/// quasi-Newton iterations with analytic gradients, keeping the best of the
/// seeded restarts.
pub fn train(dataset: &Dataset, cfg: &TrainConfig) -> crate::Result<TrainReport> {
    if cfg.width == 0 {
        return Err(crate::Error::Config("width must be >= 1".into()));
    }
    if cfg.lambda_gr <= 0.0 {
        return Err(crate::Error::Config("growth modulus must be > 0".into()));
    }
    let cal_idx = dataset.indices(Split::Calibration);
    let test_idx = dataset.indices(Split::Test);
    if cal_idx.is_empty() {
        return Err(crate::Error::Config("calibration split is empty".into()));
    }
    let cal_samples: Vec<Sample> = cal_idx.iter().map(|&i| dataset.samples[i].clone()).collect();
    let cal_points = prepare(&cal_samples, dataset.metric)?;
    let layout = Layout { width: cfg.width };

    // Data stress scale, for output-magnitude-aware initialization.
    let stress_scale = {
        let ms = cal_points
            .iter()
            .map(|p| dot4(&p.stress, &p.stress))
            .sum::<f64>()
            / cal_points.len() as f64;
        ms.sqrt().max(1e-6)
    };

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut restart_losses = Vec::with_capacity(cfg.restarts);
    for restart in 0..cfg.restarts.max(1) {
        let mut rng = substream(cfg.seed, "pann-init", restart as u64);
        let mut x = vec![0.0; layout.len()];
        // Inner weights sized against the reference invariant magnitudes so
        // pre-activations start in the responsive range of the activation;
        // biases center the reference-state pre-activation near zero; outer
        // weights start well away from the dead lower bound and match the
        // data stress magnitude.
        const INV_REF: [f64; 4] = REFERENCE_INVARIANTS;
        let w_amp = 0.6 / (cfg.width as f64).sqrt();
        for a in 0..cfg.width {
            let mut z_ref = 0.0;
            for d in 0..3 {
                let w = w_amp * rng.random::<f64>() / INV_REF[d].abs();
                x[layout.w_inv(a, d)] = w;
                z_ref += w * INV_REF[d];
            }
            let ws = w_amp * (2.0 * rng.random::<f64>() - 1.0) / INV_REF[3].abs();
            x[layout.w_star(a)] = ws;
            z_ref += ws * INV_REF[3];
            x[layout.bias(a)] = (2.0 * rng.random::<f64>() - 1.0) - z_ref;
            x[layout.w_outer(a)] =
                (0.2 + rng.random::<f64>()) * 2.0 * stress_scale / cfg.width as f64;
        }
        let loss = projected_bfgs(&layout, &mut x, cfg.lambda_gr, &cal_points, cfg.max_iters);
        restart_losses.push(loss);
        if loss.is_finite() && best.as_ref().map_or(true, |(b, _)| loss < *b) {
            best = Some((loss, x));
        }
    }
    let (calibration_mse, x) = best.ok_or_else(|| {
        crate::Error::Solver(format!(
            "all restarts diverged; final losses {restart_losses:?}"
        ))
    })?;
    let model = layout.unpack(&x, cfg.lambda_gr);
    model.validate()?;

    let eval_split = |idx: &[usize]| -> crate::Result<(f64, f64)> {
        if idx.is_empty() {
            return Ok((f64::NAN, f64::NAN));
        }
        let samples: Vec<Sample> = idx.iter().map(|&i| dataset.samples[i].clone()).collect();
        let points = prepare(&samples, dataset.metric)?;
        let (mse, _) = loss_and_grad(&layout, &x, cfg.lambda_gr, &points);
        // Pooled coefficient of determination over the stress components.
        let mut mean = [0.0; 4];
        for p in &points {
            for c in 0..4 {
                mean[c] += p.stress[c];
            }
        }
        for m in &mut mean {
            *m /= points.len() as f64;
        }
        let mut ss_tot = 0.0;
        for p in &points {
            for c in 0..4 {
                ss_tot += (p.stress[c] - mean[c]).powi(2);
            }
        }
        let ss_res = mse * points.len() as f64;
        let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { f64::NAN };
        Ok((mse, r2))
    };
    let (calibration_mse_check, calibration_r2) = eval_split(&cal_idx)?;
    debug_assert!((calibration_mse_check - calibration_mse).abs() < 1e-12 * (1.0 + calibration_mse));
    let (test_mse, test_r2) = eval_split(&test_idx)?;

    Ok(TrainReport {
        model,
        calibration_mse,
        test_mse,
        calibration_r2,
        test_r2,
        restart_losses,
    })
}

/// Bound-constrained quasi-Newton descent: BFGS inverse-Hessian updates with
/// an active-set mask and projection onto the nonnegativity bounds.
fn projected_bfgs(
    layout: &Layout,
    x: &mut Vec<f64>,
    lambda_gr: f64,
    points: &[Prepared],
    max_iters: usize,
) -> f64 {
    let n = layout.len();
    let project = |x: &mut Vec<f64>| {
        for i in 0..n {
            let lo = layout.lower_bound(i);
            if x[i] < lo {
                x[i] = lo;
            }
        }
    };
    let debug = std::env::var_os("HYPERFIT_TRAIN_DEBUG").is_some();
    project(x);
    let (mut f, mut g) = loss_and_grad(layout, x, lambda_gr, points);
    if debug {
        let gmax = g.iter().fold(0.0_f64, |m, &v| m.max(v.abs()));
        eprintln!("[train] init f={f:.6e} |g|max={gmax:.3e}");
    }
    let mut h = nalgebra::DMatrix::<f64>::identity(n, n);
    let mut h_is_identity = true;
    let eps_active = 1e-12;
    let gtol = 1e-10;

    for _iter in 0..max_iters {
        let _ = _iter;
        // Active bound set: sitting on the bound with the gradient pushing in.
        let active: Vec<bool> = (0..n)
            .map(|i| x[i] <= layout.lower_bound(i) + eps_active && g[i] > 0.0)
            .collect();
        let mut g_masked = g.clone();
        for i in 0..n {
            if active[i] {
                g_masked[i] = 0.0;
            }
        }
        let pg_norm = g_masked.iter().fold(0.0_f64, |m, &v| m.max(v.abs()));
        if pg_norm <= gtol * (1.0 + f.abs()) {
            break;
        }

        let gv = nalgebra::DVector::from_column_slice(&g_masked);
        let make_direction = |h: &nalgebra::DMatrix<f64>, identity: bool| {
            let mut d = -(h * &gv);
            if identity {
                // Scale the first (steepest-descent) step to a sane length.
                let gnorm = gv.norm();
                if gnorm > 0.0 {
                    d *= (0.1 * (1.0 + f.abs()) / gnorm).min(1.0).max(1e-6 / gnorm);
                }
            }
            for i in 0..n {
                if active[i] {
                    d[i] = 0.0;
                }
            }
            d
        };
        let mut d = make_direction(&h, h_is_identity);
        let mut slope = d.dot(&gv);
        if !slope.is_finite() || slope >= 0.0 {
            h = nalgebra::DMatrix::identity(n, n);
            h_is_identity = true;
            d = make_direction(&h, true);
            slope = d.dot(&gv);
            if slope >= 0.0 {
                break;
            }
        }

        let line_search = |d: &nalgebra::DVector<f64>,
                           slope: f64|
         -> Option<(Vec<f64>, f64)> {
            // Cap the step so a single iteration cannot jump deep into the
            // saturated region of the activations, where gradients die.
            let mut t = (1.0_f64).min(1.0 / d.amax().max(1e-300));
            let mut x_new = x.clone();
            for _ in 0..40 {
                for i in 0..n {
                    x_new[i] = x[i] + t * d[i];
                }
                project(&mut x_new);
                let (ftry, _) = loss_and_grad(layout, &x_new, lambda_gr, points);
                if ftry.is_finite() && ftry <= f + 1e-4 * t * slope {
                    return Some((x_new, ftry));
                }
                t *= 0.5;
            }
            None
        };
        let step = match line_search(&d, slope) {
            Some(s) => Some(s),
            None if !h_is_identity => {
                // Stale curvature can poison the direction; retry once from
                // scratch with a scaled gradient step.
                h = nalgebra::DMatrix::identity(n, n);
                h_is_identity = true;
                let d = make_direction(&h, true);
                let slope = d.dot(&gv);
                if slope < 0.0 {
                    line_search(&d, slope)
                } else {
                    None
                }
            }
            None => None,
        };
        let Some((x_new, f_new)) = step else {
            if debug {
                eprintln!(
                    "[train] iter {_iter}: line search failed (f={f:.6e}, slope={slope:.3e}, pg={pg_norm:.3e})"
                );
            }
            break;
        };
        if debug && _iter % 200 == 0 {
            eprintln!("[train] iter {_iter}: f={f_new:.6e} pg={pg_norm:.3e}");
        }
        let (_, g_new) = loss_and_grad(layout, &x_new, lambda_gr, points);

        // BFGS update on the accepted step.
        let s = nalgebra::DVector::from_iterator(n, (0..n).map(|i| x_new[i] - x[i]));
        let y = nalgebra::DVector::from_iterator(n, (0..n).map(|i| g_new[i] - g[i]));
        let sy = s.dot(&y);
        if sy > 1e-12 * s.norm() * y.norm() {
            if h_is_identity {
                // Barzilai-Borwein style seed for the curvature scale.
                let scale = sy / y.dot(&y);
                if scale.is_finite() && scale > 0.0 {
                    h *= scale;
                }
            }
            let rho = 1.0 / sy;
            let hy = &h * &y;
            let yhy = y.dot(&hy);
            // H <- H - rho (H y s^T + s y^T H) + rho^2 (y^T H y) s s^T + rho s s^T
            h = h.clone() - rho * (&hy * s.transpose() + &s * hy.transpose())
                + (rho * rho * yhy + rho) * (&s * s.transpose());
            h_is_identity = false;
        }
        *x = x_new;
        f = f_new;
        g = g_new;
    }
    f
}
