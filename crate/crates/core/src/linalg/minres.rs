use super::CsrMatrix;

/// Options for the MINRES solve.
#[derive(Debug, Clone)]
pub struct MinresOptions {
    /// Target on ||b - A x|| / ||b|| of the unscaled system.
    pub rel_tol: f64,
    pub max_iters: usize,
    /// Apply symmetric row-norm scaling before iterating.
    pub diagonal_scaling: bool,
    /// Caller-supplied positive diagonal D: the iteration runs on D A D.
    /// Overrides `diagonal_scaling`.
    pub scaling: Option<Vec<f64>>,
}

impl Default for MinresOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            max_iters: 50_000,
            diagonal_scaling: true,
            scaling: None,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct MinresOutcome {
    pub iterations: usize,
    /// True relative residual of the unscaled system at exit.
    pub rel_residual: f64,
    pub converged: bool,
}

/// Solves the symmetric (possibly indefinite) system A x = b by MINRES with
/// optional symmetric diagonal scaling. `x` carries the initial guess in and
/// the solution out.
pub fn minres(a: &CsrMatrix, b: &[f64], x: &mut [f64], opts: &MinresOptions) -> MinresOutcome {
    assert_eq!(a.nrows(), a.ncols());
    let n = a.nrows();
    assert_eq!(b.len(), n);
    assert_eq!(x.len(), n);

    let b_norm = norm(b);
    if b_norm == 0.0 {
        x.fill(0.0);
        return MinresOutcome {
            iterations: 0,
            rel_residual: 0.0,
            converged: true,
        };
    }

    // Zero rows would make the scaling singular; guard with unit weights.
    let d: Vec<f64> = if let Some(custom) = &opts.scaling {
        assert_eq!(custom.len(), n);
        custom.clone()
    } else if opts.diagonal_scaling {
        a.row_norms()
            .iter()
            .map(|&r| if r > 0.0 { 1.0 / r.sqrt() } else { 1.0 })
            .collect()
    } else {
        vec![1.0; n]
    };
    let a_s = a.scale_symmetric(&d);
    let b_s: Vec<f64> = (0..n).map(|i| b[i] * d[i]).collect();
    // x = D y: warm starts transfer through the scaling.
    let mut y: Vec<f64> = (0..n).map(|i| x[i] / d[i]).collect();

    let inner_tol = opts.rel_tol * 0.1;
    let mut total_iters = 0;
    let mut rel = true_rel_residual(a, b, x, b_norm);
    // Outer restarts guard against drift of the recurred residual estimate.
    for _restart in 0..4 {
        if rel <= opts.rel_tol || total_iters >= opts.max_iters {
            break;
        }
        let budget = opts.max_iters - total_iters;
        total_iters += minres_cycle(&a_s, &b_s, &mut y, inner_tol, budget);
        for i in 0..n {
            x[i] = y[i] * d[i];
        }
        rel = true_rel_residual(a, b, x, b_norm);
    }

    MinresOutcome {
        iterations: total_iters,
        rel_residual: rel,
        converged: rel <= opts.rel_tol,
    }
}

/// One MINRES cycle (Lanczos with Givens updates); returns iterations used.
fn minres_cycle(a: &CsrMatrix, b: &[f64], x: &mut [f64], rel_tol: f64, max_iters: usize) -> usize {
    let n = b.len();
    let mut r = vec![0.0; n];
    a.mul_vec(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let beta1 = norm(&r);
    let b_norm = norm(b).max(f64::MIN_POSITIVE);
    if beta1 <= rel_tol * b_norm {
        return 0;
    }

    let mut v_old = vec![0.0; n];
    let mut v: Vec<f64> = r.iter().map(|&ri| ri / beta1).collect();
    let mut w = vec![0.0; n];
    let mut w_old = vec![0.0; n];
    let mut av = vec![0.0; n];

    let (mut c, mut c_old) = (1.0_f64, 1.0_f64);
    let (mut s, mut s_old) = (0.0_f64, 0.0_f64);
    let mut eta = beta1;
    let mut beta = beta1;

    for iter in 1..=max_iters {
        a.mul_vec(&v, &mut av);
        let alpha = dot(&v, &av);
        for i in 0..n {
            av[i] -= alpha * v[i] + beta * v_old[i];
        }
        let beta_next = norm(&av);

        // Apply the two previous rotations to the new tridiagonal column.
        let delta = c * alpha - c_old * s * beta;
        let rho2 = s * alpha + c_old * c * beta;
        let rho3 = s_old * beta;
        let rho1 = (delta * delta + beta_next * beta_next).sqrt();
        if rho1 == 0.0 {
            return iter;
        }
        let c_new = delta / rho1;
        let s_new = beta_next / rho1;

        for i in 0..n {
            let w_new = (v[i] - rho3 * w_old[i] - rho2 * w[i]) / rho1;
            w_old[i] = w[i];
            w[i] = w_new;
            x[i] += c_new * eta * w_new;
        }
        eta = -s_new * eta;

        if beta_next == 0.0 || eta.abs() <= rel_tol * b_norm {
            return iter;
        }

        std::mem::swap(&mut v_old, &mut v);
        std::mem::swap(&mut v, &mut av);
        for vi in v.iter_mut() {
            *vi /= beta_next;
        }
        beta = beta_next;
        c_old = c;
        c = c_new;
        s_old = s;
        s = s_new;
    }
    max_iters
}

fn true_rel_residual(a: &CsrMatrix, b: &[f64], x: &[f64], b_norm: f64) -> f64 {
    let mut ax = vec![0.0; b.len()];
    a.mul_vec(x, &mut ax);
    let mut s = 0.0;
    for i in 0..b.len() {
        let r = b[i] - ax[i];
        s += r * r;
    }
    s.sqrt() / b_norm
}

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        s += a[i] * b[i];
    }
    s
}
