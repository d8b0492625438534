use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rustfft::{num_complex::Complex, FftPlanner};

/// Spatially correlated noise field on a regular grid, normalized to
/// max |f| = 1.
///
/// Realizations are drawn by filtering complex white noise with the square
/// root of the power spectrum exp(-l^2 |k|^2) and taking the real part of the
/// inverse transform. The square generator grid is cropped to `nx` x `ny`
/// (offset zero) before normalization, and the wavevectors live on the unit
/// square, so a decay length of 1/N correlates values over a few pixels.
#[derive(Debug, Clone)]
pub struct GrfField {
    nx: usize,
    ny: usize,
    /// Row-major values, index iy * nx + ix.
    values: Vec<f64>,
}

impl GrfField {
    /// Draws one realization on an `n` x `n` grid and crops to `nx` x `ny`.
    pub fn generate(
        n: usize,
        ell: f64,
        nx: usize,
        ny: usize,
        rng: &mut ChaCha12Rng,
    ) -> crate::Result<Self> {
        if !n.is_power_of_two() {
            return Err(crate::Error::Config(format!(
                "GRF grid size must be a power of two, got {n}"
            )));
        }
        if ell <= 0.0 {
            return Err(crate::Error::Config("GRF decay length must be > 0".into()));
        }
        if nx < 2 || ny < 2 || nx > n || ny > n {
            return Err(crate::Error::Config(format!(
                "GRF crop {nx} x {ny} must lie within the {n} x {n} grid"
            )));
        }

        // Complex standard normal per grid point, filtered by sqrt(S).
        let mut data = vec![Complex::new(0.0, 0.0); n * n];
        for iy in 0..n {
            let ky = 2.0 * std::f64::consts::PI * signed_freq(iy, n);
            for ix in 0..n {
                let kx = 2.0 * std::f64::consts::PI * signed_freq(ix, n);
                let amp = (-ell * ell * (kx * kx + ky * ky)).exp().sqrt();
                let (z1, z2) = standard_normal_pair(rng);
                data[iy * n + ix] = Complex::new(z1 * amp, z2 * amp);
            }
        }

        inverse_fft_2d(&mut data, n);

        let mut values = Vec::with_capacity(nx * ny);
        for iy in 0..ny {
            for ix in 0..nx {
                values.push(data[iy * n + ix].re);
            }
        }
        let max_abs = values.iter().fold(0.0_f64, |m, &v| m.max(v.abs()));
        if max_abs == 0.0 {
            return Err(crate::Error::Solver("degenerate zero GRF realization".into()));
        }
        for v in &mut values {
            *v /= max_abs;
        }
        Ok(Self { nx, ny, values })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Bilinear interpolation of the field mapped onto the rectangle
    /// [x0, x0+lx] x [y0, y0+ly]. Points outside the rectangle are an error.
    pub fn interpolate(
        &self,
        origin: [f64; 2],
        extent: [f64; 2],
        x: f64,
        y: f64,
    ) -> crate::Result<f64> {
        let eps = 1e-9 * extent[0].max(extent[1]).max(1.0);
        let sx = (x - origin[0]) / extent[0];
        let sy = (y - origin[1]) / extent[1];
        if sx < -eps || sx > 1.0 + eps || sy < -eps || sy > 1.0 + eps {
            return Err(crate::Error::Domain(format!(
                "point ({x}, {y}) lies outside the noise grid"
            )));
        }
        let fx = (sx.clamp(0.0, 1.0)) * (self.nx - 1) as f64;
        let fy = (sy.clamp(0.0, 1.0)) * (self.ny - 1) as f64;
        let ix = (fx.floor() as usize).min(self.nx - 2);
        let iy = (fy.floor() as usize).min(self.ny - 2);
        let tx = fx - ix as f64;
        let ty = fy - iy as f64;
        let v = |i: usize, j: usize| self.values[j * self.nx + i];
        Ok(v(ix, iy) * (1.0 - tx) * (1.0 - ty)
            + v(ix + 1, iy) * tx * (1.0 - ty)
            + v(ix, iy + 1) * (1.0 - tx) * ty
            + v(ix + 1, iy + 1) * tx * ty)
    }
}

/// FFT frequency of bin `i` on an `n`-point grid, in cycles per unit length.
fn signed_freq(i: usize, n: usize) -> f64 {
    if i <= n / 2 {
        i as f64
    } else {
        i as f64 - n as f64
    }
}

fn standard_normal_pair(rng: &mut ChaCha12Rng) -> (f64, f64) {
    // Box-Muller; 1 - u keeps the log argument strictly positive.
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    let r = (-2.0 * u1.ln()).sqrt();
    let phi = 2.0 * std::f64::consts::PI * u2;
    (r * phi.cos(), r * phi.sin())
}

fn inverse_fft_2d(data: &mut [Complex<f64>], n: usize) {
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_inverse(n);
    // Rows.
    for row in data.chunks_exact_mut(n) {
        fft.process(row);
    }
    // Columns via transpose, row FFTs, transpose back.
    let mut col = vec![Complex::new(0.0, 0.0); n];
    for ix in 0..n {
        for iy in 0..n {
            col[iy] = data[iy * n + ix];
        }
        fft.process(&mut col);
        for iy in 0..n {
            data[iy * n + ix] = col[iy];
        }
    }
}
