/// Symmetric banded matrix with in-place LDL^T solve.
///
/// Stores the lower band row-wise: entry (i, j) with i - hbw <= j <= i lives
/// at `data[i * (hbw + 1) + (j + hbw - i)]`.
#[derive(Debug, Clone)]
pub struct BandedSym {
    n: usize,
    hbw: usize,
    data: Vec<f64>,
}

impl BandedSym {
    pub fn zeros(n: usize, half_bandwidth: usize) -> Self {
        Self {
            n,
            hbw: half_bandwidth,
            data: vec![0.0; n * (half_bandwidth + 1)],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_bandwidth(&self) -> usize {
        self.hbw
    }

    /// Adds `v` at (i, j); only the lower triangle is stored, so callers add
    /// each symmetric pair once with i >= j (or pass the upper entry, which is
    /// mirrored).
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        debug_assert!(r - c <= self.hbw, "entry outside band: ({i}, {j})");
        self.data[r * (self.hbw + 1) + (c + self.hbw - r)] = self.at(r, c) + v;
    }

    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * (self.hbw + 1) + (c + self.hbw - r)]
    }

    /// In-place LDL^T factorization; fails on a vanishing pivot.
    pub fn factorize(mut self) -> crate::Result<BandedLdl> {
        let hbw = self.hbw;
        let mut d = vec![0.0; self.n];
        for i in 0..self.n {
            let lo = i.saturating_sub(hbw);
            for j in lo..i {
                let mut s = self.at(i, j);
                let klo = lo.max(j.saturating_sub(hbw));
                for k in klo..j {
                    s -= self.at(i, k) * d[k] * self.at(j, k);
                }
                let idx = i * (hbw + 1) + (j + hbw - i);
                self.data[idx] = s / d[j];
            }
            let mut s = self.at(i, i);
            for k in lo..i {
                s -= self.at(i, k) * self.at(i, k) * d[k];
            }
            if s.abs() < 1e-300 {
                return Err(crate::Error::Solver(format!(
                    "vanishing pivot at row {i} in banded LDL^T"
                )));
            }
            d[i] = s;
        }
        Ok(BandedLdl {
            n: self.n,
            hbw,
            l: self.data,
            d,
        })
    }
}

/// Factorized form ready for repeated right-hand sides.
#[derive(Debug, Clone)]
pub struct BandedLdl {
    n: usize,
    hbw: usize,
    l: Vec<f64>,
    d: Vec<f64>,
}

impl BandedLdl {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        debug_assert_eq!(b.len(), self.n);
        let hbw = self.hbw;
        let mut x = b.to_vec();
        // Forward substitution with unit lower band.
        for i in 0..self.n {
            let lo = i.saturating_sub(hbw);
            let mut s = x[i];
            for j in lo..i {
                s -= self.l[i * (hbw + 1) + (j + hbw - i)] * x[j];
            }
            x[i] = s;
        }
        for i in 0..self.n {
            x[i] /= self.d[i];
        }
        // Backward substitution with the transpose.
        for i in (0..self.n).rev() {
            let hi = (i + hbw).min(self.n - 1);
            let mut s = x[i];
            for j in (i + 1)..=hi {
                s -= self.l[j * (hbw + 1) + (i + hbw - j)] * x[j];
            }
            x[i] = s;
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    use super::*;

    #[test]
    fn matches_dense_solve() {
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        let n = 30;
        let hbw = 4;
        let mut banded = BandedSym::zeros(n, hbw);
        let mut dense = nalgebra::DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            let v = 10.0 + rng.random::<f64>();
            banded.add(i, i, v);
            dense[(i, i)] += v;
            for j in i.saturating_sub(hbw)..i {
                let v = rng.random::<f64>() - 0.5;
                banded.add(i, j, v);
                dense[(i, j)] += v;
                dense[(j, i)] += v;
            }
        }
        let b: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        let x = banded.factorize().unwrap().solve(&b);
        let x_ref = dense
            .lu()
            .solve(&nalgebra::DVector::from_column_slice(&b))
            .unwrap();
        for i in 0..n {
            assert!((x[i] - x_ref[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn indefinite_but_factorizable() {
        // LDL^T handles negative pivots as long as none vanish.
        let mut banded = BandedSym::zeros(2, 1);
        banded.add(0, 0, 1.0);
        banded.add(1, 1, -2.0);
        banded.add(1, 0, 0.5);
        let x = banded.factorize().unwrap().solve(&[1.0, 1.0]);
        // Dense check: [[1, .5], [.5, -2]] x = [1, 1].
        assert!((1.0 * x[0] + 0.5 * x[1] - 1.0).abs() < 1e-12);
        assert!((0.5 * x[0] - 2.0 * x[1] - 1.0).abs() < 1e-12);
    }
}
