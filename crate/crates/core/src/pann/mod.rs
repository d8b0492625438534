//! Physics-augmented network potential: a single-hidden-layer convex network
//! over the invariants (I1, I2, I3, I1* = -2J) with analytic correction terms
//! for energy normalization, stress normalization and volumetric growth, and
//! analytic first derivatives for the stress measures.

mod train;

pub use train::{
    pann_loss_and_grad, train, Dataset, Sample, Split, StressMetric, TrainConfig, TrainReport,
};

use std::path::Path;

use nalgebra::Matrix3;

use crate::continuum::{DefGrad, InvariantSet, SymTensor2};
use crate::textio::{fmt_f64, parse_f64};

/// Invariants at the undeformed state (I1, I2, I3, I1*).
pub const REFERENCE_INVARIANTS: [f64; 4] = [3.0, 3.0, 1.0, -2.0];

/// Network parameters plus the growth modulus.
///
/// The outer weights and the invariant weights are constrained nonnegative;
/// together with the convex nondecreasing activation this makes the predicted
/// potential polyconvex. The stress-normalization constant and the energy
/// offset are derived quantities, recomputed from the weights on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct PannModel {
    /// Outer weights W (>= 0), one per neuron.
    pub w_outer: Vec<f64>,
    /// Inner weights for (I1, I2, I3) (>= 0), one row per neuron.
    pub w_inv: Vec<[f64; 3]>,
    /// Unconstrained weights for I1*.
    pub w_star: Vec<f64>,
    /// Bias per neuron.
    pub bias: Vec<f64>,
    /// Growth modulus (MPa).
    pub lambda_gr: f64,
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Per-neuron activation state at a fixed invariant point.
pub(crate) struct Activations {
    pub z: Vec<f64>,
    pub sp: Vec<f64>,
    pub sig: Vec<f64>,
}

impl PannModel {
    pub fn width(&self) -> usize {
        self.w_outer.len()
    }

    pub fn validate(&self) -> crate::Result<()> {
        let w = self.width();
        if w == 0 {
            return Err(crate::Error::Config("network needs at least one neuron".into()));
        }
        if self.w_inv.len() != w || self.w_star.len() != w || self.bias.len() != w {
            return Err(crate::Error::Config("parameter array lengths disagree".into()));
        }
        if self.lambda_gr <= 0.0 {
            return Err(crate::Error::Config("growth modulus must be > 0".into()));
        }
        if self.w_outer.iter().any(|&v| v < 0.0)
            || self.w_inv.iter().flatten().any(|&v| v < 0.0)
        {
            return Err(crate::Error::Config(
                "convexity requires nonnegative outer and invariant weights".into(),
            ));
        }
        Ok(())
    }

    pub(crate) fn activations(&self, inv: &[f64; 4]) -> Activations {
        let w = self.width();
        let mut z = Vec::with_capacity(w);
        let mut sp = Vec::with_capacity(w);
        let mut sig = Vec::with_capacity(w);
        for a in 0..w {
            let za = self.w_inv[a][0] * inv[0]
                + self.w_inv[a][1] * inv[1]
                + self.w_inv[a][2] * inv[2]
                + self.w_star[a] * inv[3]
                + self.bias[a];
            z.push(za);
            sp.push(softplus(za));
            sig.push(sigmoid(za));
        }
        Activations { z, sp, sig }
    }

    /// Raw network output (before any correction term).
    pub fn energy_nn(&self, inv: &[f64; 4]) -> f64 {
        let act = self.activations(inv);
        self.w_outer
            .iter()
            .zip(&act.sp)
            .map(|(w, sp)| w * sp)
            .sum()
    }

    /// Partial derivatives of the network output w.r.t. the four invariants.
    pub(crate) fn grad_nn(&self, inv: &[f64; 4]) -> [f64; 4] {
        let act = self.activations(inv);
        let mut g = [0.0; 4];
        for a in 0..self.width() {
            let c = self.w_outer[a] * act.sig[a];
            g[0] += c * self.w_inv[a][0];
            g[1] += c * self.w_inv[a][1];
            g[2] += c * self.w_inv[a][2];
            g[3] += c * self.w_star[a];
        }
        g
    }

    /// Stress-normalization constant: twice the reference-state combination
    /// of the network derivatives, with dI1*/dI3 = -1 at the identity.
    pub fn stress_normalization(&self) -> f64 {
        let g = self.grad_nn(&REFERENCE_INVARIANTS);
        2.0 * (g[0] + 2.0 * g[1] + g[2] - g[3])
    }

    /// Full potential: network plus energy/stress normalization and growth,
    /// exactly zero at the undeformed state.
    pub fn energy(&self, inv: &InvariantSet) -> f64 {
        let i4 = inv.i1_star;
        let j = inv.i3.sqrt();
        let nn = self.energy_nn(&[inv.i1, inv.i2, inv.i3, i4]);
        let offset = self.energy_nn(&REFERENCE_INVARIANTS);
        let gr = self.lambda_gr * (j + 1.0 / j - 2.0).powi(2);
        let n = self.stress_normalization();
        nn - offset + gr - n * (j - 1.0)
    }

    /// Total derivative of the potential w.r.t. I3 at given invariants,
    /// collecting the I1* channel and the J-dependent corrections.
    fn dpsi_di3(&self, inv: &[f64; 4], grad: &[f64; 4]) -> f64 {
        let j = inv[2].sqrt();
        let gr_prime = 2.0 * self.lambda_gr * (j + 1.0 / j - 2.0) * (1.0 - 1.0 / (j * j));
        let n = self.stress_normalization();
        grad[2] - grad[3] / j + (gr_prime - n) / (2.0 * j)
    }

    /// Second Piola-Kirchhoff stress from the right Cauchy-Green tensor.
    pub fn second_piola(&self, c: &SymTensor2) -> crate::Result<SymTensor2> {
        let inv = crate::continuum::invariants(c)?;
        let iv = [inv.i1, inv.i2, inv.i3, inv.i1_star];
        let g = self.grad_nn(&iv);
        let d3 = self.dpsi_di3(&iv, &g);
        let c_inv = c
            .inverse()
            .ok_or_else(|| crate::Error::Domain("singular deformation tensor".into()))?;
        let m = Matrix3::identity() * (2.0 * (g[0] + g[1] * inv.i1))
            - c.to_matrix() * (2.0 * g[1])
            + c_inv.to_matrix() * (2.0 * d3 * inv.i3);
        Ok(SymTensor2::from_matrix_symmetrized(&m))
    }

    /// Cauchy stress from the left Cauchy-Green tensor.
    pub fn cauchy(&self, b: &SymTensor2) -> crate::Result<SymTensor2> {
        let inv = crate::continuum::invariants(b)?;
        let iv = [inv.i1, inv.i2, inv.i3, inv.i1_star];
        let g = self.grad_nn(&iv);
        let d3 = self.dpsi_di3(&iv, &g);
        let j = inv.i3.sqrt();
        let bm = b.to_matrix();
        let m = (bm * (g[0] + g[1] * inv.i1) - bm * bm * g[1]
            + Matrix3::identity() * (d3 * inv.i3))
            * (2.0 / j);
        Ok(SymTensor2::from_matrix_symmetrized(&m))
    }

    /// First Piola-Kirchhoff stress at a deformation gradient.
    pub fn first_piola(&self, f: &DefGrad) -> crate::Result<Matrix3<f64>> {
        let c = f.right_cauchy_green();
        let t = self.second_piola(&c)?;
        Ok(f.matrix() * t.to_matrix())
    }

    /// Potential at a deformation gradient.
    pub fn energy_at(&self, f: &DefGrad) -> crate::Result<f64> {
        let c = f.right_cauchy_green();
        Ok(self.energy(&crate::continuum::invariants(&c)?))
    }

    pub fn to_text(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        writeln!(s, "pann-v1").unwrap();
        writeln!(s, "width = {}", self.width()).unwrap();
        writeln!(s, "units = MPa-mm-N").unwrap();
        writeln!(s, "lambda_gr = {}", fmt_f64(self.lambda_gr)).unwrap();
        let join = |vals: Vec<String>| vals.join(" ");
        writeln!(
            s,
            "W = {}",
            join(self.w_outer.iter().map(|v| fmt_f64(*v)).collect())
        )
        .unwrap();
        writeln!(
            s,
            "w = {}",
            join(
                self.w_inv
                    .iter()
                    .flat_map(|row| row.iter().map(|v| fmt_f64(*v)))
                    .collect()
            )
        )
        .unwrap();
        writeln!(
            s,
            "wstar = {}",
            join(self.w_star.iter().map(|v| fmt_f64(*v)).collect())
        )
        .unwrap();
        writeln!(
            s,
            "b = {}",
            join(self.bias.iter().map(|v| fmt_f64(*v)).collect())
        )
        .unwrap();
        s
    }

    pub fn write_file(&self, path: &Path) -> crate::Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn from_text(text: &str, origin: &Path) -> crate::Result<Self> {
        let mut width = None;
        let mut lambda_gr = None;
        let mut w_outer = None;
        let mut w_flat: Option<Vec<f64>> = None;
        let mut w_star = None;
        let mut bias = None;
        for (lno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line == "pann-v1" {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                crate::Error::parse(origin, lno + 1, format!("expected 'key = value', got '{line}'"))
            })?;
            let key = key.trim();
            let value = value.trim();
            let parse_vec = |v: &str| -> crate::Result<Vec<f64>> {
                v.split_whitespace()
                    .map(|t| {
                        parse_f64(t).ok_or_else(|| {
                            crate::Error::parse(origin, lno + 1, format!("bad number '{t}'"))
                        })
                    })
                    .collect()
            };
            match key {
                "width" => {
                    width = Some(value.parse::<usize>().map_err(|_| {
                        crate::Error::parse(origin, lno + 1, "bad width")
                    })?)
                }
                "units" => {
                    if value != "MPa-mm-N" {
                        return Err(crate::Error::parse(
                            origin,
                            lno + 1,
                            format!("unsupported unit system '{value}'"),
                        ));
                    }
                }
                "lambda_gr" => {
                    lambda_gr = Some(parse_f64(value).ok_or_else(|| {
                        crate::Error::parse(origin, lno + 1, "bad lambda_gr")
                    })?)
                }
                "W" => w_outer = Some(parse_vec(value)?),
                "w" => w_flat = Some(parse_vec(value)?),
                "wstar" => w_star = Some(parse_vec(value)?),
                "b" => bias = Some(parse_vec(value)?),
                other => {
                    return Err(crate::Error::parse(
                        origin,
                        lno + 1,
                        format!("unknown key '{other}'"),
                    ))
                }
            }
        }
        let missing = |k: &str| crate::Error::Config(format!("model file missing '{k}'"));
        let width = width.ok_or_else(|| missing("width"))?;
        let w_flat = w_flat.ok_or_else(|| missing("w"))?;
        if w_flat.len() != 3 * width {
            return Err(crate::Error::Config(format!(
                "expected {} invariant weights, got {}",
                3 * width,
                w_flat.len()
            )));
        }
        let model = Self {
            w_outer: w_outer.ok_or_else(|| missing("W"))?,
            w_inv: w_flat.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect(),
            w_star: w_star.ok_or_else(|| missing("wstar"))?,
            bias: bias.ok_or_else(|| missing("b"))?,
            lambda_gr: lambda_gr.ok_or_else(|| missing("lambda_gr"))?,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn read_file(path: &Path) -> crate::Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?, path)
    }
}

#[cfg(test)]
mod tests;
