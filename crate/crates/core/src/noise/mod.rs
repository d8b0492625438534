//! Measurement-noise imitation: a multiplicative perturbation of the global
//! testing force and spatially correlated displacement/thickness noise drawn
//! from Gaussian random fields.

mod grf;

pub use grf::GrfField;

use rand::Rng;

use crate::dataset::{RawDataset, Thickness};
use crate::rng::substream;

/// Noise amplitudes and the generator grid.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseConfig {
    /// Relative half-width of the force multiplier distribution.
    pub omega: f64,
    /// Displacement noise factor (times `delta_x` gives the amplitude in mm).
    pub eta: f64,
    /// Geometry dimension scaling the normalized noise functions (mm).
    pub delta_x: f64,
    /// Square generator grid size (power of two).
    pub grid_n: usize,
    /// Correlation decay length on the unit square.
    pub ell: f64,
    pub seed: u64,
}

impl NoiseConfig {
    pub fn new(omega: f64, eta: f64, delta_x: f64, seed: u64) -> crate::Result<Self> {
        let cfg = Self {
            omega,
            eta,
            delta_x,
            grid_n: 1024,
            ell: 1.0 / 1024.0,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> crate::Result<()> {
        if self.omega < 0.0 {
            return Err(crate::Error::Config("omega must be >= 0".into()));
        }
        if self.eta < 0.0 {
            return Err(crate::Error::Config("eta must be >= 0".into()));
        }
        if self.delta_x <= 0.0 {
            return Err(crate::Error::Config("delta_x must be > 0".into()));
        }
        if !self.grid_n.is_power_of_two() {
            return Err(crate::Error::Config("grid size must be a power of two".into()));
        }
        if self.ell <= 0.0 {
            return Err(crate::Error::Config("correlation length must be > 0".into()));
        }
        Ok(())
    }
}

/// One uniform multiplier from U[1-omega, 1+omega] per snapshot applied to
/// the global testing force. `omega = 0` is the identity.
pub fn apply_force_noise(dataset: &mut RawDataset, omega: f64, seed: u64) -> crate::Result<()> {
    if omega < 0.0 {
        return Err(crate::Error::Config("omega must be >= 0".into()));
    }
    if omega == 0.0 {
        return Ok(());
    }
    for (tau, snap) in dataset.snapshots.iter_mut().enumerate() {
        let mut rng = substream(seed, "force-noise", tau as u64);
        let mult = 1.0 - omega + 2.0 * omega * rng.random::<f64>();
        snap.global_force *= mult;
    }
    Ok(())
}

/// Adds correlated noise to the displacement components and the thickness of
/// every snapshot. One independent field per (snapshot, component); values
/// are interpolated bilinearly at the deformed positions, and the thickness
/// perturbation carries a factor of two (both surfaces are measured).
pub fn apply_field_noise(dataset: &mut RawDataset, cfg: &NoiseConfig) -> crate::Result<()> {
    cfg.validate()?;
    if cfg.eta == 0.0 {
        return Ok(());
    }
    let amp = cfg.eta * cfg.delta_x;

    // The grid spans the bounding box of all deformed configurations, so
    // every evaluation point lies inside it.
    let mesh = dataset.mesh.clone();
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for snap in &dataset.snapshots {
        for (n, p) in mesh.nodes().iter().enumerate() {
            for k in 0..2 {
                let x = p[k] + snap.displacements[n][k];
                lo[k] = lo[k].min(x);
                hi[k] = hi[k].max(x);
            }
        }
    }
    let extent = [hi[0] - lo[0], hi[1] - lo[1]];
    if extent[0] <= 0.0 || extent[1] <= 0.0 {
        return Err(crate::Error::Domain("degenerate deformed bounding box".into()));
    }
    // Crop the square generator grid to the domain aspect ratio so grid
    // cells stay square in physical space.
    let longest = extent[0].max(extent[1]);
    let nx = ((cfg.grid_n as f64 * extent[0] / longest).round() as usize).clamp(2, cfg.grid_n);
    let ny = ((cfg.grid_n as f64 * extent[1] / longest).round() as usize).clamp(2, cfg.grid_n);

    for (tau, snap) in dataset.snapshots.iter_mut().enumerate() {
        let mut field = |component: u64| -> crate::Result<GrfField> {
            let mut rng = substream(cfg.seed, "field-noise", 3 * tau as u64 + component);
            GrfField::generate(cfg.grid_n, cfg.ell, nx, ny, &mut rng)
        };
        let f_u1 = field(0)?;
        let f_u2 = field(1)?;
        let f_h = field(2)?;

        let deformed: Vec<[f64; 2]> = mesh
            .nodes()
            .iter()
            .enumerate()
            .map(|(n, p)| {
                [
                    p[0] + snap.displacements[n][0],
                    p[1] + snap.displacements[n][1],
                ]
            })
            .collect();

        for (n, u) in snap.displacements.iter_mut().enumerate() {
            let [x, y] = deformed[n];
            u[0] += f_u1.interpolate(lo, extent, x, y)? * amp;
            u[1] += f_u2.interpolate(lo, extent, x, y)? * amp;
        }
        match &mut snap.thickness {
            Thickness::Nodes(h) => {
                for (n, v) in h.iter_mut().enumerate() {
                    let [x, y] = deformed[n];
                    *v += 2.0 * f_h.interpolate(lo, extent, x, y)? * amp;
                    if *v <= 0.0 {
                        return Err(crate::Error::Domain(format!(
                            "thickness noise drove node {n} non-positive"
                        )));
                    }
                }
            }
            Thickness::QuadPoints(h) => {
                // Quadrature-point measurements are perturbed at the deformed
                // element centroids.
                for (e, v) in h.iter_mut().enumerate() {
                    let [a, b, c] = mesh.element(e);
                    let x = (deformed[a][0] + deformed[b][0] + deformed[c][0]) / 3.0;
                    let y = (deformed[a][1] + deformed[b][1] + deformed[c][1]) / 3.0;
                    *v += 2.0 * f_h.interpolate(lo, extent, x, y)? * amp;
                    if *v <= 0.0 {
                        return Err(crate::Error::Domain(format!(
                            "thickness noise drove element {e} non-positive"
                        )));
                    }
                }
            }
        }
    }
    Ok(())
}

/// Applies force and field noise in one call.
pub fn apply_noise(dataset: &mut RawDataset, cfg: &NoiseConfig) -> crate::Result<()> {
    apply_force_noise(dataset, cfg.omega, cfg.seed)?;
    apply_field_noise(dataset, cfg)
}

#[cfg(test)]
mod tests;
