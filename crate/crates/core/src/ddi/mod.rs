//! Model-free identification of stress-strain databases from displacement and
//! force snapshots.
//!
//! Three finite-strain formulations share one staggered solver: an updated
//! Lagrangian one working with (Euler-Almansi strain, Cauchy stress) on the
//! deformed domain, a total Lagrangian one working with (Green-Lagrange
//! strain, second Piola-Kirchhoff stress) on the reference domain, and an
//! adapted total Lagrangian variant whose metric is the deformation-dependent
//! pull-back of a constant spatial pseudo stiffness.
//!
//! Strains carry four active components and stresses three in-plane
//! components; both are handled internally in Mandel form (off-diagonal
//! entries scaled by sqrt 2) so that metric contractions are plain dot
//! products.

mod input;
mod kmeans;
mod solver;
mod system;
mod workspace;

pub use input::DdiInput;
pub use kmeans::{init_mapping, InitMode};
pub use solver::{run_ddi, solver_oracle_deviation, DdiResult};
pub use workspace::{ddi_loss, point_distance, DdiWorkspace};

use std::path::Path;

use crate::textio::{fmt_f64, parse_f64};

pub(crate) const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Which conjugate strain/stress pair and metric the solver uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Formulation {
    UpdatedLagrangian,
    TotalLagrangian,
    AdaptedTotalLagrangian,
}

impl Formulation {
    pub fn as_str(&self) -> &'static str {
        match self {
            Formulation::UpdatedLagrangian => "ul",
            Formulation::TotalLagrangian => "tl",
            Formulation::AdaptedTotalLagrangian => "tl-adapted",
        }
    }

    pub fn parse(s: &str) -> crate::Result<Self> {
        match s {
            "ul" => Ok(Formulation::UpdatedLagrangian),
            "tl" => Ok(Formulation::TotalLagrangian),
            "tl-adapted" | "tla" => Ok(Formulation::AdaptedTotalLagrangian),
            other => Err(crate::Error::Config(format!(
                "unknown formulation '{other}' (expected ul, tl or tl-adapted)"
            ))),
        }
    }
}

/// Number of material states, fixed or relative to the point count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateCount {
    Count(usize),
    /// Ceil of ratio times (quadrature points x snapshots).
    Ratio(f64),
}

impl StateCount {
    pub fn resolve(&self, n_points: usize) -> crate::Result<usize> {
        let n = match self {
            StateCount::Count(n) => *n,
            StateCount::Ratio(r) => {
                if *r <= 0.0 {
                    return Err(crate::Error::Config("state ratio must be > 0".into()));
                }
                (r * n_points as f64).ceil() as usize
            }
        };
        if n == 0 || n > n_points {
            return Err(crate::Error::Config(format!(
                "material state count {n} must lie in [1, {n_points}]"
            )));
        }
        Ok(n)
    }
}

/// Solver configuration.
#[derive(Debug, Clone)]
pub struct DdiConfig {
    pub formulation: Formulation,
    pub n_star: StateCount,
    /// Pseudo-stiffness scale (MPa).
    pub pseudo_stiffness: f64,
    pub max_iters: usize,
    /// Relative residual target of the saddle-point solves.
    pub linear_rel_tol: f64,
    pub minres_max_iters: usize,
    /// One-time stress-based reinitialization of the mapping after the first
    /// iteration.
    pub stress_reinit: bool,
    pub seed: u64,
    /// Multiplier dofs (node, component) pinned to zero; required when forces
    /// are prescribed at every node and rigid modes would make the system
    /// singular.
    pub pinned_eta: Vec<(usize, usize)>,
}

impl DdiConfig {
    pub fn new(formulation: Formulation, pseudo_stiffness: f64, seed: u64) -> Self {
        Self {
            formulation,
            n_star: StateCount::Ratio(0.01),
            pseudo_stiffness,
            max_iters: 60,
            linear_rel_tol: 1e-9,
            minres_max_iters: 60_000,
            stress_reinit: true,
            seed,
            pinned_eta: Vec::new(),
        }
    }
}

/// Identified database: one strain/stress tuple per material state plus its
/// accumulated volume weight.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialDatabase {
    pub formulation: Formulation,
    /// Mandel-active strain components (11, 22, 33, sqrt2 * 12).
    pub strains: Vec<[f64; 4]>,
    /// Mandel in-plane stress components (11, 22, sqrt2 * 12).
    pub stresses: Vec<[f64; 3]>,
    /// Sum of quadrature weights assigned to each state.
    pub weights: Vec<f64>,
}

impl MaterialDatabase {
    pub fn len(&self) -> usize {
        self.strains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strains.is_empty()
    }

    /// Plain (non-Mandel) strain components (11, 22, 33, 12) of state `z`.
    pub fn strain_components(&self, z: usize) -> [f64; 4] {
        let s = self.strains[z];
        [s[0], s[1], s[2], s[3] / SQRT2]
    }

    /// Plain stress components (11, 22, 12) of state `z`.
    pub fn stress_components(&self, z: usize) -> [f64; 3] {
        let s = self.stresses[z];
        [s[0], s[1], s[2] / SQRT2]
    }

    pub fn to_text(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        writeln!(s, "hyperfit-database-v1 formulation {}", self.formulation.as_str()).unwrap();
        let (e, t) = match self.formulation {
            Formulation::UpdatedLagrangian => ("e", "sig"),
            _ => ("E", "T"),
        };
        writeln!(s, "# z {e}11 {e}22 {e}33 {e}12 {t}11 {t}22 {t}12 weight").unwrap();
        for z in 0..self.len() {
            let ec = self.strain_components(z);
            let tc = self.stress_components(z);
            writeln!(
                s,
                "{} {} {} {} {} {} {} {} {}",
                z,
                fmt_f64(ec[0]),
                fmt_f64(ec[1]),
                fmt_f64(ec[2]),
                fmt_f64(ec[3]),
                fmt_f64(tc[0]),
                fmt_f64(tc[1]),
                fmt_f64(tc[2]),
                fmt_f64(self.weights[z])
            )
            .unwrap();
        }
        s
    }

    pub fn write_file(&self, path: &Path) -> crate::Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn from_text(text: &str, origin: &Path) -> crate::Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| crate::Error::parse(origin, 1, "empty database file"))?;
        let toks: Vec<&str> = header.split_whitespace().collect();
        if toks.len() != 3 || toks[0] != "hyperfit-database-v1" || toks[1] != "formulation" {
            return Err(crate::Error::parse(origin, 1, "bad database header"));
        }
        let formulation = Formulation::parse(toks[2])?;
        let mut strains = Vec::new();
        let mut stresses = Vec::new();
        let mut weights = Vec::new();
        for (lno, line) in lines {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let vals: Vec<&str> = line.split_whitespace().collect();
            if vals.len() != 9 {
                return Err(crate::Error::parse(origin, lno + 1, "expected 9 columns"));
            }
            let mut nums = [0.0; 8];
            for (k, v) in vals[1..].iter().enumerate() {
                nums[k] = parse_f64(v).ok_or_else(|| {
                    crate::Error::parse(origin, lno + 1, format!("bad number '{v}'"))
                })?;
            }
            strains.push([nums[0], nums[1], nums[2], nums[3] * SQRT2]);
            stresses.push([nums[4], nums[5], nums[6] * SQRT2]);
            weights.push(nums[7]);
        }
        if strains.is_empty() {
            return Err(crate::Error::parse(origin, 1, "database has no states"));
        }
        Ok(Self {
            formulation,
            strains,
            stresses,
            weights,
        })
    }

    pub fn read_file(path: &Path) -> crate::Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?, path)
    }
}

#[cfg(test)]
mod tests;
