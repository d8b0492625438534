//! Pipeline configuration: a sectioned key = value text format with unit
//! suffixes, normalized to mm / N / MPa on parse.
//!
//! ```text
//! seed = 7
//!
//! [geometry]
//! width = 100 mm
//! height = 100 mm
//! elem_size = 2.8 mm
//! thickness = 5 mm
//! hole = 35 62 16 9 -25        # cx cy a b angle, repeatable
//!
//! [material]
//! youngs_modulus = 1 MPa
//! poissons_ratio = 0.3
//!
//! [load]
//! snapshots = 10
//! stretch = 50 mm
//! clamped = false
//!
//! [doi]
//! y0 = 40 mm
//! y1 = 260 mm
//!
//! [export]
//! mode = ideal
//!
//! [noise]
//! eta = 5e-4
//! omega = 1e-4
//! delta_x = 100 mm
//! grid = 1024
//!
//! [ddi]
//! formulation = ul
//! nstar_ratio = 0.01
//! pseudo_stiffness = 1 MPa
//!
//! [pann]
//! width = 8
//!
//! [eval]
//! lambda_min = 0.8
//! lambda_max = 1.4
//! ```
//!
//! Unknown keys and unit mismatches are collected and reported together.

use std::path::PathBuf;

use crate::dataset::ExportMode;
use crate::ddi::{Formulation, StateCount};
use crate::mesh::HoleSpec;
use crate::pann::StressMetric;

#[derive(Debug, Clone, PartialEq)]
pub enum GeometrySpec {
    /// External mesh file.
    MeshFile(PathBuf),
    Plate {
        width: f64,
        height: f64,
        elem_size: f64,
        thickness: f64,
        holes: Vec<HoleSpec>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadSettings {
    pub snapshots: usize,
    /// Final prescribed top displacement (mm); defaults to half the height.
    pub stretch: Option<f64>,
    /// Clamp both ends (realistic specimen) instead of roller bottom support.
    pub clamped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSettings {
    pub eta: f64,
    pub omega: f64,
    pub delta_x: f64,
    pub grid: usize,
    pub ell: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DdiSettings {
    pub formulation: Formulation,
    pub n_star: StateCount,
    /// None: ten times the stiffness estimated from the first snapshot.
    pub pseudo_stiffness: Option<f64>,
    pub max_iters: usize,
    pub linear_tol: f64,
    pub stress_reinit: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PannSettings {
    pub width: usize,
    /// None: 1e-2 times the estimated stiffness.
    pub lambda_gr: Option<f64>,
    pub restarts: usize,
    pub max_iters: usize,
    /// None: follows the identification formulation.
    pub metric: Option<StressMetric>,
    pub calibration_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalSettings {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub path_samples: usize,
}

/// Fully normalized pipeline configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub seed: u64,
    pub geometry: GeometrySpec,
    /// (E in MPa, nu).
    pub material: (f64, f64),
    pub load: LoadSettings,
    /// Optional interest band (y0, y1) cut before export.
    pub doi: Option<(f64, f64)>,
    pub export_mode: ExportMode,
    pub noise: Option<NoiseSettings>,
    pub ddi: DdiSettings,
    pub pann: PannSettings,
    pub eval: EvalSettings,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            geometry: GeometrySpec::Plate {
                width: 100.0,
                height: 100.0,
                elem_size: 2.8,
                thickness: 5.0,
                holes: vec![
                    HoleSpec { cx: 35.0, cy: 62.0, a: 16.0, b: 9.0, angle_deg: -25.0 },
                    HoleSpec { cx: 68.0, cy: 30.0, a: 13.0, b: 8.0, angle_deg: 15.0 },
                ],
            },
            material: (1.0, 0.3),
            load: LoadSettings {
                snapshots: 10,
                stretch: None,
                clamped: false,
            },
            doi: None,
            export_mode: ExportMode::Ideal,
            noise: None,
            ddi: DdiSettings {
                formulation: Formulation::UpdatedLagrangian,
                n_star: StateCount::Ratio(0.01),
                pseudo_stiffness: None,
                max_iters: 60,
                linear_tol: 1e-9,
                stress_reinit: true,
            },
            pann: PannSettings {
                width: 8,
                lambda_gr: None,
                restarts: 5,
                max_iters: 2000,
                metric: None,
                calibration_fraction: 0.7,
            },
            eval: EvalSettings {
                lambda_min: 0.8,
                lambda_max: 1.4,
                path_samples: 25,
            },
        }
    }
}

/// Number with an optional unit suffix, normalized to mm / MPa.
fn parse_quantity(value: &str) -> Result<f64, String> {
    let toks: Vec<&str> = value.split_whitespace().collect();
    let (num, unit) = match toks.as_slice() {
        [n] => (*n, None),
        [n, u] => (*n, Some(*u)),
        _ => return Err(format!("expected 'number [unit]', got '{value}'")),
    };
    let v: f64 = num
        .parse()
        .map_err(|_| format!("bad number '{num}'"))
        .and_then(|v: f64| {
            if v.is_finite() {
                Ok(v)
            } else {
                Err(format!("non-finite number '{num}'"))
            }
        })?;
    match unit {
        None | Some("mm") | Some("MPa") => Ok(v),
        Some("kPa") => Ok(v / 1000.0),
        Some("N") => Ok(v),
        Some(other) => Err(format!("unknown unit '{other}'")),
    }
}

impl PipelineConfig {
    /// Parses and validates; all problems are returned together.
    pub fn from_text(text: &str) -> Result<Self, Vec<String>> {
        let mut cfg = PipelineConfig::default();
        let mut errors = Vec::new();
        let mut section = String::new();
        let mut geometry_keys = false;
        let mut mesh_file: Option<PathBuf> = None;
        let mut plate = match &cfg.geometry {
            GeometrySpec::Plate {
                width,
                height,
                elem_size,
                thickness,
                holes,
            } => (*width, *height, *elem_size, *thickness, holes.clone()),
            _ => unreachable!(),
        };
        let mut explicit_holes = false;
        let mut noise = NoiseSettings {
            eta: 0.0,
            omega: 0.0,
            delta_x: 100.0,
            grid: 1024,
            ell: None,
        };
        let mut noise_keys = false;
        let mut doi = (f64::NAN, f64::NAN);

        for (lno, raw_line) in text.lines().enumerate() {
            let line = raw_line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = name.trim().to_string();
                match section.as_str() {
                    "geometry" | "material" | "load" | "doi" | "export" | "noise" | "ddi"
                    | "pann" | "eval" => {}
                    other => errors.push(format!("line {}: unknown section '[{other}]'", lno + 1)),
                }
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                errors.push(format!("line {}: expected 'key = value'", lno + 1));
                continue;
            };
            let key = key.trim();
            let value = value.trim();
            let mut err = |msg: String| errors.push(format!("line {}: {msg}", lno + 1));
            let q = |v: &str| parse_quantity(v);

            match (section.as_str(), key) {
                ("", "seed") => match value.parse::<u64>() {
                    Ok(v) => cfg.seed = v,
                    Err(_) => err(format!("bad seed '{value}'")),
                },
                ("geometry", "mesh") => mesh_file = Some(PathBuf::from(value)),
                ("geometry", "width") => match q(value) {
                    Ok(v) => {
                        plate.0 = v;
                        geometry_keys = true;
                    }
                    Err(e) => err(e),
                },
                ("geometry", "height") => match q(value) {
                    Ok(v) => {
                        plate.1 = v;
                        geometry_keys = true;
                    }
                    Err(e) => err(e),
                },
                ("geometry", "elem_size") => match q(value) {
                    Ok(v) => {
                        plate.2 = v;
                        geometry_keys = true;
                    }
                    Err(e) => err(e),
                },
                ("geometry", "thickness") => match q(value) {
                    Ok(v) => {
                        plate.3 = v;
                        geometry_keys = true;
                    }
                    Err(e) => err(e),
                },
                ("geometry", "hole") => {
                    let nums: Result<Vec<f64>, _> =
                        value.split_whitespace().map(|t| t.parse::<f64>()).collect();
                    match nums {
                        Ok(v) if v.len() == 5 => {
                            if !explicit_holes {
                                plate.4.clear();
                                explicit_holes = true;
                            }
                            plate.4.push(HoleSpec {
                                cx: v[0],
                                cy: v[1],
                                a: v[2],
                                b: v[3],
                                angle_deg: v[4],
                            });
                            geometry_keys = true;
                        }
                        _ => err(format!("hole needs 'cx cy a b angle', got '{value}'")),
                    }
                }
                ("geometry", "holes") if value == "none" => {
                    plate.4.clear();
                    explicit_holes = true;
                    geometry_keys = true;
                }
                ("material", "youngs_modulus") => match q(value) {
                    Ok(v) if v > 0.0 => cfg.material.0 = v,
                    Ok(_) => err("Young's modulus must be > 0".into()),
                    Err(e) => err(e),
                },
                ("material", "poissons_ratio") => match value.parse::<f64>() {
                    Ok(v) if v > -1.0 && v < 0.5 => cfg.material.1 = v,
                    _ => err(format!("Poisson's ratio must lie in (-1, 0.5), got '{value}'")),
                },
                ("load", "snapshots") => match value.parse::<usize>() {
                    Ok(v) if v >= 1 => cfg.load.snapshots = v,
                    _ => err(format!("snapshots must be a positive integer, got '{value}'")),
                },
                ("load", "stretch") => match q(value) {
                    Ok(v) => cfg.load.stretch = Some(v),
                    Err(e) => err(e),
                },
                ("load", "clamped") => match value.parse::<bool>() {
                    Ok(v) => cfg.load.clamped = v,
                    Err(_) => err(format!("clamped must be true or false, got '{value}'")),
                },
                ("doi", "y0") => match q(value) {
                    Ok(v) => doi.0 = v,
                    Err(e) => err(e),
                },
                ("doi", "y1") => match q(value) {
                    Ok(v) => doi.1 = v,
                    Err(e) => err(e),
                },
                ("export", "mode") => match value {
                    "ideal" => cfg.export_mode = ExportMode::Ideal,
                    "realistic" => cfg.export_mode = ExportMode::Realistic,
                    other => err(format!("mode must be ideal or realistic, got '{other}'")),
                },
                ("noise", "eta") => match value.parse::<f64>() {
                    Ok(v) if v >= 0.0 => {
                        noise.eta = v;
                        noise_keys = true;
                    }
                    _ => err(format!("eta must be >= 0, got '{value}'")),
                },
                ("noise", "omega") => match value.parse::<f64>() {
                    Ok(v) if v >= 0.0 => {
                        noise.omega = v;
                        noise_keys = true;
                    }
                    _ => err(format!("omega must be >= 0, got '{value}'")),
                },
                ("noise", "delta_x") => match q(value) {
                    Ok(v) if v > 0.0 => {
                        noise.delta_x = v;
                        noise_keys = true;
                    }
                    _ => err(format!("delta_x must be > 0, got '{value}'")),
                },
                ("noise", "grid") => match value.parse::<usize>() {
                    Ok(v) if v.is_power_of_two() => {
                        noise.grid = v;
                        noise_keys = true;
                    }
                    _ => err(format!("grid must be a power of two, got '{value}'")),
                },
                ("noise", "ell") => match value.parse::<f64>() {
                    Ok(v) if v > 0.0 => {
                        noise.ell = Some(v);
                        noise_keys = true;
                    }
                    _ => err(format!("ell must be > 0, got '{value}'")),
                },
                ("ddi", "formulation") => match Formulation::parse(value) {
                    Ok(f) => cfg.ddi.formulation = f,
                    Err(e) => err(e.to_string()),
                },
                ("ddi", "nstar_ratio") => match value.parse::<f64>() {
                    Ok(v) if v > 0.0 && v <= 1.0 => cfg.ddi.n_star = StateCount::Ratio(v),
                    _ => err(format!("nstar_ratio must lie in (0, 1], got '{value}'")),
                },
                ("ddi", "nstar") => match value.parse::<usize>() {
                    Ok(v) if v >= 1 => cfg.ddi.n_star = StateCount::Count(v),
                    _ => err(format!("nstar must be >= 1, got '{value}'")),
                },
                ("ddi", "pseudo_stiffness") => match q(value) {
                    Ok(v) if v > 0.0 => cfg.ddi.pseudo_stiffness = Some(v),
                    _ => err(format!("pseudo_stiffness must be > 0, got '{value}'")),
                },
                ("ddi", "max_iters") => match value.parse::<usize>() {
                    Ok(v) if v >= 1 => cfg.ddi.max_iters = v,
                    _ => err(format!("max_iters must be >= 1, got '{value}'")),
                },
                ("ddi", "linear_tol") => match value.parse::<f64>() {
                    Ok(v) if v > 0.0 => cfg.ddi.linear_tol = v,
                    _ => err(format!("linear_tol must be > 0, got '{value}'")),
                },
                ("ddi", "stress_reinit") => match value.parse::<bool>() {
                    Ok(v) => cfg.ddi.stress_reinit = v,
                    Err(_) => err(format!("stress_reinit must be true or false, got '{value}'")),
                },
                ("pann", "width") => match value.parse::<usize>() {
                    Ok(v) if v >= 1 => cfg.pann.width = v,
                    _ => err(format!("width must be >= 1, got '{value}'")),
                },
                ("pann", "lambda_gr") => match q(value) {
                    Ok(v) if v > 0.0 => cfg.pann.lambda_gr = Some(v),
                    _ => err(format!("lambda_gr must be > 0, got '{value}'")),
                },
                ("pann", "restarts") => match value.parse::<usize>() {
                    Ok(v) if v >= 1 => cfg.pann.restarts = v,
                    _ => err(format!("restarts must be >= 1, got '{value}'")),
                },
                ("pann", "max_iters") => match value.parse::<usize>() {
                    Ok(v) if v >= 1 => cfg.pann.max_iters = v,
                    _ => err(format!("max_iters must be >= 1, got '{value}'")),
                },
                ("pann", "metric") => match StressMetric::parse(value) {
                    Ok(m) => cfg.pann.metric = Some(m),
                    Err(e) => err(e.to_string()),
                },
                ("pann", "calibration_fraction") => match value.parse::<f64>() {
                    Ok(v) if v > 0.0 && v < 1.0 => cfg.pann.calibration_fraction = v,
                    _ => err(format!("calibration_fraction must lie in (0, 1), got '{value}'")),
                },
                ("eval", "lambda_min") => match value.parse::<f64>() {
                    Ok(v) if v > 0.0 => cfg.eval.lambda_min = v,
                    _ => err(format!("lambda_min must be > 0, got '{value}'")),
                },
                ("eval", "lambda_max") => match value.parse::<f64>() {
                    Ok(v) if v > 0.0 => cfg.eval.lambda_max = v,
                    _ => err(format!("lambda_max must be > 0, got '{value}'")),
                },
                ("eval", "path_samples") => match value.parse::<usize>() {
                    Ok(v) if v >= 2 => cfg.eval.path_samples = v,
                    _ => err(format!("path_samples must be >= 2, got '{value}'")),
                },
                (sec, key) => err(format!("unknown key '{key}' in section '[{sec}]'")),
            }
        }

        if let Some(mesh) = mesh_file {
            if geometry_keys {
                errors.push(
                    "geometry: give either 'mesh' or plate dimensions, not both".into(),
                );
            }
            cfg.geometry = GeometrySpec::MeshFile(mesh);
        } else {
            cfg.geometry = GeometrySpec::Plate {
                width: plate.0,
                height: plate.1,
                elem_size: plate.2,
                thickness: plate.3,
                holes: plate.4,
            };
        }
        if noise_keys {
            cfg.noise = Some(noise);
        }
        match (doi.0.is_nan(), doi.1.is_nan()) {
            (true, true) => {}
            (false, false) if doi.1 > doi.0 => cfg.doi = Some(doi),
            _ => errors.push("doi: both y0 and y1 are required with y1 > y0".into()),
        }
        if cfg.eval.lambda_max <= cfg.eval.lambda_min {
            errors.push("eval: lambda_max must exceed lambda_min".into());
        }

        if errors.is_empty() {
            Ok(cfg)
        } else {
            Err(errors)
        }
    }

    pub fn from_file(path: &std::path::Path) -> crate::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_text(&text).map_err(|errs| {
            crate::Error::Config(format!(
                "{} problem(s) in {}:\n  {}",
                errs.len(),
                path.display(),
                errs.join("\n  ")
            ))
        })
    }

    /// Canonical serialization of the normalized config; hashing this gives
    /// the config identity recorded in manifests.
    pub fn to_resolved_text(&self) -> String {
        use std::fmt::Write;
        let f = crate::textio::fmt_f64;
        let mut s = String::from("# resolved hyperfit configuration\n");
        writeln!(s, "seed = {}", self.seed).unwrap();
        writeln!(s, "\n[geometry]").unwrap();
        match &self.geometry {
            GeometrySpec::MeshFile(p) => writeln!(s, "mesh = {}", p.display()).unwrap(),
            GeometrySpec::Plate {
                width,
                height,
                elem_size,
                thickness,
                holes,
            } => {
                writeln!(s, "width = {}", f(*width)).unwrap();
                writeln!(s, "height = {}", f(*height)).unwrap();
                writeln!(s, "elem_size = {}", f(*elem_size)).unwrap();
                writeln!(s, "thickness = {}", f(*thickness)).unwrap();
                if holes.is_empty() {
                    writeln!(s, "holes = none").unwrap();
                }
                for h in holes {
                    writeln!(
                        s,
                        "hole = {} {} {} {} {}",
                        f(h.cx),
                        f(h.cy),
                        f(h.a),
                        f(h.b),
                        f(h.angle_deg)
                    )
                    .unwrap();
                }
            }
        }
        writeln!(s, "\n[material]").unwrap();
        writeln!(s, "youngs_modulus = {}", f(self.material.0)).unwrap();
        writeln!(s, "poissons_ratio = {}", f(self.material.1)).unwrap();
        writeln!(s, "\n[load]").unwrap();
        writeln!(s, "snapshots = {}", self.load.snapshots).unwrap();
        if let Some(v) = self.load.stretch {
            writeln!(s, "stretch = {}", f(v)).unwrap();
        }
        writeln!(s, "clamped = {}", self.load.clamped).unwrap();
        if let Some((y0, y1)) = self.doi {
            writeln!(s, "\n[doi]").unwrap();
            writeln!(s, "y0 = {}", f(y0)).unwrap();
            writeln!(s, "y1 = {}", f(y1)).unwrap();
        }
        writeln!(s, "\n[export]").unwrap();
        writeln!(s, "mode = {}", self.export_mode.as_str()).unwrap();
        if let Some(n) = &self.noise {
            writeln!(s, "\n[noise]").unwrap();
            writeln!(s, "eta = {}", f(n.eta)).unwrap();
            writeln!(s, "omega = {}", f(n.omega)).unwrap();
            writeln!(s, "delta_x = {}", f(n.delta_x)).unwrap();
            writeln!(s, "grid = {}", n.grid).unwrap();
            if let Some(ell) = n.ell {
                writeln!(s, "ell = {}", f(ell)).unwrap();
            }
        }
        writeln!(s, "\n[ddi]").unwrap();
        writeln!(s, "formulation = {}", self.ddi.formulation.as_str()).unwrap();
        match self.ddi.n_star {
            StateCount::Ratio(r) => writeln!(s, "nstar_ratio = {}", f(r)).unwrap(),
            StateCount::Count(n) => writeln!(s, "nstar = {n}").unwrap(),
        }
        if let Some(c) = self.ddi.pseudo_stiffness {
            writeln!(s, "pseudo_stiffness = {}", f(c)).unwrap();
        }
        writeln!(s, "max_iters = {}", self.ddi.max_iters).unwrap();
        writeln!(s, "linear_tol = {}", f(self.ddi.linear_tol)).unwrap();
        writeln!(s, "stress_reinit = {}", self.ddi.stress_reinit).unwrap();
        writeln!(s, "\n[pann]").unwrap();
        writeln!(s, "width = {}", self.pann.width).unwrap();
        if let Some(l) = self.pann.lambda_gr {
            writeln!(s, "lambda_gr = {}", f(l)).unwrap();
        }
        writeln!(s, "restarts = {}", self.pann.restarts).unwrap();
        writeln!(s, "max_iters = {}", self.pann.max_iters).unwrap();
        if let Some(m) = self.pann.metric {
            writeln!(s, "metric = {}", m.as_str()).unwrap();
        }
        writeln!(s, "calibration_fraction = {}", f(self.pann.calibration_fraction)).unwrap();
        writeln!(s, "\n[eval]").unwrap();
        writeln!(s, "lambda_min = {}", f(self.eval.lambda_min)).unwrap();
        writeln!(s, "lambda_max = {}", f(self.eval.lambda_max)).unwrap();
        writeln!(s, "path_samples = {}", self.eval.path_samples).unwrap();
        s
    }
}
