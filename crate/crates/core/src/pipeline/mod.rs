//! Pipeline orchestration: configuration, staged execution with file-based
//! resume, and run manifests with content checksums.
//!
//! Stages write into fixed subdirectories of the output directory:
//! `raw/` (virtual experiment), `noisy/` (perturbed copy), `ddi/` (identified
//! database and mechanical states), `pann/` (calibrated model), `eval/`
//! (metric tables). A stage whose outputs already exist is skipped, so
//! deleting one stage's directory reruns only that stage and its dependents.

mod config;
mod manifest;

pub use config::{
    DdiSettings, EvalSettings, GeometrySpec, LoadSettings, NoiseSettings, PannSettings,
    PipelineConfig,
};
pub use manifest::Manifest;

use std::path::{Path, PathBuf};

use crate::continuum::NeoHookeParams;
use crate::dataset::RawDataset;
use crate::ddi::{run_ddi, DdiConfig, DdiInput, DdiResult, Formulation, MaterialDatabase};
use crate::eval::{
    ddi_r2, estimate_stiffness_from_dataset, r2, reference_stress, stress_path_compare,
    DeformationPath, R2Report,
};
use crate::fem::{
    export_raw_data, extract_doi, solve_forward, DirichletBc, ExportSpec, FeSnapshot, LoadProgram,
};
use crate::mesh::TriMesh;
use crate::noise::{apply_noise, NoiseConfig};
use crate::pann::{train, Dataset, PannModel, TrainConfig, TrainReport};
use crate::textio::{fmt_f64, parse_f64};

/// Builds the mesh and load program described by a configuration.
pub fn mesh_and_loads(cfg: &PipelineConfig) -> crate::Result<(TriMesh, LoadProgram)> {
    let mesh = match &cfg.geometry {
        GeometrySpec::MeshFile(path) => TriMesh::read_file(path)?,
        GeometrySpec::Plate {
            width,
            height,
            elem_size,
            thickness,
            holes,
        } => crate::mesh::generate_plate_mesh(*width, *height, holes, *elem_size, *thickness)?,
    };
    mesh.boundary_set("bottom")?;
    mesh.boundary_set("top")?;
    let (_, hi) = mesh.bounding_box();
    let stretch = cfg.load.stretch.unwrap_or(0.5 * hi[1]);
    let mut dirichlet = vec![
        DirichletBc { set: "bottom".into(), comp: 0, value: 0.0 },
        DirichletBc { set: "bottom".into(), comp: 1, value: 0.0 },
        DirichletBc { set: "top".into(), comp: 1, value: stretch },
    ];
    if cfg.load.clamped {
        dirichlet.push(DirichletBc { set: "top".into(), comp: 0, value: 0.0 });
    }
    Ok((
        mesh,
        LoadProgram {
            n_snap: cfg.load.snapshots,
            dirichlet,
            tractions: vec![],
            driven_set: "top".into(),
            driven_comp: 1,
        },
    ))
}

/// Solves the virtual experiment and writes the raw dataset.
pub fn stage_generate(cfg: &PipelineConfig, out: &Path) -> crate::Result<RawDataset> {
    let p = NeoHookeParams::new(cfg.material.0, cfg.material.1)?;
    let (mesh, loads) = mesh_and_loads(cfg)?;
    let snapshots = solve_forward(&mesh, &loads, &p)?;
    let (mesh, snapshots): (TriMesh, Vec<FeSnapshot>) = match cfg.doi {
        Some((y0, y1)) => extract_doi(&mesh, &snapshots, &p, y0, y1)?,
        None => (mesh, snapshots),
    };
    let raw = export_raw_data(
        &mesh,
        &snapshots,
        &ExportSpec {
            mode: cfg.export_mode,
            zeta_set: "top".into(),
            force_set: "bottom".into(),
            material: Some(cfg.material),
        },
    )?;
    raw.write_dir(out)?;
    Ok(raw)
}

/// Applies the configured noise to a dataset directory.
pub fn stage_noise(
    input: &Path,
    out: &Path,
    settings: &NoiseSettings,
    seed: u64,
) -> crate::Result<RawDataset> {
    let mut dataset = RawDataset::read_dir(input)?;
    let cfg = NoiseConfig {
        omega: settings.omega,
        eta: settings.eta,
        delta_x: settings.delta_x,
        grid_n: settings.grid,
        ell: settings.ell.unwrap_or(1.0 / settings.grid as f64),
        seed,
    };
    apply_noise(&mut dataset, &cfg)?;
    dataset.write_dir(out)?;
    Ok(dataset)
}

/// Summary of one identification stage, persisted as `ddi_run.txt`.
#[derive(Debug, Clone, PartialEq)]
pub struct DdiRunSummary {
    pub formulation: Formulation,
    pub n_star: usize,
    pub pseudo_stiffness: f64,
    pub stiffness_estimate: f64,
    pub iterations: usize,
    pub converged: bool,
    pub minres_iterations: usize,
    pub eliminated_states: usize,
    pub equilibrium_residual: f64,
    pub loss: f64,
}

impl DdiRunSummary {
    fn to_text(&self) -> String {
        use std::fmt::Write;
        let mut s = String::from("hyperfit-ddi-run-v1\n");
        writeln!(s, "formulation {}", self.formulation.as_str()).unwrap();
        writeln!(s, "n_star {}", self.n_star).unwrap();
        writeln!(s, "pseudo_stiffness {}", fmt_f64(self.pseudo_stiffness)).unwrap();
        writeln!(s, "stiffness_estimate {}", fmt_f64(self.stiffness_estimate)).unwrap();
        writeln!(s, "iterations {}", self.iterations).unwrap();
        writeln!(s, "converged {}", self.converged).unwrap();
        writeln!(s, "minres_iterations {}", self.minres_iterations).unwrap();
        writeln!(s, "eliminated_states {}", self.eliminated_states).unwrap();
        writeln!(s, "equilibrium_residual {}", fmt_f64(self.equilibrium_residual)).unwrap();
        writeln!(s, "loss {}", fmt_f64(self.loss)).unwrap();
        s
    }

    pub fn from_file(path: &Path) -> crate::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut map = std::collections::BTreeMap::new();
        for line in text.lines().skip(1) {
            if let Some((k, v)) = line.split_once(' ') {
                map.insert(k.to_string(), v.to_string());
            }
        }
        let get = |k: &str| -> crate::Result<String> {
            map.get(k)
                .cloned()
                .ok_or_else(|| crate::Error::Config(format!("ddi_run.txt missing '{k}'")))
        };
        Ok(Self {
            formulation: Formulation::parse(&get("formulation")?)?,
            n_star: get("n_star")?.parse().unwrap_or(0),
            pseudo_stiffness: parse_f64(&get("pseudo_stiffness")?).unwrap_or(f64::NAN),
            stiffness_estimate: parse_f64(&get("stiffness_estimate")?).unwrap_or(f64::NAN),
            iterations: get("iterations")?.parse().unwrap_or(0),
            converged: get("converged")? == "true",
            minres_iterations: get("minres_iterations")?.parse().unwrap_or(0),
            eliminated_states: get("eliminated_states")?.parse().unwrap_or(0),
            equilibrium_residual: parse_f64(&get("equilibrium_residual")?).unwrap_or(f64::NAN),
            loss: parse_f64(&get("loss")?).unwrap_or(f64::NAN),
        })
    }
}

/// Mechanical states with their assignment, persisted as `mech_states.txt`.
pub fn write_mech_states(result: &DdiResult, path: &Path) -> crate::Result<()> {
    use std::fmt::Write;
    let mut s = String::from("hyperfit-mech-states-v1\n");
    writeln!(s, "# tau g z e11 e22 e33 e12 s11 s22 s12").unwrap();
    let sqrt2 = crate::ddi::SQRT2;
    for tau in 0..result.n_snap {
        for g in 0..result.n_quad {
            let pt = tau * result.n_quad + g;
            let e = result.mech_strains[pt];
            let st = result.mech_stresses[pt];
            writeln!(
                s,
                "{} {} {} {} {} {} {} {} {} {}",
                tau,
                g,
                result.mapping[pt],
                fmt_f64(e[0]),
                fmt_f64(e[1]),
                fmt_f64(e[2]),
                fmt_f64(e[3] / sqrt2),
                fmt_f64(st[0]),
                fmt_f64(st[1]),
                fmt_f64(st[2] / sqrt2)
            )
            .unwrap();
        }
    }
    std::fs::write(path, s)?;
    Ok(())
}

/// Mandel-form mechanical states and the mapping, read back from disk.
pub fn read_mech_states(path: &Path) -> crate::Result<(Vec<[f64; 4]>, Vec<[f64; 3]>, Vec<usize>)> {
    let text = std::fs::read_to_string(path)?;
    let sqrt2 = crate::ddi::SQRT2;
    let mut strains = Vec::new();
    let mut stresses = Vec::new();
    let mut mapping = Vec::new();
    for (lno, line) in text.lines().enumerate().skip(1) {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 10 {
            return Err(crate::Error::parse(path, lno + 1, "expected 10 columns"));
        }
        let z: usize = toks[2]
            .parse()
            .map_err(|_| crate::Error::parse(path, lno + 1, "bad state index"))?;
        let mut nums = [0.0; 7];
        for (k, t) in toks[3..].iter().enumerate() {
            nums[k] = parse_f64(t)
                .ok_or_else(|| crate::Error::parse(path, lno + 1, format!("bad number '{t}'")))?;
        }
        strains.push([nums[0], nums[1], nums[2], sqrt2 * nums[3]]);
        stresses.push([nums[4], nums[5], sqrt2 * nums[6]]);
        mapping.push(z);
    }
    Ok((strains, stresses, mapping))
}

/// Runs the identification on a dataset directory and writes the database,
/// the mechanical states, the recovered boundary forces and a run summary.
pub fn stage_ddi(
    input_dir: &Path,
    settings: &DdiSettings,
    seed: u64,
    out: &Path,
) -> crate::Result<(DdiResult, DdiRunSummary)> {
    let raw = RawDataset::read_dir(input_dir)?;
    let input = DdiInput::from_raw(&raw)?;
    let estimate = estimate_stiffness_from_dataset(&raw)?;
    let pseudo_stiffness = settings.pseudo_stiffness.unwrap_or(10.0 * estimate);
    let mut cfg = DdiConfig::new(settings.formulation, pseudo_stiffness, seed);
    cfg.n_star = settings.n_star;
    cfg.max_iters = settings.max_iters;
    cfg.linear_rel_tol = settings.linear_tol;
    cfg.stress_reinit = settings.stress_reinit;
    let result = run_ddi(&input, &cfg)?;

    std::fs::create_dir_all(out)?;
    result.database.write_file(&out.join("database.txt"))?;
    write_mech_states(&result, &out.join("mech_states.txt"))?;
    let mut zeta = String::from("hyperfit-zeta-forces-v1\n# tau node fx fy\n");
    for (tau, forces) in result.zeta_forces.iter().enumerate() {
        for (node, f) in forces {
            use std::fmt::Write;
            writeln!(zeta, "{} {} {} {}", tau, node, fmt_f64(f[0]), fmt_f64(f[1])).unwrap();
        }
    }
    std::fs::write(out.join("zeta_forces.txt"), zeta)?;
    let summary = DdiRunSummary {
        formulation: settings.formulation,
        n_star: result.database.len(),
        pseudo_stiffness,
        stiffness_estimate: estimate,
        iterations: result.iterations,
        converged: result.converged,
        minres_iterations: result.minres_iterations,
        eliminated_states: result.eliminated_states,
        equilibrium_residual: result.equilibrium_residual,
        loss: result.loss,
    };
    std::fs::write(out.join("ddi_run.txt"), summary.to_text())?;
    Ok((result, summary))
}

/// Trains the network on a database file and writes the model plus a report.
pub fn stage_train(
    db_file: &Path,
    settings: &PannSettings,
    lambda_gr: f64,
    seed: u64,
    out: &Path,
) -> crate::Result<TrainReport> {
    let db = MaterialDatabase::read_file(db_file)?;
    let mut dataset = Dataset::from_database(&db)?;
    if let Some(metric) = settings.metric {
        dataset.metric = metric;
    }
    dataset.shuffle_split(settings.calibration_fraction, seed)?;
    let report = train(
        &dataset,
        &TrainConfig {
            width: settings.width,
            lambda_gr,
            restarts: settings.restarts,
            max_iters: settings.max_iters,
            seed,
        },
    )?;
    std::fs::create_dir_all(out)?;
    report.model.write_file(&out.join("model.pann"))?;
    let mut s = String::from("hyperfit-train-report-v1\n");
    use std::fmt::Write;
    writeln!(s, "metric {}", dataset.metric.as_str()).unwrap();
    writeln!(s, "calibration_mse {}", fmt_f64(report.calibration_mse)).unwrap();
    writeln!(s, "test_mse {}", fmt_f64(report.test_mse)).unwrap();
    writeln!(s, "calibration_r2 {}", fmt_f64(report.calibration_r2)).unwrap();
    writeln!(s, "test_r2 {}", fmt_f64(report.test_r2)).unwrap();
    writeln!(
        s,
        "restart_losses {}",
        report
            .restart_losses
            .iter()
            .map(|v| fmt_f64(*v))
            .collect::<Vec<_>>()
            .join(" ")
    )
    .unwrap();
    writeln!(s, "excluded_samples {}", dataset.excluded).unwrap();
    std::fs::write(out.join("train_report.txt"), s)?;
    Ok(report)
}

/// Network stresses evaluated at identified strain states, for scoring
/// against the reference at the same strains.
pub fn pann_stress_at_strains(
    model: &PannModel,
    strains: &[[f64; 4]],
    formulation: Formulation,
) -> Vec<Option<[f64; 3]>> {
    let sqrt2 = crate::ddi::SQRT2;
    strains
        .iter()
        .map(|e| {
            let plain = [e[0], e[1], e[2], e[3] / sqrt2];
            let tensor = match formulation {
                Formulation::UpdatedLagrangian => {
                    let m = crate::continuum::SymTensor2::new([
                        1.0 - 2.0 * plain[0],
                        1.0 - 2.0 * plain[1],
                        1.0 - 2.0 * plain[2],
                        -2.0 * plain[3],
                        0.0,
                        0.0,
                    ]);
                    m.inverse().filter(|b| b.is_positive_definite())
                }
                _ => {
                    let c = crate::continuum::SymTensor2::new([
                        1.0 + 2.0 * plain[0],
                        1.0 + 2.0 * plain[1],
                        1.0 + 2.0 * plain[2],
                        2.0 * plain[3],
                        0.0,
                        0.0,
                    ]);
                    Some(c).filter(|c| c.is_positive_definite())
                }
            };
            tensor.and_then(|t| {
                let stress = match formulation {
                    Formulation::UpdatedLagrangian => model.cauchy(&t),
                    _ => model.second_piola(&t),
                };
                stress
                    .ok()
                    .map(|s| [s.get(0, 0), s.get(1, 1), sqrt2 * s.get(0, 1)])
            })
        })
        .collect()
}

/// Metrics produced by the evaluation stage.
#[derive(Debug, Clone)]
pub struct EvalMetrics {
    pub ddi_mech: R2Report,
    pub ddi_mat: R2Report,
    pub pann_mech: R2Report,
    pub pann_mat: R2Report,
    pub path_max_rel: Vec<(DeformationPath, f64)>,
}

/// Scores the identified states and the trained model against the reference
/// and writes the metric tables.
pub fn stage_eval(
    ddi_dir: &Path,
    model_file: &Path,
    material: (f64, f64),
    eval: &EvalSettings,
    out: &Path,
) -> crate::Result<EvalMetrics> {
    let p = NeoHookeParams::new(material.0, material.1)?;
    let db = MaterialDatabase::read_file(&ddi_dir.join("database.txt"))?;
    let (mech_strains, mech_stresses, mapping) =
        read_mech_states(&ddi_dir.join("mech_states.txt"))?;
    let model = PannModel::read_file(model_file)?;
    let formulation = db.formulation;

    let pseudo_result = DdiResult {
        database: db.clone(),
        mapping,
        mech_strains: mech_strains.clone(),
        mech_stresses,
        zeta_forces: vec![],
        iterations: 0,
        converged: true,
        minres_iterations: 0,
        eliminated_states: 0,
        equilibrium_residual: 0.0,
        loss: 0.0,
        n_quad: 0,
        n_snap: 0,
    };
    let (ddi_mech, ddi_mat) = ddi_r2(&pseudo_result, &p)?;

    let (ref_mech, _) = reference_stress(&mech_strains, formulation, &p);
    let (ref_mat, _) = reference_stress(&db.strains, formulation, &p);
    let pann_at_mech = pann_stress_at_strains(&model, &mech_strains, formulation);
    let pann_at_mat = pann_stress_at_strains(&model, &db.strains, formulation);
    let filter_pairs = |pred: &[Option<[f64; 3]>],
                        reference: &[Option<[f64; 3]>]|
     -> (Vec<[f64; 3]>, Vec<Option<[f64; 3]>>) {
        pred.iter()
            .zip(reference)
            .filter_map(|(p, r)| match (p, r) {
                (Some(p), Some(r)) => Some((*p, Some(*r))),
                _ => None,
            })
            .unzip()
    };
    let (pm, rm) = filter_pairs(&pann_at_mech, &ref_mech);
    let pann_mech = r2(&pm, &rm)?;
    let (pm, rm) = filter_pairs(&pann_at_mat, &ref_mat);
    let pann_mat = r2(&pm, &rm)?;

    let path_errors = stress_path_compare(
        &model,
        &p,
        &DeformationPath::ALL,
        (eval.lambda_min, eval.lambda_max),
        eval.path_samples,
    )?;

    std::fs::create_dir_all(out)?;
    let mut csv = String::from("scope,r2_pooled,r2_11,r2_22,r2_12,n\n");
    use std::fmt::Write;
    for (name, rep) in [
        ("ddi_mech", &ddi_mech),
        ("ddi_mat", &ddi_mat),
        ("pann_mech", &pann_mech),
        ("pann_mat", &pann_mat),
    ] {
        writeln!(
            csv,
            "{},{},{},{},{},{}",
            name,
            fmt_f64(rep.pooled),
            fmt_f64(rep.per_component[0]),
            fmt_f64(rep.per_component[1]),
            fmt_f64(rep.per_component[2]),
            rep.n
        )
        .unwrap();
    }
    std::fs::write(out.join("r2.csv"), csv)?;

    let mut csv = String::from("path,max_rel,mean_rel\n");
    for e in &path_errors {
        writeln!(
            csv,
            "{},{},{}",
            e.path.as_str(),
            fmt_f64(e.max_rel),
            fmt_f64(e.mean_rel)
        )
        .unwrap();
    }
    std::fs::write(out.join("paths.csv"), csv)?;

    Ok(EvalMetrics {
        ddi_mech,
        ddi_mat,
        pann_mech,
        pann_mat,
        path_max_rel: path_errors.iter().map(|e| (e.path, e.max_rel)).collect(),
    })
}

/// Executes all stages in order, resuming from existing outputs, and writes
/// the manifest. Partial outputs of a failing stage are left in place.
pub fn run_pipeline(cfg: &PipelineConfig, out: &Path) -> crate::Result<Manifest> {
    std::fs::create_dir_all(out)?;
    let resolved = cfg.to_resolved_text();
    let cfg_path = out.join("config.resolved.txt");
    if cfg_path.exists() {
        let existing = std::fs::read_to_string(&cfg_path)?;
        if existing != resolved {
            return Err(crate::Error::Config(format!(
                "output directory {} holds results of a different configuration; \
                 use a fresh directory",
                out.display()
            )));
        }
    } else {
        std::fs::write(&cfg_path, &resolved)?;
    }

    let raw_dir = out.join("raw");
    if !raw_dir.join("dataset.txt").exists() {
        stage_generate(cfg, &raw_dir)?;
    }

    let ddi_input_dir: PathBuf = match &cfg.noise {
        Some(noise) => {
            let noisy_dir = out.join("noisy");
            if !noisy_dir.join("dataset.txt").exists() {
                stage_noise(&raw_dir, &noisy_dir, noise, cfg.seed)?;
            }
            noisy_dir
        }
        None => raw_dir.clone(),
    };

    let ddi_dir = out.join("ddi");
    let summary = if ddi_dir.join("ddi_run.txt").exists() {
        DdiRunSummary::from_file(&ddi_dir.join("ddi_run.txt"))?
    } else {
        stage_ddi(&ddi_input_dir, &cfg.ddi, cfg.seed, &ddi_dir)?.1
    };

    let pann_dir = out.join("pann");
    let model_file = pann_dir.join("model.pann");
    let train_report: Option<TrainReport> = if model_file.exists() {
        None
    } else {
        let lambda_gr = cfg
            .pann
            .lambda_gr
            .unwrap_or(0.01 * summary.stiffness_estimate);
        Some(stage_train(
            &ddi_dir.join("database.txt"),
            &cfg.pann,
            lambda_gr,
            cfg.seed,
            &pann_dir,
        )?)
    };

    let metrics = stage_eval(
        &ddi_dir,
        &model_file,
        cfg.material,
        &cfg.eval,
        &out.join("eval"),
    )?;

    let mut manifest = Manifest::new(&resolved, cfg.seed);
    manifest.set_metric("ddi.r2_mech", metrics.ddi_mech.pooled);
    manifest.set_metric("ddi.r2_mat", metrics.ddi_mat.pooled);
    manifest.set_metric("pann.r2_mech", metrics.pann_mech.pooled);
    manifest.set_metric("pann.r2_mat", metrics.pann_mat.pooled);
    manifest.set_metric("ddi.iterations", summary.iterations as f64);
    manifest.set_metric("ddi.converged", if summary.converged { 1.0 } else { 0.0 });
    manifest.set_metric("ddi.equilibrium_residual", summary.equilibrium_residual);
    manifest.set_metric("ddi.pseudo_stiffness", summary.pseudo_stiffness);
    manifest.set_metric("ddi.stiffness_estimate", summary.stiffness_estimate);
    if let Some(report) = &train_report {
        manifest.set_metric("pann.test_r2", report.test_r2);
        manifest.set_metric("pann.calibration_mse", report.calibration_mse);
    } else if let Ok(text) = std::fs::read_to_string(pann_dir.join("train_report.txt")) {
        for line in text.lines() {
            if let Some(v) = line.strip_prefix("test_r2 ") {
                if let Some(v) = parse_f64(v) {
                    manifest.set_metric("pann.test_r2", v);
                }
            }
            if let Some(v) = line.strip_prefix("calibration_mse ") {
                if let Some(v) = parse_f64(v) {
                    manifest.set_metric("pann.calibration_mse", v);
                }
            }
        }
    }
    for (path, max_rel) in &metrics.path_max_rel {
        manifest.set_metric(&format!("path.max_rel.{}", path.as_str()), *max_rel);
    }
    manifest.add_tree(out)?;
    manifest.write(out)?;
    Ok(manifest)
}
