//! Command-line interface: virtual-experiment generation, noise injection,
//! identification, network calibration, evaluation, sweeps and the full
//! pipeline.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hyperfit::continuum::NeoHookeParams;
use hyperfit::dataset::RawDataset;
use hyperfit::ddi::{Formulation, StateCount};
use hyperfit::eval::{run_sweep, sweep_to_csv, SweepSpec, SweptParameter};
use hyperfit::noise::NoiseConfig;
use hyperfit::pann::StressMetric;
use hyperfit::pipeline::{
    run_pipeline, stage_ddi, stage_eval, stage_generate, stage_noise, stage_train, PipelineConfig,
};

#[derive(Parser)]
#[command(
    name = "hyperfit",
    version,
    about = "Stress-strain database identification and convex network calibration \
             from full-field measurement data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Global seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Thread-count cap, recorded for reproducibility (numerics run
    /// single-threaded). Also honors HYPERFIT_THREADS.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Args)]
struct ConfigArg {
    /// Pipeline configuration file; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the virtual experiment and export a raw dataset.
    Generate {
        #[command(flatten)]
        config: ConfigArg,
        /// External mesh file overriding the configured geometry.
        #[arg(long)]
        mesh: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Add measurement noise to a dataset.
    Noise {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Displacement noise factor.
        #[arg(long, default_value_t = 0.0)]
        eta: f64,
        /// Relative force-noise half-width.
        #[arg(long, default_value_t = 0.0)]
        omega: f64,
        /// Geometry dimension scaling the noise (mm).
        #[arg(long, default_value_t = 100.0)]
        delta_x: f64,
        /// Generator grid size (power of two).
        #[arg(long, default_value_t = 1024)]
        grid: usize,
        /// Correlation decay length; defaults to 1/grid.
        #[arg(long)]
        ell: Option<f64>,
    },
    /// Identify a material database from a dataset.
    Ddi {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "ul")]
        formulation: String,
        /// Material states relative to (points x snapshots).
        #[arg(long)]
        nstar_ratio: Option<f64>,
        /// Absolute material-state count (overrides the ratio).
        #[arg(long)]
        nstar: Option<usize>,
        /// Pseudo-stiffness scale in MPa; defaults to ten times the
        /// stiffness estimated from the first snapshot.
        #[arg(long)]
        pseudo_stiffness: Option<f64>,
        #[arg(long, default_value_t = 60)]
        max_iters: usize,
        #[arg(long, default_value_t = 1e-9)]
        linear_tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Calibrate the network potential on a material database.
    Train {
        #[arg(long)]
        db: PathBuf,
        /// Conjugate pair of the loss; defaults to the database formulation.
        #[arg(long)]
        metric: Option<String>,
        #[arg(long, default_value_t = 8)]
        width: usize,
        /// Growth modulus in MPa.
        #[arg(long, default_value_t = 0.01)]
        lambda_gr: f64,
        #[arg(long, default_value_t = 5)]
        restarts: usize,
        #[arg(long, default_value_t = 2000)]
        max_iters: usize,
        /// Output model file (.pann); the training report lands next to it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score an identification and a trained model against the reference.
    Eval {
        /// Identification output directory (database.txt, mech_states.txt).
        #[arg(long)]
        ddi: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// Reference Young's modulus (MPa).
        #[arg(long, default_value_t = 1.0)]
        youngs: f64,
        /// Reference Poisson's ratio.
        #[arg(long, default_value_t = 0.3)]
        poisson: f64,
        #[arg(long, default_value_t = 0.8)]
        lambda_min: f64,
        #[arg(long, default_value_t = 1.4)]
        lambda_max: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one identification per swept value and tabulate the scores.
    Sweep {
        #[command(flatten)]
        config: ConfigArg,
        /// Swept parameter: nstar-ratio, pseudo-stiffness or eta.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long)]
        values: String,
        /// Comma-separated formulations to run (default: all three).
        #[arg(long, default_value = "ul,tl,tl-adapted")]
        formulations: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every stage in order with resume and write the manifest.
    Pipeline {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_config(arg: &ConfigArg, seed: Option<u64>) -> hyperfit::Result<PipelineConfig> {
    let mut cfg = match &arg.config {
        Some(path) => PipelineConfig::from_file(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn resolve_out(out: Option<PathBuf>) -> hyperfit::Result<PathBuf> {
    out.or_else(|| std::env::var_os("HYPERFIT_OUT").map(PathBuf::from))
        .ok_or_else(|| hyperfit::Error::Config("give --out or set HYPERFIT_OUT".into()))
}

fn run(cli: Cli) -> hyperfit::Result<()> {
    if let Some(threads) = cli.threads.or_else(|| {
        std::env::var("HYPERFIT_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    }) {
        // Numerics are single-threaded by design (bit-identical reruns); the
        // cap is recorded so runs stay comparable across machines.
        eprintln!("note: thread cap {threads} recorded; numerics run single-threaded");
    }
    match cli.command {
        Command::Generate { config, mesh, out } => {
            let mut cfg = load_config(&config, cli.seed)?;
            if let Some(mesh) = mesh {
                cfg.geometry = hyperfit::pipeline::GeometrySpec::MeshFile(mesh);
            }
            let out = resolve_out(out)?;
            let raw = stage_generate(&cfg, &out)?;
            println!(
                "generated {} snapshots on {} elements -> {}",
                raw.snapshots.len(),
                raw.mesh.num_elements(),
                out.display()
            );
        }
        Command::Noise {
            input,
            out,
            eta,
            omega,
            delta_x,
            grid,
            ell,
        } => {
            let out = resolve_out(out)?;
            let settings = hyperfit::pipeline::NoiseSettings {
                eta,
                omega,
                delta_x,
                grid,
                ell,
            };
            NoiseConfig {
                omega,
                eta,
                delta_x,
                grid_n: grid,
                ell: ell.unwrap_or(1.0 / grid as f64),
                seed: 0,
            }
            .validate()?;
            let dataset = stage_noise(&input, &out, &settings, cli.seed.unwrap_or(0))?;
            println!(
                "wrote noisy dataset ({} snapshots, eta = {eta}, omega = {omega}) -> {}",
                dataset.snapshots.len(),
                out.display()
            );
        }
        Command::Ddi {
            input,
            formulation,
            nstar_ratio,
            nstar,
            pseudo_stiffness,
            max_iters,
            linear_tol,
            out,
        } => {
            let out = resolve_out(out)?;
            let n_star = match (nstar, nstar_ratio) {
                (Some(n), _) => StateCount::Count(n),
                (None, Some(r)) => StateCount::Ratio(r),
                (None, None) => StateCount::Ratio(0.01),
            };
            let settings = hyperfit::pipeline::DdiSettings {
                formulation: Formulation::parse(&formulation)?,
                n_star,
                pseudo_stiffness,
                max_iters,
                linear_tol,
                stress_reinit: true,
            };
            let (result, summary) = stage_ddi(&input, &settings, cli.seed.unwrap_or(0), &out)?;
            println!(
                "identified {} states in {} iterations (converged: {}, equilibrium residual {:.2e}) -> {}",
                result.database.len(),
                summary.iterations,
                summary.converged,
                summary.equilibrium_residual,
                out.display()
            );
        }
        Command::Train {
            db,
            metric,
            width,
            lambda_gr,
            restarts,
            max_iters,
            out,
        } => {
            let out = resolve_out(out)?;
            let metric = metric.as_deref().map(StressMetric::parse).transpose()?;
            let settings = hyperfit::pipeline::PannSettings {
                width,
                lambda_gr: Some(lambda_gr),
                restarts,
                max_iters,
                metric,
                calibration_fraction: 0.7,
            };
            let (dir, file_name) = if out.extension().is_some() {
                (
                    out.parent()
                        .filter(|p| !p.as_os_str().is_empty())
                        .map(|p| p.to_path_buf())
                        .unwrap_or_else(|| PathBuf::from(".")),
                    Some(out.file_name().unwrap().to_owned()),
                )
            } else {
                (out.clone(), None)
            };
            let report = stage_train(&db, &settings, lambda_gr, cli.seed.unwrap_or(0), &dir)?;
            if let Some(name) = file_name {
                if name != "model.pann" {
                    std::fs::rename(dir.join("model.pann"), dir.join(&name))?;
                }
            }
            println!(
                "trained width-{width} model: calibration MSE {:.3e}, test R2 {:.5}",
                report.calibration_mse, report.test_r2
            );
        }
        Command::Eval {
            ddi,
            model,
            youngs,
            poisson,
            lambda_min,
            lambda_max,
            out,
        } => {
            let out = resolve_out(out)?;
            let eval = hyperfit::pipeline::EvalSettings {
                lambda_min,
                lambda_max,
                path_samples: 25,
            };
            let metrics = stage_eval(&ddi, &model, (youngs, poisson), &eval, &out)?;
            println!(
                "R2: identification mech {:.5} / mat {:.5}; model mech {:.5} / mat {:.5} -> {}",
                metrics.ddi_mech.pooled,
                metrics.ddi_mat.pooled,
                metrics.pann_mech.pooled,
                metrics.pann_mat.pooled,
                out.display()
            );
        }
        Command::Sweep {
            config,
            param,
            values,
            formulations,
            out,
        } => {
            let cfg = load_config(&config, cli.seed)?;
            let out = resolve_out(out)?;
            let parameter = SweptParameter::parse(&param)?;
            let values: Vec<f64> = values
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| hyperfit::Error::Config(format!("bad sweep value '{t}'")))
                })
                .collect::<hyperfit::Result<_>>()?;
            let formulations: Vec<Formulation> = formulations
                .split(',')
                .map(|t| Formulation::parse(t.trim()))
                .collect::<hyperfit::Result<_>>()?;

            std::fs::create_dir_all(&out)?;
            let raw_dir = out.join("raw");
            let raw = if raw_dir.join("dataset.txt").exists() {
                RawDataset::read_dir(&raw_dir)?
            } else {
                stage_generate(&cfg, &raw_dir)?
            };
            let material = NeoHookeParams::new(cfg.material.0, cfg.material.1)?;
            let mut base = hyperfit::ddi::DdiConfig::new(
                cfg.ddi.formulation,
                cfg.ddi.pseudo_stiffness.unwrap_or_else(|| {
                    hyperfit::eval::estimate_stiffness_from_dataset(&raw)
                        .map(|e| 10.0 * e)
                        .unwrap_or(1.0)
                }),
                cfg.seed,
            );
            base.n_star = cfg.ddi.n_star;
            base.max_iters = cfg.ddi.max_iters;
            base.linear_rel_tol = cfg.ddi.linear_tol;
            let noise_base = cfg.noise.as_ref().map(|n| NoiseConfig {
                omega: n.omega,
                eta: n.eta,
                delta_x: n.delta_x,
                grid_n: n.grid,
                ell: n.ell.unwrap_or(1.0 / n.grid as f64),
                seed: cfg.seed,
            });
            let spec = SweepSpec { parameter, values };
            let rows = run_sweep(
                &raw,
                &base,
                &formulations,
                &spec,
                noise_base.as_ref(),
                &material,
            )?;
            let csv = sweep_to_csv(parameter, &rows);
            let csv_path = out.join(format!("sweep_{}.csv", parameter.as_str()));
            std::fs::write(&csv_path, &csv)?;
            print!("{csv}");
            println!("wrote {}", csv_path.display());
        }
        Command::Pipeline { config, out } => {
            let cfg = load_config(&config, cli.seed)?;
            let out = resolve_out(out)?;
            let manifest = run_pipeline(&cfg, &out)?;
            for (name, value) in &manifest.metrics {
                println!("{name} = {value}");
            }
            println!("manifest -> {}", out.join("manifest.txt").display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
