use std::fmt::Write as _;

use super::{ddi_r2, R2Report};
use crate::continuum::NeoHookeParams;
use crate::dataset::RawDataset;
use crate::ddi::{run_ddi, DdiConfig, DdiInput, Formulation, StateCount};
use crate::noise::{apply_noise, NoiseConfig};
use crate::textio::fmt_f64;

/// Parameter varied across a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweptParameter {
    /// Material-state count over total point count.
    NstarRatio,
    /// Pseudo-stiffness scale (MPa).
    PseudoStiffness,
    /// Displacement noise factor.
    Eta,
}

impl SweptParameter {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweptParameter::NstarRatio => "nstar-ratio",
            SweptParameter::PseudoStiffness => "pseudo-stiffness",
            SweptParameter::Eta => "eta",
        }
    }

    pub fn parse(s: &str) -> crate::Result<Self> {
        match s {
            "nstar-ratio" => Ok(SweptParameter::NstarRatio),
            "pseudo-stiffness" => Ok(SweptParameter::PseudoStiffness),
            "eta" => Ok(SweptParameter::Eta),
            other => Err(crate::Error::Config(format!(
                "unknown sweep parameter '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub parameter: SweptParameter,
    pub values: Vec<f64>,
}

/// Result of one identification run inside a sweep.
#[derive(Debug, Clone)]
pub enum SweptValueResult {
    Ok {
        mech: R2Report,
        mat: R2Report,
        converged: bool,
    },
    Failed(String),
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub value: f64,
    pub formulation: Formulation,
    pub result: SweptValueResult,
}

/// Runs one identification per (value, formulation) and scores it against the
/// reference model. Individual failures are recorded and the sweep continues.
pub fn run_sweep(
    raw: &RawDataset,
    base: &DdiConfig,
    formulations: &[Formulation],
    spec: &SweepSpec,
    noise_base: Option<&NoiseConfig>,
    material: &NeoHookeParams,
) -> crate::Result<Vec<SweepRow>> {
    if spec.values.is_empty() {
        return Err(crate::Error::Config("sweep needs at least one value".into()));
    }
    let mut rows = Vec::new();
    for &value in &spec.values {
        // The eta sweep perturbs a copy of the dataset; the others reuse it.
        let input = match spec.parameter {
            SweptParameter::Eta => {
                let mut noisy = raw.clone();
                let mut cfg = noise_base
                    .ok_or_else(|| {
                        crate::Error::Config("eta sweep needs a base noise config".into())
                    })?
                    .clone();
                cfg.eta = value;
                apply_noise(&mut noisy, &cfg)?;
                DdiInput::from_raw(&noisy)?
            }
            _ => DdiInput::from_raw(raw)?,
        };
        for &formulation in formulations {
            let mut cfg = base.clone();
            cfg.formulation = formulation;
            match spec.parameter {
                SweptParameter::NstarRatio => cfg.n_star = StateCount::Ratio(value),
                SweptParameter::PseudoStiffness => cfg.pseudo_stiffness = value,
                SweptParameter::Eta => {}
            }
            let result = match run_ddi(&input, &cfg)
                .and_then(|res| ddi_r2(&res, material).map(|r2| (res, r2)))
            {
                Ok((res, (mech, mat))) => SweptValueResult::Ok {
                    mech,
                    mat,
                    converged: res.converged,
                },
                Err(e) => SweptValueResult::Failed(e.to_string()),
            };
            rows.push(SweepRow {
                value,
                formulation,
                result,
            });
        }
    }
    Ok(rows)
}

/// CSV table of sweep results: one row per (value, formulation).
pub fn sweep_to_csv(parameter: SweptParameter, rows: &[SweepRow]) -> String {
    let mut s = String::from("parameter,value,formulation,r2_mech,r2_mat,converged,error\n");
    for row in rows {
        match &row.result {
            SweptValueResult::Ok {
                mech,
                mat,
                converged,
            } => {
                writeln!(
                    s,
                    "{},{},{},{},{},{},",
                    parameter.as_str(),
                    fmt_f64(row.value),
                    row.formulation.as_str(),
                    fmt_f64(mech.pooled),
                    fmt_f64(mat.pooled),
                    converged
                )
                .unwrap();
            }
            SweptValueResult::Failed(msg) => {
                writeln!(
                    s,
                    "{},{},{},,,,\"{}\"",
                    parameter.as_str(),
                    fmt_f64(row.value),
                    row.formulation.as_str(),
                    msg.replace('"', "'")
                )
                .unwrap();
            }
        }
    }
    s
}
