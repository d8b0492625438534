//! Quantitative evaluation: ground-truth stress oracle, coefficients of
//! determination, stiffness estimation, deformation-path comparisons and
//! sweep tables.

mod paths;
mod sweep;

pub use paths::{stress_path_compare, stress_path_compare_fn, DeformationPath, PathError};
pub use sweep::{run_sweep, sweep_to_csv, SweepRow, SweepSpec, SweptParameter, SweptValueResult};

use crate::continuum::{NeoHookeParams, SymTensor2};
use crate::ddi::{Formulation, SQRT2};

/// Ground-truth stresses evaluated at given strain states.
///
/// For the updated Lagrangian pair the left Cauchy-Green tensor is
/// reconstructed as b = (1 - 2e)^-1 and the Cauchy stress returned; for the
/// total Lagrangian pairs C = 2E + 1 and the second Piola-Kirchhoff stress is
/// returned. Entries whose reconstructed tensor is not positive definite are
/// reported as `None` and counted.
pub fn reference_stress(
    strains: &[[f64; 4]],
    formulation: Formulation,
    p: &NeoHookeParams,
) -> (Vec<Option<[f64; 3]>>, usize) {
    let mut excluded = 0;
    let out = strains
        .iter()
        .map(|e| {
            let plain = [e[0], e[1], e[2], e[3] / SQRT2];
            let stress = match formulation {
                Formulation::UpdatedLagrangian => {
                    let one_minus_2e = SymTensor2::new([
                        1.0 - 2.0 * plain[0],
                        1.0 - 2.0 * plain[1],
                        1.0 - 2.0 * plain[2],
                        -2.0 * plain[3],
                        0.0,
                        0.0,
                    ]);
                    if !one_minus_2e.is_positive_definite() {
                        None
                    } else {
                        one_minus_2e.inverse().and_then(|b| {
                            if b.is_positive_definite() {
                                let s = p.cauchy_from_b(&b);
                                Some([s.get(0, 0), s.get(1, 1), SQRT2 * s.get(0, 1)])
                            } else {
                                None
                            }
                        })
                    }
                }
                Formulation::TotalLagrangian | Formulation::AdaptedTotalLagrangian => {
                    let c = SymTensor2::new([
                        1.0 + 2.0 * plain[0],
                        1.0 + 2.0 * plain[1],
                        1.0 + 2.0 * plain[2],
                        2.0 * plain[3],
                        0.0,
                        0.0,
                    ]);
                    if c.is_positive_definite() {
                        let t = p.second_piola_from_c(&c);
                        Some([t.get(0, 0), t.get(1, 1), SQRT2 * t.get(0, 1)])
                    } else {
                        None
                    }
                }
            };
            if stress.is_none() {
                excluded += 1;
            }
            stress
        })
        .collect();
    (out, excluded)
}

/// Coefficient of determination of predicted against reference stresses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct R2Report {
    /// Pooled over the in-plane components (the headline value).
    pub pooled: f64,
    /// Per component (11, 22, 12).
    pub per_component: [f64; 3],
    pub n: usize,
}

/// 1 - SS_res / SS_tot with the total sum taken around per-component means.
/// Predictions and references must align; `None` reference entries are
/// skipped in both.
pub fn r2(
    predicted: &[[f64; 3]],
    reference: &[Option<[f64; 3]>],
) -> crate::Result<R2Report> {
    if predicted.len() != reference.len() {
        return Err(crate::Error::Config(
            "prediction/reference length mismatch".into(),
        ));
    }
    let pairs: Vec<(&[f64; 3], &[f64; 3])> = predicted
        .iter()
        .zip(reference)
        .filter_map(|(p, r)| r.as_ref().map(|r| (p, r)))
        .collect();
    let n = pairs.len();
    if n < 2 {
        return Err(crate::Error::Config(
            "coefficient of determination needs at least two entries".into(),
        ));
    }
    let mut mean = [0.0; 3];
    for (_, r) in &pairs {
        for c in 0..3 {
            mean[c] += r[c];
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let mut ss_res = [0.0; 3];
    let mut ss_tot = [0.0; 3];
    for (p, r) in &pairs {
        for c in 0..3 {
            ss_res[c] += (p[c] - r[c]).powi(2);
            ss_tot[c] += (r[c] - mean[c]).powi(2);
        }
    }
    let pooled_tot: f64 = ss_tot.iter().sum();
    if pooled_tot <= 0.0 {
        return Err(crate::Error::Config(
            "constant reference makes the coefficient of determination undefined".into(),
        ));
    }
    let pooled = 1.0 - ss_res.iter().sum::<f64>() / pooled_tot;
    let per_component = std::array::from_fn(|c| {
        if ss_tot[c] > 0.0 {
            1.0 - ss_res[c] / ss_tot[c]
        } else {
            f64::NAN
        }
    });
    Ok(R2Report {
        pooled,
        per_component,
        n,
    })
}

/// Scores an identification run against the reference model: the mechanical
/// states and the database entries each get a coefficient of determination,
/// with ground-truth stresses evaluated at the identified (possibly noisy)
/// strains. Runs with more than 0.1 percent non-positive-definite strain
/// reconstructions are declared invalid.
pub fn ddi_r2(
    result: &crate::ddi::DdiResult,
    p: &NeoHookeParams,
) -> crate::Result<(R2Report, R2Report)> {
    let formulation = result.database.formulation;
    let (ref_mech, excl_mech) = reference_stress(&result.mech_strains, formulation, p);
    let (ref_mat, excl_mat) = reference_stress(&result.database.strains, formulation, p);
    let n_total = result.mech_strains.len() + result.database.len();
    if (excl_mech + excl_mat) as f64 > 0.001 * n_total as f64 {
        return Err(crate::Error::Domain(format!(
            "{} of {} states had non-positive-definite strain reconstructions",
            excl_mech + excl_mat,
            n_total
        )));
    }
    let mech = r2(&result.mech_stresses, &ref_mech)?;
    let mat = r2(&result.database.stresses, &ref_mat)?;
    Ok((mech, mat))
}

/// Stiffness estimate in the sense of one-dimensional linear elasticity:
/// C = (F / A0) (l0 / dl), all inputs from the first snapshot.
pub fn estimate_stiffness(force: f64, area0: f64, length0: f64, elongation: f64) -> crate::Result<f64> {
    if area0 <= 0.0 || length0 <= 0.0 {
        return Err(crate::Error::Domain("geometry must be positive".into()));
    }
    if elongation == 0.0 {
        return Err(crate::Error::Domain(
            "zero elongation in the first snapshot; cannot estimate stiffness".into(),
        ));
    }
    Ok((force / area0) * (length0 / elongation))
}

/// Stiffness estimate from the first snapshot of a raw dataset, taking the
/// reference bounding box as the specimen dimensions and the mean vertical
/// displacement gap between the top and bottom node rows as the elongation.
pub fn estimate_stiffness_from_dataset(raw: &crate::dataset::RawDataset) -> crate::Result<f64> {
    let snap = raw
        .snapshots
        .first()
        .ok_or_else(|| crate::Error::Config("dataset has no snapshots".into()))?;
    let (lo, hi) = raw.mesh.bounding_box();
    let tol = 1e-9 * (hi[1] - lo[1]).max(1.0);
    let mut top = Vec::new();
    let mut bottom = Vec::new();
    for (n, p) in raw.mesh.nodes().iter().enumerate() {
        if (p[1] - hi[1]).abs() < tol {
            top.push(n);
        } else if (p[1] - lo[1]).abs() < tol {
            bottom.push(n);
        }
    }
    if top.is_empty() || bottom.is_empty() {
        return Err(crate::Error::Mesh("could not locate top/bottom node rows".into()));
    }
    let mean_u2 = |set: &[usize]| -> f64 {
        set.iter().map(|&n| snap.displacements[n][1]).sum::<f64>() / set.len() as f64
    };
    let elongation = mean_u2(&top) - mean_u2(&bottom);
    let area0 = (hi[0] - lo[0]) * raw.mesh.h0();
    estimate_stiffness(snap.global_force, area0, hi[1] - lo[1], elongation)
}
