use nalgebra::Matrix3;

use crate::continuum::{neo_hooke, stress_transform, DefGrad, NeoHookeParams};
use crate::pann::PannModel;

/// Parameterized three-dimensional deformation families used to probe the
/// calibrated model away from the plane-stress training manifold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeformationPath {
    /// F = diag(lambda, 1, 1).
    Uniaxial,
    /// F = diag(lambda, lambda, 1).
    Equibiaxial,
    /// F = 1 + (lambda - 1) e1 x e2.
    SimpleShear,
    /// F = lambda 1.
    Volumetric,
}

impl DeformationPath {
    pub const ALL: [DeformationPath; 4] = [
        DeformationPath::Uniaxial,
        DeformationPath::Equibiaxial,
        DeformationPath::SimpleShear,
        DeformationPath::Volumetric,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            DeformationPath::Uniaxial => "uniaxial",
            DeformationPath::Equibiaxial => "equibiaxial",
            DeformationPath::SimpleShear => "simple-shear",
            DeformationPath::Volumetric => "volumetric",
        }
    }

    pub fn def_grad(&self, lambda: f64) -> crate::Result<DefGrad> {
        match self {
            DeformationPath::Uniaxial => DefGrad::diag(lambda, 1.0, 1.0),
            DeformationPath::Equibiaxial => DefGrad::diag(lambda, lambda, 1.0),
            DeformationPath::SimpleShear => DefGrad::new(Matrix3::new(
                1.0,
                lambda - 1.0,
                0.0,
                0.0,
                1.0,
                0.0,
                0.0,
                0.0,
                1.0,
            )),
            DeformationPath::Volumetric => DefGrad::diag(lambda, lambda, lambda),
        }
    }
}

/// First-Piola deviation of the model from the reference along one path,
/// normalized by the largest reference component over the path.
#[derive(Debug, Clone, Copy)]
pub struct PathError {
    pub path: DeformationPath,
    pub max_rel: f64,
    pub mean_rel: f64,
}

/// Compares model and reference first Piola-Kirchhoff tensors along the given
/// paths over `lambda` in [lo, hi] at `n_samples` points per path.
pub fn stress_path_compare(
    model: &PannModel,
    reference: &NeoHookeParams,
    paths: &[DeformationPath],
    lambda_range: (f64, f64),
    n_samples: usize,
) -> crate::Result<Vec<PathError>> {
    stress_path_compare_fn(
        |f| model.first_piola(f),
        reference,
        paths,
        lambda_range,
        n_samples,
    )
}

/// Same comparison for an arbitrary first-Piola response function.
pub fn stress_path_compare_fn(
    first_piola: impl Fn(&DefGrad) -> crate::Result<Matrix3<f64>>,
    reference: &NeoHookeParams,
    paths: &[DeformationPath],
    lambda_range: (f64, f64),
    n_samples: usize,
) -> crate::Result<Vec<PathError>> {
    if n_samples < 2 {
        return Err(crate::Error::Config("need at least two path samples".into()));
    }
    let (lo, hi) = lambda_range;
    if !(lo > 0.0 && hi > lo) {
        return Err(crate::Error::Config("bad stretch range".into()));
    }
    let mut out = Vec::with_capacity(paths.len());
    for &path in paths {
        let mut deviations = Vec::with_capacity(n_samples);
        let mut ref_scale = 0.0_f64;
        for k in 0..n_samples {
            let lambda = lo + (hi - lo) * k as f64 / (n_samples - 1) as f64;
            let f = path.def_grad(lambda)?;
            let p_model = first_piola(&f)?;
            let resp = neo_hooke(&f, reference);
            let p_ref = stress_transform(&resp.cauchy, &f).first_piola;
            let mut dev = 0.0_f64;
            for i in 0..3 {
                for j in 0..3 {
                    dev = dev.max((p_model[(i, j)] - p_ref[(i, j)]).abs());
                    ref_scale = ref_scale.max(p_ref[(i, j)].abs());
                }
            }
            deviations.push(dev);
        }
        if ref_scale == 0.0 {
            return Err(crate::Error::Domain(
                "reference stress vanishes along the whole path".into(),
            ));
        }
        let max_rel = deviations.iter().fold(0.0_f64, |m, &d| m.max(d)) / ref_scale;
        let mean_rel =
            deviations.iter().sum::<f64>() / deviations.len() as f64 / ref_scale;
        out.push(PathError {
            path,
            max_rel,
            mean_rel,
        });
    }
    Ok(out)
}
