//! C ABI for the hyperfit toolkit: opaque handles, integer status codes and
//! a thread-local error message. The generated header lands in
//! `include/hyperfit.h`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use hyperfit::continuum::{DefGrad, Matrix3, NeoHookeParams};
use hyperfit::dataset::RawDataset;
use hyperfit::ddi::{run_ddi, DdiConfig, DdiInput, DdiResult, Formulation, StateCount};
use hyperfit::pann::{train, Dataset, PannModel, TrainConfig};

/// Status code returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HfStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Config = 4,
    Domain = 5,
    Solver = 6,
    Panic = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|e| {
        *e.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &hyperfit::Error) -> HfStatus {
    match err {
        hyperfit::Error::Io(_) | hyperfit::Error::Parse { .. } => HfStatus::Io,
        hyperfit::Error::Config(_) => HfStatus::Config,
        hyperfit::Error::Domain(_) | hyperfit::Error::Mesh(_) => HfStatus::Domain,
        hyperfit::Error::Solver(_) => HfStatus::Solver,
    }
}

/// Message of the most recent error on this thread. The pointer stays valid
/// until the next failing call on the same thread; do not free it.
#[no_mangle]
pub extern "C" fn hf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

fn guard<T>(f: impl FnOnce() -> Result<T, HfStatus>) -> Result<T, HfStatus> {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(r) => r,
        Err(_) => {
            set_error("internal panic");
            Err(HfStatus::Panic)
        }
    }
}

unsafe fn path_arg<'a>(ptr: *const c_char) -> Result<&'a Path, HfStatus> {
    if ptr.is_null() {
        set_error("null path argument");
        return Err(HfStatus::NullArgument);
    }
    match CStr::from_ptr(ptr).to_str() {
        Ok(s) => Ok(Path::new(s)),
        Err(_) => {
            set_error("path is not valid UTF-8");
            Err(HfStatus::InvalidUtf8)
        }
    }
}

/// A loaded measurement dataset (opaque).
pub struct HfDataset {
    raw: RawDataset,
}

/// Result of one identification run (opaque).
pub struct HfDdiResult {
    result: DdiResult,
}

/// A calibrated network potential (opaque).
pub struct HfModel {
    model: PannModel,
}

/// Loads a dataset directory (mesh.txt, dataset.txt, snapshot files).
///
/// # Safety
/// `dir` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hf_dataset_load(
    dir: *const c_char,
    out: *mut *mut HfDataset,
) -> HfStatus {
    if out.is_null() {
        set_error("null output pointer");
        return HfStatus::NullArgument;
    }
    match guard(|| {
        let path = path_arg(dir)?;
        RawDataset::read_dir(path)
            .map(|raw| Box::into_raw(Box::new(HfDataset { raw })))
            .map_err(|e| {
                set_error(&e.to_string());
                status_of(&e)
            })
    }) {
        Ok(handle) => {
            out.write(handle);
            HfStatus::Ok
        }
        Err(s) => s,
    }
}

/// # Safety
/// `dataset` must come from [`hf_dataset_load`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn hf_dataset_free(dataset: *mut HfDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

/// # Safety
/// `dataset` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn hf_dataset_num_snapshots(dataset: *const HfDataset) -> usize {
    if dataset.is_null() {
        return 0;
    }
    (*dataset).raw.snapshots.len()
}

/// # Safety
/// `dataset` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn hf_dataset_num_elements(dataset: *const HfDataset) -> usize {
    if dataset.is_null() {
        return 0;
    }
    (*dataset).raw.mesh.num_elements()
}

/// Runs the identification. `formulation` is "ul", "tl" or "tl-adapted";
/// `pseudo_stiffness_mpa <= 0` selects ten times the estimated stiffness.
///
/// # Safety
/// `dataset` must be a live handle, `formulation` NUL-terminated (or null
/// for the default), `out` valid.
#[no_mangle]
pub unsafe extern "C" fn hf_ddi_run(
    dataset: *const HfDataset,
    formulation: *const c_char,
    nstar_ratio: f64,
    pseudo_stiffness_mpa: f64,
    seed: u64,
    out: *mut *mut HfDdiResult,
) -> HfStatus {
    if dataset.is_null() || out.is_null() {
        set_error("null argument");
        return HfStatus::NullArgument;
    }
    let raw = &(*dataset).raw;
    match guard(|| {
        let formulation = if formulation.is_null() {
            Formulation::UpdatedLagrangian
        } else {
            let s = CStr::from_ptr(formulation).to_str().map_err(|_| {
                set_error("formulation is not valid UTF-8");
                HfStatus::InvalidUtf8
            })?;
            Formulation::parse(s).map_err(|e| {
                set_error(&e.to_string());
                HfStatus::Config
            })?
        };
        let run = || -> hyperfit::Result<DdiResult> {
            let input = DdiInput::from_raw(raw)?;
            let stiffness = if pseudo_stiffness_mpa > 0.0 {
                pseudo_stiffness_mpa
            } else {
                10.0 * hyperfit::eval::estimate_stiffness_from_dataset(raw)?
            };
            let mut cfg = DdiConfig::new(formulation, stiffness, seed);
            cfg.n_star = StateCount::Ratio(nstar_ratio);
            run_ddi(&input, &cfg)
        };
        run()
            .map(|result| Box::into_raw(Box::new(HfDdiResult { result })))
            .map_err(|e| {
                set_error(&e.to_string());
                status_of(&e)
            })
    }) {
        Ok(handle) => {
            out.write(handle);
            HfStatus::Ok
        }
        Err(s) => s,
    }
}

/// # Safety
/// `result` must come from [`hf_ddi_run`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn hf_ddi_result_free(result: *mut HfDdiResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn hf_ddi_num_states(result: *const HfDdiResult) -> usize {
    if result.is_null() {
        return 0;
    }
    (*result).result.database.len()
}

/// Copies one database entry: strain components (11, 22, 33, 12), stress
/// components (11, 22, 12) and the accumulated quadrature weight.
///
/// # Safety
/// `result` must be a live handle; `strain_out` must address four writable
/// doubles, `stress_out` three, `weight_out` one.
#[no_mangle]
pub unsafe extern "C" fn hf_ddi_state(
    result: *const HfDdiResult,
    z: usize,
    strain_out: *mut f64,
    stress_out: *mut f64,
    weight_out: *mut f64,
) -> HfStatus {
    if result.is_null() || strain_out.is_null() || stress_out.is_null() || weight_out.is_null() {
        set_error("null argument");
        return HfStatus::NullArgument;
    }
    let db = &(*result).result.database;
    if z >= db.len() {
        set_error("state index out of range");
        return HfStatus::Config;
    }
    let e = db.strain_components(z);
    let s = db.stress_components(z);
    std::ptr::copy_nonoverlapping(e.as_ptr(), strain_out, 4);
    std::ptr::copy_nonoverlapping(s.as_ptr(), stress_out, 3);
    weight_out.write(db.weights[z]);
    HfStatus::Ok
}

/// Writes the identified database in the text table format.
///
/// # Safety
/// `result` live, `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn hf_ddi_save_database(
    result: *const HfDdiResult,
    path: *const c_char,
) -> HfStatus {
    if result.is_null() {
        set_error("null argument");
        return HfStatus::NullArgument;
    }
    match guard(|| {
        let path = path_arg(path)?;
        (*result).result.database.write_file(path).map_err(|e| {
            set_error(&e.to_string());
            status_of(&e)
        })
    }) {
        Ok(()) => HfStatus::Ok,
        Err(s) => s,
    }
}

/// Pooled coefficient of determination of the database against the
/// neo-Hookean reference with the given parameters.
///
/// # Safety
/// `result` live, `r2_out` valid.
#[no_mangle]
pub unsafe extern "C" fn hf_ddi_r2_material(
    result: *const HfDdiResult,
    youngs_mpa: f64,
    poisson: f64,
    r2_out: *mut f64,
) -> HfStatus {
    if result.is_null() || r2_out.is_null() {
        set_error("null argument");
        return HfStatus::NullArgument;
    }
    match guard(|| {
        let compute = || -> hyperfit::Result<f64> {
            let p = NeoHookeParams::new(youngs_mpa, poisson)?;
            let (_, mat) = hyperfit::eval::ddi_r2(&(*result).result, &p)?;
            Ok(mat.pooled)
        };
        compute().map_err(|e| {
            set_error(&e.to_string());
            status_of(&e)
        })
    }) {
        Ok(v) => {
            r2_out.write(v);
            HfStatus::Ok
        }
        Err(s) => s,
    }
}

/// Calibrates a width-`width` network on the identified database.
///
/// # Safety
/// `result` live, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn hf_model_train(
    result: *const HfDdiResult,
    width: u32,
    lambda_gr: f64,
    seed: u64,
    out: *mut *mut HfModel,
) -> HfStatus {
    if result.is_null() || out.is_null() {
        set_error("null argument");
        return HfStatus::NullArgument;
    }
    match guard(|| {
        let run = || -> hyperfit::Result<PannModel> {
            let mut dataset = Dataset::from_database(&(*result).result.database)?;
            dataset.shuffle_split(0.7, seed)?;
            let report = train(
                &dataset,
                &TrainConfig {
                    width: width as usize,
                    lambda_gr,
                    restarts: 5,
                    max_iters: 2000,
                    seed,
                },
            )?;
            Ok(report.model)
        };
        run()
            .map(|model| Box::into_raw(Box::new(HfModel { model })))
            .map_err(|e| {
                set_error(&e.to_string());
                status_of(&e)
            })
    }) {
        Ok(handle) => {
            out.write(handle);
            HfStatus::Ok
        }
        Err(s) => s,
    }
}

/// Loads a model file (pann-v1 text format).
///
/// # Safety
/// `path` NUL-terminated, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn hf_model_load(path: *const c_char, out: *mut *mut HfModel) -> HfStatus {
    if out.is_null() {
        set_error("null output pointer");
        return HfStatus::NullArgument;
    }
    match guard(|| {
        let path = path_arg(path)?;
        PannModel::read_file(path)
            .map(|model| Box::into_raw(Box::new(HfModel { model })))
            .map_err(|e| {
                set_error(&e.to_string());
                status_of(&e)
            })
    }) {
        Ok(handle) => {
            out.write(handle);
            HfStatus::Ok
        }
        Err(s) => s,
    }
}

/// # Safety
/// `model` live, `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn hf_model_save(model: *const HfModel, path: *const c_char) -> HfStatus {
    if model.is_null() {
        set_error("null argument");
        return HfStatus::NullArgument;
    }
    match guard(|| {
        let path = path_arg(path)?;
        (*model).model.write_file(path).map_err(|e| {
            set_error(&e.to_string());
            status_of(&e)
        })
    }) {
        Ok(()) => HfStatus::Ok,
        Err(s) => s,
    }
}

/// # Safety
/// `model` must come from a train/load call and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn hf_model_free(model: *mut HfModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

fn def_grad_from_row_major(f: &[f64; 9]) -> hyperfit::Result<DefGrad> {
    DefGrad::new(Matrix3::new(
        f[0], f[1], f[2], f[3], f[4], f[5], f[6], f[7], f[8],
    ))
}

/// Potential (MPa) at a row-major deformation gradient.
///
/// # Safety
/// `model` live; `f` addresses nine doubles; `psi_out` valid.
#[no_mangle]
pub unsafe extern "C" fn hf_model_energy(
    model: *const HfModel,
    f: *const f64,
    psi_out: *mut f64,
) -> HfStatus {
    if model.is_null() || f.is_null() || psi_out.is_null() {
        set_error("null argument");
        return HfStatus::NullArgument;
    }
    let mut fm = [0.0; 9];
    std::ptr::copy_nonoverlapping(f, fm.as_mut_ptr(), 9);
    match guard(|| {
        let compute = || -> hyperfit::Result<f64> {
            let f = def_grad_from_row_major(&fm)?;
            (*model).model.energy_at(&f)
        };
        compute().map_err(|e| {
            set_error(&e.to_string());
            status_of(&e)
        })
    }) {
        Ok(v) => {
            psi_out.write(v);
            HfStatus::Ok
        }
        Err(s) => s,
    }
}

/// First Piola-Kirchhoff stress (row-major, MPa) at a deformation gradient.
///
/// # Safety
/// `model` live; `f` addresses nine doubles; `p_out` addresses nine
/// writable doubles.
#[no_mangle]
pub unsafe extern "C" fn hf_model_first_piola(
    model: *const HfModel,
    f: *const f64,
    p_out: *mut f64,
) -> HfStatus {
    if model.is_null() || f.is_null() || p_out.is_null() {
        set_error("null argument");
        return HfStatus::NullArgument;
    }
    let mut fm = [0.0; 9];
    std::ptr::copy_nonoverlapping(f, fm.as_mut_ptr(), 9);
    match guard(|| {
        let compute = || -> hyperfit::Result<[f64; 9]> {
            let f = def_grad_from_row_major(&fm)?;
            let p = (*model).model.first_piola(&f)?;
            let mut out = [0.0; 9];
            for i in 0..3 {
                for j in 0..3 {
                    out[3 * i + j] = p[(i, j)];
                }
            }
            Ok(out)
        };
        compute().map_err(|e| {
            set_error(&e.to_string());
            status_of(&e)
        })
    }) {
        Ok(values) => {
            std::ptr::copy_nonoverlapping(values.as_ptr(), p_out, 9);
            HfStatus::Ok
        }
        Err(s) => s,
    }
}
