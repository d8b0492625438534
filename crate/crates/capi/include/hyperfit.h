#ifndef HYPERFIT_H
#define HYPERFIT_H

/* Generated by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Status code returned by every fallible entry point.
 */
typedef enum HfStatus {
  HF_STATUS_OK = 0,
  HF_STATUS_NULL_ARGUMENT = 1,
  HF_STATUS_INVALID_UTF8 = 2,
  HF_STATUS_IO = 3,
  HF_STATUS_CONFIG = 4,
  HF_STATUS_DOMAIN = 5,
  HF_STATUS_SOLVER = 6,
  HF_STATUS_PANIC = 7,
} HfStatus;

/*
 A loaded measurement dataset (opaque).
 */
typedef struct HfDataset HfDataset;

/*
 Result of one identification run (opaque).
 */
typedef struct HfDdiResult HfDdiResult;

/*
 A calibrated network potential (opaque).
 */
typedef struct HfModel HfModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the most recent error on this thread. The pointer stays valid
 until the next failing call on the same thread; do not free it.
 */
const char *hf_last_error_message(void);

/*
 Loads a dataset directory (mesh.txt, dataset.txt, snapshot files).

 # Safety
 `dir` must be a NUL-terminated string and `out` a valid pointer.
 */
enum HfStatus hf_dataset_load(const char *dir, struct HfDataset **out);

/*
 # Safety
 `dataset` must come from [`hf_dataset_load`] and not have been freed.
 */
void hf_dataset_free(struct HfDataset *dataset);

/*
 # Safety
 `dataset` must be a live handle.
 */
uintptr_t hf_dataset_num_snapshots(const struct HfDataset *dataset);

/*
 # Safety
 `dataset` must be a live handle.
 */
uintptr_t hf_dataset_num_elements(const struct HfDataset *dataset);

/*
 Runs the identification. `formulation` is "ul", "tl" or "tl-adapted";
 `pseudo_stiffness_mpa <= 0` selects ten times the estimated stiffness.

 # Safety
 `dataset` must be a live handle, `formulation` NUL-terminated (or null
 for the default), `out` valid.
 */
enum HfStatus hf_ddi_run(const struct HfDataset *dataset,
                         const char *formulation,
                         double nstar_ratio,
                         double pseudo_stiffness_mpa,
                         uint64_t seed,
                         struct HfDdiResult **out);

/*
 # Safety
 `result` must come from [`hf_ddi_run`] and not have been freed.
 */
void hf_ddi_result_free(struct HfDdiResult *result);

/*
 # Safety
 `result` must be a live handle.
 */
uintptr_t hf_ddi_num_states(const struct HfDdiResult *result);

/*
 Copies one database entry: strain components (11, 22, 33, 12), stress
 components (11, 22, 12) and the accumulated quadrature weight.

 # Safety
 `result` must be a live handle; `strain_out` must address four writable
 doubles, `stress_out` three, `weight_out` one.
 */
enum HfStatus hf_ddi_state(const struct HfDdiResult *result,
                           uintptr_t z,
                           double *strain_out,
                           double *stress_out,
                           double *weight_out);

/*
 Writes the identified database in the text table format.

 # Safety
 `result` live, `path` NUL-terminated.
 */
enum HfStatus hf_ddi_save_database(const struct HfDdiResult *result, const char *path);

/*
 Pooled coefficient of determination of the database against the
 neo-Hookean reference with the given parameters.

 # Safety
 `result` live, `r2_out` valid.
 */
enum HfStatus hf_ddi_r2_material(const struct HfDdiResult *result,
                                 double youngs_mpa,
                                 double poisson,
                                 double *r2_out);

/*
 Calibrates a width-`width` network on the identified database.

 # Safety
 `result` live, `out` valid.
 */
enum HfStatus hf_model_train(const struct HfDdiResult *result,
                             uint32_t width,
                             double lambda_gr,
                             uint64_t seed,
                             struct HfModel **out);

/*
 Loads a model file (pann-v1 text format).

 # Safety
 `path` NUL-terminated, `out` valid.
 */
enum HfStatus hf_model_load(const char *path, struct HfModel **out);

/*
 # Safety
 `model` live, `path` NUL-terminated.
 */
enum HfStatus hf_model_save(const struct HfModel *model, const char *path);

/*
 # Safety
 `model` must come from a train/load call and not have been freed.
 */
void hf_model_free(struct HfModel *model);

/*
 Potential (MPa) at a row-major deformation gradient.

 # Safety
 `model` live; `f` addresses nine doubles; `psi_out` valid.
 */
enum HfStatus hf_model_energy(const struct HfModel *model, const double *f, double *psi_out);

/*
 First Piola-Kirchhoff stress (row-major, MPa) at a deformation gradient.

 # Safety
 `model` live; `f` addresses nine doubles; `p_out` addresses nine
 writable doubles.
 */
enum HfStatus hf_model_first_piola(const struct HfModel *model, const double *f, double *p_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HYPERFIT_H */
