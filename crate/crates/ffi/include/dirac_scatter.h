/* C interface of the dirac-scatter library.
 *
 * Maintained by hand; `header_matches_exported_surface` in src/lib.rs
 * keeps it in sync with the exported symbols.
 */

#ifndef DIRAC_SCATTER_H
#define DIRAC_SCATTER_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes returned by every entry point. */
typedef enum DsStatus {
    DS_OK = 0,
    DS_NULL_ARGUMENT = 1,
    DS_INVALID_ARGUMENT = 2,
    DS_SPECTRAL_GAP = 3,
    DS_NON_CONVERGENCE = 4,
    DS_IO_ERROR = 5,
    DS_INTERNAL_ERROR = 6
} DsStatus;

/* Opaque handle owning one scattering problem (system parameters plus
 * short-range perturbation). */
typedef struct DsProblem DsProblem;

/* Scattering data at one energy. */
typedef struct DsScatteringData {
    double lambda;
    double c11_re;
    double c11_im;
    double c21_re;
    double c21_im;
    double s11_re;
    double s11_im;
    double rho;
    double rho1;
    double conjugacy_defect;
} DsScatteringData;

/* Stationary/dynamical comparison at one energy. */
typedef struct DsErgodicPoint {
    double lambda;
    double s_st_re;
    double s_st_im;
    double s_dyn_re;
    double s_dyn_im;
    double residual;
    double limit_value_error;
} DsErgodicPoint;

/* Library version as a static string. */
const char *ds_version(void);

/* Create a problem with q(r) = q_amplitude * exp(-q_rate * r);
 * q_amplitude = 0 means no perturbation. Returns NULL on invalid
 * parameters (needs mass > 0, angular != 0, |angular| > |coulomb|). */
DsProblem *ds_problem_new(double mass,
                          double angular,
                          double coulomb_strength,
                          double q_amplitude,
                          double q_rate);

/* Destroy a problem handle; NULL is tolerated. */
void ds_problem_free(DsProblem *problem);

/* Free spectral density rho1(sigma) for the given mass. */
DsStatus ds_rho1(double sigma, double mass, double *out);

/* Stationary deviation factor V0(r) at one energy (reference point 1). */
DsStatus ds_deviation_factor(const DsProblem *problem,
                             double lambda,
                             double r,
                             double *out_re,
                             double *out_im);

/* Solve the stationary scattering problem at one energy. */
DsStatus ds_scattering_compute(const DsProblem *problem,
                               double lambda,
                               DsScatteringData *out);

/* Run the dynamical pipeline at one energy and compare the stationary
 * and dynamical scattering entries. Expensive (tens of seconds). */
DsStatus ds_ergodic_compute(const DsProblem *problem,
                            double lambda,
                            DsErgodicPoint *out);

/* Execute a JSON config file end to end, writing the report into its
 * output directory. threads <= 0 selects the machine parallelism.
 * Returns DS_OK only when the scenario's gates pass. */
DsStatus ds_run_config(const char *config_path, int32_t threads);

#ifdef __cplusplus
}
#endif

#endif /* DIRAC_SCATTER_H */
