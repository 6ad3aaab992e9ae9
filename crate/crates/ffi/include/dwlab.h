/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef DWLAB_H
#define DWLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DwlabStatus {
  DWLAB_STATUS_OK = 0,
  DWLAB_STATUS_NULL_POINTER = 1,
  DWLAB_STATUS_STABILITY = 2,
  DWLAB_STATUS_DOMAIN = 3,
  DWLAB_STATUS_DEGENERATE = 4,
  DWLAB_STATUS_SINGULAR = 5,
  DWLAB_STATUS_IO = 6,
  DWLAB_STATUS_PARSE = 7,
  DWLAB_STATUS_BUFFER_TOO_SMALL = 8,
  DWLAB_STATUS_PANIC = 9,
} DwlabStatus;

typedef enum DwlabNoiseFamily {
  DWLAB_NOISE_FAMILY_GAUSSIAN = 0,
  // `shape` is the tail exponent β in (0, 1).
  DWLAB_NOISE_FAMILY_SYMMETRIC_WEIBULL = 1,
  // `shape` is the degrees of freedom ν > 2.
  DWLAB_NOISE_FAMILY_STUDENT_T = 2,
} DwlabNoiseFamily;

typedef enum DwlabRate {
  DWLAB_RATE_THETA = 0,
  DWLAB_RATE_RHO = 1,
  DWLAB_RATE_DW = 2,
} DwlabRate;

// Opaque statistics of one trajectory.
typedef struct DwlabLedger DwlabLedger;

// Opaque simulated or imported trajectory.
typedef struct DwlabTrajectory DwlabTrajectory;

typedef struct DwlabParams {
  double theta;
  double rho;
  double sigma2;
  double x0;
  double eps0;
} DwlabParams;

typedef struct DwlabNoise {
  enum DwlabNoiseFamily family;
  double shape;
} DwlabNoise;

typedef struct DwlabLedgerValues {
  size_t n;
  double l_n;
  double m_n;
  double n_n;
  double q_n;
  double s_n;
  double s_nm1;
  double p_n;
  double j_n;
  double j_nm1;
  double theta_hat;
  double rho_hat;
  double dw;
  double f_n;
  double t_n;
  double r_theta;
  double t4_n;
  double gamma4_n;
  double eps_hat0;
} DwlabLedgerValues;

// Matrices are row-major.
typedef struct DwlabSummary {
  double theta_star;
  double rho_star;
  double d_star;
  double ell;
  double ell1;
  double ell2;
  double sigma2_theta;
  double sigma2_rho;
  double sigma2_d;
  double gamma[4];
  double lambda[4];
  double a_limit[4];
  double t_limit;
  double j_limit;
  double det_gamma;
  // det(Γ) from the closed form with (1 + ρ²) in the denominator.
  double det_gamma_printed;
} DwlabSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Length in bytes of the last error message on this thread, including the
// terminating NUL; 0 when there is none.
size_t dwlab_last_error_length(void);

// Copies the last error message into `buf` as a NUL-terminated string.
enum DwlabStatus dwlab_last_error_message(char *buf, size_t len);

// Library version as a static NUL-terminated string.
const char *dwlab_version(void);

// Checks |θ| < 1, |ρ| < 1, σ² > 0 and finite initial values.
enum DwlabStatus dwlab_validate_params(const struct DwlabParams *params);

// Simulates `n` steps with innovations from `noise` (variance `params.sigma2`)
// using the generator seeded with `seed`.
enum DwlabStatus dwlab_simulate(const struct DwlabParams *params,
                                const struct DwlabNoise *noise,
                                size_t n,
                                uint64_t seed,
                                struct DwlabTrajectory **out_traj);

// Builds a trajectory from `n` given innovations `v[0..n]`.
enum DwlabStatus dwlab_trajectory_from_innovations(const struct DwlabParams *params,
                                                   const double *v,
                                                   size_t n,
                                                   struct DwlabTrajectory **out_traj);

// Draws `n` innovations into `buf`.
enum DwlabStatus dwlab_sample_noise(const struct DwlabNoise *noise,
                                    double sigma2,
                                    size_t n,
                                    uint64_t seed,
                                    double *buf);

// Number of steps n; the path has n + 1 points X₀..Xₙ.
enum DwlabStatus dwlab_trajectory_len(const struct DwlabTrajectory *traj, size_t *out_n);

// Copies X₀..Xₙ into `buf`, which must hold n + 1 values.
enum DwlabStatus dwlab_trajectory_x(const struct DwlabTrajectory *traj, double *buf, size_t len);

// Copies ε₀..εₙ into `buf`, which must hold n + 1 values.
enum DwlabStatus dwlab_trajectory_eps(const struct DwlabTrajectory *traj, double *buf, size_t len);

void dwlab_trajectory_free(struct DwlabTrajectory *traj);

// Computes the estimators and functionals of `traj` under `params`.
enum DwlabStatus dwlab_ledger_compute(const struct DwlabTrajectory *traj,
                                      const struct DwlabParams *params,
                                      struct DwlabLedger **out_ledger);

enum DwlabStatus dwlab_ledger_values(const struct DwlabLedger *ledger,
                                     struct DwlabLedgerValues *out_values);

void dwlab_ledger_free(struct DwlabLedger *ledger);

// Limits, asymptotic variances and the matrices Γ, Λ, A.
enum DwlabStatus dwlab_summary(const struct DwlabParams *params, struct DwlabSummary *out_summary);

// Moderate-deviation rate I(x) of θ̂ₙ, ρ̂ₙ or D̂ₙ.
enum DwlabStatus dwlab_rate(const struct DwlabParams *params,
                            enum DwlabRate which,
                            double x,
                            double *out_rate);

// Joint rate K(v) = ½ vᵀΓ⁻¹v; fails with `Singular` when θ = −ρ.
enum DwlabStatus dwlab_rate_joint(const struct DwlabParams *params,
                                  double v0,
                                  double v1,
                                  double *out_rate);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DWLAB_H */
