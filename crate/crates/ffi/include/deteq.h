/* C interface to the deteq deterministic-equivalent solvers. */

#ifndef DETEQ_H
#define DETEQ_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum DeteqStatus {
  DETEQ_STATUS_OK = 0,
  /**
   * A pointer argument was null or a size was out of range.
   */
  DETEQ_STATUS_INVALID_ARGUMENT = 1,
  /**
   * The configuration failed validation.
   */
  DETEQ_STATUS_INVALID_CONFIG = 2,
  /**
   * A fixed-point iteration hit its cap.
   */
  DETEQ_STATUS_NON_CONVERGENCE = 3,
  /**
   * A matrix expected to be (semi)definite was not.
   */
  DETEQ_STATUS_NOT_POSITIVE_DEFINITE = 4,
  /**
   * Root bracketing failed.
   */
  DETEQ_STATUS_NO_ROOT = 5,
  /**
   * T and Q of some transmitter do not share an eigenbasis.
   */
  DETEQ_STATUS_NOT_CODIAGONALIZABLE = 6,
  /**
   * An unexpected internal failure.
   */
  DETEQ_STATUS_INTERNAL_ERROR = 7,
} DeteqStatus;

/**
 * Opaque double-scattering MAC configuration builder.
 */
typedef struct DeteqMacConfig DeteqMacConfig;

/**
 * Opaque relay-chain configuration.
 */
typedef struct DeteqRelayConfig DeteqRelayConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (truncated to
 * `cap - 1` bytes, NUL-terminated) and returns the full message length.
 * Passing a null buffer just queries the length.
 */
uintptr_t deteq_last_error(char *buf, uintptr_t cap);

/**
 * Creates a K-hop relay configuration. `dims` has `hops + 1` antenna
 * counts (source first), `alphas` and `rhos` have `hops` entries.
 */
enum DeteqStatus deteq_relay_config_new(uintptr_t hops,
                                        const uintptr_t *dims,
                                        const double *alphas,
                                        const double *rhos,
                                        struct DeteqRelayConfig **out);

void deteq_relay_config_free(struct DeteqRelayConfig *cfg);

/**
 * Writes the asymptotic power normalizations `betabar_0..betabar_{K-1}`.
 */
enum DeteqStatus deteq_relay_asymptotic_betas(const struct DeteqRelayConfig *cfg, double *out);

/**
 * Mutual-information deterministic equivalent after `hop` (1-based).
 */
enum DeteqStatus deteq_relay_mutual_info(const struct DeteqRelayConfig *cfg,
                                         uintptr_t hop,
                                         double *out);

enum DeteqStatus deteq_mac_config_new(uintptr_t n_rx, double rho, struct DeteqMacConfig **out);

void deteq_mac_config_free(struct DeteqMacConfig *cfg);

enum DeteqStatus deteq_mac_set_rho(struct DeteqMacConfig *cfg, double rho);

/**
 * Appends a transmitter. Matrix arguments are row-major interleaved
 * complex doubles; `r` is `n_rx x n_rx`, `t` and `q` are
 * `antennas x antennas`, and `s_diag` is a real vector of `scatterers`
 * entries. Null pointers select identities (uniform unit power for `q`).
 */
enum DeteqStatus deteq_mac_add_transmitter(struct DeteqMacConfig *cfg,
                                           uintptr_t scatterers,
                                           uintptr_t antennas,
                                           const double *r,
                                           const double *s_diag,
                                           const double *t,
                                           const double *q);

uintptr_t deteq_mac_transmitter_count(const struct DeteqMacConfig *cfg);

/**
 * Solves the fundamental equations; `gbar`, `g`, `delta` receive one value
 * per transmitter.
 */
enum DeteqStatus deteq_mac_solve_fundamental(const struct DeteqMacConfig *cfg,
                                             double *gbar,
                                             double *g,
                                             double *delta);

enum DeteqStatus deteq_mac_mutual_info(const struct DeteqMacConfig *cfg, double *out);

enum DeteqStatus deteq_mac_sum_rate(const struct DeteqMacConfig *cfg, double *out);

/**
 * Iterative water-filling. `budgets` has one entry per transmitter;
 * `loadings` receives the per-mode powers flattened in transmitter order
 * (`sum_k antennas_k` doubles) and `water_levels` one level per
 * transmitter.
 */
enum DeteqStatus deteq_mac_waterfill(const struct DeteqMacConfig *cfg,
                                     const double *budgets,
                                     double eps,
                                     double *loadings,
                                     double *water_levels);

/**
 * Closed-form Rayleigh-product equivalents: `gbar`, mutual information,
 * and per-stream MMSE SINR.
 */
enum DeteqStatus deteq_rayleigh_product(uintptr_t n_antennas,
                                        uintptr_t scatterers,
                                        uintptr_t users,
                                        double rho,
                                        double *out_gbar,
                                        double *out_mutual_info,
                                        double *out_sinr);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DETEQ_H */
