#ifndef TSSLAB_H
#define TSSLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Waveguide pair / ammonia reading selectors for [`TssPresetParams`].
 */
#define TSS_PAIR_EQUAL 0

#define TSS_PAIR_UNEQUAL 1

#define TSS_READING_DIRECT 0

#define TSS_READING_DOUBLED 1

typedef enum TssStatus {
  TSS_STATUS_OK = 0,
  TSS_STATUS_INVALID_ARGUMENT = 1,
  TSS_STATUS_NULL_POINTER = 2,
  TSS_STATUS_CONVERGENCE = 3,
  TSS_STATUS_PANIC = 4,
} TssStatus;

/**
 * Harmonically driven two-level system.
 */
typedef struct TssDriveSystem TssDriveSystem;

/**
 * Time-independent two-level system.
 */
typedef struct TssStaticSystem TssStaticSystem;

/**
 * Preset parameters; start from `tss_preset_params_default`.
 */
typedef struct TssPresetParams {
  double b;
  double b_z;
  double b_x;
  double g;
  double delta_c_frac;
  double omega0;
  double e0;
  uint32_t pair;
  uint32_t reading;
} TssPresetParams;

typedef struct TssComplex {
  double re;
  double im;
} TssComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread ("" after a success).
 * The pointer stays valid until the next call on the same thread.
 */
const char *tss_last_error_message(void);

const char *tss_version(void);

double tss_to_microelectronvolts(double omega);

struct TssPresetParams tss_preset_params_default(void);

/**
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum TssStatus tss_static_new(double omega0,
                              double omega11,
                              double omega_d_mag,
                              double phi_d,
                              struct TssStaticSystem **out);

/**
 * Static presets; the waveguide preset is returned as its equivalent
 * static system (units 1/mm).
 *
 * # Safety
 * `name` must be a NUL-terminated string; `params` may be null for
 * defaults; `out` must be writable.
 */
enum TssStatus tss_static_preset(const char *name,
                                 const struct TssPresetParams *params,
                                 struct TssStaticSystem **out);

/**
 * # Safety
 * `sys` must come from this library and not have been freed; null is ignored.
 */
void tss_static_free(struct TssStaticSystem *sys);

/**
 * Definite energies (level_p ≥ level_n), rad/s.
 *
 * # Safety
 * All pointers must be valid.
 */
enum TssStatus tss_static_energies(const struct TssStaticSystem *sys,
                                   double *level_p,
                                   double *level_n);

/**
 * Amplitudes at time t from a normalized two-component launch state.
 *
 * # Safety
 * `c0` must point to 2 readable values and `out` to 2 writable ones.
 */
enum TssStatus tss_static_solve(const struct TssStaticSystem *sys,
                                const struct TssComplex *c0,
                                double t,
                                struct TssComplex *out);

/**
 * Average energy of a launch state. `route`: 0 weighted, 1 bracket,
 * 2 density (canonical), 3 density (eigenbasis).
 *
 * # Safety
 * `c0` must point to 2 readable values; `out` must be writable.
 */
enum TssStatus tss_static_average_energy(const struct TssStaticSystem *sys,
                                         const struct TssComplex *c0,
                                         uint32_t route,
                                         double *out);

/**
 * # Safety
 * `out` must be writable.
 */
enum TssStatus tss_drive_new(double omega0,
                             double omega_a,
                             struct TssComplex omega_d,
                             double omega_c,
                             struct TssDriveSystem **out);

/**
 * # Safety
 * As for `tss_static_preset`.
 */
enum TssStatus tss_drive_preset(const char *name,
                                const struct TssPresetParams *params,
                                struct TssDriveSystem **out);

/**
 * # Safety
 * `sys` must come from this library and not have been freed; null is ignored.
 */
void tss_drive_free(struct TssDriveSystem *sys);

/**
 * Generalized Rabi frequency of the rotating-frame system, rad/s.
 *
 * # Safety
 * Pointers must be valid.
 */
enum TssStatus tss_drive_split(const struct TssDriveSystem *sys, double *out);

/**
 * Back-rotated RWA amplitudes at time t.
 *
 * # Safety
 * `c0` must point to 2 readable values and `out` to 2 writable ones.
 */
enum TssStatus tss_drive_solve(const struct TssDriveSystem *sys,
                               const struct TssComplex *c0,
                               double t,
                               struct TssComplex *out);

/**
 * Rotating-frame eigenstate P (`which` = 0) or N (`which` = 1).
 *
 * # Safety
 * `out` must point to 2 writable values.
 */
enum TssStatus tss_drive_eigenstate(const struct TssDriveSystem *sys,
                                    uint32_t which,
                                    struct TssComplex *out);

/**
 * Quasi-energies in the order P low, P high, N low, N high (rad/s).
 *
 * # Safety
 * `out` must point to 4 writable values.
 */
enum TssStatus tss_drive_quartet(const struct TssDriveSystem *sys, double *out);

/**
 * Mollow line positions: center, red, blue (rad/s).
 *
 * # Safety
 * `out` must point to 3 writable values.
 */
enum TssStatus tss_drive_mollow(const struct TssDriveSystem *sys, double *out);

/**
 * Probabilities of the (C1 ± C2)/√2 superpositions at time t.
 *
 * # Safety
 * `c0` must point to 2 readable values; outputs must be writable.
 */
enum TssStatus tss_drive_px(const struct TssDriveSystem *sys,
                            const struct TssComplex *c0,
                            double t,
                            double *p_plus,
                            double *p_minus);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TSSLAB_H */
