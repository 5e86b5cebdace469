#ifndef PINCHISAC_H
#define PINCHISAC_H

#include <stdbool.h>
#include <stddef.h>

typedef enum PinchStatus {
  PINCH_STATUS_OK = 0,
  PINCH_STATUS_NULL_POINTER = 1,
  PINCH_STATUS_INVALID_ARGUMENT = 2,
  PINCH_STATUS_CONFIG_ERROR = 3,
  PINCH_STATUS_INFEASIBLE = 4,
  PINCH_STATUS_NUMERICAL_FAILURE = 5,
  PINCH_STATUS_IO = 6,
  PINCH_STATUS_PANIC = 7,
} PinchStatus;

typedef enum PinchAlgorithm {
  PINCH_ALGORITHM_PINCHING = 0,
  PINCH_ALGORITHM_EXHAUSTIVE = 1,
  PINCH_ALGORITHM_CONVENTIONAL = 2,
  PINCH_ALGORITHM_USER_CENTRIC = 3,
  PINCH_ALGORITHM_TARGET_ORIENTED = 4,
  PINCH_ALGORITHM_MIDPOINT = 5,
} PinchAlgorithm;

/**
 * Outcome of one optimizer or benchmark run.
 */
typedef struct PinchResult PinchResult;

/**
 * Scenario parameters plus one user/target pair.
 */
typedef struct PinchScenario PinchScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *pinch_last_error_message(void);

/**
 * Scenario with the default parameters, user at (4, 8) and target at (-4, 12).
 *
 * # Safety
 * `out` must be a writable pointer.
 */
enum PinchStatus pinch_scenario_default(struct PinchScenario **out);

/**
 * Parse a scenario from TOML text.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a writable pointer.
 */
enum PinchStatus pinch_scenario_from_toml(const char *text, struct PinchScenario **out);

/**
 * Load a scenario file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a writable pointer.
 */
enum PinchStatus pinch_scenario_load(const char *path, struct PinchScenario **out);

/**
 * # Safety
 * `scenario` must come from this library and not be used afterwards.
 */
void pinch_scenario_free(struct PinchScenario *scenario);

/**
 * Place the user and the target (metres).
 *
 * # Safety
 * `scenario` must be a live handle.
 */
enum PinchStatus pinch_scenario_set_entities(struct PinchScenario *scenario,
                                             double user_x,
                                             double user_y,
                                             double target_x,
                                             double target_y);

/**
 * # Safety
 * `scenario` must be a live handle.
 */
enum PinchStatus pinch_scenario_set_radar_snr_requirement(struct PinchScenario *scenario,
                                                          double value);

/**
 * # Safety
 * `scenario` must be a live handle.
 */
enum PinchStatus pinch_scenario_set_p_max(struct PinchScenario *scenario, double watts);

/**
 * Run one algorithm on the scenario's user/target pair. An unmet radar
 * requirement returns [`PinchStatus::Infeasible`] and leaves `*out` null.
 *
 * # Safety
 * `scenario` must be a live handle and `out` a writable pointer.
 */
enum PinchStatus pinch_run(const struct PinchScenario *scenario,
                           enum PinchAlgorithm algorithm,
                           struct PinchResult **out);

/**
 * # Safety
 * `result` must come from this library and not be used afterwards.
 */
void pinch_result_free(struct PinchResult *result);

/**
 * Achievable rate in bit/s/Hz; NaN for a null handle.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
double pinch_result_rate(const struct PinchResult *result);

/**
 * # Safety
 * `result` must be null or a live handle.
 */
double pinch_result_radar_snr(const struct PinchResult *result);

/**
 * # Safety
 * `result` must be null or a live handle.
 */
size_t pinch_result_sca_iterations(const struct PinchResult *result);

/**
 * Number of transmit antennas in the result.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
size_t pinch_result_num_positions(const struct PinchResult *result);

/**
 * Copy the antenna positions into `buf`, which must hold at least
 * `pinch_result_num_positions` values.
 *
 * # Safety
 * `result` must be a live handle and `buf` valid for `len` writes.
 */
enum PinchStatus pinch_result_positions(const struct PinchResult *result, double *buf, size_t len);

/**
 * Neyman-Pearson detection probability for a radar SNR and false-alarm
 * probability; NaN outside the valid domain.
 */
double pinch_detection_probability(double radar_snr, double false_alarm_probability);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PINCHISAC_H */
