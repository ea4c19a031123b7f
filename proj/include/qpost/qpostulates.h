#ifndef QPOSTULATES_H
#define QPOSTULATES_H

/* C interface to the qpost library. Every call returns a qp_status; on
 * failure qp_last_error() describes the most recent error on the calling
 * thread. Handles are opaque and owned by the caller, who releases them with
 * the matching *_destroy function. Strings handed out by the library are
 * released with qp_string_free. */

#include <stddef.h>
#include <stdint.h>

#if defined(QP_BUILDING_LIBRARY)
#define QP_API __attribute__((visibility("default")))
#else
#define QP_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qp_status {
    QP_OK = 0,
    QP_INVALID_ARGUMENT = 1,
    QP_CONFIG = 2,
    QP_NUMERIC = 3,
    QP_RANGE = 4,
    QP_NO_TRANSMISSION = 5,
    QP_INTERNAL = 6
} qp_status;

typedef struct qp_verify_config qp_verify_config;
typedef struct qp_report_list qp_report_list;
typedef struct qp_scenario qp_scenario;
typedef struct qp_trajectory qp_trajectory;
typedef struct qp_spectrum qp_spectrum;
typedef struct qp_diffraction qp_diffraction;

QP_API const char* qp_version(void);
QP_API const char* qp_last_error(void);
QP_API const char* qp_status_string(qp_status status);
QP_API void qp_string_free(char* s);

/* Verification suite. json may be NULL for the defaults. */
QP_API qp_status qp_verify_config_create(const char* json, qp_verify_config** out);
QP_API qp_status qp_verify_config_set_seed(qp_verify_config* config, uint64_t seed);
QP_API qp_status qp_verify_config_set_tolerance_scale(qp_verify_config* config, double scale);
QP_API qp_status qp_verify_config_to_json(const qp_verify_config* config, char** out);
QP_API void qp_verify_config_destroy(qp_verify_config* config);

typedef struct qp_report {
    const char* name; /* valid while the list lives */
    const char* tag;
    const char* details;
    double residual;
    double tolerance;
    int passed;
} qp_report;

QP_API qp_status qp_verify_run(const qp_verify_config* config, qp_report_list** out);
QP_API size_t qp_report_list_size(const qp_report_list* list);
QP_API qp_status qp_report_list_get(const qp_report_list* list, size_t index, qp_report* out);
QP_API int qp_report_list_all_passed(const qp_report_list* list);
QP_API void qp_report_list_destroy(qp_report_list* list);

/* Scenarios. json may be NULL for the default harmonic scenario. */
QP_API qp_status qp_scenario_create(const char* json, qp_scenario** out);
QP_API qp_status qp_scenario_set_seed(qp_scenario* scenario, uint64_t seed);
QP_API qp_status qp_scenario_to_json(const qp_scenario* scenario, char** out);
QP_API void qp_scenario_destroy(qp_scenario* scenario);

typedef struct qp_record {
    double t;
    double norm;
    double x_mean;
    double p_mean;
    double u_mean;
    double f_mean;
    double energy;
    double ehrenfest_velocity_residual; /* meaningful when has_ehrenfest */
    double ehrenfest_force_residual;
    int has_ehrenfest;
} qp_record;

QP_API qp_status qp_scenario_run(const qp_scenario* scenario, qp_trajectory** out);
QP_API size_t qp_trajectory_size(const qp_trajectory* trajectory);
QP_API qp_status qp_trajectory_record(const qp_trajectory* trajectory, size_t index, qp_record* out);
QP_API void qp_trajectory_destroy(qp_trajectory* trajectory);

typedef struct qp_level {
    size_t level;
    double energy;
    double analytic_energy; /* meaningful when has_analytic */
    int has_analytic;
} qp_level;

QP_API qp_status qp_scenario_spectrum(const qp_scenario* scenario, size_t levels, qp_spectrum** out);
QP_API size_t qp_spectrum_size(const qp_spectrum* spectrum);
QP_API qp_status qp_spectrum_level(const qp_spectrum* spectrum, size_t index, qp_level* out);
QP_API void qp_spectrum_destroy(qp_spectrum* spectrum);

typedef struct qp_diffraction_summary {
    double measured_fringe_spacing; /* NaN when unavailable */
    double fraunhofer_prediction;   /* NaN when unavailable */
    double relative_error;          /* NaN when unavailable */
    double wavelength;
    double screen_distance;
    double t_stop;
    size_t steps;
    size_t peak_count;
    double final_norm;
    double transmitted_fraction;
} qp_diffraction_summary;

QP_API qp_status qp_scenario_diffract(const qp_scenario* scenario, qp_diffraction** out);
QP_API size_t qp_diffraction_size(const qp_diffraction* diffraction);
QP_API qp_status qp_diffraction_sample(const qp_diffraction* diffraction, size_t index, double* position,
                                       double* intensity);
QP_API qp_status qp_diffraction_summary_get(const qp_diffraction* diffraction, qp_diffraction_summary* out);
QP_API size_t qp_diffraction_warning_count(const qp_diffraction* diffraction);
QP_API const char* qp_diffraction_warning(const qp_diffraction* diffraction, size_t index);
QP_API void qp_diffraction_destroy(qp_diffraction* diffraction);

#ifdef __cplusplus
}
#endif

#endif
