#include "qpost/qpostulates.h"

#include "qpost/config_io.hpp"
#include "qpost/error.hpp"
#include "qpost/scenarios.hpp"
#include "qpost/verify.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <new>
#include <string>

struct qp_verify_config {
    qpost::VerifyConfig config;
};

struct qp_report_list {
    std::vector<qpost::CheckReport> reports;
};

struct qp_scenario {
    qpost::ScenarioConfig config;
};

struct qp_trajectory {
    qpost::Trajectory trajectory;
    qpost::EhrenfestResiduals ehrenfest;
};

struct qp_spectrum {
    std::vector<qpost::SpectrumRow> rows;
};

struct qp_diffraction {
    qpost::DiffractionResult result;
};

namespace {

thread_local std::string g_last_error;

qp_status to_status(qpost::ErrorCode code)
{
    switch (code) {
    case qpost::ErrorCode::InvalidArgument: return QP_INVALID_ARGUMENT;
    case qpost::ErrorCode::Config: return QP_CONFIG;
    case qpost::ErrorCode::Numeric: return QP_NUMERIC;
    case qpost::ErrorCode::OutOfRange: return QP_RANGE;
    case qpost::ErrorCode::NoTransmission: return QP_NO_TRANSMISSION;
    }
    return QP_INTERNAL;
}

// Runs body, translating exceptions into status codes and the thread's last
// error message.
template <class F>
qp_status guarded(F&& body)
{
    try {
        body();
        g_last_error.clear();
        return QP_OK;
    } catch (const qpost::Error& e) {
        g_last_error = e.what();
        return to_status(e.code());
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return QP_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return QP_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return QP_INTERNAL;
    }
}

qp_status null_argument(const char* what)
{
    g_last_error = std::string(what) + " must not be NULL";
    return QP_INVALID_ARGUMENT;
}

char* duplicate(const std::string& s)
{
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

double or_nan(const std::optional<double>& v) { return v ? *v : std::numeric_limits<double>::quiet_NaN(); }

} // namespace

extern "C" {

const char* qp_version(void) { return "0.1.0"; }

const char* qp_last_error(void) { return g_last_error.c_str(); }

const char* qp_status_string(qp_status status)
{
    switch (status) {
    case QP_OK: return "ok";
    case QP_INVALID_ARGUMENT: return "invalid argument";
    case QP_CONFIG: return "configuration error";
    case QP_NUMERIC: return "numerical error";
    case QP_RANGE: return "out of range";
    case QP_NO_TRANSMISSION: return "no transmission";
    case QP_INTERNAL: return "internal error";
    }
    return "unknown status";
}

void qp_string_free(char* s) { std::free(s); }

qp_status qp_verify_config_create(const char* json, qp_verify_config** out)
{
    if (!out) return null_argument("out");
    *out = nullptr;
    return guarded([&] {
        auto h = std::make_unique<qp_verify_config>();
        if (json) h->config = qpost::verify_config_from_json(json);
        *out = h.release();
    });
}

qp_status qp_verify_config_set_seed(qp_verify_config* config, uint64_t seed)
{
    if (!config) return null_argument("config");
    config->config.seed = seed;
    return QP_OK;
}

qp_status qp_verify_config_set_tolerance_scale(qp_verify_config* config, double scale)
{
    if (!config) return null_argument("config");
    return guarded([&] {
        auto c = config->config;
        c.tolerance_scale = scale;
        qpost::validate(c);
        config->config = c;
    });
}

qp_status qp_verify_config_to_json(const qp_verify_config* config, char** out)
{
    if (!config) return null_argument("config");
    if (!out) return null_argument("out");
    return guarded([&] { *out = duplicate(qpost::verify_config_to_json(config->config)); });
}

void qp_verify_config_destroy(qp_verify_config* config) { delete config; }

qp_status qp_verify_run(const qp_verify_config* config, qp_report_list** out)
{
    if (!config) return null_argument("config");
    if (!out) return null_argument("out");
    *out = nullptr;
    return guarded([&] {
        auto h = std::make_unique<qp_report_list>();
        h->reports = qpost::run_all(config->config);
        *out = h.release();
    });
}

size_t qp_report_list_size(const qp_report_list* list) { return list ? list->reports.size() : 0; }

qp_status qp_report_list_get(const qp_report_list* list, size_t index, qp_report* out)
{
    if (!list) return null_argument("list");
    if (!out) return null_argument("out");
    if (index >= list->reports.size()) {
        g_last_error = "report index out of range";
        return QP_RANGE;
    }
    const auto& r = list->reports[index];
    *out = qp_report{r.name.c_str(), r.tag.c_str(), r.details.c_str(), r.residual, r.tolerance, r.passed ? 1 : 0};
    return QP_OK;
}

int qp_report_list_all_passed(const qp_report_list* list)
{
    if (!list || list->reports.empty()) return 0;
    for (const auto& r : list->reports)
        if (!r.passed) return 0;
    return 1;
}

void qp_report_list_destroy(qp_report_list* list) { delete list; }

qp_status qp_scenario_create(const char* json, qp_scenario** out)
{
    if (!out) return null_argument("out");
    *out = nullptr;
    return guarded([&] {
        auto h = std::make_unique<qp_scenario>();
        if (json) h->config = qpost::scenario_from_json(json);
        *out = h.release();
    });
}

qp_status qp_scenario_set_seed(qp_scenario* scenario, uint64_t seed)
{
    if (!scenario) return null_argument("scenario");
    scenario->config.seed = seed;
    return QP_OK;
}

qp_status qp_scenario_to_json(const qp_scenario* scenario, char** out)
{
    if (!scenario) return null_argument("scenario");
    if (!out) return null_argument("out");
    return guarded([&] { *out = duplicate(qpost::scenario_to_json(scenario->config)); });
}

void qp_scenario_destroy(qp_scenario* scenario) { delete scenario; }

qp_status qp_scenario_run(const qp_scenario* scenario, qp_trajectory** out)
{
    if (!scenario) return null_argument("scenario");
    if (!out) return null_argument("out");
    *out = nullptr;
    return guarded([&] {
        auto h = std::unique_ptr<qp_trajectory>(new qp_trajectory{qpost::run(scenario->config, false), {}});
        if (h->trajectory.records.size() >= 3) h->ehrenfest = qpost::ehrenfest_residuals(h->trajectory);
        *out = h.release();
    });
}

size_t qp_trajectory_size(const qp_trajectory* trajectory)
{
    return trajectory ? trajectory->trajectory.records.size() : 0;
}

qp_status qp_trajectory_record(const qp_trajectory* trajectory, size_t index, qp_record* out)
{
    if (!trajectory) return null_argument("trajectory");
    if (!out) return null_argument("out");
    const auto& recs = trajectory->trajectory.records;
    if (index >= recs.size()) {
        g_last_error = "record index out of range";
        return QP_RANGE;
    }
    const auto& r = recs[index];
    qp_record c{};
    c.t = r.t;
    c.norm = r.norm;
    c.x_mean = r.x_mean[0];
    c.p_mean = r.p_mean[0];
    c.u_mean = r.u_mean;
    c.f_mean = r.f_mean[0];
    c.energy = r.energy;
    const auto& e = trajectory->ehrenfest;
    const bool has = index < e.velocity.size() && e.velocity[index] && e.force[index];
    c.has_ehrenfest = has ? 1 : 0;
    c.ehrenfest_velocity_residual = has ? *e.velocity[index] : std::numeric_limits<double>::quiet_NaN();
    c.ehrenfest_force_residual = has ? *e.force[index] : std::numeric_limits<double>::quiet_NaN();
    *out = c;
    return QP_OK;
}

void qp_trajectory_destroy(qp_trajectory* trajectory) { delete trajectory; }

qp_status qp_scenario_spectrum(const qp_scenario* scenario, size_t levels, qp_spectrum** out)
{
    if (!scenario) return null_argument("scenario");
    if (!out) return null_argument("out");
    *out = nullptr;
    return guarded([&] {
        auto h = std::make_unique<qp_spectrum>();
        h->rows = qpost::run_spectrum(scenario->config, levels);
        *out = h.release();
    });
}

size_t qp_spectrum_size(const qp_spectrum* spectrum) { return spectrum ? spectrum->rows.size() : 0; }

qp_status qp_spectrum_level(const qp_spectrum* spectrum, size_t index, qp_level* out)
{
    if (!spectrum) return null_argument("spectrum");
    if (!out) return null_argument("out");
    if (index >= spectrum->rows.size()) {
        g_last_error = "level index out of range";
        return QP_RANGE;
    }
    const auto& r = spectrum->rows[index];
    *out = qp_level{r.level, r.energy, or_nan(r.analytic_energy), r.analytic_energy ? 1 : 0};
    return QP_OK;
}

void qp_spectrum_destroy(qp_spectrum* spectrum) { delete spectrum; }

qp_status qp_scenario_diffract(const qp_scenario* scenario, qp_diffraction** out)
{
    if (!scenario) return null_argument("scenario");
    if (!out) return null_argument("out");
    *out = nullptr;
    return guarded([&] {
        auto h = std::make_unique<qp_diffraction>();
        h->result = qpost::run_diffraction(scenario->config);
        *out = h.release();
    });
}

size_t qp_diffraction_size(const qp_diffraction* diffraction)
{
    return diffraction ? diffraction->result.positions.size() : 0;
}

qp_status qp_diffraction_sample(const qp_diffraction* diffraction, size_t index, double* position, double* intensity)
{
    if (!diffraction) return null_argument("diffraction");
    if (!position || !intensity) return null_argument("position/intensity");
    const auto& r = diffraction->result;
    if (index >= r.positions.size()) {
        g_last_error = "sample index out of range";
        return QP_RANGE;
    }
    *position = r.positions[index];
    *intensity = r.intensity[index];
    return QP_OK;
}

qp_status qp_diffraction_summary_get(const qp_diffraction* diffraction, qp_diffraction_summary* out)
{
    if (!diffraction) return null_argument("diffraction");
    if (!out) return null_argument("out");
    const auto& r = diffraction->result;
    *out = qp_diffraction_summary{or_nan(r.measured_spacing),
                                  or_nan(r.predicted_spacing),
                                  or_nan(r.relative_error),
                                  r.wavelength,
                                  r.screen_distance,
                                  r.t_stop,
                                  r.steps,
                                  r.peaks.size(),
                                  r.final_norm,
                                  r.transmitted_fraction};
    return QP_OK;
}

size_t qp_diffraction_warning_count(const qp_diffraction* diffraction)
{
    return diffraction ? diffraction->result.warnings.size() : 0;
}

const char* qp_diffraction_warning(const qp_diffraction* diffraction, size_t index)
{
    if (!diffraction || index >= diffraction->result.warnings.size()) return nullptr;
    return diffraction->result.warnings[index].c_str();
}

void qp_diffraction_destroy(qp_diffraction* diffraction) { delete diffraction; }

} // extern "C"
