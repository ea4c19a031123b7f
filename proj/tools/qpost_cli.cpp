// qpost: command-line front end over the C API.
//
//   qpost verify   [--config f] [--out dir] [--seed s] [--tolerance-scale x]
//   qpost evolve   --config f [--out dir] [--seed s]
//   qpost spectrum --config f --levels n [--out dir] [--seed s]
//   qpost diffract --config f [--out dir] [--seed s]
//
// Exit status: 0 success (all checks pass), 1 a check or run failed,
// 2 usage or configuration error.

#include "qpost/qpostulates.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitUsage = 2;

struct Options {
    std::string config;
    std::string out = ".";
    std::optional<std::uint64_t> seed;
    std::optional<double> tolerance_scale;
    std::size_t levels = 5;
};

/// Thrown to unwind with a specific exit code after printing a message.
struct Exit {
    int code;
};

int exit_code_for(qp_status s)
{
    switch (s) {
    case QP_OK: return kExitOk;
    case QP_INVALID_ARGUMENT:
    case QP_CONFIG:
    case QP_RANGE: return kExitUsage;
    default: return kExitFailed;
    }
}

void check(qp_status s)
{
    if (s == QP_OK) return;
    std::cerr << "error: " << qp_status_string(s) << ": " << qp_last_error() << "\n";
    throw Exit{exit_code_for(s)};
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        std::cerr << "error: cannot read config file '" << path << "'\n";
        throw Exit{kExitUsage};
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string take(char* s)
{
    std::string out(s);
    qp_string_free(s);
    return out;
}

std::string num(double v)
{
    if (!std::isfinite(v)) return {};
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json num_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

fs::path output_dir(const Options& o)
{
    fs::path dir(o.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        std::cerr << "error: cannot create output directory '" << o.out << "': " << ec.message() << "\n";
        throw Exit{kExitUsage};
    }
    return dir;
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) {
        std::cerr << "error: cannot write '" << path.string() << "'\n";
        throw Exit{kExitFailed};
    }
}

class Manifest {
public:
    explicit Manifest(std::string command) : command_(std::move(command)), start_(std::chrono::steady_clock::now()) {}

    void add_output(const fs::path& p) { outputs_.push_back(p.string()); }

    void write(const fs::path& dir, const std::string& resolved_config, std::uint64_t seed)
    {
        const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        const fs::path path = dir / (command_ + ".manifest.json");
        outputs_.push_back(path.string());
        json j;
        j["command"] = command_;
        j["config"] = json::parse(resolved_config);
        j["version"] = qp_version();
        j["seed"] = seed;
        j["wall_clock_seconds"] = elapsed;
        j["outputs"] = outputs_;
        write_text(path, j.dump(2) + "\n");
    }

private:
    std::string command_;
    std::chrono::steady_clock::time_point start_;
    std::vector<std::string> outputs_;
};

template <class T, void (*Destroy)(T*)>
struct Deleter {
    void operator()(T* p) const { Destroy(p); }
};

using ScenarioPtr = std::unique_ptr<qp_scenario, Deleter<qp_scenario, qp_scenario_destroy>>;

ScenarioPtr load_scenario(const Options& o)
{
    if (o.config.empty()) {
        std::cerr << "error: --config is required\n";
        throw Exit{kExitUsage};
    }
    const std::string text = read_file(o.config);
    qp_scenario* raw = nullptr;
    check(qp_scenario_create(text.c_str(), &raw));
    ScenarioPtr s(raw);
    if (o.seed) check(qp_scenario_set_seed(s.get(), *o.seed));
    return s;
}

std::pair<std::string, std::uint64_t> resolved(const qp_scenario* s)
{
    char* text = nullptr;
    check(qp_scenario_to_json(s, &text));
    std::string out = take(text);
    return {out, json::parse(out).at("seed").get<std::uint64_t>()};
}

int cmd_verify(const Options& o)
{
    Manifest manifest("verify");
    qp_verify_config* raw = nullptr;
    if (o.config.empty()) {
        check(qp_verify_config_create(nullptr, &raw));
    } else {
        const std::string text = read_file(o.config);
        check(qp_verify_config_create(text.c_str(), &raw));
    }
    std::unique_ptr<qp_verify_config, Deleter<qp_verify_config, qp_verify_config_destroy>> cfg(raw);
    if (o.seed) check(qp_verify_config_set_seed(cfg.get(), *o.seed));
    if (o.tolerance_scale) check(qp_verify_config_set_tolerance_scale(cfg.get(), *o.tolerance_scale));

    qp_report_list* list_raw = nullptr;
    check(qp_verify_run(cfg.get(), &list_raw));
    std::unique_ptr<qp_report_list, Deleter<qp_report_list, qp_report_list_destroy>> list(list_raw);

    const std::size_t n = qp_report_list_size(list.get());
    std::vector<qp_report> reports(n);
    std::size_t w_name = 5, w_tag = 3;
    for (std::size_t i = 0; i < n; ++i) {
        check(qp_report_list_get(list.get(), i, &reports[i]));
        w_name = std::max(w_name, std::string(reports[i].name).size());
        w_tag = std::max(w_tag, std::string(reports[i].tag).size());
    }

    std::printf("%-*s  %-*s  %13s  %13s  %s\n", int(w_name), "check", int(w_tag), "tag", "residual", "tolerance",
                "result");
    json arr = json::array();
    std::size_t failed = 0;
    for (const auto& r : reports) {
        std::printf("%-*s  %-*s  %13.6e  %13.6e  %s\n", int(w_name), r.name, int(w_tag), r.tag, r.residual,
                    r.tolerance, r.passed ? "PASS" : "FAIL");
        if (!r.passed) ++failed;
        arr.push_back({{"name", r.name},
                       {"tag", r.tag},
                       {"residual", num_or_null(r.residual)},
                       {"tolerance", r.tolerance},
                       {"passed", bool(r.passed)},
                       {"details", r.details}});
    }
    std::printf("%zu checks, %zu failed\n", n, failed);

    const fs::path dir = output_dir(o);
    const fs::path path = dir / "reports.json";
    write_text(path, arr.dump(2) + "\n");
    manifest.add_output(path);

    char* text = nullptr;
    check(qp_verify_config_to_json(cfg.get(), &text));
    const std::string config_json = take(text);
    manifest.write(dir, config_json, json::parse(config_json).at("seed").get<std::uint64_t>());
    return qp_report_list_all_passed(list.get()) ? kExitOk : kExitFailed;
}

int cmd_evolve(const Options& o)
{
    Manifest manifest("evolve");
    auto scenario = load_scenario(o);
    qp_trajectory* raw = nullptr;
    check(qp_scenario_run(scenario.get(), &raw));
    std::unique_ptr<qp_trajectory, Deleter<qp_trajectory, qp_trajectory_destroy>> traj(raw);

    std::string csv = "t,norm,x_mean,p_mean,u_mean,f_mean,energy,ehrenfest_v_resid,ehrenfest_f_resid\n";
    for (std::size_t i = 0; i < qp_trajectory_size(traj.get()); ++i) {
        qp_record r;
        check(qp_trajectory_record(traj.get(), i, &r));
        csv += num(r.t) + "," + num(r.norm) + "," + num(r.x_mean) + "," + num(r.p_mean) + "," + num(r.u_mean) + "," +
               num(r.f_mean) + "," + num(r.energy) + ",";
        if (r.has_ehrenfest) csv += num(r.ehrenfest_velocity_residual) + "," + num(r.ehrenfest_force_residual);
        else csv += ",";
        csv += "\n";
    }
    const fs::path dir = output_dir(o);
    const fs::path path = dir / "trajectory.csv";
    write_text(path, csv);
    manifest.add_output(path);
    const auto [config_json, seed] = resolved(scenario.get());
    manifest.write(dir, config_json, seed);
    std::printf("wrote %zu records to %s\n", qp_trajectory_size(traj.get()), path.string().c_str());
    return kExitOk;
}

int cmd_spectrum(const Options& o)
{
    Manifest manifest("spectrum");
    auto scenario = load_scenario(o);
    qp_spectrum* raw = nullptr;
    check(qp_scenario_spectrum(scenario.get(), o.levels, &raw));
    std::unique_ptr<qp_spectrum, Deleter<qp_spectrum, qp_spectrum_destroy>> spec(raw);

    std::string csv = "level,energy,analytic_energy,abs_error\n";
    for (std::size_t i = 0; i < qp_spectrum_size(spec.get()); ++i) {
        qp_level l;
        check(qp_spectrum_level(spec.get(), i, &l));
        csv += std::to_string(l.level) + "," + num(l.energy) + ",";
        if (l.has_analytic) csv += num(l.analytic_energy) + "," + num(std::abs(l.energy - l.analytic_energy));
        else csv += ",";
        csv += "\n";
        std::printf("%4zu  %.12f\n", l.level, l.energy);
    }
    const fs::path dir = output_dir(o);
    const fs::path path = dir / "spectrum.csv";
    write_text(path, csv);
    manifest.add_output(path);
    const auto [config_json, seed] = resolved(scenario.get());
    manifest.write(dir, config_json, seed);
    return kExitOk;
}

int cmd_diffract(const Options& o)
{
    Manifest manifest("diffract");
    auto scenario = load_scenario(o);
    qp_diffraction* raw = nullptr;
    check(qp_scenario_diffract(scenario.get(), &raw));
    std::unique_ptr<qp_diffraction, Deleter<qp_diffraction, qp_diffraction_destroy>> d(raw);

    for (std::size_t i = 0; i < qp_diffraction_warning_count(d.get()); ++i)
        std::cerr << "warning: " << qp_diffraction_warning(d.get(), i) << "\n";

    std::string csv = "detector_position,intensity\n";
    for (std::size_t i = 0; i < qp_diffraction_size(d.get()); ++i) {
        double y = 0.0, intensity = 0.0;
        check(qp_diffraction_sample(d.get(), i, &y, &intensity));
        csv += num(y) + "," + num(intensity) + "\n";
    }
    qp_diffraction_summary s;
    check(qp_diffraction_summary_get(d.get(), &s));
    json summary;
    summary["measured_fringe_spacing"] = num_or_null(s.measured_fringe_spacing);
    summary["fraunhofer_prediction"] = num_or_null(s.fraunhofer_prediction);
    summary["relative_error"] = num_or_null(s.relative_error);
    summary["wavelength"] = s.wavelength;
    summary["screen_distance"] = s.screen_distance;
    summary["t_stop"] = s.t_stop;
    summary["steps"] = s.steps;
    summary["peak_count"] = s.peak_count;
    summary["final_norm"] = s.final_norm;
    summary["transmitted_fraction"] = s.transmitted_fraction;
    json warnings = json::array();
    for (std::size_t i = 0; i < qp_diffraction_warning_count(d.get()); ++i)
        warnings.push_back(qp_diffraction_warning(d.get(), i));
    summary["warnings"] = warnings;

    const fs::path dir = output_dir(o);
    const fs::path csv_path = dir / "intensity.csv";
    const fs::path json_path = dir / "diffraction_summary.json";
    write_text(csv_path, csv);
    write_text(json_path, summary.dump(2) + "\n");
    manifest.add_output(csv_path);
    manifest.add_output(json_path);
    const auto [config_json, seed] = resolved(scenario.get());
    manifest.write(dir, config_json, seed);

    if (std::isfinite(s.relative_error))
        std::printf("fringe spacing %.6f, predicted %.6f, relative error %.4f\n", s.measured_fringe_spacing,
                    s.fraunhofer_prediction, s.relative_error);
    else
        std::printf("no fringe analysis (%zu peaks)\n", s.peak_count);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Numerical checks of the quantum-mechanics postulates and scenario runs", "qpost"};
    app.require_subcommand(1, 1);
    app.set_version_flag("--version", std::string(qp_version()));

    Options o;
    std::uint64_t seed = 0;
    double tolerance_scale = 1.0;

    auto add_common = [&](CLI::App* sub, bool config_required) {
        auto* c = sub->add_option("--config", o.config, "JSON configuration file");
        if (config_required) c->required();
        sub->add_option("--out", o.out, "Output directory")->capture_default_str();
        sub->add_option("--seed", seed, "Seed override");
    };

    auto* verify = app.add_subcommand("verify", "Run the verification suite");
    add_common(verify, false);
    verify->add_option("--tolerance-scale", tolerance_scale, "Multiply every tolerance by this factor");

    auto* evolve = app.add_subcommand("evolve", "Evolve a scenario and record expectation values");
    add_common(evolve, true);

    auto* spectrum = app.add_subcommand("spectrum", "Lowest energy levels of a scenario's Hamiltonian");
    add_common(spectrum, true);
    spectrum->add_option("--levels", o.levels, "Number of levels")->capture_default_str();

    auto* diffract = app.add_subcommand("diffract", "Slit diffraction run");
    add_common(diffract, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    for (auto* sub : {verify, evolve, spectrum, diffract}) {
        if (sub->count("--seed")) o.seed = seed;
    }
    if (verify->count("--tolerance-scale")) o.tolerance_scale = tolerance_scale;

    try {
        if (*verify) return cmd_verify(o);
        if (*evolve) return cmd_evolve(o);
        if (*spectrum) return cmd_spectrum(o);
        if (*diffract) return cmd_diffract(o);
    } catch (const Exit& e) {
        return e.code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailed;
    }
    return kExitUsage;
}
