// End-to-end runs of the qpost executable.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kWork = QPOST_WORK_DIR;
const std::string kConfigs = QPOST_CONFIG_DIR;

struct Result {
    int code;
    std::string err;
};

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Result qpost(const std::string& args, const std::string& tag)
{
    fs::create_directories(kWork);
    const fs::path err = kWork / (tag + ".stderr");
    const fs::path out = kWork / (tag + ".stdout");
    const std::string cmd = std::string("\"") + QPOST_CLI + "\" " + args + " >\"" + out.string() + "\" 2>\"" +
                            err.string() + "\"";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return {WEXITSTATUS(status), slurp(err)};
}

fs::path fresh_dir(const std::string& name)
{
    const fs::path d = kWork / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

fs::path write_config(const std::string& name, const std::string& text)
{
    fs::create_directories(kWork);
    const fs::path p = kWork / name;
    std::ofstream(p) << text;
    return p;
}

std::vector<std::string> split(const std::string& line, char sep)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream s(line);
    while (std::getline(s, cell, sep)) out.push_back(cell);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

/// Rows of a CSV file; every cell must be empty or a complete number.
std::vector<std::vector<std::string>> read_csv(const fs::path& p, std::string& header)
{
    std::ifstream in(p);
    REQUIRE(std::getline(in, header));
    const auto width = split(header, ',').size();
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        auto cells = split(line, ',');
        REQUIRE(cells.size() == width);
        for (const auto& c : cells) {
            if (c.empty()) continue;
            std::size_t used = 0;
            const double v = std::stod(c, &used);
            CHECK(used == c.size());
            CHECK(std::isfinite(v));
        }
        rows.push_back(std::move(cells));
    }
    return rows;
}

std::string cfg(const std::string& name) { return "--config \"" + kConfigs + "/" + name + "\""; }

const std::string kSmallSlit = R"({
  "name": "small_single_slit",
  "grid": {"dim": 2, "n": 256, "length": [40, 40], "origin": [-20, -20]},
  "potential": {"type": "slit_wall", "wall_position": -6, "detector_position": 6, "slit_count": 1,
                "slit_width": 1.5, "slit_separation": 4, "barrier_height": 625, "barrier_thickness": 0.25},
  "initial": {"x0": [-12.25, 0], "p0": [5, 0], "sigma": [1.25, 3.5]},
  "dt": 0.004, "steps": 0, "record_every": 1
})";

} // namespace

TEST_CASE("verify passes, writes reports and a manifest")
{
    const auto dir = fresh_dir("verify");
    const auto r = qpost("verify " + cfg("verify.json") + " --out \"" + dir.string() + "\"", "verify");
    CHECK(r.code == 0);
    const auto reports = json::parse(slurp(dir / "reports.json"));
    REQUIRE(reports.is_array());
    CHECK(reports.size() >= 10);
    for (const auto& rep : reports) {
        INFO(rep.dump());
        CHECK(rep.at("passed").get<bool>());
        CHECK(rep.at("residual").get<double>() <= rep.at("tolerance").get<double>());
        CHECK_FALSE(rep.at("tag").get<std::string>().empty());
    }
    const auto manifest = json::parse(slurp(dir / "verify.manifest.json"));
    CHECK(manifest.at("command") == "verify");
    CHECK(manifest.at("seed") == 20240601);
    for (const auto& o : manifest.at("outputs")) CHECK(fs::exists(dir / o.get<std::string>()));
    CHECK(manifest.at("config").at("tolerance_scale") == 1.0);
}

TEST_CASE("verify with zero tolerance fails every check")
{
    const auto dir = fresh_dir("verify_zero");
    const auto r = qpost("verify --tolerance-scale 0 --out \"" + dir.string() + "\"", "verify_zero");
    CHECK(r.code == 1);
    for (const auto& rep : json::parse(slurp(dir / "reports.json"))) CHECK_FALSE(rep.at("passed").get<bool>());
}

TEST_CASE("usage and configuration errors exit with 2")
{
    CHECK(qpost("evolve", "no_config").code == 2);
    CHECK(qpost("frobnicate", "bad_command").code == 2);
    CHECK(qpost("evolve --config \"" + (kWork / "does_not_exist.json").string() + "\"", "missing").code == 2);

    const auto unknown = write_config("unknown_key.json", R"({"grid": {"n": 64, "spacing": 0.1}})");
    const auto r = qpost("evolve --config \"" + unknown.string() + "\" --out \"" + kWork.string() + "\"", "unknown");
    CHECK(r.code == 2);
    CHECK(r.err.find("grid.spacing") != std::string::npos);

    const auto typed = write_config("wrong_type.json", R"({"dt": "fast"})");
    const auto t = qpost("evolve --config \"" + typed.string() + "\"", "wrong_type");
    CHECK(t.code == 2);
    CHECK(t.err.find("dt") != std::string::npos);
}

TEST_CASE("evolve harmonic writes a strict trajectory with constant energy")
{
    const auto dir = fresh_dir("evolve_harmonic");
    REQUIRE(qpost("evolve " + cfg("harmonic.json") + " --out \"" + dir.string() + "\"", "evolve").code == 0);
    std::string header;
    const auto rows = read_csv(dir / "trajectory.csv", header);
    CHECK(header == "t,norm,x_mean,p_mean,u_mean,f_mean,energy,ehrenfest_v_resid,ehrenfest_f_resid");
    REQUIRE(rows.size() == 1001);
    const double e0 = std::stod(rows[0][6]);
    double worst = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        worst = std::max(worst, std::abs(std::stod(rows[i][6]) - e0) / std::abs(e0));
        CHECK(std::abs(std::stod(rows[i][1]) - 1.0) < 1e-10);
        const bool interior = i >= 2 && i + 2 < rows.size();
        CHECK(rows[i][7].empty() != interior);
        CHECK(rows[i][8].empty() != interior);
        if (interior) {
            CHECK(std::stod(rows[i][7]) < 1e-4);
            CHECK(std::stod(rows[i][8]) < 1e-4);
        }
    }
    CHECK(worst < 1e-8);
    const auto manifest = json::parse(slurp(dir / "evolve.manifest.json"));
    CHECK(manifest.at("config").at("potential").at("type") == "harmonic");
    CHECK(manifest.at("config").at("steps") == 50000);
}

TEST_CASE("free packet keeps its momentum")
{
    const auto dir = fresh_dir("evolve_free");
    REQUIRE(qpost("evolve " + cfg("free.json") + " --out \"" + dir.string() + "\"", "free").code == 0);
    std::string header;
    const auto rows = read_csv(dir / "trajectory.csv", header);
    REQUIRE(rows.size() > 2);
    const double p0 = std::stod(rows[0][3]);
    CHECK(std::abs(p0 - 2.0) < 1e-10);
    for (const auto& row : rows) CHECK(std::abs(std::stod(row[3]) - p0) < 1e-10);
}

TEST_CASE("spectrum against closed forms")
{
    const auto dir = fresh_dir("spectrum");
    REQUIRE(qpost("spectrum " + cfg("harmonic.json") + " --levels 6 --out \"" + dir.string() + "\"", "spectrum").code ==
            0);
    std::string header;
    const auto rows = read_csv(dir / "spectrum.csv", header);
    CHECK(header == "level,energy,analytic_energy,abs_error");
    REQUIRE(rows.size() == 6);
    for (std::size_t n = 0; n < rows.size(); ++n) {
        CHECK(std::stoul(rows[n][0]) == n);
        CHECK(std::stod(rows[n][2]) == doctest::Approx(double(n) + 0.5));
        CHECK(std::stod(rows[n][3]) <= 1e-6);
    }

    const auto free_dir = fresh_dir("spectrum_free");
    REQUIRE(qpost("spectrum " + cfg("free.json") + " --levels 3 --out \"" + free_dir.string() + "\"", "spec_free")
                .code == 0);
    const auto free_rows = read_csv(free_dir / "spectrum.csv", header);
    CHECK(std::abs(std::stod(free_rows[0][1])) < 1e-10);
    CHECK(free_rows[0][2].empty());
    CHECK(free_rows[0][3].empty());

    CHECK(qpost("spectrum " + cfg("harmonic.json") + " --levels 257 --out \"" + dir.string() + "\"", "too_many").code ==
          2);
}

TEST_CASE("diffract on a single slit reports no fringe spacing")
{
    const auto config = write_config("small_single_slit.json", kSmallSlit);
    const auto dir = fresh_dir("diffract_single");
    const auto r = qpost("diffract --config \"" + config.string() + "\" --out \"" + dir.string() + "\"", "single");
    REQUIRE(r.code == 0);
    const auto summary = json::parse(slurp(dir / "diffraction_summary.json"));
    CHECK(summary.at("measured_fringe_spacing").is_null());
    CHECK(summary.at("fraunhofer_prediction").is_null());
    CHECK(summary.at("relative_error").is_null());
    CHECK(std::abs(summary.at("final_norm").get<double>() - 1.0) < 1e-8);
    CHECK(summary.at("warnings").empty());
    std::string header;
    const auto rows = read_csv(dir / "intensity.csv", header);
    CHECK(header == "detector_position,intensity");
    CHECK(rows.size() == 256);
    for (const auto& row : rows) CHECK(std::stod(row[1]) >= 0.0);
}

TEST_CASE("diffract without a barrier warns")
{
    auto j = json::parse(kSmallSlit);
    j["potential"]["barrier_height"] = 0.0;
    j["potential"]["slit_count"] = 2;
    const auto config = write_config("no_barrier.json", j.dump());
    const auto dir = fresh_dir("diffract_open");
    const auto r = qpost("diffract --config \"" + config.string() + "\" --out \"" + dir.string() + "\"", "open");
    CHECK(r.code == 0);
    CHECK(r.err.find("warning") != std::string::npos);
    const auto summary = json::parse(slurp(dir / "diffraction_summary.json"));
    CHECK_FALSE(summary.at("warnings").empty());
    CHECK(summary.at("relative_error").is_null());
}

TEST_CASE("resolved configs round-trip through the manifest")
{
    const auto dir = fresh_dir("roundtrip_a");
    REQUIRE(qpost("evolve " + cfg("quartic.json") + " --out \"" + dir.string() + "\"", "rt_a").code == 0);
    const auto manifest = json::parse(slurp(dir / "evolve.manifest.json"));
    const auto resolved = write_config("resolved.json", manifest.at("config").dump(2));
    const auto dir2 = fresh_dir("roundtrip_b");
    REQUIRE(qpost("evolve --config \"" + resolved.string() + "\" --out \"" + dir2.string() + "\"", "rt_b").code == 0);
    CHECK(slurp(dir / "trajectory.csv") == slurp(dir2 / "trajectory.csv"));
    CHECK(json::parse(slurp(dir2 / "evolve.manifest.json")).at("config") == manifest.at("config"));
}

TEST_CASE("seed override is recorded")
{
    const auto dir = fresh_dir("seeded");
    REQUIRE(qpost("evolve " + cfg("quartic.json") + " --seed 99 --out \"" + dir.string() + "\"", "seeded").code == 0);
    const auto manifest = json::parse(slurp(dir / "evolve.manifest.json"));
    CHECK(manifest.at("seed") == 99);
    CHECK(manifest.at("config").at("seed") == 99);
}

TEST_CASE("repeated runs are byte-identical")
{
    const auto a = fresh_dir("det_a");
    const auto b = fresh_dir("det_b");
    for (const auto& d : {a, b}) {
        REQUIRE(qpost("verify " + cfg("verify.json") + " --out \"" + d.string() + "\"", "det_v").code == 0);
        REQUIRE(qpost("evolve " + cfg("free.json") + " --out \"" + d.string() + "\"", "det_e").code == 0);
    }
    CHECK(slurp(a / "reports.json") == slurp(b / "reports.json"));
    CHECK(slurp(a / "trajectory.csv") == slurp(b / "trajectory.csv"));
    CHECK_FALSE(slurp(a / "trajectory.csv").empty());
}
