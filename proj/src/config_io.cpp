#include "qpost/config_io.hpp"

#include "qpost/error.hpp"

#include <json.hpp>

#include <set>

namespace qpost {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& key, const std::string& msg) { fail(ErrorCode::Config, key + ": " + msg); }

/// Reads keys from one JSON object and rejects whatever was not read.
class ObjectReader {
public:
    ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object()) bad(path_.empty() ? "<root>" : path_, "expected a JSON object");
    }

    std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

    const json* find(const std::string& k)
    {
        seen_.insert(k);
        auto it = j_.find(k);
        return it == j_.end() ? nullptr : &*it;
    }

    void read(const std::string& k, double& out)
    {
        if (const json* v = find(k)) {
            if (!v->is_number()) bad(key(k), "expected a number");
            out = v->get<double>();
        }
    }

    template <class Int>
    void read_int(const std::string& k, Int& out)
    {
        if (const json* v = find(k)) {
            if (v->is_number_unsigned()) {
                out = Int(v->get<std::uint64_t>());
            } else if (v->is_number_integer()) {
                const auto i = v->get<std::int64_t>();
                if (i < 0 && !std::is_signed_v<Int>) bad(key(k), "must be non-negative");
                out = Int(i);
            } else {
                bad(key(k), "expected an integer");
            }
        }
    }

    void read(const std::string& k, std::string& out)
    {
        if (const json* v = find(k)) {
            if (!v->is_string()) bad(key(k), "expected a string");
            out = v->get<std::string>();
        }
    }

    /// Number or array of numbers, one per axis.
    std::vector<double> read_axes(const std::string& k, std::vector<double> fallback)
    {
        const json* v = find(k);
        if (!v) return fallback;
        if (v->is_number()) return {v->get<double>()};
        if (!v->is_array()) bad(key(k), "expected a number or an array of numbers");
        std::vector<double> out;
        for (const auto& e : *v) {
            if (!e.is_number()) bad(key(k), "expected an array of numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }

    void finish() const
    {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) bad(key(it.key()), "unknown key");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

json parse_text(std::string_view text)
{
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        bad("<document>", std::string("malformed JSON: ") + e.what());
    }
}

std::array<double, 2> fill_axes(const std::vector<double>& v, int dim, const std::string& key)
{
    if (v.size() == 1) return {v[0], v[0]};
    if (int(v.size()) != dim) bad(key, "needs one value per grid axis");
    return {v[0], dim == 2 ? v[1] : v[0]};
}

json axes_json(const std::array<double, 2>& v, int dim)
{
    json a = json::array();
    for (int i = 0; i < dim; ++i) a.push_back(v[i]);
    return a;
}

} // namespace

ScenarioConfig scenario_from_json(std::string_view text)
{
    const json doc = parse_text(text);
    ScenarioConfig c;
    ObjectReader root(doc, "");
    root.read("name", c.name);

    if (const json* g = root.find("grid")) {
        ObjectReader r(*g, "grid");
        r.read_int("dim", c.grid.dim);
        r.read_int("n", c.grid.n);
        if (c.grid.dim != 1 && c.grid.dim != 2) bad("grid.dim", "must be 1 or 2");
        const auto length = r.read_axes("length", {c.grid.length[0]});
        const auto origin = r.read_axes("origin", {c.grid.origin[0]});
        c.grid.length = fill_axes(length, c.grid.dim, "grid.length");
        c.grid.origin = fill_axes(origin, c.grid.dim, "grid.origin");
        r.finish();
    }

    if (const json* p = root.find("potential")) {
        ObjectReader r(*p, "potential");
        std::string type = "harmonic";
        r.read("type", type);
        if (type == "free") {
            c.potential = FreeSpec{};
        } else if (type == "harmonic") {
            HarmonicSpec h;
            r.read("omega", h.omega);
            c.potential = h;
        } else if (type == "quartic") {
            QuarticSpec q;
            r.read("a", q.a);
            c.potential = q;
        } else if (type == "slit_wall") {
            SlitWallSpec s;
            r.read("wall_position", s.wall_position);
            r.read("detector_position", s.detector_position);
            r.read_int("slit_count", s.slit_count);
            r.read("slit_width", s.slit_width);
            r.read("slit_separation", s.slit_separation);
            r.read("barrier_height", s.barrier_height);
            r.read("barrier_thickness", s.barrier_thickness);
            c.potential = s;
        } else {
            bad("potential.type", "unknown potential '" + type + "' (free, harmonic, quartic, slit_wall)");
        }
        r.finish();
    }

    if (const json* init = root.find("initial")) {
        ObjectReader r(*init, "initial");
        std::string type = "gaussian";
        r.read("type", type);
        if (type != "gaussian") bad("initial.type", "only 'gaussian' initial states are supported");
        const int dim = c.grid.dim;
        std::vector<double> def_x0(std::size_t(dim), 0.0), def_p0(std::size_t(dim), 0.0), def_s(std::size_t(dim), 1.0);
        for (std::size_t a = 0; a < c.initial.size() && a < std::size_t(dim); ++a) {
            def_x0[a] = c.initial[a].x0;
            def_p0[a] = c.initial[a].p0;
            def_s[a] = c.initial[a].sigma;
        }
        const auto x0 = fill_axes(r.read_axes("x0", def_x0), dim, "initial.x0");
        const auto p0 = fill_axes(r.read_axes("p0", def_p0), dim, "initial.p0");
        const auto sg = fill_axes(r.read_axes("sigma", def_s), dim, "initial.sigma");
        c.initial.clear();
        for (int a = 0; a < dim; ++a) c.initial.push_back(PacketAxis{x0[a], p0[a], sg[a]});
        r.finish();
    } else if (int(c.initial.size()) != c.grid.dim) {
        bad("initial", "required when grid.dim differs from the default");
    }

    root.read("dt", c.dt);
    root.read_int("steps", c.steps);
    root.read_int("record_every", c.record_every);
    root.read_int("seed", c.seed);
    root.read("hbar", c.hbar);
    root.read("mass", c.mass);
    root.finish();

    validate(c);
    return c;
}

std::string scenario_to_json(const ScenarioConfig& c)
{
    json j;
    j["name"] = c.name;
    j["grid"] = {{"dim", c.grid.dim},
                 {"n", c.grid.n},
                 {"length", axes_json(c.grid.length, c.grid.dim)},
                 {"origin", axes_json(c.grid.origin, c.grid.dim)}};
    j["potential"] = std::visit(
        [](const auto& p) -> json {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, FreeSpec>) {
                return {{"type", "free"}};
            } else if constexpr (std::is_same_v<T, HarmonicSpec>) {
                return {{"type", "harmonic"}, {"omega", p.omega}};
            } else if constexpr (std::is_same_v<T, QuarticSpec>) {
                return {{"type", "quartic"}, {"a", p.a}};
            } else {
                return {{"type", "slit_wall"},
                        {"wall_position", p.wall_position},
                        {"detector_position", p.detector_position},
                        {"slit_count", p.slit_count},
                        {"slit_width", p.slit_width},
                        {"slit_separation", p.slit_separation},
                        {"barrier_height", p.barrier_height},
                        {"barrier_thickness", p.barrier_thickness}};
            }
        },
        c.potential);
    json x0 = json::array(), p0 = json::array(), sg = json::array();
    for (const auto& a : c.initial) {
        x0.push_back(a.x0);
        p0.push_back(a.p0);
        sg.push_back(a.sigma);
    }
    j["initial"] = {{"type", "gaussian"}, {"x0", x0}, {"p0", p0}, {"sigma", sg}};
    j["dt"] = c.dt;
    j["steps"] = c.steps;
    j["record_every"] = c.record_every;
    j["seed"] = c.seed;
    j["hbar"] = c.hbar;
    j["mass"] = c.mass;
    return j.dump(2);
}

VerifyConfig verify_config_from_json(std::string_view text)
{
    const json doc = parse_text(text);
    VerifyConfig c;
    ObjectReader r(doc, "");
    r.read_int("seed", c.seed);
    r.read("tolerance_scale", c.tolerance_scale);
    r.read_int("random_states", c.random_states);
    r.read_int("field_trials", c.field_trials);
    r.read_int("antihermitian_trials", c.antihermitian_trials);
    r.read_int("antihermitian_size", c.antihermitian_size);
    if (const json* v = r.find("commutant_sizes")) {
        if (!v->is_array()) bad("commutant_sizes", "expected an array of integers");
        c.commutant_sizes.clear();
        for (const auto& e : *v) {
            if (!e.is_number_unsigned()) bad("commutant_sizes", "expected an array of non-negative integers");
            c.commutant_sizes.push_back(e.get<std::size_t>());
        }
    }
    r.finish();
    validate(c);
    return c;
}

std::string verify_config_to_json(const VerifyConfig& c)
{
    json j;
    j["seed"] = c.seed;
    j["tolerance_scale"] = c.tolerance_scale;
    j["random_states"] = c.random_states;
    j["field_trials"] = c.field_trials;
    j["antihermitian_trials"] = c.antihermitian_trials;
    j["antihermitian_size"] = c.antihermitian_size;
    j["commutant_sizes"] = c.commutant_sizes;
    return j.dump(2);
}

} // namespace qpost
