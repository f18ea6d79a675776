#pragma once

#include <cmath>
#include <fstream>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "../dynamics.hpp"
#include "../errors.hpp"
#include "../integrator.hpp"
#include "../lattice.hpp"

namespace hybcs {

using json = nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

// Dimensionless run description; energies in units of W, rates in units of |U|.
struct RunConfig {
    struct {
        double width = 1.0;
        long n_modes = 4096;
    } band;
    struct {
        double u_over_w = 1.0;
    } interaction;
    struct {
        double gamma_over_u = 0.0;
        double p_over_u = 0.0;
        double alpha = 1.0;
        std::optional<double> alpha_pump;
    } dissipation;
    struct {
        double t_max_w = 1000.0;
        long samples = 400;
        std::string spacing = "log";
    } time;
    struct {
        double rtol = 1e-9;
        double atol = 1e-12;
        double max_step_w = 1.0;
    } integrator;
    struct {
        std::string path = "run.csv";
        std::vector<double> track_energies;
    } output;

    double alpha_pump() const { return dissipation.alpha_pump.value_or(dissipation.alpha); }
};

namespace detail {

inline void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
    if (!obj.is_object()) throw ConfigError((where.empty() ? "config" : where) + ": expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError((where.empty() ? "" : where + ".") + it.key() + ": unknown key");
}

inline double get_number(const json& obj, const std::string& where, const char* key, double def) {
    if (!obj.contains(key)) return def;
    const auto& v = obj.at(key);
    if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
    return v.get<double>();
}

inline long get_integer(const json& obj, const std::string& where, const char* key, long def) {
    if (!obj.contains(key)) return def;
    const auto& v = obj.at(key);
    if (!v.is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
    return v.get<long>();
}

inline std::string get_string(const json& obj, const std::string& where, const char* key, std::string def) {
    if (!obj.contains(key)) return def;
    const auto& v = obj.at(key);
    if (!v.is_string()) throw ConfigError(where + "." + key + ": expected a string");
    return v.get<std::string>();
}

inline const json& section(const json& root, const char* name) {
    static const json empty = json::object();
    return root.contains(name) ? root.at(name) : empty;
}

}  // namespace detail

inline RunConfig parse_config(const json& j) {
    using namespace detail;
    check_keys(j, "", {"band", "interaction", "dissipation", "time", "integrator", "output"});
    RunConfig c;

    const json& b = section(j, "band");
    check_keys(b, "band", {"width", "n_modes"});
    c.band.width = get_number(b, "band", "width", c.band.width);
    c.band.n_modes = get_integer(b, "band", "n_modes", c.band.n_modes);
    if (!(c.band.width > 0) || !std::isfinite(c.band.width)) throw ConfigError("band.width: must be positive");
    if (c.band.n_modes < 2 || c.band.n_modes % 2) throw ConfigError("band.n_modes: must be even and at least 2");

    const json& in = section(j, "interaction");
    check_keys(in, "interaction", {"u_over_w"});
    c.interaction.u_over_w = get_number(in, "interaction", "u_over_w", c.interaction.u_over_w);
    if (!(c.interaction.u_over_w > 0)) throw ConfigError("interaction.u_over_w: must be positive");

    const json& d = section(j, "dissipation");
    check_keys(d, "dissipation", {"gamma_over_u", "p_over_u", "alpha", "alpha_pump"});
    c.dissipation.gamma_over_u = get_number(d, "dissipation", "gamma_over_u", 0.0);
    c.dissipation.p_over_u = get_number(d, "dissipation", "p_over_u", 0.0);
    c.dissipation.alpha = get_number(d, "dissipation", "alpha", 1.0);
    if (d.contains("alpha_pump") && !d.at("alpha_pump").is_null())
        c.dissipation.alpha_pump = get_number(d, "dissipation", "alpha_pump", 1.0);
    if (!(c.dissipation.gamma_over_u >= 0)) throw ConfigError("dissipation.gamma_over_u: must be non-negative");
    if (!(c.dissipation.p_over_u >= 0)) throw ConfigError("dissipation.p_over_u: must be non-negative");
    if (!(c.dissipation.alpha >= 0 && c.dissipation.alpha <= 1))
        throw ConfigError("dissipation.alpha: must lie in [0, 1]");
    if (!(c.alpha_pump() >= 0 && c.alpha_pump() <= 1))
        throw ConfigError("dissipation.alpha_pump: must lie in [0, 1]");

    const json& t = section(j, "time");
    check_keys(t, "time", {"t_max_w", "samples", "spacing"});
    c.time.t_max_w = get_number(t, "time", "t_max_w", c.time.t_max_w);
    c.time.samples = get_integer(t, "time", "samples", c.time.samples);
    c.time.spacing = get_string(t, "time", "spacing", c.time.spacing);
    if (!(c.time.t_max_w > 0)) throw ConfigError("time.t_max_w: must be positive");
    if (c.time.samples < 2) throw ConfigError("time.samples: must be at least 2");
    if (c.time.spacing != "log" && c.time.spacing != "linear")
        throw ConfigError("time.spacing: must be \"log\" or \"linear\"");
    if (c.time.spacing == "log" && !(c.time.t_max_w > 1e-2))
        throw ConfigError("time.t_max_w: log spacing starts at 1e-2 and needs a later end");

    const json& ig = section(j, "integrator");
    check_keys(ig, "integrator", {"rtol", "atol", "max_step_w"});
    c.integrator.rtol = get_number(ig, "integrator", "rtol", c.integrator.rtol);
    c.integrator.atol = get_number(ig, "integrator", "atol", c.integrator.atol);
    c.integrator.max_step_w = get_number(ig, "integrator", "max_step_w", c.integrator.max_step_w);
    if (!(c.integrator.rtol > 0)) throw ConfigError("integrator.rtol: must be positive");
    if (!(c.integrator.atol > 0)) throw ConfigError("integrator.atol: must be positive");
    if (!(c.integrator.max_step_w > 0)) throw ConfigError("integrator.max_step_w: must be positive");

    const json& o = section(j, "output");
    check_keys(o, "output", {"path", "track_energies"});
    c.output.path = get_string(o, "output", "path", c.output.path);
    if (o.contains("track_energies")) {
        const auto& te = o.at("track_energies");
        if (!te.is_array()) throw ConfigError("output.track_energies: expected an array");
        for (std::size_t i = 0; i < te.size(); ++i) {
            if (!te[i].is_number())
                throw ConfigError("output.track_energies[" + std::to_string(i) + "]: expected a number");
            const double e = te[i].get<double>();
            if (std::abs(e) > 0.5)
                throw ConfigError("output.track_energies[" + std::to_string(i) + "]: must lie in [-0.5, 0.5]");
            c.output.track_energies.push_back(e);
        }
    }
    return c;
}

inline json to_json(const RunConfig& c) {
    json j;
    j["band"] = {{"width", c.band.width}, {"n_modes", c.band.n_modes}};
    j["interaction"] = {{"u_over_w", c.interaction.u_over_w}};
    j["dissipation"] = {{"gamma_over_u", c.dissipation.gamma_over_u},
                        {"p_over_u", c.dissipation.p_over_u},
                        {"alpha", c.dissipation.alpha},
                        {"alpha_pump", c.alpha_pump()}};
    j["time"] = {{"t_max_w", c.time.t_max_w}, {"samples", c.time.samples}, {"spacing", c.time.spacing}};
    j["integrator"] = {{"rtol", c.integrator.rtol},
                       {"atol", c.integrator.atol},
                       {"max_step_w", c.integrator.max_step_w}};
    j["output"] = {{"path", c.output.path}, {"track_energies", c.output.track_energies}};
    return j;
}

// Accepts a plain config or a run sidecar (which embeds the resolved config).
inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (j.is_object() && j.contains("config") && j.contains("version")) return parse_config(j.at("config"));
    return parse_config(j);
}

struct ResolvedRun {
    RunConfig config;
    std::shared_ptr<const BandGrid> grid;
    SystemParams params;
    Protocol protocol;
    IntegratorSettings settings;
};

inline ResolvedRun resolve(const RunConfig& c, int threads = 1) {
    ResolvedRun r;
    r.config = c;
    auto g = std::make_shared<BandGrid>(build_flat_band(c.band.width, static_cast<std::size_t>(c.band.n_modes)));
    r.grid = g;
    const double W = g->bandwidth;
    r.params.grid = g.get();
    r.params.u = c.interaction.u_over_w * W;
    r.params.gamma = c.dissipation.gamma_over_u * r.params.u;
    r.params.pump = c.dissipation.p_over_u * r.params.u;
    r.params.alpha_loss = c.dissipation.alpha;
    r.params.alpha_pump = c.alpha_pump();
    r.params.validate();

    r.protocol.t_max = c.time.t_max_w / W;
    if (r.protocol.t_max > revival_limit(*g) * (1 + 1e-12))
        throw ConfigError("time.t_max_w: exceeds the revival guard 0.4*2*pi*n_modes");
    const auto n = static_cast<std::size_t>(c.time.samples);
    r.protocol.sample_times = c.time.spacing == "log" ? log_samples(1e-2 / W, r.protocol.t_max, n)
                                                      : linear_samples(r.protocol.t_max, n);
    for (double e : c.output.track_energies) r.protocol.record_modes.push_back(g->nearest_mode(e * W));

    r.settings.rtol = c.integrator.rtol;
    r.settings.atol = c.integrator.atol;
    r.settings.max_step = c.integrator.max_step_w / W;
    r.settings.threads = threads;
    return r;
}

}  // namespace hybcs
