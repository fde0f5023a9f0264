#pragma once

#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mempol/geometry.hpp"
#include "mempol/imaging.hpp"
#include "mempol/media.hpp"

namespace mempol {

using Json = nlohmann::ordered_json;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace cfgdetail {

inline void check_keys(const Json& obj, const std::set<std::string>& allowed,
                       const std::string& context) {
    if (!obj.is_object()) throw ConfigError(context + ": expected an object");
    for (const auto& [key, _] : obj.items())
        if (allowed.find(key) == allowed.end())
            throw ConfigError(context + ": unknown key \"" + key + "\"");
}

inline double require_number(const Json& obj, const std::string& key, const std::string& context) {
    if (!obj.contains(key)) throw ConfigError(context + ": missing key \"" + key + "\"");
    if (!obj[key].is_number()) throw ConfigError(context + "." + key + ": expected a number");
    return obj[key].get<double>();
}

inline double number_or(const Json& obj, const std::string& key, double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) throw ConfigError(key + ": expected a number");
    return obj[key].get<double>();
}

inline int int_or(const Json& obj, const std::string& key, int fallback,
                  const std::string& context) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number_integer()) throw ConfigError(context + "." + key + ": expected an integer");
    return obj[key].get<int>();
}

inline Vec2 vec2_or(const Json& obj, const std::string& key, const Vec2& fallback,
                    const std::string& context) {
    if (!obj.contains(key)) return fallback;
    const Json& v = obj[key];
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        throw ConfigError(context + "." + key + ": expected [x, y]");
    return {v[0].get<double>(), v[1].get<double>()};
}

inline Curve parse_cell(const Json& obj, const std::string& context) {
    if (!obj.is_object() || !obj.contains("type") || !obj["type"].is_string())
        throw ConfigError(context + ": expected an object with a \"type\" string");
    const std::string type = obj["type"].get<std::string>();
    if (type == "circle") {
        check_keys(obj, {"type", "radius", "center"}, context);
        return Curve::circle(require_number(obj, "radius", context),
                             vec2_or(obj, "center", Vec2::Zero(), context));
    }
    if (type == "ellipse") {
        check_keys(obj, {"type", "a", "b", "center", "rotation"}, context);
        return Curve::ellipse(require_number(obj, "a", context), require_number(obj, "b", context),
                              vec2_or(obj, "center", Vec2::Zero(), context),
                              number_or(obj, "rotation", 0.0));
    }
    throw ConfigError(context + ".type: unknown cell type \"" + type + "\"");
}

}  // namespace cfgdetail

struct EnsembleConfig {
    int n_samples = 64;
    DeformationParams params;
};

struct EffectiveConfig {
    std::string mode = "dilute";  // dilute | periodic | random
    EnsembleConfig ensemble;
};

struct ImagingConfig {
    double probe_radius = 1.5;
    int probe_nodes = 128;
    int inclusion_nodes = 128;
    Curve inclusion = Curve::circle(0.5);
    double f = 0.01;
    double pattern_angle = 0.0;
    int n_angles = 32;
    std::optional<double> omega;  // for single-frequency commands
};

struct PulseConfig {
    PulseSpec spec;
};

/// Parsed, schema-validated run configuration. Unknown keys anywhere in
/// the tree are rejected; command handlers check that the blocks they
/// need are present.
struct RunConfig {
    MembraneModel model;
    std::optional<FrequencyGrid> grid;
    std::optional<CellConfiguration> cells;
    int n_nodes = kDefaultNodes;
    std::optional<double> mwf_r0;
    std::optional<EffectiveConfig> effective;
    std::optional<ImagingConfig> imaging;
    std::optional<PulseConfig> pulse;

    static RunConfig parse(const Json& root) {
        using namespace cfgdetail;
        check_keys(root, {"model", "grid", "geometry", "mwf", "effective", "imaging", "pulse"},
                   "config");
        RunConfig c;
        if (root.contains("model")) {
            const Json& m = root["model"];
            check_keys(m, {"sigma0", "eps0", "sigma_m", "eps_m", "delta"}, "model");
            c.model.sigma0 = number_or(m, "sigma0", c.model.sigma0);
            c.model.eps0 = number_or(m, "eps0", c.model.eps0);
            c.model.sigma_m = number_or(m, "sigma_m", c.model.sigma_m);
            c.model.eps_m = number_or(m, "eps_m", c.model.eps_m);
            c.model.delta = number_or(m, "delta", c.model.delta);
        }
        try {
            c.model.validate();
        } catch (const std::exception& e) {
            throw ConfigError(std::string("model: ") + e.what());
        }
        if (root.contains("grid")) {
            const Json& g = root["grid"];
            check_keys(g, {"omega_min", "omega_max", "n_points"}, "grid");
            const double lo = require_number(g, "omega_min", "grid");
            const double hi = require_number(g, "omega_max", "grid");
            const int n = int_or(g, "n_points", 50, "grid");
            if (!(lo > 0.0) || !(hi > lo) || n < 2)
                throw ConfigError("grid: need 0 < omega_min < omega_max and n_points >= 2");
            c.grid = FrequencyGrid::logspace(lo, hi, n);
        }
        if (root.contains("geometry")) {
            const Json& g = root["geometry"];
            check_keys(g, {"n_nodes", "cells"}, "geometry");
            c.n_nodes = int_or(g, "n_nodes", kDefaultNodes, "geometry");
            if (c.n_nodes < 8 || c.n_nodes % 2 != 0)
                throw ConfigError("geometry.n_nodes: must be even and >= 8");
            if (!g.contains("cells") || !g["cells"].is_array() || g["cells"].empty())
                throw ConfigError("geometry.cells: expected a nonempty array");
            std::vector<Curve> curves;
            for (std::size_t i = 0; i < g["cells"].size(); ++i)
                curves.push_back(parse_cell(g["cells"][i], "geometry.cells[" + std::to_string(i) + "]"));
            try {
                c.cells.emplace(std::move(curves));
            } catch (const std::exception& e) {
                throw ConfigError(std::string("geometry: ") + e.what());
            }
        }
        if (root.contains("mwf")) {
            check_keys(root["mwf"], {"r0"}, "mwf");
            const double r0 = require_number(root["mwf"], "r0", "mwf");
            if (!(r0 > 0.0)) throw ConfigError("mwf.r0: must be > 0");
            c.mwf_r0 = r0;
        }
        if (root.contains("effective")) {
            const Json& e = root["effective"];
            check_keys(e, {"mode", "ensemble"}, "effective");
            EffectiveConfig ec;
            if (e.contains("mode")) {
                if (!e["mode"].is_string()) throw ConfigError("effective.mode: expected a string");
                ec.mode = e["mode"].get<std::string>();
                if (ec.mode != "dilute" && ec.mode != "periodic" && ec.mode != "random")
                    throw ConfigError("effective.mode: must be dilute, periodic or random");
            }
            if (e.contains("ensemble")) {
                const Json& en = e["ensemble"];
                check_keys(en,
                           {"n_samples", "max_translation", "max_rotation", "max_shear",
                            "max_bump", "bump_modes", "max_displacement"},
                           "effective.ensemble");
                ec.ensemble.n_samples = int_or(en, "n_samples", 64, "effective.ensemble");
                if (ec.ensemble.n_samples < 1)
                    throw ConfigError("effective.ensemble.n_samples: must be >= 1");
                auto& p = ec.ensemble.params;
                p.max_translation = number_or(en, "max_translation", 0.0);
                p.max_rotation = number_or(en, "max_rotation", 0.0);
                p.max_shear = number_or(en, "max_shear", 0.0);
                p.max_bump = number_or(en, "max_bump", 0.0);
                p.bump_modes = int_or(en, "bump_modes", 0, "effective.ensemble");
                p.max_displacement = number_or(en, "max_displacement", p.max_displacement);
            }
            c.effective = ec;
        }
        if (root.contains("imaging")) {
            const Json& im = root["imaging"];
            check_keys(im,
                       {"probe_radius", "probe_nodes", "inclusion", "inclusion_nodes", "f",
                        "pattern_angle", "n_angles", "omega"},
                       "imaging");
            ImagingConfig ic;
            ic.probe_radius = number_or(im, "probe_radius", ic.probe_radius);
            if (!(ic.probe_radius > 0.0)) throw ConfigError("imaging.probe_radius: must be > 0");
            ic.probe_nodes = int_or(im, "probe_nodes", ic.probe_nodes, "imaging");
            ic.inclusion_nodes = int_or(im, "inclusion_nodes", ic.inclusion_nodes, "imaging");
            if (im.contains("inclusion")) ic.inclusion = parse_cell(im["inclusion"], "imaging.inclusion");
            ic.f = number_or(im, "f", ic.f);
            if (!(ic.f >= 0.0) || !(ic.f < 1.0)) throw ConfigError("imaging.f: must be in [0, 1)");
            ic.pattern_angle = number_or(im, "pattern_angle", 0.0);
            ic.n_angles = int_or(im, "n_angles", ic.n_angles, "imaging");
            if (im.contains("omega")) {
                const double w = require_number(im, "omega", "imaging");
                if (!(w > 0.0)) throw ConfigError("imaging.omega: must be > 0");
                ic.omega = w;
            }
            c.imaging = ic;
        }
        if (root.contains("pulse")) {
            const Json& p = root["pulse"];
            check_keys(p, {"center", "bandwidth", "n_refine", "n_time", "horizon"}, "pulse");
            PulseConfig pc;
            pc.spec.center = require_number(p, "center", "pulse");
            pc.spec.bandwidth = require_number(p, "bandwidth", "pulse");
            pc.spec.n_refine = int_or(p, "n_refine", pc.spec.n_refine, "pulse");
            pc.spec.n_time = int_or(p, "n_time", pc.spec.n_time, "pulse");
            pc.spec.horizon = number_or(p, "horizon", 0.0);
            try {
                pc.spec.validate();
            } catch (const std::exception& e) {
                throw ConfigError(std::string("pulse: ") + e.what());
            }
            c.pulse = pc;
        }
        return c;
    }

    static RunConfig load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file: " + path);
        Json root;
        try {
            root = Json::parse(in);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("config parse error: ") + e.what());
        }
        return parse(root);
    }
};

}  // namespace mempol
