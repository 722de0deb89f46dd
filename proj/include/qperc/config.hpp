#pragma once

// Experiment configuration documents, schema "qperc-config/1".
//
//   {
//     "schema": "qperc-config/1",
//     "preset": "paper-40",                      optional base, default paper-40
//     "lattice":     {"rows", "cols", "pitch_um"},
//     "coupling":    {"t1_per_mm", "beta_per_um", "reference_distance_um"}
//                    or {"t1_per_mm", "next_nearest_ratio"},
//     "propagation": {"z_max_mm", "z_step_mm", "term_tolerance"},
//     "criterion":   {"bound_side", "portion_threshold"},
//     "ensemble":    {"p_grid": [..], "trials_per_p", "master_seed"},
//     "classical":   {"steps_per_mm", "spanning"}
//   }
//
// Every section and key is optional; missing values come from the preset.

#include <algorithm>
#include <cstdint>
#include <type_traits>
#include <string>
#include <vector>

#include <json.hpp>

#include "qperc/ensemble.hpp"
#include "qperc/error.hpp"

namespace qperc {

inline constexpr const char* kConfigSchema = "qperc-config/1";

inline nlohmann::ordered_json config_to_json(const ExperimentConfig& c) {
    nlohmann::ordered_json j;
    j["schema"] = kConfigSchema;
    j["lattice"] = {{"rows", c.spec.rows}, {"cols", c.spec.cols}, {"pitch_um", c.spec.pitch_um}};
    j["coupling"] = {{"t1_per_mm", c.coupling.t1_per_mm},
                     {"beta_per_um", c.coupling.beta_per_um},
                     {"reference_distance_um", c.coupling.reference_distance_um}};
    j["propagation"] = {{"z_max_mm", c.z_max_mm}, {"z_step_mm", c.z_step_mm}, {"term_tolerance", c.term_tolerance}};
    j["criterion"] = {{"bound_side", c.bound_side}, {"portion_threshold", c.portion_threshold}};
    j["ensemble"] = {{"p_grid", c.p_grid}, {"trials_per_p", c.trials_per_p}, {"master_seed", c.master_seed}};
    j["classical"] = {{"steps_per_mm", c.steps_per_mm}, {"spanning", to_string(c.spanning)}};
    return j;
}

namespace detail {

class ConfigReader {
public:
    std::vector<std::string> problems;

    template <typename T>
    void read(const nlohmann::json& section, const std::string& prefix, const char* key, T& out) {
        if (!section.contains(key)) return;
        const auto& v = section.at(key);
        const std::string name = prefix + "." + key;
        try {
            if constexpr (std::is_same_v<T, double>) {
                if (!v.is_number()) throw std::invalid_argument("expected a number");
            } else if constexpr (std::is_integral_v<T>) {
                if (!v.is_number_integer()) throw std::invalid_argument("expected an integer");
                if constexpr (std::is_unsigned_v<T>)
                    if (v.is_number_integer() && !v.is_number_unsigned()) throw std::invalid_argument("expected a non-negative integer");
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (!v.is_string()) throw std::invalid_argument("expected a string");
            }
            out = v.get<T>();
        } catch (const std::exception& e) {
            problems.push_back(name + ": " + e.what());
        }
    }

    void allow_only(const nlohmann::json& obj, const std::string& prefix, std::initializer_list<const char*> keys) {
        if (!obj.is_object()) {
            problems.push_back(prefix + ": expected an object");
            return;
        }
        for (auto it = obj.begin(); it != obj.end(); ++it) {
            bool known = false;
            for (const char* k : keys) known = known || it.key() == k;
            if (!known) problems.push_back((prefix.empty() ? "" : prefix + ".") + it.key() + ": unknown key");
        }
    }
};

} // namespace detail

/// Parses and validates a configuration document. All offending keys are
/// reported together in one ValidationError.
inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    detail::ConfigReader rd;
    if (!j.is_object()) throw ValidationError("configuration must be a JSON object");
    rd.allow_only(j, "", {"schema", "preset", "lattice", "coupling", "propagation", "criterion", "ensemble", "classical"});
    if (!j.contains("schema"))
        rd.problems.push_back("schema: missing (expected \"qperc-config/1\")");
    else if (j.at("schema") != kConfigSchema)
        rd.problems.push_back("schema: unsupported value (expected \"qperc-config/1\")");

    std::string preset_name = "paper-40";
    rd.read(j, "", "preset", preset_name);
    ExperimentConfig c;
    try {
        c = preset(preset_name);
    } catch (const ValidationError& e) {
        rd.problems.push_back(std::string("preset: ") + e.what());
        c = preset("paper-40");
    }

    const nlohmann::json empty = nlohmann::json::object();
    auto section = [&](const char* name) -> const nlohmann::json& { return j.contains(name) ? j.at(name) : empty; };

    const auto& lat = section("lattice");
    rd.allow_only(lat, "lattice", {"rows", "cols", "pitch_um"});
    if (lat.is_object()) {
        rd.read(lat, "lattice", "rows", c.spec.rows);
        rd.read(lat, "lattice", "cols", c.spec.cols);
        rd.read(lat, "lattice", "pitch_um", c.spec.pitch_um);
        if (c.spec.rows < 2) rd.problems.push_back("lattice.rows: must be at least 2");
        if (c.spec.cols < 2) rd.problems.push_back("lattice.cols: must be at least 2");
        if (!(c.spec.pitch_um > 0.0)) rd.problems.push_back("lattice.pitch_um: must be positive");
    }

    if (!j.contains("coupling") && c.spec.pitch_um > 0.0) c.coupling = default_coupling(c.spec.pitch_um);
    const auto& cp = section("coupling");
    rd.allow_only(cp, "coupling", {"t1_per_mm", "beta_per_um", "reference_distance_um", "next_nearest_ratio"});
    if (cp.is_object()) {
        c.coupling.reference_distance_um = c.spec.pitch_um;
        rd.read(cp, "coupling", "t1_per_mm", c.coupling.t1_per_mm);
        if (cp.contains("next_nearest_ratio")) {
            double ratio = kDefaultNextNearestRatio;
            rd.read(cp, "coupling", "next_nearest_ratio", ratio);
            if (cp.contains("beta_per_um"))
                rd.problems.push_back("coupling.next_nearest_ratio: conflicts with coupling.beta_per_um");
            if (!(ratio > 0.0 && ratio <= 1.0))
                rd.problems.push_back("coupling.next_nearest_ratio: must lie in (0, 1]");
            else
                c.coupling = CouplingModel::from_ratio(c.coupling.t1_per_mm, ratio, c.spec.pitch_um);
        } else if (!cp.contains("beta_per_um")) {
            c.coupling = CouplingModel::from_ratio(c.coupling.t1_per_mm, kDefaultNextNearestRatio, c.spec.pitch_um);
        }
        rd.read(cp, "coupling", "beta_per_um", c.coupling.beta_per_um);
        rd.read(cp, "coupling", "reference_distance_um", c.coupling.reference_distance_um);
        if (!(c.coupling.t1_per_mm > 0.0)) rd.problems.push_back("coupling.t1_per_mm: must be positive");
        if (!(c.coupling.beta_per_um >= 0.0)) rd.problems.push_back("coupling.beta_per_um: must be non-negative");
        if (!(c.coupling.reference_distance_um > 0.0))
            rd.problems.push_back("coupling.reference_distance_um: must be positive");
    }

    const auto& pr = section("propagation");
    rd.allow_only(pr, "propagation", {"z_max_mm", "z_step_mm", "term_tolerance"});
    if (pr.is_object()) {
        rd.read(pr, "propagation", "z_max_mm", c.z_max_mm);
        rd.read(pr, "propagation", "z_step_mm", c.z_step_mm);
        rd.read(pr, "propagation", "term_tolerance", c.term_tolerance);
        if (!(c.z_max_mm >= 0.0)) rd.problems.push_back("propagation.z_max_mm: must be non-negative");
        if (!(c.z_step_mm > 0.0)) rd.problems.push_back("propagation.z_step_mm: must be positive");
        if (!(c.term_tolerance > 0.0)) rd.problems.push_back("propagation.term_tolerance: must be positive");
    }

    const auto& cr = section("criterion");
    rd.allow_only(cr, "criterion", {"bound_side", "portion_threshold"});
    if (cr.is_object()) {
        rd.read(cr, "criterion", "bound_side", c.bound_side);
        rd.read(cr, "criterion", "portion_threshold", c.portion_threshold);
        if (c.bound_side <= 0 || c.bound_side % 2 != 0)
            rd.problems.push_back("criterion.bound_side: must be a positive even integer");
        if (!(c.portion_threshold >= 0.0 && c.portion_threshold <= 1.0))
            rd.problems.push_back("criterion.portion_threshold: must lie in [0, 1]");
    }

    const auto& en = section("ensemble");
    rd.allow_only(en, "ensemble", {"p_grid", "trials_per_p", "master_seed"});
    if (en.is_object()) {
        if (en.contains("p_grid")) {
            const auto& g = en.at("p_grid");
            if (!g.is_array() || g.empty() ||
                !std::all_of(g.begin(), g.end(), [](const nlohmann::json& v) { return v.is_number(); })) {
                rd.problems.push_back("ensemble.p_grid: expected a non-empty array of numbers");
            } else {
                c.p_grid = g.get<std::vector<double>>();
                bool ok = true;
                for (std::size_t i = 0; i < c.p_grid.size(); ++i)
                    ok = ok && c.p_grid[i] >= 0.0 && c.p_grid[i] <= 1.0 && (i == 0 || c.p_grid[i] > c.p_grid[i - 1]);
                if (!ok) rd.problems.push_back("ensemble.p_grid: values must be strictly increasing within [0, 1]");
            }
        }
        rd.read(en, "ensemble", "trials_per_p", c.trials_per_p);
        rd.read(en, "ensemble", "master_seed", c.master_seed);
        if (c.trials_per_p < 1) rd.problems.push_back("ensemble.trials_per_p: must be at least 1");
    }

    const auto& cl = section("classical");
    rd.allow_only(cl, "classical", {"steps_per_mm", "spanning"});
    if (cl.is_object()) {
        rd.read(cl, "classical", "steps_per_mm", c.steps_per_mm);
        std::string mode = to_string(c.spanning);
        rd.read(cl, "classical", "spanning", mode);
        try {
            c.spanning = spanning_mode_from_string(mode);
        } catch (const ValidationError&) {
            rd.problems.push_back("classical.spanning: expected corner_to_corner, top_bottom or left_right");
        }
        if (!(c.steps_per_mm > 0.0)) rd.problems.push_back("classical.steps_per_mm: must be positive");
    }

    if (rd.problems.empty()) {
        try {
            validate(c);
        } catch (const DomainError& e) {
            rd.problems.push_back(std::string("configuration: ") + e.what());
        }
    }
    if (!rd.problems.empty()) {
        std::string msg = "invalid configuration:";
        for (const auto& p : rd.problems) msg += "\n  " + p;
        throw ValidationError(msg);
    }
    return c;
}

inline ExperimentConfig parse_config(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(std::string("configuration is not valid JSON: ") + e.what());
    }
    return config_from_json(j);
}

} // namespace qperc
