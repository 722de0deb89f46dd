#pragma once

// Output formats.
//
// Trace CSV          z_mm,site_row,site_col,intensity
// Trace binary       "QPTRACE1" | u64 samples | u64 sites | sites x (i32 row, i32 col)
//                    | samples x (f64 z, sites x f64 intensity)      little-endian
// Section grid CSV   rows lines of cols intensities (0 on vacant sites)
// Curve CSV          P,Pr,dPr,nP,NP
// Observables CSV    regime,P,z_mm,mean_IPR,std_IPR,w_eff,n_trials
// Fits CSV           regime,P,nu,intercept,residual
// Trials JSONL       one object per trial
//
// Doubles are written in shortest round-trip form so reruns are
// byte-identical.

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "qperc/ensemble.hpp"
#include "qperc/lattice.hpp"
#include "qperc/propagator.hpp"

namespace qperc {

inline std::string trace_csv(const EvolutionTrace& trace, std::span<const SiteIndex> sites) {
    std::string out = "z_mm,site_row,site_col,intensity\n";
    for (std::size_t k = 0; k < trace.z_samples.size(); ++k)
        for (std::size_t i = 0; i < sites.size(); ++i)
            out += fmt::format("{},{},{},{}\n", trace.z_samples[k], sites[i].row, sites[i].col, trace.intensities[k][i]);
    return out;
}

inline std::string trace_binary(const EvolutionTrace& trace, std::span<const SiteIndex> sites) {
    static_assert(std::endian::native == std::endian::little, "binary trace writer assumes a little-endian host");
    std::string out = "QPTRACE1";
    auto put = [&out](const auto& v) {
        char buf[sizeof(v)];
        std::memcpy(buf, &v, sizeof(v));
        out.append(buf, sizeof(v));
    };
    put(static_cast<std::uint64_t>(trace.z_samples.size()));
    put(static_cast<std::uint64_t>(sites.size()));
    for (const auto& s : sites) {
        put(static_cast<std::int32_t>(s.row));
        put(static_cast<std::int32_t>(s.col));
    }
    for (std::size_t k = 0; k < trace.z_samples.size(); ++k) {
        put(trace.z_samples[k]);
        for (double v : trace.intensities[k]) put(v);
    }
    return out;
}

inline std::string section_grid_csv(const LatticeSpec& spec, std::span<const SiteIndex> sites,
                                    std::span<const double> intensity) {
    std::vector<double> grid(spec.site_count(), 0.0);
    for (std::size_t i = 0; i < sites.size(); ++i) grid[flat_index(spec, sites[i])] = intensity[i];
    std::string out;
    for (int r = 0; r < spec.rows; ++r) {
        for (int c = 0; c < spec.cols; ++c) {
            if (c) out.push_back(',');
            out += fmt::format("{}", grid[flat_index(spec, {r, c})]);
        }
        out.push_back('\n');
    }
    return out;
}

inline std::string curve_csv(const TransitionCurve& curve) {
    std::string out = "P,Pr,dPr,nP,NP\n";
    for (const auto& p : curve.points)
        out += fmt::format("{},{},{},{},{}\n", p.probability, p.estimate.pr, p.estimate.dpr, p.estimate.percolated,
                           p.estimate.trials);
    return out;
}

inline std::string observables_csv_header() { return "regime,P,z_mm,mean_IPR,std_IPR,w_eff,n_trials\n"; }

inline std::string observables_csv_rows(const std::string& regime, std::span<const ObservablePoint> points) {
    std::string out;
    for (const auto& p : points)
        out += fmt::format("{},{},{},{},{},{},{}\n", regime, p.probability, p.z_mm, p.mean_ipr, p.std_ipr, p.width,
                           p.trials);
    return out;
}

inline std::string fits_csv_header() { return "regime,P,nu,intercept,residual\n"; }

inline std::string fits_csv_row(const std::string& regime, double p, const ExponentFit& fit) {
    return fmt::format("{},{},{},{},{}\n", regime, p, fit.nu, fit.intercept, fit.residual);
}

inline nlohmann::ordered_json optional_json(const std::optional<double>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

inline nlohmann::ordered_json curve_summary_json(const TransitionCurve& curve, const LatticeSpec& spec,
                                                 const std::string& regime) {
    nlohmann::ordered_json j;
    j["regime"] = regime;
    j["size"] = {spec.rows, spec.cols};
    j["threshold"] = optional_json(curve.threshold);
    j["span"] = curve.span ? nlohmann::ordered_json::array({curve.span->first, curve.span->second})
                           : nlohmann::ordered_json(nullptr);
    j["span_width"] = optional_json(curve.span_width());
    return j;
}

inline std::string trials_jsonl(const std::vector<std::vector<TrialResult>>& trials) {
    std::string out;
    for (const auto& row : trials)
        for (const auto& t : row) {
            nlohmann::ordered_json j;
            j["P"] = t.probability;
            j["trial"] = t.trial_index;
            j["seed"] = t.seed;
            j["final_bound_fraction"] = t.final_bound_fraction;
            j["percolated"] = t.percolated;
            j["final_ipr"] = t.ipr_trace.empty() ? 1.0 : t.ipr_trace.back().second;
            out += j.dump() + "\n";
        }
    return out;
}

inline std::string classical_trials_jsonl(const std::vector<std::vector<ClassicalTrialResult>>& trials) {
    std::string out;
    for (const auto& row : trials)
        for (const auto& t : row) {
            nlohmann::ordered_json j;
            j["P"] = t.probability;
            j["trial"] = t.trial_index;
            j["seed"] = t.seed;
            j["covered"] = t.covered.back();
            j["final_ipr"] = t.final_ipr();
            j["spans"] = t.spans;
            out += j.dump() + "\n";
        }
    return out;
}

inline nlohmann::ordered_json knee_json(const ClassicalSweepResult& r) {
    nlohmann::ordered_json j;
    if (r.knee) {
        j["knee"] = r.knee->knee;
        j["base"] = r.knee->base;
        j["quadratic"] = {r.knee->quadratic(0), r.knee->quadratic(1), r.knee->quadratic(2)};
        j["last_descending"] = r.knee->last_descending;
        j["first_flat"] = r.knee->first_flat;
    } else {
        j["knee"] = nullptr;
        j["error"] = r.knee_error;
    }
    return j;
}

} // namespace qperc
