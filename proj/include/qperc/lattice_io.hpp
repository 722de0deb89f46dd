#pragma once

// Lattice files.
//
// JSON:  {"spec": {"rows", "cols", "pitch_um"}, "P", "seed",
//         "injection": {"row", "col"}, "occupied": "0110..."}   (row-major)
// Grid:  one line per row, one '0'/'1' character per column.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qperc/error.hpp"
#include "qperc/lattice.hpp"

namespace qperc {

inline std::string occupation_string(const Lattice& lattice) {
    std::string s;
    s.reserve(lattice.occupation().size());
    for (auto b : lattice.occupation()) s.push_back(b ? '1' : '0');
    return s;
}

inline nlohmann::ordered_json lattice_to_json(const Lattice& lattice) {
    nlohmann::ordered_json j;
    j["spec"] = {{"rows", lattice.spec().rows}, {"cols", lattice.spec().cols}, {"pitch_um", lattice.spec().pitch_um}};
    if (std::isnan(lattice.occupation_probability()))
        j["P"] = nullptr;
    else
        j["P"] = lattice.occupation_probability();
    j["seed"] = lattice.seed();
    j["injection"] = {{"row", lattice.injection().row}, {"col", lattice.injection().col}};
    j["occupied"] = occupation_string(lattice);
    return j;
}

inline Lattice lattice_from_json(const nlohmann::json& j) {
    try {
        LatticeSpec spec;
        spec.rows = j.at("spec").at("rows").get<int>();
        spec.cols = j.at("spec").at("cols").get<int>();
        spec.pitch_um = j.at("spec").at("pitch_um").get<double>();
        validate(spec);
        const auto& occ = j.at("occupied").get_ref<const std::string&>();
        if (occ.size() != spec.site_count()) throw ValidationError("'occupied' length does not match rows * cols");
        std::vector<std::uint8_t> bits(occ.size());
        for (std::size_t i = 0; i < occ.size(); ++i) {
            if (occ[i] != '0' && occ[i] != '1') throw ValidationError("'occupied' may only contain '0' and '1'");
            bits[i] = occ[i] == '1';
        }
        const SiteIndex inj{j.at("injection").at("row").get<int>(), j.at("injection").at("col").get<int>()};
        const double p = j.contains("P") && !j.at("P").is_null() ? j.at("P").get<double>()
                                                                 : std::numeric_limits<double>::quiet_NaN();
        const auto seed = j.value("seed", std::uint64_t{0});
        return Lattice::from_mask(SiteMask(spec, std::move(bits)), inj, p, seed);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed lattice JSON: ") + e.what());
    }
}

inline std::string lattice_to_grid(const SiteMask& mask) {
    std::string out;
    const auto& spec = mask.spec();
    out.reserve(spec.site_count() + static_cast<std::size_t>(spec.rows));
    for (int r = 0; r < spec.rows; ++r) {
        for (int c = 0; c < spec.cols; ++c) out.push_back(mask.occupied({r, c}) ? '1' : '0');
        out.push_back('\n');
    }
    return out;
}

inline std::string lattice_to_grid(const Lattice& lattice) { return lattice_to_grid(lattice.mask()); }

inline SiteMask grid_to_mask(const std::string& text, double pitch_um = 15.0) {
    std::istringstream in(text);
    std::string line;
    std::vector<std::uint8_t> bits;
    int rows = 0, cols = -1;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (cols < 0) cols = static_cast<int>(line.size());
        if (static_cast<int>(line.size()) != cols) throw ValidationError("grid rows have unequal length");
        for (char ch : line) {
            if (ch != '0' && ch != '1') throw ValidationError("grid may only contain '0' and '1'");
            bits.push_back(ch == '1');
        }
        ++rows;
    }
    LatticeSpec spec{rows, cols < 0 ? 0 : cols, pitch_um};
    validate(spec);
    return SiteMask(spec, std::move(bits));
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << content;
    if (!out) throw IoError("write to '" + path + "' failed");
}

/// Loads a lattice from JSON, or from a text grid when the file does not
/// start with '{'.
inline Lattice load_lattice(const std::string& path, double pitch_um = 15.0) {
    const std::string text = read_text_file(path);
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw ValidationError("'" + path + "' is not valid JSON: " + e.what());
        }
        return lattice_from_json(j);
    }
    return Lattice::from_mask(grid_to_mask(text, pitch_um));
}

} // namespace qperc
