// qperc: command-line front end.
//
//   qperc generate  --rows --cols --pitch-um --p --seed --out FILE [--format json|grid]
//   qperc evolve    (--lattice FILE | --rows --cols --p --seed) --zmax --zstep --out trace.csv
//                   [--section grid.csv] [--binary trace.bin]
//   qperc sweep     (--config FILE | --preset NAME | --manifest FILE) --out-dir DIR
//                   [--regime quantum|classical] [--jobs N] [--trials N] [--p-grid a:b:step]
//   qperc figures   --sweep DIR [--sweep DIR ...] --out-dir DIR
//
// Exit status: 0 success, 2 usage, 3 validation, 4 I/O, 5 numeric failure.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "qperc/qperc.hpp"

namespace fs = std::filesystem;
using namespace qperc;

namespace {

enum ExitCode { kOk = 0, kUsage = 2, kValidation = 3, kIo = 4, kNumeric = 5 };

std::string iso_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::optional<std::string> env(const char* name) {
    const char* v = std::getenv(name);
    if (v == nullptr || *v == '\0') return std::nullopt;
    return std::string(v);
}

std::vector<double> parse_p_grid(const std::string& text) {
    try {
        if (text.find(':') != std::string::npos) {
            std::vector<double> parts;
            std::stringstream ss(text);
            std::string item;
            while (std::getline(ss, item, ':')) parts.push_back(std::stod(item));
            if (parts.size() != 3) throw ValidationError("--p-grid: expected start:stop:step");
            return probability_grid(parts[0], parts[1], parts[2]);
        }
        std::vector<double> grid;
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ',')) grid.push_back(std::stod(item));
        return grid;
    } catch (const std::invalid_argument&) {
        throw ValidationError("--p-grid: '" + text + "' is not a list of numbers");
    } catch (const DomainError& e) {
        throw ValidationError(std::string("--p-grid: ") + e.what());
    }
}

struct GenerateArgs {
    int rows = 40;
    int cols = 40;
    double pitch = 15.0;
    double p = 0.85;
    std::uint64_t seed = 1;
    std::string out;
    std::string format = "json";
};

int cmd_generate(const GenerateArgs& a) {
    const auto lattice = generate_lattice({a.rows, a.cols, a.pitch}, a.p, a.seed);
    const std::string content =
        a.format == "grid" ? lattice_to_grid(lattice) : lattice_to_json(lattice).dump(2) + "\n";
    write_text_file(a.out, content);
    const auto labels = label_clusters(lattice);
    const auto largest = labels.largest_cluster();
    std::cout << fmt::format("occupied fraction: {:.6f}\n",
                             static_cast<double>(lattice.occupied_count()) / static_cast<double>(a.rows * a.cols))
              << fmt::format("largest cluster: {}\n", largest ? labels.cluster_sizes[static_cast<std::size_t>(*largest)] : 0)
              << fmt::format("wrote {}\n", a.out);
    return kOk;
}

struct EvolveArgs {
    GenerateArgs gen;
    std::string lattice_file;
    double z_max = 20.0;
    double z_step = 0.5;
    double t1 = kDefaultT1PerMm;
    double ratio = kDefaultNextNearestRatio;
    std::string out;
    std::string section;
    std::string binary;
};

int cmd_evolve(const EvolveArgs& a) {
    const Lattice lattice = a.lattice_file.empty() ? generate_lattice({a.gen.rows, a.gen.cols, a.gen.pitch}, a.gen.p, a.gen.seed)
                                                   : load_lattice(a.lattice_file, a.gen.pitch);
    const auto model = CouplingModel::from_ratio(a.t1, a.ratio, lattice.spec().pitch_um);
    const auto h = build_hamiltonian(lattice, model);
    const auto grid = uniform_z_grid(a.z_max, a.z_step);
    const auto trace = evolve_trace(h, initial_state(h, lattice.injection()), grid);

    write_text_file(a.out, trace_csv(trace, h.site_order()));
    std::string section = a.section;
    if (section.empty()) {
        fs::path p(a.out);
        section = (p.parent_path() / (p.stem().string() + "_section.csv")).string();
    }
    write_text_file(section, section_grid_csv(lattice.spec(), h.site_order(), trace.intensities.back()));
    if (!a.binary.empty()) write_text_file(a.binary, trace_binary(trace, h.site_order()));

    const auto& last = trace.intensities.back();
    std::cout << fmt::format("sites: {}\n", h.dimension())
              << fmt::format("final z: {} mm\n", trace.z_samples.back())
              << fmt::format("final IPR: {:.6g}\n", ipr(last))
              << fmt::format("wrote {} and {}\n", a.out, section);
    return kOk;
}

struct SweepArgs {
    std::string config_file;
    std::string preset_name;
    std::string manifest_file;
    std::string regime = "quantum";
    std::string out_dir;
    std::optional<unsigned> jobs;
    std::optional<std::size_t> trials;
    std::string p_grid;
    std::optional<std::uint64_t> seed;
};

ExperimentConfig resolve_config(const SweepArgs& a, std::string& regime) {
    const int sources = !a.config_file.empty() + !a.preset_name.empty() + !a.manifest_file.empty();
    if (sources > 1) throw CLI::ValidationError("--config, --preset and --manifest are mutually exclusive");
    ExperimentConfig c;
    if (!a.manifest_file.empty()) {
        nlohmann::json m;
        try {
            m = nlohmann::json::parse(read_text_file(a.manifest_file));
        } catch (const nlohmann::json::parse_error& e) {
            throw ValidationError("manifest is not valid JSON: " + std::string(e.what()));
        }
        if (!m.contains("config")) throw ValidationError("manifest has no 'config' entry");
        c = config_from_json(m.at("config"));
        if (m.contains("regime") && m.at("regime").is_string()) regime = m.at("regime").get<std::string>();
        return c;  // a manifest rerun ignores overrides
    }
    if (!a.config_file.empty())
        c = parse_config(read_text_file(a.config_file));
    else
        c = preset(a.preset_name.empty() ? "paper-40" : a.preset_name);

    if (a.trials) c.trials_per_p = *a.trials;
    if (!a.p_grid.empty()) c.p_grid = parse_p_grid(a.p_grid);
    if (auto s = env("QPERC_MASTER_SEED")) {
        try {
            c.master_seed = std::stoull(*s);
        } catch (const std::exception&) {
            throw ValidationError("QPERC_MASTER_SEED is not an unsigned integer");
        }
    }
    if (a.seed) c.master_seed = *a.seed;
    try {
        validate(c);
    } catch (const DomainError& e) {
        throw ValidationError(std::string("invalid configuration: ") + e.what());
    }
    return c;
}

unsigned resolve_jobs(const std::optional<unsigned>& flag) {
    if (flag) return std::max(1u, *flag);
    if (auto s = env("QPERC_JOBS")) {
        try {
            return std::max(1, std::stoi(*s));
        } catch (const std::exception&) {
            throw ValidationError("QPERC_JOBS is not an integer");
        }
    }
    return default_jobs();
}

int cmd_sweep(const SweepArgs& a) {
    std::string regime = a.regime;
    const ExperimentConfig config = resolve_config(a, regime);
    if (regime != "quantum" && regime != "classical") throw ValidationError("regime must be quantum or classical");
    const unsigned jobs = resolve_jobs(a.jobs);

    std::error_code ec;
    fs::create_directories(a.out_dir, ec);
    if (ec) throw IoError("cannot create '" + a.out_dir + "': " + ec.message());
    const fs::path dir(a.out_dir);
    std::vector<std::string> written;
    auto emit = [&](const std::string& name, const std::string& content) {
        write_text_file((dir / name).string(), content);
        written.push_back(name);
    };

    emit("config.json", config_to_json(config).dump(2) + "\n");
    std::string observables = observables_csv_header();
    std::string fits = fits_csv_header();
    const auto window = std::make_pair(config.z_max_mm / 2.0, config.z_max_mm);
    auto add_fit = [&](double p, std::span<const ObservablePoint> pts) {
        try {
            fits += fits_csv_row(regime, p, fit_ensemble_exponent(pts, window));
        } catch (const DomainError&) {
            // fewer than three samples in the window: no fit row
        }
    };
    nlohmann::ordered_json summary;

    if (regime == "quantum") {
        const auto result = sweep(config, jobs);
        for (std::size_t ip = 0; ip < config.p_grid.size(); ++ip) {
            const auto pts = ensemble_observables(result.trials[ip]);
            observables += observables_csv_rows(regime, pts);
            add_fit(config.p_grid[ip], pts);
        }
        emit("curve.csv", curve_csv(result.curve));
        emit("trials.jsonl", trials_jsonl(result.trials));
        summary = curve_summary_json(result.curve, config.spec, regime);
    } else {
        const auto result = run_classical_sweep(config, jobs);
        for (std::size_t ip = 0; ip < config.p_grid.size(); ++ip) {
            const auto pts = classical_observables(config, result.trials[ip]);
            observables += observables_csv_rows(regime, pts);
            add_fit(config.p_grid[ip], pts);
        }
        emit("curve.csv", curve_csv(result.spanning_curve));
        emit("trials.jsonl", classical_trials_jsonl(result.trials));
        emit("knee.json", knee_json(result).dump(2) + "\n");
        summary = curve_summary_json(result.spanning_curve, config.spec, regime);
        summary["knee"] = result.knee ? nlohmann::ordered_json(result.knee->knee) : nlohmann::ordered_json(nullptr);
    }
    emit("observables.csv", observables);
    emit("fits.csv", fits);
    emit("summary.json", summary.dump(2) + "\n");

    nlohmann::ordered_json manifest;
    manifest["schema"] = "qperc-manifest/1";
    manifest["tool_version"] = kVersion;
    manifest["timestamp"] = iso_timestamp();
    manifest["regime"] = regime;
    manifest["config"] = config_to_json(config);
    written.push_back("manifest.json");
    manifest["output_paths"] = written;
    write_text_file((dir / "manifest.json").string(), manifest.dump(2) + "\n");

    std::cout << summary.dump() << "\n";
    return kOk;
}

// ------------------------------------------------------------- figures

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name, const std::string& file) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw ValidationError("'" + file + "' has no column '" + name + "'");
    }
};

CsvTable read_csv(const fs::path& path) {
    if (!fs::exists(path)) throw DependencyError("missing input '" + path.string() + "'");
    std::istringstream in(read_text_file(path.string()));
    CsvTable t;
    std::string line;
    auto split = [](const std::string& l) {
        std::vector<std::string> out;
        std::stringstream ss(l);
        std::string cell;
        while (std::getline(ss, cell, ',')) out.push_back(cell);
        return out;
    };
    if (std::getline(in, line)) t.header = split(line);
    while (std::getline(in, line))
        if (!line.empty()) t.rows.push_back(split(line));
    return t;
}

struct SweepDir {
    fs::path path;
    std::string regime;
    int size = 0;
    double z_max = 0.0;
};

SweepDir open_sweep_dir(const std::string& dir) {
    const fs::path p(dir);
    if (!fs::is_directory(p)) throw DependencyError("missing sweep directory '" + dir + "'");
    const fs::path manifest = p / "manifest.json";
    if (!fs::exists(manifest)) throw DependencyError("missing input '" + manifest.string() + "'");
    for (const char* f : {"curve.csv", "observables.csv", "fits.csv"})
        if (!fs::exists(p / f)) throw DependencyError("missing input '" + (p / f).string() + "'");
    nlohmann::json m;
    try {
        m = nlohmann::json::parse(read_text_file(manifest.string()));
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("'" + manifest.string() + "' is not valid JSON");
    }
    const auto cfg = config_from_json(m.at("config"));
    return {p, m.value("regime", std::string("quantum")), cfg.spec.rows, cfg.z_max_mm};
}

int cmd_figures(const std::vector<std::string>& dirs, const std::string& out_dir) {
    if (dirs.empty()) throw DependencyError("no sweep directory given (use --sweep DIR)");
    std::vector<SweepDir> sweeps;
    for (const auto& d : dirs) sweeps.push_back(open_sweep_dir(d));

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create '" + out_dir + "': " + ec.message());
    const fs::path out(out_dir);

    const SweepDir* quantum = nullptr;
    const SweepDir* classical = nullptr;
    for (const auto& s : sweeps) {
        if (s.regime == "quantum" && quantum == nullptr) quantum = &s;
        if (s.regime == "classical" && classical == nullptr) classical = &s;
    }

    // omega_eff(z) per P, both regimes, with log columns
    std::string fig3a = "regime,P,z_mm,w_eff,log_z,log_w_eff\n";
    std::string fig3b = "regime,P,nu,intercept,residual\n";
    for (const SweepDir* s : {quantum, classical}) {
        if (s == nullptr) continue;
        const auto obs = read_csv(s->path / "observables.csv");
        const auto fname = (s->path / "observables.csv").string();
        const auto ip = obs.column("P", fname), iz = obs.column("z_mm", fname), iw = obs.column("w_eff", fname);
        for (const auto& r : obs.rows) {
            const double z = std::stod(r[iz]), w = std::stod(r[iw]);
            fig3a += fmt::format("{},{},{},{},{},{}\n", s->regime, r[ip], r[iz], r[iw],
                                 z > 0 ? fmt::format("{}", std::log10(z)) : std::string(), fmt::format("{}", std::log10(w)));
        }
        const auto fits = read_csv(s->path / "fits.csv");
        for (const auto& r : fits.rows) {
            std::string line;
            for (std::size_t i = 0; i < r.size(); ++i) line += (i ? "," : "") + r[i];
            fig3b += line + "\n";
        }
    }
    write_text_file((out / "fig3a_width_vs_z.csv").string(), fig3a);
    write_text_file((out / "fig3b_nu_vs_p.csv").string(), fig3b);

    // IPR and omega_eff against P at the final propagation length
    auto final_section = [&](const SweepDir& s, const std::string& name) {
        const auto obs = read_csv(s.path / "observables.csv");
        const auto fname = (s.path / "observables.csv").string();
        const auto ip = obs.column("P", fname), iz = obs.column("z_mm", fname), im = obs.column("mean_IPR", fname),
                   isd = obs.column("std_IPR", fname), iw = obs.column("w_eff", fname), in = obs.column("n_trials", fname);
        std::map<double, std::vector<std::string>> last;  // P -> row with largest z
        std::map<double, double> zmax;
        for (const auto& r : obs.rows) {
            const double p = std::stod(r[ip]), z = std::stod(r[iz]);
            if (!zmax.count(p) || z > zmax[p]) {
                zmax[p] = z;
                last[p] = r;
            }
        }
        std::string csv = "P,z_mm,mean_IPR,std_IPR,w_eff,n_trials\n";
        for (const auto& [p, r] : last)
            csv += fmt::format("{},{},{},{},{},{}\n", r[ip], r[iz], r[im], r[isd], r[iw], r[in]);
        write_text_file((out / name).string(), csv);
    };
    if (quantum) final_section(*quantum, "fig3c_quantum_ipr_vs_p.csv");
    if (classical) final_section(*classical, "fig3d_classical_ipr_vs_p.csv");

    // percolation probability per lattice size
    std::string fig4a = "size,P,Pr,dPr,nP,NP\n";
    std::size_t series = 0;
    for (const auto& s : sweeps) {
        if (s.regime != "quantum") continue;
        ++series;
        const auto curve = read_csv(s.path / "curve.csv");
        for (const auto& r : curve.rows) {
            std::string line = std::to_string(s.size);
            for (const auto& cell : r) line += "," + cell;
            fig4a += line + "\n";
        }
    }
    if (series > 0) write_text_file((out / "fig4a_pr_vs_p.csv").string(), fig4a);

    std::cout << fmt::format("figure data written to {}\n", out_dir);
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum and classical site percolation on honeycomb lattices"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    GenerateArgs gen;
    auto* g = app.add_subcommand("generate", "Generate a randomly occupied lattice");
    g->add_option("--rows", gen.rows, "Lattice rows")->check(CLI::Range(2, 100000));
    g->add_option("--cols", gen.cols, "Lattice columns")->check(CLI::Range(2, 100000));
    g->add_option("--pitch-um", gen.pitch, "Nearest-neighbour pitch in µm")->check(CLI::PositiveNumber);
    g->add_option("--p", gen.p, "Occupation probability")->check(CLI::Range(0.0, 1.0));
    g->add_option("--seed", gen.seed, "Lattice seed");
    g->add_option("--out", gen.out, "Output file")->required();
    g->add_option("--format", gen.format, "json or grid")->check(CLI::IsMember({"json", "grid"}));

    EvolveArgs ev;
    auto* e = app.add_subcommand("evolve", "Evolve a single photon injected at the central site");
    e->add_option("--lattice", ev.lattice_file, "Lattice file (JSON or text grid)");
    e->add_option("--rows", ev.gen.rows, "Lattice rows")->check(CLI::Range(2, 100000));
    e->add_option("--cols", ev.gen.cols, "Lattice columns")->check(CLI::Range(2, 100000));
    e->add_option("--pitch-um", ev.gen.pitch, "Nearest-neighbour pitch in µm")->check(CLI::PositiveNumber);
    e->add_option("--p", ev.gen.p, "Occupation probability")->check(CLI::Range(0.0, 1.0));
    e->add_option("--seed", ev.gen.seed, "Lattice seed");
    e->add_option("--zmax", ev.z_max, "Propagation length in mm")->check(CLI::NonNegativeNumber);
    e->add_option("--zstep", ev.z_step, "Sampling step in mm")->check(CLI::PositiveNumber);
    e->add_option("--t1", ev.t1, "Nearest-neighbour coupling in 1/mm")->check(CLI::PositiveNumber);
    e->add_option("--nnn-ratio", ev.ratio, "Next-to-nearest / nearest coupling ratio")->check(CLI::Range(1e-12, 1.0));
    e->add_option("--out", ev.out, "Trace CSV")->required();
    e->add_option("--section", ev.section, "Final transverse section grid CSV");
    e->add_option("--binary", ev.binary, "Binary trace output");

    SweepArgs sw;
    auto* s = app.add_subcommand("sweep", "Monte Carlo sweep over occupation probabilities");
    s->add_option("--config", sw.config_file, "Configuration JSON (qperc-config/1)");
    s->add_option("--preset", sw.preset_name, "paper-40, paper-60 or paper-80")
        ->check(CLI::IsMember({"paper-40", "paper-60", "paper-80"}));
    s->add_option("--manifest", sw.manifest_file, "Rerun the configuration recorded in a manifest");
    s->add_option("--regime", sw.regime, "quantum or classical")->check(CLI::IsMember({"quantum", "classical"}));
    s->add_option("--out-dir", sw.out_dir, "Output directory")->required();
    s->add_option("--jobs", sw.jobs, "Worker threads")->check(CLI::Range(1u, 4096u));
    s->add_option("--trials", sw.trials, "Trials per occupation probability")->check(CLI::Range(std::size_t{1}, std::size_t{1} << 30));
    s->add_option("--p-grid", sw.p_grid, "start:stop:step or comma-separated list");
    s->add_option("--seed", sw.seed, "Master seed");

    std::vector<std::string> fig_dirs;
    std::string fig_out;
    auto* f = app.add_subcommand("figures", "Assemble per-figure datasets from sweep outputs");
    f->add_option("--sweep", fig_dirs, "Sweep output directory (repeatable)");
    f->add_option("--out-dir", fig_out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*g) return cmd_generate(gen);
        if (*e) return cmd_evolve(ev);
        if (*s) return cmd_sweep(sw);
        if (*f) return cmd_figures(fig_dirs, fig_out);
    } catch (const CLI::Error& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kUsage;
    } catch (const ValidationError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kValidation;
    } catch (const IoError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kIo;
    } catch (const PropagationError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kNumeric;
    } catch (const ResourceError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kNumeric;
    } catch (const DomainError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kValidation;
    } catch (const RangeError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kValidation;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kNumeric;
    }
    return kUsage;
}
