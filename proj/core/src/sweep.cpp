#include "syk/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>

#include "syk/analysis.hpp"
#include "syk/couplings.hpp"
#include "syk/decoupling.hpp"
#include "syk/hamiltonian.hpp"
#include "syk/parallel.hpp"
#include "syk/trajectory.hpp"

namespace fs = std::filesystem;

namespace syk {

namespace {

// Seed-chain tags: one per (mode, ensemble variant) so no two ensembles ever
// share a run seed under the same master seed.
constexpr std::uint64_t kSeedGrowth = 1, kSeedEgr = 2, kSeedDynamicsEntropy = 3,
                        kSeedPhaseEntanglement = 4, kSeedPhasePurification = 5, kSeedRateFit = 6,
                        kSeedTraceEntropy = 7, kSeedDecoupling = 8, kSeedCalibration = 9,
                        kSeedDynamicsPurity = 10, kSeedTracePurity = 11;

const struct {
    SweepMode mode;
    const char* name;
} kModeNames[] = {
    {SweepMode::growth, "growth"},
    {SweepMode::egr, "egr"},
    {SweepMode::dynamics, "dynamics"},
    {SweepMode::phase_entanglement, "phase-entanglement"},
    {SweepMode::phase_purification, "phase-purification"},
    {SweepMode::rate_fit, "rate-fit"},
    {SweepMode::trace, "trace"},
    {SweepMode::decoupling, "decoupling"},
};

bool uses_grid(SweepMode m) {
    return m == SweepMode::dynamics || m == SweepMode::phase_entanglement ||
           m == SweepMode::phase_purification || m == SweepMode::rate_fit ||
           m == SweepMode::trace;
}

bool uses_batches(SweepMode m) {
    return m != SweepMode::trace && m != SweepMode::decoupling;
}

double parse_number(const std::string& text) {
    std::size_t pos = 0;
    double v = std::stod(text, &pos);
    if (pos != text.size()) throw std::invalid_argument("trailing characters in '" + text + "'");
    return v;
}

}  // namespace

SweepMode mode_from_string(const std::string& name) {
    for (const auto& m : kModeNames)
        if (name == m.name) return m.mode;
    std::string all;
    for (const auto& m : kModeNames) {
        if (!all.empty()) all += ", ";
        all += m.name;
    }
    throw std::invalid_argument("unknown mode '" + name + "' (expected one of: " + all + ")");
}

std::string mode_to_string(SweepMode mode) {
    for (const auto& m : kModeNames)
        if (mode == m.mode) return m.name;
    throw std::logic_error("unmapped mode");
}

std::vector<double> parse_axis(const std::string& text) {
    auto bad = [&text](const std::string& why) -> std::vector<double> {
        throw std::invalid_argument("axis '" + text + "': " + why);
    };
    std::vector<double> v;
    try {
        if (text.rfind("lin:", 0) == 0 || text.rfind("log:", 0) == 0) {
            const bool log_scale = text[1] == 'o';
            std::vector<std::string> parts;
            std::stringstream ss(text.substr(4));
            std::string item;
            while (std::getline(ss, item, ':')) parts.push_back(item);
            if (parts.size() != 3) return bad("range needs a:b:n");
            const double a = parse_number(parts[0]);
            const double b = parse_number(parts[1]);
            const int n = int(parse_number(parts[2]));
            if (n < 1) return bad("point count must be positive");
            if (log_scale && (a <= 0.0 || b <= 0.0)) return bad("log range needs positive ends");
            for (int k = 0; k < n; ++k) {
                const double f = n == 1 ? 0.0 : double(k) / double(n - 1);
                v.push_back(log_scale ? a * std::pow(b / a, f) : a + (b - a) * f);
            }
        } else {
            std::stringstream ss(text);
            std::string item;
            while (std::getline(ss, item, ',')) v.push_back(parse_number(item));
        }
    } catch (const std::invalid_argument& e) {
        return bad(e.what());
    }
    if (v.empty()) return bad("empty");
    for (std::size_t i = 0; i + 1 < v.size(); ++i)
        if (!(v[i] < v[i + 1])) return bad("values must be strictly increasing");
    for (double x : v)
        if (!std::isfinite(x)) return bad("values must be finite");
    return v;
}

namespace {

std::vector<double> json_axis(const nlohmann::json& v) {
    if (v.is_string()) return parse_axis(v.get<std::string>());
    if (v.is_number()) return {v.get<double>()};
    return v.get<std::vector<double>>();  // throws on non-arrays
}

}  // namespace

SweepConfig config_from_json(const nlohmann::json& doc) {
    static const std::set<std::string> known = {
        "mode",   "n_majoranas", "j",       "gamma_ratio", "p_m",     "dt",
        "t_max",  "record_interval", "runs", "batches",    "seed",    "workers",
        "out",    "n_values",    "j_values", "n_systems",  "gammas",  "p_meas"};
    if (!doc.is_object()) throw std::invalid_argument("config: document must be a JSON object");
    std::string bad;
    auto flag = [&bad](const std::string& field, const std::string& why) {
        if (!bad.empty()) bad += "; ";
        bad += field + " (" + why + ")";
    };
    for (const auto& [key, value] : doc.items())
        if (!known.count(key)) flag(key, "unknown field");

    SweepConfig cfg;
    auto get = [&doc, &flag](const char* key, auto& dst) {
        if (!doc.contains(key)) return;
        try {
            dst = doc.at(key).get<std::decay_t<decltype(dst)>>();
        } catch (const nlohmann::json::exception&) {
            flag(key, "wrong type");
        }
    };
    if (doc.contains("mode")) {
        try {
            cfg.mode = mode_from_string(doc.at("mode").get<std::string>());
        } catch (const std::exception& e) {
            flag("mode", e.what());
        }
    }
    get("n_majoranas", cfg.n_majoranas);
    get("j", cfg.j);
    get("dt", cfg.dt);
    get("t_max", cfg.t_max);
    get("record_interval", cfg.record_interval);
    get("runs", cfg.runs);
    get("batches", cfg.batches);
    get("seed", cfg.seed);
    get("workers", cfg.workers);
    get("out", cfg.out);
    for (const char* key : {"gamma_ratio", "p_m"}) {
        if (!doc.contains(key)) continue;
        try {
            auto axis = json_axis(doc.at(key));
            (key[0] == 'g' ? cfg.gamma_ratio : cfg.p_m) = axis;
        } catch (const std::exception& e) {
            flag(key, e.what());
        }
    }
    get("n_values", cfg.egr_n_values);
    get("j_values", cfg.egr_j_values);
    get("n_systems", cfg.dec_n_systems);
    get("gammas", cfg.dec_gammas);
    get("p_meas", cfg.dec_p_meas);
    // an explicit scalar j / n_majoranas narrows the egr sweep to that value
    if (cfg.mode == SweepMode::egr) {
        if (cfg.egr_j_values.empty() && doc.contains("j")) cfg.egr_j_values = {cfg.j};
        if (cfg.egr_n_values.empty() && doc.contains("n_majoranas"))
            cfg.egr_n_values = {cfg.n_majoranas};
    }
    if (!bad.empty()) throw std::invalid_argument("config schema: " + bad);
    return cfg;
}

SweepConfig resolve_defaults(SweepConfig cfg) {
    const bool purification_side =
        cfg.mode == SweepMode::phase_purification || cfg.mode == SweepMode::rate_fit;
    if (cfg.t_max < 0.0) {
        switch (cfg.mode) {
            case SweepMode::growth:
            case SweepMode::egr: cfg.t_max = 80.0; break;
            case SweepMode::phase_purification:
            case SweepMode::rate_fit: cfg.t_max = 1000.0; break;
            default: cfg.t_max = 200.0; break;
        }
    }
    if (cfg.record_interval < 0.0) {
        const bool fine = cfg.mode == SweepMode::growth || cfg.mode == SweepMode::egr ||
                          cfg.mode == SweepMode::trace || purification_side;
        cfg.record_interval = fine ? 0.25 : 1.0;
    }
    if (uses_grid(cfg.mode)) {
        if (cfg.gamma_ratio.empty()) cfg.gamma_ratio = parse_axis("log:0.05:20:10");
        if (cfg.p_m.empty()) cfg.p_m = parse_axis("lin:0.1:1.0:10");
    }
    if (cfg.mode == SweepMode::egr) {
        if (cfg.egr_n_values.empty()) cfg.egr_n_values = {12, 16};
        if (cfg.egr_j_values.empty()) cfg.egr_j_values = {0.5, 1.0, 2.0, 3.0};
    }
    if (cfg.mode == SweepMode::decoupling) {
        if (cfg.dec_n_systems.empty()) cfg.dec_n_systems = {4, 6, 8};
        if (cfg.dec_gammas.empty()) cfg.dec_gammas = {0.25, 0.5};
        if (cfg.dec_p_meas.empty()) cfg.dec_p_meas = {0.25, 0.5, 0.75};
    }
    return cfg;
}

void validate_sweep_config(const SweepConfig& cfg) {
    std::string bad;
    auto flag = [&bad](const std::string& msg) {
        if (!bad.empty()) bad += "; ";
        bad += msg;
    };
    if (cfg.n_majoranas < 8 || cfg.n_majoranas > 24 || cfg.n_majoranas % 2 != 0)
        flag("n_majoranas must be even and within [8, 24]");
    if (!(cfg.j >= 0.0)) flag("j must be non-negative");
    if (!(cfg.dt > 0.0)) flag("dt must be positive");
    if (!(cfg.t_max > 0.0)) flag("t_max must be positive");
    if (cfg.record_interval < cfg.dt - 1e-12) flag("record_interval must be >= dt");
    if (cfg.runs < 1) flag("runs must be positive");
    if (cfg.batches < 1) flag("batches must be positive");
    if (uses_batches(cfg.mode) && cfg.batches >= 1 && cfg.runs >= 1 &&
        cfg.runs % cfg.batches != 0)
        flag("runs must be divisible by batches");
    if (cfg.workers < 1) flag("workers must be positive");
    if (cfg.out.empty()) flag("out must be a directory path");
    if (uses_grid(cfg.mode)) {
        if (cfg.gamma_ratio.empty()) flag("gamma_ratio axis must be nonempty");
        if (cfg.p_m.empty()) flag("p_m axis must be nonempty");
        for (std::size_t i = 0; i + 1 < cfg.gamma_ratio.size(); ++i)
            if (!(cfg.gamma_ratio[i] < cfg.gamma_ratio[i + 1])) {
                flag("gamma_ratio axis must be strictly increasing");
                break;
            }
        for (std::size_t i = 0; i + 1 < cfg.p_m.size(); ++i)
            if (!(cfg.p_m[i] < cfg.p_m[i + 1])) {
                flag("p_m axis must be strictly increasing");
                break;
            }
        for (double r : cfg.gamma_ratio)
            if (!(r >= 0.0)) {
                flag("gamma_ratio values must be non-negative");
                break;
            }
        for (double p : cfg.p_m)
            if (!(p >= 0.0 && p <= 1.0)) {
                flag("p_m values must lie in [0, 1]");
                break;
            }
        if (cfg.mode == SweepMode::trace &&
            (cfg.gamma_ratio.size() != 1 || cfg.p_m.size() != 1))
            flag("trace mode takes a single gamma_ratio and a single p_m");
    }
    if (cfg.mode == SweepMode::egr) {
        if (cfg.egr_n_values.empty()) flag("n_values must be nonempty");
        if (cfg.egr_j_values.empty()) flag("j_values must be nonempty");
        for (int n : cfg.egr_n_values)
            if (n < 8 || n > 24 || n % 2 != 0) {
                flag("n_values entries must be even and within [8, 24]");
                break;
            }
        for (double jv : cfg.egr_j_values)
            if (!(jv > 0.0)) {
                flag("j_values entries must be positive");
                break;
            }
    }
    if (cfg.mode == SweepMode::decoupling) {
        if (cfg.runs < 50) flag("runs (Haar samples per cell) must be at least 50");
        if (cfg.dec_n_systems.empty()) flag("n_systems must be nonempty");
        if (cfg.dec_gammas.empty()) flag("gammas must be nonempty");
        if (cfg.dec_p_meas.empty()) flag("p_meas must be nonempty");
        for (int n : cfg.dec_n_systems)
            for (double g : cfg.dec_gammas) {
                DecouplingSetup setup{n, g, 0.5, std::max(cfg.runs, 1)};
                try {
                    for (double p : cfg.dec_p_meas) {
                        setup.p_meas = p;
                        validate_setup(setup);
                    }
                } catch (const std::exception& e) {
                    flag(e.what());
                }
            }
    }
    if (!bad.empty()) throw std::invalid_argument("sweep config: " + bad);
}

nlohmann::json resolved_config_json(const SweepConfig& cfg) {
    // workers and out are execution details, deliberately left out so that
    // outputs are byte-identical regardless of worker count or directory
    nlohmann::json j;
    j["mode"] = mode_to_string(cfg.mode);
    j["seed"] = cfg.seed;
    j["runs"] = cfg.runs;
    if (cfg.mode == SweepMode::decoupling) {
        j["n_systems"] = cfg.dec_n_systems;
        j["gammas"] = cfg.dec_gammas;
        j["p_meas"] = cfg.dec_p_meas;
        return j;
    }
    j["n_majoranas"] = cfg.n_majoranas;
    j["j"] = cfg.j;
    j["dt"] = cfg.dt;
    j["t_max"] = cfg.t_max;
    j["record_interval"] = cfg.record_interval;
    j["batches"] = cfg.batches;
    if (uses_grid(cfg.mode)) {
        j["gamma_ratio"] = cfg.gamma_ratio;
        j["p_m"] = cfg.p_m;
    }
    if (cfg.mode == SweepMode::egr) {
        j.erase("j");
        j.erase("n_majoranas");
        j["n_values"] = cfg.egr_n_values;
        j["j_values"] = cfg.egr_j_values;
    }
    return j;
}

namespace {

TrajectoryRecord run_one(int n_majoranas, double j_strength, TrajectoryConfig cfg,
                         const std::vector<Observable>& observables, const EngineOptions& opts,
                         std::uint64_t run_seed) {
    RngStream coupling_rng(mix_seed({run_seed, 1}));
    const CouplingTensor couplings = sample_couplings(n_majoranas, j_strength, coupling_rng);
    const SpectralHamiltonian h(couplings);
    cfg.seed = mix_seed({run_seed, 2});
    return run_trajectory(h, cfg, observables, opts);
}

std::uint64_t run_seed_for(std::uint64_t master, std::uint64_t tag, std::uint64_t cell_i,
                           std::uint64_t cell_j, std::uint64_t run) {
    return mix_seed({master, tag, cell_i, cell_j, run});
}

std::vector<TrajectoryRecord> run_ensemble(int n_majoranas, double j_strength,
                                           const TrajectoryConfig& cfg,
                                           const std::vector<Observable>& observables,
                                           const EngineOptions& opts, int runs,
                                           std::uint64_t master, std::uint64_t tag,
                                           std::uint64_t cell_i, std::uint64_t cell_j,
                                           int workers) {
    std::vector<TrajectoryRecord> records(runs);
    run_indexed_tasks(std::size_t(runs), workers, [&](std::size_t r) {
        records[r] = run_one(n_majoranas, j_strength, cfg, observables, opts,
                             run_seed_for(master, tag, cell_i, cell_j, r));
    });
    return records;
}

std::vector<double> batch_mean_series(const std::vector<TrajectoryRecord>& records, int batch,
                                      int runs_per_batch, Observable which) {
    const std::size_t np = records.front().times.size();
    std::vector<double> m(np, 0.0);
    for (int r = batch * runs_per_batch; r < (batch + 1) * runs_per_batch; ++r) {
        const auto& y =
            which == Observable::half_chain_entropy ? records[r].s_half : records[r].purity_series;
        for (std::size_t i = 0; i < np; ++i) m[i] += y[i];
    }
    for (double& v : m) v /= runs_per_batch;
    return m;
}

// Sample spread of a per-batch statistic, scaled to the error of the mean.
double batch_stderr(const std::vector<double>& batch_values) {
    const std::size_t b = batch_values.size();
    if (b < 2) return std::numeric_limits<double>::quiet_NaN();
    double mean = 0.0;
    for (double v : batch_values) mean += v;
    mean /= double(b);
    double ss = 0.0;
    for (double v : batch_values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / double(b - 1) / double(b));
}

void atomic_write_file(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        f << content;
        f.flush();
        if (!f) throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

nlohmann::json series_to_json(const EnsembleSeries& s) {
    return {{"t", s.t},
            {"mean", s.mean},
            {"std_batch", s.std_batch},
            {"n_runs", s.n_runs},
            {"n_batches", s.n_batches}};
}

EnsembleSeries series_from_json(const nlohmann::json& j) {
    EnsembleSeries s;
    s.t = j.at("t").get<std::vector<double>>();
    s.mean = j.at("mean").get<std::vector<double>>();
    s.std_batch = j.at("std_batch").get<std::vector<double>>();
    s.n_runs = j.at("n_runs").get<int>();
    s.n_batches = j.at("n_batches").get<int>();
    return s;
}

using HeaderKv = std::vector<std::pair<std::string, std::string>>;

HeaderKv base_header(const SweepConfig& cfg) {
    return {{"mode", mode_to_string(cfg.mode)},
            {"config", resolved_config_json(cfg).dump()},
            {"master_seed", std::to_string(cfg.seed)}};
}

std::string series_csv_text(const EnsembleSeries& series, const HeaderKv& header) {
    std::ostringstream out;
    write_series_csv(out, series, header);
    return out.str();
}

// ---- calibration ----------------------------------------------------------

struct EgrEstimate {
    double value;
    double stderr_value;
};

EgrEstimate egr_of_ensemble(const std::vector<TrajectoryRecord>& records, int n_batches) {
    const EnsembleSeries mean = ensemble_average(records, n_batches, Observable::half_chain_entropy);
    const EgrResult grand = extract_gamma_egr(mean.t, mean.mean);
    std::vector<double> per_batch;
    const int rpb = int(records.size()) / n_batches;
    for (int b = 0; b < n_batches; ++b) {
        try {
            const auto bm = batch_mean_series(records, b, rpb, Observable::half_chain_entropy);
            per_batch.push_back(extract_gamma_egr(mean.t, bm).gamma_egr);
        } catch (const std::runtime_error&) {
            // a noisy batch may fail the plateau test; the grand value stands
        }
    }
    return {grand.gamma_egr, batch_stderr(per_batch)};
}

}  // namespace

Calibration calibrate_gamma_egr(int n_majoranas, double j, std::uint64_t master_seed, double dt,
                                int workers) {
    TrajectoryConfig cfg;
    cfg.dt = dt;
    cfg.t_max = 80.0;
    cfg.gamma_m = 0.0;
    cfg.p_m = 1.0;
    cfg.record_interval = 0.25;
    cfg.initial = InitialState::all_up;
    const auto records =
        run_ensemble(n_majoranas, j, cfg, {Observable::half_chain_entropy}, {}, 100, master_seed,
                     kSeedCalibration, 0, 0, workers);
    const EgrEstimate est = egr_of_ensemble(records, 10);
    return {est.value, est.stderr_value};
}

namespace {

// ---- grid machinery -------------------------------------------------------

struct CellSpec {
    int i, j;
    double ratio, p_m, gamma_m, dt_cell;
};

std::vector<CellSpec> make_cells(const SweepConfig& cfg, double gamma_egr) {
    std::vector<CellSpec> cells;
    for (std::size_t i = 0; i < cfg.gamma_ratio.size(); ++i)
        for (std::size_t j = 0; j < cfg.p_m.size(); ++j) {
            CellSpec c;
            c.i = int(i);
            c.j = int(j);
            c.ratio = cfg.gamma_ratio[i];
            c.p_m = cfg.p_m[j];
            c.gamma_m = c.ratio * gamma_egr;
            c.dt_cell = c.gamma_m > 0.0 ? std::min(cfg.dt, 0.1 / c.gamma_m) : cfg.dt;
            cells.push_back(c);
        }
    return cells;
}

struct GridState {
    fs::path out_dir, cells_dir, manifest_path;
    nlohmann::json config_json;
    double gamma_egr = 0.0, gamma_egr_stderr = 0.0;
    std::set<std::pair<int, int>> completed;
    std::mutex mu;

    void save_manifest_locked() {
        nlohmann::json m;
        m["config"] = config_json;
        m["gamma_egr"] = gamma_egr;
        m["gamma_egr_stderr"] = gamma_egr_stderr;
        nlohmann::json done = nlohmann::json::array();
        for (const auto& [i, j] : completed) done.push_back({i, j});
        m["completed"] = std::move(done);
        atomic_write_file(manifest_path, m.dump(2) + "\n");
    }
};

fs::path cell_path(const GridState& grid, int i, int j) {
    return grid.cells_dir / ("cell_" + std::to_string(i) + "_" + std::to_string(j) + ".json");
}

// Loads a prior manifest when present; returns false on a fresh start.
// A manifest written under a different experiment configuration is an error.
bool load_manifest(GridState& grid) {
    if (!fs::exists(grid.manifest_path)) return false;
    std::ifstream f(grid.manifest_path);
    nlohmann::json m = nlohmann::json::parse(f);
    if (m.at("config") != grid.config_json)
        throw std::runtime_error("manifest at " + grid.manifest_path.string() +
                                 " was written for a different config; use a fresh out dir");
    grid.gamma_egr = m.at("gamma_egr").get<double>();
    grid.gamma_egr_stderr = m.at("gamma_egr_stderr").get<double>();
    for (const auto& c : m.at("completed"))
        grid.completed.insert({c.at(0).get<int>(), c.at(1).get<int>()});
    return true;
}

// Runs every (cell, run, variant) task for incomplete cells; aggregate(cell,
// records_by_variant) must return the cell document to persist.
void run_grid(const SweepConfig& cfg, GridState& grid, const std::vector<CellSpec>& cells,
              int n_variants,
              const std::function<TrajectoryRecord(const CellSpec&, int variant, int run)>& one,
              const std::function<nlohmann::json(const CellSpec&,
                                                 std::vector<std::vector<TrajectoryRecord>>&)>&
                  aggregate,
              std::vector<nlohmann::json>& cell_docs) {
    std::vector<std::size_t> todo;
    for (std::size_t ci = 0; ci < cells.size(); ++ci)
        if (!grid.completed.count({cells[ci].i, cells[ci].j})) todo.push_back(ci);

    struct Open {
        std::vector<std::vector<TrajectoryRecord>> records;
        std::atomic<int> remaining;
    };
    std::vector<Open> open(todo.size());
    for (std::size_t k = 0; k < todo.size(); ++k) {
        open[k].records.assign(n_variants, std::vector<TrajectoryRecord>(cfg.runs));
        open[k].remaining = n_variants * cfg.runs;
    }

    const std::size_t per_cell = std::size_t(n_variants) * std::size_t(cfg.runs);
    run_indexed_tasks(todo.size() * per_cell, cfg.workers, [&](std::size_t task) {
        const std::size_t k = task / per_cell;
        const std::size_t rem = task % per_cell;
        const int variant = int(rem / cfg.runs);
        const int run = int(rem % cfg.runs);
        const CellSpec& cell = cells[todo[k]];
        open[k].records[variant][run] = one(cell, variant, run);
        if (open[k].remaining.fetch_sub(1) == 1) {
            nlohmann::json doc = aggregate(cell, open[k].records);
            open[k].records.clear();
            atomic_write_file(cell_path(grid, cell.i, cell.j), doc.dump() + "\n");
            cell_docs[todo[k]] = std::move(doc);
            std::lock_guard lock(grid.mu);
            grid.completed.insert({cell.i, cell.j});
            grid.save_manifest_locked();
        }
    });

    for (std::size_t ci = 0; ci < cells.size(); ++ci) {
        if (!cell_docs[ci].is_null()) continue;
        std::ifstream f(cell_path(grid, cells[ci].i, cells[ci].j));
        if (!f)
            throw std::runtime_error("missing cell file for completed cell " +
                                     cell_path(grid, cells[ci].i, cells[ci].j).string());
        cell_docs[ci] = nlohmann::json::parse(f);
    }
}

TrajectoryConfig cell_trajectory_config(const SweepConfig& cfg, const CellSpec& cell) {
    TrajectoryConfig tc;
    tc.dt = cell.dt_cell;
    tc.t_max = cfg.t_max;
    tc.gamma_m = cell.gamma_m;
    tc.p_m = cell.p_m;
    tc.record_interval = cfg.record_interval;
    return tc;
}

nlohmann::json cell_doc_common(const CellSpec& cell) {
    return {{"cell", {cell.i, cell.j}}, {"gamma_ratio", cell.ratio}, {"p_m", cell.p_m},
            {"gamma_m", cell.gamma_m},  {"dt", cell.dt_cell}};
}

HeaderKv calibrated_header(const SweepConfig& cfg, const GridState& grid) {
    HeaderKv h = base_header(cfg);
    h.emplace_back("gamma_egr", g9(grid.gamma_egr));
    h.emplace_back("gamma_egr_stderr", g9(grid.gamma_egr_stderr));
    return h;
}

// ---- per-mode drivers -----------------------------------------------------

std::vector<std::string> run_growth(const SweepConfig& cfg) {
    TrajectoryConfig tc;
    tc.dt = cfg.dt;
    tc.t_max = cfg.t_max;
    tc.gamma_m = 0.0;
    tc.p_m = 1.0;
    tc.record_interval = cfg.record_interval;
    const auto records =
        run_ensemble(cfg.n_majoranas, cfg.j, tc, {Observable::half_chain_entropy}, {}, cfg.runs,
                     cfg.seed, kSeedGrowth, 0, 0, cfg.workers);
    const auto series = ensemble_average(records, cfg.batches, Observable::half_chain_entropy);
    atomic_write_file(fs::path(cfg.out) / "growth.csv", series_csv_text(series, base_header(cfg)));
    return {"growth.csv"};
}

std::vector<std::string> run_egr(const SweepConfig& cfg) {
    struct Row {
        int n;
        double j, value, stderr_value;
    };
    std::vector<Row> rows(cfg.egr_n_values.size() * cfg.egr_j_values.size());
    for (std::size_t ni = 0; ni < cfg.egr_n_values.size(); ++ni) {
        for (std::size_t ji = 0; ji < cfg.egr_j_values.size(); ++ji) {
            const int n = cfg.egr_n_values[ni];
            const double jv = cfg.egr_j_values[ji];
            TrajectoryConfig tc;
            tc.dt = cfg.dt;
            tc.t_max = cfg.t_max;
            tc.gamma_m = 0.0;
            tc.p_m = 1.0;
            tc.record_interval = cfg.record_interval;
            const auto records =
                run_ensemble(n, jv, tc, {Observable::half_chain_entropy}, {}, cfg.runs, cfg.seed,
                             kSeedEgr, ni, ji, cfg.workers);
            const EgrEstimate est = egr_of_ensemble(records, cfg.batches);
            rows[ni * cfg.egr_j_values.size() + ji] = {n, jv, est.value, est.stderr_value};
        }
    }
    std::ostringstream out;
    for (const auto& [k, v] : base_header(cfg)) out << "# " << k << ": " << v << "\n";
    out << "n_majoranas,j,gamma_egr,stderr\n";
    for (const auto& r : rows)
        out << r.n << ',' << g9(r.j) << ',' << g9(r.value) << ',' << g9(r.stderr_value) << "\n";
    atomic_write_file(fs::path(cfg.out) / "egr.csv", out.str());
    return {"egr.csv"};
}

// Grid modes share the calibration + manifest + task-pool plumbing and
// differ in the per-cell ensembles and the aggregation payload.
std::vector<std::string> run_grid_mode(const SweepConfig& cfg) {
    GridState grid;
    grid.out_dir = cfg.out;
    grid.cells_dir = grid.out_dir / (mode_to_string(cfg.mode) + "_cells");
    grid.manifest_path = grid.out_dir / (mode_to_string(cfg.mode) + "_manifest.json");
    grid.config_json = resolved_config_json(cfg);
    fs::create_directories(grid.cells_dir);

    if (!load_manifest(grid)) {
        const Calibration cal =
            calibrate_gamma_egr(cfg.n_majoranas, cfg.j, cfg.seed, cfg.dt, cfg.workers);
        grid.gamma_egr = cal.gamma_egr;
        grid.gamma_egr_stderr = cal.stderr_egr;
        std::lock_guard lock(grid.mu);
        grid.save_manifest_locked();
    }

    const std::vector<CellSpec> cells = make_cells(cfg, grid.gamma_egr);
    std::vector<nlohmann::json> docs(cells.size());
    const long dim = 1L << (cfg.n_majoranas / 2);

    const bool dynamics = cfg.mode == SweepMode::dynamics;
    const bool entanglement_side = dynamics || cfg.mode == SweepMode::phase_entanglement;
    const int n_variants = dynamics ? 2 : 1;
    // variant 0 carries the mode's primary ensemble; dynamics adds purity as 1
    const bool v0_is_entropy = entanglement_side;

    auto one = [&](const CellSpec& cell, int variant, int run) {
        TrajectoryConfig tc = cell_trajectory_config(cfg, cell);
        const bool entropy = v0_is_entropy && variant == 0;
        std::uint64_t tag;
        if (dynamics)
            tag = variant == 0 ? kSeedDynamicsEntropy : kSeedDynamicsPurity;
        else if (cfg.mode == SweepMode::phase_entanglement)
            tag = kSeedPhaseEntanglement;
        else if (cfg.mode == SweepMode::phase_purification)
            tag = kSeedPhasePurification;
        else
            tag = kSeedRateFit;
        tc.initial = entropy ? InitialState::all_up : InitialState::maximally_mixed;
        EngineOptions opts;
        opts.stop_when_pure = !entropy;
        return run_one(cfg.n_majoranas, cfg.j, tc,
                       {entropy ? Observable::half_chain_entropy : Observable::purity}, opts,
                       run_seed_for(cfg.seed, tag, cell.i, cell.j, run));
    };

    auto aggregate = [&](const CellSpec& cell,
                         std::vector<std::vector<TrajectoryRecord>>& recs) -> nlohmann::json {
        nlohmann::json doc = cell_doc_common(cell);
        const int rpb = cfg.runs / cfg.batches;
        if (dynamics) {
            doc["entropy"] = series_to_json(
                ensemble_average(recs[0], cfg.batches, Observable::half_chain_entropy));
            doc["purity"] =
                series_to_json(ensemble_average(recs[1], cfg.batches, Observable::purity));
            return doc;
        }
        const Observable which =
            v0_is_entropy ? Observable::half_chain_entropy : Observable::purity;
        const EnsembleSeries series = ensemble_average(recs[0], cfg.batches, which);
        doc["series"] = series_to_json(series);
        if (cfg.mode == SweepMode::rate_fit) {
            const FitResult fit =
                tanh_fit(series.t, series.mean, dim, 10.0 * std::max(cell.gamma_m, 0.0));
            doc["fit"] = fit_to_json(fit);
        } else {
            doc["steady_value"] = steady_state_value(series.t, series.mean, cfg.t_max);
            std::vector<double> per_batch;
            for (int b = 0; b < cfg.batches; ++b) {
                const auto bm = batch_mean_series(recs[0], b, rpb, which);
                per_batch.push_back(steady_state_value(series.t, bm, cfg.t_max));
            }
            doc["stderr"] = batch_stderr(per_batch);
        }
        return doc;
    };

    run_grid(cfg, grid, cells, n_variants, one, aggregate, docs);

    // final artifacts, assembled in fixed cell order from the cell documents
    std::vector<std::string> written;
    const HeaderKv header = calibrated_header(cfg, grid);
    if (dynamics) {
        for (std::size_t ci = 0; ci < cells.size(); ++ci) {
            HeaderKv h = header;
            h.emplace_back("gamma_ratio", g9(cells[ci].ratio));
            h.emplace_back("p_m", g9(cells[ci].p_m));
            h.emplace_back("gamma_m", g9(cells[ci].gamma_m));
            for (const char* part : {"entropy", "purity"}) {
                const std::string name = "dynamics_" + std::string(part) + "_" +
                                         std::to_string(cells[ci].i) + "_" +
                                         std::to_string(cells[ci].j) + ".csv";
                atomic_write_file(grid.out_dir / name,
                                  series_csv_text(series_from_json(docs[ci].at(part)), h));
                written.push_back(name);
            }
        }
        return written;
    }

    std::ostringstream out;
    for (const auto& [k, v] : header) out << "# " << k << ": " << v << "\n";
    std::string name;
    if (cfg.mode == SweepMode::rate_fit) {
        name = "rate_fit.csv";
        out << "gamma_ratio,p_m,lambda,r_squared\n";
        for (std::size_t ci = 0; ci < cells.size(); ++ci)
            out << g9(cells[ci].ratio) << ',' << g9(cells[ci].p_m) << ','
                << g9(docs[ci].at("fit").at("lambda").get<double>()) << ','
                << g9(docs[ci].at("fit").at("r_squared").get<double>()) << "\n";
    } else {
        name = cfg.mode == SweepMode::phase_entanglement ? "phase_entanglement.csv"
                                                         : "phase_purification.csv";
        out << "gamma_ratio,p_m,steady_value,stderr\n";
        for (std::size_t ci = 0; ci < cells.size(); ++ci)
            out << g9(cells[ci].ratio) << ',' << g9(cells[ci].p_m) << ','
                << g9(docs[ci].at("steady_value").get<double>()) << ','
                << g9(docs[ci].at("stderr").get<double>()) << "\n";
    }
    atomic_write_file(grid.out_dir / name, out.str());
    written.push_back(name);
    return written;
}

std::vector<std::string> run_trace(const SweepConfig& cfg) {
    const Calibration cal =
        calibrate_gamma_egr(cfg.n_majoranas, cfg.j, cfg.seed, cfg.dt, cfg.workers);
    const double gamma_m = cfg.gamma_ratio.front() * cal.gamma_egr;
    const double dt_cell = gamma_m > 0.0 ? std::min(cfg.dt, 0.1 / gamma_m) : cfg.dt;

    std::vector<std::string> written;
    std::vector<nlohmann::json> outputs(std::size_t(cfg.runs) * 2);
    run_indexed_tasks(outputs.size(), cfg.workers, [&](std::size_t task) {
        const int run = int(task / 2);
        const bool entropy = task % 2 == 0;
        TrajectoryConfig tc;
        tc.dt = dt_cell;
        tc.t_max = cfg.t_max;
        tc.gamma_m = gamma_m;
        tc.p_m = cfg.p_m.front();
        tc.record_interval = cfg.record_interval;
        tc.initial = entropy ? InitialState::all_up : InitialState::maximally_mixed;
        EngineOptions opts;
        opts.record_event_observables = true;
        const auto rec = run_one(
            cfg.n_majoranas, cfg.j, tc,
            {entropy ? Observable::half_chain_entropy : Observable::purity}, opts,
            run_seed_for(cfg.seed, entropy ? kSeedTraceEntropy : kSeedTracePurity, 0, 0, run));
        nlohmann::json doc;
        doc["config"] = resolved_config_json(cfg);
        doc["master_seed"] = cfg.seed;
        doc["gamma_egr"] = cal.gamma_egr;
        doc["gamma_egr_stderr"] = cal.stderr_egr;
        doc["gamma_m"] = gamma_m;
        doc["record"] = record_to_json(rec);
        outputs[task] = std::move(doc);
    });
    for (std::size_t task = 0; task < outputs.size(); ++task) {
        const std::string name = std::string("trace_") + (task % 2 == 0 ? "entropy" : "purity") +
                                 "_" + std::to_string(task / 2) + ".json";
        atomic_write_file(fs::path(cfg.out) / name, outputs[task].dump(2) + "\n");
        written.push_back(name);
    }
    return written;
}

std::vector<std::string> run_decoupling(const SweepConfig& cfg) {
    const auto cells = scaling_scan(cfg.dec_n_systems, cfg.dec_gammas, cfg.dec_p_meas, cfg.runs,
                                    mix_seed({cfg.seed, kSeedDecoupling}), cfg.workers);
    std::ostringstream out;
    write_decoupling_csv(out, cells, base_header(cfg));
    atomic_write_file(fs::path(cfg.out) / "decoupling.csv", out.str());
    return {"decoupling.csv"};
}

}  // namespace

std::vector<std::string> run_mode(const SweepConfig& raw) {
    const SweepConfig cfg = resolve_defaults(raw);
    validate_sweep_config(cfg);
    fs::create_directories(cfg.out);
    switch (cfg.mode) {
        case SweepMode::growth: return run_growth(cfg);
        case SweepMode::egr: return run_egr(cfg);
        case SweepMode::dynamics:
        case SweepMode::phase_entanglement:
        case SweepMode::phase_purification:
        case SweepMode::rate_fit: return run_grid_mode(cfg);
        case SweepMode::trace: return run_trace(cfg);
        case SweepMode::decoupling: return run_decoupling(cfg);
    }
    throw std::logic_error("unhandled mode");
}

}  // namespace syk
