#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace syk {

enum class SweepMode {
    growth,
    egr,
    dynamics,
    phase_entanglement,
    phase_purification,
    rate_fit,
    trace,
    decoupling,
};

SweepMode mode_from_string(const std::string& name);  // hyphenated names, e.g. "rate-fit"
std::string mode_to_string(SweepMode mode);

// Axis specs: a single number "0.25", a list "0.25,1,5", or a range
// "lin:0.1:1.0:10" / "log:0.05:20:10" (inclusive endpoints, n points).
std::vector<double> parse_axis(const std::string& text);

struct SweepConfig {
    SweepMode mode = SweepMode::growth;
    int n_majoranas = 16;
    double j = 1.0;
    std::vector<double> gamma_ratio;  // empty: mode default log:0.05:20:10
    std::vector<double> p_m;          // empty: mode default lin:0.1:1.0:10
    double dt = 0.05;                 // base step; each cell uses min(dt, 0.1/gamma_m)
    double t_max = -1.0;              // < 0: mode default (80 growth/egr, 200
                                      // entanglement-side, 1000 purification-side)
    double record_interval = -1.0;    // < 0: mode default (0.25 or 1.0)
    int runs = 50;
    int batches = 10;
    std::uint64_t seed = 12345;
    int workers = 1;
    std::string out = "out";
    // egr mode sweeps these lists ("n_values"/"j_values"; an explicit --j or
    // --n-majoranas collapses the matching list to that single value)
    std::vector<int> egr_n_values;     // default {12, 16}
    std::vector<double> egr_j_values;  // default {0.5, 1, 2, 3}
    // decoupling mode grid ("n_systems"/"gammas"/"p_meas")
    std::vector<int> dec_n_systems;    // default {4, 6, 8}
    std::vector<double> dec_gammas;    // default {0.25, 0.5}
    std::vector<double> dec_p_meas;    // default {0.25, 0.5, 0.75}
};

// Strict parse of the config document: unknown keys or ill-typed values
// throw with every offending field listed.
SweepConfig config_from_json(const nlohmann::json& doc);

// Fills the mode-dependent defaults (axes, t_max, record_interval).
SweepConfig resolve_defaults(SweepConfig cfg);

// Collects every violated field into a single error.
void validate_sweep_config(const SweepConfig& cfg);

// The fully resolved configuration embedded into every output file.
nlohmann::json resolved_config_json(const SweepConfig& cfg);

struct Calibration {
    double gamma_egr;
    double stderr_egr;
};

// Measures the unmonitored entanglement growth rate at (N, J) over a fresh
// 100-run, 10-batch ensemble seeded from master_seed: the value comes from
// the grand-mean series, the error from the spread of per-batch extractions.
Calibration calibrate_gamma_egr(int n_majoranas, double j, std::uint64_t master_seed, double dt,
                                int workers);

// Executes the configured mode and writes its outputs under cfg.out.
// Monitored modes scale gamma_m = ratio * gamma_egr with a calibration pass
// whose result lands in every output header. Grid modes keep a per-cell
// completion manifest so an interrupted sweep resumes, and their outputs are
// byte-identical for a given config + seed regardless of worker count.
// Returns the files written, relative to cfg.out.
std::vector<std::string> run_mode(const SweepConfig& cfg);

}  // namespace syk
