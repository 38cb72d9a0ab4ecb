// Command-line front end: one sweep mode per invocation, configured by a
// JSON file and/or flags (flags win), outputs written under --out.
#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>

#include <nlohmann/json.hpp>

#include "syk/sweep.hpp"

namespace {

constexpr const char* kUsage = R"(usage: syk_mipt [--config FILE] [flags]

  --config FILE        JSON config mirroring the flags below; flags override
  --mode MODE          growth | egr | dynamics | phase-entanglement |
                       phase-purification | rate-fit | trace | decoupling
  --n-majoranas N      even Majorana count in [8, 24] (default 16)
  --j J                coupling strength (default 1.0)
  --gamma-ratio AXIS   measurement rate over the calibrated growth rate;
                       a value, a comma list, or lin:a:b:n / log:a:b:n
  --p-m AXIS           per-site measurement probability axis
  --dt DT              integration step (default 0.05, auto-tightened per cell)
  --t-max T            simulated time per trajectory (mode default)
  --record-interval R  observable sampling period (mode default)
  --runs R             trajectories per cell / Haar samples (default 50)
  --batches B          batches for error bars; must divide runs (default 10)
  --seed S             master seed (default 12345)
  --workers W          worker threads (default 1)
  --out DIR            output directory (default "out")

Config-file-only keys: n_values/j_values (egr), n_systems/gammas/p_meas
(decoupling). Grid modes keep a completion manifest under --out and resume
interrupted sweeps when re-run with the same config and seed.
)";

int fail(const std::string& msg) {
    std::cerr << "error: " << msg << "\n";
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    std::string config_path;
    nlohmann::json flags = nlohmann::json::object();

    // flag table: CLI name -> (config key, value kind)
    const struct {
        const char* flag;
        const char* key;
        char kind;  // s = string, i = integer, f = float, a = axis string
    } table[] = {
        {"--mode", "mode", 's'},          {"--n-majoranas", "n_majoranas", 'i'},
        {"--j", "j", 'f'},                {"--gamma-ratio", "gamma_ratio", 'a'},
        {"--p-m", "p_m", 'a'},            {"--dt", "dt", 'f'},
        {"--t-max", "t_max", 'f'},        {"--record-interval", "record_interval", 'f'},
        {"--runs", "runs", 'i'},          {"--batches", "batches", 'i'},
        {"--seed", "seed", 'u'},          {"--workers", "workers", 'i'},
        {"--out", "out", 's'},
    };

    for (int a = 1; a < argc; ++a) {
        const std::string arg = argv[a];
        if (arg == "--help" || arg == "-h") {
            std::cout << kUsage;
            return 0;
        }
        const bool has_value = a + 1 < argc;
        if (arg == "--config") {
            if (!has_value) return fail("--config needs a file path");
            config_path = argv[++a];
            continue;
        }
        bool matched = false;
        for (const auto& row : table) {
            if (arg != row.flag) continue;
            matched = true;
            if (!has_value) return fail(arg + " needs a value");
            const std::string value = argv[++a];
            try {
                switch (row.kind) {
                    case 's':
                    case 'a': flags[row.key] = value; break;
                    case 'i': flags[row.key] = std::stoi(value); break;
                    case 'u': flags[row.key] = std::stoull(value); break;
                    case 'f': flags[row.key] = std::stod(value); break;
                }
            } catch (const std::exception&) {
                return fail(arg + ": cannot parse '" + value + "'");
            }
            break;
        }
        if (!matched) return fail("unknown flag '" + arg + "' (see --help)");
    }

    try {
        nlohmann::json doc = nlohmann::json::object();
        if (!config_path.empty()) {
            std::ifstream f(config_path);
            if (!f) return fail("cannot open config file " + config_path);
            doc = nlohmann::json::parse(f);
        }
        for (const auto& [key, value] : flags.items()) doc[key] = value;

        const syk::SweepConfig cfg = syk::config_from_json(doc);
        const auto written = syk::run_mode(cfg);
        for (const auto& name : written) std::cout << "wrote " << cfg.out << "/" << name << "\n";
        return 0;
    } catch (const std::exception& e) {
        return fail(e.what());
    }
}
