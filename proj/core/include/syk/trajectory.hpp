#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <vector>

#include "syk/hamiltonian.hpp"
#include "syk/quantum_state.hpp"
#include "syk/rng.hpp"

namespace syk {

enum class InitialState { all_up, maximally_mixed };
enum class Observable { half_chain_entropy, purity };

struct TrajectoryConfig {
    double dt = 0.05;
    double t_max = 0.0;
    double gamma_m = 0.0;        // measurement rate; per-step probability is gamma_m * dt
    double p_m = 1.0;            // per-site inclusion probability at an event
    double record_interval = 1.0;
    InitialState initial = InitialState::all_up;
    std::uint64_t seed = 0;
};

// Throws with every violated field listed. Enforces dt > 0, t_max >= 0,
// gamma_m >= 0, gamma_m * dt <= 0.1, p_m in [0, 1], record_interval >= dt.
void validate_config(const TrajectoryConfig& cfg);

struct MeasurementEvent {
    double t = 0.0;
    std::vector<int> sites;     // ascending 1-based; empty = no-op event
    std::vector<int> outcomes;  // aligned with sites; 1 means sigma_z = +1
};

// Observable sampled just before and just after an event's projection.
struct JumpSample {
    double t = 0.0;
    double before = 0.0;
    double after = 0.0;
};

struct TrajectoryRecord {
    std::uint64_t seed = 0;
    int n_majoranas = 0;
    double j_strength = 0.0;
    TrajectoryConfig config;
    std::vector<MeasurementEvent> events;
    std::vector<double> times;           // uniform record grid, starts at t = 0
    std::vector<double> s_half;          // filled iff half_chain_entropy requested
    std::vector<double> purity_series;   // filled iff purity requested
    std::vector<JumpSample> event_observables;  // filled iff jump sampling enabled
};

struct EngineOptions {
    // Record the leading observable at event boundaries (jump traces).
    bool record_event_observables = false;
    // Mixed runs: once purity reaches 1 - 1e-9 the remaining grid is filled
    // with 1 and no further dynamics is simulated. Projective measurements
    // and unitaries keep a pure state pure, so recorded data is unaffected.
    bool stop_when_pure = false;
};

// One Bernoulli(r_m) scheduling decision (Poisson clock on the dt grid).
bool schedule_step(RngStream& rng, double r_m);

// Each site included independently with probability p_m; ascending result.
// The induced count distribution is Binomial(n_sites, p_m).
std::vector<int> sample_measured_sites(RngStream& rng, int n_sites, double p_m);

// Projective sigma_z measurement with conditional Born sampling, site by
// site in ascending order, then one renormalization. Works on pure or mixed
// states in the computational basis and modifies the state in place.
// Returns outcomes aligned with sites (1 = the +1 eigenstate |1>).
// A surviving branch weight below 1e-14 raises a degeneracy error.
std::vector<int> project(QuantumState& state, const std::vector<int>& sites, RngStream& rng);

// Monitored evolution: unitary propagation on the dt grid with measurement
// events scheduled per step (unitary first, then measure), exact spectral
// propagation between interruptions, observables on the record grid.
// Records at a grid time coinciding with an event are taken pre-measurement.
TrajectoryRecord run_trajectory(const SpectralHamiltonian& h, const TrajectoryConfig& cfg,
                                const std::vector<Observable>& observables,
                                const EngineOptions& opts = {});

nlohmann::json record_to_json(const TrajectoryRecord& r);
TrajectoryRecord record_from_json(const nlohmann::json& j);

}  // namespace syk
