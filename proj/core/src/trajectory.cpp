#include "syk/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "syk/observables.hpp"

namespace syk {

void validate_config(const TrajectoryConfig& cfg) {
    std::string bad;
    auto flag = [&bad](const std::string& msg) {
        if (!bad.empty()) bad += "; ";
        bad += msg;
    };
    if (!(cfg.dt > 0.0)) flag("dt must be positive");
    if (!(cfg.t_max >= 0.0)) flag("t_max must be non-negative");
    if (!(cfg.gamma_m >= 0.0)) flag("gamma_m must be non-negative");
    if (cfg.gamma_m * cfg.dt > 0.1 + 1e-12) flag("gamma_m * dt must not exceed 0.1");
    if (!(cfg.p_m >= 0.0 && cfg.p_m <= 1.0)) flag("p_m must lie in [0, 1]");
    if (cfg.record_interval < cfg.dt - 1e-12) flag("record_interval must be >= dt");
    if (!bad.empty()) throw std::invalid_argument("trajectory config: " + bad);
}

bool schedule_step(RngStream& rng, double r_m) { return rng.uniform() < r_m; }

std::vector<int> sample_measured_sites(RngStream& rng, int n_sites, double p_m) {
    std::vector<int> sites;
    for (int s = 1; s <= n_sites; ++s)
        if (rng.uniform() < p_m) sites.push_back(s);
    return sites;
}

namespace {

// Site s of n occupies state-index bit n - s (site 1 most significant).
inline long site_bit(int n_qubits, int site) { return 1L << (n_qubits - site); }

}  // namespace

std::vector<int> project(QuantumState& state, const std::vector<int>& sites, RngStream& rng) {
    if (state.basis != StateBasis::computational)
        throw std::invalid_argument("project: state must be in the computational basis");
    if (sites.empty()) throw std::invalid_argument("project: empty site list");
    const long d = state.dim();
    std::vector<int> outcomes;
    outcomes.reserve(sites.size());

    if (state.kind == StateKind::pure) {
        double w = state.amps.squaredNorm();
        for (int s : sites) {
            const long bit = site_bit(state.n_qubits, s);
            double p_up = 0.0;  // weight of the sigma_z = +1 branch (index bit clear)
            for (long b = 0; b < d; ++b)
                if (!(b & bit)) p_up += std::norm(state.amps(b));
            int outcome = rng.uniform() < p_up / w ? 1 : 0;
            outcomes.push_back(outcome);
            for (long b = 0; b < d; ++b)
                if (((b & bit) != 0) == (outcome == 1)) state.amps(b) = 0.0;
            w = outcome == 1 ? p_up : w - p_up;
        }
        double norm2 = state.amps.squaredNorm();
        if (norm2 < 1e-14) throw std::runtime_error("project: branch weight below 1e-14");
        state.amps /= std::sqrt(norm2);
    } else {
        double w = state.rho.trace().real();
        for (int s : sites) {
            const long bit = site_bit(state.n_qubits, s);
            double p_up = 0.0;
            for (long b = 0; b < d; ++b)
                if (!(b & bit)) p_up += state.rho(b, b).real();
            int outcome = rng.uniform() < p_up / w ? 1 : 0;
            outcomes.push_back(outcome);
            for (long b = 0; b < d; ++b) {
                if (((b & bit) != 0) == (outcome == 1)) {
                    state.rho.row(b).setZero();
                    state.rho.col(b).setZero();
                }
            }
            w = outcome == 1 ? p_up : w - p_up;
        }
        double tr = state.rho.trace().real();
        if (tr < 1e-14) throw std::runtime_error("project: branch weight below 1e-14");
        state.rho /= tr;
    }
    return outcomes;
}

namespace {

// Run state for the engine: the state lives in the energy eigenbasis
// and is materialized only at events and (for pure runs) at record points.
struct PureEngine {
    const SpectralHamiltonian& h;
    Eigen::VectorXcd psi_e;
    double t_state = 0.0;

    explicit PureEngine(const SpectralHamiltonian& ham) : h(ham) {
        Eigen::VectorXcd psi0 = Eigen::VectorXcd::Zero(ham.dim());
        psi0(0) = 1.0;  // |1...1>
        psi_e = ham.eigenvectors().adjoint() * psi0;
    }

    void advance(double t) {
        double delta = t - t_state;
        if (delta == 0.0) return;
        const auto& e = h.eigenvalues();
        for (long k = 0; k < psi_e.size(); ++k)
            psi_e(k) *= std::polar(1.0, -e(k) * delta);
        t_state = t;
    }

    Eigen::VectorXcd materialize() const { return h.eigenvectors() * psi_e; }
};

struct MixedEngine {
    const SpectralHamiltonian& h;
    Eigen::MatrixXcd rho_e;
    double t_state = 0.0;
    double purity_now;

    explicit MixedEngine(const SpectralHamiltonian& ham) : h(ham) {
        const long d = ham.dim();
        rho_e = Eigen::MatrixXcd::Identity(d, d) / double(d);
        purity_now = 1.0 / double(d);
    }

    void advance(double t) {
        double delta = t - t_state;
        if (delta == 0.0) return;
        const long d = rho_e.rows();
        Eigen::VectorXcd ph(d);
        const auto& e = h.eigenvalues();
        for (long k = 0; k < d; ++k) ph(k) = std::polar(1.0, -e(k) * delta);
        rho_e = ph.asDiagonal() * rho_e;
        rho_e = rho_e * ph.conjugate().asDiagonal();
        t_state = t;
    }

    // Computational-basis diagonal of rho, used for Born sampling.
    Eigen::VectorXd comp_diagonal() const {
        const Eigen::MatrixXcd m = h.eigenvectors() * rho_e;
        return m.cwiseProduct(h.eigenvectors().conjugate()).rowwise().sum().real();
    }

    // Projects onto the computational-basis subspace selected by `keep`,
    // renormalizes, and rotates back, all in one restricted sandwich.
    void project_support(const std::vector<long>& keep) {
        const long d = rho_e.rows();
        const long ns = long(keep.size());
        Eigen::MatrixXcd vs(ns, d);
        for (long r = 0; r < ns; ++r) vs.row(r) = h.eigenvectors().row(keep[r]);
        Eigen::MatrixXcd a = vs * rho_e;
        Eigen::MatrixXcd b = a * vs.adjoint();
        double w = b.trace().real();
        if (w < 1e-14) throw std::runtime_error("project: branch weight below 1e-14");
        b /= w;
        rho_e.noalias() = vs.adjoint() * b * vs;
        rho_e = 0.5 * (rho_e + rho_e.adjoint().eval());  // hygiene
        purity_now = rho_e.squaredNorm();
    }
};

}  // namespace

TrajectoryRecord run_trajectory(const SpectralHamiltonian& h, const TrajectoryConfig& cfg,
                                const std::vector<Observable>& observables,
                                const EngineOptions& opts) {
    validate_config(cfg);
    const int nq = h.n_qubits();
    const long d = h.dim();
    bool want_entropy = false, want_purity = false;
    for (Observable o : observables) {
        if (o == Observable::half_chain_entropy) want_entropy = true;
        if (o == Observable::purity) want_purity = true;
    }
    if (want_entropy && cfg.initial != InitialState::all_up)
        throw std::invalid_argument("run_trajectory: entropy requires a pure initial state");

    TrajectoryRecord rec;
    rec.seed = cfg.seed;
    rec.n_majoranas = h.n_majoranas();
    rec.j_strength = h.j_strength();
    rec.config = cfg;

    RngStream rng(cfg.seed);
    const double r_m = cfg.gamma_m * cfg.dt;
    const bool pure_run = cfg.initial == InitialState::all_up;
    const int cut = nq / 2;

    PureEngine pure(h);
    MixedEngine mixed(h);

    auto entropy_of = [&](const Eigen::VectorXcd& psi_c) {
        QuantumState tmp;
        tmp.kind = StateKind::pure;
        tmp.basis = StateBasis::computational;
        tmp.n_qubits = nq;
        tmp.amps = psi_c;
        return entanglement_entropy(tmp, cut).density;
    };

    long next_record = 0;
    auto do_record = [&](double t) {
        rec.times.push_back(t);
        if (pure_run) {
            pure.advance(t);
            if (want_entropy) rec.s_half.push_back(entropy_of(pure.materialize()));
            if (want_purity) rec.purity_series.push_back(1.0);
        } else {
            // purity is unitarily invariant: no need to advance between events
            if (want_purity) rec.purity_series.push_back(mixed.purity_now);
        }
    };

    const long n_steps = cfg.dt > 0.0 ? llround(std::ceil(cfg.t_max / cfg.dt - 1e-9)) : 0;
    auto record_time = [&](long j) { return double(j) * cfg.record_interval; };
    bool stopped = false;

    for (long k = 1; k <= n_steps && !stopped; ++k) {
        const double t_k = double(k) * cfg.dt;
        while (record_time(next_record) <= std::min(t_k, cfg.t_max) + 1e-9) {
            do_record(record_time(next_record));
            ++next_record;
        }
        if (!schedule_step(rng, r_m)) continue;

        std::vector<int> sites = sample_measured_sites(rng, nq, cfg.p_m);
        MeasurementEvent ev;
        ev.t = t_k;
        ev.sites = sites;
        if (sites.empty()) {
            rec.events.push_back(std::move(ev));
            continue;
        }

        if (pure_run) {
            pure.advance(t_k);
            QuantumState s;
            s.kind = StateKind::pure;
            s.basis = StateBasis::computational;
            s.n_qubits = nq;
            s.amps = pure.materialize();
            double before = 0.0;
            if (opts.record_event_observables)
                before = want_entropy ? entropy_of(s.amps) : 1.0;
            ev.outcomes = project(s, sites, rng);
            if (opts.record_event_observables) {
                double after = want_entropy ? entropy_of(s.amps) : 1.0;
                rec.event_observables.push_back({t_k, before, after});
            }
            pure.psi_e = h.eigenvectors().adjoint() * s.amps;
            double drift = std::abs(pure.psi_e.squaredNorm() - 1.0);
            if (drift > 1e-10)
                throw std::runtime_error("run_trajectory: norm drift " + std::to_string(drift) +
                                         " at t=" + std::to_string(t_k) + ", event " +
                                         std::to_string(rec.events.size()));
        } else {
            mixed.advance(t_k);
            const double purity_before = mixed.purity_now;
            Eigen::VectorXd g = mixed.comp_diagonal();
            // conditional Born sampling, ascending sites, from the diagonal
            std::vector<char> alive(d, 1);
            double w = 0.0;
            for (long b = 0; b < d; ++b) w += g(b);
            for (int s : sites) {
                const long bit = 1L << (nq - s);
                double p_up = 0.0;
                for (long b = 0; b < d; ++b)
                    if (alive[b] && !(b & bit)) p_up += std::max(g(b), 0.0);
                int outcome = rng.uniform() < p_up / w ? 1 : 0;
                ev.outcomes.push_back(outcome);
                for (long b = 0; b < d; ++b)
                    if (((b & bit) != 0) == (outcome == 1)) alive[b] = 0;
                w = outcome == 1 ? p_up : std::max(w - p_up, 0.0);
            }
            std::vector<long> keep;
            keep.reserve(d);
            for (long b = 0; b < d; ++b)
                if (alive[b]) keep.push_back(b);
            mixed.project_support(keep);
            double tr_err = std::abs(mixed.rho_e.trace().real() - 1.0);
            if (tr_err > 1e-10)
                throw std::runtime_error("run_trajectory: trace drift " + std::to_string(tr_err) +
                                         " at t=" + std::to_string(t_k) + ", event " +
                                         std::to_string(rec.events.size()));
            if (opts.record_event_observables)
                rec.event_observables.push_back({t_k, purity_before, mixed.purity_now});
            if (opts.stop_when_pure && mixed.purity_now >= 1.0 - 1e-9) stopped = true;
        }
        rec.events.push_back(std::move(ev));
    }

    while (record_time(next_record) <= cfg.t_max + 1e-9) {
        if (stopped)
            rec.times.push_back(record_time(next_record)),
                rec.purity_series.push_back(1.0);
        else
            do_record(record_time(next_record));
        ++next_record;
    }
    return rec;
}

namespace {

std::string initial_name(InitialState s) {
    return s == InitialState::all_up ? "all_up" : "maximally_mixed";
}

InitialState initial_from_name(const std::string& n) {
    if (n == "all_up") return InitialState::all_up;
    if (n == "maximally_mixed") return InitialState::maximally_mixed;
    throw std::invalid_argument("unknown initial state: " + n);
}

}  // namespace

nlohmann::json record_to_json(const TrajectoryRecord& r) {
    nlohmann::json j;
    j["seed"] = r.seed;
    j["config"] = {{"n_majoranas", r.n_majoranas},
                   {"j_strength", r.j_strength},
                   {"dt", r.config.dt},
                   {"t_max", r.config.t_max},
                   {"gamma_m", r.config.gamma_m},
                   {"p_m", r.config.p_m},
                   {"record_interval", r.config.record_interval},
                   {"initial", initial_name(r.config.initial)}};
    nlohmann::json evs = nlohmann::json::array();
    for (const auto& e : r.events)
        evs.push_back({{"t", e.t}, {"sites", e.sites}, {"outcomes", e.outcomes}});
    j["events"] = std::move(evs);
    nlohmann::json series;
    series["t"] = r.times;
    if (!r.s_half.empty()) series["s_half"] = r.s_half;
    if (!r.purity_series.empty()) series["purity"] = r.purity_series;
    j["series"] = std::move(series);
    if (!r.event_observables.empty()) {
        nlohmann::json jumps = nlohmann::json::array();
        for (const auto& s : r.event_observables)
            jumps.push_back({{"t", s.t}, {"before", s.before}, {"after", s.after}});
        j["event_observables"] = std::move(jumps);
    }
    return j;
}

TrajectoryRecord record_from_json(const nlohmann::json& j) {
    TrajectoryRecord r;
    r.seed = j.at("seed").get<std::uint64_t>();
    const auto& c = j.at("config");
    r.n_majoranas = c.at("n_majoranas").get<int>();
    r.j_strength = c.at("j_strength").get<double>();
    r.config.dt = c.at("dt").get<double>();
    r.config.t_max = c.at("t_max").get<double>();
    r.config.gamma_m = c.at("gamma_m").get<double>();
    r.config.p_m = c.at("p_m").get<double>();
    r.config.record_interval = c.at("record_interval").get<double>();
    r.config.initial = initial_from_name(c.at("initial").get<std::string>());
    r.config.seed = r.seed;
    for (const auto& e : j.at("events")) {
        MeasurementEvent ev;
        ev.t = e.at("t").get<double>();
        ev.sites = e.at("sites").get<std::vector<int>>();
        ev.outcomes = e.at("outcomes").get<std::vector<int>>();
        r.events.push_back(std::move(ev));
    }
    const auto& s = j.at("series");
    r.times = s.at("t").get<std::vector<double>>();
    if (s.contains("s_half")) r.s_half = s.at("s_half").get<std::vector<double>>();
    if (s.contains("purity")) r.purity_series = s.at("purity").get<std::vector<double>>();
    if (j.contains("event_observables"))
        for (const auto& e : j.at("event_observables"))
            r.event_observables.push_back({e.at("t").get<double>(), e.at("before").get<double>(),
                                           e.at("after").get<double>()});
    return r;
}

}  // namespace syk
