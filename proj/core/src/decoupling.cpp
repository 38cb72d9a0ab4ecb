#include "syk/decoupling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "syk/analysis.hpp"
#include "syk/parallel.hpp"

namespace syk {

int ref_qubits(const DecouplingSetup& setup) {
    return int(std::lround(setup.gamma * setup.n_system));
}

int measured_qubits(const DecouplingSetup& setup) {
    return int(std::lround(setup.p_meas * setup.n_system));
}

void validate_setup(const DecouplingSetup& setup) {
    std::string bad;
    auto flag = [&bad](const std::string& msg) {
        if (!bad.empty()) bad += "; ";
        bad += msg;
    };
    if (setup.n_system < 1) flag("n_system must be positive");
    if (!(setup.gamma >= 0.0 && setup.gamma <= 1.0)) flag("gamma must lie in [0, 1]");
    if (!(setup.p_meas >= 0.0 && setup.p_meas <= 1.0)) flag("p_meas must lie in [0, 1]");
    if (setup.n_haar_samples < 1) flag("n_haar_samples must be positive");
    if (bad.empty() && ref_qubits(setup) + setup.n_system > 14)
        flag("qubit budget exceeded: ref + system must stay within 14");
    if (!bad.empty()) throw std::invalid_argument("decoupling setup: " + bad);
}

QuantumState prepare_purification(const DecouplingSetup& setup) {
    validate_setup(setup);
    const int n_ref = ref_qubits(setup);
    const int n_tot = n_ref + setup.n_system;
    const long d = 1L << n_tot;
    QuantumState s;
    s.kind = StateKind::pure;
    s.basis = StateBasis::computational;
    s.n_qubits = n_tot;
    s.amps = Eigen::VectorXcd::Zero(d);

    // site s <-> index bit (n_tot - s); the ith reference qubit pairs with
    // the ith system qubit, the remaining system qubits sit in |1> (bit 0).
    const long unpaired_mask = (1L << (setup.n_system - n_ref)) - 1L;
    const double amp = 1.0 / std::sqrt(double(1L << n_ref));
    for (long idx = 0; idx < d; ++idx) {
        if (idx & unpaired_mask) continue;
        bool paired = true;
        for (int i = 1; i <= n_ref; ++i) {
            const bool rb = (idx >> (n_tot - i)) & 1L;
            const bool sb = (idx >> (n_tot - n_ref - i)) & 1L;
            if (rb != sb) {
                paired = false;
                break;
            }
        }
        if (paired) s.amps(idx) = amp;
    }
    return s;
}

Eigen::MatrixXcd haar_unitary(long dim, RngStream& rng) {
    if (dim < 1) throw std::invalid_argument("haar_unitary: dim must be positive");
    Eigen::MatrixXcd z(dim, dim);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (long i = 0; i < dim; ++i)
        for (long j = 0; j < dim; ++j)
            z(i, j) = std::complex<double>(rng.normal(), rng.normal()) * inv_sqrt2;
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(z);
    Eigen::MatrixXcd u = qr.householderQ();
    // phase fix: absorb the diagonal phases of R so the density is Haar
    for (long k = 0; k < dim; ++k) {
        const std::complex<double> rkk = qr.matrixQR()(k, k);
        const double mag = std::abs(rkk);
        u.col(k) *= mag > 0.0 ? rkk / mag : 1.0;
    }
    return u;
}

void apply_system_unitary(QuantumState& state, const Eigen::MatrixXcd& u_s, int n_ref) {
    if (state.kind != StateKind::pure || state.basis != StateBasis::computational)
        throw std::invalid_argument("apply_system_unitary: need a computational pure state");
    const int n_system = state.n_qubits - n_ref;
    if (n_system < 1 || u_s.rows() != u_s.cols() || u_s.rows() != (1L << n_system))
        throw std::invalid_argument("apply_system_unitary: dimension mismatch");
    const long dr = 1L << n_ref;
    const long ds = 1L << n_system;
    Eigen::Map<Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic,
                             Eigen::RowMajor>>
        m(state.amps.data(), dr, ds);
    m = m * u_s.transpose();
}

namespace {

double trace_norm_hermitian(const Eigen::MatrixXcd& m) {
    if (m.rows() == 1) return std::abs(m(0, 0).real());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("trace_norm: eigenvalue computation failed");
    return es.eigenvalues().cwiseAbs().sum();
}

// For each system-index s, the measured-outcome index and the index of the
// unmeasured remainder, with measured sites ascending toward significance.
struct SplitTables {
    std::vector<long> m_of, q_of;
    long d_meas = 1, d_rest = 1;
};

SplitTables split_system_indices(int n_system, const std::vector<int>& measured_sites) {
    std::vector<int> sites = measured_sites;
    std::sort(sites.begin(), sites.end());
    if (std::adjacent_find(sites.begin(), sites.end()) != sites.end())
        throw std::invalid_argument("decoupling_error: duplicate measured site");
    for (int s : sites)
        if (s < 1 || s > n_system)
            throw std::invalid_argument("decoupling_error: measured site out of range");
    std::vector<char> is_meas(n_system + 1, 0);
    for (int s : sites) is_meas[s] = 1;

    SplitTables t;
    const long ds = 1L << n_system;
    t.d_meas = 1L << sites.size();
    t.d_rest = ds / t.d_meas;
    t.m_of.assign(ds, 0);
    t.q_of.assign(ds, 0);
    for (long s = 0; s < ds; ++s) {
        long m = 0, q = 0;
        for (int site = 1; site <= n_system; ++site) {
            const long bit = (s >> (n_system - site)) & 1L;
            if (is_meas[site])
                m = (m << 1) | bit;
            else
                q = (q << 1) | bit;
        }
        t.m_of[s] = m;
        t.q_of[s] = q;
    }
    return t;
}

}  // namespace

double decoupling_error(const QuantumState& state, int n_ref,
                        const std::vector<int>& measured_sites) {
    if (state.kind != StateKind::pure || state.basis != StateBasis::computational)
        throw std::invalid_argument("decoupling_error: need a computational pure state");
    const int n_system = state.n_qubits - n_ref;
    if (n_ref < 0 || n_system < 1)
        throw std::invalid_argument("decoupling_error: bad reference size");
    if (n_ref == 0 || measured_sites.empty()) return 0.0;  // one-dimensional R or empty E

    const long dr = 1L << n_ref;
    const long ds = 1L << n_system;
    const SplitTables t = split_system_indices(n_system, measured_sites);

    std::vector<Eigen::MatrixXcd> blocks(t.d_meas);
    for (auto& b : blocks) b = Eigen::MatrixXcd::Zero(dr, t.d_rest);
    for (long r = 0; r < dr; ++r)
        for (long s = 0; s < ds; ++s) blocks[t.m_of[s]](r, t.q_of[s]) = state.amps(r * ds + s);

    Eigen::MatrixXcd rho_r = Eigen::MatrixXcd::Zero(dr, dr);
    std::vector<Eigen::MatrixXcd> cond(t.d_meas);
    double total_weight = 0.0;
    for (long m = 0; m < t.d_meas; ++m) {
        cond[m].noalias() = blocks[m] * blocks[m].adjoint();
        rho_r += cond[m];
        total_weight += cond[m].trace().real();
    }
    if (std::abs(total_weight - 1.0) > 1e-9)
        throw std::runtime_error("decoupling_error: outcome weights sum to " + g9(total_weight));

    double eps = 0.0;
    for (long m = 0; m < t.d_meas; ++m) {
        const double p = cond[m].trace().real();
        eps += trace_norm_hermitian(cond[m] - p * rho_r);
    }
    return eps;
}

double multi_round_error(const DecouplingSetup& setup, int k_rounds, RngStream& rng) {
    validate_setup(setup);
    if (k_rounds < 1) throw std::invalid_argument("multi_round_error: k_rounds must be positive");
    const int n_ref = ref_qubits(setup);
    const int n_meas = measured_qubits(setup);
    const long dr = 1L << n_ref;
    const long ds = 1L << setup.n_system;

    std::vector<int> measured(n_meas);
    for (int i = 0; i < n_meas; ++i) measured[i] = i + 1;
    const SplitTables t = split_system_indices(setup.n_system, measured);
    double branch_count = 1.0;
    for (int k = 0; k < k_rounds; ++k) branch_count *= double(t.d_meas);
    if (branch_count > double(1L << 20))
        throw std::invalid_argument("multi_round_error: outcome histories exceed 2^20");

    // Branch B after round k carries outcome history digits base d_meas,
    // most recent round least significant.
    std::vector<Eigen::VectorXcd> branches{prepare_purification(setup).amps};
    for (int round = 0; round < k_rounds; ++round) {
        const Eigen::MatrixXcd u = haar_unitary(ds, rng);
        std::vector<Eigen::VectorXcd> next;
        next.reserve(branches.size() * t.d_meas);
        for (auto& psi : branches) {
            Eigen::Map<Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic,
                                     Eigen::RowMajor>>
                mat(psi.data(), dr, ds);
            mat = mat * u.transpose();
            for (long m = 0; m < t.d_meas; ++m) {
                Eigen::VectorXcd child = Eigen::VectorXcd::Zero(dr * ds);
                for (long r = 0; r < dr; ++r)
                    for (long s = 0; s < ds; ++s)
                        if (t.m_of[s] == m) child(r * ds + s) = psi(r * ds + s);
                next.push_back(std::move(child));
            }
        }
        branches = std::move(next);
    }

    const long nb = long(branches.size());
    std::vector<double> p(nb);
    std::vector<Eigen::MatrixXcd> cond(nb);
    Eigen::MatrixXcd rho_r = Eigen::MatrixXcd::Zero(dr, dr);
    double total = 0.0;
    for (long b = 0; b < nb; ++b) {
        Eigen::Map<const Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic,
                                       Eigen::RowMajor>>
            mat(branches[b].data(), dr, ds);
        cond[b].noalias() = mat * mat.adjoint();
        p[b] = cond[b].trace().real();
        rho_r += cond[b];
        total += p[b];
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw std::runtime_error("multi_round_error: outcome weights sum to " + g9(total));

    // per-round marginals, then the product over each history
    std::vector<std::vector<double>> marginal(k_rounds, std::vector<double>(t.d_meas, 0.0));
    for (long b = 0; b < nb; ++b) {
        long digits = b;
        for (int round = k_rounds - 1; round >= 0; --round) {
            marginal[round][digits % t.d_meas] += p[b];
            digits /= t.d_meas;
        }
    }
    double eps = 0.0;
    for (long b = 0; b < nb; ++b) {
        double q = 1.0;
        long digits = b;
        for (int round = k_rounds - 1; round >= 0; --round) {
            q *= marginal[round][digits % t.d_meas];
            digits /= t.d_meas;
        }
        eps += trace_norm_hermitian(cond[b] - q * rho_r);
    }
    return eps;
}

std::vector<ScanCell> scaling_scan(const std::vector<int>& n_systems,
                                   const std::vector<double>& gammas,
                                   const std::vector<double>& p_meas_list, int n_haar_samples,
                                   std::uint64_t master_seed, int n_workers) {
    if (n_systems.empty() || gammas.empty() || p_meas_list.empty())
        throw std::invalid_argument("scaling_scan: empty axis");
    if (n_haar_samples < 1)
        throw std::invalid_argument("scaling_scan: n_haar_samples must be positive");

    std::vector<ScanCell> cells;
    for (int n : n_systems)
        for (double g : gammas)
            for (double p : p_meas_list) {
                DecouplingSetup setup{n, g, p, n_haar_samples};
                validate_setup(setup);
                cells.push_back({n, g, p, 0.0, 0.0, std::numeric_limits<double>::quiet_NaN()});
            }

    run_indexed_tasks(cells.size(), n_workers, [&](std::size_t ci) {
        ScanCell& cell = cells[ci];
        DecouplingSetup setup{cell.n_system, cell.gamma, cell.p_meas, n_haar_samples};
        const int n_meas = measured_qubits(setup);
        std::vector<int> measured(n_meas);
        for (int i = 0; i < n_meas; ++i) measured[i] = i + 1;
        const long ds = 1L << setup.n_system;

        double sum = 0.0, sum2 = 0.0;
        for (int k = 0; k < n_haar_samples; ++k) {
            RngStream rng(mix_seed({master_seed, std::uint64_t(ci), std::uint64_t(k)}));
            QuantumState psi = prepare_purification(setup);
            apply_system_unitary(psi, haar_unitary(ds, rng), ref_qubits(setup));
            const double eps = decoupling_error(psi, ref_qubits(setup), measured);
            sum += eps;
            sum2 += eps * eps;
        }
        cell.mean_eps = sum / n_haar_samples;
        if (n_haar_samples > 1) {
            const double var =
                std::max(0.0, (sum2 - sum * sum / n_haar_samples) / (n_haar_samples - 1));
            cell.stderr_eps = std::sqrt(var / n_haar_samples);
        }
    });

    for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
        for (std::size_t pi = 0; pi < p_meas_list.size(); ++pi) {
            std::vector<double> xs, ys;
            for (std::size_t ni = 0; ni < n_systems.size(); ++ni) {
                const ScanCell& c =
                    cells[(ni * gammas.size() + gi) * p_meas_list.size() + pi];
                if (c.mean_eps > 0.0) {
                    xs.push_back(double(c.n_system));
                    ys.push_back(std::log2(c.mean_eps));
                }
            }
            double slope = std::numeric_limits<double>::quiet_NaN();
            if (xs.size() >= 3) slope = linear_fit(xs, ys).slope;
            for (std::size_t ni = 0; ni < n_systems.size(); ++ni)
                cells[(ni * gammas.size() + gi) * p_meas_list.size() + pi].slope = slope;
        }
    }
    return cells;
}

void write_decoupling_csv(std::ostream& out, const std::vector<ScanCell>& cells,
                          const std::vector<std::pair<std::string, std::string>>& header) {
    for (const auto& [k, v] : header) out << "# " << k << ": " << v << "\n";
    out << "n_system,gamma,p_meas,mean_eps,stderr_eps,slope\n";
    for (const auto& c : cells)
        out << c.n_system << ',' << g9(c.gamma) << ',' << g9(c.p_meas) << ',' << g9(c.mean_eps)
            << ',' << g9(c.stderr_eps) << ',' << g9(c.slope) << "\n";
}

}  // namespace syk
