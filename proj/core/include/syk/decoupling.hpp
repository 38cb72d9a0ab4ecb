#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "syk/quantum_state.hpp"
#include "syk/rng.hpp"

namespace syk {

// Reference-decoupling experiment: a system S of n_system qubits is prepared
// with a fraction gamma of its qubits Bell-paired to a reference R, scrambled
// by a Haar-random unitary on S, and a fraction p_meas of its qubits is
// measured with the record held by an environment E. The figure of merit is
// the trace distance between rho_RE and rho_R x rho_E.
struct DecouplingSetup {
    int n_system = 4;
    double gamma = 0.25;
    double p_meas = 0.5;
    int n_haar_samples = 100;
};

int ref_qubits(const DecouplingSetup& setup);       // lround(gamma * n_system)
int measured_qubits(const DecouplingSetup& setup);  // lround(p_meas * n_system)

// Throws when gamma or p_meas leave [0,1], n_system < 1, n_haar_samples < 1,
// or the total qubit budget ref + system exceeds 14.
void validate_setup(const DecouplingSetup& setup);

// Pure state on R x S (reference qubits are sites 1..n_ref, most
// significant): one Bell pair per reference qubit with the matching leading
// system qubit, remaining system qubits in |1>. The reduced state on S has
// purity 2^{-n_ref}.
QuantumState prepare_purification(const DecouplingSetup& setup);

// Haar-distributed unitary via QR of a complex Ginibre matrix with the
// R-diagonal phase fix.
Eigen::MatrixXcd haar_unitary(long dim, RngStream& rng);

// In-place |psi> <- (I_R x u_s)|psi>; u_s must be 2^{n_system} square.
void apply_system_unitary(QuantumState& state, const Eigen::MatrixXcd& u_s, int n_ref);

// Trace distance ||rho_RE - rho_R x rho_E||_1 for an environment that records
// the computational value of each measured site. E is classical, so rho_RE is
// block diagonal over outcomes r and the distance reduces to
// sum_r || G_r - p_r rho_R ||_1 with G_r the unnormalized conditional
// reference state and rho_R = sum_r G_r. measured_sites are 1-based positions
// within S (1..n_system). Throws when the outcome weights do not sum to 1
// within 1e-9.
double decoupling_error(const QuantumState& state, int n_ref,
                        const std::vector<int>& measured_sites);

// K rounds of scramble-then-measure with fresh Haar unitaries, environment
// E_i keeping round i's record: returns ||rho_RE^K - rho_R x (x_i rho_Ei)||_1
// computed exactly over all outcome histories.
double multi_round_error(const DecouplingSetup& setup, int k_rounds, RngStream& rng);

struct ScanCell {
    int n_system;
    double gamma;
    double p_meas;
    double mean_eps;
    double stderr_eps;
    double slope;  // log2(mean_eps) per qubit across n_system; NaN when undefined
};

// Monte Carlo scan over the grid n_systems x gammas x p_meas_list with
// n_haar_samples fresh scrambles per cell (deterministic per-sample seeds).
// The slope column carries, for each (gamma, p_meas) group with at least
// three system sizes and positive means, the least-squares slope of
// log2(mean_eps) against n_system; otherwise NaN.
std::vector<ScanCell> scaling_scan(const std::vector<int>& n_systems,
                                   const std::vector<double>& gammas,
                                   const std::vector<double>& p_meas_list, int n_haar_samples,
                                   std::uint64_t master_seed, int n_workers);

// "# key: value" headers, "n_system,gamma,p_meas,mean_eps,stderr_eps,slope",
// then one row per cell, floats with 9 significant digits.
void write_decoupling_csv(std::ostream& out, const std::vector<ScanCell>& cells,
                          const std::vector<std::pair<std::string, std::string>>& header);

}  // namespace syk
