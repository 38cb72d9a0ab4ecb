#pragma once

#include <Eigen/Dense>

#include "syk/hamiltonian.hpp"

namespace syk {

enum class StateKind { pure, mixed };
enum class StateBasis { computational, energy };

// Pure state vector or density matrix on n qubits. Basis index convention:
// site 1 is the most significant bit, and index bit 0 means that site is in
// the sigma_z = +1 eigenstate |1>. Hence |1...1> is basis vector 0.
struct QuantumState {
    StateKind kind = StateKind::pure;
    StateBasis basis = StateBasis::computational;
    int n_qubits = 0;
    Eigen::VectorXcd amps;  // pure
    Eigen::MatrixXcd rho;   // mixed

    long dim() const { return 1L << n_qubits; }

    static QuantumState all_up(int n_qubits);           // |1...1>
    static QuantumState maximally_mixed(int n_qubits);  // I / 2^n
};

// norm error: | ||psi|| - 1 | for pure, |tr rho - 1| for mixed
double state_norm_error(const QuantumState& s);

// Throws std::runtime_error when dimensions, normalization, or hermiticity
// are off. check_psd additionally eigen-checks rho >= -1e-10 (O(d^3)).
void validate_state(const QuantumState& s, bool check_psd = false);

// Basis change using the Hamiltonian eigenvectors (computational = V * energy).
QuantumState to_basis(const QuantumState& s, StateBasis target, const SpectralHamiltonian& h);

}  // namespace syk
