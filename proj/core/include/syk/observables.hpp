#pragma once

#include <Eigen/Dense>

#include "syk/quantum_state.hpp"

namespace syk {

// Entanglement entropy of a reduced density matrix, in bits, together with
// the density normalized per kept site.
struct EntropyValue {
    double raw_bits = 0.0;
    double density = 0.0;  // raw_bits / kept sites; 4S/N for the half-chain cut
};

// Reduced density matrix over the contiguous site range [keep_first, keep_last]
// (1-based, inclusive). The state must be in the computational basis.
Eigen::MatrixXcd partial_trace(const QuantumState& s, int keep_first, int keep_last);

// von Neumann entropy, base-2 log, of a density matrix. Eigenvalues in
// [-1e-10, 0) clamp to zero; anything lower is an error.
double entropy_of_density_matrix(const Eigen::MatrixXcd& rho);

// Entanglement entropy of the leading `cut` sites of a pure state in the
// computational basis. cut = n_qubits/2 is the half-chain value whose density
// equals 4S/N in Majorana units.
EntropyValue entanglement_entropy(const QuantumState& s, int cut);

// Tr rho^2. Pure states return exactly 1 after a norm sanity check; basis
// choice does not matter (Frobenius norm is unitarily invariant).
double purity(const QuantumState& s);

}  // namespace syk
