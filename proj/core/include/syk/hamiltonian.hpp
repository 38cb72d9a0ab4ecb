#pragma once

#include <Eigen/Dense>

#include "syk/couplings.hpp"

namespace syk {

// Dense SYK Hamiltonian H = -sum_{i<j<k<l} J_{ijkl} chi_i chi_j chi_k chi_l
// on N/2 qubits, held together with its eigendecomposition H = V E V^dag so
// that exact propagation over an arbitrary interval is a phase application in
// the eigenbasis.
class SpectralHamiltonian {
  public:
    explicit SpectralHamiltonian(const CouplingTensor& couplings);

    int n_majoranas() const { return n_majoranas_; }
    int n_qubits() const { return n_majoranas_ / 2; }
    long dim() const { return matrix_.rows(); }
    double j_strength() const { return j_strength_; }

    const Eigen::MatrixXcd& matrix() const { return matrix_; }
    const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
    // columns are eigenvectors; computational = V * energy
    const Eigen::MatrixXcd& eigenvectors() const { return eigenvectors_; }

    // U(t) = V diag(e^{-i E t}) V^dag
    Eigen::MatrixXcd propagator(double t) const;

    // phase factors e^{-i E_k dt}
    Eigen::VectorXcd phase_factors(double dt) const;

  private:
    int n_majoranas_;
    double j_strength_;
    Eigen::MatrixXcd matrix_;
    Eigen::VectorXd eigenvalues_;
    Eigen::MatrixXcd eigenvectors_;
};

// Accumulates the coupling tensor into a dense matrix, one Pauli string per
// quadruple. Exposed for tests; SpectralHamiltonian uses it internally.
Eigen::MatrixXcd build_hamiltonian_matrix(const CouplingTensor& couplings);

}  // namespace syk
