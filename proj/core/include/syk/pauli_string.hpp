#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>

namespace syk {

// Pauli string on n qubits in symplectic form: per-site operator encoded by
// one x bit and one z bit ((0,0) I, (1,0) X, (0,1) Z, (1,1) Y) plus a global
// complex coefficient. Mask bit s-1 belongs to site s; site 1 is the leftmost
// Kronecker factor when materialized.
struct PauliString {
    int n_qubits = 0;
    std::uint32_t x_mask = 0;
    std::uint32_t z_mask = 0;
    std::complex<double> coeff = {1.0, 0.0};

    // number of sites acted on non-trivially
    int weight() const;
};

// Product a*b. Masks xor, coefficients multiply, and the i-power picked up at
// each shared site is accumulated left to right.
PauliString multiply(const PauliString& a, const PauliString& b);

inline PauliString operator*(const PauliString& a, const PauliString& b) {
    return multiply(a, b);
}

// Jordan-Wigner Majorana operator, 1-based index in 1..n_majoranas:
//   chi_{2i-1} = 2^{-1/2} X_1 ... X_{i-1} Z_i
//   chi_{2i}   = 2^{-1/2} X_1 ... X_{i-1} Y_i
// Normalization gives chi_i chi_j + chi_j chi_i = delta_ij.
PauliString jw_majorana(int majorana_index, int n_majoranas);

// Dense 2^n x 2^n matrix; site 1 is the leftmost tensor factor, and |1...1>
// (every site in the sigma_z = +1 eigenstate) is basis vector 0.
Eigen::MatrixXcd to_matrix(const PauliString& p);

}  // namespace syk
