#include "syk/pauli_string.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace syk {

namespace {

// i-exponent k in a*b = i^k c for single-site Paulis, indexed by x + 2z
// (0 I, 1 X, 2 Z, 3 Y). Forward cycle X->Y->Z->X picks up +i.
constexpr int kPhaseExp[4][4] = {
    {0, 0, 0, 0},
    {0, 0, 3, 1},
    {0, 1, 0, 3},
    {0, 3, 1, 0},
};

constexpr std::complex<double> kIPow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};

}  // namespace

int PauliString::weight() const { return std::popcount(x_mask | z_mask); }

PauliString multiply(const PauliString& a, const PauliString& b) {
    if (a.n_qubits != b.n_qubits)
        throw std::invalid_argument("pauli multiply: qubit count mismatch");
    PauliString r;
    r.n_qubits = a.n_qubits;
    r.x_mask = a.x_mask ^ b.x_mask;
    r.z_mask = a.z_mask ^ b.z_mask;
    int k = 0;
    std::uint32_t shared = (a.x_mask | a.z_mask) & (b.x_mask | b.z_mask);
    for (int s = 0; s < a.n_qubits; ++s) {
        if (!((shared >> s) & 1u)) continue;
        int ea = ((a.x_mask >> s) & 1u) | (((a.z_mask >> s) & 1u) << 1);
        int eb = ((b.x_mask >> s) & 1u) | (((b.z_mask >> s) & 1u) << 1);
        k = (k + kPhaseExp[ea][eb]) & 3;
    }
    r.coeff = a.coeff * b.coeff * kIPow[k];
    return r;
}

PauliString jw_majorana(int majorana_index, int n_majoranas) {
    if (n_majoranas < 2 || n_majoranas % 2 != 0)
        throw std::invalid_argument("jw_majorana: n_majoranas must be even and >= 2");
    if (majorana_index < 1 || majorana_index > n_majoranas)
        throw std::invalid_argument("jw_majorana: index out of range");
    int site = (majorana_index + 1) / 2;  // 1-based qubit site
    PauliString p;
    p.n_qubits = n_majoranas / 2;
    p.x_mask = (1u << (site - 1)) - 1u;  // X string on sites 1..site-1
    p.z_mask = 1u << (site - 1);
    if (majorana_index % 2 == 0) p.x_mask |= 1u << (site - 1);  // Y at the site
    p.coeff = {std::sqrt(0.5), 0.0};
    return p;
}

Eigen::MatrixXcd to_matrix(const PauliString& p) {
    if (p.n_qubits < 1 || p.n_qubits > 14)
        throw std::invalid_argument("to_matrix: n_qubits out of range");
    const int n = p.n_qubits;
    const long d = 1L << n;
    // site mask bit s-1 maps to state-index bit n-s (site 1 leftmost)
    auto remap = [n](std::uint32_t m) {
        std::uint32_t r = 0;
        for (int s = 0; s < n; ++s)
            if ((m >> s) & 1u) r |= 1u << (n - 1 - s);
        return r;
    };
    const std::uint32_t xi = remap(p.x_mask);
    const std::uint32_t zi = remap(p.z_mask);
    // Y = i X Z at each (1,1) site; the Z factors then act by parity signs
    const std::complex<double> base =
        p.coeff * kIPow[std::popcount(p.x_mask & p.z_mask) & 3];
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d, d);
    for (long col = 0; col < d; ++col) {
        bool neg = std::popcount(static_cast<std::uint32_t>(col) & zi) & 1;
        m(col ^ xi, col) = neg ? -base : base;
    }
    return m;
}

}  // namespace syk
