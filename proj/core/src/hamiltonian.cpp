#include "syk/hamiltonian.hpp"

#include <bit>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "syk/pauli_string.hpp"

namespace syk {

Eigen::MatrixXcd build_hamiltonian_matrix(const CouplingTensor& c) {
    const int n = c.n_majoranas;
    if (n < 8 || n > 24 || n % 2 != 0)
        throw std::invalid_argument("build_hamiltonian: bad n_majoranas");
    const int nq = n / 2;
    const long d = 1L << nq;

    std::vector<PauliString> chi;
    chi.reserve(n);
    for (int m = 1; m <= n; ++m) chi.push_back(jw_majorana(m, n));

    auto remap = [nq](std::uint32_t m) {
        std::uint32_t r = 0;
        for (int s = 0; s < nq; ++s)
            if ((m >> s) & 1u) r |= 1u << (nq - 1 - s);
        return r;
    };
    constexpr std::complex<double> ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};

    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(d, d);
    for (const auto& e : c.entries) {
        if (e.value == 0.0) continue;
        PauliString term = ((chi[e.i - 1] * chi[e.j - 1]) * chi[e.k - 1]) * chi[e.l - 1];
        const std::uint32_t xi = remap(term.x_mask);
        const std::uint32_t zi = remap(term.z_mask);
        const std::complex<double> base =
            -e.value * term.coeff * ipow[std::popcount(term.x_mask & term.z_mask) & 3];
        for (long col = 0; col < d; ++col) {
            bool neg = std::popcount(static_cast<std::uint32_t>(col) & zi) & 1;
            h(col ^ xi, col) += neg ? -base : base;
        }
    }

    double herm_err = (h - h.adjoint()).cwiseAbs().maxCoeff();
    if (herm_err > 1e-10)
        throw std::runtime_error("build_hamiltonian: hermiticity violated, max |H-H^dag| = " +
                                 std::to_string(herm_err));
    return h;
}

SpectralHamiltonian::SpectralHamiltonian(const CouplingTensor& couplings)
    : n_majoranas_(couplings.n_majoranas), j_strength_(couplings.j_strength) {
    matrix_ = build_hamiltonian_matrix(couplings);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(matrix_);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("SpectralHamiltonian: eigendecomposition failed");
    eigenvalues_ = solver.eigenvalues();
    eigenvectors_ = solver.eigenvectors();
}

Eigen::VectorXcd SpectralHamiltonian::phase_factors(double dt) const {
    const long d = dim();
    Eigen::VectorXcd ph(d);
    for (long k = 0; k < d; ++k) ph(k) = std::polar(1.0, -eigenvalues_(k) * dt);
    return ph;
}

Eigen::MatrixXcd SpectralHamiltonian::propagator(double t) const {
    return eigenvectors_ * phase_factors(t).asDiagonal() * eigenvectors_.adjoint();
}

}  // namespace syk
