#include "syk/observables.hpp"

#include <cmath>
#include <stdexcept>

namespace syk {

Eigen::MatrixXcd partial_trace(const QuantumState& s, int keep_first, int keep_last) {
    if (s.basis != StateBasis::computational)
        throw std::invalid_argument("partial_trace: state must be in the computational basis");
    const int n = s.n_qubits;
    if (keep_first < 1 || keep_last < keep_first || keep_last > n)
        throw std::invalid_argument("partial_trace: bad contiguous site range");
    const int np = keep_first - 1;        // prefix sites traced out
    const int nk = keep_last - keep_first + 1;
    const int ns = n - keep_last;         // suffix sites traced out
    const long dp = 1L << np, dk = 1L << nk, ds = 1L << ns;

    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dk, dk);
    if (s.kind == StateKind::pure) {
        // index = (p * dk + m) * ds + q, site 1 most significant
        for (long p = 0; p < dp; ++p)
            for (long m = 0; m < dk; ++m)
                for (long mm = 0; mm < dk; ++mm) {
                    std::complex<double> acc = 0.0;
                    const long ra = (p * dk + m) * ds;
                    const long rb = (p * dk + mm) * ds;
                    for (long q = 0; q < ds; ++q) acc += s.amps(ra + q) * std::conj(s.amps(rb + q));
                    out(m, mm) += acc;
                }
    } else {
        for (long p = 0; p < dp; ++p)
            for (long m = 0; m < dk; ++m)
                for (long mm = 0; mm < dk; ++mm) {
                    std::complex<double> acc = 0.0;
                    const long ra = (p * dk + m) * ds;
                    const long rb = (p * dk + mm) * ds;
                    for (long q = 0; q < ds; ++q) acc += s.rho(ra + q, rb + q);
                    out(m, mm) += acc;
                }
    }
    return out;
}

double entropy_of_density_matrix(const Eigen::MatrixXcd& rho) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
    double bits = 0.0;
    for (long k = 0; k < es.eigenvalues().size(); ++k) {
        double lam = es.eigenvalues()(k);
        if (lam < -1e-10)
            throw std::runtime_error("entropy: reduced density matrix eigenvalue below -1e-10");
        if (lam <= 0.0) continue;
        bits -= lam * std::log2(lam);
    }
    return bits;
}

EntropyValue entanglement_entropy(const QuantumState& s, int cut) {
    if (s.kind != StateKind::pure)
        throw std::invalid_argument("entanglement_entropy: pure states only");
    if (cut < 1 || cut >= s.n_qubits)
        throw std::invalid_argument("entanglement_entropy: cut out of range");
    // prefix cut: reshape into (kept, rest) and form the Gram matrix
    const long da = 1L << cut;
    const long db = s.dim() / da;
    Eigen::Map<const Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic,
                                   Eigen::RowMajor>>
        a(s.amps.data(), da, db);
    Eigen::MatrixXcd red = a * a.adjoint();
    EntropyValue ev;
    ev.raw_bits = entropy_of_density_matrix(red);
    ev.density = ev.raw_bits / double(cut);
    return ev;
}

double purity(const QuantumState& s) {
    if (s.kind == StateKind::pure) {
        double n2 = s.amps.squaredNorm();
        if (n2 * n2 < 1.0 - 1e-9)
            throw std::runtime_error("purity: pure state norm drifted off unity");
        return 1.0;
    }
    return s.rho.squaredNorm();  // sum |rho_ij|^2 = tr rho^2 for hermitian rho
}

}  // namespace syk
