#include "syk/quantum_state.hpp"

#include <cmath>
#include <stdexcept>

namespace syk {

QuantumState QuantumState::all_up(int n_qubits) {
    QuantumState s;
    s.kind = StateKind::pure;
    s.basis = StateBasis::computational;
    s.n_qubits = n_qubits;
    s.amps = Eigen::VectorXcd::Zero(1L << n_qubits);
    s.amps(0) = 1.0;
    return s;
}

QuantumState QuantumState::maximally_mixed(int n_qubits) {
    QuantumState s;
    s.kind = StateKind::mixed;
    s.basis = StateBasis::computational;
    s.n_qubits = n_qubits;
    const long d = 1L << n_qubits;
    s.rho = Eigen::MatrixXcd::Identity(d, d) / double(d);
    return s;
}

double state_norm_error(const QuantumState& s) {
    if (s.kind == StateKind::pure) return std::abs(s.amps.norm() - 1.0);
    return std::abs(s.rho.trace().real() - 1.0) + std::abs(s.rho.trace().imag());
}

void validate_state(const QuantumState& s, bool check_psd) {
    const long d = s.dim();
    if (s.kind == StateKind::pure) {
        if (s.amps.size() != d) throw std::runtime_error("state: amplitude size mismatch");
        if (std::abs(s.amps.squaredNorm() - 1.0) > 1e-9)
            throw std::runtime_error("state: pure norm off unity");
        return;
    }
    if (s.rho.rows() != d || s.rho.cols() != d)
        throw std::runtime_error("state: rho size mismatch");
    if (state_norm_error(s) > 1e-10) throw std::runtime_error("state: trace off unity");
    if ((s.rho - s.rho.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
        throw std::runtime_error("state: rho not hermitian");
    double pur = s.rho.squaredNorm();
    if (pur < 1.0 / double(d) - 1e-9 || pur > 1.0 + 1e-9)
        throw std::runtime_error("state: purity outside [1/d, 1]");
    if (check_psd) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(s.rho, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -1e-10)
            throw std::runtime_error("state: rho has negative eigenvalue");
    }
}

QuantumState to_basis(const QuantumState& s, StateBasis target, const SpectralHamiltonian& h) {
    if (s.dim() != h.dim()) throw std::invalid_argument("to_basis: dimension mismatch");
    if (s.basis == target) return s;
    QuantumState out = s;
    out.basis = target;
    const Eigen::MatrixXcd& v = h.eigenvectors();
    if (target == StateBasis::computational) {
        if (s.kind == StateKind::pure)
            out.amps = v * s.amps;
        else
            out.rho = v * s.rho * v.adjoint();
    } else {
        if (s.kind == StateKind::pure)
            out.amps = v.adjoint() * s.amps;
        else
            out.rho = v.adjoint() * s.rho * v;
    }
    return out;
}

}  // namespace syk
