#include <catch2/catch.hpp>

#include <array>
#include <cmath>
#include <complex>
#include <random>
#include <tuple>
#include <vector>

#include "oracles.hpp"
#include "syk/couplings.hpp"
#include "syk/hamiltonian.hpp"
#include "syk/pauli_string.hpp"
#include "syk/rng.hpp"

using namespace syk;
using namespace std::complex_literals;

namespace {

double max_abs_diff(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

PauliString single_site(int n, int site, char op) {
    PauliString p;
    p.n_qubits = n;
    if (op == 'X' || op == 'Y') p.x_mask |= 1u << (site - 1);
    if (op == 'Z' || op == 'Y') p.z_mask |= 1u << (site - 1);
    return p;
}

}  // namespace

TEST_CASE("single-site pauli products carry the right phases") {
    const PauliString x = single_site(1, 1, 'X');
    const PauliString y = single_site(1, 1, 'Y');
    const PauliString z = single_site(1, 1, 'Z');

    auto check = [](const PauliString& got, const PauliString& want_op,
                    std::complex<double> want_coeff) {
        REQUIRE(got.x_mask == want_op.x_mask);
        REQUIRE(got.z_mask == want_op.z_mask);
        REQUIRE(std::abs(got.coeff - want_coeff) < 1e-15);
    };
    check(x * y, z, 1i);
    check(y * x, z, -1i);
    check(y * z, x, 1i);
    check(z * y, x, -1i);
    check(z * x, y, 1i);
    check(x * z, y, -1i);
    check(x * x, PauliString{1, 0, 0, 1.0}, 1.0);
    check(y * y, PauliString{1, 0, 0, 1.0}, 1.0);
    check(z * z, PauliString{1, 0, 0, 1.0}, 1.0);
}

TEST_CASE("pauli products match the dense kronecker oracle") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int n = 1; n <= 5; ++n) {
        std::uniform_int_distribution<std::uint32_t> mask(0, (1u << n) - 1);
        for (int rep = 0; rep < 40; ++rep) {
            PauliString a{n, mask(gen), mask(gen), {unif(gen), unif(gen)}};
            PauliString b{n, mask(gen), mask(gen), {unif(gen), unif(gen)}};
            const Eigen::MatrixXcd lhs = to_matrix(a * b);
            const Eigen::MatrixXcd rhs = to_matrix(a) * to_matrix(b);
            REQUIRE(max_abs_diff(lhs, rhs) < 1e-12);
        }
    }
}

TEST_CASE("pauli weight counts non-identity sites") {
    REQUIRE(PauliString{4, 0, 0, 1.0}.weight() == 0);
    REQUIRE(PauliString{4, 0b1010, 0, 1.0}.weight() == 2);
    REQUIRE(PauliString{4, 0b1010, 0b0110, 1.0}.weight() == 3);  // X, Y, Z
    REQUIRE(PauliString{4, 0b1111, 0b1111, 1.0}.weight() == 4);
}

TEST_CASE("majorana strings take the expected explicit form") {
    // chi_{2i-1} = X...X Z / sqrt(2), chi_{2i} = X...X Y / sqrt(2)
    const double r = 1.0 / std::sqrt(2.0);
    REQUIRE(max_abs_diff(to_matrix(jw_majorana(1, 4)),
                         oracle::kron_sites({'Z', 'I'}) * r) < 1e-15);
    REQUIRE(max_abs_diff(to_matrix(jw_majorana(2, 4)),
                         oracle::kron_sites({'Y', 'I'}) * r) < 1e-15);
    REQUIRE(max_abs_diff(to_matrix(jw_majorana(3, 4)),
                         oracle::kron_sites({'X', 'Z'}) * r) < 1e-15);
    REQUIRE(max_abs_diff(to_matrix(jw_majorana(4, 4)),
                         oracle::kron_sites({'X', 'Y'}) * r) < 1e-15);
    for (int a = 1; a <= 8; ++a)
        REQUIRE(max_abs_diff(to_matrix(jw_majorana(a, 8)), oracle::majorana_dense(8, a)) <
                1e-15);
}

TEST_CASE("majorana operators anticommute to delta") {
    const int n = 8;
    std::vector<Eigen::MatrixXcd> chi;
    for (int a = 1; a <= n; ++a) chi.push_back(to_matrix(jw_majorana(a, n)));
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(chi[0].rows(), chi[0].cols());
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            const Eigen::MatrixXcd anti = chi[a] * chi[b] + chi[b] * chi[a];
            const Eigen::MatrixXcd want = a == b ? id : Eigen::MatrixXcd(0.0 * id);
            REQUIRE(max_abs_diff(anti, want) < 1e-12);
        }
}

TEST_CASE("coupling tensor enumerates quadruples lexicographically") {
    RngStream rng(11);
    const CouplingTensor c = sample_couplings(16, 1.0, rng);
    REQUIRE(c.n_majoranas == 16);
    REQUIRE(c.j_strength == 1.0);
    REQUIRE(c.entries.size() == 1820);  // C(16,4)
    for (std::size_t e = 0; e < c.entries.size(); ++e) {
        const auto& q = c.entries[e];
        REQUIRE((1 <= q.i && q.i < q.j && q.j < q.k && q.k < q.l && q.l <= 16));
        if (e > 0) {
            const auto& p = c.entries[e - 1];
            REQUIRE(std::tie(p.i, p.j, p.k, p.l) < std::tie(q.i, q.j, q.k, q.l));
        }
    }
}

TEST_CASE("coupling ensemble matches the gaussian law") {
    const int n = 12;
    const double j = 1.0;
    const double var_want = 6.0 * j * j / double(n * n * n);
    double sum = 0.0, sum2 = 0.0;
    std::size_t count = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        RngStream rng(mix_seed({990, seed}));
        const CouplingTensor c = sample_couplings(n, j, rng);
        for (const auto& e : c.entries) {
            sum += e.value;
            sum2 += e.value * e.value;
            ++count;
        }
    }
    const double mean = sum / double(count);
    const double var = (sum2 - sum * sum / double(count)) / double(count - 1);
    const double se_mean = std::sqrt(var_want / double(count));
    const double se_var = var_want * std::sqrt(2.0 / double(count - 1));
    REQUIRE(std::abs(mean) < 3.0 * se_mean);
    REQUIRE(std::abs(var - var_want) < 3.0 * se_var);
}

TEST_CASE("zero strength collapses the tensor exactly") {
    RngStream rng(3);
    const CouplingTensor c = sample_couplings(8, 0.0, rng);
    REQUIRE(c.entries.size() == 70);
    for (const auto& e : c.entries) REQUIRE(e.value == 0.0);
}

TEST_CASE("coupling sampling is seed-deterministic") {
    RngStream a(42), b(42), c(43);
    const CouplingTensor ta = sample_couplings(10, 0.7, a);
    const CouplingTensor tb = sample_couplings(10, 0.7, b);
    const CouplingTensor tc = sample_couplings(10, 0.7, c);
    bool same = true, differ = false;
    for (std::size_t e = 0; e < ta.entries.size(); ++e) {
        same = same && ta.entries[e].value == tb.entries[e].value;
        differ = differ || ta.entries[e].value != tc.entries[e].value;
    }
    REQUIRE(same);
    REQUIRE(differ);
}

TEST_CASE("coupling json round trip is lossless") {
    RngStream rng(5);
    const CouplingTensor c = sample_couplings(8, 2.0, rng);
    const CouplingTensor back = couplings_from_json(couplings_to_json(c));
    REQUIRE(back.n_majoranas == c.n_majoranas);
    REQUIRE(back.j_strength == c.j_strength);
    REQUIRE(back.seed == c.seed);
    REQUIRE(back.entries.size() == c.entries.size());
    for (std::size_t e = 0; e < c.entries.size(); ++e) {
        REQUIRE(back.entries[e].i == c.entries[e].i);
        REQUIRE(back.entries[e].l == c.entries[e].l);
        REQUIRE(back.entries[e].value == c.entries[e].value);
    }
}

TEST_CASE("coupling sampling rejects unsupported sizes") {
    RngStream rng(1);
    REQUIRE_THROWS_AS(sample_couplings(7, 1.0, rng), std::invalid_argument);
    REQUIRE_THROWS_AS(sample_couplings(6, 1.0, rng), std::invalid_argument);
    REQUIRE_THROWS_AS(sample_couplings(26, 1.0, rng), std::invalid_argument);
}

TEST_CASE("single-quadruple hamiltonian equals the dense majorana product") {
    auto one_term = [](int n, int i, int j, int k, int l) {
        CouplingTensor c;
        c.n_majoranas = n;
        c.j_strength = 1.0;
        c.entries.push_back({i, j, k, l, 1.0});
        return c;
    };
    for (auto [i, j, k, l] : std::vector<std::array<int, 4>>{{1, 2, 3, 4}, {2, 4, 5, 8}}) {
        const Eigen::MatrixXcd h = build_hamiltonian_matrix(one_term(8, i, j, k, l));
        const Eigen::MatrixXcd want = -(oracle::majorana_dense(8, i) *
                                        oracle::majorana_dense(8, j) *
                                        oracle::majorana_dense(8, k) *
                                        oracle::majorana_dense(8, l));
        REQUIRE(max_abs_diff(h, want) < 1e-12);
        // four factors of 1/sqrt(2) on unitary paulis
        REQUIRE(h.operatorNorm() == Approx(0.25).margin(1e-12));
    }
}

TEST_CASE("full hamiltonian matches the dense majorana oracle") {
    for (int n : {8, 10}) {
        RngStream rng(mix_seed({17, std::uint64_t(n)}));
        const CouplingTensor c = sample_couplings(n, 1.0, rng);
        const Eigen::MatrixXcd h = build_hamiltonian_matrix(c);
        Eigen::MatrixXcd want = Eigen::MatrixXcd::Zero(h.rows(), h.cols());
        for (const auto& e : c.entries)
            want -= e.value * (oracle::majorana_dense(n, e.i) * oracle::majorana_dense(n, e.j) *
                               oracle::majorana_dense(n, e.k) * oracle::majorana_dense(n, e.l));
        REQUIRE(max_abs_diff(h, want) < 1e-10);
    }
}

TEST_CASE("hamiltonian is hermitian and traceless") {
    RngStream rng(23);
    const SpectralHamiltonian h(sample_couplings(12, 1.0, rng));
    REQUIRE(max_abs_diff(h.matrix(), h.matrix().adjoint()) < 1e-12);
    REQUIRE(std::abs(h.matrix().trace()) < 1e-10);
}

TEST_CASE("eigendecomposition reconstructs the matrix") {
    RngStream rng(29);
    const SpectralHamiltonian h(sample_couplings(12, 1.0, rng));
    const Eigen::MatrixXcd rebuilt = h.eigenvectors() *
                                     h.eigenvalues().asDiagonal().toDenseMatrix().cast<std::complex<double>>() *
                                     h.eigenvectors().adjoint();
    REQUIRE(max_abs_diff(rebuilt, h.matrix()) < 1e-10);
}

TEST_CASE("zero couplings freeze the dynamics") {
    RngStream rng(31);
    const SpectralHamiltonian h(sample_couplings(8, 0.0, rng));
    REQUIRE(h.eigenvalues().cwiseAbs().maxCoeff() == 0.0);
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(h.dim(), h.dim());
    REQUIRE(max_abs_diff(h.propagator(17.3), id) < 1e-12);
}

TEST_CASE("propagator satisfies the group law and stays unitary") {
    RngStream rng(37);
    const SpectralHamiltonian h(sample_couplings(12, 1.0, rng));
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(h.dim(), h.dim());
    REQUIRE(max_abs_diff(h.propagator(0.0), id) < 1e-12);
    REQUIRE(max_abs_diff(h.propagator(2.3) * h.propagator(-2.3), id) < 1e-10);
    REQUIRE(max_abs_diff(h.propagator(1.7) * h.propagator(3.1), h.propagator(4.8)) < 1e-10);
    const Eigen::MatrixXcd u = h.propagator(1000.0);
    REQUIRE(max_abs_diff(u.adjoint() * u, id) < 1e-10);
}

TEST_CASE("energy is conserved along the evolution") {
    RngStream rng(41);
    const SpectralHamiltonian h(sample_couplings(12, 1.0, rng));
    std::mt19937_64 gen(4);
    std::normal_distribution<double> gauss;
    Eigen::VectorXcd psi(h.dim());
    for (long b = 0; b < psi.size(); ++b) psi(b) = std::complex<double>(gauss(gen), gauss(gen));
    psi.normalize();
    const double e0 = (psi.adjoint() * h.matrix() * psi)(0).real();
    for (double t : {3.7, 55.5, 1000.0}) {
        const Eigen::VectorXcd evolved = h.propagator(t) * psi;
        const double et = (evolved.adjoint() * h.matrix() * evolved)(0).real();
        REQUIRE(std::abs(et - e0) < 1e-8);
    }
}

TEST_CASE("odd spectral moments vanish over the ensemble") {
    // Single realizations are skewed; only the disorder average is even.
    const int n_real = 20;
    std::vector<double> m3(n_real);
    for (int r = 0; r < n_real; ++r) {
        RngStream rng(mix_seed({53, std::uint64_t(r)}));
        const SpectralHamiltonian h(sample_couplings(12, 1.0, rng));
        double acc = 0.0;
        for (long k = 0; k < h.dim(); ++k) acc += std::pow(h.eigenvalues()(k), 3);
        m3[r] = acc / double(h.dim());
    }
    double mean = 0.0, ss = 0.0;
    for (double v : m3) mean += v;
    mean /= n_real;
    for (double v : m3) ss += (v - mean) * (v - mean);
    const double se = std::sqrt(ss / (n_real - 1) / n_real);
    REQUIRE(std::abs(mean) < 4.0 * se);
}
