// Microbenchmarks for the hot paths: Hamiltonian assembly and spectral
// decomposition, propagator application, monitored-trajectory stepping, and
// the decoupling-error kernels.
#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "syk/couplings.hpp"
#include "syk/decoupling.hpp"
#include "syk/hamiltonian.hpp"
#include "syk/observables.hpp"
#include "syk/rng.hpp"
#include "syk/trajectory.hpp"

using namespace syk;

namespace {

CouplingTensor tensor(int n) {
    RngStream rng(7);
    return sample_couplings(n, 1.0, rng);
}

const SpectralHamiltonian& ham16() {
    static const SpectralHamiltonian h{tensor(16)};
    return h;
}

void bm_build_matrix(benchmark::State& state) {
    const CouplingTensor c = tensor(int(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(build_hamiltonian_matrix(c));
}
BENCHMARK(bm_build_matrix)->Arg(12)->Arg(16)->Unit(benchmark::kMillisecond);

void bm_spectral_decomposition(benchmark::State& state) {
    const CouplingTensor c = tensor(int(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(SpectralHamiltonian{c});
}
BENCHMARK(bm_spectral_decomposition)->Arg(12)->Arg(16)->Unit(benchmark::kMillisecond);

void bm_propagator(benchmark::State& state) {
    const auto& h = ham16();
    double t = 0.1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(h.propagator(t));
        t += 0.1;
    }
}
BENCHMARK(bm_propagator)->Unit(benchmark::kMillisecond);

void bm_pure_trajectory(benchmark::State& state) {
    TrajectoryConfig cfg;
    cfg.dt = 0.05;
    cfg.t_max = 10.0;
    cfg.gamma_m = 0.5;
    cfg.p_m = 1.0;
    cfg.record_interval = 0.25;
    cfg.initial = InitialState::all_up;
    cfg.seed = 5;
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            run_trajectory(ham16(), cfg, {Observable::half_chain_entropy}, {}));
        ++cfg.seed;
    }
}
BENCHMARK(bm_pure_trajectory)->Unit(benchmark::kMillisecond);

void bm_mixed_trajectory(benchmark::State& state) {
    TrajectoryConfig cfg;
    cfg.dt = 0.05;
    cfg.t_max = 10.0;
    cfg.gamma_m = 0.5;
    cfg.p_m = 0.5;
    cfg.record_interval = 0.25;
    cfg.initial = InitialState::maximally_mixed;
    cfg.seed = 5;
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_trajectory(ham16(), cfg, {Observable::purity}, {}));
        ++cfg.seed;
    }
}
BENCHMARK(bm_mixed_trajectory)->Unit(benchmark::kMillisecond);

void bm_haar_unitary(benchmark::State& state) {
    RngStream rng(11);
    for (auto _ : state) benchmark::DoNotOptimize(haar_unitary(state.range(0), rng));
}
BENCHMARK(bm_haar_unitary)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void bm_decoupling_error(benchmark::State& state) {
    DecouplingSetup setup{int(state.range(0)), 0.5, 0.5, 1};
    QuantumState base = prepare_purification(setup);
    RngStream rng(13);
    const Eigen::MatrixXcd u = haar_unitary(base.dim() >> ref_qubits(setup), rng);
    apply_system_unitary(base, u, ref_qubits(setup));
    std::vector<int> sites;
    for (int s = 1; s <= setup.n_system / 2; ++s) sites.push_back(s);
    for (auto _ : state)
        benchmark::DoNotOptimize(decoupling_error(base, ref_qubits(setup), sites));
}
BENCHMARK(bm_decoupling_error)->Arg(6)->Arg(8)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
