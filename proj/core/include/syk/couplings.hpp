#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <vector>

#include "syk/rng.hpp"

namespace syk {

struct CouplingEntry {
    int i, j, k, l;  // strictly increasing 1-based Majorana indices
    double value;
};

// One disorder realization: all C(N,4) antisymmetrized four-body couplings,
// stored in lexicographic order of (i,j,k,l).
struct CouplingTensor {
    int n_majoranas = 0;
    double j_strength = 0.0;
    std::uint64_t seed = 0;
    std::vector<CouplingEntry> entries;
};

// Gaussian couplings with mean 0 and variance 6 J^2 / N^3, drawn in
// lexicographic order so a seed fully determines the tensor. J = 0 yields
// the zero tensor. Requires even N with 8 <= N <= 24.
CouplingTensor sample_couplings(int n_majoranas, double j_strength, RngStream& rng);

nlohmann::json couplings_to_json(const CouplingTensor& c);
CouplingTensor couplings_from_json(const nlohmann::json& j);

}  // namespace syk
