#include "syk/couplings.hpp"

#include <cmath>
#include <stdexcept>

namespace syk {

CouplingTensor sample_couplings(int n_majoranas, double j_strength, RngStream& rng) {
    if (n_majoranas < 8 || n_majoranas > 24 || n_majoranas % 2 != 0)
        throw std::invalid_argument("sample_couplings: N must be even, 8 <= N <= 24");
    if (j_strength < 0.0)
        throw std::invalid_argument("sample_couplings: J must be non-negative");
    CouplingTensor c;
    c.n_majoranas = n_majoranas;
    c.j_strength = j_strength;
    c.seed = rng.seed();
    const int n = n_majoranas;
    const double sigma = j_strength * std::sqrt(6.0 / (double(n) * n * n));
    c.entries.reserve(size_t(n) * (n - 1) * (n - 2) * (n - 3) / 24);
    for (int i = 1; i <= n - 3; ++i)
        for (int j = i + 1; j <= n - 2; ++j)
            for (int k = j + 1; k <= n - 1; ++k)
                for (int l = k + 1; l <= n; ++l) {
                    double v = sigma > 0.0 ? sigma * rng.normal() : 0.0;
                    c.entries.push_back({i, j, k, l, v});
                }
    return c;
}

nlohmann::json couplings_to_json(const CouplingTensor& c) {
    nlohmann::json out;
    out["n_majoranas"] = c.n_majoranas;
    out["j_strength"] = c.j_strength;
    out["seed"] = c.seed;
    nlohmann::json list = nlohmann::json::array();
    for (const auto& e : c.entries)
        list.push_back({{"i", e.i}, {"j", e.j}, {"k", e.k}, {"l", e.l}, {"value", e.value}});
    out["couplings"] = std::move(list);
    return out;
}

CouplingTensor couplings_from_json(const nlohmann::json& j) {
    CouplingTensor c;
    c.n_majoranas = j.at("n_majoranas").get<int>();
    c.j_strength = j.at("j_strength").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& e : j.at("couplings"))
        c.entries.push_back({e.at("i").get<int>(), e.at("j").get<int>(),
                             e.at("k").get<int>(), e.at("l").get<int>(),
                             e.at("value").get<double>()});
    return c;
}

}  // namespace syk
