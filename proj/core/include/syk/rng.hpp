#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace syk {

// splitmix64 step; stable across platforms, used only for seed derivation.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Folds an ordered token list into one seed. Used to split independent
// streams off a master seed: mix_seed({master, mode_id, cell_i, cell_j, run}).
inline std::uint64_t mix_seed(std::initializer_list<std::uint64_t> tokens) {
    std::uint64_t s = 0x243f6a8885a308d3ull;
    for (std::uint64_t t : tokens) s = splitmix64(s ^ t);
    return s;
}

// One RNG stream. mt19937_64 plus explicit uniform/normal transforms, so the
// draw sequence for a given seed is identical on every standard library.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) : engine_(seed), seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    // uniform double in [0, 1), 53 bits
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // standard normal, Box-Muller; consumes exactly two engine words
    double normal() {
        double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    // true with probability p
    bool bernoulli(double p) { return uniform() < p; }

  private:
    std::mt19937_64 engine_;
    std::uint64_t seed_;
};

}  // namespace syk
