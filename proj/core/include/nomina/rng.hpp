#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace nomina {

/// Deterministic random source. The engine (mt19937_64) is bit-exact per the
/// C++ standard; the draw helpers below avoid std::uniform_*_distribution and
/// std::shuffle, whose outputs are implementation-defined. Every seeded run
/// therefore produces identical streams on any platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform integer in [0, bound). bound must be > 0.
    std::uint64_t uniform(std::uint64_t bound) { return next_u64() % bound; }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform_real() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [lo, hi).
    double uniform_real(double lo, double hi) {
        return lo + (hi - lo) * uniform_real();
    }

    /// Fisher-Yates shuffle, in place.
    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform(i));
            std::swap(items[i - 1], items[j]);
        }
    }

    /// Identity permutation of size n, then shuffled.
    std::vector<std::size_t> permutation(std::size_t n) {
        std::vector<std::size_t> p(n);
        for (std::size_t i = 0; i < n; ++i) p[i] = i;
        shuffle(p);
        return p;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace nomina
