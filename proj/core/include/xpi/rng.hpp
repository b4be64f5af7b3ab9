#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace xpi {

/// Seeded random generator with explicit draw-to-value mappings.
///
/// Standard-library distributions are implementation-defined, which would
/// break byte-identical reproducibility across toolchains; everything here
/// is mapped from raw mt19937_64 output by hand.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Uniform double in [0, 1).
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in {0, ..., n-1}.
    int uniform_int(int n) {
        if (n <= 0) throw std::invalid_argument("Rng::uniform_int: n must be positive");
        return static_cast<int>(uniform() * static_cast<double>(n));
    }

    /// Sample an index from an unnormalized non-negative weight vector.
    int sample_index(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        double u = uniform() * total;
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
            acc += weights[i];
            if (u < acc) return static_cast<int>(i);
        }
        return static_cast<int>(weights.size()) - 1;
    }

    /// Number of failures before the first success, P(k) = p (1-p)^k.
    /// p = 0 is rejected; the caller owns that degenerate case.
    long geometric(double p) {
        if (p <= 0.0 || p > 1.0) throw std::invalid_argument("Rng::geometric: p must be in (0,1]");
        if (p == 1.0) return 0;
        double u = uniform();
        return static_cast<long>(std::floor(std::log1p(-u) / std::log1p(-p)));
    }

    /// Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (int i = static_cast<int>(items.size()) - 1; i > 0; --i) {
            int j = uniform_int(i + 1);
            std::swap(items[static_cast<std::size_t>(i)], items[static_cast<std::size_t>(j)]);
        }
    }

    std::uint64_t next_raw() { return gen_(); }

  private:
    std::mt19937_64 gen_;
};

}  // namespace xpi
