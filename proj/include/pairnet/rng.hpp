#pragma once

#include <cstdint>
#include <vector>

namespace pairnet {

// Deterministic splitmix64 generator. The standard library's shuffle and
// normal_distribution are implementation-defined, and the project contract
// is bit-identical corpora and models for a given seed, so all randomness
// goes through this.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64();

    /// Uniform in [0, 1), 53-bit resolution.
    double uniform();

    /// Unbiased integer in [0, n); n must be > 0.
    std::uint64_t below(std::uint64_t n);

    /// Standard normal via Box-Muller (second value cached).
    double normal();

    /// In-place Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    /// Derives an independent stream key from up to four parts. Used to make
    /// per-pair / per-record streams that do not depend on execution order.
    static std::uint64_t mix(std::uint64_t a, std::uint64_t b = 0,
                             std::uint64_t c = 0, std::uint64_t d = 0);

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace pairnet
