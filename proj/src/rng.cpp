#include "pairnet/rng.hpp"

#include <cmath>

namespace pairnet {

namespace {

inline std::uint64_t splitmix_step(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

} // namespace

std::uint64_t Rng::next_u64() { return splitmix_step(state_); }

double Rng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::below(std::uint64_t n) {
    // rejection sampling keeps the draw unbiased
    const std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
    std::uint64_t v;
    do {
        v = next_u64();
    } while (v >= limit);
    return v % n;
}

double Rng::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    // Box-Muller; 1-u keeps the log argument in (0,1]
    double u = 1.0 - uniform();
    double v = uniform();
    double r = std::sqrt(-2.0 * std::log(u));
    double a = 6.28318530717958647692 * v;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
}

std::uint64_t Rng::mix(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) {
    std::uint64_t state = a;
    std::uint64_t h = splitmix_step(state);
    state ^= b + 0x9e3779b97f4a7c15ull;
    h ^= splitmix_step(state);
    state ^= c + 0xbf58476d1ce4e5b9ull;
    h ^= splitmix_step(state);
    state ^= d + 0x94d049bb133111ebull;
    h ^= splitmix_step(state);
    return h;
}

} // namespace pairnet
