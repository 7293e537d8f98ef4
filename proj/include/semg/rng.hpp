#pragma once

#include <cstdint>
#include <random>

#include "semg/tensor.hpp"

namespace semg {

// splitmix64 finalizer; used to derive independent stream seeds from a
// master seed plus integer keys (fold index, subject, class, trial, ...).
inline std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    return mix_seed(mix_seed(a) ^ b);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return mix_seed(mix_seed(a, b) ^ c);
}

// Deterministic RNG. The engine sequence is pinned by the standard; the
// uniform/normal transforms are hand-rolled so draws are bit-identical
// across compilers (std::normal_distribution is implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // [0, 1)
    double uniform() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Box-Muller, cosine branch only.
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    // Uniform integer in [0, n).
    int uniform_int(int n) {
        return static_cast<int>(eng_() % static_cast<std::uint64_t>(n));
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_int(static_cast<int>(i)));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 eng_;
};

// He-Normal initialization: i.i.d. N(0, 2/fan_in).
inline Tensor he_normal_init(std::vector<int> shape, int fan_in, std::uint64_t seed) {
    if (fan_in <= 0) throw std::invalid_argument("he_normal_init: fan_in must be positive");
    Tensor t(std::move(shape));
    Rng rng(seed);
    const double std_dev = std::sqrt(2.0 / static_cast<double>(fan_in));
    for (double& v : t.data) v = std_dev * rng.normal();
    return t;
}

} // namespace semg
