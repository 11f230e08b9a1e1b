#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>
#include <vector>

namespace aircal {

// Deterministic random source. std::mt19937_64 output is pinned by the
// standard, and every derived draw below is written out by hand, so the
// same seed yields the same stream on any platform. Do not swap in
// std::uniform_real_distribution or std::normal_distribution: their
// algorithms are implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer on [0, n). Rejection-free modulo is fine here: n is
    // always tiny relative to 2^64 so the bias is far below noise.
    std::uint64_t below(std::uint64_t n) { return engine_() % n; }

    // Standard normal via Box-Muller; caches the second deviate.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        if (v.size() < 2) return;
        for (std::size_t i = v.size() - 1; i > 0; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i + 1));
            std::swap(v[i], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

namespace detail {
inline std::uint64_t fnv1a_step(std::uint64_t h, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xffu;
        h *= 0x100000001b3ull;
    }
    return h;
}
}  // namespace detail

// FNV-1a over raw bytes; also used for payload checksums.
inline std::uint64_t fnv1a(const void* data, std::size_t size,
                           std::uint64_t h = 0xcbf29ce484222325ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

// Stable sub-seed derivation: mixes the root seed with a textual tag and an
// index so that independent consumers (per-tree seeds, per-cell seeds) never
// share a stream.
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view tag,
                                 std::uint64_t index = 0) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    h = detail::fnv1a_step(h, root);
    h = fnv1a(tag.data(), tag.size(), h);
    h = detail::fnv1a_step(h, index);
    return h;
}

}  // namespace aircal
