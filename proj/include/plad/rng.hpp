#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace plad {

/// Seeded generator with platform-stable derived draws. std::mt19937_64 has a
/// standardized output sequence, but the std distributions do not, so the
/// bounded/uniform/normal mappings here are written out explicitly.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    /// Uniform integer in [0, bound) by rejection sampling; bound > 0.
    std::uint64_t uniform_index(std::uint64_t bound);
    /// Uniform double in [0, 1) from the top 53 bits.
    double uniform01();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
    /// Standard normal via Box-Muller (cached second value).
    double normal();

    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(uniform_index(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view text);
std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value);

}  // namespace plad
