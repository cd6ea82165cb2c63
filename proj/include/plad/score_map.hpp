#pragma once

#include <cstddef>
#include <vector>

namespace plad {

/// Per-cell anomaly scores; every value finite and >= 0.
struct ScoreMap {
    std::size_t grid_h = 0;
    std::size_t grid_w = 0;
    std::vector<double> values;

    double at(std::size_t y, std::size_t x) const { return values[y * grid_w + x]; }

    /// Throws Error{Argument} on a length mismatch, negative or non-finite value.
    void validate() const;

    friend bool operator==(const ScoreMap&, const ScoreMap&) = default;
};

}  // namespace plad
