#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "plad/features.hpp"
#include "plad/score_map.hpp"

namespace plad::padim {

inline constexpr double kDefaultEpsilon = 0.01;

/// One Gaussian per grid cell: mean and inverse of the regularized
/// population covariance, stored as float32.
struct GaussianBank {
    std::size_t grid_h = 0;
    std::size_t grid_w = 0;
    std::size_t dim = 0;
    std::vector<float> means;    // [cells][dim]
    std::vector<float> inv_cov;  // [cells][dim][dim]
    double epsilon = kDefaultEpsilon;
    std::uint64_t reduce_seed = 0;
    std::vector<std::uint32_t> channels;  // retained input channels; empty = all
    std::uint32_t n_train = 0;

    std::size_t cells() const noexcept { return grid_h * grid_w; }

    friend bool operator==(const GaussianBank&, const GaussianBank&) = default;
};

/// Fits per-cell Gaussians. Needs >= 2 grids of one shape and epsilon > 0.
GaussianBank fit_padim(std::span<const FeatureGrid> grids, double epsilon = kDefaultEpsilon);

/// Per-cell Mahalanobis distance to the cell's Gaussian.
ScoreMap score_padim(const GaussianBank& bank, const FeatureGrid& grid);

}  // namespace plad::padim
