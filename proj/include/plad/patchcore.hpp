#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "plad/features.hpp"
#include "plad/score_map.hpp"

namespace plad::patchcore {

inline constexpr double kDefaultCoresetRatio = 0.1;

/// Position-agnostic coreset of normal patch embeddings.
struct MemoryBank {
    std::size_t dim = 0;
    std::vector<float> vectors;  // [M][dim], greedy selection order
    double coreset_ratio = kDefaultCoresetRatio;
    std::uint64_t coreset_seed = 0;
    std::uint64_t n_source = 0;

    std::size_t size() const noexcept { return dim == 0 ? 0 : vectors.size() / dim; }
    /// Bytes held by the bank vectors.
    std::size_t storage_bytes() const noexcept { return vectors.size() * sizeof(float); }

    friend bool operator==(const MemoryBank&, const MemoryBank&) = default;
};

/// max(1, round(ratio * n_source)).
std::size_t coreset_size(std::size_t n_source, double ratio);

/// Greedy k-center over pooled vectors ([n][dim]) starting at `start`: each
/// step adds the vector farthest from its nearest selected vector, lowest
/// index on ties. Returns selected indices in selection order.
std::vector<std::size_t> greedy_k_center(std::span<const float> pooled, std::size_t dim, std::size_t count,
                                         std::size_t start);

/// Pools every cell of every grid and subsamples a coreset. When `source_grid`
/// is given it receives, per bank row, the index of the grid it came from.
MemoryBank fit_patchcore(std::span<const FeatureGrid> grids, double coreset_ratio = kDefaultCoresetRatio,
                         std::uint64_t seed = 0, std::vector<std::size_t>* source_grid = nullptr);

/// Per-cell Euclidean distance to the nearest bank vector (exact search).
ScoreMap score_patchcore(const MemoryBank& bank, const FeatureGrid& grid);

/// Scores a training grid against the bank without the rows it contributed.
/// A bank row can be a copy of the grid's own cell, so plain re-scoring of
/// training images underestimates what unseen normals score.
ScoreMap score_patchcore_excluding(const MemoryBank& bank, const FeatureGrid& grid,
                                   std::span<const std::size_t> source_grid, std::size_t exclude);

}  // namespace plad::patchcore
