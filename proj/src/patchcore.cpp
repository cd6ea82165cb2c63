#include "plad/patchcore.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "plad/error.hpp"
#include "plad/kernels.hpp"
#include "plad/rng.hpp"

namespace plad::patchcore {

std::size_t coreset_size(std::size_t n_source, double ratio) {
    const auto m = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n_source)));
    return std::min(std::max<std::size_t>(1, m), n_source);
}

std::vector<std::size_t> greedy_k_center(std::span<const float> pooled, std::size_t dim, std::size_t count,
                                         std::size_t start) {
    const std::size_t n = pooled.size() / dim;
    if (start >= n) fail(ErrorKind::Argument, "greedy start index out of range");
    count = std::min(count, n);
    std::vector<std::size_t> selected;
    selected.reserve(count);
    // Selected points are pinned at -1 so they are never chosen again, even
    // when every remaining point duplicates one already in the bank.
    std::vector<double> min_sq(n, std::numeric_limits<double>::infinity());
    std::size_t next = start;
    while (selected.size() < count) {
        selected.push_back(next);
        min_sq[next] = -1.0;
        if (selected.size() == count) break;
        next = kernels::parallel::relax_and_argmax(pooled, dim, pooled.subspan(next * dim, dim), min_sq);
    }
    return selected;
}

MemoryBank fit_patchcore(std::span<const FeatureGrid> grids, double coreset_ratio, std::uint64_t seed,
                         std::vector<std::size_t>* source_grid) {
    if (grids.empty()) fail(ErrorKind::InsufficientData, "PatchCore needs at least 1 training grid");
    if (!(coreset_ratio > 0.0 && coreset_ratio <= 1.0))
        fail(ErrorKind::Argument, "coreset ratio must be in (0, 1], got " + std::to_string(coreset_ratio));
    const std::size_t dim = grids.front().dim;
    std::vector<float> pooled;
    for (const auto& g : grids) {
        if (!g.same_shape(grids.front())) fail(ErrorKind::Dimension, "training grids differ in shape");
        pooled.insert(pooled.end(), g.data.begin(), g.data.end());
    }
    const std::size_t n = pooled.size() / dim;
    if (n == 0) fail(ErrorKind::InsufficientData, "training grids hold no cells");

    Rng rng(seed);
    const std::size_t start = static_cast<std::size_t>(rng.uniform_index(n));
    const auto chosen = greedy_k_center(pooled, dim, coreset_size(n, coreset_ratio), start);

    MemoryBank bank;
    bank.dim = dim;
    bank.coreset_ratio = coreset_ratio;
    bank.coreset_seed = seed;
    bank.n_source = n;
    bank.vectors.reserve(chosen.size() * dim);
    for (auto idx : chosen)
        bank.vectors.insert(bank.vectors.end(), pooled.begin() + static_cast<std::ptrdiff_t>(idx * dim),
                            pooled.begin() + static_cast<std::ptrdiff_t>((idx + 1) * dim));
    if (source_grid) {
        const std::size_t cells = grids.front().cells();
        source_grid->clear();
        for (auto idx : chosen) source_grid->push_back(idx / cells);
    }
    return bank;
}

ScoreMap score_patchcore(const MemoryBank& bank, const FeatureGrid& grid) {
    if (grid.dim != bank.dim)
        fail(ErrorKind::Dimension, "grid dim " + std::to_string(grid.dim) + " does not match bank dim " +
                                       std::to_string(bank.dim));
    ScoreMap map{grid.grid_h, grid.grid_w, std::vector<double>(grid.cells())};
    kernels::parallel::nearest_sq_distances(grid.data, bank.vectors, bank.dim, map.values);
    for (double& v : map.values) v = std::sqrt(v);
    return map;
}

ScoreMap score_patchcore_excluding(const MemoryBank& bank, const FeatureGrid& grid,
                                   std::span<const std::size_t> source_grid, std::size_t exclude) {
    if (source_grid.size() != bank.size()) fail(ErrorKind::Dimension, "source index does not match bank size");
    MemoryBank rest;
    rest.dim = bank.dim;
    for (std::size_t i = 0; i < bank.size(); ++i) {
        if (source_grid[i] == exclude) continue;
        const auto row = bank.vectors.begin() + static_cast<std::ptrdiff_t>(i * bank.dim);
        rest.vectors.insert(rest.vectors.end(), row, row + static_cast<std::ptrdiff_t>(bank.dim));
    }
    if (rest.size() == 0) fail(ErrorKind::InsufficientData, "bank holds rows from a single training grid only");
    return score_patchcore(rest, grid);
}

}  // namespace plad::patchcore
