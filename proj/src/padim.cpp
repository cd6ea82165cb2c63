#include "plad/padim.hpp"

#include <cmath>
#include <string>

#include "plad/error.hpp"
#include "plad/kernels.hpp"
#include "plad/linalg.hpp"

namespace plad {

namespace padim {

GaussianBank fit_padim(std::span<const FeatureGrid> grids, double epsilon) {
    if (grids.size() < 2)
        fail(ErrorKind::InsufficientData, "PaDiM needs at least 2 training grids, got " + std::to_string(grids.size()));
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) fail(ErrorKind::Argument, "epsilon must be positive");
    const FeatureGrid& first = grids.front();
    for (const auto& g : grids)
        if (!g.same_shape(first)) fail(ErrorKind::Dimension, "training grids differ in shape");

    const std::size_t cells = first.cells(), dim = first.dim;
    std::vector<float> stacked;
    stacked.reserve(grids.size() * cells * dim);
    for (const auto& g : grids) stacked.insert(stacked.end(), g.data.begin(), g.data.end());

    std::vector<double> means(cells * dim), cov(cells * dim * dim);
    kernels::parallel::cell_moments(stacked, grids.size(), cells, dim, means, cov);

    GaussianBank bank;
    bank.grid_h = first.grid_h;
    bank.grid_w = first.grid_w;
    bank.dim = dim;
    bank.epsilon = epsilon;
    bank.n_train = static_cast<std::uint32_t>(grids.size());
    bank.means.assign(means.begin(), means.end());
    bank.inv_cov.resize(cells * dim * dim);

    bool ok = true;
#pragma omp parallel
    {
        std::vector<double> lower(dim * dim);
#pragma omp for schedule(static)
        for (std::int64_t ci = 0; ci < static_cast<std::int64_t>(cells); ++ci) {
            const auto c = static_cast<std::size_t>(ci);
            std::span<double> sigma(cov.data() + c * dim * dim, dim * dim);
            for (std::size_t k = 0; k < dim; ++k) sigma[k * dim + k] += epsilon;
            if (!linalg::cholesky(sigma, dim, lower)) {
#pragma omp atomic write
                ok = false;
                continue;
            }
            const auto inv = linalg::inverse_from_cholesky(lower, dim);
            for (std::size_t k = 0; k < dim * dim; ++k) bank.inv_cov[c * dim * dim + k] = static_cast<float>(inv[k]);
        }
    }
    if (!ok) fail(ErrorKind::Numeric, "regularized covariance is not positive definite");
    return bank;
}

ScoreMap score_padim(const GaussianBank& bank, const FeatureGrid& grid) {
    if (grid.grid_h != bank.grid_h || grid.grid_w != bank.grid_w || grid.dim != bank.dim)
        fail(ErrorKind::Dimension, "grid [" + std::to_string(grid.grid_h) + ", " + std::to_string(grid.grid_w) + ", " +
                                       std::to_string(grid.dim) + "] does not match PaDiM bank [" +
                                       std::to_string(bank.grid_h) + ", " + std::to_string(bank.grid_w) + ", " +
                                       std::to_string(bank.dim) + "]");
    ScoreMap map{grid.grid_h, grid.grid_w, std::vector<double>(grid.cells())};
    kernels::parallel::mahalanobis_sq(grid.data, bank.means, bank.inv_cov, bank.dim, map.values);
    for (double& v : map.values) v = std::sqrt(v > 0.0 ? v : 0.0);
    return map;
}

}  // namespace padim
}  // namespace plad
