#include <cstdint>
#include <limits>
#include <vector>

#include "plad/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace plad::kernels {

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

namespace parallel {

void nearest_sq_distances(std::span<const float> queries, std::span<const float> bank,
                          std::size_t dim, std::span<double> out_sq) {
    const auto n_query = static_cast<std::int64_t>(queries.size() / dim);
    const std::size_t n_bank = bank.size() / dim;
#pragma omp parallel for schedule(static)
    for (std::int64_t q = 0; q < n_query; ++q) {
        const float* x = queries.data() + static_cast<std::size_t>(q) * dim;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t m = 0; m < n_bank; ++m) {
            const double d = sq_distance(x, bank.data() + m * dim, dim);
            if (d < best) best = d;
        }
        out_sq[static_cast<std::size_t>(q)] = best;
    }
}

std::size_t relax_and_argmax(std::span<const float> points, std::size_t dim,
                             std::span<const float> center, std::span<double> min_sq) {
    const auto n = static_cast<std::int64_t>(points.size() / dim);
    std::size_t arg = 0;
    double best = -1.0;
#pragma omp parallel
    {
        std::size_t local_arg = 0;
        double local_best = -1.0;
#pragma omp for schedule(static) nowait
        for (std::int64_t i = 0; i < n; ++i) {
            const auto u = static_cast<std::size_t>(i);
            const double d = sq_distance(points.data() + u * dim, center.data(), dim);
            if (d < min_sq[u]) min_sq[u] = d;
            if (min_sq[u] > local_best) {
                local_best = min_sq[u];
                local_arg = u;
            }
        }
#pragma omp critical(plad_relax_argmax)
        {
            if (local_best > best || (local_best == best && local_arg < arg)) {
                best = local_best;
                arg = local_arg;
            }
        }
    }
    return arg;
}

void mahalanobis_sq(std::span<const float> grid, std::span<const float> means,
                    std::span<const float> inv_cov, std::size_t dim, std::span<double> out_sq) {
    const auto cells = static_cast<std::int64_t>(grid.size() / dim);
#pragma omp parallel
    {
        std::vector<double> diff(dim);
#pragma omp for schedule(static)
        for (std::int64_t ci = 0; ci < cells; ++ci) {
            const auto c = static_cast<std::size_t>(ci);
            const float* x = grid.data() + c * dim;
            const float* mu = means.data() + c * dim;
            const float* a = inv_cov.data() + c * dim * dim;
            for (std::size_t k = 0; k < dim; ++k) diff[k] = static_cast<double>(x[k]) - mu[k];
            double acc = 0.0;
            for (std::size_t i = 0; i < dim; ++i) {
                double row = 0.0;
                for (std::size_t j = 0; j < dim; ++j) row += static_cast<double>(a[i * dim + j]) * diff[j];
                acc += diff[i] * row;
            }
            out_sq[c] = acc;
        }
    }
}

void cell_moments(std::span<const float> stacked, std::size_t n_grids, std::size_t cells,
                  std::size_t dim, std::span<double> means, std::span<double> cov) {
    const double inv_n = 1.0 / static_cast<double>(n_grids);
#pragma omp parallel for schedule(static)
    for (std::int64_t ci = 0; ci < static_cast<std::int64_t>(cells); ++ci) {
        const auto c = static_cast<std::size_t>(ci);
        double* mu = means.data() + c * dim;
        double* s = cov.data() + c * dim * dim;
        for (std::size_t k = 0; k < dim; ++k) mu[k] = 0.0;
        for (std::size_t n = 0; n < n_grids; ++n) {
            const float* x = stacked.data() + (n * cells + c) * dim;
            for (std::size_t k = 0; k < dim; ++k) mu[k] += x[k];
        }
        for (std::size_t k = 0; k < dim; ++k) mu[k] *= inv_n;
        for (std::size_t k = 0; k < dim * dim; ++k) s[k] = 0.0;
        for (std::size_t n = 0; n < n_grids; ++n) {
            const float* x = stacked.data() + (n * cells + c) * dim;
            for (std::size_t i = 0; i < dim; ++i) {
                const double di = x[i] - mu[i];
                for (std::size_t j = i; j < dim; ++j) s[i * dim + j] += di * (x[j] - mu[j]);
            }
        }
        for (std::size_t i = 0; i < dim; ++i) {
            for (std::size_t j = i; j < dim; ++j) {
                s[i * dim + j] *= inv_n;
                s[j * dim + i] = s[i * dim + j];
            }
        }
    }
}

}  // namespace parallel
}  // namespace plad::kernels
