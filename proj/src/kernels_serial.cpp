#include <limits>
#include <vector>

#include "plad/kernels.hpp"

namespace plad::kernels::serial {

void nearest_sq_distances(std::span<const float> queries, std::span<const float> bank,
                          std::size_t dim, std::span<double> out_sq) {
    const std::size_t n_query = queries.size() / dim;
    const std::size_t n_bank = bank.size() / dim;
    for (std::size_t q = 0; q < n_query; ++q) {
        const float* x = queries.data() + q * dim;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t m = 0; m < n_bank; ++m) {
            const double d = sq_distance(x, bank.data() + m * dim, dim);
            if (d < best) best = d;
        }
        out_sq[q] = best;
    }
}

std::size_t relax_and_argmax(std::span<const float> points, std::size_t dim,
                             std::span<const float> center, std::span<double> min_sq) {
    const std::size_t n = points.size() / dim;
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = sq_distance(points.data() + i * dim, center.data(), dim);
        if (d < min_sq[i]) min_sq[i] = d;
        if (min_sq[i] > best) {
            best = min_sq[i];
            arg = i;
        }
    }
    return arg;
}

void mahalanobis_sq(std::span<const float> grid, std::span<const float> means,
                    std::span<const float> inv_cov, std::size_t dim, std::span<double> out_sq) {
    const std::size_t cells = grid.size() / dim;
    std::vector<double> diff(dim);
    for (std::size_t c = 0; c < cells; ++c) {
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

void cell_moments(std::span<const float> stacked, std::size_t n_grids, std::size_t cells,
                  std::size_t dim, std::span<double> means, std::span<double> cov) {
    const double inv_n = 1.0 / static_cast<double>(n_grids);
    for (std::size_t c = 0; c < cells; ++c) {
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

}  // namespace plad::kernels::serial
