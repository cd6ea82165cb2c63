#pragma once

// Data-parallel inner loops of fitting and scoring. Every kernel exists twice:
// `serial` is the reference kept for testing and benchmarking, `parallel`
// distributes independent outputs over OpenMP threads. Each output element is
// computed by exactly one thread in the same arithmetic order as the serial
// version, so the two agree bit-for-bit.

#include <cstddef>
#include <span>

namespace plad::kernels {

/// Squared Euclidean distance accumulated in double, dimension order.
inline double sq_distance(const float* a, const float* b, std::size_t dim) {
    double acc = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
        const double d = static_cast<double>(a[k]) - static_cast<double>(b[k]);
        acc += d * d;
    }
    return acc;
}

int max_threads();

namespace serial {
/// out_sq[q] = min over bank rows of the squared distance to query row q.
void nearest_sq_distances(std::span<const float> queries, std::span<const float> bank,
                          std::size_t dim, std::span<double> out_sq);

/// min_sq[i] = min(min_sq[i], |points_i - center|^2); returns the argmax of the
/// updated min_sq, lowest index on ties.
std::size_t relax_and_argmax(std::span<const float> points, std::size_t dim,
                             std::span<const float> center, std::span<double> min_sq);

/// out_sq[c] = (x_c - mu_c)^T A_c (x_c - mu_c) for every cell c.
void mahalanobis_sq(std::span<const float> grid, std::span<const float> means,
                    std::span<const float> inv_cov, std::size_t dim, std::span<double> out_sq);

/// Per-cell mean and population (1/N) covariance over N grids stacked as
/// [N][cells][dim]. means: [cells][dim], cov: [cells][dim][dim].
void cell_moments(std::span<const float> stacked, std::size_t n_grids, std::size_t cells,
                  std::size_t dim, std::span<double> means, std::span<double> cov);
}  // namespace serial

namespace parallel {
/// out_sq[q] = min over bank rows of the squared distance to query row q.
void nearest_sq_distances(std::span<const float> queries, std::span<const float> bank,
                          std::size_t dim, std::span<double> out_sq);

/// min_sq[i] = min(min_sq[i], |points_i - center|^2); returns the argmax of the
/// updated min_sq, lowest index on ties.
std::size_t relax_and_argmax(std::span<const float> points, std::size_t dim,
                             std::span<const float> center, std::span<double> min_sq);

/// out_sq[c] = (x_c - mu_c)^T A_c (x_c - mu_c) for every cell c.
void mahalanobis_sq(std::span<const float> grid, std::span<const float> means,
                    std::span<const float> inv_cov, std::size_t dim, std::span<double> out_sq);

/// Per-cell mean and population (1/N) covariance over N grids stacked as
/// [N][cells][dim]. means: [cells][dim], cov: [cells][dim][dim].
void cell_moments(std::span<const float> stacked, std::size_t n_grids, std::size_t cells,
                  std::size_t dim, std::span<double> means, std::span<double> cov);
}  // namespace parallel

}  // namespace plad::kernels
