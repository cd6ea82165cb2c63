#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace plad::linalg {

/// Row-major dense Cholesky factorization A = L L^T. Returns false when A is
/// not numerically positive definite. Only the lower triangle of `out` is set.
bool cholesky(std::span<const double> a, std::size_t n, std::span<double> out);

/// Solves L y = b by forward substitution.
void forward_solve(std::span<const double> lower, std::size_t n, std::span<const double> b,
                   std::span<double> y);

/// Inverse of an SPD matrix from its Cholesky factor: (L L^T)^{-1} = L^{-T} L^{-1}.
std::vector<double> inverse_from_cholesky(std::span<const double> lower, std::size_t n);

/// Mahalanobis distance sqrt(d^T (L L^T)^{-1} d) evaluated as |L^{-1} d|.
double mahalanobis_cholesky(std::span<const double> lower, std::size_t n, std::span<const double> diff);

/// Mahalanobis distance sqrt(d^T A d) with an explicit inverse A.
double mahalanobis_inverse(std::span<const double> inv, std::size_t n, std::span<const double> diff);

}  // namespace plad::linalg
