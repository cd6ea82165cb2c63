#include "plad/linalg.hpp"

#include <cmath>

namespace plad::linalg {

bool cholesky(std::span<const double> a, std::size_t n, std::span<double> out) {
    for (std::size_t i = 0; i < n * n; ++i) out[i] = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double diag = a[j * n + j];
        for (std::size_t k = 0; k < j; ++k) diag -= out[j * n + k] * out[j * n + k];
        if (!(diag > 0.0) || !std::isfinite(diag)) return false;
        const double ljj = std::sqrt(diag);
        out[j * n + j] = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double v = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) v -= out[i * n + k] * out[j * n + k];
            out[i * n + j] = v / ljj;
        }
    }
    return true;
}

void forward_solve(std::span<const double> lower, std::size_t n, std::span<const double> b,
                   std::span<double> y) {
    for (std::size_t i = 0; i < n; ++i) {
        double v = b[i];
        for (std::size_t k = 0; k < i; ++k) v -= lower[i * n + k] * y[k];
        y[i] = v / lower[i * n + i];
    }
}

std::vector<double> inverse_from_cholesky(std::span<const double> lower, std::size_t n) {
    // Invert L column by column, then form L^{-T} L^{-1}.
    std::vector<double> linv(n * n, 0.0);
    std::vector<double> e(n), col(n);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) e[i] = (i == j) ? 1.0 : 0.0;
        forward_solve(lower, n, e, col);
        for (std::size_t i = 0; i < n; ++i) linv[i * n + j] = col[i];
    }
    std::vector<double> inv(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t k = j; k < n; ++k) acc += linv[k * n + i] * linv[k * n + j];
            inv[i * n + j] = acc;
            inv[j * n + i] = acc;
        }
    }
    return inv;
}

double mahalanobis_cholesky(std::span<const double> lower, std::size_t n, std::span<const double> diff) {
    std::vector<double> y(n);
    forward_solve(lower, n, diff, y);
    double acc = 0.0;
    for (double v : y) acc += v * v;
    return std::sqrt(acc);
}

double mahalanobis_inverse(std::span<const double> inv, std::size_t n, std::span<const double> diff) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) row += inv[i * n + j] * diff[j];
        acc += diff[i] * row;
    }
    return std::sqrt(acc > 0.0 ? acc : 0.0);
}

}  // namespace plad::linalg
