#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "plad/error.hpp"
#include "plad/features.hpp"
#include "plad/linalg.hpp"
#include "plad/padim.hpp"
#include "plad/synthgear.hpp"
#include "test_util.hpp"

using namespace plad;
using namespace plad::padim;

namespace {

FeatureGrid one_cell(std::vector<float> v) {
    const std::size_t dim = v.size();
    return FeatureGrid{1, 1, dim, std::move(v)};
}

std::vector<FeatureGrid> random_grids(std::size_t n, std::size_t cells, std::size_t dim, std::uint64_t seed) {
    std::mt19937_64 eng(seed);
    std::normal_distribution<float> nd(0.f, 1.f);
    std::vector<FeatureGrid> out;
    for (std::size_t i = 0; i < n; ++i) {
        FeatureGrid g{1, cells, dim, std::vector<float>(cells * dim)};
        for (float& v : g.data) v = nd(eng);
        out.push_back(std::move(g));
    }
    return out;
}

}  // namespace

TEST(Fit, OneDimensionalHandExample) {
    const std::vector<FeatureGrid> grids = {one_cell({0.f}), one_cell({2.f})};
    const GaussianBank b = fit_padim(grids, 0.01);
    EXPECT_FLOAT_EQ(b.means[0], 1.0f);
    EXPECT_NEAR(b.inv_cov[0], 1.0 / 1.01, 1e-7);
    EXPECT_EQ(b.n_train, 2u);
    EXPECT_DOUBLE_EQ(b.epsilon, 0.01);
}

TEST(Fit, TwoDimensionalClosedFormInverse) {
    const std::vector<FeatureGrid> grids = {one_cell({0.f, 0.f}), one_cell({1.f, 1.f})};
    const GaussianBank b = fit_padim(grids, 0.01);
    // cov = [[0.26, 0.25], [0.25, 0.26]]; inverse = adj / det.
    const double a = 0.26, c = 0.25, det = a * a - c * c;
    const double expect[4] = {a / det, -c / det, -c / det, a / det};
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(b.inv_cov[i], expect[i], 1e-5 * std::abs(expect[i]));
    EXPECT_FLOAT_EQ(b.means[0], 0.5f);
    EXPECT_FLOAT_EQ(b.means[1], 0.5f);
}

TEST(Fit, IdenticalGridsGiveScaledIdentity) {
    const FeatureGrid g{2, 2, 3, std::vector<float>(12, 0.3f)};
    const std::vector<FeatureGrid> grids = {g, g, g};
    const GaussianBank b = fit_padim(grids, 0.5);
    for (std::size_t c = 0; c < 4; ++c)
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) EXPECT_FLOAT_EQ(b.inv_cov[(c * 3 + i) * 3 + j], i == j ? 2.0f : 0.0f);
}

TEST(Fit, InverseTimesCovarianceIsIdentity) {
    const std::size_t dim = 6, cells = 5, n = 4;  // n < dim: epsilon carries the rank
    const auto grids = random_grids(n, cells, dim, 11);
    const GaussianBank b = fit_padim(grids, 0.01);
    for (std::size_t c = 0; c < cells; ++c) {
        Eigen::MatrixXd x(n, dim);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < dim; ++k) x(Eigen::Index(i), Eigen::Index(k)) = grids[i].data[c * dim + k];
        const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
        const Eigen::MatrixXd cov = centered.transpose() * centered / double(n) + 0.01 * Eigen::MatrixXd::Identity(dim, dim);
        Eigen::MatrixXd inv(dim, dim);
        for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t j = 0; j < dim; ++j) inv(Eigen::Index(i), Eigen::Index(j)) = b.inv_cov[(c * dim + i) * dim + j];
        const double err = (inv * cov - Eigen::MatrixXd::Identity(dim, dim)).cwiseAbs().maxCoeff();
        EXPECT_LT(err, 1e-5);  // float32 storage of entries up to 1/epsilon
    }
}

TEST(Fit, Errors) {
    const std::vector<FeatureGrid> single = {one_cell({1.f})};
    EXPECT_EQ(test::kind_of([&] { fit_padim(single); }), ErrorKind::InsufficientData);
    const std::vector<FeatureGrid> mixed = {one_cell({1.f}), one_cell({1.f, 2.f})};
    EXPECT_EQ(test::kind_of([&] { fit_padim(mixed); }), ErrorKind::Dimension);
    const std::vector<FeatureGrid> ok = {one_cell({1.f}), one_cell({2.f})};
    EXPECT_EQ(test::kind_of([&] { fit_padim(ok, 0.0); }), ErrorKind::Argument);
}

TEST(Score, HandExamples) {
    GaussianBank b;
    b.grid_h = b.grid_w = 1;
    b.dim = 2;
    b.means = {1.f, 1.f};
    b.inv_cov = {1.f, 0.f, 0.f, 1.f};
    EXPECT_DOUBLE_EQ(score_padim(b, one_cell({4.f, 5.f})).values[0], 5.0);
    EXPECT_DOUBLE_EQ(score_padim(b, one_cell({1.f, 1.f})).values[0], 0.0);

    GaussianBank one;
    one.grid_h = one.grid_w = 1;
    one.dim = 1;
    one.means = {0.f};
    one.inv_cov = {0.25f};
    EXPECT_DOUBLE_EQ(score_padim(one, one_cell({2.f})).values[0], 1.0);

    EXPECT_EQ(test::kind_of([&] { score_padim(b, one_cell({1.f})); }), ErrorKind::Dimension);
}

TEST(Score, MeanScoresZero) {
    const auto grids = random_grids(8, 6, 3, 2);
    const GaussianBank b = fit_padim(grids);
    FeatureGrid mean_grid{1, 6, 3, b.means};
    for (double v : score_padim(b, mean_grid).values) EXPECT_NEAR(v, 0.0, 1e-6);
}

TEST(Score, RotationInvariant) {
    // epsilon * I commutes with rotations, so invariance holds for any epsilon.
    const std::size_t dim = 5, cells = 4;
    const auto grids = random_grids(12, cells, dim, 21);
    const auto probes = random_grids(3, cells, dim, 22);
    std::srand(5);
    const Eigen::MatrixXd r = Eigen::HouseholderQR<Eigen::MatrixXd>(Eigen::MatrixXd::Random(dim, dim)).householderQ();
    auto rotate = [&](const FeatureGrid& g) {
        FeatureGrid out = g;
        for (std::size_t c = 0; c < g.cells(); ++c) {
            Eigen::VectorXd v(dim);
            for (std::size_t k = 0; k < dim; ++k) v(Eigen::Index(k)) = g.data[c * dim + k];
            const Eigen::VectorXd w = r * v;
            for (std::size_t k = 0; k < dim; ++k) out.data[c * dim + k] = static_cast<float>(w(Eigen::Index(k)));
        }
        return out;
    };
    std::vector<FeatureGrid> rotated;
    for (const auto& g : grids) rotated.push_back(rotate(g));
    const GaussianBank a = fit_padim(grids), b = fit_padim(rotated);
    for (const auto& p : probes) {
        const auto sa = score_padim(a, p), sb = score_padim(b, rotate(p));
        for (std::size_t c = 0; c < cells; ++c) EXPECT_NEAR(sa.values[c], sb.values[c], 1e-4 * sa.values[c]);
    }
}

TEST(Linalg, CholeskyRouteMatchesExplicitInverse) {
    std::mt19937_64 eng(9);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + trial % 8;
        Eigen::MatrixXd a(n, n);
        for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = u(eng);
        const Eigen::MatrixXd spd = a * a.transpose() + 0.1 * Eigen::MatrixXd::Identity(n, n);
        const Eigen::MatrixXd inv = spd.inverse();
        std::vector<double> m(n * n), l(n * n), d(n), inv_flat(n * n);
        for (std::size_t i = 0; i < n; ++i) {
            d[i] = u(eng);
            for (std::size_t j = 0; j < n; ++j) {
                m[i * n + j] = spd(Eigen::Index(i), Eigen::Index(j));
                inv_flat[i * n + j] = inv(Eigen::Index(i), Eigen::Index(j));
            }
        }
        ASSERT_TRUE(linalg::cholesky(m, n, l));
        const double via_chol = linalg::mahalanobis_cholesky(l, n, d);
        const double via_inv = linalg::mahalanobis_inverse(inv_flat, n, d);
        ASSERT_NEAR(via_chol, via_inv, 1e-8 * std::max(1.0, via_inv)) << "trial " << trial;

        const auto ours = linalg::inverse_from_cholesky(l, n);
        for (std::size_t k = 0; k < n * n; ++k) ASSERT_NEAR(ours[k], inv_flat[k], 1e-8 * std::max(1.0, std::abs(inv_flat[k])));
    }
}

TEST(Linalg, CholeskyRejectsIndefinite) {
    const std::vector<double> m = {1, 2, 2, 1};
    std::vector<double> l(4);
    EXPECT_FALSE(linalg::cholesky(m, 2, l));
}

TEST(Separation, TrainingCellsScoreBelowDefects) {
    std::vector<FeatureGrid> train;
    for (std::uint64_t s = 1; s <= 15; ++s) train.push_back(extract_builtin(synth::render(synth::SceneSpec{s}), ExtractorConfig{}));
    const GaussianBank b = fit_padim(train);
    auto mean_of = [](const ScoreMap& m) {
        double acc = 0;
        for (double v : m.values) acc += v;
        return acc / double(m.values.size());
    };
    double worst_train = 0;
    for (const auto& g : train) worst_train = std::max(worst_train, mean_of(score_padim(b, g)));
    for (auto d : synth::kDefects) {
        synth::SceneSpec spec{100};
        spec.product = d;
        const double defect = mean_of(score_padim(b, extract_builtin(synth::render(spec), ExtractorConfig{})));
        EXPECT_LE(worst_train, defect) << synth::to_string(d);
    }
}
