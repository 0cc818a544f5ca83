#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "tra/regression.hpp"
#include "tra/rng.hpp"

namespace {

tra::PairSample noisy_cubic(std::size_t n, double sigma, std::uint64_t seed) {
    tra::CounterRng rng(seed);
    tra::PairSample s;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = rng.normal();
        s.x.push_back(x);
        s.y.push_back(x * x * x + sigma * rng.normal());
    }
    return s;
}

}  // namespace

TEST(AssignFolds, SizesAndPartition) {
    const auto f4 = tra::assign_folds(4, 2, 99);
    EXPECT_EQ(f4.members(0).size(), 2u);
    EXPECT_EQ(f4.members(1).size(), 2u);

    const auto f5 = tra::assign_folds(5, 2, 1);
    std::multiset<std::size_t> sizes = {f5.members(0).size(), f5.members(1).size()};
    EXPECT_EQ(sizes, (std::multiset<std::size_t>{2, 3}));

    for (std::size_t n : {10u, 11u, 37u, 100u}) {
        const auto f = tra::assign_folds(n, 5, n);
        std::size_t total = 0;
        std::size_t lo = n;
        std::size_t hi = 0;
        for (std::size_t k = 0; k < 5; ++k) {
            const std::size_t size = f.members(k).size();
            total += size;
            lo = std::min(lo, size);
            hi = std::max(hi, size);
        }
        EXPECT_EQ(total, n);
        EXPECT_GE(lo, 1u);
        EXPECT_LE(hi - lo, 1u);
    }
}

TEST(AssignFolds, DeterministicInSeed) {
    EXPECT_EQ(tra::assign_folds(100, 5, 7).fold_of, tra::assign_folds(100, 5, 7).fold_of);
    EXPECT_NE(tra::assign_folds(100, 5, 7).fold_of, tra::assign_folds(100, 5, 8).fold_of);
}

TEST(AssignFolds, RejectsTooFewSamples) {
    try {
        tra::assign_folds(9, 5, 0);
        FAIL() << "expected InsufficientData";
    } catch (const tra::Error& e) {
        EXPECT_EQ(e.kind(), tra::ErrorKind::InsufficientData);
    }
    EXPECT_NO_THROW(tra::assign_folds(10, 5, 0));
}

TEST(FitSmoother, ConstantResponseIsReproducedEverywhere) {
    std::vector<double> x;
    std::vector<double> y;
    for (int i = 0; i < 50; ++i) {
        x.push_back(std::sin(i * 0.7) * 3.0);
        y.push_back(4.25);
    }
    const auto model = tra::fit_smoother(x, y, {});
    for (double t = -10.0; t <= 10.0; t += 0.37) EXPECT_NEAR(model.predict(t), 4.25, 1e-9);
}

TEST(FitSmoother, AffineDataIsFitExactlyForEveryPenalty) {
    std::vector<double> x;
    std::vector<double> y;
    tra::CounterRng rng(11);
    for (int i = 0; i < 120; ++i) {
        const double v = rng.normal() * 2.0;
        x.push_back(v);
        y.push_back(2.0 * v + 1.0);
    }
    for (double lambda : tra::SmootherConfig{}.penalty_grid) {
        tra::SmootherConfig cfg;
        cfg.penalty_grid = {lambda};
        const auto model = tra::fit_smoother(x, y, cfg);
        double worst = 0.0;
        for (double v : x) worst = std::max(worst, std::abs(model.predict(v) - (2.0 * v + 1.0)));
        EXPECT_LT(worst, 1e-6) << "lambda=" << lambda;
        // Extrapolation continues the line.
        EXPECT_NEAR(model.predict(50.0), 101.0, 1e-5);
        EXPECT_NEAR(model.predict(-50.0), -99.0, 1e-5);
    }
}

TEST(FitSmoother, NoiselessCubicHasSmallTrainingError) {
    std::vector<double> x;
    std::vector<double> y;
    for (int i = 0; i < 500; ++i) {
        const double v = -2.0 + 4.0 * i / 499.0;
        x.push_back(v);
        y.push_back(v * v * v);
    }
    const auto model = tra::fit_smoother(x, y, {});
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) ss += std::pow(model.predict(x[i]) - y[i], 2);
    EXPECT_LT(std::sqrt(ss / x.size()), 1e-3);
}

TEST(FitSmoother, ExtrapolationIsLinear) {
    const auto s = noisy_cubic(200, 0.3, 5);
    const auto model = tra::fit_smoother(s.x, s.y, {});
    const double hi = *std::max_element(s.x.begin(), s.x.end());
    const double a = model.predict(hi + 1.0);
    const double b = model.predict(hi + 2.0);
    const double c = model.predict(hi + 3.0);
    EXPECT_NEAR(c - b, b - a, 1e-9);
    // Continuous at the boundary.
    EXPECT_NEAR(model.predict(hi), model.predict(hi + 1e-9), 1e-6);
}

TEST(FitSmoother, GcvPicksLargerPenaltyForNoisierData) {
    const auto clean = noisy_cubic(400, 0.01, 3);
    const auto noisy = noisy_cubic(400, 5.0, 3);
    const auto m_clean = tra::fit_smoother(clean.x, clean.y, {});
    const auto m_noisy = tra::fit_smoother(noisy.x, noisy.y, {});
    EXPECT_LT(m_clean.lambda(), m_noisy.lambda());
    EXPECT_GT(m_clean.effective_dof(), m_noisy.effective_dof());
}

TEST(FitSmoother, ToleratesHeavyTies) {
    std::vector<double> x;
    std::vector<double> y;
    for (int i = 0; i < 60; ++i) {
        x.push_back(static_cast<double>(i % 3));
        y.push_back(static_cast<double>(i % 3) * 2.0 + 0.1 * ((i % 2) ? 1.0 : -1.0));
    }
    const auto model = tra::fit_smoother(x, y, {});
    EXPECT_NEAR(model.predict(1.0), 2.0, 0.1);
}

TEST(FitSmoother, ErrorPaths) {
    std::vector<double> x(20, 1.0);
    std::vector<double> y(20, 0.0);
    for (int i = 0; i < 20; ++i) y[i] = i;
    try {
        tra::fit_smoother(x, y, {});
        FAIL();
    } catch (const tra::Error& e) {
        EXPECT_EQ(e.kind(), tra::ErrorKind::DegenerateRegressor);
    }
    x[3] = 2.0;
    y[5] = std::nan("");
    try {
        tra::fit_smoother(x, y, {});
        FAIL();
    } catch (const tra::Error& e) {
        EXPECT_EQ(e.kind(), tra::ErrorKind::InvalidInput);
    }
    tra::SmootherConfig bad;
    bad.penalty_grid = {1.0, 0.5};
    EXPECT_THROW(bad.validate(), tra::Error);
    bad.penalty_grid = {};
    EXPECT_THROW(bad.validate(), tra::Error);
    bad.penalty_grid = {1.0};
    bad.basis_knots = 3;
    EXPECT_THROW(bad.validate(), tra::Error);
}

TEST(CrossFit, NoiselessLinearResidualsVanish) {
    tra::PairSample s;
    tra::CounterRng rng(17);
    for (int i = 0; i < 200; ++i) {
        const double x = rng.normal();
        s.x.push_back(x);
        s.y.push_back(3.0 * x);
    }
    const auto clouds = tra::cross_fit_residuals(s, tra::assign_folds(200, 5, 1), {});
    for (const auto& p : clouds.y_given_x.points) EXPECT_LT(std::abs(p.y), 1e-5);
    for (const auto& p : clouds.x_given_y.points) EXPECT_LT(std::abs(p.y), 1e-6);
}

TEST(CrossFit, ResidualsAreOutOfFold) {
    const auto s = noisy_cubic(10, 0.1, 2);
    const auto folds = tra::assign_folds(10, 5, 4);
    std::vector<std::vector<std::size_t>> trained_on;
    auto fitter = [&](std::span<const double> rx, std::span<const double> ry, std::span<const std::size_t> idx) {
        trained_on.emplace_back(idx.begin(), idx.end());
        return tra::fit_smoother(rx, ry, {});
    };
    tra::cross_fit_with(s, folds, fitter);
    ASSERT_EQ(trained_on.size(), 10u);  // two directions per fold
    for (std::size_t k = 0; k < 5; ++k) {
        for (const auto& set : {trained_on[2 * k], trained_on[2 * k + 1]}) {
            EXPECT_EQ(set.size(), 8u);
            for (std::size_t i : folds.members(k)) EXPECT_EQ(std::count(set.begin(), set.end(), i), 0);
        }
    }
}

TEST(CrossFit, SwappingColumnsSwapsClouds) {
    const auto s = noisy_cubic(150, 0.2, 9);
    const auto folds = tra::assign_folds(150, 5, 21);
    const auto a = tra::cross_fit_residuals(s, folds, {});
    const auto b = tra::cross_fit_residuals(s.swapped(), folds, {});
    EXPECT_EQ(a.y_given_x.points, b.x_given_y.points);
    EXPECT_EQ(a.x_given_y.points, b.y_given_x.points);
}

TEST(CrossFit, BitwiseDeterministic) {
    const auto s = noisy_cubic(120, 0.5, 1);
    const auto a = tra::cross_fit_residuals(s, tra::assign_folds(120, 5, 3), {});
    const auto b = tra::cross_fit_residuals(s, tra::assign_folds(120, 5, 3), {});
    EXPECT_EQ(a.y_given_x.points, b.y_given_x.points);
    EXPECT_EQ(a.x_given_y.points, b.x_given_y.points);
}

TEST(CrossFit, PropagatesDegenerateRegressor) {
    tra::PairSample s;
    for (int i = 0; i < 40; ++i) {
        s.x.push_back(1.0);
        s.y.push_back(i);
    }
    try {
        tra::cross_fit_residuals(s, tra::assign_folds(40, 5, 0), {});
        FAIL();
    } catch (const tra::Error& e) {
        EXPECT_EQ(e.kind(), tra::ErrorKind::DegenerateRegressor);
    }
}
