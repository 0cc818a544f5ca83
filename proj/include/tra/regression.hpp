#pragma once

// Cross-fitted penalized cubic B-spline regression.
//
// The smoother maps the regressor affinely onto [0, 1], places interior knots
// at empirical quantiles, and penalizes second divided differences of the
// coefficients taken over the Greville abscissae. Affine functions therefore
// lie in the penalty null space for any knot placement. The penalty weight is
// selected by generalized cross-validation over a fixed grid.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tra/error.hpp"
#include "tra/geometry.hpp"
#include "tra/rng.hpp"
#include "tra/sample.hpp"

namespace tra {

inline std::vector<double> log_spaced(double lo, double hi, std::size_t count) {
    std::vector<double> out(count);
    if (count == 1) {
        out[0] = lo;
        return out;
    }
    const double a = std::log10(lo);
    const double b = std::log10(hi);
    for (std::size_t i = 0; i < count; ++i) {
        out[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
    }
    return out;
}

enum class PenaltySelection { GCV };

struct SmootherConfig {
    // Interior knot count; unset means min(floor(n/4), 35), floored at 4.
    std::optional<std::size_t> basis_knots;
    std::vector<double> penalty_grid = log_spaced(1e-6, 1e2, 20);
    PenaltySelection selection = PenaltySelection::GCV;

    void validate() const {
        if (basis_knots && *basis_knots < 4) throw Error(ErrorKind::InvalidConfig, "basis_knots must be >= 4");
        if (penalty_grid.empty()) throw Error(ErrorKind::InvalidConfig, "penalty_grid is empty");
        for (std::size_t i = 0; i < penalty_grid.size(); ++i) {
            if (!std::isfinite(penalty_grid[i]) || penalty_grid[i] < 0.0) {
                throw Error(ErrorKind::InvalidConfig, "penalty_grid entries must be finite and nonnegative");
            }
            if (i > 0 && !(penalty_grid[i] > penalty_grid[i - 1])) {
                throw Error(ErrorKind::InvalidConfig, "penalty_grid must be strictly increasing");
            }
        }
    }

    std::size_t knots_for(std::size_t n) const {
        if (basis_knots) return *basis_knots;
        return std::max<std::size_t>(4, std::min<std::size_t>(n / 4, 35));
    }
};

namespace detail {

// Nonzero cubic B-spline basis values at t. Returns the index of the first
// nonzero basis function; values[0..3] hold N_{first..first+3}(t).
inline std::size_t bspline_basis(std::span<const double> knots, double t, double values[4]) {
    const std::size_t nb = knots.size() - 4;
    // Span index s with knots[s] <= t < knots[s+1], restricted to [3, nb-1].
    std::size_t s = static_cast<std::size_t>(std::upper_bound(knots.begin() + 3, knots.begin() + nb, t) - knots.begin()) - 1;
    s = std::clamp<std::size_t>(s, 3, nb - 1);

    double left[4];
    double right[4];
    values[0] = 1.0;
    for (std::size_t j = 1; j <= 3; ++j) {
        left[j] = t - knots[s + 1 - j];
        right[j] = knots[s + j] - t;
        double saved = 0.0;
        for (std::size_t r = 0; r < j; ++r) {
            const double denom = right[r + 1] + left[j - r];
            const double term = denom > 0.0 ? values[r] / denom : 0.0;
            values[r] = saved + right[r + 1] * term;
            saved = left[j - r] * term;
        }
        values[j] = saved;
    }
    return s - 3;
}

inline double quantile_sorted(std::span<const double> sorted, double p) {
    const double h = p * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace detail

class SmootherModel {
public:
    SmootherModel() = default;
    SmootherModel(std::vector<double> knots, std::vector<double> coef, double x_lo, double x_span, double lambda,
                  double edf, double gcv)
        : knots_(std::move(knots)), coef_(std::move(coef)), x_lo_(x_lo), x_span_(x_span), lambda_(lambda), edf_(edf),
          gcv_(gcv) {
        const std::size_t nb = coef_.size();
        value_lo_ = coef_.front();
        value_hi_ = coef_.back();
        slope_lo_ = 3.0 * (coef_[1] - coef_[0]) / (knots_[4] - knots_[1]);
        slope_hi_ = 3.0 * (coef_[nb - 1] - coef_[nb - 2]) / (knots_[nb + 2] - knots_[nb - 1]);
    }

    // Linear continuation beyond the training range.
    double predict(double x) const {
        const double t = (x - x_lo_) / x_span_;
        if (t < 0.0) return value_lo_ + slope_lo_ * t;
        if (t > 1.0) return value_hi_ + slope_hi_ * (t - 1.0);
        double basis[4];
        const std::size_t first = detail::bspline_basis(knots_, t, basis);
        double out = 0.0;
        for (std::size_t j = 0; j < 4; ++j) out += basis[j] * coef_[first + j];
        return out;
    }

    double lambda() const noexcept { return lambda_; }
    double effective_dof() const noexcept { return edf_; }
    double gcv() const noexcept { return gcv_; }
    std::size_t basis_size() const noexcept { return coef_.size(); }

private:
    std::vector<double> knots_;
    std::vector<double> coef_;
    double x_lo_ = 0.0;
    double x_span_ = 1.0;
    double lambda_ = 0.0;
    double edf_ = 0.0;
    double gcv_ = 0.0;
    double value_lo_ = 0.0;
    double value_hi_ = 0.0;
    double slope_lo_ = 0.0;
    double slope_hi_ = 0.0;
};

inline SmootherModel fit_smoother(std::span<const double> x, std::span<const double> y, const SmootherConfig& cfg) {
    cfg.validate();
    if (x.size() != y.size()) throw Error(ErrorKind::InvalidInput, "x and y differ in length");
    const std::size_t n = x.size();
    if (n < 8) throw Error(ErrorKind::InsufficientData, "smoother needs at least 8 points");
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw Error(ErrorKind::InvalidInput, "non-finite value");
    }

    std::vector<double> sorted(x.begin(), x.end());
    std::sort(sorted.begin(), sorted.end());
    const double x_lo = sorted.front();
    const double x_span = sorted.back() - sorted.front();
    if (!(x_span > 0.0)) throw Error(ErrorKind::DegenerateRegressor, "regressor is constant");
    for (double& v : sorted) v = (v - x_lo) / x_span;

    const std::size_t interior = cfg.knots_for(n);
    std::vector<double> knots(4, 0.0);
    for (std::size_t j = 1; j <= interior; ++j) {
        const double q = detail::quantile_sorted(sorted, static_cast<double>(j) / static_cast<double>(interior + 1));
        if (q > knots.back() && q < 1.0) knots.push_back(q);
    }
    knots.insert(knots.end(), 4, 1.0);
    const std::size_t nb = knots.size() - 4;

    std::vector<std::size_t> first(n);
    std::vector<std::array<double, 4>> rows(n);
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nb), static_cast<Eigen::Index>(nb));
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nb));
    for (std::size_t i = 0; i < n; ++i) {
        const double t = (x[i] - x_lo) / x_span;
        first[i] = detail::bspline_basis(knots, t, rows[i].data());
        for (std::size_t a = 0; a < 4; ++a) {
            const auto ia = static_cast<Eigen::Index>(first[i] + a);
            rhs(ia) += rows[i][a] * y[i];
            for (std::size_t b = 0; b < 4; ++b) {
                gram(ia, static_cast<Eigen::Index>(first[i] + b)) += rows[i][a] * rows[i][b];
            }
        }
    }

    // Second divided differences over Greville abscissae, scaled by the mean
    // abscissa spacing so uniform knots reduce to plain second differences.
    std::vector<double> greville(nb);
    for (std::size_t j = 0; j < nb; ++j) greville[j] = (knots[j + 1] + knots[j + 2] + knots[j + 3]) / 3.0;
    const double mean_gap = (greville.back() - greville.front()) / static_cast<double>(nb - 1);
    Eigen::MatrixXd diff = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nb - 2), static_cast<Eigen::Index>(nb));
    for (std::size_t j = 1; j + 1 < nb; ++j) {
        const double w_left = mean_gap / (greville[j] - greville[j - 1]);
        const double w_right = mean_gap / (greville[j + 1] - greville[j]);
        const auto r = static_cast<Eigen::Index>(j - 1);
        diff(r, static_cast<Eigen::Index>(j - 1)) = w_left;
        diff(r, static_cast<Eigen::Index>(j)) = -(w_left + w_right);
        diff(r, static_cast<Eigen::Index>(j + 1)) = w_right;
    }
    const Eigen::MatrixXd penalty = diff.transpose() * diff;

    double best_gcv = std::numeric_limits<double>::infinity();
    double best_lambda = cfg.penalty_grid.back();
    double best_edf = 0.0;
    Eigen::VectorXd best_coef;
    for (double lambda : cfg.penalty_grid) {
        const Eigen::MatrixXd system = gram + lambda * penalty;
        Eigen::LDLT<Eigen::MatrixXd> solver(system);
        if (solver.info() != Eigen::Success) continue;
        const Eigen::VectorXd coef = solver.solve(rhs);
        if (!coef.allFinite()) continue;
        const double edf = solver.solve(gram).trace();
        double rss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double fit = 0.0;
            for (std::size_t a = 0; a < 4; ++a) fit += rows[i][a] * coef(static_cast<Eigen::Index>(first[i] + a));
            rss += (y[i] - fit) * (y[i] - fit);
        }
        const double dof_left = static_cast<double>(n) - edf;
        double gcv = std::numeric_limits<double>::infinity();
        if (dof_left > 1e-8) gcv = static_cast<double>(n) * rss / (dof_left * dof_left);
        if (best_coef.size() == 0 || gcv < best_gcv) {
            best_gcv = gcv;
            best_lambda = lambda;
            best_edf = edf;
            best_coef = coef;
        }
    }
    if (best_coef.size() == 0) throw Error(ErrorKind::DegenerateRegressor, "penalized system is singular");

    std::vector<double> coef(best_coef.data(), best_coef.data() + best_coef.size());
    return SmootherModel(std::move(knots), std::move(coef), x_lo, x_span, best_lambda, best_edf, best_gcv);
}

// Fold ids are stored 0-based (0..K-1).
struct FoldAssignment {
    std::size_t n = 0;
    std::size_t K = 0;
    std::vector<std::size_t> fold_of;
    std::uint64_t seed = 0;

    std::vector<std::size_t> members(std::size_t fold) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < n; ++i) {
            if (fold_of[i] == fold) out.push_back(i);
        }
        return out;
    }

    std::vector<std::size_t> complement(std::size_t fold) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < n; ++i) {
            if (fold_of[i] != fold) out.push_back(i);
        }
        return out;
    }
};

inline FoldAssignment assign_folds(std::size_t n, std::size_t K, std::uint64_t seed) {
    if (K < 2) throw Error(ErrorKind::InvalidConfig, "fold count must be >= 2");
    if (n < 2 * K) {
        throw Error(ErrorKind::InsufficientData,
                    "need n >= 2K for cross-fitting (n=" + std::to_string(n) + ", K=" + std::to_string(K) + ")");
    }
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    CounterRng rng(seed);
    rng.shuffle(std::span<std::size_t>(order));

    FoldAssignment folds{n, K, std::vector<std::size_t>(n), seed};
    const std::size_t base = n / K;
    const std::size_t extra = n % K;
    std::size_t pos = 0;
    for (std::size_t k = 0; k < K; ++k) {
        const std::size_t size = base + (k < extra ? 1 : 0);
        for (std::size_t j = 0; j < size; ++j) folds.fold_of[order[pos++]] = k;
    }
    return folds;
}

enum class CloudDirection { YgivenX, XgivenY };

// (regressor value, out-of-fold residual) for every observation.
struct ResidualCloud {
    Cloud points;
    CloudDirection direction = CloudDirection::YgivenX;

    std::vector<double> regressors() const {
        std::vector<double> out(points.size());
        for (std::size_t i = 0; i < points.size(); ++i) out[i] = points[i].x;
        return out;
    }
    std::vector<double> residuals() const {
        std::vector<double> out(points.size());
        for (std::size_t i = 0; i < points.size(); ++i) out[i] = points[i].y;
        return out;
    }
};

struct ResidualClouds {
    ResidualCloud y_given_x;
    ResidualCloud x_given_y;
};

// Cross-fitting with an arbitrary fitter:
//   fitter(train_regressor, train_target, train_indices) -> model with predict(double).
template <class Fitter>
ResidualClouds cross_fit_with(const PairSample& sample, const FoldAssignment& folds, Fitter&& fitter) {
    sample.validate();
    const std::size_t n = sample.size();
    if (folds.n != n || folds.fold_of.size() != n) throw Error(ErrorKind::InvalidInput, "fold assignment does not match sample size");

    ResidualClouds out{{Cloud(n), CloudDirection::YgivenX}, {Cloud(n), CloudDirection::XgivenY}};
    std::vector<double> train_x;
    std::vector<double> train_y;
    for (std::size_t k = 0; k < folds.K; ++k) {
        const std::vector<std::size_t> train = folds.complement(k);
        const std::vector<std::size_t> test = folds.members(k);
        train_x.clear();
        train_y.clear();
        for (std::size_t i : train) {
            train_x.push_back(sample.x[i]);
            train_y.push_back(sample.y[i]);
        }
        const auto forward = fitter(std::span<const double>(train_x), std::span<const double>(train_y),
                                    std::span<const std::size_t>(train));
        const auto backward = fitter(std::span<const double>(train_y), std::span<const double>(train_x),
                                     std::span<const std::size_t>(train));
        for (std::size_t i : test) {
            out.y_given_x.points[i] = {sample.x[i], sample.y[i] - forward.predict(sample.x[i])};
            out.x_given_y.points[i] = {sample.y[i], sample.x[i] - backward.predict(sample.y[i])};
        }
    }
    return out;
}

inline ResidualClouds cross_fit_residuals(const PairSample& sample, const FoldAssignment& folds,
                                          const SmootherConfig& cfg) {
    return cross_fit_with(sample, folds,
                          [&cfg](std::span<const double> rx, std::span<const double> ry, std::span<const std::size_t>) {
                              return fit_smoother(rx, ry, cfg);
                          });
}

}  // namespace tra
