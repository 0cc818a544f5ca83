#pragma once

// Direction scores and the symmetric reject rule.
//
//   TRA   score = TP(forward copula cloud) - TP(reverse copula cloud)
//   TRA-s score = D(X->Y) - D(Y->X), where
//         D(X->Y) = TP(forward copula cloud) - TP(bin-averaged reverse cloud)
//
// Both scores flip sign exactly when the roles of X and Y are exchanged.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "tra/copula.hpp"
#include "tra/error.hpp"
#include "tra/normal.hpp"
#include "tra/parallel.hpp"
#include "tra/regression.hpp"
#include "tra/rng.hpp"
#include "tra/sample.hpp"
#include "tra/topology.hpp"

namespace tra {

enum class Method { TRA, TRAs, TRAC };
enum class Variant { TRA, TRAs };
enum class Verdict { XtoY, YtoX, Abstain };

inline const char* to_string(Method m) noexcept {
    switch (m) {
        case Method::TRA: return "tra";
        case Method::TRAs: return "tras";
        case Method::TRAC: return "trac";
    }
    return "tra";
}

inline const char* to_string(Verdict v) noexcept {
    switch (v) {
        case Verdict::XtoY: return "XtoY";
        case Verdict::YtoX: return "YtoX";
        case Verdict::Abstain: return "Abstain";
    }
    return "Abstain";
}

struct PipelineConfig {
    WindowConfig window;
    std::size_t folds = 5;
    SmootherConfig smoother;
    TieRule ties = TieRule::StableIndex;
    // Divide reverse residuals by their sample sd before TRA-s binning.
    bool standardize_binned_residuals = true;

    void validate() const {
        window.validate();
        smoother.validate();
        if (folds < 2) throw Error(ErrorKind::InvalidConfig, "folds must be >= 2");
    }
};

struct ScoreResult {
    double score = 0.0;
    double tp_forward = 0.0;
    double tp_reverse = 0.0;
    Variant variant = Variant::TRA;
    std::map<std::string, double> diagnostics;
};

struct ResidualCopulas {
    ResidualClouds raw;
    CopulaCloud forward;
    CopulaCloud reverse;
};

inline ResidualCopulas residual_copulas(const PairSample& sample, std::uint64_t seed, const PipelineConfig& cfg) {
    const FoldAssignment folds = assign_folds(sample.size(), cfg.folds, seed);
    ResidualClouds clouds = cross_fit_residuals(sample, folds, cfg.smoother);
    CopulaCloud forward = copula_standardize(clouds.y_given_x, cfg.ties);
    CopulaCloud reverse = copula_standardize(clouds.x_given_y, cfg.ties);
    return {std::move(clouds), std::move(forward), std::move(reverse)};
}

inline ScoreResult tra_score(const PairSample& sample, std::uint64_t seed, const PipelineConfig& cfg) {
    cfg.validate();
    sample.validate();
    const std::size_t n = sample.size();
    if (n < 20) throw Error(ErrorKind::InsufficientData, "TRA needs at least 20 samples (got " + std::to_string(n) + ")");

    const ResidualCopulas c = residual_copulas(sample, seed, cfg);
    const Window w = mesoscopic_window(n, cfg.window);
    ScoreResult out;
    out.variant = Variant::TRA;
    out.tp_forward = tp_profile(c.forward.points, w);
    out.tp_reverse = tp_profile(c.reverse.points, w);
    out.score = out.tp_forward - out.tp_reverse;
    out.diagnostics = {{"alpha", w.alpha}, {"beta", w.beta}, {"n", static_cast<double>(n)}};
    return out;
}

// Smallest B with B >= n^(2/5), i.e. B^5 >= n^2, floored at 4.
inline std::size_t choose_bins(std::size_t n) {
    using wide = unsigned __int128;
    const wide target = static_cast<wide>(n) * n;
    std::size_t b = static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(n), 0.4)));
    if (b > 0) --b;
    auto fifth = [](std::size_t v) {
        const wide w = v;
        return w * w * w * w * w;
    };
    while (fifth(b) < target) ++b;
    return std::max<std::size_t>(4, b);
}

struct BinnedCloud {
    Cloud points;                      // (mean u, mean residual) per nonempty bin, in bin order
    std::size_t bins = 0;              // B_n
    std::size_t nonempty = 0;          // m_n
    std::vector<std::size_t> occupancy;  // N_b for every bin b = 1..B_n, zeros included
};

// Bin b (1-based) covers ((b-1)/B, b/B].
inline std::size_t bin_of(double u, std::size_t bins) {
    const double scaled = u * static_cast<double>(bins);
    auto b = static_cast<std::size_t>(std::max(1.0, std::ceil(scaled)));
    if (b > 1 && u <= static_cast<double>(b - 1) / static_cast<double>(bins)) --b;
    return std::min(b, bins);
}

inline BinnedCloud bin_reverse_cloud(std::span<const double> u, std::span<const double> residuals, std::size_t bins) {
    if (u.size() != residuals.size()) throw Error(ErrorKind::InvalidInput, "u and residuals differ in length");
    if (bins < 2) throw Error(ErrorKind::InvalidConfig, "need at least 2 bins");
    std::vector<double> sum_u(bins, 0.0);
    std::vector<double> sum_r(bins, 0.0);
    BinnedCloud out;
    out.bins = bins;
    out.occupancy.assign(bins, 0);
    for (std::size_t i = 0; i < u.size(); ++i) {
        const std::size_t b = bin_of(u[i], bins) - 1;
        sum_u[b] += u[i];
        sum_r[b] += residuals[i];
        ++out.occupancy[b];
    }
    for (std::size_t b = 0; b < bins; ++b) {
        if (out.occupancy[b] == 0) continue;
        const double count = static_cast<double>(out.occupancy[b]);
        out.points.push_back({sum_u[b] / count, sum_r[b] / count});
    }
    out.nonempty = out.points.size();
    return out;
}

namespace detail {

inline double sample_sd(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    if (std::all_of(v.begin(), v.end(), [&](double d) { return d == v.front(); })) return 0.0;
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double d : v) ss += (d - mean) * (d - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

struct BinnedTp {
    double tp = 0.0;
    std::size_t nonempty = 0;
};

// TP of the bin-averaged cloud built from `copula_regressor` (pseudo-observations
// of the regressor) and raw residuals of the same direction.
inline BinnedTp binned_tp(const CopulaCloud& copula, const ResidualCloud& raw, std::size_t bins,
                          const PipelineConfig& cfg) {
    std::vector<double> u(copula.size());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = copula.points[i].x;
    std::vector<double> r = raw.residuals();
    if (cfg.standardize_binned_residuals) {
        const double sd = sample_sd(r);
        if (sd > 0.0) {
            for (double& v : r) v /= sd;
        }
    }
    const BinnedCloud binned = bin_reverse_cloud(u, r, bins);
    if (binned.nonempty < 2) throw Error(ErrorKind::InsufficientData, "fewer than 2 nonempty bins");
    const Window w = mesoscopic_window(binned.nonempty, cfg.window);
    return {tp_profile(binned.points, w), binned.nonempty};
}

}  // namespace detail

inline ScoreResult tras_score(const PairSample& sample, std::uint64_t seed, const PipelineConfig& cfg) {
    cfg.validate();
    sample.validate();
    const std::size_t n = sample.size();
    if (n < 40) throw Error(ErrorKind::InsufficientData, "TRA-s needs at least 40 samples (got " + std::to_string(n) + ")");

    const ResidualCopulas c = residual_copulas(sample, seed, cfg);
    const Window w = mesoscopic_window(n, cfg.window);
    const std::size_t bins = choose_bins(n);

    ScoreResult out;
    out.variant = Variant::TRAs;
    out.tp_forward = tp_profile(c.forward.points, w);
    out.tp_reverse = tp_profile(c.reverse.points, w);
    const detail::BinnedTp binned_reverse = detail::binned_tp(c.reverse, c.raw.x_given_y, bins, cfg);
    const detail::BinnedTp binned_forward = detail::binned_tp(c.forward, c.raw.y_given_x, bins, cfg);
    const double delta_xy = out.tp_forward - binned_reverse.tp;
    const double delta_yx = out.tp_reverse - binned_forward.tp;
    out.score = delta_xy - delta_yx;
    out.diagnostics = {
        {"alpha", w.alpha},
        {"beta", w.beta},
        {"n", static_cast<double>(n)},
        {"bins", static_cast<double>(bins)},
        {"nonempty_bins_reverse", static_cast<double>(binned_reverse.nonempty)},
        {"nonempty_bins_forward", static_cast<double>(binned_forward.nonempty)},
        {"tp_binned_reverse", binned_reverse.tp},
        {"tp_binned_forward", binned_forward.tp},
        {"delta_xy", delta_xy},
        {"delta_yx", delta_yx},
    };
    return out;
}

using Scorer = std::function<double(const PairSample&, std::uint64_t)>;

inline Scorer make_scorer(Variant variant, PipelineConfig cfg) {
    if (variant == Variant::TRA) {
        return [cfg](const PairSample& s, std::uint64_t seed) { return tra_score(s, seed, cfg).score; };
    }
    return [cfg](const PairSample& s, std::uint64_t seed) { return tras_score(s, seed, cfg).score; };
}

struct ThresholdConfig {
    std::size_t R = 50;
    double fraction = 0.8;
    double alpha = 0.10;
    std::uint64_t seed = 0;
    std::size_t threads = 1;

    void validate() const {
        if (R < 2) throw Error(ErrorKind::InvalidConfig, "stability R must be >= 2");
        if (!(fraction > 0.0 && fraction < 1.0)) throw Error(ErrorKind::InvalidConfig, "fraction must lie in (0,1)");
        if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorKind::InvalidConfig, "alpha must lie in (0,1)");
    }
};

struct StabilityResult {
    double tau = 0.0;
    double z = 0.0;
    double sd = 0.0;
    std::vector<double> scores;
};

inline std::vector<std::size_t> subsample_rows(std::size_t n, std::size_t size, std::uint64_t seed) {
    std::vector<std::size_t> rows = sample_without_replacement(n, size, seed);
    std::sort(rows.begin(), rows.end());
    return rows;
}

// Subsample r draws rows and its scorer seed from mix(cfg.seed, r).
inline StabilityResult stability_threshold(const PairSample& sample, const Scorer& scorer, const ThresholdConfig& cfg) {
    cfg.validate();
    const std::size_t n = sample.size();
    const auto size = static_cast<std::size_t>(std::floor(cfg.fraction * static_cast<double>(n)));
    StabilityResult out;
    out.scores.assign(cfg.R, 0.0);
    parallel_for(cfg.R, cfg.threads, [&](std::size_t r) {
        const std::uint64_t seed = mix(cfg.seed, static_cast<std::uint64_t>(r));
        try {
            out.scores[r] = scorer(sample.subset(subsample_rows(n, size, seed)), seed);
        } catch (const std::exception& e) {
            throw Error(ErrorKind::StabilityFailure, "subsample " + std::to_string(r) + ": " + e.what(), r);
        }
    });
    out.sd = detail::sample_sd(out.scores);
    out.z = normal_quantile(1.0 - cfg.alpha / 2.0);
    out.tau = out.z * out.sd;
    return out;
}

struct Decision {
    Verdict verdict = Verdict::Abstain;
    double score = 0.0;
    double threshold_or_pvalue = 0.0;
    Method method = Method::TRA;
};

inline Decision decide(double score, double tau, Method method = Method::TRA) {
    if (!(tau >= 0.0)) throw Error(ErrorKind::InvalidInput, "threshold must be >= 0");
    Verdict v = Verdict::Abstain;
    if (score > tau) {
        v = Verdict::XtoY;
    } else if (score < -tau) {
        v = Verdict::YtoX;
    }
    return {v, score, tau, method};
}

}  // namespace tra
