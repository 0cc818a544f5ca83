#pragma once

// Abstention under confounding: the score magnitude is compared against its
// distribution under a fitted Gaussian-copula null that keeps the observed
// marginals and rank correlation but carries no causal direction.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "tra/copula.hpp"
#include "tra/error.hpp"
#include "tra/normal.hpp"
#include "tra/parallel.hpp"
#include "tra/rng.hpp"
#include "tra/sample.hpp"
#include "tra/scoring.hpp"

namespace tra {

struct TracConfig {
    std::size_t B = 500;
    double alpha = 0.10;
    Variant score_variant = Variant::TRA;
    std::uint64_t seed = 0;
    double rho_clip = 1e-3;
    std::size_t threads = 1;

    void validate() const {
        if (B < 1) throw Error(ErrorKind::InvalidConfig, "bootstrap count must be >= 1");
        if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorKind::InvalidConfig, "alpha must lie in (0,1)");
        if (!(rho_clip > 0.0 && rho_clip < 1.0)) throw Error(ErrorKind::InvalidConfig, "rho_clip must lie in (0,1)");
    }
};

struct TracResult {
    double p_value = 1.0;
    double rho_hat = 0.0;
    double s_obs = 0.0;
    double score = 0.0;
    std::size_t exceedances = 0;
    std::vector<double> null_scores;
    Decision verdict;
};

inline double pearson(std::span<const double> a, std::span<const double> b) {
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0.0;
    double saa = 0.0;
    double sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (!(saa > 0.0) || !(sbb > 0.0)) throw Error(ErrorKind::DegenerateInput, "zero variance after Gaussianization");
    return sab / std::sqrt(saa * sbb);
}

inline double fit_gaussian_copula_rho(const PairSample& sample, double clip = 1e-3, TieRule ties = TieRule::StableIndex) {
    sample.validate();
    if (sample.size() < 3) throw Error(ErrorKind::InsufficientData, "copula fit needs at least 3 samples");
    const std::vector<double> zx = rank_gaussianize(sample.x, ties);
    const std::vector<double> zy = rank_gaussianize(sample.y, ties);
    return std::clamp(pearson(zx, zy), -1.0 + clip, 1.0 - clip);
}

// Type-1 inverse: the ceil(u*n)-th order statistic, index clamped to [1, n].
inline double empirical_inverse_cdf(std::span<const double> sorted_sample, double u) {
    const std::size_t n = sorted_sample.size();
    if (n == 0) throw Error(ErrorKind::InvalidInput, "empty sample");
    const double pos = std::ceil(u * static_cast<double>(n));
    const std::size_t k = pos < 1.0 ? 1 : std::min(n, static_cast<std::size_t>(pos));
    return sorted_sample[k - 1];
}

inline PairSample sample_null(double rho_hat, std::span<const double> x_sorted, std::span<const double> y_sorted,
                              std::size_t n, std::uint64_t seed) {
    if (x_sorted.size() != n || y_sorted.size() != n) throw Error(ErrorKind::InvalidInput, "marginal sizes must equal n");
    CounterRng rng(seed);
    const double cross = std::sqrt(1.0 - rho_hat * rho_hat);
    PairSample out{std::vector<double>(n), std::vector<double>(n), "null", "gaussian-copula bootstrap"};
    for (std::size_t i = 0; i < n; ++i) {
        const double zx = rng.normal();
        const double w = rng.normal();
        const double zy = rho_hat * zx + cross * w;
        out.x[i] = empirical_inverse_cdf(x_sorted, normal_cdf(zx));
        out.y[i] = empirical_inverse_cdf(y_sorted, normal_cdf(zy));
    }
    return out;
}

inline double conservative_pvalue(std::span<const double> null_magnitudes, double s_obs) {
    const auto exceed = std::count_if(null_magnitudes.begin(), null_magnitudes.end(),
                                      [s_obs](double s) { return s >= s_obs; });
    return static_cast<double>(1 + exceed) / static_cast<double>(null_magnitudes.size() + 1);
}

// Replicate b uses seed mix(cfg.seed, b + 1) for both the null draw and the
// scorer; the observed score uses cfg.seed itself.
inline TracResult trac_pvalue(const PairSample& sample, const TracConfig& cfg, const PipelineConfig& pipeline) {
    cfg.validate();
    pipeline.validate();
    sample.validate();
    const std::size_t n = sample.size();
    const Scorer scorer = make_scorer(cfg.score_variant, pipeline);

    TracResult out;
    out.score = scorer(sample, cfg.seed);
    out.s_obs = std::abs(out.score);
    out.rho_hat = fit_gaussian_copula_rho(sample, cfg.rho_clip, pipeline.ties);

    std::vector<double> xs = sample.x;
    std::vector<double> ys = sample.y;
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());

    out.null_scores.assign(cfg.B, 0.0);
    parallel_for(cfg.B, cfg.threads, [&](std::size_t b) {
        const std::uint64_t seed = mix(cfg.seed, static_cast<std::uint64_t>(b + 1));
        try {
            const PairSample null = sample_null(out.rho_hat, xs, ys, n, seed);
            out.null_scores[b] = std::abs(scorer(null, seed));
        } catch (const std::exception& e) {
            throw Error(ErrorKind::BootstrapFailure, "replicate " + std::to_string(b) + ": " + e.what(), b);
        }
    });

    out.exceedances = static_cast<std::size_t>(
        std::count_if(out.null_scores.begin(), out.null_scores.end(), [&](double s) { return s >= out.s_obs; }));
    out.p_value = conservative_pvalue(out.null_scores, out.s_obs);

    Verdict v = Verdict::Abstain;
    if (out.p_value <= cfg.alpha) {
        if (out.score > 0.0) {
            v = Verdict::XtoY;
        } else if (out.score < 0.0) {
            v = Verdict::YtoX;
        }
    }
    out.verdict = {v, out.score, out.p_value, Method::TRAC};
    return out;
}

}  // namespace tra
