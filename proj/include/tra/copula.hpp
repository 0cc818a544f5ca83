#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "tra/error.hpp"
#include "tra/geometry.hpp"
#include "tra/normal.hpp"
#include "tra/regression.hpp"

namespace tra {

enum class TieRule { StableIndex, Average };

// Pseudo-observations rank(v_i)/(n+1). StableIndex breaks ties by original
// position; Average assigns tied entries their mean rank.
inline std::vector<double> rank_transform(std::span<const double> v, TieRule ties = TieRule::StableIndex) {
    const std::size_t n = v.size();
    if (n == 0) throw Error(ErrorKind::InvalidInput, "rank_transform of an empty vector");
    for (double d : v) {
        if (!std::isfinite(d)) throw Error(ErrorKind::InvalidInput, "non-finite entry in rank_transform");
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&v](std::size_t a, std::size_t b) { return v[a] < v[b]; });

    const double denom = static_cast<double>(n + 1);
    std::vector<double> out(n);
    if (ties == TieRule::StableIndex) {
        for (std::size_t r = 0; r < n; ++r) out[order[r]] = static_cast<double>(r + 1) / denom;
        return out;
    }
    for (std::size_t r = 0; r < n;) {
        std::size_t end = r + 1;
        while (end < n && v[order[end]] == v[order[r]]) ++end;
        const double mean_rank = 0.5 * static_cast<double>(r + 1 + end);
        for (std::size_t j = r; j < end; ++j) out[order[j]] = mean_rank / denom;
        r = end;
    }
    return out;
}

// Both coordinates mapped to pseudo-observations; points lie in the open unit square.
struct CopulaCloud {
    Cloud points;

    std::size_t size() const noexcept { return points.size(); }
};

inline CopulaCloud copula_standardize(std::span<const Point2> cloud, TieRule ties = TieRule::StableIndex) {
    if (cloud.empty()) throw Error(ErrorKind::InvalidInput, "empty cloud");
    std::vector<double> a(cloud.size());
    std::vector<double> b(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        a[i] = cloud[i].x;
        b[i] = cloud[i].y;
    }
    const std::vector<double> ua = rank_transform(a, ties);
    const std::vector<double> ub = rank_transform(b, ties);
    CopulaCloud out{Cloud(cloud.size())};
    for (std::size_t i = 0; i < cloud.size(); ++i) out.points[i] = {ua[i], ub[i]};
    return out;
}

inline CopulaCloud copula_standardize(const ResidualCloud& cloud, TieRule ties = TieRule::StableIndex) {
    return copula_standardize(std::span<const Point2>(cloud.points), ties);
}

inline std::vector<double> rank_gaussianize(std::span<const double> v, TieRule ties = TieRule::StableIndex) {
    if (v.size() < 2) throw Error(ErrorKind::InvalidInput, "rank_gaussianize needs at least 2 values");
    std::vector<double> out = rank_transform(v, ties);
    for (double& u : out) u = normal_quantile(u);
    return out;
}

}  // namespace tra
