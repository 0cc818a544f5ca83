#pragma once

// Euclidean MST edge lengths (the H0 death times of the Rips filtration) and
// the windowed persistence profile evaluated at the mesoscopic scale
// alpha_n = kappa * n^(-2/3), beta_n = c_beta * alpha_n.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "tra/error.hpp"
#include "tra/geometry.hpp"

namespace tra {

struct WindowConfig {
    double kappa = 1.0;
    double c_beta = 2.0;

    void validate() const {
        if (!(kappa > 0.0) || !std::isfinite(kappa)) throw Error(ErrorKind::InvalidConfig, "kappa must be > 0");
        if (!(c_beta > 1.0) || !std::isfinite(c_beta)) throw Error(ErrorKind::InvalidConfig, "c_beta must be > 1");
    }
};

struct Window {
    double alpha = 0.0;
    double beta = 0.0;
};

inline Window mesoscopic_window(std::size_t n, const WindowConfig& cfg) {
    cfg.validate();
    if (n < 2) throw Error(ErrorKind::InsufficientData, "window needs n >= 2");
    const double alpha = cfg.kappa * std::pow(static_cast<double>(n), -2.0 / 3.0);
    return {alpha, cfg.c_beta * alpha};
}

// Dense Prim, O(n^2) time and O(n) memory. Lengths are returned in the order
// vertices join the tree.
inline std::vector<double> euclidean_mst(std::span<const Point2> points) {
    const std::size_t n = points.size();
    if (n < 2) throw Error(ErrorKind::InsufficientData, "MST needs at least 2 points");
    for (const Point2& p : points) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw Error(ErrorKind::InvalidInput, "non-finite coordinate");
    }

    std::vector<double> best(n, std::numeric_limits<double>::infinity());
    std::vector<std::size_t> parent(n, 0);
    std::vector<char> in_tree(n, 0);
    std::vector<double> lengths;
    lengths.reserve(n - 1);

    std::size_t current = 0;
    in_tree[0] = 1;
    for (std::size_t step = 1; step < n; ++step) {
        const Point2 c = points[current];
        std::size_t next = n;
        double next_d2 = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
            if (in_tree[j]) continue;
            const double dx = points[j].x - c.x;
            const double dy = points[j].y - c.y;
            const double d2 = dx * dx + dy * dy;
            if (d2 < best[j]) {
                best[j] = d2;
                parent[j] = current;
            }
            if (best[j] < next_d2) {
                next_d2 = best[j];
                next = j;
            }
        }
        in_tree[next] = 1;
        lengths.push_back(distance(points[next], points[parent[next]]));
        current = next;
    }
    return lengths;
}

inline void check_window(double alpha, double beta) {
    if (!(alpha >= 0.0) || !(alpha < beta) || !std::isfinite(beta)) {
        throw Error(ErrorKind::InvalidWindow, "need 0 <= alpha < beta");
    }
}

inline double psi_window(double t, double alpha, double beta) {
    check_window(alpha, beta);
    return std::max(std::min(t, beta) - alpha, 0.0);
}

inline double tp_from_lengths(std::span<const double> lengths, double alpha, double beta) {
    check_window(alpha, beta);
    if (lengths.empty()) throw Error(ErrorKind::InsufficientData, "no MST edges");
    double total = 0.0;
    for (double w : lengths) total += std::max(std::min(w, beta) - alpha, 0.0);
    const double tp = total / (static_cast<double>(lengths.size()) * (beta - alpha));
    return std::min(tp, 1.0);
}

inline double tp_profile(std::span<const Point2> points, double alpha, double beta) {
    check_window(alpha, beta);
    const std::vector<double> lengths = euclidean_mst(points);
    return tp_from_lengths(lengths, alpha, beta);
}

inline double tp_profile(std::span<const Point2> points, const Window& w) {
    return tp_profile(points, w.alpha, w.beta);
}

}  // namespace tra
