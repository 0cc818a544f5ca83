#pragma once

// Seeded data-generating processes for the synthetic stress tests.
//
//   cubic               X ~ N(0,1),      Y = X^3 + sigma_eps * e
//   near_linear         X ~ N(0,1),      Y = X + c X^3 + sigma_eps * e
//   hetero_cubic        X ~ N(0,1),      Y = X^3 + (sigma0 + lambda |X|) * xi
//   sine                X ~ U[-1,1],     Y = sin(X) + sigma_eps * e
//   confound_linear     Z ~ N(0,1),      X = Z + eX,          Y = gamma Z + eY
//   confound_nonlinear  Z ~ N(0,1),      X = Z + a Z^3 + eX,  Y = b Z + a Z^3 + eY
//
// with eX ~ N(0, sigma_x^2), eY ~ N(0, sigma_y^2) and all other noise standard normal.

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "tra/error.hpp"
#include "tra/format.hpp"
#include "tra/rng.hpp"
#include "tra/sample.hpp"

namespace tra {

enum class ScenarioKind { CubicAnm, NearLinearAnm, HeteroCubicAnm, SineAnm, ConfoundLinear, ConfoundNonlinear };

inline constexpr std::array<ScenarioKind, 6> kAllKinds = {
    ScenarioKind::CubicAnm,     ScenarioKind::NearLinearAnm,  ScenarioKind::HeteroCubicAnm,
    ScenarioKind::SineAnm,      ScenarioKind::ConfoundLinear, ScenarioKind::ConfoundNonlinear,
};

inline const char* to_string(ScenarioKind k) noexcept {
    switch (k) {
        case ScenarioKind::CubicAnm: return "cubic";
        case ScenarioKind::NearLinearAnm: return "near_linear";
        case ScenarioKind::HeteroCubicAnm: return "hetero_cubic";
        case ScenarioKind::SineAnm: return "sine";
        case ScenarioKind::ConfoundLinear: return "confound_linear";
        case ScenarioKind::ConfoundNonlinear: return "confound_nonlinear";
    }
    return "cubic";
}

inline ScenarioKind parse_kind(std::string_view name) {
    for (ScenarioKind k : kAllKinds) {
        if (name == to_string(k)) return k;
    }
    throw Error(ErrorKind::InvalidScenario, "unknown scenario kind '" + std::string(name) + "'");
}

inline bool is_confounded(ScenarioKind k) noexcept {
    return k == ScenarioKind::ConfoundLinear || k == ScenarioKind::ConfoundNonlinear;
}

// Name of the parameter each sweep varies.
inline const char* stress_parameter(ScenarioKind k) noexcept {
    switch (k) {
        case ScenarioKind::CubicAnm: return "sigma_eps";
        case ScenarioKind::NearLinearAnm: return "c";
        case ScenarioKind::HeteroCubicAnm: return "lambda";
        case ScenarioKind::SineAnm: return "sigma_eps";
        case ScenarioKind::ConfoundLinear: return "gamma";
        case ScenarioKind::ConfoundNonlinear: return "a";
    }
    return "sigma_eps";
}

inline std::map<std::string, double> default_params(ScenarioKind k) {
    switch (k) {
        case ScenarioKind::CubicAnm: return {{"sigma_eps", 0.1}};
        case ScenarioKind::NearLinearAnm: return {{"c", 0.2}, {"sigma_eps", 0.3}};
        case ScenarioKind::HeteroCubicAnm: return {{"lambda", 1.0}, {"sigma0", 0.3}};
        case ScenarioKind::SineAnm: return {{"sigma_eps", 0.1}};
        case ScenarioKind::ConfoundLinear: return {{"gamma", 1.0}, {"sigma_x", 0.5}, {"sigma_y", 0.5}};
        case ScenarioKind::ConfoundNonlinear: return {{"a", 0.3}, {"b", 1.0}, {"sigma_x", 0.5}, {"sigma_y", 0.5}};
    }
    return {};
}

inline std::vector<double> default_stress_grid(ScenarioKind k) {
    switch (k) {
        case ScenarioKind::CubicAnm:
        case ScenarioKind::SineAnm: return {0.02, 0.1, 0.3, 1.0};
        case ScenarioKind::NearLinearAnm: return {0.0, 0.05, 0.2, 1.0};
        case ScenarioKind::HeteroCubicAnm: return {0.0, 0.5, 1.0, 2.0};
        case ScenarioKind::ConfoundLinear: return {0.25, 0.5, 1.0, 2.0};
        case ScenarioKind::ConfoundNonlinear: return {0.0, 0.1, 0.3, 1.0};
    }
    return {};
}

inline const std::vector<std::size_t>& default_n_grid() {
    static const std::vector<std::size_t> grid = {50, 100, 150, 250, 500, 1000, 1500, 2000};
    return grid;
}

struct Scenario {
    ScenarioKind kind = ScenarioKind::CubicAnm;
    std::map<std::string, double> params;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    Direction truth = Direction::XtoY;
    std::size_t param_index = 0;
    std::size_t rep = 0;

    static Scenario make(ScenarioKind kind, std::size_t n, std::uint64_t seed,
                         const std::map<std::string, double>& overrides = {}) {
        Scenario s;
        s.kind = kind;
        s.params = default_params(kind);
        for (const auto& [k, v] : overrides) s.params[k] = v;
        s.n = n;
        s.seed = seed;
        s.truth = is_confounded(kind) ? Direction::NoDirection : Direction::XtoY;
        return s;
    }

    double param(const std::string& name) const {
        const auto it = params.find(name);
        if (it == params.end()) throw Error(ErrorKind::InvalidScenario, "missing parameter '" + name + "'");
        return it->second;
    }

    double stress_value() const { return param(stress_parameter(kind)); }

    void validate() const {
        if (n == 0) throw Error(ErrorKind::InvalidScenario, "n must be positive");
        const Direction expected = is_confounded(kind) ? Direction::NoDirection : Direction::XtoY;
        if (truth != expected) throw Error(ErrorKind::InvalidScenario, "truth does not match scenario kind");
        for (const auto& [name, value] : default_params(kind)) {
            (void)value;
            const double v = param(name);
            if (!std::isfinite(v)) throw Error(ErrorKind::InvalidScenario, "parameter '" + name + "' is not finite");
            const bool is_scale = name.rfind("sigma", 0) == 0 || name == "lambda";
            if (is_scale && v < 0.0) throw Error(ErrorKind::InvalidScenario, "scale parameter '" + name + "' is negative");
        }
    }

    std::string id() const {
        return std::string(to_string(kind)) + "/n=" + std::to_string(n) + "/" + stress_parameter(kind) + "=" +
               format_double(stress_value()) + "/rep=" + std::to_string(rep);
    }
};

// Flat key=value record, space separated: kind, n, seed, truth, rep,
// param_index, then parameters in key order.
inline std::string serialize(const Scenario& s) {
    std::ostringstream os;
    os << "kind=" << to_string(s.kind) << " n=" << s.n << " seed=" << s.seed << " truth=" << to_string(s.truth)
       << " rep=" << s.rep << " param_index=" << s.param_index;
    for (const auto& [k, v] : s.params) os << ' ' << k << '=' << format_double(v);
    return os.str();
}

inline Scenario parse_scenario(std::string_view record) {
    Scenario s;
    bool have_kind = false;
    std::map<std::string, double> params;
    std::istringstream is{std::string(record)};
    std::string token;
    while (is >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos) throw Error(ErrorKind::InvalidScenario, "malformed token '" + token + "'");
        const std::string key = token.substr(0, eq);
        const std::string value = token.substr(eq + 1);
        auto as_u64 = [&]() {
            const auto v = parse_u64(value);
            if (!v) throw Error(ErrorKind::InvalidScenario, "bad integer for '" + key + "'");
            return *v;
        };
        if (key == "kind") {
            s.kind = parse_kind(value);
            have_kind = true;
        } else if (key == "n") {
            s.n = as_u64();
        } else if (key == "seed") {
            s.seed = as_u64();
        } else if (key == "rep") {
            s.rep = as_u64();
        } else if (key == "param_index") {
            s.param_index = as_u64();
        } else if (key == "truth") {
            if (value == "XtoY") {
                s.truth = Direction::XtoY;
            } else if (value == "NoDirection") {
                s.truth = Direction::NoDirection;
            } else {
                throw Error(ErrorKind::InvalidScenario, "bad truth '" + value + "'");
            }
        } else {
            const auto v = parse_double(value);
            if (!v) throw Error(ErrorKind::InvalidScenario, "bad value for '" + key + "'");
            params[key] = *v;
        }
    }
    if (!have_kind) throw Error(ErrorKind::InvalidScenario, "record has no kind");
    s.params = default_params(s.kind);
    for (const auto& [k, v] : params) s.params[k] = v;
    s.validate();
    return s;
}

inline PairSample generate(const Scenario& s) {
    s.validate();
    CounterRng rng(s.seed);
    PairSample out{std::vector<double>(s.n), std::vector<double>(s.n), s.id(), serialize(s)};
    switch (s.kind) {
        case ScenarioKind::CubicAnm: {
            const double sigma = s.param("sigma_eps");
            for (std::size_t i = 0; i < s.n; ++i) {
                const double x = rng.normal();
                const double e = rng.normal();
                out.x[i] = x;
                out.y[i] = x * x * x + sigma * e;
            }
            break;
        }
        case ScenarioKind::NearLinearAnm: {
            const double c = s.param("c");
            const double sigma = s.param("sigma_eps");
            for (std::size_t i = 0; i < s.n; ++i) {
                const double x = rng.normal();
                const double e = rng.normal();
                out.x[i] = x;
                out.y[i] = x + c * x * x * x + sigma * e;
            }
            break;
        }
        case ScenarioKind::HeteroCubicAnm: {
            const double lambda = s.param("lambda");
            const double sigma0 = s.param("sigma0");
            for (std::size_t i = 0; i < s.n; ++i) {
                const double x = rng.normal();
                const double xi = rng.normal();
                out.x[i] = x;
                out.y[i] = x * x * x + (sigma0 + lambda * std::abs(x)) * xi;
            }
            break;
        }
        case ScenarioKind::SineAnm: {
            const double sigma = s.param("sigma_eps");
            for (std::size_t i = 0; i < s.n; ++i) {
                const double x = 2.0 * rng.uniform() - 1.0;
                const double e = rng.normal();
                out.x[i] = x;
                out.y[i] = std::sin(x) + sigma * e;
            }
            break;
        }
        case ScenarioKind::ConfoundLinear: {
            const double gamma = s.param("gamma");
            const double sx = s.param("sigma_x");
            const double sy = s.param("sigma_y");
            for (std::size_t i = 0; i < s.n; ++i) {
                const double z = rng.normal();
                const double ex = rng.normal();
                const double ey = rng.normal();
                out.x[i] = z + sx * ex;
                out.y[i] = gamma * z + sy * ey;
            }
            break;
        }
        case ScenarioKind::ConfoundNonlinear: {
            const double a = s.param("a");
            const double b = s.param("b");
            const double sx = s.param("sigma_x");
            const double sy = s.param("sigma_y");
            for (std::size_t i = 0; i < s.n; ++i) {
                const double z = rng.normal();
                const double ex = rng.normal();
                const double ey = rng.normal();
                const double warp = a * z * z * z;
                out.x[i] = z + warp + sx * ex;
                out.y[i] = b * z + warp + sy * ey;
            }
            break;
        }
    }
    return out;
}

// Cartesian product ordered by n, then stress value, then replicate. Scenario
// seeds are mix(base_seed, {kind, n, param_index, rep}).
inline std::vector<Scenario> sweep_grid(ScenarioKind kind, const std::vector<std::size_t>& n_grid,
                                        const std::vector<double>& param_grid, std::size_t n_rep,
                                        std::uint64_t base_seed, const std::map<std::string, double>& fixed = {}) {
    std::vector<Scenario> out;
    out.reserve(n_grid.size() * param_grid.size() * n_rep);
    for (std::size_t n : n_grid) {
        for (std::size_t p = 0; p < param_grid.size(); ++p) {
            for (std::size_t rep = 0; rep < n_rep; ++rep) {
                std::map<std::string, double> params = fixed;
                params[stress_parameter(kind)] = param_grid[p];
                const std::uint64_t seed =
                    mix(base_seed, {static_cast<std::uint64_t>(kind), static_cast<std::uint64_t>(n),
                                    static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(rep)});
                Scenario s = Scenario::make(kind, n, seed, params);
                s.param_index = p;
                s.rep = rep;
                out.push_back(std::move(s));
            }
        }
    }
    return out;
}

}  // namespace tra
