#pragma once

// Command implementations behind the `tra` executable. They take a fully
// resolved RunConfig and write to caller-provided streams, so tests can run
// them in-process.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "tra/bench.hpp"
#include "tra/error.hpp"
#include "tra/format.hpp"
#include "tra/scoring.hpp"
#include "tra/synth.hpp"
#include "tra/trac.hpp"

namespace tra {

struct RunConfig {
    std::string method = "tra";       // tra | tras | trac (decide); comma list for bench
    std::string trac_score = "tra";   // score calibrated by trac: tra | tras
    double kappa = 1.0;
    double c_beta = 2.0;
    std::size_t folds = 5;
    std::size_t basis_knots = 0;      // 0 = automatic
    bool raw_binned_residuals = false;
    std::size_t boot = 500;
    double alpha = 0.10;
    std::size_t stability_R = 50;
    double fraction = 0.8;
    std::uint64_t seed = 0;
    std::size_t max_samples = 2000;
    std::size_t threads = 1;
    bool timing = false;

    // decide inputs
    std::string input;
    std::size_t x_col = 1;
    std::size_t y_col = 2;
    std::string inline_x;
    std::string inline_y;

    // bench inputs
    std::string kind;
    std::string n_list = "250";
    std::string params;   // comma list of stress values; empty = kind default, "default" = full grid
    std::size_t reps = 5;
    std::string pairs_dir;
    std::string meta;
    std::string out;
};

inline std::vector<std::string> split_list(const std::string& s, char sep = ',') {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else if (c != ' ') {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

// Flat key=value lines in a fixed key order.
inline std::vector<std::pair<std::string, std::string>> to_key_values(const RunConfig& c) {
    return {
        {"method", c.method},
        {"trac_score", c.trac_score},
        {"kappa", format_double(c.kappa)},
        {"cbeta", format_double(c.c_beta)},
        {"folds", std::to_string(c.folds)},
        {"basis_knots", std::to_string(c.basis_knots)},
        {"raw_binned_residuals", c.raw_binned_residuals ? "1" : "0"},
        {"boot", std::to_string(c.boot)},
        {"alpha", format_double(c.alpha)},
        {"stability_R", std::to_string(c.stability_R)},
        {"frac", format_double(c.fraction)},
        {"seed", std::to_string(c.seed)},
        {"max_samples", std::to_string(c.max_samples)},
        {"threads", std::to_string(c.threads)},
        {"timing", c.timing ? "1" : "0"},
        {"input", c.input},
        {"x_col", std::to_string(c.x_col)},
        {"y_col", std::to_string(c.y_col)},
        {"kind", c.kind},
        {"n", c.n_list},
        {"params", c.params},
        {"reps", std::to_string(c.reps)},
        {"pairs", c.pairs_dir},
        {"meta", c.meta},
        {"out", c.out},
    };
}

inline std::string config_text(const RunConfig& c, const std::string& prefix = "") {
    std::ostringstream os;
    for (const auto& [k, v] : to_key_values(c)) os << prefix << k << '=' << v << '\n';
    return os.str();
}

inline void set_key(RunConfig& c, const std::string& key, const std::string& value) {
    auto num = [&]() {
        const auto v = parse_double(value);
        if (!v) throw Error(ErrorKind::InvalidConfig, "bad number for '" + key + "': " + value);
        return *v;
    };
    auto count = [&]() -> std::size_t {
        const auto v = parse_u64(value);
        if (!v) throw Error(ErrorKind::InvalidConfig, "bad integer for '" + key + "': " + value);
        return static_cast<std::size_t>(*v);
    };
    auto flag = [&]() { return value == "1" || value == "true" || value == "yes"; };

    if (key == "method") c.method = value;
    else if (key == "trac_score") c.trac_score = value;
    else if (key == "kappa") c.kappa = num();
    else if (key == "cbeta") c.c_beta = num();
    else if (key == "folds") c.folds = count();
    else if (key == "basis_knots") c.basis_knots = count();
    else if (key == "raw_binned_residuals") c.raw_binned_residuals = flag();
    else if (key == "boot") c.boot = count();
    else if (key == "alpha") c.alpha = num();
    else if (key == "stability_R") c.stability_R = count();
    else if (key == "frac") c.fraction = num();
    else if (key == "seed") c.seed = count();
    else if (key == "max_samples") c.max_samples = count();
    else if (key == "threads") c.threads = count();
    else if (key == "timing") c.timing = flag();
    else if (key == "input") c.input = value;
    else if (key == "x_col") c.x_col = count();
    else if (key == "y_col") c.y_col = count();
    else if (key == "kind") c.kind = value;
    else if (key == "n") c.n_list = value;
    else if (key == "params") c.params = value;
    else if (key == "reps") c.reps = count();
    else if (key == "pairs") c.pairs_dir = value;
    else if (key == "meta") c.meta = value;
    else if (key == "out") c.out = value;
    else throw Error(ErrorKind::InvalidConfig, "unknown config key '" + key + "'");
}

// Blank lines and lines starting with '#' are ignored.
inline RunConfig parse_config(std::istream& in, RunConfig base = {}) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorKind::InvalidConfig, "config line " + std::to_string(line_no) + " has no '='", line_no);
        }
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        set_key(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return base;
}

inline RunConfig load_config_file(const std::filesystem::path& path, RunConfig base = {}) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot open config " + path.string());
    return parse_config(in, std::move(base));
}

inline Method parse_method(const std::string& name) {
    if (name == "tra") return Method::TRA;
    if (name == "tras") return Method::TRAs;
    if (name == "trac") return Method::TRAC;
    throw Error(ErrorKind::InvalidConfig, "unknown method '" + name + "'");
}

inline BenchConfig bench_config(const RunConfig& c) {
    BenchConfig b;
    b.pipeline.window = {c.kappa, c.c_beta};
    b.pipeline.folds = c.folds;
    if (c.basis_knots > 0) b.pipeline.smoother.basis_knots = c.basis_knots;
    b.pipeline.standardize_binned_residuals = !c.raw_binned_residuals;
    b.threshold.R = c.stability_R;
    b.threshold.fraction = c.fraction;
    b.threshold.alpha = c.alpha;
    b.threshold.seed = c.seed;
    b.threshold.threads = c.threads;
    b.trac.B = c.boot;
    b.trac.alpha = c.alpha;
    b.trac.seed = c.seed;
    b.trac.threads = c.threads;
    if (c.trac_score == "tra") {
        b.trac.score_variant = Variant::TRA;
    } else if (c.trac_score == "tras") {
        b.trac.score_variant = Variant::TRAs;
    } else {
        throw Error(ErrorKind::InvalidConfig, "trac_score must be tra or tras");
    }
    b.seed = c.seed;
    b.threads = c.threads;
    b.record_time = c.timing;
    b.pipeline.validate();
    b.threshold.validate();
    b.trac.validate();
    return b;
}

inline std::vector<double> parse_number_list(const std::string& s, const std::string& what) {
    std::vector<double> out;
    for (const std::string& tok : split_list(s)) {
        const auto v = parse_double(tok);
        if (!v || !std::isfinite(*v)) throw Error(ErrorKind::InvalidConfig, "bad value '" + tok + "' in " + what);
        out.push_back(*v);
    }
    return out;
}

inline int exit_code_for(const Error& e) {
    switch (e.kind()) {
        case ErrorKind::InvalidInput:
        case ErrorKind::InsufficientData:
        case ErrorKind::DegenerateRegressor:
        case ErrorKind::DegenerateInput:
        case ErrorKind::InvalidConfig:
        case ErrorKind::InvalidScenario:
        case ErrorKind::IoError:
        case ErrorKind::ParseError:
        case ErrorKind::EmptyPair:
        case ErrorKind::InvalidWindow:
            return 2;
        default:
            return 1;
    }
}

inline PairSample decide_input(const RunConfig& c) {
    if (!c.inline_x.empty() || !c.inline_y.empty()) {
        PairSample s{parse_number_list(c.inline_x, "--x"), parse_number_list(c.inline_y, "--y"), "inline", "inline"};
        if (s.x.size() != s.y.size()) throw Error(ErrorKind::InvalidInput, "--x and --y differ in length");
        return s;
    }
    if (c.input.empty()) throw Error(ErrorKind::InvalidConfig, "no input: pass a pair file or --x/--y");
    if (c.x_col == 0 || c.y_col == 0 || c.x_col == c.y_col) throw Error(ErrorKind::InvalidConfig, "bad column selection");
    return read_pair_file(c.input, c.x_col, c.y_col).sample;
}

// Single-pair decision. Exit 0 for any verdict, 2 for input errors.
inline int cmd_decide(const RunConfig& c, std::ostream& out, std::ostream& err) {
    try {
        const BenchConfig b = bench_config(c);
        const Method method = parse_method(c.method);
        const PairSample sample = decide_input(c);
        const std::size_t min_n = (method == Method::TRAs || (method == Method::TRAC && c.trac_score == "tras")) ? 40 : 20;
        if (sample.size() < min_n) {
            throw Error(ErrorKind::InsufficientData,
                        "need at least " + std::to_string(min_n) + " rows, got " + std::to_string(sample.size()));
        }

        const auto start = std::chrono::steady_clock::now();
        std::ostringstream report;
        report << config_text(c, "# ");
        report << "method: " << to_string(method) << '\n';
        report << "n: " << sample.size() << '\n';
        if (method == Method::TRAC) {
            TracConfig tc = b.trac;
            const TracResult r = trac_pvalue(sample, tc, b.pipeline);
            report << "verdict: " << to_string(r.verdict.verdict) << '\n';
            report << "score: " << format_double(r.score) << '\n';
            report << "s_obs: " << format_double(r.s_obs) << '\n';
            report << "pvalue: " << format_double(r.p_value) << '\n';
            report << "rho_hat: " << format_double(r.rho_hat) << '\n';
            report << "boot: " << tc.B << '\n';
            report << "exceedances: " << r.exceedances << '\n';
        } else {
            const Variant variant = method == Method::TRA ? Variant::TRA : Variant::TRAs;
            const ScoreResult s =
                variant == Variant::TRA ? tra_score(sample, c.seed, b.pipeline) : tras_score(sample, c.seed, b.pipeline);
            const StabilityResult st = stability_threshold(sample, make_scorer(variant, b.pipeline), b.threshold);
            const Decision d = decide(s.score, st.tau, method);
            report << "verdict: " << to_string(d.verdict) << '\n';
            report << "score: " << format_double(s.score) << '\n';
            report << "tau: " << format_double(st.tau) << '\n';
            report << "tp_forward: " << format_double(s.tp_forward) << '\n';
            report << "tp_reverse: " << format_double(s.tp_reverse) << '\n';
            for (const auto& [k, v] : s.diagnostics) report << k << ": " << format_double(v) << '\n';
        }
        if (c.timing) {
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            report << "seconds: " << format_fixed(secs, 3) << '\n';
        }
        out << report.str();
        return 0;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

inline std::vector<std::size_t> parse_n_list(const std::string& s) {
    std::vector<std::size_t> out;
    for (const std::string& tok : split_list(s)) {
        const auto v = parse_u64(tok);
        if (!v || *v == 0) throw Error(ErrorKind::InvalidConfig, "bad sample size '" + tok + "'");
        out.push_back(static_cast<std::size_t>(*v));
    }
    if (out.empty()) throw Error(ErrorKind::InvalidConfig, "empty n list");
    return out;
}

inline void print_summary_table(const std::vector<GroupSummary>& summaries, std::ostream& out) {
    out << std::left << std::setw(20) << "group" << std::setw(6) << "method" << std::right << std::setw(6) << "n"
        << std::setw(9) << "decided" << std::setw(10) << "coverage" << std::setw(10) << "acc_d" << std::setw(10)
        << "risk" << std::setw(20) << "wilson95" << '\n';
    for (const GroupSummary& s : summaries) {
        const MetricsSummary& m = s.metrics;
        auto opt = [](const std::optional<double>& v) { return v ? format_fixed(*v, 3) : std::string("NA"); };
        out << std::left << std::setw(20) << s.group << std::setw(6) << to_string(s.method) << std::right
            << std::setw(6) << m.n << std::setw(9) << m.n_decided << std::setw(10) << format_fixed(m.coverage, 3)
            << std::setw(10) << opt(m.decided_accuracy) << std::setw(10) << opt(m.risk) << std::setw(20)
            << ("[" + format_fixed(m.wilson_low, 3) + "," + format_fixed(m.wilson_high, 3) + "]") << '\n';
    }
}

// Benchmark sweep over a synthetic scenario kind or a directory of pair files.
// With --out DIR, writes records.txt, results.csv and summary.csv; each file
// starts with the config echo as '#' lines.
inline int cmd_bench(const RunConfig& c, std::ostream& out, std::ostream& err) {
    try {
        const BenchConfig b = bench_config(c);
        std::vector<Method> methods;
        for (const std::string& m : split_list(c.method)) methods.push_back(parse_method(m));
        if (methods.empty()) throw Error(ErrorKind::InvalidConfig, "no methods");

        std::vector<BenchItem> items;
        if (!c.pairs_dir.empty()) {
            if (c.meta.empty()) throw Error(ErrorKind::InvalidConfig, "--pairs requires --meta");
            items = items_from_pairs(load_pairs(c.pairs_dir, c.meta, c.max_samples, c.seed));
        } else {
            if (c.kind.empty()) throw Error(ErrorKind::InvalidConfig, "pass --kind or --pairs");
            const ScenarioKind kind = parse_kind(c.kind);
            std::vector<double> grid;
            if (c.params.empty()) {
                grid = {default_params(kind).at(stress_parameter(kind))};
            } else if (c.params == "default") {
                grid = default_stress_grid(kind);
            } else {
                grid = parse_number_list(c.params, "--params");
            }
            if (c.reps == 0) throw Error(ErrorKind::InvalidConfig, "reps must be >= 1");
            items = items_from_scenarios(sweep_grid(kind, parse_n_list(c.n_list), grid, c.reps, c.seed));
        }

        const std::string echo = config_text(c, "# ");
        std::ofstream records_file;
        if (!c.out.empty()) {
            std::filesystem::create_directories(c.out);
            records_file.open(std::filesystem::path(c.out) / "records.txt");
            if (!records_file) throw Error(ErrorKind::IoError, "cannot write to " + c.out);
            records_file << echo;
        }
        const std::vector<BenchRecord> records = run_benchmark(items, methods, b, [&](const BenchRecord& r) {
            if (records_file.is_open()) records_file << record_line(r) << '\n';
            if (r.failed) err << "record failed: " << r.id << " " << to_string(r.method) << ": " << r.error << '\n';
        });
        const std::vector<GroupSummary> summaries = summarize_by_group(records, methods);

        if (!c.out.empty()) {
            std::ofstream results(std::filesystem::path(c.out) / "results.csv");
            results << echo << kResultsHeader << '\n';
            for (const BenchRecord& r : records) results << csv_row(r) << '\n';
            std::ofstream summary(std::filesystem::path(c.out) / "summary.csv");
            summary << echo << kSummaryHeader << '\n';
            for (const GroupSummary& s : summaries) summary << summary_row(s) << '\n';
        }
        out << "records: " << records.size() << '\n';
        print_summary_table(summaries, out);
        return 0;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace tra
