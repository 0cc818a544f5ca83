#pragma once

// Benchmark harness: selective-prediction metrics, pair-file ingestion and
// paired evaluation of several methods on identical dataset draws.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "tra/error.hpp"
#include "tra/format.hpp"
#include "tra/normal.hpp"
#include "tra/parallel.hpp"
#include "tra/rng.hpp"
#include "tra/sample.hpp"
#include "tra/scoring.hpp"
#include "tra/synth.hpp"
#include "tra/trac.hpp"

namespace tra {

struct BenchRecord {
    std::string id;
    std::string group;
    Method method = Method::TRA;
    Decision decision;
    Direction truth = Direction::Unknown;
    std::size_t n = 0;
    double param = std::nan("");
    double score = std::nan("");
    double tau = std::nan("");
    double p_value = std::nan("");
    double rho_hat = std::nan("");
    double seconds = 0.0;
    std::uint64_t checksum = 0;
    bool failed = false;
    std::string error;
};

inline bool truth_is_directed(Direction d) noexcept { return d == Direction::XtoY || d == Direction::YtoX; }

inline bool is_correct(Verdict v, Direction truth) noexcept {
    return (v == Verdict::XtoY && truth == Direction::XtoY) || (v == Verdict::YtoX && truth == Direction::YtoX);
}

struct MetricsSummary {
    std::size_t n = 0;
    std::size_t n_decided = 0;
    std::size_t n_correct = 0;
    std::size_t n_wrong = 0;
    std::size_t n_failed = 0;
    double coverage = 0.0;
    // Unset in coverage-only mode (some truth is not a direction) and, for
    // decided_accuracy, when nothing was decided.
    std::optional<double> decided_accuracy;
    std::optional<double> risk;
    // Wilson interval on decided accuracy; on coverage in coverage-only mode.
    double wilson_low = 0.0;
    double wilson_high = 1.0;
    bool coverage_only = false;
};

inline std::pair<double, double> wilson_interval(std::size_t k, std::size_t n, double conf = 0.95) {
    if (n == 0 || k > n) throw Error(ErrorKind::InvalidInput, "wilson_interval needs 0 <= k <= n, n >= 1");
    const double z = normal_quantile(0.5 * (1.0 + conf));
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(k) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = (p + z2 / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    double low = std::max(0.0, center - half);
    double high = std::min(1.0, center + half);
    if (k == 0) low = 0.0;
    if (k == n) high = 1.0;
    return {low, high};
}

// Failed records are counted in n_failed and excluded from everything else.
inline MetricsSummary summarize(const std::vector<BenchRecord>& records, double conf = 0.95) {
    MetricsSummary m;
    for (const BenchRecord& r : records) {
        if (r.failed) {
            ++m.n_failed;
            continue;
        }
        ++m.n;
        if (!truth_is_directed(r.truth)) m.coverage_only = true;
        if (r.decision.verdict == Verdict::Abstain) continue;
        ++m.n_decided;
        if (is_correct(r.decision.verdict, r.truth)) {
            ++m.n_correct;
        } else {
            ++m.n_wrong;
        }
    }
    if (m.n == 0) return m;
    const double n = static_cast<double>(m.n);
    m.coverage = static_cast<double>(m.n_decided) / n;
    if (m.coverage_only) {
        m.n_correct = 0;
        m.n_wrong = 0;
        std::tie(m.wilson_low, m.wilson_high) = wilson_interval(m.n_decided, m.n, conf);
        return m;
    }
    m.risk = static_cast<double>(m.n_wrong) / n;
    if (m.n_decided > 0) {
        m.decided_accuracy = static_cast<double>(m.n_correct) / static_cast<double>(m.n_decided);
        std::tie(m.wilson_low, m.wilson_high) = wilson_interval(m.n_correct, m.n_decided, conf);
    }
    return m;
}

struct LoadedPair {
    PairSample sample;
    Direction truth = Direction::Unknown;
    double weight = 1.0;
    std::size_t dropped_rows = 0;
};

namespace detail {

inline std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream is(line);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

inline std::uint64_t hash_string(const std::string& s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::filesystem::path find_pair_file(const std::filesystem::path& dir, const std::string& id) {
    for (const std::string& name : {"pair" + id + ".txt", id + ".txt", id}) {
        const auto p = dir / name;
        if (std::filesystem::is_regular_file(p)) return p;
    }
    throw Error(ErrorKind::IoError, "no data file for pair '" + id + "' in " + dir.string());
}

}  // namespace detail

// Reads columns x_col and y_col (1-based) of a whitespace-separated file.
// Rows with a non-finite value in either column are dropped.
inline LoadedPair read_pair_file(const std::filesystem::path& path, std::size_t x_col, std::size_t y_col) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
    LoadedPair out;
    out.sample.id = path.stem().string();
    out.sample.source = path.string();
    std::string line;
    std::size_t line_no = 0;
    const std::size_t need = std::max(x_col, y_col);
    while (std::getline(in, line)) {
        ++line_no;
        const auto tokens = detail::split_ws(line);
        if (tokens.empty() || tokens.front().front() == '#') continue;
        if (tokens.size() < need) {
            throw Error(ErrorKind::ParseError,
                        path.string() + ":" + std::to_string(line_no) + ": expected at least " + std::to_string(need) +
                            " columns",
                        line_no);
        }
        std::vector<double> row(tokens.size());
        for (std::size_t c = 0; c < tokens.size(); ++c) {
            const auto v = parse_double(tokens[c]);
            if (!v) {
                throw Error(ErrorKind::ParseError,
                            path.string() + ":" + std::to_string(line_no) + ": not a number '" + tokens[c] + "'", line_no);
            }
            row[c] = *v;
        }
        const double x = row[x_col - 1];
        const double y = row[y_col - 1];
        if (!std::isfinite(x) || !std::isfinite(y)) {
            ++out.dropped_rows;
            continue;
        }
        out.sample.x.push_back(x);
        out.sample.y.push_back(y);
    }
    if (out.sample.x.empty()) throw Error(ErrorKind::EmptyPair, "no usable rows in " + path.string());
    return out;
}

// Metadata lines: `id cause_first cause_last effect_first effect_last weight`.
// Only pairs with a single cause column and a single effect column are kept.
// X is the lower-numbered column; truth records which side is the cause.
inline std::vector<LoadedPair> load_pairs(const std::filesystem::path& dir, const std::filesystem::path& meta_path,
                                          std::size_t max_samples, std::uint64_t seed) {
    std::ifstream meta(meta_path);
    if (!meta) throw Error(ErrorKind::IoError, "cannot open metadata " + meta_path.string());
    std::vector<LoadedPair> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(meta, line)) {
        ++line_no;
        const auto tokens = detail::split_ws(line);
        if (tokens.empty() || tokens.front().front() == '#') continue;
        if (tokens.size() < 5) {
            throw Error(ErrorKind::ParseError, meta_path.string() + ":" + std::to_string(line_no) + ": expected 6 fields",
                        line_no);
        }
        std::size_t cols[4];
        for (int c = 0; c < 4; ++c) {
            const auto v = parse_u64(tokens[static_cast<std::size_t>(c) + 1]);
            if (!v || *v == 0) {
                throw Error(ErrorKind::ParseError,
                            meta_path.string() + ":" + std::to_string(line_no) + ": bad column index", line_no);
            }
            cols[c] = *v;
        }
        double weight = 1.0;
        if (tokens.size() >= 6) {
            const auto w = parse_double(tokens[5]);
            if (!w) {
                throw Error(ErrorKind::ParseError, meta_path.string() + ":" + std::to_string(line_no) + ": bad weight",
                            line_no);
            }
            weight = *w;
        }
        if (cols[0] != cols[1] || cols[2] != cols[3]) continue;
        const std::size_t cause = cols[0];
        const std::size_t effect = cols[2];
        if (cause == effect) {
            throw Error(ErrorKind::ParseError, meta_path.string() + ":" + std::to_string(line_no) + ": cause equals effect",
                        line_no);
        }

        const std::string& id = tokens[0];
        LoadedPair pair = read_pair_file(detail::find_pair_file(dir, id), std::min(cause, effect), std::max(cause, effect));
        pair.sample.id = id;
        pair.truth = cause < effect ? Direction::XtoY : Direction::YtoX;
        pair.weight = weight;
        if (pair.sample.size() > max_samples) {
            std::vector<std::size_t> rows = sample_without_replacement(pair.sample.size(), max_samples,
                                                                       mix(seed, detail::hash_string(id)));
            std::sort(rows.begin(), rows.end());
            PairSample sub = pair.sample.subset(rows);
            pair.sample = std::move(sub);
        }
        out.push_back(std::move(pair));
    }
    return out;
}

struct BenchItem {
    PairSample sample;
    Direction truth = Direction::Unknown;
    std::string group;
    double param = std::nan("");
};

inline std::vector<BenchItem> items_from_scenarios(const std::vector<Scenario>& scenarios) {
    std::vector<BenchItem> out;
    out.reserve(scenarios.size());
    for (const Scenario& s : scenarios) out.push_back({generate(s), s.truth, to_string(s.kind), s.stress_value()});
    return out;
}

inline std::vector<BenchItem> items_from_pairs(std::vector<LoadedPair> pairs) {
    std::vector<BenchItem> out;
    out.reserve(pairs.size());
    for (LoadedPair& p : pairs) out.push_back({std::move(p.sample), p.truth, "pairs", std::nan("")});
    return out;
}

struct BenchConfig {
    PipelineConfig pipeline;
    ThresholdConfig threshold;
    TracConfig trac;
    std::uint64_t seed = 0;
    std::size_t threads = 1;
    bool record_time = false;
};

// One method on one dataset. Scorer and subsample seeds derive from
// mix(cfg.seed, checksum), so every method sees the same randomness per draw.
inline BenchRecord evaluate(const BenchItem& item, Method method, const BenchConfig& cfg) {
    BenchRecord rec;
    rec.id = item.sample.id;
    rec.group = item.group;
    rec.method = method;
    rec.truth = item.truth;
    rec.n = item.sample.size();
    rec.param = item.param;
    rec.checksum = checksum(item.sample);
    rec.decision.method = method;
    const std::uint64_t seed = mix(cfg.seed, rec.checksum);

    const auto start = std::chrono::steady_clock::now();
    try {
        if (method == Method::TRAC) {
            TracConfig tc = cfg.trac;
            tc.seed = seed;
            tc.threads = 1;
            const TracResult r = trac_pvalue(item.sample, tc, cfg.pipeline);
            rec.decision = r.verdict;
            rec.score = r.score;
            rec.p_value = r.p_value;
            rec.rho_hat = r.rho_hat;
        } else {
            const Variant variant = method == Method::TRA ? Variant::TRA : Variant::TRAs;
            const Scorer scorer = make_scorer(variant, cfg.pipeline);
            ThresholdConfig tc = cfg.threshold;
            tc.seed = seed;
            tc.threads = 1;
            const double score = scorer(item.sample, seed);
            const StabilityResult st = stability_threshold(item.sample, scorer, tc);
            rec.decision = decide(score, st.tau, method);
            rec.score = score;
            rec.tau = st.tau;
        }
    } catch (const std::exception& e) {
        rec.failed = true;
        rec.error = e.what();
        rec.decision = {Verdict::Abstain, std::nan(""), std::nan(""), method};
    }
    if (cfg.record_time) {
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    return rec;
}

using RecordSink = std::function<void(const BenchRecord&)>;

// Records are ordered item-major, method-minor, and reach the sink in that
// order regardless of which worker finishes first.
inline std::vector<BenchRecord> run_benchmark(const std::vector<BenchItem>& items, const std::vector<Method>& methods,
                                              const BenchConfig& cfg, const RecordSink& sink = {}) {
    const std::size_t jobs = items.size() * methods.size();
    std::vector<BenchRecord> records(jobs);
    std::vector<char> done(jobs, 0);
    std::size_t flushed = 0;
    std::mutex mutex;
    parallel_for(jobs, cfg.threads, [&](std::size_t j) {
        BenchRecord rec = evaluate(items[j / methods.size()], methods[j % methods.size()], cfg);
        std::lock_guard<std::mutex> lock(mutex);
        records[j] = std::move(rec);
        done[j] = 1;
        while (flushed < jobs && done[flushed]) {
            if (sink) sink(records[flushed]);
            ++flushed;
        }
    });
    return records;
}

struct GroupSummary {
    std::string group;
    Method method = Method::TRA;
    MetricsSummary metrics;
};

// Summaries per (group, method), groups in first-appearance order.
inline std::vector<GroupSummary> summarize_by_group(const std::vector<BenchRecord>& records,
                                                    const std::vector<Method>& methods) {
    std::vector<std::string> groups;
    for (const BenchRecord& r : records) {
        if (std::find(groups.begin(), groups.end(), r.group) == groups.end()) groups.push_back(r.group);
    }
    std::vector<GroupSummary> out;
    for (const std::string& g : groups) {
        for (Method m : methods) {
            std::vector<BenchRecord> subset;
            for (const BenchRecord& r : records) {
                if (r.group == g && r.method == m) subset.push_back(r);
            }
            if (!subset.empty()) out.push_back({g, m, summarize(subset)});
        }
    }
    return out;
}

// ---- output formats ----

inline std::string na_or(double v) { return std::isnan(v) ? "NA" : format_double(v); }
inline std::string na_or(const std::optional<double>& v) { return v ? format_double(*v) : "NA"; }

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    static constexpr char digits[] = "0123456789abcdef";
    for (int i = 15; i >= 0; --i) {
        buf[i] = digits[v & 0xF];
        v >>= 4;
    }
    buf[16] = '\0';
    return buf;
}

inline std::string record_line(const BenchRecord& r) {
    std::ostringstream os;
    std::string error = r.error;
    std::replace(error.begin(), error.end(), ' ', '_');
    os << "id=" << r.id << " group=" << r.group << " method=" << to_string(r.method) << " n=" << r.n
       << " param=" << na_or(r.param) << " verdict=" << to_string(r.decision.verdict) << " truth=" << to_string(r.truth)
       << " score=" << na_or(r.score) << " tau=" << na_or(r.tau) << " pvalue=" << na_or(r.p_value)
       << " rho_hat=" << na_or(r.rho_hat) << " checksum=" << hex64(r.checksum)
       << " seconds=" << format_fixed(r.seconds, 3) << " failed=" << (r.failed ? 1 : 0);
    if (r.failed) os << " error=" << error;
    return os.str();
}

inline constexpr const char* kResultsHeader = "scenario,method,n,param,decision,truth,score,pvalue,tau,seconds";

inline std::string csv_row(const BenchRecord& r) {
    std::ostringstream os;
    os << r.id << ',' << to_string(r.method) << ',' << r.n << ',' << na_or(r.param) << ','
       << (r.failed ? "Failed" : to_string(r.decision.verdict)) << ',' << to_string(r.truth) << ',' << na_or(r.score)
       << ',' << na_or(r.p_value) << ',' << na_or(r.tau) << ',' << format_fixed(r.seconds, 3);
    return os.str();
}

inline constexpr const char* kSummaryHeader =
    "group,method,n,n_decided,n_correct,n_wrong,n_failed,coverage,decided_accuracy,risk,wilson_low,wilson_high";

inline std::string summary_row(const GroupSummary& s) {
    const MetricsSummary& m = s.metrics;
    std::ostringstream os;
    os << s.group << ',' << to_string(s.method) << ',' << m.n << ',' << m.n_decided << ',';
    if (m.coverage_only) {
        os << "NA,NA,";
    } else {
        os << m.n_correct << ',' << m.n_wrong << ',';
    }
    os << m.n_failed << ',' << format_double(m.coverage) << ',' << na_or(m.decided_accuracy) << ',' << na_or(m.risk)
       << ',' << format_double(m.wilson_low) << ',' << format_double(m.wilson_high);
    return os.str();
}

}  // namespace tra
