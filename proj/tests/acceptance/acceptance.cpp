// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "tra.hpp"
#include "tra/cli.hpp"

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& name, double limit_seconds, const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= limit_seconds;
    const bool pass = o.pass && in_time;
    if (!pass) ++failures;
    std::printf("criterion %2d %-4s %s: %s [%.1fs / limit %.0fs%s]\n", id, pass ? "PASS" : "FAIL", name.c_str(),
                o.detail.c_str(), secs, limit_seconds, in_time ? "" : ", over time");
    std::fflush(stdout);
}

tra::Cloud uniform_cloud(std::size_t n, tra::CounterRng& rng) {
    tra::Cloud c(n);
    for (auto& p : c) p = {rng.uniform(), rng.uniform()};
    return c;
}

std::string count_text(std::size_t k, std::size_t n) { return std::to_string(k) + "/" + std::to_string(n); }

constexpr std::size_t kThreads = 0;  // all cores

tra::PairSample cubic(std::size_t n, double sigma, std::uint64_t seed) {
    return tra::generate(tra::Scenario::make(tra::ScenarioKind::CubicAnm, n, seed, {{"sigma_eps", sigma}}));
}

Outcome mst_oracle() {
    tra::CounterRng rng(1);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + rng.below(59);
        tra::Cloud c(n);
        for (auto& p : c) p = {rng.normal(), rng.normal()};
        auto mst = tra::euclidean_mst(c);
        std::sort(mst.begin(), mst.end());
        const auto deaths = tra::oracle::single_linkage_deaths(c);
        if (mst.size() != deaths.size()) return {false, "size mismatch at trial " + std::to_string(trial)};
        for (std::size_t i = 0; i < mst.size(); ++i) worst = std::max(worst, std::abs(mst[i] - deaths[i]));
    }
    return {worst <= 1e-12, "max deviation " + tra::format_double(worst) + " over 200 clouds"};
}

Outcome tp_stability() {
    tra::CounterRng rng(2);
    std::size_t violations = 0;
    double worst_ratio = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 20 + rng.below(481);
        const tra::Cloud c = uniform_cloud(n, rng);
        const tra::Window w = tra::mesoscopic_window(n, {});
        const double delta = w.alpha / 4.0 * rng.uniform();
        tra::Cloud moved = c;
        for (auto& p : moved) {
            const double angle = 2.0 * M_PI * rng.uniform();
            const double r = delta * std::sqrt(rng.uniform());
            p.x += r * std::cos(angle);
            p.y += r * std::sin(angle);
        }
        const double change = std::abs(tra::tp_profile(c, w) - tra::tp_profile(moved, w));
        const double bound = 2.0 * delta / (w.beta - w.alpha);
        if (change > bound) ++violations;
        if (bound > 0.0) worst_ratio = std::max(worst_ratio, change / bound);
    }
    return {violations == 0,
            std::to_string(violations) + " violations in 100 trials, max |dTP|/bound " + tra::format_fixed(worst_ratio, 3)};
}

Outcome bulk_vs_tube() {
    const std::size_t n = 2000;
    const tra::Window w = tra::mesoscopic_window(n, {1.0, 2.0});
    std::vector<double> bulk(20);
    std::vector<double> tube(20);
    tra::parallel_for(20, kThreads, [&](std::size_t s) {
        tra::CounterRng rng(tra::mix(3, s));
        bulk[s] = tra::tp_profile(uniform_cloud(n, rng), w);
        tra::Cloud curve(n);
        for (auto& p : curve) {
            const double t = rng.uniform();
            p = {t + 1e-6 * rng.normal(), std::sin(6.0 * t) / 3.0 + 1e-6 * rng.normal()};
        }
        tube[s] = tra::tp_profile(curve, w);
    });
    const auto bulk_ok = static_cast<std::size_t>(std::count_if(bulk.begin(), bulk.end(), [](double v) { return v >= 0.9; }));
    const auto tube_ok = static_cast<std::size_t>(std::count_if(tube.begin(), tube.end(), [](double v) { return v <= 0.1; }));
    const auto [bmin, bmax] = std::minmax_element(bulk.begin(), bulk.end());
    const double tmax = *std::max_element(tube.begin(), tube.end());
    return {bulk_ok >= 18 && tube_ok >= 18,
            "square TP>=0.9 in " + count_text(bulk_ok, 20) + " (range " + tra::format_fixed(*bmin, 3) + ".." +
                tra::format_fixed(*bmax, 3) + "), curve TP<=0.1 in " + count_text(tube_ok, 20) + " (max " +
                tra::format_fixed(tmax, 4) + ")"};
}

tra::Verdict stability_decision(const tra::PairSample& s, tra::Variant variant, std::uint64_t seed) {
    const tra::PipelineConfig pipeline;
    const tra::Scorer scorer = tra::make_scorer(variant, pipeline);
    tra::ThresholdConfig tc;
    tc.alpha = 0.10;
    tc.seed = seed;
    const double score = scorer(s, seed);
    return tra::decide(score, tra::stability_threshold(s, scorer, tc).tau).verdict;
}

Outcome small_noise_tra() {
    const std::size_t reps = 30;
    std::vector<tra::Verdict> forward(reps);
    std::vector<tra::Verdict> mirrored(reps);
    tra::parallel_for(2 * reps, kThreads, [&](std::size_t j) {
        const std::size_t r = j / 2;
        const tra::PairSample s = cubic(1000, 0.02, tra::mix(4, r));
        const std::uint64_t seed = tra::mix(40, r);
        if (j % 2 == 0) {
            forward[r] = stability_decision(s, tra::Variant::TRA, seed);
        } else {
            mirrored[r] = stability_decision(s.swapped(), tra::Variant::TRA, seed);
        }
    });
    const auto f = static_cast<std::size_t>(std::count(forward.begin(), forward.end(), tra::Verdict::XtoY));
    const auto m = static_cast<std::size_t>(std::count(mirrored.begin(), mirrored.end(), tra::Verdict::YtoX));
    return {f >= 27 && m >= 27, "XtoY " + count_text(f, reps) + ", mirrored YtoX " + count_text(m, reps)};
}

Outcome fixed_noise_tras() {
    const std::size_t reps = 30;
    std::vector<double> scores(reps);
    tra::parallel_for(reps, kThreads, [&](std::size_t r) {
        scores[r] = tra::tras_score(cubic(2000, 0.5, tra::mix(5, r)), tra::mix(50, r), {}).score;
    });
    const auto pos = static_cast<std::size_t>(std::count_if(scores.begin(), scores.end(), [](double v) { return v > 0.0; }));
    const double median = [&] {
        std::vector<double> v = scores;
        std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
        return v[v.size() / 2];
    }();
    return {pos >= 27, "S>0 in " + count_text(pos, reps) + ", median S " + tra::format_fixed(median, 4)};
}

tra::PairSample copula_null(std::size_t n, double rho, std::uint64_t seed) {
    tra::CounterRng rng(seed);
    tra::PairSample s;
    for (std::size_t i = 0; i < n; ++i) {
        const double z1 = rng.normal();
        const double z2 = rho * z1 + std::sqrt(1.0 - rho * rho) * rng.normal();
        s.x.push_back(std::exp(z1));
        s.y.push_back(z2 * z2 * z2);
    }
    return s;
}

std::vector<tra::TracResult> run_trac(std::size_t count, const std::function<tra::PairSample(std::size_t)>& make,
                                      std::uint64_t seed_base) {
    std::vector<tra::TracResult> out(count);
    tra::parallel_for(count, kThreads, [&](std::size_t i) {
        tra::TracConfig cfg;
        cfg.B = 200;
        cfg.alpha = 0.10;
        cfg.seed = tra::mix(seed_base, i);
        out[i] = tra::trac_pvalue(make(i), cfg, {});
    });
    return out;
}

std::size_t count_verdict(const std::vector<tra::TracResult>& rs, tra::Verdict v) {
    return static_cast<std::size_t>(
        std::count_if(rs.begin(), rs.end(), [v](const tra::TracResult& r) { return r.verdict.verdict == v; }));
}

Outcome trac_level() {
    const auto rs = run_trac(100, [](std::size_t i) { return copula_null(500, 0.8, tra::mix(6, i)); }, 60);
    const std::size_t decided = 100 - count_verdict(rs, tra::Verdict::Abstain);
    const double rate = decided / 100.0;
    return {rate <= 0.16, "non-abstention " + count_text(decided, 100) + " = " + tra::format_fixed(rate, 2)};
}

Outcome trac_power() {
    const auto rs = run_trac(30, [](std::size_t i) { return cubic(500, 0.1, tra::mix(7, i)); }, 70);
    const std::size_t hits = count_verdict(rs, tra::Verdict::XtoY);
    std::vector<double> p;
    for (const auto& r : rs) p.push_back(r.p_value);
    std::sort(p.begin(), p.end());
    return {hits >= 21, "XtoY " + count_text(hits, 30) + ", median p " + tra::format_fixed(p[15], 4)};
}

Outcome confounded_coverage() {
    const std::size_t reps = 30;
    auto make = [](std::size_t i) {
        return tra::generate(tra::Scenario::make(tra::ScenarioKind::ConfoundLinear, 500, tra::mix(8, i),
                                                 {{"gamma", 1.0}, {"sigma_x", 0.5}, {"sigma_y", 0.5}}));
    };
    const auto rs = run_trac(reps, make, 80);
    const std::size_t trac_decided = reps - count_verdict(rs, tra::Verdict::Abstain);
    std::vector<tra::Verdict> tra_verdicts(reps);
    tra::parallel_for(reps, kThreads, [&](std::size_t i) {
        tra_verdicts[i] = stability_decision(make(i), tra::Variant::TRA, tra::mix(81, i));
    });
    const auto tra_decided =
        reps - static_cast<std::size_t>(std::count(tra_verdicts.begin(), tra_verdicts.end(), tra::Verdict::Abstain));
    const double cov = trac_decided / static_cast<double>(reps);
    return {cov <= 0.3, "TRA-C coverage " + tra::format_fixed(cov, 3) + " (" + count_text(trac_decided, reps) +
                            "), TRA coverage " + tra::format_fixed(tra_decided / static_cast<double>(reps), 3) + " (" +
                            count_text(tra_decided, reps) + ")"};
}

Outcome metric_identities() {
    tra::CounterRng rng(9);
    std::size_t bad = 0;
    double worst = 0.0;
    const tra::Verdict verdicts[] = {tra::Verdict::XtoY, tra::Verdict::YtoX, tra::Verdict::Abstain};
    const tra::Direction truths[] = {tra::Direction::XtoY, tra::Direction::YtoX};
    for (int set = 0; set < 1000; ++set) {
        const std::size_t n = 1 + rng.below(300);
        std::vector<tra::BenchRecord> rs(n);
        for (auto& r : rs) {
            r.decision.verdict = verdicts[rng.below(3)];
            r.truth = truths[rng.below(2)];
            r.failed = rng.uniform() < 0.05;
        }
        const tra::MetricsSummary m = tra::summarize(rs);
        if (m.n == 0) continue;
        // risk * n recovers n_wrong exactly once rounded to the nearest count.
        const double scaled = *m.risk * static_cast<double>(m.n);
        if (std::llround(scaled) != static_cast<long long>(m.n_wrong) || std::abs(scaled - m.n_wrong) > 1e-9) ++bad;
        const double acc = m.decided_accuracy.value_or(0.0);
        const double rhs = m.n_decided == 0 ? 0.0 : (1.0 - acc) * m.coverage;
        worst = std::max(worst, std::abs(*m.risk - rhs));
        if (m.n_correct + m.n_wrong != m.n_decided) ++bad;
    }
    return {bad == 0 && worst <= 1e-12,
            std::to_string(bad) + " count mismatches, max |risk - (1-acc)cov| " + tra::format_double(worst)};
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

Outcome determinism() {
    namespace fs = std::filesystem;
    const fs::path root = fs::temp_directory_path() / "tra_acceptance_determinism";
    fs::remove_all(root);
    fs::create_directories(root);
    {
        const tra::PairSample s = cubic(300, 0.1, 10);
        std::ofstream out(root / "pair.txt");
        out.precision(17);
        for (std::size_t i = 0; i < s.size(); ++i) out << s.x[i] << ' ' << s.y[i] << '\n';
    }
    std::vector<std::string> mismatches;
    for (const std::string method : {"tra", "tras", "trac"}) {
        std::string first;
        for (int run = 0; run < 2; ++run) {
            tra::RunConfig c;
            c.input = (root / "pair.txt").string();
            c.method = method;
            c.seed = 7;
            c.threads = 4;
            c.boot = 50;
            std::ostringstream out;
            std::ostringstream err;
            if (tra::cmd_decide(c, out, err) != 0) return {false, "decide failed: " + err.str()};
            if (run == 0) {
                first = out.str();
            } else if (out.str() != first) {
                mismatches.push_back("decide/" + method);
            }
        }
    }
    std::string bench_files[2];
    for (int run = 0; run < 2; ++run) {
        tra::RunConfig c;
        c.method = "tra,tras,trac";
        c.kind = "cubic";
        c.n_list = "80,120";
        c.params = "0.1,0.5";
        c.reps = 2;
        c.seed = 7;
        c.threads = 4;
        c.stability_R = 10;
        c.boot = 20;
        c.out = (root / ("bench" + std::to_string(run))).string();
        std::ostringstream out;
        std::ostringstream err;
        if (tra::cmd_bench(c, out, err) != 0) return {false, "bench failed: " + err.str()};
        for (const char* f : {"records.txt", "results.csv", "summary.csv"}) bench_files[run] += read_file(fs::path(c.out) / f);
    }
    // The echoed out= path differs between the two runs by construction.
    auto strip_out = [](std::string s) {
        std::string r;
        std::istringstream in(s);
        for (std::string line; std::getline(in, line);) {
            if (line.rfind("# out=", 0) != 0) r += line + '\n';
        }
        return r;
    };
    if (strip_out(bench_files[0]) != strip_out(bench_files[1]) || bench_files[0].empty()) mismatches.push_back("bench");
    fs::remove_all(root);
    std::string detail = mismatches.empty() ? "decide (tra, tras, trac) and bench outputs identical across runs, threads=4"
                                            : "differs:";
    for (const auto& m : mismatches) detail += " " + m;
    return {mismatches.empty(), detail};
}

}  // namespace

int main() {
    criterion(1, "MST equals single-linkage deaths", 10, mst_oracle);
    criterion(2, "TP stability under perturbation", 10, tp_stability);
    criterion(3, "bulk vs tube separation", 30, bulk_vs_tube);
    criterion(4, "small-noise TRA consistency", 300, small_noise_tra);
    criterion(5, "fixed-noise TRA-s sign", 600, fixed_noise_tras);
    criterion(6, "TRA-C level under copula null", 1800, trac_level);
    criterion(7, "TRA-C power on cubic ANM", 900, trac_power);
    criterion(8, "confounded coverage drop", 1800, confounded_coverage);
    criterion(9, "metric identities", 5, metric_identities);
    criterion(10, "end-to-end determinism", 120, determinism);
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
