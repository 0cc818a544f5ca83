#include <iostream>
#include <map>
#include <string>
#include <utility>

#include <CLI11.hpp>

#include "tra/cli.hpp"

namespace {

void add_common(CLI::App& cmd, tra::RunConfig& c, std::string& config_path) {
    cmd.add_option("--config", config_path, "flat key=value config file; flags override it");
    cmd.add_option("--method", c.method, "tra, tras or trac (bench accepts a comma list)");
    cmd.add_option("--trac-score", c.trac_score, "score calibrated by trac: tra or tras");
    cmd.add_option("--kappa", c.kappa, "window scale kappa");
    cmd.add_option("--cbeta", c.c_beta, "window ratio c_beta (> 1)");
    cmd.add_option("--folds", c.folds, "cross-fitting folds K");
    cmd.add_option("--knots", c.basis_knots, "interior spline knots (0 = automatic)");
    cmd.add_flag("--raw-binned-residuals", c.raw_binned_residuals, "TRA-s: bin raw rather than sd-scaled residuals");
    cmd.add_option("--boot", c.boot, "TRA-C bootstrap replicates B");
    cmd.add_option("--alpha", c.alpha, "significance level");
    cmd.add_option("--stability-R", c.stability_R, "stability subsamples R");
    cmd.add_option("--frac", c.fraction, "stability subsample fraction");
    cmd.add_option("--seed", c.seed, "master seed");
    cmd.add_option("--max-samples", c.max_samples, "pair subsampling cap");
    cmd.add_option("--threads", c.threads, "worker threads (0 = all cores)");
    cmd.add_flag("--timing", c.timing, "report wall-clock seconds (makes output run-dependent)");
    cmd.add_option("--out", c.out, "output directory");
}

// Config key -> command-line option, for every key a flag can set.
constexpr std::pair<const char*, const char*> kFlagKeys[] = {
    {"method", "--method"},           {"trac_score", "--trac-score"},
    {"kappa", "--kappa"},             {"cbeta", "--cbeta"},
    {"folds", "--folds"},             {"basis_knots", "--knots"},
    {"raw_binned_residuals", "--raw-binned-residuals"},
    {"boot", "--boot"},               {"alpha", "--alpha"},
    {"stability_R", "--stability-R"}, {"frac", "--frac"},
    {"seed", "--seed"},               {"max_samples", "--max-samples"},
    {"threads", "--threads"},         {"timing", "--timing"},
    {"out", "--out"},                 {"input", "input"},
    {"x_col", "--x-col"},             {"y_col", "--y-col"},
    {"kind", "--kind"},               {"n", "--n"},
    {"params", "--params"},           {"reps", "--reps"},
    {"pairs", "--pairs"},             {"meta", "--meta"},
};

// Flags given explicitly on the command line override the config file.
tra::RunConfig merge(const tra::RunConfig& flags, const std::string& config_path, const CLI::App& cmd) {
    if (config_path.empty()) return flags;
    tra::RunConfig merged = tra::load_config_file(config_path);
    std::map<std::string, std::string> values;
    for (const auto& [key, value] : tra::to_key_values(flags)) values[key] = value;
    for (const auto& [key, option] : kFlagKeys) {
        const CLI::Option* o = cmd.get_option_no_throw(option);
        if (o != nullptr && o->count() > 0) tra::set_key(merged, key, values.at(key));
    }
    merged.inline_x = flags.inline_x;
    merged.inline_y = flags.inline_y;
    return merged;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bivariate causal direction from residual-cloud MST persistence"};
    app.require_subcommand(1);

    tra::RunConfig decide_cfg;
    std::string decide_config_path;
    CLI::App* decide = app.add_subcommand("decide", "orient one pair: XtoY, YtoX or Abstain");
    add_common(*decide, decide_cfg, decide_config_path);
    decide->add_option("input", decide_cfg.input, "whitespace-separated pair file");
    decide->add_option("--x-col", decide_cfg.x_col, "1-based column of X");
    decide->add_option("--y-col", decide_cfg.y_col, "1-based column of Y");
    decide->add_option("--x", decide_cfg.inline_x, "inline comma-separated X values");
    decide->add_option("--y", decide_cfg.inline_y, "inline comma-separated Y values");

    tra::RunConfig bench_cfg;
    std::string bench_config_path;
    CLI::App* bench = app.add_subcommand("bench", "run a synthetic sweep or a pair-directory benchmark");
    add_common(*bench, bench_cfg, bench_config_path);
    bench->add_option("--kind", bench_cfg.kind,
                      "cubic, near_linear, hetero_cubic, sine, confound_linear, confound_nonlinear");
    bench->add_option("--n", bench_cfg.n_list, "comma list of sample sizes");
    bench->add_option("--params", bench_cfg.params, "comma list of stress values, or 'default' for the full grid");
    bench->add_option("--reps", bench_cfg.reps, "replicates per (n, param)");
    bench->add_option("--pairs", bench_cfg.pairs_dir, "directory of pair files");
    bench->add_option("--meta", bench_cfg.meta, "pair metadata file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*decide) return tra::cmd_decide(merge(decide_cfg, decide_config_path, *decide), std::cout, std::cerr);
        return tra::cmd_bench(merge(bench_cfg, bench_config_path, *bench), std::cout, std::cerr);
    } catch (const tra::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return tra::exit_code_for(e);
    }
}
