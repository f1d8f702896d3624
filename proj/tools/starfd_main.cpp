#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "starfd/harness.hpp"
#include "starfd/neural.hpp"
#include "starfd/optim.hpp"

namespace fs = std::filesystem;
using namespace starfd;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBadConfig = 1;
constexpr int kExitRuntime = 2;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed for " + path);
}

ExperimentPlan load_plan_or_exit(const std::string& path, int& exit_code) {
    const ParseResult res = parse_config(read_file(path));
    if (!res.ok()) {
        for (const auto& e : res.errors) {
            std::cerr << path << ':' << e.line << ": error: " << e.message << '\n';
        }
        exit_code = kExitBadConfig;
    }
    return res.plan;
}

int cmd_validate(const std::string& cfg_path) {
    int rc = kExitOk;
    const ExperimentPlan plan = load_plan_or_exit(cfg_path, rc);
    if (rc != kExitOk) return rc;
    std::cout << "ok: plan '" << plan.name << "', sweep " << to_string(plan.sweep) << " over "
              << plan.values.size() << " values, " << plan.trials << " trials, "
              << plan.methods.size() << " method(s)\n";
    return kExitOk;
}

int cmd_run(const std::string& cfg_path, std::uint64_t seed, const std::string& out_dir, int jobs,
            bool timing) {
    int rc = kExitOk;
    const ExperimentPlan plan = load_plan_or_exit(cfg_path, rc);
    if (rc != kExitOk) return rc;

    fs::create_directories(out_dir);
    RunOptions ropts;
    ropts.jobs = jobs;
    ropts.real_timing = timing;
    const RunOutput out = run_plan(plan, seed, ropts);

    const fs::path csv_path = fs::path(out_dir) / plan.out_path;
    write_file(csv_path.string(), out.csv);
    const fs::path cfg_csv = fs::path(out_dir) / (plan.name + "_configs.csv");
    write_file(cfg_csv.string(), out.configs_csv);

    std::cout << summary_to_table(summarize(out.csv));
    std::cout << "wrote " << csv_path.string() << " and " << cfg_csv.string() << '\n';
    return kExitOk;
}

int cmd_summarize(const std::string& csv_path, const std::string& out_path) {
    const Summary s = summarize(read_file(csv_path));
    std::cout << summary_to_table(s);
    if (!out_path.empty()) {
        write_file(out_path, summary_to_csv(s));
        std::cout << "wrote " << out_path << '\n';
    }
    return kExitOk;
}

int cmd_plot(const std::string& summary_path, const std::string& x, const std::string& y,
             const std::string& out_path) {
    const Summary s = summary_from_csv(read_file(summary_path));
    write_file(out_path, plot_svg(s, x, y));
    std::cout << "wrote " << out_path << '\n';
    return kExitOk;
}

int cmd_train(const std::string& cfg_path, std::uint64_t seed, const std::string& out_path) {
    int rc = kExitOk;
    const ExperimentPlan plan = load_plan_or_exit(cfg_path, rc);
    if (rc != kExitOk) return rc;

    // the family is the base scenario at the first sweep value
    const ScenarioSpec family = apply_sweep_value(plan.base, plan.sweep, plan.values.front());
    const FeatureCodec codec = FeatureCodec::for_family(family);

    Rng ds_rng(Rng::derive(seed, {0, 0xDA7A}));
    std::cout << "sampling " << plan.opts.dataset_size << " labeled configurations...\n";
    const Dataset ds = sample_dataset(family, plan.opts.dataset_size, ds_rng);
    std::cout << "training critic...\n";
    auto [critic, crep] = train_critic(ds, codec, plan.opts.neural, Rng::derive(seed, {0, 0xC817}));
    std::printf("  critic: %zu epochs, train loss %.4g -> %.4g, val loss %.4g\n",
                crep.epoch_losses.size(), crep.epoch_losses.front(), crep.epoch_losses.back(),
                crep.final_val_loss);
    std::cout << "training generator...\n";
    auto [gen, grep] = train_generator(critic, codec, family, plan.objective, plan.opts.neural,
                                       Rng::derive(seed, {0, 0x6E4}));
    std::printf("  generator: %zu epochs, surrogate objective %.4g -> %.4g\n",
                grep.epoch_losses.size(), grep.epoch_losses.front(), grep.epoch_losses.back());

    const ModelBundle bundle{codec, std::move(critic), std::move(gen), plan.objective};
    save_model(bundle, out_path);
    std::cout << "wrote " << out_path << '\n';
    return kExitOk;
}

int cmd_eval(const std::string& cfg_path, const std::string& model_path, std::uint64_t seed,
             const std::string& out_dir, int jobs) {
    int rc = kExitOk;
    ExperimentPlan plan = load_plan_or_exit(cfg_path, rc);
    if (rc != kExitOk) return rc;

    const ModelBundle bundle = load_model(model_path);
    plan.methods = {Method::neural};

    fs::create_directories(out_dir);
    RunOptions ropts;
    ropts.jobs = jobs;
    ropts.pretrained = &bundle;
    const RunOutput out = run_plan(plan, seed, ropts);
    const fs::path csv_path = fs::path(out_dir) / (plan.name + "_eval.csv");
    write_file(csv_path.string(), out.csv);
    std::cout << summary_to_table(summarize(out.csv));
    std::cout << "wrote " << csv_path.string() << '\n';
    return kExitOk;
}

int cmd_oracle_check(const std::string& cfg_path, std::uint64_t seed,
                     const std::string& model_path) {
    int rc = kExitOk;
    const ExperimentPlan plan = load_plan_or_exit(cfg_path, rc);
    if (rc != kExitOk) return rc;

    std::optional<ModelBundle> bundle;
    if (!model_path.empty()) bundle = load_model(model_path);

    std::size_t n = 0, alt_ok = 0, neural_ok = 0;
    for (std::size_t vi = 0; vi < plan.values.size(); ++vi) {
        const ScenarioSpec spec = apply_sweep_value(plan.base, plan.sweep, plan.values[vi]);
        for (int trial = 0; trial < plan.trials; ++trial) {
            const std::uint64_t row_seed =
                Rng::derive(seed, {vi, static_cast<std::uint64_t>(trial), 0xC});
            Rng rng(row_seed);
            const ChannelSet ch = gen_channels(spec, rng);
            const OptResult oracle = enumerate_oracle(spec, ch, plan.objective);
            const OptResult alt = alternating_optimize(spec, ch, plan.objective, plan.opts.optim);
            const double po = primary_metric(oracle.metrics, plan.objective);
            const double pa = primary_metric(alt.metrics, plan.objective);
            const double gap_alt = (pa - po) / std::max(std::abs(po), 1e-9);
            const bool a_ok = gap_alt <= 0.05;
            alt_ok += a_ok;
            ++n;

            double gap_gen = 0.0;
            bool g_ok = false;
            if (bundle) {
                auto [cfg, link] = infer_config(bundle->generator, bundle->codec, ch, spec);
                const Metrics m = evaluate(spec, ch, cfg, link);
                const double pg = primary_metric(m, plan.objective);
                gap_gen = (pg - po) / std::max(std::abs(po), 1e-9);
                g_ok = gap_gen <= 0.15;
                neural_ok += g_ok;
            }
            std::printf("value=%s trial=%d oracle=%.5f alt_gap=%.2f%%%s", plan.values[vi].c_str(),
                        trial, po, 100.0 * gap_alt, a_ok ? "" : " (miss)");
            if (bundle) std::printf(" neural_gap=%.2f%%%s", 100.0 * gap_gen, g_ok ? "" : " (miss)");
            std::printf("\n");
        }
    }
    std::printf("alternating within 5%%: %zu/%zu\n", alt_ok, n);
    if (bundle) std::printf("neural within 15%%: %zu/%zu\n", neural_ok, n);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"STAR-RIS assisted full-duplex link simulator and optimizer"};
    app.require_subcommand(1);

    std::string cfg_path, csv_path, out_path, model_path;
    std::string out_dir = ".";
    std::string x_col = "M";
    std::string y_col = "sic_gain_db";
    std::uint64_t seed = 1;
    int jobs = 1;
    bool timing = false;

    auto* validate = app.add_subcommand("validate", "Parse and validate an experiment config");
    validate->add_option("config", cfg_path, "experiment config file")->required();

    auto* run = app.add_subcommand("run", "Run an experiment plan and write result CSVs");
    run->add_option("config", cfg_path)->required();
    run->add_option("--seed", seed, "master seed");
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--jobs", jobs, "worker threads");
    run->add_flag("--timing", timing, "record measured wall_ms (breaks byte-reproducibility)");

    auto* summ = app.add_subcommand("summarize", "Aggregate a result CSV into medians/IQRs");
    summ->add_option("csv", csv_path)->required();
    summ->add_option("--out", out_path, "write the machine-readable summary CSV here");

    auto* plot = app.add_subcommand("plot", "Render a summary CSV as an SVG line chart");
    plot->add_option("summary", csv_path)->required();
    plot->add_option("--x", x_col, "x axis: M, L or d_sr");
    plot->add_option("--y", y_col, "metric: rate_dl, rate_ul, resid_si_db, sic_gain_db");
    plot->add_option("--out", out_path, "output SVG path");

    auto* train = app.add_subcommand("train", "Train a critic/generator pair for a plan's family");
    train->add_option("config", cfg_path)->required();
    train->add_option("--out", out_path, "model output path")->required();
    train->add_option("--seed", seed, "training seed");

    auto* eval = app.add_subcommand("eval", "Evaluate a trained model over a plan");
    eval->add_option("config", cfg_path)->required();
    eval->add_option("--model", model_path, "trained model path")->required();
    eval->add_option("--seed", seed, "master seed");
    eval->add_option("--out", out_dir, "output directory");
    eval->add_option("--jobs", jobs, "worker threads");

    auto* ocheck =
        app.add_subcommand("oracle-check", "Compare methods against exhaustive enumeration");
    ocheck->add_option("config", cfg_path)->required();
    ocheck->add_option("--seed", seed, "master seed");
    ocheck->add_option("--model", model_path, "optional trained model to score too");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitBadConfig;
    }

    try {
        if (app.got_subcommand(validate)) return cmd_validate(cfg_path);
        if (app.got_subcommand(run)) return cmd_run(cfg_path, seed, out_dir, jobs, timing);
        if (app.got_subcommand(summ)) return cmd_summarize(csv_path, out_path);
        if (app.got_subcommand(plot)) {
            if (out_path.empty()) out_path = "plot.svg";
            return cmd_plot(csv_path, x_col, y_col, out_path);
        }
        if (app.got_subcommand(train)) return cmd_train(cfg_path, seed, out_path);
        if (app.got_subcommand(eval)) return cmd_eval(cfg_path, model_path, seed, out_dir, jobs);
        if (app.got_subcommand(ocheck)) return cmd_oracle_check(cfg_path, seed, model_path);
    } catch (const config_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitBadConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitOk;
}
