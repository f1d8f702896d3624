// Acceptance suite: end-to-end checks of the qualitative claims the toolkit
// is built to reproduce, plus the numerical contracts that guard them. Each
// criterion prints one PASS/FAIL line; the exit code is the failure count.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "starfd/harness.hpp"
#include "starfd/neural.hpp"
#include "starfd/optim.hpp"

namespace fs = std::filesystem;
using namespace starfd;

namespace {

int g_failures = 0;

void report(int idx, bool pass, const std::string& what, const std::string& detail) {
    std::printf("[%s] C%d %s: %s\n", pass ? "PASS" : "FAIL", idx, what.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentPlan load_plan(const fs::path& path) {
    const ParseResult res = parse_config(read_file(path.string()));
    if (!res.ok()) {
        throw std::runtime_error("config " + path.string() + " failed to parse: " +
                                 res.errors.front().message);
    }
    return res.plan;
}

// median of one summary metric keyed by a column value
std::map<double, double> medians_by(const Summary& s, const std::string& x, int metric) {
    std::map<double, double> out;
    for (const auto& r : s.rows) {
        double key = 0;
        if (x == "M") key = static_cast<double>(r.m);
        else if (x == "d_sr") key = r.d_sr;
        out[key] = r.med[metric];
    }
    return out;
}

double elapsed_s(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) { return format_double(v); }

// ---- criteria -------------------------------------------------------------

void c1_sic_trend(const fs::path& cfg_dir) {
    const auto t0 = std::chrono::steady_clock::now();
    const ExperimentPlan plan = load_plan(cfg_dir / "sic_sweep.cfg");
    const RunOutput out = run_plan(plan, 1);
    const auto med = medians_by(summarize(out.csv), "M", 3);  // sic_gain_db

    bool increasing = med.size() == 4;
    double prev = -1e300;
    for (const auto& [m, v] : med) {
        increasing = increasing && v > prev;
        prev = v;
    }
    const double delta = med.at(64) - med.at(8);
    const double secs = elapsed_s(t0);
    const bool pass = increasing && delta >= 20.0 && secs < 300.0;
    std::string detail = "medians";
    for (const auto& [m, v] : med) detail += " M" + fmt(m) + "=" + fmt(v);
    detail += "; delta=" + fmt(delta) + " dB (need >= 20), " + fmt(secs) + " s";
    report(1, pass, "SIC gain grows with the element count", detail);
}

void c2_uplink_plateau(const fs::path& cfg_dir) {
    const ExperimentPlan plan = load_plan(cfg_dir / "plateau.cfg");
    const ScenarioSpec spec = apply_sweep_value(plan.base, plan.sweep, plan.values.front());
    std::vector<double> rates, bounds;
    for (int trial = 0; trial < plan.trials; ++trial) {
        // same row-seed derivation as run_plan (value 0, alternating tag 3)
        const std::uint64_t seed = Rng::derive(1, {0, static_cast<std::uint64_t>(trial), 3});
        Rng rng(seed);
        const ChannelSet ch = gen_channels(spec, rng);
        const OptResult res = alternating_optimize(spec, ch, plan.objective, plan.opts.optim);
        rates.push_back(res.metrics.rate_ul);
        bounds.push_back(std::log2(1.0 + spec.p_alice * fro_norm_sq(ch.h_a) / spec.noise_fd));
    }
    std::sort(rates.begin(), rates.end());
    std::sort(bounds.begin(), bounds.end());
    const double med_rate = quantile_sorted(rates, 0.5);
    const double med_bound = quantile_sorted(bounds, 0.5);
    const double gap = std::abs(med_rate - med_bound);
    // the absolute level is a link-budget calibration, not a measurement: the
    // default budget places the interference-free bound near 13.3 bps/Hz
    const bool near_13 = med_bound >= 12.5 && med_bound <= 14.0;
    const bool pass = gap <= 0.5 && near_13;
    report(2, pass, "uplink rate plateaus at the interference-free bound",
           "median rate_ul=" + fmt(med_rate) + ", bound=" + fmt(med_bound) +
               " (calibrated ~13.3), gap=" + fmt(gap) + " (need <= 0.5)");
}

void c3_es_beats_ms(const fs::path& cfg_dir) {
    const ExperimentPlan es = load_plan(cfg_dir / "rate_sweep_es.cfg");
    const ExperimentPlan ms = load_plan(cfg_dir / "rate_sweep_ms.cfg");
    // same master seed => identical channel draws per (value, trial)
    const auto med_es = medians_by(summarize(run_plan(es, 1).csv), "M", 0);
    const auto med_ms = medians_by(summarize(run_plan(ms, 1).csv), "M", 0);
    bool pass = med_es.size() == 4 && med_ms.size() == 4;
    std::string detail;
    for (const auto& [m, v] : med_es) {
        const double w = med_ms.at(m);
        pass = pass && v >= w;
        detail += "M" + fmt(m) + ": ES=" + fmt(v) + " MS=" + fmt(w) + "; ";
    }
    report(3, pass, "energy splitting outranks mode switching at every size", detail);
}

void c4_distance_effect(const fs::path& cfg_dir) {
    const ExperimentPlan plan = load_plan(cfg_dir / "distance.cfg");
    const Summary s = summarize(run_plan(plan, 1).csv);
    const auto rate = medians_by(s, "d_sr", 0);
    const auto sic = medians_by(s, "d_sr", 3);
    const bool pass = rate.size() == 2 && sic.size() == 2 && rate.at(0.1) > rate.at(0.5) &&
                      sic.at(0.1) > sic.at(0.5);
    report(4, pass, "a nearby surface outperforms a distant one",
           "rate_dl 0.1m=" + fmt(rate.at(0.1)) + " vs 0.5m=" + fmt(rate.at(0.5)) +
               "; sic_gain 0.1m=" + fmt(sic.at(0.1)) + " vs 0.5m=" + fmt(sic.at(0.5)));
}

void c5_oracle_equivalence(const fs::path& cfg_dir) {
    const auto t0 = std::chrono::steady_clock::now();
    const ExperimentPlan plan = load_plan(cfg_dir / "oracle_check.cfg");
    const ScenarioSpec family = apply_sweep_value(plan.base, plan.sweep, plan.values.front());
    const FeatureCodec codec = FeatureCodec::for_family(family);

    Rng ds_rng(Rng::derive(7, {0, 0xDA7A}));
    const Dataset ds = sample_dataset(family, plan.opts.dataset_size, ds_rng);
    auto [critic, crep] = train_critic(ds, codec, plan.opts.neural, Rng::derive(7, {0, 0xC817}));
    auto [gen, grep] = train_generator(critic, codec, family, plan.objective, plan.opts.neural,
                                       Rng::derive(7, {0, 0x6E4}));

    int alt_ok = 0, gen_ok = 0;
    const int n = plan.trials;
    for (int trial = 0; trial < n; ++trial) {
        const std::uint64_t seed = Rng::derive(11, {0, static_cast<std::uint64_t>(trial), 0xC});
        Rng rng(seed);
        const ChannelSet ch = gen_channels(family, rng);
        const OptResult oracle = enumerate_oracle(family, ch, plan.objective);
        const double po = primary_metric(oracle.metrics, plan.objective);

        const OptResult alt = alternating_optimize(family, ch, plan.objective, plan.opts.optim);
        if ((primary_metric(alt.metrics, plan.objective) - po) / std::max(std::abs(po), 1e-9) <=
            0.05) {
            ++alt_ok;
        }
        auto [cfg, link] = infer_config(gen, codec, ch, family);
        const Metrics m = evaluate(family, ch, cfg, link);
        if ((primary_metric(m, plan.objective) - po) / std::max(std::abs(po), 1e-9) <= 0.15) {
            ++gen_ok;
        }
    }
    const double secs = elapsed_s(t0);
    const bool pass = alt_ok >= 90 && gen_ok >= 70 && secs < 600.0;
    report(5, pass, "both optimizers track the enumeration oracle",
           "alternating within 5%: " + std::to_string(alt_ok) +
               "/100 (need >= 90); neural within 15%: " + std::to_string(gen_ok) +
               "/100 (need >= 70); " + fmt(secs) + " s incl. training");
}

void c6_constructed_null() {
    ScenarioSpec spec;
    spec.n_elems = 16;
    spec.phase_levels = 0;
    spec.residual_floor = 0.0;
    Rng rng(31);
    const NullScenario ns = gen_si_null_channels(spec, rng);
    const OptResult res = alternating_optimize(spec, ns.ch, Objective::min_si(1.0));
    const bool pass = res.metrics.sic_gain_db >= 60.0;
    report(6, pass, "analytically cancellable scenario is driven to a deep null",
           "sic_gain_db=" + fmt(res.metrics.sic_gain_db) + " (need >= 60)");
}

void c7_gradient_suite() {
    Rng rng(1234);
    std::size_t bad = 0, checked = 0;
    for (int net_idx = 0; net_idx < 20; ++net_idx) {
        const Activation act = net_idx % 2 ? Activation::relu : Activation::tanh_sat;
        const std::size_t h1 = 3 + net_idx % 4;
        const std::size_t h2 = 2 + net_idx % 3;
        Mlp net = make_mlp({4, h1, h2, 2}, act, rng);

        std::vector<double> x(4), up(2);
        // keep rectifier pre-activations clear of the kink
        for (int attempt = 0; attempt < 100; ++attempt) {
            for (auto& v : x) v = rng.next_unit() * 2.0 - 1.0;
            bool safe = true;
            std::vector<double> cur = x;
            for (std::size_t l = 0; l + 1 < net.dims.size(); ++l) {
                std::vector<double> nxt(net.dims[l + 1]);
                for (std::size_t o = 0; o < nxt.size(); ++o) {
                    double acc = net.biases[l][o];
                    for (std::size_t i = 0; i < cur.size(); ++i)
                        acc += net.weights[l][o * cur.size() + i] * cur[i];
                    if (l + 2 < net.dims.size() && std::abs(acc) < 1e-3) safe = false;
                    nxt[o] = l + 2 < net.dims.size()
                                 ? (act == Activation::relu ? std::max(acc, 0.0) : std::tanh(acc))
                                 : acc;
                }
                cur = std::move(nxt);
            }
            if (safe) break;
        }
        for (auto& v : up) v = rng.next_unit() * 2.0 - 1.0;

        const MlpGrads g = mlp_grad(net, x, up);
        auto scalar = [&]() {
            const auto out = mlp_forward(net, x);
            return up[0] * out[0] + up[1] * out[1];
        };
        const double h = 1e-4;
        auto probe = [&](double& p, double ana) {
            const double save = p;
            p = save + h;
            const double fp = scalar();
            p = save - h;
            const double fm = scalar();
            p = save;
            const double num = (fp - fm) / (2.0 * h);
            ++checked;
            if (std::abs(num - ana) > 1e-5 * std::max({std::abs(num), std::abs(ana), 1e-4})) ++bad;
        };
        for (std::size_t l = 0; l < net.n_layers(); ++l) {
            for (std::size_t i = 0; i < net.weights[l].size(); ++i)
                probe(net.weights[l][i], g.weights[l][i]);
            for (std::size_t i = 0; i < net.biases[l].size(); ++i)
                probe(net.biases[l][i], g.biases[l][i]);
        }
    }
    report(7, bad == 0, "reverse-mode gradients match central finite differences",
           std::to_string(checked) + " coordinates over 20 networks, " + std::to_string(bad) +
               " mismatches (tol 1e-5)");
}

void c8_feasibility_fuzz() {
    std::size_t violations = 0;
    Rng rng(777);
    const unsigned level_choices[4] = {0, 2, 4, 8};

    // 1000 random projections
    for (int t = 0; t < 1000; ++t) {
        const StarMode mode = rng.next_u64() % 2 ? StarMode::es : StarMode::ms;
        const unsigned levels = level_choices[rng.next_u64() % 4];
        const std::size_t m = 1 + rng.next_u64() % 8;
        std::vector<double> s(m), tr(m), tt(m);
        for (auto& v : s) v = rng.next_unit() * 20.0 - 10.0;
        for (auto& v : tr) v = rng.next_unit() * 50.0 - 25.0;
        for (auto& v : tt) v = rng.next_unit() * 50.0 - 25.0;
        const StarConfig cfg = project(s, tr, tt, mode, levels);
        if (!check_invariants(cfg).empty()) ++violations;
    }

    // 1000 randomly-initialized generator outputs through hard projection
    for (int t = 0; t < 1000; ++t) {
        ScenarioSpec spec;
        spec.n_tx = 2;
        spec.n_rx = 2;
        spec.n_elems = 1 + rng.next_u64() % 6;
        spec.mode = rng.next_u64() % 2 ? StarMode::es : StarMode::ms;
        spec.phase_levels = level_choices[rng.next_u64() % 4];
        const FeatureCodec codec = FeatureCodec::for_family(spec);
        Rng net_rng(rng.next_u64());
        const Mlp gen =
            make_mlp({codec.env_dim(), 12, codec.cfg_dim()}, Activation::tanh_sat, net_rng);
        Rng ch_rng(rng.next_u64());
        const ChannelSet ch = gen_channels(spec, ch_rng);
        const auto [cfg, link] = infer_config(gen, codec, ch, spec);
        if (!check_invariants(cfg).empty()) ++violations;
        if (std::abs(fro_norm_sq(link.w) - spec.p_fd) > 1e-9 * spec.p_fd) ++violations;
        if (std::abs(fro_norm_sq(link.v) - 1.0) > 1e-9) ++violations;
    }
    report(8, violations == 0, "projection and inference never emit infeasible configs",
           "2000 fuzz cases, " + std::to_string(violations) + " violations");
}

void c9_determinism(const fs::path& cfg_dir, const std::string& cli, const std::string& golden_path,
                    const fs::path& workdir) {
    const ExperimentPlan plan = load_plan(cfg_dir / "default.cfg");
    const RunOutput a = run_plan(plan, 42);
    const RunOutput b = run_plan(plan, 42);
    const bool in_process = a.csv == b.csv;

    bool cli_identical = true;
    bool golden_ok = true;
    std::string detail;
    if (!cli.empty()) {
        fs::create_directories(workdir / "r1");
        fs::create_directories(workdir / "r2");
        const std::string cfg = (cfg_dir / "default.cfg").string();
        const std::string cmd1 =
            cli + " run " + cfg + " --seed 42 --out " + (workdir / "r1").string() + " > /dev/null";
        const std::string cmd2 =
            cli + " run " + cfg + " --seed 42 --out " + (workdir / "r2").string() + " > /dev/null";
        cli_identical = std::system(cmd1.c_str()) == 0 && std::system(cmd2.c_str()) == 0;
        if (cli_identical) {
            const std::string r1 = read_file((workdir / "r1" / "default.csv").string());
            const std::string r2 = read_file((workdir / "r2" / "default.csv").string());
            cli_identical = r1 == r2 && r1 == a.csv;
        }
    }
    if (!golden_path.empty()) {
        const std::string golden = read_file(golden_path);
        golden_ok = golden == a.csv;
    }
    const bool pass = in_process && cli_identical && golden_ok;
    detail += std::string("in-process re-run ") + (in_process ? "identical" : "DIFFERS") +
              ", CLI re-run " + (cli_identical ? "identical" : "DIFFERS") + ", golden snapshot " +
              (golden_ok ? "matches" : "DIFFERS");
    report(9, pass, "identical seeds give byte-identical CSVs", detail);
}

}  // namespace

int main(int argc, char** argv) {
    std::string cli, golden;
    fs::path cfg_dir = "configs";
    fs::path workdir = "acceptance_work";
    for (int i = 1; i + 1 < argc; i += 2) {
        const std::string flag = argv[i];
        if (flag == "--cli") cli = argv[i + 1];
        else if (flag == "--golden") golden = argv[i + 1];
        else if (flag == "--config-dir") cfg_dir = argv[i + 1];
        else if (flag == "--workdir") workdir = argv[i + 1];
    }

    try {
        c1_sic_trend(cfg_dir);
        c2_uplink_plateau(cfg_dir);
        c3_es_beats_ms(cfg_dir);
        c4_distance_effect(cfg_dir);
        c5_oracle_equivalence(cfg_dir);
        c6_constructed_null();
        c7_gradient_suite();
        c8_feasibility_fuzz();
        c9_determinism(cfg_dir, cli, golden, workdir);
    } catch (const std::exception& e) {
        std::printf("[FAIL] suite aborted: %s\n", e.what());
        return 99;
    }
    std::printf("%d of 9 criteria passed\n", 9 - g_failures);
    return g_failures;
}
