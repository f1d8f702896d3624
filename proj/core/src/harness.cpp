#include "starfd/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <map>
#include <sstream>
#include <thread>

namespace starfd {

const char* to_string(SweepVar v) {
    switch (v) {
        case SweepVar::elements: return "elements";
        case SweepVar::distance: return "distance";
        case SweepVar::mode: return "mode";
        case SweepVar::phase_levels: return "phase_levels";
    }
    return "?";
}

const char* to_string(Method m) {
    switch (m) {
        case Method::oracle: return "oracle";
        case Method::random: return "random";
        case Method::alternating: return "alternating";
        case Method::neural: return "neural";
    }
    return "?";
}

SweepVar sweep_var_from_string(const std::string& s) {
    if (s == "elements") return SweepVar::elements;
    if (s == "distance") return SweepVar::distance;
    if (s == "mode") return SweepVar::mode;
    if (s == "phase_levels") return SweepVar::phase_levels;
    throw config_error("unknown sweep variable '" + s + "'");
}

Method method_from_string(const std::string& s) {
    if (s == "oracle") return Method::oracle;
    if (s == "random") return Method::random;
    if (s == "alternating") return Method::alternating;
    if (s == "neural") return Method::neural;
    throw config_error("unknown method '" + s + "'");
}

namespace {

std::vector<std::string> split_tokens(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ' ' || c == '\t' || c == ',') {
            if (!cur.empty()) out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

double parse_num(const std::string& s) {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw config_error("trailing characters in number '" + s + "'");
    return v;
}

std::uint64_t parse_u64(const std::string& s) {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(s, &pos);
    if (pos != s.size()) throw config_error("trailing characters in integer '" + s + "'");
    return v;
}

bool parse_bool(const std::string& s) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw config_error("expected boolean, got '" + s + "'");
}

std::vector<std::string> default_sweep_values(SweepVar v) {
    switch (v) {
        case SweepVar::elements: return {"8", "16", "32", "64"};
        case SweepVar::distance: return {"0.1", "0.5"};
        case SweepVar::mode: return {"ES", "MS"};
        case SweepVar::phase_levels: return {"0", "4", "8"};
    }
    return {};
}

}  // namespace

ScenarioSpec apply_sweep_value(const ScenarioSpec& base, SweepVar var, const std::string& token) {
    ScenarioSpec spec = base;
    switch (var) {
        case SweepVar::elements: {
            const std::uint64_t m = parse_u64(token);
            if (m < 1) throw config_error("elements must be >= 1");
            spec.n_elems = static_cast<std::size_t>(m);
            break;
        }
        case SweepVar::distance:
            spec.d_sr = parse_num(token);
            break;
        case SweepVar::mode:
            spec.mode = star_mode_from_string(token);
            break;
        case SweepVar::phase_levels:
            spec.phase_levels = static_cast<unsigned>(parse_u64(token));
            break;
    }
    const GeometryReport rep = validate_geometry(spec);
    if (!rep.ok()) throw config_error(rep.errors.front());
    return spec;
}

ParseResult parse_config(std::string_view text) {
    ParseResult res;
    ExperimentPlan& plan = res.plan;
    bool values_given = false;

    std::string section;
    int line_no = 0;
    int values_line = 0;
    std::map<std::string, int> key_lines;

    std::istringstream is{std::string(text)};
    std::string raw;
    while (std::getline(is, raw)) {
        ++line_no;
        std::string line = raw;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\t' || line.back() == '\r'))
            line.pop_back();
        std::size_t start = line.find_first_not_of(" \t");
        if (start == std::string::npos) continue;
        line.erase(0, start);

        if (line.front() == '[') {
            if (line.back() != ']') {
                res.errors.push_back({line_no, "unterminated section header"});
                continue;
            }
            section = line.substr(1, line.size() - 2);
            if (section != "plan" && section != "scenario" && section != "optim" &&
                section != "neural") {
                res.errors.push_back({line_no, "unknown section [" + section + "]"});
            }
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            res.errors.push_back({line_no, "expected key = value"});
            continue;
        }
        std::string key = line.substr(0, eq);
        std::string val = line.substr(eq + 1);
        auto trim = [](std::string& s) {
            const auto b = s.find_first_not_of(" \t");
            const auto e = s.find_last_not_of(" \t");
            s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        trim(key);
        trim(val);
        if (key.empty() || val.empty()) {
            res.errors.push_back({line_no, "expected key = value"});
            continue;
        }
        key_lines[section + "." + key] = line_no;

        try {
            if (section == "plan") {
                if (key == "name") plan.name = val;
                else if (key == "sweep") plan.sweep = sweep_var_from_string(val);
                else if (key == "values") { plan.values = split_tokens(val); values_given = true; values_line = line_no; }
                else if (key == "trials") plan.trials = static_cast<int>(parse_u64(val));
                else if (key == "methods") {
                    plan.methods.clear();
                    for (const auto& t : split_tokens(val)) plan.methods.push_back(method_from_string(t));
                } else if (key == "objective") {
                    const Objective prev = plan.objective;
                    plan.objective = objective_from_string(val);
                    // keep explicitly-set bounds when only the kind is given
                    if (val == "max_rate_si") plan.objective.epsilon_db = prev.epsilon_db;
                    if (val == "min_si") plan.objective.r_min = prev.r_min;
                } else if (key == "eps_db") plan.objective.epsilon_db = parse_num(val);
                else if (key == "r_min") plan.objective.r_min = parse_num(val);
                else if (key == "out") plan.out_path = val;
                else throw config_error("unknown key '" + key + "' in [plan]");
            } else if (section == "scenario") {
                ScenarioSpec& sc = plan.base;
                if (key == "n_tx") sc.n_tx = static_cast<std::size_t>(parse_u64(val));
                else if (key == "n_rx") sc.n_rx = static_cast<std::size_t>(parse_u64(val));
                else if (key == "elements") sc.n_elems = static_cast<std::size_t>(parse_u64(val));
                else if (key == "d_sr") sc.d_sr = parse_num(val);
                else if (key == "d_fb") sc.d_fb = parse_num(val);
                else if (key == "d_af") sc.d_af = parse_num(val);
                else if (key == "p_fd") sc.p_fd = parse_num(val);
                else if (key == "p_alice") sc.p_alice = parse_num(val);
                else if (key == "noise_fd") sc.noise_fd = parse_num(val);
                else if (key == "noise_bob") sc.noise_bob = parse_num(val);
                else if (key == "rician_k") sc.rician_k = parse_num(val);
                else if (key == "pl0_db") sc.pl0_db = parse_num(val);
                else if (key == "alpha_ris") sc.alpha_ris = parse_num(val);
                else if (key == "alpha_nlos") sc.alpha_nlos = parse_num(val);
                else if (key == "phase_levels") sc.phase_levels = static_cast<unsigned>(parse_u64(val));
                else if (key == "mode") sc.mode = star_mode_from_string(val);
                else if (key == "direct_fb_blocked") sc.direct_fb_blocked = parse_bool(val);
                else if (key == "residual_floor") sc.residual_floor = parse_num(val);
                else if (key == "seed") sc.seed = parse_u64(val);
                else throw config_error("unknown key '" + key + "' in [scenario]");
            } else if (section == "optim") {
                OptimOptions& o = plan.opts.optim;
                if (key == "max_outer") o.max_outer = static_cast<int>(parse_u64(val));
                else if (key == "tol") o.tol = parse_num(val);
                else if (key == "sweeps") o.sweeps = static_cast<int>(parse_u64(val));
                else if (key == "grid") o.grid = static_cast<int>(parse_u64(val));
                else if (key == "random_budget") plan.opts.random_budget = parse_u64(val);
                else throw config_error("unknown key '" + key + "' in [optim]");
            } else if (section == "neural") {
                TrainHyper& h = plan.opts.neural;
                if (key == "hidden") {
                    h.hidden.clear();
                    for (const auto& t : split_tokens(val))
                        h.hidden.push_back(static_cast<std::size_t>(parse_u64(t)));
                } else if (key == "epochs") h.epochs = static_cast<std::size_t>(parse_u64(val));
                else if (key == "gen_epochs") h.gen_epochs = static_cast<std::size_t>(parse_u64(val));
                else if (key == "lr") h.lr = parse_num(val);
                else if (key == "batch") h.batch = static_cast<std::size_t>(parse_u64(val));
                else if (key == "lambda") h.lambda = parse_num(val);
                else if (key == "n_envs") h.n_envs = static_cast<std::size_t>(parse_u64(val));
                else if (key == "dataset") plan.opts.dataset_size = static_cast<std::size_t>(parse_u64(val));
                else throw config_error("unknown key '" + key + "' in [neural]");
            } else {
                throw config_error("key outside a known section");
            }
        } catch (const std::exception& e) {
            res.errors.push_back({line_no, e.what()});
        }
    }

    if (plan.name.empty()) res.errors.push_back({0, "plan name is required"});
    if (!values_given) plan.values = default_sweep_values(plan.sweep);
    if (plan.out_path.empty()) plan.out_path = plan.name + ".csv";

    // scenario-level invariants, attributed to the key's line when known
    const GeometryReport rep = validate_geometry(plan.base);
    for (const auto& err : rep.errors) {
        int at = 0;
        for (const auto& [k, ln] : key_lines) {
            const auto dot = k.find('.');
            if (dot != std::string::npos && err.find(k.substr(dot + 1)) != std::string::npos) at = ln;
        }
        // phase-level errors carry a friendlier anchor
        if (err.find("phase levels") != std::string::npos) {
            if (auto it = key_lines.find("scenario.phase_levels"); it != key_lines.end()) at = it->second;
        }
        res.errors.push_back({at, err});
    }
    for (const auto& err : validate_plan(plan)) {
        int at = 0;
        if (err.find("sweep value") != std::string::npos && values_line > 0) at = values_line;
        res.errors.push_back({at, err});
    }
    return res;
}

std::vector<std::string> validate_plan(const ExperimentPlan& plan) {
    std::vector<std::string> errs;
    if (plan.trials < 1) errs.push_back("trials must be >= 1");
    if (plan.values.empty()) errs.push_back("sweep values must be non-empty");
    if (plan.methods.empty()) errs.push_back("at least one method is required");
    bool base_ok = validate_geometry(plan.base).ok();
    for (const auto& v : plan.values) {
        if (!base_ok) break;
        try {
            const ScenarioSpec spec = apply_sweep_value(plan.base, plan.sweep, v);
            const bool has_oracle =
                std::find(plan.methods.begin(), plan.methods.end(), Method::oracle) != plan.methods.end();
            if (has_oracle) {
                const bool sized = spec.mode == StarMode::ms &&
                                   (spec.phase_levels == 2 || spec.phase_levels == 4) &&
                                   spec.n_elems <= 4 && spec.n_tx <= 2;
                if (!sized) {
                    errs.push_back("oracle requested on a non-enumerable instance (sweep value " + v +
                                   "): needs MS, L in {2,4}, elements <= 4, n_tx <= 2");
                }
            }
        } catch (const std::exception& e) {
            errs.push_back("bad sweep value '" + v + "': " + e.what());
        }
    }
    return errs;
}

std::string emit_config(const ExperimentPlan& plan) {
    std::ostringstream os;
    os << "[plan]\n";
    os << "name = " << plan.name << '\n';
    os << "sweep = " << to_string(plan.sweep) << '\n';
    os << "values =";
    for (const auto& v : plan.values) os << ' ' << v;
    os << '\n';
    os << "trials = " << plan.trials << '\n';
    os << "methods =";
    for (const auto& m : plan.methods) os << ' ' << to_string(m);
    os << '\n';
    os << "objective = " << (plan.objective.kind == ObjectiveKind::max_rate_st_si ? "max_rate_si"
                                                                                  : "min_si")
       << '\n';
    os << "eps_db = " << format_double(plan.objective.epsilon_db) << '\n';
    os << "r_min = " << format_double(plan.objective.r_min) << '\n';
    os << "out = " << plan.out_path << '\n';
    os << '\n';
    const ScenarioSpec& sc = plan.base;
    os << "[scenario]\n";
    os << "n_tx = " << sc.n_tx << '\n';
    os << "n_rx = " << sc.n_rx << '\n';
    os << "elements = " << sc.n_elems << '\n';
    os << "d_sr = " << format_double(sc.d_sr) << '\n';
    os << "d_fb = " << format_double(sc.d_fb) << '\n';
    os << "d_af = " << format_double(sc.d_af) << '\n';
    os << "p_fd = " << format_double(sc.p_fd) << '\n';
    os << "p_alice = " << format_double(sc.p_alice) << '\n';
    os << "noise_fd = " << format_double(sc.noise_fd) << '\n';
    os << "noise_bob = " << format_double(sc.noise_bob) << '\n';
    os << "rician_k = " << format_double(sc.rician_k) << '\n';
    os << "pl0_db = " << format_double(sc.pl0_db) << '\n';
    os << "alpha_ris = " << format_double(sc.alpha_ris) << '\n';
    os << "alpha_nlos = " << format_double(sc.alpha_nlos) << '\n';
    os << "phase_levels = " << sc.phase_levels << '\n';
    os << "mode = " << to_string(sc.mode) << '\n';
    os << "direct_fb_blocked = " << (sc.direct_fb_blocked ? "true" : "false") << '\n';
    os << "residual_floor = " << format_double(sc.residual_floor) << '\n';
    os << "seed = " << sc.seed << '\n';
    os << '\n';
    os << "[optim]\n";
    os << "max_outer = " << plan.opts.optim.max_outer << '\n';
    os << "tol = " << format_double(plan.opts.optim.tol) << '\n';
    os << "sweeps = " << plan.opts.optim.sweeps << '\n';
    os << "grid = " << plan.opts.optim.grid << '\n';
    os << "random_budget = " << plan.opts.random_budget << '\n';
    os << '\n';
    os << "[neural]\n";
    os << "hidden =";
    for (auto h : plan.opts.neural.hidden) os << ' ' << h;
    os << '\n';
    os << "epochs = " << plan.opts.neural.epochs << '\n';
    os << "gen_epochs = " << plan.opts.neural.gen_epochs << '\n';
    os << "lr = " << format_double(plan.opts.neural.lr) << '\n';
    os << "batch = " << plan.opts.neural.batch << '\n';
    os << "lambda = " << format_double(plan.opts.neural.lambda) << '\n';
    os << "n_envs = " << plan.opts.neural.n_envs << '\n';
    os << "dataset = " << plan.opts.dataset_size << '\n';
    return os.str();
}

namespace {

constexpr std::uint64_t method_tag(Method m) {
    switch (m) {
        case Method::oracle: return 1;
        case Method::random: return 2;
        case Method::alternating: return 3;
        case Method::neural: return 4;
    }
    return 0;
}

std::string sanitize_error(std::string s) {
    for (char& c : s) {
        if (c == ',') c = ';';
        if (c == '\n' || c == '\r') c = ' ';
    }
    return s;
}

struct RowResult {
    std::string csv;
    std::string cfg;
};

struct TrainedModel {
    std::optional<ModelBundle> bundle;
    std::string error;
};

RowResult compute_row(const ExperimentPlan& plan, const ScenarioSpec& spec, Method method,
                      std::uint64_t seed, const TrainedModel* model, bool real_timing) {
    std::string error;
    OptResult res;
    bool have = false;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        Rng ch_rng(seed);
        const ChannelSet ch = gen_channels(spec, ch_rng);
        switch (method) {
            case Method::oracle:
                res = enumerate_oracle(spec, ch, plan.objective);
                have = true;
                break;
            case Method::random: {
                Rng sr(Rng::derive(seed, {0xA}));
                res = random_search(spec, ch, plan.objective, plan.opts.random_budget, sr);
                have = true;
                break;
            }
            case Method::alternating:
                res = alternating_optimize(spec, ch, plan.objective, plan.opts.optim);
                have = true;
                break;
            case Method::neural: {
                if (!model || !model->bundle) {
                    throw config_error(model && !model->error.empty() ? model->error
                                                                      : "no trained model");
                }
                const ModelBundle& mb = *model->bundle;
                auto [cfg, link] = infer_config(mb.generator, mb.codec, ch, spec);
                res.metrics = evaluate(spec, ch, cfg, link);
                res.cfg = std::move(cfg);
                res.link = std::move(link);
                res.feasible = objective_feasible(res.metrics, plan.objective);
                res.iters = 1;
                have = true;
                break;
            }
        }
    } catch (const std::exception& e) {
        error = sanitize_error(e.what());
    }
    const double wall =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

    std::ostringstream os;
    os << seed << ',' << to_string(method) << ',' << to_string(spec.mode) << ',' << spec.n_elems
       << ',' << spec.phase_levels << ',' << format_double(spec.d_sr) << ','
       << to_string(plan.objective) << ',';
    if (have) {
        const Metrics& m = res.metrics;
        os << (res.feasible ? '1' : '0') << ',' << format_double(m.rate_dl) << ','
           << format_double(m.rate_ul) << ',' << format_double(m.resid_si_db) << ','
           << format_double(m.sic_gain_db) << ',' << res.iters << ','
           << (real_timing ? format_double(wall) : "0") << ',';
    } else {
        os << "0,0,0,0,0,0," << (real_timing ? format_double(wall) : "0") << ',';
    }
    os << error;

    RowResult out;
    out.csv = os.str();
    if (have) out.cfg = star_config_to_csv(res.cfg);
    return out;
}

}  // namespace

RunOutput run_plan(const ExperimentPlan& plan, std::uint64_t master_seed, const RunOptions& ropts) {
    {
        const auto errs = validate_plan(plan);
        if (!errs.empty()) throw config_error("invalid plan: " + errs.front());
        const auto rep = validate_geometry(plan.base);
        if (!rep.ok()) throw config_error("invalid scenario: " + rep.errors.front());
    }

    std::vector<ScenarioSpec> specs;
    specs.reserve(plan.values.size());
    for (const auto& v : plan.values) specs.push_back(apply_sweep_value(plan.base, plan.sweep, v));

    const bool wants_neural =
        std::find(plan.methods.begin(), plan.methods.end(), Method::neural) != plan.methods.end();

    // train one critic/generator pair per sweep value; inference rows share it
    std::vector<TrainedModel> models(specs.size());
    if (wants_neural && ropts.pretrained) {
        for (std::size_t vi = 0; vi < specs.size(); ++vi) {
            const FeatureCodec& c = ropts.pretrained->codec;
            const ScenarioSpec& s = specs[vi];
            if (c.n_tx == s.n_tx && c.n_rx == s.n_rx && c.m == s.n_elems && c.mode == s.mode &&
                c.phase_levels == s.phase_levels) {
                models[vi].bundle = *ropts.pretrained;
            } else {
                models[vi].error = "model geometry does not match this sweep value";
            }
        }
    } else if (wants_neural) {
        for (std::size_t vi = 0; vi < specs.size(); ++vi) {
            try {
                const ScenarioSpec& family = specs[vi];
                const FeatureCodec codec = FeatureCodec::for_family(family);
                Rng ds_rng(Rng::derive(master_seed, {vi, 0xDA7A}));
                const Dataset ds = sample_dataset(family, plan.opts.dataset_size, ds_rng);
                auto [critic, crep] =
                    train_critic(ds, codec, plan.opts.neural, Rng::derive(master_seed, {vi, 0xC817}));
                auto [gen, grep] = train_generator(critic, codec, family, plan.objective,
                                                   plan.opts.neural,
                                                   Rng::derive(master_seed, {vi, 0x6E4}));
                models[vi].bundle = ModelBundle{codec, std::move(critic), std::move(gen), plan.objective};
            } catch (const std::exception& e) {
                models[vi].error = sanitize_error(e.what());
            }
        }
    }

    struct Task {
        std::size_t vi;
        int trial;
        std::size_t mi;
    };
    std::vector<Task> tasks;
    tasks.reserve(specs.size() * static_cast<std::size_t>(plan.trials) * plan.methods.size());
    for (std::size_t vi = 0; vi < specs.size(); ++vi)
        for (int trial = 0; trial < plan.trials; ++trial)
            for (std::size_t mi = 0; mi < plan.methods.size(); ++mi) tasks.push_back({vi, trial, mi});

    std::vector<RowResult> rows(tasks.size());
    auto run_task = [&](std::size_t ti) {
        const Task& t = tasks[ti];
        const Method method = plan.methods[t.mi];
        const std::uint64_t seed = Rng::derive(
            master_seed, {t.vi, static_cast<std::uint64_t>(t.trial), method_tag(method)});
        rows[ti] = compute_row(plan, specs[t.vi], method, seed,
                               wants_neural ? &models[t.vi] : nullptr, ropts.real_timing);
    };

    const int jobs = std::max(1, ropts.jobs);
    if (jobs == 1 || tasks.size() < 2) {
        for (std::size_t ti = 0; ti < tasks.size(); ++ti) run_task(ti);
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
            for (;;) {
                const std::size_t ti = next.fetch_add(1);
                if (ti >= tasks.size()) return;
                run_task(ti);
            }
        };
        std::vector<std::thread> pool;
        const int n_threads = std::min<int>(jobs, static_cast<int>(tasks.size()));
        pool.reserve(static_cast<std::size_t>(n_threads));
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    RunOutput out;
    out.csv.append(kCsvHeader);
    out.csv.push_back('\n');
    out.configs_csv = "row,config\n";
    for (std::size_t ti = 0; ti < rows.size(); ++ti) {
        out.csv += rows[ti].csv;
        out.csv.push_back('\n');
        if (!rows[ti].cfg.empty()) {
            out.configs_csv += std::to_string(ti);
            out.configs_csv.push_back(',');
            out.configs_csv += rows[ti].cfg;
            out.configs_csv.push_back('\n');
        }
    }
    return out;
}

double quantile_sorted(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) throw config_error("quantile of empty sequence");
    if (sorted.size() == 1) return sorted[0];
    const double h = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(h);
    const double frac = h - static_cast<double>(lo);
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> f;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            f.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    f.push_back(std::move(cur));
    return f;
}

struct GroupKey {
    std::string method, mode, objective;
    std::size_t m;
    unsigned levels;
    double d_sr;
    auto operator<=>(const GroupKey&) const = default;
};

}  // namespace

Summary summarize(std::string_view csv) {
    Summary sum;
    std::istringstream is{std::string(csv)};
    std::string line;
    bool header_seen = false;
    struct Acc {
        std::vector<double> metric[4];
        std::size_t n = 0, n_err = 0, feasible = 0;
    };
    std::map<GroupKey, Acc> groups;

    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!header_seen) {
            header_seen = true;
            if (line == kCsvHeader) continue;  // a missing header is tolerated
        }
        const auto f = split_csv_line(line);
        if (f.size() != 15) {
            ++sum.skipped;
            continue;
        }
        try {
            GroupKey key{f[1], f[2], f[6], static_cast<std::size_t>(parse_u64(f[3])),
                         static_cast<unsigned>(parse_u64(f[4])), parse_num(f[5])};
            Acc& acc = groups[key];
            ++acc.n;
            if (!f[14].empty()) {
                ++acc.n_err;
                continue;
            }
            acc.feasible += f[7] == "1";
            acc.metric[0].push_back(parse_num(f[8]));
            acc.metric[1].push_back(parse_num(f[9]));
            acc.metric[2].push_back(parse_num(f[10]));
            acc.metric[3].push_back(parse_num(f[11]));
        } catch (const std::exception&) {
            ++sum.skipped;
        }
    }

    for (auto& [key, acc] : groups) {
        SummaryRow row;
        row.method = key.method;
        row.mode = key.mode;
        row.objective = key.objective;
        row.m = key.m;
        row.levels = key.levels;
        row.d_sr = key.d_sr;
        row.n = acc.n;
        row.n_err = acc.n_err;
        const std::size_t n_ok = acc.n - acc.n_err;
        row.feasible_frac = n_ok > 0 ? static_cast<double>(acc.feasible) / static_cast<double>(n_ok) : 0.0;
        for (int k = 0; k < 4; ++k) {
            if (acc.metric[k].empty()) continue;
            std::sort(acc.metric[k].begin(), acc.metric[k].end());
            row.med[k] = quantile_sorted(acc.metric[k], 0.5);
            row.iqr[k] = quantile_sorted(acc.metric[k], 0.75) - quantile_sorted(acc.metric[k], 0.25);
        }
        sum.rows.push_back(std::move(row));
    }
    return sum;
}

namespace {
constexpr std::string_view kSummaryHeader =
    "method,mode,M,L,d_sr,objective,n,n_err,feasible_frac,rate_dl_med,rate_dl_iqr,rate_ul_med,"
    "rate_ul_iqr,resid_si_db_med,resid_si_db_iqr,sic_gain_db_med,sic_gain_db_iqr";
}

std::string summary_to_csv(const Summary& s) {
    std::string out{kSummaryHeader};
    out.push_back('\n');
    for (const auto& r : s.rows) {
        out += r.method + ',' + r.mode + ',' + std::to_string(r.m) + ',' + std::to_string(r.levels) +
               ',' + format_double(r.d_sr) + ',' + r.objective + ',' + std::to_string(r.n) + ',' +
               std::to_string(r.n_err) + ',' + format_double(r.feasible_frac);
        for (int k = 0; k < 4; ++k) {
            out.push_back(',');
            out += format_double(r.med[k]);
            out.push_back(',');
            out += format_double(r.iqr[k]);
        }
        out.push_back('\n');
    }
    return out;
}

std::string summary_to_table(const Summary& s) {
    std::ostringstream os;
    os << "method       mode  M    L  d_sr   n(err)  feas   rate_dl        rate_ul        "
          "resid_si_db     sic_gain_db\n";
    char buf[256];
    for (const auto& r : s.rows) {
        std::snprintf(buf, sizeof(buf),
                      "%-12s %-4s %-4zu %-2u %-6g %3zu(%zu) %5.2f  %7.3f±%-6.3f %7.3f±%-6.3f "
                      "%8.2f±%-7.2f %8.2f±%-7.2f\n",
                      r.method.c_str(), r.mode.c_str(), r.m, r.levels, r.d_sr, r.n, r.n_err,
                      r.feasible_frac, r.med[0], r.iqr[0], r.med[1], r.iqr[1], r.med[2], r.iqr[2],
                      r.med[3], r.iqr[3]);
        os << buf;
    }
    if (s.skipped > 0) os << "(skipped " << s.skipped << " malformed rows)\n";
    return os.str();
}

Summary summary_from_csv(std::string_view csv) {
    Summary s;
    std::istringstream is{std::string(csv)};
    std::string line;
    bool first = true;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line == kSummaryHeader) continue;
        }
        const auto f = split_csv_line(line);
        if (f.size() != 17) {
            ++s.skipped;
            continue;
        }
        try {
            SummaryRow r;
            r.method = f[0];
            r.mode = f[1];
            r.m = static_cast<std::size_t>(parse_u64(f[2]));
            r.levels = static_cast<unsigned>(parse_u64(f[3]));
            r.d_sr = parse_num(f[4]);
            r.objective = f[5];
            r.n = static_cast<std::size_t>(parse_u64(f[6]));
            r.n_err = static_cast<std::size_t>(parse_u64(f[7]));
            r.feasible_frac = parse_num(f[8]);
            for (int k = 0; k < 4; ++k) {
                r.med[k] = parse_num(f[9 + 2 * k]);
                r.iqr[k] = parse_num(f[10 + 2 * k]);
            }
            s.rows.push_back(std::move(r));
        } catch (const std::exception&) {
            ++s.skipped;
        }
    }
    return s;
}

namespace {

int metric_index(const std::string& y) {
    if (y == "rate_dl" || y == "rate_dl_med") return 0;
    if (y == "rate_ul" || y == "rate_ul_med") return 1;
    if (y == "resid_si_db" || y == "resid_si_db_med") return 2;
    if (y == "sic_gain_db" || y == "sic_gain_db_med") return 3;
    throw config_error("unknown metric '" + y + "' (expected rate_dl, rate_ul, resid_si_db or "
                       "sic_gain_db)");
}

const char* metric_unit(int k) { return k <= 1 ? "bps/Hz" : "dB"; }

double x_value(const SummaryRow& r, const std::string& x) {
    if (x == "M") return static_cast<double>(r.m);
    if (x == "L") return static_cast<double>(r.levels);
    if (x == "d_sr") return r.d_sr;
    throw config_error("unknown x axis '" + x + "' (expected M, L or d_sr)");
}

const char* x_label(const std::string& x) {
    if (x == "M") return "surface elements M";
    if (x == "L") return "phase levels L";
    return "surface-to-FD distance d_sr (m)";
}

}  // namespace

std::string plot_svg(const Summary& s, const std::string& x_col, const std::string& y_col) {
    if (s.rows.empty()) throw config_error("plot_svg: empty summary");
    const int yk = metric_index(y_col);

    // series keyed by method/mode plus any identity column that still varies
    bool vary_L = false, vary_d = false;
    for (const auto& r : s.rows) {
        if (r.levels != s.rows.front().levels) vary_L = true;
        if (r.d_sr != s.rows.front().d_sr) vary_d = true;
    }
    if (x_col == "L") vary_L = false;
    if (x_col == "d_sr") vary_d = false;

    std::map<std::string, std::vector<std::pair<double, double>>> series;
    for (const auto& r : s.rows) {
        std::string key = r.method + "/" + r.mode;
        if (vary_L) key += "/L=" + std::to_string(r.levels);
        if (vary_d) key += "/d=" + format_double(r.d_sr);
        series[key].emplace_back(x_value(r, x_col), r.med[yk]);
    }
    for (auto& [k, pts] : series) std::sort(pts.begin(), pts.end());

    double x_min = 1e300, x_max = -1e300, y_min = 1e300, y_max = -1e300;
    for (const auto& [k, pts] : series) {
        for (const auto& [x, y] : pts) {
            x_min = std::min(x_min, x);
            x_max = std::max(x_max, x);
            y_min = std::min(y_min, y);
            y_max = std::max(y_max, y);
        }
    }
    if (x_max == x_min) x_max = x_min + 1.0;
    if (y_max == y_min) y_max = y_min + 1.0;

    const double w = 840, h = 520, ml = 80, mr = 180, mt = 40, mb = 60;
    const double pw = w - ml - mr, ph = h - mt - mb;
    auto sx = [&](double x) { return ml + (x - x_min) / (x_max - x_min) * pw; };
    auto sy = [&](double y) { return mt + ph - (y - y_min) / (y_max - y_min) * ph; };

    static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
       << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n";
    os << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
    os << "<text x=\"" << ml << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\">" << y_col
       << " vs " << x_col << "</text>\n";
    // axes
    os << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw << "\" y2=\""
       << mt + ph << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << mt + ph
       << "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double fx = x_min + (x_max - x_min) * t / 4.0;
        const double fy = y_min + (y_max - y_min) * t / 4.0;
        os << "<line x1=\"" << sx(fx) << "\" y1=\"" << mt + ph << "\" x2=\"" << sx(fx) << "\" y2=\""
           << mt + ph + 5 << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << sx(fx) << "\" y=\"" << mt + ph + 20
           << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">"
           << format_double(fx) << "</text>\n";
        os << "<line x1=\"" << ml - 5 << "\" y1=\"" << sy(fy) << "\" x2=\"" << ml << "\" y2=\""
           << sy(fy) << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << ml - 8 << "\" y=\"" << sy(fy) + 4
           << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">"
           << format_double(fy) << "</text>\n";
    }
    os << "<text x=\"" << ml + pw / 2 << "\" y=\"" << h - 15
       << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">"
       << x_label(x_col) << "</text>\n";
    os << "<text x=\"20\" y=\"" << mt + ph / 2
       << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
       << mt + ph / 2 << ")\">" << y_col << " (" << metric_unit(yk) << ")</text>\n";

    int ci = 0;
    for (const auto& [key, pts] : series) {
        const char* color = kColors[ci % 8];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i) {
            os << sx(pts[i].first) << ',' << sy(pts[i].second) << (i + 1 == pts.size() ? "" : " ");
        }
        os << "\"/>\n";
        for (const auto& [x, y] : pts) {
            os << "<circle cx=\"" << sx(x) << "\" cy=\"" << sy(y) << "\" r=\"3\" fill=\"" << color
               << "\"/>\n";
        }
        os << "<text x=\"" << ml + pw + 12 << "\" y=\"" << mt + 16 + 18 * ci
           << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" << color << "\">" << key
           << "</text>\n";
        ++ci;
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace starfd
