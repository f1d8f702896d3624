#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "starfd/channel.hpp"
#include "starfd/neural.hpp"
#include "starfd/optim.hpp"

namespace starfd {

enum class SweepVar { elements, distance, mode, phase_levels };
enum class Method { oracle, random, alternating, neural };

const char* to_string(SweepVar v);
const char* to_string(Method m);
SweepVar sweep_var_from_string(const std::string& s);
Method method_from_string(const std::string& s);

struct PlanOptions {
    OptimOptions optim;
    std::uint64_t random_budget = 1000;
    TrainHyper neural;
    std::size_t dataset_size = 2000;

    friend bool operator==(const PlanOptions&, const PlanOptions&) = default;
};

/// One experiment: a base scenario, one swept variable, trials per point and
/// the methods to run. Parsed from the line-oriented `key = value` config
/// format (bracketed sections, `#` comments).
struct ExperimentPlan {
    std::string name;
    ScenarioSpec base;
    SweepVar sweep = SweepVar::elements;
    std::vector<std::string> values;  // tokens, validated against the sweep variable
    int trials = 20;
    std::vector<Method> methods{Method::alternating};
    Objective objective = Objective::min_si(8.0);
    std::string out_path;  // defaults to <name>.csv

    PlanOptions opts;

    friend bool operator==(const ExperimentPlan&, const ExperimentPlan&) = default;
};

struct ParseIssue {
    int line = 0;
    std::string message;
};

struct ParseResult {
    ExperimentPlan plan;
    std::vector<ParseIssue> errors;
    bool ok() const { return errors.empty(); }
};

ParseResult parse_config(std::string_view text);

/// Full explicit rendering; parse_config(emit_config(p)) round-trips to an
/// equal plan.
std::string emit_config(const ExperimentPlan& plan);

/// Plan-level invariants beyond per-key parsing (trials, sweep values,
/// oracle instance sizes).
std::vector<std::string> validate_plan(const ExperimentPlan& plan);

/// The swept scenario at one value token.
ScenarioSpec apply_sweep_value(const ScenarioSpec& base, SweepVar var, const std::string& token);

inline constexpr std::string_view kCsvHeader =
    "seed,method,mode,M,L,d_sr,objective,feasible,rate_dl,rate_ul,resid_si_db,sic_gain_db,iters,"
    "wall_ms,error";

struct RunOptions {
    int jobs = 1;
    /// When false (default) the wall_ms column is 0 so re-runs are
    /// byte-identical; pass true to record measured times instead.
    bool real_timing = false;
    /// Neural rows use this bundle instead of training per sweep value;
    /// values whose geometry disagrees with the bundle's codec error per row.
    const ModelBundle* pretrained = nullptr;
};

struct RunOutput {
    std::string csv;          // one row per (value, trial, method), kCsvHeader schema
    std::string configs_csv;  // best-found surface configs, one row per result
};

/// Executes the plan. Row seeds derive from (master_seed, value index,
/// trial, method). Per-row failures land in the `error` column; the run
/// continues. Rows are emitted in (value, trial, method) order regardless of
/// worker scheduling.
RunOutput run_plan(const ExperimentPlan& plan, std::uint64_t master_seed,
                   const RunOptions& ropts = {});

struct SummaryRow {
    std::string method;
    std::string mode;
    std::string objective;
    std::size_t m = 0;
    unsigned levels = 0;
    double d_sr = 0.0;
    std::size_t n = 0;      // aggregated rows
    std::size_t n_err = 0;  // rows skipped due to a non-empty error column
    double feasible_frac = 0.0;
    // medians and interquartile ranges for rate_dl, rate_ul, resid_si_db, sic_gain_db
    double med[4] = {0, 0, 0, 0};
    double iqr[4] = {0, 0, 0, 0};
};

struct Summary {
    std::vector<SummaryRow> rows;
    std::size_t skipped = 0;  // malformed CSV lines
};

/// Groups result rows by (method, mode, M, L, d_sr, objective). Median is
/// the midpoint of the two central order statistics for even counts;
/// quartiles interpolate linearly between closest ranks.
Summary summarize(std::string_view csv);

std::string summary_to_csv(const Summary& s);
std::string summary_to_table(const Summary& s);
Summary summary_from_csv(std::string_view csv);

/// Linear-interpolation quantile of an ascending-sorted sequence.
double quantile_sorted(const std::vector<double>& sorted, double p);

/// Self-contained SVG line chart of one summary metric against one sweep
/// column (`x` in {M, L, d_sr}; `y` a metric name). One polyline per
/// (method, mode) series.
std::string plot_svg(const Summary& s, const std::string& x_col, const std::string& y_col);

}  // namespace starfd
