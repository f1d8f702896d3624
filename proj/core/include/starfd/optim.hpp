#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "starfd/channel.hpp"
#include "starfd/fdlink.hpp"
#include "starfd/numerics.hpp"
#include "starfd/starris.hpp"

namespace starfd {

enum class ObjectiveKind {
    max_rate_st_si,  // maximize downlink rate s.t. resid_si_db <= epsilon_db
    min_si_st_rate,  // minimize resid_si_db   s.t. rate_dl >= r_min
};

struct Objective {
    ObjectiveKind kind = ObjectiveKind::min_si_st_rate;
    double epsilon_db = 3.0;  // allowed residual, dB over noise_fd
    double r_min = 8.0;       // required downlink rate, bps/Hz

    static Objective max_rate(double eps_db) { return {ObjectiveKind::max_rate_st_si, eps_db, 0.0}; }
    static Objective min_si(double r_min) { return {ObjectiveKind::min_si_st_rate, 0.0, r_min}; }

    friend bool operator==(const Objective&, const Objective&) = default;
};

std::string to_string(const Objective& obj);
Objective objective_from_string(const std::string& s);

struct OptResult {
    StarConfig cfg;
    LinkConfig link;
    Metrics metrics;
    bool feasible = false;
    std::uint64_t iters = 0;
    double wall_ms = 0.0;
};

struct OptimOptions {
    int max_outer = 50;    // outer iterations, shared across the penalty sweep
    double tol = 1e-6;     // relative improvement threshold
    int sweeps = 1;        // coordinate-descent sweeps per outer iteration
    int grid = 64;         // amplitude grid points over [0, pi/2]

    friend bool operator==(const OptimOptions&, const OptimOptions&) = default;
};

/// Overflow-safe log(1 + e^x); the hinge used by every scalarization.
double softplus(double x);

/// Penalty scalarization, smaller is better. lambda weights the violated
/// constraint; the classical loop sweeps lambda over {1,10,100,1000}.
double scalarized_objective(const Metrics& m, const Objective& obj, double lambda);

/// Exact constraint check at 1e-6 relative tolerance.
bool objective_feasible(const Metrics& m, const Objective& obj);

/// -rate_dl for the rate objective, resid_si_db for the SIC objective.
double primary_metric(const Metrics& m, const Objective& obj);

inline constexpr double kLambdaFinal = 1000.0;

/// Feasibility-first ordering used to select final results: any feasible
/// point beats any infeasible one; feasible points compare on the primary
/// metric, infeasible ones on the final-lambda penalty objective. Smaller
/// ranks are better.
struct ResultRank {
    int infeasible = 1;
    double key = 0.0;
    friend auto operator<=>(const ResultRank&, const ResultRank&) = default;
};
ResultRank result_rank(const Metrics& m, const Objective& obj);

/// Per-element cascade scalars at fixed (v, w):
///   combiner SI output  = base_si + sum_i beta_r[i] e^{j theta_r[i]} a0[i]
///   downlink projection = base_dl + sum_i beta_t[i] e^{j theta_t[i]} b0[i]
struct CascadeTerms {
    cxd base_si;
    cxd base_dl;
    std::vector<cxd> a0;
    std::vector<cxd> b0;
};
CascadeTerms cascade_terms(const ChannelSet& ch, const LinkConfig& link);

/// Transmit beamformers. All return n_tx×1 vectors at exactly the power
/// budget. zf_beamformer projects the matched filter onto the null space of
/// the combiner-output self-interference; throws when n_tx < 2 or the
/// downlink direction lies in that null space.
CMatrix mrt_beamformer(const ChannelSet& ch, const StarConfig& cfg, double p_fd);
CMatrix zf_beamformer(const ChannelSet& ch, const StarConfig& cfg, const CMatrix& v, double p_fd);
CMatrix dft_beamformer(std::size_t n_tx, std::size_t col, double p_fd);

/// The finite beamformer codebook shared by the enumeration oracle and
/// random search: MRT, ZF-projected MRT (rate objective only), and two DFT
/// columns. Under the SIC objective ZF is excluded: nulling interference in
/// the beamformer would leave nothing for the surface to do and makes the
/// element count irrelevant.
std::vector<CMatrix> beamformer_codebook(const ChannelSet& ch, const StarConfig& cfg,
                                         const CMatrix& v, double p_fd, const Objective& obj);

/// Closed-form per-element phase updates. Residual SI power is
/// non-increasing (reflect) / downlink rate non-decreasing (transmit) after
/// every single update; with L > 0 the update picks the best of the current
/// and the two adjacent quantized phases.
StarConfig phase_cd_reflect(const ChannelSet& ch, const StarConfig& cfg, const LinkConfig& link,
                            int sweeps);
StarConfig phase_cd_transmit(const ChannelSet& ch, const StarConfig& cfg, const LinkConfig& link,
                             int sweeps);

/// Per-element 1-D grid search over the ES split angle against the
/// scalarized objective. The current angle always competes, so the
/// objective never worsens. Throws under MS.
StarConfig es_amplitude_step(const ScenarioSpec& spec, const ChannelSet& ch, const StarConfig& cfg,
                             const LinkConfig& link, const Objective& obj, int grid,
                             double lambda = kLambdaFinal);

/// One pass of single-element reflect/transmit flips with re-optimized
/// element phase, accepted only on strict improvement. Throws under ES.
StarConfig ms_flip_pass(const ScenarioSpec& spec, const ChannelSet& ch, const StarConfig& cfg,
                        const LinkConfig& link, const Objective& obj,
                        double lambda = kLambdaFinal);

/// Exhaustive ground truth for tiny MS instances (L in {2,4}, M <= 4,
/// n_tx <= 2). Visits exactly (2 L L)^M x |codebook| points; ties broken by
/// the lexicographically smallest config encoding.
OptResult enumerate_oracle(const ScenarioSpec& spec, const ChannelSet& ch, const Objective& obj);

/// Best of `budget` uniformly sampled projected configs with codebook
/// beamformers; deterministic given the rng state.
OptResult random_search(const ScenarioSpec& spec, const ChannelSet& ch, const Objective& obj,
                        std::uint64_t budget, Rng& rng);

/// The reference method: MRC combiner, coordinate descent on both phase
/// banks, amplitude/mode steps, and a J-scored beamformer update, inside an
/// escalating penalty sweep. Beamformer errors degrade to infeasible
/// results, never crashes.
OptResult alternating_optimize(const ScenarioSpec& spec, const ChannelSet& ch, const Objective& obj,
                               const OptimOptions& opts = {});

}  // namespace starfd
