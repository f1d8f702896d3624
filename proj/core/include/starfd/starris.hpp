#pragma once

#include <span>
#include <string>
#include <vector>

#include "starfd/numerics.hpp"

namespace starfd {

struct ChannelSet;

/// Surface operating modes. Time switching is intentionally not modeled.
enum class StarMode { es, ms };

const char* to_string(StarMode m);
StarMode star_mode_from_string(const std::string& s);

/// Full controllable state of the surface: per-element reflect/transmit
/// amplitudes and phases. Invariants depend on the mode:
///   ES: beta_r[i]^2 + beta_t[i]^2 == 1
///   MS: (beta_r[i], beta_t[i]) in {(1,0), (0,1)} exactly
/// With phase_levels L > 0 every phase is an exact multiple of 2*pi/L.
struct StarConfig {
    StarMode mode = StarMode::es;
    unsigned phase_levels = 0;  // 0 = continuous
    std::vector<double> beta_r;
    std::vector<double> beta_t;
    std::vector<double> theta_r;
    std::vector<double> theta_t;

    std::size_t size() const { return beta_r.size(); }

    friend bool operator==(const StarConfig&, const StarConfig&) = default;
};

double wrap_phase(double theta);                       // into [0, 2*pi)
double quantize_phase(double theta, unsigned levels);  // nearest multiple of 2*pi/L

/// ES amplitudes for a split angle in [0, pi/2]; the endpoints map to the
/// exact pure states (1,0) and (0,1).
void es_amplitudes(double psi, double& beta_r, double& beta_t);

/// Maps raw (unconstrained) per-element parameters onto a feasible config.
/// ES amplitudes come from a single split angle psi = clamp(raw, 0, pi/2)
/// as (cos psi, sin psi), so the energy constraint holds by construction.
/// MS thresholds raw >= pi/4 to the reflect state. Phases are wrapped and,
/// when L > 0, snapped to the nearest level.
StarConfig project(std::span<const double> raw_split, std::span<const double> raw_theta_r,
                   std::span<const double> raw_theta_t, StarMode mode, unsigned phase_levels);

/// Canonical raw representation of a feasible config; project() of it is the
/// identity. Used for idempotence checks and feature encoding.
void canonical_raws(const StarConfig& cfg, std::vector<double>& split,
                    std::vector<double>& theta_r, std::vector<double>& theta_t);

/// Empty string when all invariants hold, else a description of the first
/// violation.
std::string check_invariants(const StarConfig& cfg);

CMatrix reflect_matrix(const StarConfig& cfg);   // M×M diagonal, beta_r e^{j theta_r}
CMatrix transmit_matrix(const StarConfig& cfg);  // M×M diagonal, beta_t e^{j theta_t}

/// h_d + g2r · reflect · g1 (n_rx × n_tx).
CMatrix effective_si_channel(const ChannelSet& ch, const StarConfig& cfg);

/// h_fb + g2t · transmit · g1 (1 × n_tx).
CMatrix effective_dl_channel(const ChannelSet& ch, const StarConfig& cfg);

/// One CSV row per config: mode,L,m followed by the four per-element blocks.
std::string star_config_to_csv(const StarConfig& cfg);
StarConfig star_config_from_csv(const std::string& row);

}  // namespace starfd
