#pragma once

#include "starfd/channel.hpp"
#include "starfd/numerics.hpp"
#include "starfd/starris.hpp"

namespace starfd {

/// FD transmit beamformer and receive combiner. ||w||^2 <= p_fd, ||v|| = 1.
struct LinkConfig {
    CMatrix w;  // n_tx × 1
    CMatrix v;  // n_rx × 1
};

/// Everything the harness reports about one evaluated configuration.
struct Metrics {
    double rate_dl = 0.0;       // bps/Hz, FD -> Bob
    double rate_ul = 0.0;       // bps/Hz, Alice -> FD
    double resid_si = 0.0;      // W
    double resid_si_db = 0.0;   // dB relative to noise_fd
    double sic_gain_db = 0.0;   // dB suppression vs the uncancelled leak
    double baseline_si = 0.0;   // W, |v^H h_d w|^2 + floor
};

/// Power clamp used before any dB conversion.
inline constexpr double kTinyWatts = 1e-30;

/// |v^H (h_d + g2r R g1) w|^2 + floor.
double residual_si_power(const ChannelSet& ch, const StarConfig& cfg, const LinkConfig& link,
                         double floor);

/// log2(1 + |g_eff w|^2 / noise_bob).
double downlink_rate(const ChannelSet& ch, const StarConfig& cfg, const LinkConfig& link,
                     double noise_bob);

/// log2(1 + p_alice |v^H h_a|^2 / (residual + noise_fd)).
double uplink_rate(const ChannelSet& ch, const StarConfig& cfg, const LinkConfig& link,
                   const ScenarioSpec& spec);

/// v = h_a / ||h_a||; throws on a zero uplink channel.
CMatrix mrc_combiner(const ChannelSet& ch);

Metrics evaluate(const ScenarioSpec& spec, const ChannelSet& ch, const StarConfig& cfg,
                 const LinkConfig& link);

}  // namespace starfd
