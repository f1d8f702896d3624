#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "starfd/numerics.hpp"
#include "starfd/starris.hpp"

namespace starfd {

/// One experiment point: geometry, power budget, noise, fading and surface
/// parameters. Defaults follow the calibrated link budget documented in the
/// README (interference-free uplink SNR near 40 dB).
struct ScenarioSpec {
    std::size_t n_tx = 4;    // FD transmit antennas
    std::size_t n_rx = 2;    // FD receive antennas
    std::size_t n_elems = 32;  // surface elements M

    double d_sr = 0.1;   // surface to FD antennas [m]
    double d_fb = 20.0;  // FD to Bob [m]
    double d_af = 8.5;   // Alice to FD [m]

    double p_fd = 1.0;      // FD transmit power budget [W]
    double p_alice = 0.1;   // Alice transmit power [W]
    double noise_fd = 1e-12;   // FD receiver noise floor [W] (-90 dBm)
    double noise_bob = 1e-12;  // Bob noise floor [W]

    double rician_k = 2.0;   // K-factor for surface-adjacent links (~3 dB)
    double pl0_db = 40.0;    // reference pathloss at 1 m [dB]
    double alpha_ris = 2.2;  // pathloss exponent, surface-adjacent links
    double alpha_nlos = 3.5; // pathloss exponent, direct links

    unsigned phase_levels = 0;  // L; 0 = continuous
    StarMode mode = StarMode::es;
    bool direct_fb_blocked = true;
    double residual_floor = 0.0;  // classical-SIC residual floor [W]
    std::uint64_t seed = 1;

    friend bool operator==(const ScenarioSpec&, const ScenarioSpec&) = default;
};

/// All channel matrices of one scenario realization.
struct ChannelSet {
    CMatrix h_d;   // n_rx × n_tx, direct self-interference
    CMatrix g1;    // M × n_tx,   FD tx -> surface
    CMatrix g2r;   // n_rx × M,   surface reflection side -> FD rx
    CMatrix g2t;   // 1 × M,      surface transmission side -> Bob
    CMatrix h_a;   // n_rx × 1,   Alice -> FD rx
    CMatrix h_fb;  // 1 × n_tx,   FD tx -> Bob direct (zero when blocked)
};

/// 10^(-pl0_db/10) * d^(-alpha); strictly decreasing in d.
double pathloss_lin(double d, double pl0_db, double alpha);

/// sqrt(gain) * ( sqrt(k/(k+1)) * LoS + sqrt(1/(k+1)) * W ) with W unit-variance
/// complex Gaussian and LoS a deterministic unit-modulus steering outer
/// product (seeded by `steer_tag` so distinct links get distinct steering).
CMatrix rician_channel(Rng& rng, std::size_t rows, std::size_t cols, double gain, double k,
                       unsigned steer_tag = 0);

/// Draws every channel of the topology. Surface-adjacent links are Rician at
/// distances (d_sr, d_sr, d_fb - d_sr); direct links are Rayleigh. The
/// direct-leak channel h_d uses a fixed -15 dB per-entry gain.
ChannelSet gen_channels(const ScenarioSpec& spec, Rng& rng);

struct GeometryReport {
    std::vector<std::string> errors;
    bool ok() const { return errors.empty(); }
};

/// Validates every ScenarioSpec invariant; never throws.
GeometryReport validate_geometry(const ScenarioSpec& spec);

/// Synthetic scenario where h_d is replaced by -g2r * reflect(null_cfg) * g1,
/// so applying null_cfg cancels self-interference exactly. Used to certify
/// optimizer convergence depth.
struct NullScenario {
    ChannelSet ch;
    StarConfig null_cfg;
};
NullScenario gen_si_null_channels(const ScenarioSpec& spec, Rng& rng);

}  // namespace starfd
