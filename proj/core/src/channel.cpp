#include "starfd/channel.hpp"

#include <cmath>

namespace starfd {

namespace {

// Direct transmit->receive leak: fixed per-entry gain. Calibrated so the
// unmitigated self-interference sits roughly 105 dB above the noise floor.
constexpr double kLeakGainDb = -15.0;

bool is_pow2_or_zero(unsigned v) { return v == 0 || (v & (v - 1)) == 0; }

}  // namespace

double pathloss_lin(double d, double pl0_db, double alpha) {
    if (d <= 0.0) throw config_error("pathloss_lin: distance must be positive");
    return std::pow(10.0, -pl0_db / 10.0) * std::pow(d, -alpha);
}

CMatrix rician_channel(Rng& rng, std::size_t rows, std::size_t cols, double gain, double k,
                       unsigned steer_tag) {
    if (gain < 0.0) throw config_error("rician_channel: negative gain");
    if (k < 0.0) throw config_error("rician_channel: negative K-factor");
    const CMatrix w = cgauss_sample(rng, rows, cols, 1.0);
    const double c_los = std::sqrt(k / (k + 1.0));
    const double c_sc = std::sqrt(1.0 / (k + 1.0));
    const double sg = std::sqrt(gain);
    // Steering angles fixed per link tag; unit-modulus outer product.
    const double ar = 0.3 + 0.17 * steer_tag;
    const double ac = 0.7 + 0.11 * steer_tag;
    CMatrix out(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            const double ph = M_PI * (std::sin(ar) * static_cast<double>(i) +
                                      std::sin(ac) * static_cast<double>(j));
            const cxd los(std::cos(ph), std::sin(ph));
            out(i, j) = sg * (c_los * los + c_sc * w(i, j));
        }
    }
    return out;
}

ChannelSet gen_channels(const ScenarioSpec& spec, Rng& rng) {
    const GeometryReport rep = validate_geometry(spec);
    if (!rep.ok()) throw config_error("gen_channels: " + rep.errors.front());

    const double g_sr = pathloss_lin(spec.d_sr, spec.pl0_db, spec.alpha_ris);
    const double g_rb = pathloss_lin(spec.d_fb - spec.d_sr, spec.pl0_db, spec.alpha_ris);
    const double g_af = pathloss_lin(spec.d_af, spec.pl0_db, spec.alpha_nlos);
    const double g_fb = pathloss_lin(spec.d_fb, spec.pl0_db, spec.alpha_nlos);
    const double g_leak = std::pow(10.0, kLeakGainDb / 10.0);

    ChannelSet ch;
    ch.g1 = rician_channel(rng, spec.n_elems, spec.n_tx, g_sr, spec.rician_k, 0);
    ch.g2r = rician_channel(rng, spec.n_rx, spec.n_elems, g_sr, spec.rician_k, 1);
    ch.g2t = rician_channel(rng, 1, spec.n_elems, g_rb, spec.rician_k, 2);
    ch.h_d = cgauss_sample(rng, spec.n_rx, spec.n_tx, g_leak);
    ch.h_a = cgauss_sample(rng, spec.n_rx, 1, g_af);
    ch.h_fb = spec.direct_fb_blocked ? CMatrix::zero(1, spec.n_tx)
                                     : cgauss_sample(rng, 1, spec.n_tx, g_fb);
    return ch;
}

GeometryReport validate_geometry(const ScenarioSpec& spec) {
    GeometryReport rep;
    auto err = [&rep](const std::string& m) { rep.errors.push_back(m); };

    if (spec.n_tx < 1) err("n_tx must be >= 1");
    if (spec.n_rx < 1) err("n_rx must be >= 1");
    if (spec.n_elems < 1) err("elements must be >= 1");
    if (spec.d_sr <= 0.0) err("d_sr must be positive");
    if (spec.d_fb <= 0.0) err("d_fb must be positive");
    if (spec.d_af <= 0.0) err("d_af must be positive");
    if (spec.d_sr > 0.0 && spec.d_fb > 0.0 && spec.d_sr >= spec.d_fb) {
        err("d_sr must be smaller than d_fb (surface sits between FD device and Bob)");
    }
    if (spec.p_fd <= 0.0) err("p_fd must be positive");
    if (spec.p_alice <= 0.0) err("p_alice must be positive");
    if (spec.noise_fd <= 0.0) err("noise_fd must be positive");
    if (spec.noise_bob <= 0.0) err("noise_bob must be positive");
    if (spec.rician_k < 0.0) err("rician_k must be >= 0");
    if (!is_pow2_or_zero(spec.phase_levels)) err("phase levels must be 0 or a power of two");
    if (spec.residual_floor < 0.0) err("residual_floor must be >= 0");
    return rep;
}

NullScenario gen_si_null_channels(const ScenarioSpec& spec, Rng& rng) {
    NullScenario ns;
    ns.ch = gen_channels(spec, rng);

    StarConfig cfg;
    cfg.mode = spec.mode;
    cfg.phase_levels = spec.phase_levels;
    cfg.beta_r.assign(spec.n_elems, 1.0);
    cfg.beta_t.assign(spec.n_elems, 0.0);
    cfg.theta_r.resize(spec.n_elems);
    cfg.theta_t.assign(spec.n_elems, 0.0);
    for (std::size_t i = 0; i < spec.n_elems; ++i) {
        // stay on the scenario's phase grid so the null is reachable
        cfg.theta_r[i] = quantize_phase(2.0 * M_PI * rng.next_unit(), spec.phase_levels);
    }
    ns.ch.h_d = cmat_scale(cmat_mul(ns.ch.g2r, cmat_mul(reflect_matrix(cfg), ns.ch.g1)), -1.0);
    ns.null_cfg = cfg;
    return ns;
}

}  // namespace starfd
