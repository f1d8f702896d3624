#include "starfd/fdlink.hpp"

#include <cmath>

namespace starfd {

namespace {

// v^H A w for column vectors v, w.
cxd combiner_output(const CMatrix& v, const CMatrix& a, const CMatrix& w) {
    return vdot(v, cmat_mul(a, w));
}

}  // namespace

double residual_si_power(const ChannelSet& ch, const StarConfig& cfg, const LinkConfig& link,
                         double floor) {
    const cxd s = combiner_output(link.v, effective_si_channel(ch, cfg), link.w);
    return std::norm(s) + floor;
}

double downlink_rate(const ChannelSet& ch, const StarConfig& cfg, const LinkConfig& link,
                     double noise_bob) {
    const CMatrix g = effective_dl_channel(ch, cfg);
    const cxd s = cmat_mul(g, link.w)(0, 0);
    return std::log2(1.0 + std::norm(s) / noise_bob);
}

double uplink_rate(const ChannelSet& ch, const StarConfig& cfg, const LinkConfig& link,
                   const ScenarioSpec& spec) {
    const double resid = residual_si_power(ch, cfg, link, spec.residual_floor);
    const cxd s = vdot(link.v, ch.h_a);
    return std::log2(1.0 + spec.p_alice * std::norm(s) / (resid + spec.noise_fd));
}

CMatrix mrc_combiner(const ChannelSet& ch) {
    const double n2 = fro_norm_sq(ch.h_a);
    if (n2 <= 0.0) throw config_error("mrc_combiner: degenerate uplink channel");
    return cmat_scale(ch.h_a, 1.0 / std::sqrt(n2));
}

Metrics evaluate(const ScenarioSpec& spec, const ChannelSet& ch, const StarConfig& cfg,
                 const LinkConfig& link) {
    Metrics m;
    m.resid_si = residual_si_power(ch, cfg, link, spec.residual_floor);
    m.rate_dl = downlink_rate(ch, cfg, link, spec.noise_bob);
    m.rate_ul = uplink_rate(ch, cfg, link, spec);
    m.baseline_si = std::norm(combiner_output(link.v, ch.h_d, link.w)) + spec.residual_floor;
    m.resid_si_db = 10.0 * std::log10(std::max(m.resid_si, kTinyWatts) / spec.noise_fd);
    m.sic_gain_db = 10.0 * std::log10(m.baseline_si / std::max(m.resid_si, kTinyWatts));
    return m;
}

}  // namespace starfd
