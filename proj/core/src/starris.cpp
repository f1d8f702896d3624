#include "starfd/starris.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "starfd/channel.hpp"

namespace starfd {

namespace {
constexpr double kTwoPi = 2.0 * M_PI;
constexpr double kHalfPi = M_PI / 2.0;
}  // namespace

const char* to_string(StarMode m) { return m == StarMode::es ? "ES" : "MS"; }

StarMode star_mode_from_string(const std::string& s) {
    if (s == "ES" || s == "es") return StarMode::es;
    if (s == "MS" || s == "ms") return StarMode::ms;
    throw config_error("unknown surface mode '" + s + "' (expected ES or MS)");
}

double wrap_phase(double theta) {
    double t = std::fmod(theta, kTwoPi);
    if (t < 0.0) t += kTwoPi;
    if (t >= kTwoPi) t = 0.0;  // fmod can land exactly on 2*pi after the add
    return t;
}

double quantize_phase(double theta, unsigned levels) {
    if (levels == 0) return wrap_phase(theta);
    const double step = kTwoPi / levels;
    auto k = static_cast<long>(std::lround(wrap_phase(theta) / step));
    k %= levels;
    return static_cast<double>(k) * step;
}

void es_amplitudes(double psi, double& beta_r, double& beta_t) {
    if (psi <= 0.0) {
        beta_r = 1.0;
        beta_t = 0.0;
    } else if (psi >= kHalfPi) {
        beta_r = 0.0;
        beta_t = 1.0;
    } else {
        beta_r = std::cos(psi);
        beta_t = std::sin(psi);
    }
}

StarConfig project(std::span<const double> raw_split, std::span<const double> raw_theta_r,
                   std::span<const double> raw_theta_t, StarMode mode, unsigned phase_levels) {
    const std::size_t m = raw_split.size();
    if (raw_theta_r.size() != m || raw_theta_t.size() != m) {
        throw config_error("project: raw sequences must have equal length");
    }
    StarConfig cfg;
    cfg.mode = mode;
    cfg.phase_levels = phase_levels;
    cfg.beta_r.resize(m);
    cfg.beta_t.resize(m);
    cfg.theta_r.resize(m);
    cfg.theta_t.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        if (mode == StarMode::es) {
            es_amplitudes(std::clamp(raw_split[i], 0.0, kHalfPi), cfg.beta_r[i], cfg.beta_t[i]);
        } else {
            const bool reflect = raw_split[i] >= M_PI / 4.0;
            cfg.beta_r[i] = reflect ? 1.0 : 0.0;
            cfg.beta_t[i] = reflect ? 0.0 : 1.0;
        }
        cfg.theta_r[i] = quantize_phase(raw_theta_r[i], phase_levels);
        cfg.theta_t[i] = quantize_phase(raw_theta_t[i], phase_levels);
    }
    return cfg;
}

void canonical_raws(const StarConfig& cfg, std::vector<double>& split,
                    std::vector<double>& theta_r, std::vector<double>& theta_t) {
    const std::size_t m = cfg.size();
    split.resize(m);
    theta_r.assign(cfg.theta_r.begin(), cfg.theta_r.end());
    theta_t.assign(cfg.theta_t.begin(), cfg.theta_t.end());
    for (std::size_t i = 0; i < m; ++i) {
        if (cfg.mode == StarMode::es) {
            split[i] = std::atan2(cfg.beta_t[i], cfg.beta_r[i]);
        } else {
            split[i] = cfg.beta_r[i] == 1.0 ? kHalfPi : 0.0;
        }
    }
}

std::string check_invariants(const StarConfig& cfg) {
    const std::size_t m = cfg.size();
    if (cfg.beta_t.size() != m || cfg.theta_r.size() != m || cfg.theta_t.size() != m) {
        return "field lengths disagree";
    }
    if (cfg.phase_levels != 0 && (cfg.phase_levels & (cfg.phase_levels - 1)) != 0) {
        return "phase_levels must be 0 or a power of two";
    }
    for (std::size_t i = 0; i < m; ++i) {
        const double br = cfg.beta_r[i];
        const double bt = cfg.beta_t[i];
        if (cfg.mode == StarMode::es) {
            if (std::abs(br * br + bt * bt - 1.0) > 1e-12) {
                return "ES energy split violated at element " + std::to_string(i);
            }
            if (br < 0.0 || br > 1.0 || bt < 0.0 || bt > 1.0) {
                return "amplitude out of [0,1] at element " + std::to_string(i);
            }
        } else {
            const bool r = br == 1.0 && bt == 0.0;
            const bool t = br == 0.0 && bt == 1.0;
            if (!r && !t) return "MS amplitudes not exactly (1,0)/(0,1) at element " + std::to_string(i);
        }
        for (double th : {cfg.theta_r[i], cfg.theta_t[i]}) {
            if (th < 0.0 || th >= kTwoPi) return "phase outside [0,2pi) at element " + std::to_string(i);
            if (cfg.phase_levels > 0) {
                const double step = kTwoPi / cfg.phase_levels;
                if (th != static_cast<double>(std::lround(th / step)) * step) {
                    return "phase not an exact level multiple at element " + std::to_string(i);
                }
            }
        }
    }
    return {};
}

namespace {
CMatrix diagonal_response(const std::vector<double>& beta, const std::vector<double>& theta) {
    const std::size_t m = beta.size();
    CMatrix d(m, m);
    for (std::size_t i = 0; i < m; ++i) {
        d(i, i) = beta[i] * cxd(std::cos(theta[i]), std::sin(theta[i]));
    }
    return d;
}
}  // namespace

CMatrix reflect_matrix(const StarConfig& cfg) { return diagonal_response(cfg.beta_r, cfg.theta_r); }
CMatrix transmit_matrix(const StarConfig& cfg) { return diagonal_response(cfg.beta_t, cfg.theta_t); }

CMatrix effective_si_channel(const ChannelSet& ch, const StarConfig& cfg) {
    return cmat_add(ch.h_d, cmat_mul(ch.g2r, cmat_mul(reflect_matrix(cfg), ch.g1)));
}

CMatrix effective_dl_channel(const ChannelSet& ch, const StarConfig& cfg) {
    return cmat_add(ch.h_fb, cmat_mul(ch.g2t, cmat_mul(transmit_matrix(cfg), ch.g1)));
}

std::string star_config_to_csv(const StarConfig& cfg) {
    std::ostringstream os;
    os.precision(17);
    os << to_string(cfg.mode) << ',' << cfg.phase_levels << ',' << cfg.size();
    auto emit = [&os](const std::vector<double>& v) {
        for (double x : v) os << ',' << x;
    };
    emit(cfg.beta_r);
    emit(cfg.beta_t);
    emit(cfg.theta_r);
    emit(cfg.theta_t);
    return os.str();
}

StarConfig star_config_from_csv(const std::string& row) {
    std::istringstream is(row);
    std::string tok;
    auto next = [&]() -> std::string {
        if (!std::getline(is, tok, ',')) throw config_error("star config row truncated");
        return tok;
    };
    StarConfig cfg;
    cfg.mode = star_mode_from_string(next());
    cfg.phase_levels = static_cast<unsigned>(std::stoul(next()));
    const std::size_t m = std::stoul(next());
    auto read_block = [&](std::vector<double>& v) {
        v.resize(m);
        for (std::size_t i = 0; i < m; ++i) v[i] = std::stod(next());
    };
    read_block(cfg.beta_r);
    read_block(cfg.beta_t);
    read_block(cfg.theta_r);
    read_block(cfg.theta_t);
    return cfg;
}

}  // namespace starfd
