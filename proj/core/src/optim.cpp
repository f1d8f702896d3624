#include "starfd/optim.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <optional>

namespace starfd {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

struct SumState {
    cxd si;  // combiner-output self-interference sum
    cxd dl;  // downlink projection sum
};

cxd polar_term(double beta, double theta, cxd unit) {
    return beta * cxd(std::cos(theta), std::sin(theta)) * unit;
}

SumState accumulate(const CascadeTerms& t, const StarConfig& cfg) {
    SumState s{t.base_si, t.base_dl};
    for (std::size_t i = 0; i < cfg.size(); ++i) {
        s.si += polar_term(cfg.beta_r[i], cfg.theta_r[i], t.a0[i]);
        s.dl += polar_term(cfg.beta_t[i], cfg.theta_t[i], t.b0[i]);
    }
    return s;
}

// Rate/residual pair without building a full Metrics.
struct QuickMetrics {
    double resid_db;
    double rate_dl;
};

QuickMetrics quick_metrics(const ScenarioSpec& spec, const SumState& s) {
    const double resid = std::norm(s.si) + spec.residual_floor;
    QuickMetrics q;
    q.resid_db = 10.0 * std::log10(std::max(resid, kTinyWatts) / spec.noise_fd);
    q.rate_dl = std::log2(1.0 + std::norm(s.dl) / spec.noise_bob);
    return q;
}

double quick_objective(const ScenarioSpec& spec, const SumState& s, const Objective& obj,
                       double lambda) {
    const QuickMetrics q = quick_metrics(spec, s);
    if (obj.kind == ObjectiveKind::max_rate_st_si) {
        return -q.rate_dl + lambda * softplus(q.resid_db - obj.epsilon_db);
    }
    return q.resid_db + lambda * softplus(obj.r_min - q.rate_dl);
}

// Best quantized phase from {floor, ceil} around the continuous optimum plus
// the current phase, ranked by `score` (smaller wins).
template <typename ScoreFn>
double pick_phase(double continuous, double current, unsigned levels, ScoreFn score) {
    if (levels == 0) return wrap_phase(continuous);
    const double step = kTwoPi / levels;
    const double w = wrap_phase(continuous);
    const double lo = std::floor(w / step) * step;
    const std::array<double, 3> cands = {current, quantize_phase(lo, levels),
                                         quantize_phase(lo + step, levels)};
    double best = cands[0];
    double best_score = score(cands[0]);
    for (std::size_t i = 1; i < cands.size(); ++i) {
        const double sc = score(cands[i]);
        if (sc < best_score) {
            best_score = sc;
            best = cands[i];
        }
    }
    return best;
}

}  // namespace

std::string to_string(const Objective& obj) {
    if (obj.kind == ObjectiveKind::max_rate_st_si) {
        return "max_rate_si:eps_db=" + format_double(obj.epsilon_db);
    }
    return "min_si:r_min=" + format_double(obj.r_min);
}

Objective objective_from_string(const std::string& s) {
    auto parse_tail = [&s](std::size_t pos) {
        return std::stod(s.substr(pos));
    };
    if (s.rfind("max_rate_si", 0) == 0) {
        Objective o = Objective::max_rate(3.0);
        const auto eq = s.find('=');
        if (eq != std::string::npos) o.epsilon_db = parse_tail(eq + 1);
        return o;
    }
    if (s.rfind("min_si", 0) == 0) {
        Objective o = Objective::min_si(8.0);
        const auto eq = s.find('=');
        if (eq != std::string::npos) o.r_min = parse_tail(eq + 1);
        return o;
    }
    throw config_error("unknown objective '" + s + "'");
}

double softplus(double x) {
    if (x > 35.0) return x;
    if (x < -35.0) return std::exp(x);
    return std::log1p(std::exp(x));
}

double scalarized_objective(const Metrics& m, const Objective& obj, double lambda) {
    if (obj.kind == ObjectiveKind::max_rate_st_si) {
        return -m.rate_dl + lambda * softplus(m.resid_si_db - obj.epsilon_db);
    }
    return m.resid_si_db + lambda * softplus(obj.r_min - m.rate_dl);
}

bool objective_feasible(const Metrics& m, const Objective& obj) {
    if (obj.kind == ObjectiveKind::max_rate_st_si) {
        return m.resid_si_db <= obj.epsilon_db + 1e-6 * std::max(1.0, std::abs(obj.epsilon_db));
    }
    return m.rate_dl >= obj.r_min - 1e-6 * std::max(1.0, std::abs(obj.r_min));
}

double primary_metric(const Metrics& m, const Objective& obj) {
    return obj.kind == ObjectiveKind::max_rate_st_si ? -m.rate_dl : m.resid_si_db;
}

ResultRank result_rank(const Metrics& m, const Objective& obj) {
    const bool feas = objective_feasible(m, obj);
    return {feas ? 0 : 1,
            feas ? primary_metric(m, obj) : scalarized_objective(m, obj, kLambdaFinal)};
}

CascadeTerms cascade_terms(const ChannelSet& ch, const LinkConfig& link) {
    const std::size_t m = ch.g1.rows();
    CascadeTerms t;
    t.base_si = vdot(link.v, cmat_mul(ch.h_d, link.w));
    t.base_dl = cmat_mul(ch.h_fb, link.w)(0, 0);
    t.a0.resize(m);
    t.b0.resize(m);
    const CMatrix g1w = cmat_mul(ch.g1, link.w);  // m × 1
    for (std::size_t i = 0; i < m; ++i) {
        cxd vg{};
        for (std::size_t r = 0; r < ch.g2r.rows(); ++r) vg += std::conj(link.v(r, 0)) * ch.g2r(r, i);
        t.a0[i] = vg * g1w(i, 0);
        t.b0[i] = ch.g2t(0, i) * g1w(i, 0);
    }
    return t;
}

CMatrix mrt_beamformer(const ChannelSet& ch, const StarConfig& cfg, double p_fd) {
    const CMatrix gh = cmat_hermitian(effective_dl_channel(ch, cfg));
    const double n2 = fro_norm_sq(gh);
    const std::size_t n = gh.rows();
    if (n2 <= 0.0) {
        // Surface fully reflective and the direct path blocked: any direction
        // is rate-equivalent, fall back to the uniform vector.
        return dft_beamformer(n, 0, p_fd);
    }
    return cmat_scale(gh, std::sqrt(p_fd / n2));
}

CMatrix zf_beamformer(const ChannelSet& ch, const StarConfig& cfg, const CMatrix& v, double p_fd) {
    const std::size_t n = ch.h_d.cols();
    if (n < 2) throw config_error("zf_beamformer: no ZF degrees of freedom");
    const CMatrix gh = cmat_hermitian(effective_dl_channel(ch, cfg));
    const CMatrix q = cmat_mul(cmat_hermitian(effective_si_channel(ch, cfg)), v);
    const double qn2 = fro_norm_sq(q);
    const double gn2 = fro_norm_sq(gh);
    if (gn2 <= 0.0) throw config_error("zf_beamformer: downlink in SI null space");
    CMatrix proj = gh;
    if (qn2 > 0.0) {
        const cxd coef = vdot(q, gh) / qn2;
        proj = cmat_sub(gh, cmat_scale(q, coef));
    }
    const double pn2 = fro_norm_sq(proj);
    if (pn2 <= gn2 * 1e-24) throw config_error("zf_beamformer: downlink in SI null space");
    return cmat_scale(proj, std::sqrt(p_fd / pn2));
}

CMatrix dft_beamformer(std::size_t n_tx, std::size_t col, double p_fd) {
    CMatrix w(n_tx, 1);
    const double a = std::sqrt(p_fd / static_cast<double>(n_tx));
    for (std::size_t j = 0; j < n_tx; ++j) {
        const double ph = kTwoPi * static_cast<double>(col * j) / static_cast<double>(n_tx);
        w(j, 0) = a * cxd(std::cos(ph), std::sin(ph));
    }
    return w;
}

std::vector<CMatrix> beamformer_codebook(const ChannelSet& ch, const StarConfig& cfg,
                                         const CMatrix& v, double p_fd, const Objective& obj) {
    std::vector<CMatrix> cands;
    cands.push_back(mrt_beamformer(ch, cfg, p_fd));
    if (obj.kind == ObjectiveKind::max_rate_st_si && ch.h_d.cols() >= 2) {
        try {
            cands.push_back(zf_beamformer(ch, cfg, v, p_fd));
        } catch (const config_error&) {
            // degenerate geometry for this config; candidate dropped
        }
    }
    cands.push_back(dft_beamformer(ch.h_d.cols(), 0, p_fd));
    if (ch.h_d.cols() >= 2) cands.push_back(dft_beamformer(ch.h_d.cols(), 1, p_fd));
    return cands;
}

StarConfig phase_cd_reflect(const ChannelSet& ch, const StarConfig& cfg_in, const LinkConfig& link,
                            int sweeps) {
    StarConfig cfg = cfg_in;
    const CascadeTerms t = cascade_terms(ch, link);
    for (int s = 0; s < sweeps; ++s) {
        cxd sum = t.base_si;
        for (std::size_t i = 0; i < cfg.size(); ++i) {
            sum += polar_term(cfg.beta_r[i], cfg.theta_r[i], t.a0[i]);
        }
        for (std::size_t i = 0; i < cfg.size(); ++i) {
            const double amp = cfg.beta_r[i] * std::abs(t.a0[i]);
            if (amp <= 0.0) continue;
            const cxd term = polar_term(cfg.beta_r[i], cfg.theta_r[i], t.a0[i]);
            const cxd c = sum - term;
            const double target = M_PI + std::arg(c) - std::arg(t.a0[i]);
            const double theta = pick_phase(target, cfg.theta_r[i], cfg.phase_levels,
                                            [&](double th) {
                                                return std::norm(c + polar_term(cfg.beta_r[i], th, t.a0[i]));
                                            });
            cfg.theta_r[i] = theta;
            sum = c + polar_term(cfg.beta_r[i], theta, t.a0[i]);
        }
    }
    return cfg;
}

StarConfig phase_cd_transmit(const ChannelSet& ch, const StarConfig& cfg_in, const LinkConfig& link,
                             int sweeps) {
    StarConfig cfg = cfg_in;
    const CascadeTerms t = cascade_terms(ch, link);
    for (int s = 0; s < sweeps; ++s) {
        cxd sum = t.base_dl;
        for (std::size_t i = 0; i < cfg.size(); ++i) {
            sum += polar_term(cfg.beta_t[i], cfg.theta_t[i], t.b0[i]);
        }
        for (std::size_t i = 0; i < cfg.size(); ++i) {
            const double amp = cfg.beta_t[i] * std::abs(t.b0[i]);
            if (amp <= 0.0) continue;
            const cxd term = polar_term(cfg.beta_t[i], cfg.theta_t[i], t.b0[i]);
            const cxd c = sum - term;
            const double target = std::arg(c) - std::arg(t.b0[i]);
            const double theta = pick_phase(target, cfg.theta_t[i], cfg.phase_levels,
                                            [&](double th) {
                                                // maximize the aligned magnitude
                                                return -std::norm(c + polar_term(cfg.beta_t[i], th, t.b0[i]));
                                            });
            cfg.theta_t[i] = theta;
            sum = c + polar_term(cfg.beta_t[i], theta, t.b0[i]);
        }
    }
    return cfg;
}

StarConfig es_amplitude_step(const ScenarioSpec& spec, const ChannelSet& ch,
                             const StarConfig& cfg_in, const LinkConfig& link,
                             const Objective& obj, int grid, double lambda) {
    if (cfg_in.mode != StarMode::es) {
        throw config_error("es_amplitude_step: amplitude step undefined for MS");
    }
    if (grid < 2) throw config_error("es_amplitude_step: grid must be >= 2");
    StarConfig cfg = cfg_in;
    const CascadeTerms t = cascade_terms(ch, link);
    SumState sum = accumulate(t, cfg);
    const double step = (M_PI / 2.0) / static_cast<double>(grid - 1);
    for (std::size_t i = 0; i < cfg.size(); ++i) {
        const cxd ar = polar_term(1.0, cfg.theta_r[i], t.a0[i]);
        const cxd bt = polar_term(1.0, cfg.theta_t[i], t.b0[i]);
        const cxd si_c = sum.si - cfg.beta_r[i] * ar;
        const cxd dl_c = sum.dl - cfg.beta_t[i] * bt;
        auto eval_split = [&](double br, double btr) {
            const SumState s{si_c + br * ar, dl_c + btr * bt};
            return quick_objective(spec, s, obj, lambda);
        };
        double best_br = cfg.beta_r[i];
        double best_bt = cfg.beta_t[i];
        double best_j = eval_split(best_br, best_bt);
        for (int k = 0; k < grid; ++k) {
            const double psi = k == grid - 1 ? M_PI / 2.0 : static_cast<double>(k) * step;
            double br, btr;
            es_amplitudes(psi, br, btr);
            const double j = eval_split(br, btr);
            if (j < best_j) {
                best_j = j;
                best_br = br;
                best_bt = btr;
            }
        }
        cfg.beta_r[i] = best_br;
        cfg.beta_t[i] = best_bt;
        sum.si = si_c + best_br * ar;
        sum.dl = dl_c + best_bt * bt;
    }
    return cfg;
}

StarConfig ms_flip_pass(const ScenarioSpec& spec, const ChannelSet& ch, const StarConfig& cfg_in,
                        const LinkConfig& link, const Objective& obj, double lambda) {
    if (cfg_in.mode != StarMode::ms) {
        throw config_error("ms_flip_pass: flip pass undefined for ES");
    }
    StarConfig cfg = cfg_in;
    const CascadeTerms t = cascade_terms(ch, link);
    SumState sum = accumulate(t, cfg);
    double j_cur = quick_objective(spec, sum, obj, lambda);
    for (std::size_t i = 0; i < cfg.size(); ++i) {
        const bool reflecting = cfg.beta_r[i] == 1.0;
        SumState cand = sum;
        double new_theta;
        if (reflecting) {
            // try transmit: drop the reflect term, add a phase-optimized
            // transmit term
            cand.si -= polar_term(1.0, cfg.theta_r[i], t.a0[i]);
            const double target = std::arg(cand.dl) - std::arg(t.b0[i]);
            new_theta = pick_phase(target, cfg.theta_t[i], cfg.phase_levels, [&](double th) {
                return -std::norm(cand.dl + polar_term(1.0, th, t.b0[i]));
            });
            cand.dl += polar_term(1.0, new_theta, t.b0[i]);
        } else {
            cand.dl -= polar_term(1.0, cfg.theta_t[i], t.b0[i]);
            const double target = M_PI + std::arg(cand.si) - std::arg(t.a0[i]);
            new_theta = pick_phase(target, cfg.theta_r[i], cfg.phase_levels, [&](double th) {
                return std::norm(cand.si + polar_term(1.0, th, t.a0[i]));
            });
            cand.si += polar_term(1.0, new_theta, t.a0[i]);
        }
        const double j_new = quick_objective(spec, cand, obj, lambda);
        if (j_new < j_cur) {
            cfg.beta_r[i] = reflecting ? 0.0 : 1.0;
            cfg.beta_t[i] = reflecting ? 1.0 : 0.0;
            if (reflecting) {
                cfg.theta_t[i] = new_theta;
            } else {
                cfg.theta_r[i] = new_theta;
            }
            sum = cand;
            j_cur = j_new;
        }
    }
    return cfg;
}

namespace {

struct BestTracker {
    bool have = false;
    ResultRank rank;
    StarConfig cfg;
    LinkConfig link;
    Metrics metrics;

    void offer(const ScenarioSpec&, const Objective& obj, const Metrics& m, const StarConfig& c,
               const LinkConfig& l) {
        const ResultRank r = result_rank(m, obj);
        if (!have || r < rank) {
            have = true;
            rank = r;
            cfg = c;
            link = l;
            metrics = m;
        }
    }
};

StarConfig initial_config(const ScenarioSpec& spec) {
    std::vector<double> split(spec.n_elems), zr(spec.n_elems, 0.0), zt(spec.n_elems, 0.0);
    for (std::size_t i = 0; i < spec.n_elems; ++i) {
        split[i] = spec.mode == StarMode::es ? M_PI / 4.0 : (i % 2 == 0 ? M_PI / 2.0 : 0.0);
    }
    return project(split, zr, zt, spec.mode, spec.phase_levels);
}

// Fixed-slot view of the codebook so enumeration can count visits even when
// a ZF slot is degenerate for a particular config.
std::size_t nominal_codebook_size(const Objective& obj, std::size_t n_tx) {
    std::size_t n = 2;  // MRT + DFT0
    if (n_tx >= 2) ++n;
    if (obj.kind == ObjectiveKind::max_rate_st_si && n_tx >= 2) ++n;
    return n;
}

CMatrix codebook_entry(std::size_t idx, const ChannelSet& ch, const StarConfig& cfg,
                       const CMatrix& v, double p_fd, const Objective& obj) {
    const std::size_t n_tx = ch.h_d.cols();
    const bool with_zf = obj.kind == ObjectiveKind::max_rate_st_si && n_tx >= 2;
    if (idx == 0) return mrt_beamformer(ch, cfg, p_fd);
    if (with_zf && idx == 1) return zf_beamformer(ch, cfg, v, p_fd);
    const std::size_t dft = idx - (with_zf ? 2 : 1);
    return dft_beamformer(n_tx, dft, p_fd);
}

std::vector<CMatrix> data_beamformer_candidates(const ChannelSet& ch, const StarConfig& cfg,
                                                double p_fd) {
    std::vector<CMatrix> cands;
    cands.push_back(mrt_beamformer(ch, cfg, p_fd));
    cands.push_back(dft_beamformer(ch.h_d.cols(), 0, p_fd));
    if (ch.h_d.cols() >= 2) cands.push_back(dft_beamformer(ch.h_d.cols(), 1, p_fd));
    return cands;
}

std::vector<unsigned> oracle_encoding(const StarConfig& cfg, unsigned levels, std::size_t cb_idx) {
    std::vector<unsigned> enc;
    enc.reserve(cfg.size() * 3 + 1);
    const double step = kTwoPi / levels;
    for (std::size_t i = 0; i < cfg.size(); ++i) {
        enc.push_back(cfg.beta_r[i] == 1.0 ? 0u : 1u);
        enc.push_back(static_cast<unsigned>(std::lround(cfg.theta_r[i] / step)) % levels);
        enc.push_back(static_cast<unsigned>(std::lround(cfg.theta_t[i] / step)) % levels);
    }
    enc.push_back(static_cast<unsigned>(cb_idx));
    return enc;
}

}  // namespace

OptResult enumerate_oracle(const ScenarioSpec& spec, const ChannelSet& ch, const Objective& obj) {
    const unsigned L = spec.phase_levels;
    if (spec.mode != StarMode::ms || (L != 2 && L != 4) || spec.n_elems > 4 || spec.n_tx > 2) {
        throw config_error("enumerate_oracle: instance too large (needs MS, L in {2,4}, M <= 4, "
                           "n_tx <= 2; got mode=" + std::string(to_string(spec.mode)) +
                           " L=" + std::to_string(L) + " M=" + std::to_string(spec.n_elems) +
                           " n_tx=" + std::to_string(spec.n_tx) + ")");
    }
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t m = spec.n_elems;
    const unsigned states = 2 * L * L;
    const double step = kTwoPi / L;

    LinkConfig link;
    link.v = mrc_combiner(ch);

    OptResult best;
    ResultRank best_rank;
    std::vector<unsigned> best_enc;
    std::uint64_t iters = 0;

    std::vector<unsigned> odo(m, 0);
    StarConfig cfg;
    cfg.mode = StarMode::ms;
    cfg.phase_levels = L;
    cfg.beta_r.resize(m);
    cfg.beta_t.resize(m);
    cfg.theta_r.resize(m);
    cfg.theta_t.resize(m);

    bool done = false;
    while (!done) {
        for (std::size_t i = 0; i < m; ++i) {
            const unsigned e = odo[i];
            const bool reflect = (e / (L * L)) == 0;
            cfg.beta_r[i] = reflect ? 1.0 : 0.0;
            cfg.beta_t[i] = reflect ? 0.0 : 1.0;
            cfg.theta_r[i] = static_cast<double>((e / L) % L) * step;
            cfg.theta_t[i] = static_cast<double>(e % L) * step;
        }
        const std::size_t cb_n = nominal_codebook_size(obj, spec.n_tx);
        for (std::size_t cb = 0; cb < cb_n; ++cb) {
            ++iters;
            CMatrix w;
            try {
                w = codebook_entry(cb, ch, cfg, link.v, spec.p_fd, obj);
            } catch (const config_error&) {
                continue;  // degenerate slot for this config, still visited
            }
            LinkConfig cand{std::move(w), link.v};
            const Metrics met = evaluate(spec, ch, cfg, cand);
            const ResultRank r = result_rank(met, obj);
            bool take = best_enc.empty() || r < best_rank;
            if (!take && r == best_rank) {
                take = oracle_encoding(cfg, L, cb) < best_enc;
            }
            if (take) {
                best_rank = r;
                best_enc = oracle_encoding(cfg, L, cb);
                best.cfg = cfg;
                best.link = cand;
                best.metrics = met;
                best.feasible = r.infeasible == 0;
            }
        }
        // odometer: element m-1 is least significant
        done = true;
        for (std::size_t i = m; i-- > 0;) {
            if (++odo[i] < states) {
                done = false;
                break;
            }
            odo[i] = 0;
        }
    }
    best.iters = iters;
    best.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return best;
}

OptResult random_search(const ScenarioSpec& spec, const ChannelSet& ch, const Objective& obj,
                        std::uint64_t budget, Rng& rng) {
    if (budget < 1) throw config_error("random_search: budget must be >= 1");
    const auto t0 = std::chrono::steady_clock::now();
    LinkConfig link;
    link.v = mrc_combiner(ch);

    const std::size_t m = spec.n_elems;
    std::vector<double> split(m), tr(m), tt(m);

    OptResult best;
    ResultRank best_rank;
    bool have = false;
    for (std::uint64_t b = 0; b < budget; ++b) {
        for (std::size_t i = 0; i < m; ++i) split[i] = rng.next_unit() * (M_PI / 2.0);
        for (std::size_t i = 0; i < m; ++i) tr[i] = rng.next_unit() * kTwoPi;
        for (std::size_t i = 0; i < m; ++i) tt[i] = rng.next_unit() * kTwoPi;
        const StarConfig cfg = project(split, tr, tt, spec.mode, spec.phase_levels);
        const std::size_t cb_n = nominal_codebook_size(obj, spec.n_tx);
        const std::size_t cb = static_cast<std::size_t>(rng.next_u64() % cb_n);
        CMatrix w;
        try {
            w = codebook_entry(cb, ch, cfg, link.v, spec.p_fd, obj);
        } catch (const config_error&) {
            w = mrt_beamformer(ch, cfg, spec.p_fd);  // degenerate slot falls back
        }
        LinkConfig cand{std::move(w), link.v};
        const Metrics met = evaluate(spec, ch, cfg, cand);
        const ResultRank r = result_rank(met, obj);
        if (!have || r < best_rank) {
            have = true;
            best_rank = r;
            best.cfg = cfg;
            best.link = cand;
            best.metrics = met;
            best.feasible = r.infeasible == 0;
        }
    }
    best.iters = budget;
    best.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return best;
}

OptResult alternating_optimize(const ScenarioSpec& spec, const ChannelSet& ch, const Objective& obj,
                               const OptimOptions& opts) {
    const auto t0 = std::chrono::steady_clock::now();
    StarConfig cfg = initial_config(spec);
    LinkConfig link;
    link.v = mrc_combiner(ch);
    link.w = mrt_beamformer(ch, cfg, spec.p_fd);

    BestTracker best;
    best.offer(spec, obj, evaluate(spec, ch, cfg, link), cfg, link);

    static constexpr std::array<double, 4> kLambdas = {1.0, 10.0, 100.0, 1000.0};
    std::uint64_t outer_total = 0;
    for (double lambda : kLambdas) {
        double prev_j = scalarized_objective(evaluate(spec, ch, cfg, link), obj, lambda);
        while (outer_total < static_cast<std::uint64_t>(opts.max_outer)) {
            ++outer_total;
            cfg = phase_cd_reflect(ch, cfg, link, opts.sweeps);
            cfg = phase_cd_transmit(ch, cfg, link, opts.sweeps);
            if (spec.mode == StarMode::es) {
                cfg = es_amplitude_step(spec, ch, cfg, link, obj, opts.grid, lambda);
            } else {
                cfg = ms_flip_pass(spec, ch, cfg, link, obj, lambda);
            }

            // beamformer update: keep the current vector unless a candidate
            // strictly improves the scalarized objective. The surface is the
            // cancellation agent here, so the candidates serve the data
            // links only; a ZF beamformer would null the combiner-output SI
            // regardless of the surface and make the element count moot.
            double j_w = scalarized_objective(evaluate(spec, ch, cfg, link), obj, lambda);
            for (const CMatrix& w : data_beamformer_candidates(ch, cfg, spec.p_fd)) {
                LinkConfig cand{w, link.v};
                const double j = scalarized_objective(evaluate(spec, ch, cfg, cand), obj, lambda);
                if (j < j_w) {
                    j_w = j;
                    link = cand;
                }
            }

            const Metrics met = evaluate(spec, ch, cfg, link);
            best.offer(spec, obj, met, cfg, link);
            const double j = scalarized_objective(met, obj, lambda);
            if (std::abs(prev_j - j) <= opts.tol * std::max(1.0, std::abs(prev_j))) {
                prev_j = j;
                break;
            }
            prev_j = j;
        }
    }

    OptResult res;
    res.cfg = best.cfg;
    res.link = best.link;
    res.metrics = best.metrics;
    res.feasible = best.rank.infeasible == 0;
    res.iters = outer_total;
    res.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

}  // namespace starfd
