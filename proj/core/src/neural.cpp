#include "starfd/neural.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace starfd {

namespace {

double activate(Activation a, double x) {
    return a == Activation::tanh_sat ? std::tanh(x) : (x > 0.0 ? x : 0.0);
}

double activate_grad(Activation a, double y_post) {
    // both activations allow the derivative from the post-activation value
    return a == Activation::tanh_sat ? 1.0 - y_post * y_post : (y_post > 0.0 ? 1.0 : 0.0);
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// forward pass keeping post-activation values per layer (index 0 = input)
void forward_acts(const Mlp& net, std::span<const double> x,
                  std::vector<std::vector<double>>& acts) {
    acts.resize(net.n_layers() + 1);
    acts[0].assign(x.begin(), x.end());
    for (std::size_t l = 0; l < net.n_layers(); ++l) {
        const std::size_t in = net.dims[l];
        const std::size_t out = net.dims[l + 1];
        acts[l + 1].assign(net.biases[l].begin(), net.biases[l].end());
        const double* wl = net.weights[l].data();
        const double* xi = acts[l].data();
        double* yo = acts[l + 1].data();
        for (std::size_t o = 0; o < out; ++o) {
            double acc = yo[o];
            const double* row = wl + o * in;
            for (std::size_t i = 0; i < in; ++i) acc += row[i] * xi[i];
            yo[o] = acc;
        }
        if (l + 1 < net.n_layers()) {
            for (std::size_t o = 0; o < out; ++o) yo[o] = activate(net.acts[l], yo[o]);
        }
    }
}

}  // namespace

Mlp make_mlp(const std::vector<std::size_t>& dims, Activation hidden_act, Rng& rng) {
    if (dims.size() < 2) throw config_error("make_mlp: need at least input and output dims");
    Mlp net;
    net.dims = dims;
    net.acts.assign(dims.size() - 2, hidden_act);
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const std::size_t in = dims[l];
        const std::size_t out = dims[l + 1];
        std::vector<double> w(in * out);
        const double s = std::sqrt(2.0 / static_cast<double>(in));
        for (std::size_t i = 0; i < w.size(); i += 2) {
            double z0, z1;
            rng.next_gauss_pair(z0, z1);
            w[i] = s * z0;
            if (i + 1 < w.size()) w[i + 1] = s * z1;
        }
        net.weights.push_back(std::move(w));
        net.biases.emplace_back(out, 0.0);
    }
    return net;
}

std::vector<double> mlp_forward(const Mlp& net, std::span<const double> x) {
    if (x.size() != net.dims.front()) throw config_error("mlp_forward: input length mismatch");
    std::vector<std::vector<double>> acts;
    forward_acts(net, x, acts);
    return acts.back();
}

MlpGrads mlp_grad(const Mlp& net, std::span<const double> x, std::span<const double> upstream) {
    if (x.size() != net.dims.front()) throw config_error("mlp_grad: input length mismatch");
    if (upstream.size() != net.dims.back()) throw config_error("mlp_grad: upstream length mismatch");
    std::vector<std::vector<double>> acts;
    forward_acts(net, x, acts);

    MlpGrads g;
    g.weights.resize(net.n_layers());
    g.biases.resize(net.n_layers());

    std::vector<double> delta(upstream.begin(), upstream.end());
    for (std::size_t l = net.n_layers(); l-- > 0;) {
        const std::size_t in = net.dims[l];
        const std::size_t out = net.dims[l + 1];
        if (l + 1 < net.n_layers()) {
            for (std::size_t o = 0; o < out; ++o) {
                delta[o] *= activate_grad(net.acts[l], acts[l + 1][o]);
            }
        }
        g.weights[l].resize(in * out);
        g.biases[l] = delta;
        const double* xi = acts[l].data();
        for (std::size_t o = 0; o < out; ++o) {
            double* row = g.weights[l].data() + o * in;
            const double d = delta[o];
            for (std::size_t i = 0; i < in; ++i) row[i] = d * xi[i];
        }
        std::vector<double> prev(in, 0.0);
        const double* wl = net.weights[l].data();
        for (std::size_t o = 0; o < out; ++o) {
            const double d = delta[o];
            const double* row = wl + o * in;
            for (std::size_t i = 0; i < in; ++i) prev[i] += d * row[i];
        }
        delta = std::move(prev);
    }
    g.input = std::move(delta);
    return g;
}

FeatureCodec FeatureCodec::for_family(const ScenarioSpec& spec) {
    FeatureCodec c;
    c.n_tx = spec.n_tx;
    c.n_rx = spec.n_rx;
    c.m = spec.n_elems;
    c.mode = spec.mode;
    c.phase_levels = spec.phase_levels;
    c.p_fd = spec.p_fd;
    auto inv_std = [](double gain) { return 1.0 / std::sqrt(std::max(gain, 1e-300)); };
    const double g_sr = pathloss_lin(spec.d_sr, spec.pl0_db, spec.alpha_ris);
    const double g_rb = pathloss_lin(spec.d_fb - spec.d_sr, spec.pl0_db, spec.alpha_ris);
    c.s_hd = inv_std(std::pow(10.0, -1.5));
    c.s_g1 = inv_std(g_sr);
    c.s_g2r = inv_std(g_sr);
    c.s_g2t = inv_std(g_rb);
    c.s_ha = inv_std(pathloss_lin(spec.d_af, spec.pl0_db, spec.alpha_nlos));
    c.s_hfb = spec.direct_fb_blocked
                  ? 1.0
                  : inv_std(pathloss_lin(spec.d_fb, spec.pl0_db, spec.alpha_nlos));
    c.s_w = 1.0 / std::sqrt(spec.p_fd / static_cast<double>(spec.n_tx));
    return c;
}

std::size_t FeatureCodec::env_dim() const {
    // h_d, g1, g2r, g2t, h_a, h_fb as interleaved re/im
    return 2 * (n_rx * n_tx + m * n_tx + n_rx * m + m + n_rx + n_tx);
}

namespace {
void push_block(std::vector<double>& out, const CMatrix& m, double scale) {
    for (std::size_t i = 0; i < m.size(); ++i) {
        out.push_back(m.data()[i].real() * scale);
        out.push_back(m.data()[i].imag() * scale);
    }
}
}  // namespace

std::vector<double> FeatureCodec::encode_env(const ChannelSet& ch) const {
    std::vector<double> f;
    f.reserve(env_dim());
    push_block(f, ch.h_d, s_hd);
    push_block(f, ch.g1, s_g1);
    push_block(f, ch.g2r, s_g2r);
    push_block(f, ch.g2t, s_g2t);
    push_block(f, ch.h_a, s_ha);
    push_block(f, ch.h_fb, s_hfb);
    return f;
}

std::vector<double> FeatureCodec::encode_cfg(const StarConfig& cfg, const LinkConfig& link) const {
    std::vector<double> f;
    f.reserve(cfg_dim());
    for (std::size_t i = 0; i < m; ++i) {
        if (mode == StarMode::es) {
            f.push_back(std::atan2(cfg.beta_t[i], cfg.beta_r[i]));
        } else {
            f.push_back(cfg.beta_r[i] * cfg.beta_r[i]);
        }
        f.push_back(std::cos(cfg.theta_r[i]));
        f.push_back(std::sin(cfg.theta_r[i]));
        f.push_back(std::cos(cfg.theta_t[i]));
        f.push_back(std::sin(cfg.theta_t[i]));
    }
    for (std::size_t j = 0; j < n_tx; ++j) {
        f.push_back(link.w(j, 0).real() * s_w);
        f.push_back(link.w(j, 0).imag() * s_w);
    }
    return f;
}

void FeatureCodec::decode_cfg(std::span<const double> feat, StarConfig& cfg, CMatrix& w) const {
    if (feat.size() != cfg_dim()) throw config_error("decode_cfg: feature length mismatch");
    std::vector<double> split(m), tr(m), tt(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double* e = feat.data() + 5 * i;
        if (mode == StarMode::es) {
            split[i] = e[0];
        } else {
            split[i] = e[0] >= 0.5 ? M_PI / 2.0 : 0.0;
        }
        tr[i] = std::atan2(e[2], e[1]);
        tt[i] = std::atan2(e[4], e[3]);
    }
    cfg = project(split, tr, tt, mode, phase_levels);

    w = CMatrix(n_tx, 1);
    double n2 = 0.0;
    for (std::size_t j = 0; j < n_tx; ++j) {
        const double re = feat[5 * m + 2 * j];
        const double im = feat[5 * m + 2 * j + 1];
        w(j, 0) = cxd(re, im);
        n2 += re * re + im * im;
    }
    if (n2 < 1e-24) {
        w = dft_beamformer(n_tx, 0, p_fd);
    } else {
        w = cmat_scale(w, std::sqrt(p_fd / n2));
    }
}

std::vector<double> FeatureCodec::soft_project(std::span<const double> raw) const {
    if (raw.size() != cfg_dim()) throw config_error("soft_project: raw length mismatch");
    std::vector<double> f(raw.size());
    for (std::size_t i = 0; i < m; ++i) {
        const double* r = raw.data() + 5 * i;
        double* o = f.data() + 5 * i;
        o[0] = mode == StarMode::es ? (M_PI / 2.0) * sigmoid(r[0]) : sigmoid(r[0]);
        for (int p = 0; p < 2; ++p) {
            const double c = r[1 + 2 * p];
            const double s = r[2 + 2 * p];
            const double inv = 1.0 / std::sqrt(c * c + s * s + 1e-9);
            o[1 + 2 * p] = c * inv;
            o[2 + 2 * p] = s * inv;
        }
    }
    double n2 = 1e-9;
    for (std::size_t j = 0; j < 2 * n_tx; ++j) n2 += raw[5 * m + j] * raw[5 * m + j];
    const double wi = std::sqrt(p_fd / n2) * s_w;
    for (std::size_t j = 0; j < 2 * n_tx; ++j) f[5 * m + j] = raw[5 * m + j] * wi;
    return f;
}

std::vector<double> FeatureCodec::soft_project_backprop(std::span<const double> raw,
                                                        std::span<const double> upstream) const {
    if (raw.size() != cfg_dim() || upstream.size() != cfg_dim()) {
        throw config_error("soft_project_backprop: length mismatch");
    }
    std::vector<double> g(raw.size(), 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        const double* r = raw.data() + 5 * i;
        const double* u = upstream.data() + 5 * i;
        double* gi = g.data() + 5 * i;
        const double sg = sigmoid(r[0]);
        const double dsg = sg * (1.0 - sg);
        gi[0] = u[0] * dsg * (mode == StarMode::es ? M_PI / 2.0 : 1.0);
        for (int p = 0; p < 2; ++p) {
            const double c = r[1 + 2 * p];
            const double s = r[2 + 2 * p];
            const double n = c * c + s * s + 1e-9;
            const double inv = 1.0 / std::sqrt(n);
            const double inv3 = inv / n;
            const double uc = u[1 + 2 * p];
            const double us = u[2 + 2 * p];
            gi[1 + 2 * p] = uc * (inv - c * c * inv3) - us * c * s * inv3;
            gi[2 + 2 * p] = us * (inv - s * s * inv3) - uc * c * s * inv3;
        }
    }
    double n2 = 1e-9;
    const std::size_t base = 5 * m;
    for (std::size_t j = 0; j < 2 * n_tx; ++j) n2 += raw[base + j] * raw[base + j];
    const double k = std::sqrt(p_fd / n2) * s_w;
    double dot = 0.0;
    for (std::size_t j = 0; j < 2 * n_tx; ++j) dot += upstream[base + j] * raw[base + j];
    for (std::size_t j = 0; j < 2 * n_tx; ++j) {
        g[base + j] = k * (upstream[base + j] - raw[base + j] * dot / n2);
    }
    return g;
}

Dataset sample_dataset(const ScenarioSpec& family, std::size_t n, Rng& rng) {
    if (n < 1) throw config_error("sample_dataset: n must be >= 1");
    const FeatureCodec codec = FeatureCodec::for_family(family);
    Dataset ds;
    ds.samples.reserve(n);
    const std::size_t m = family.n_elems;
    std::vector<double> split(m), tr(m), tt(m);
    for (std::size_t k = 0; k < n; ++k) {
        Sample s;
        s.scenario_seed = rng.next_u64();
        Rng sr(s.scenario_seed);
        const ChannelSet ch = gen_channels(family, sr);
        for (std::size_t i = 0; i < m; ++i) split[i] = sr.next_unit() * (M_PI / 2.0);
        for (std::size_t i = 0; i < m; ++i) tr[i] = sr.next_unit() * 2.0 * M_PI;
        for (std::size_t i = 0; i < m; ++i) tt[i] = sr.next_unit() * 2.0 * M_PI;
        s.star = project(split, tr, tt, family.mode, family.phase_levels);

        CMatrix w = cgauss_sample(sr, family.n_tx, 1, 1.0);
        const double n2 = fro_norm_sq(w);
        s.w = n2 < 1e-24 ? dft_beamformer(family.n_tx, 0, family.p_fd)
                         : cmat_scale(w, std::sqrt(family.p_fd / n2));

        LinkConfig link{s.w, mrc_combiner(ch)};
        const Metrics met = evaluate(family, ch, s.star, link);
        s.rate_dl = met.rate_dl;
        s.resid_si_db = met.resid_si_db;
        s.env = codec.encode_env(ch);
        s.cfg = codec.encode_cfg(s.star, link);
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

namespace {

// Adam optimizer state for one Mlp.
struct AdamState {
    std::vector<std::vector<double>> mw, vw, mb, vb;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    std::uint64_t t = 0;

    explicit AdamState(const Mlp& net) {
        for (std::size_t l = 0; l < net.n_layers(); ++l) {
            mw.emplace_back(net.weights[l].size(), 0.0);
            vw.emplace_back(net.weights[l].size(), 0.0);
            mb.emplace_back(net.biases[l].size(), 0.0);
            vb.emplace_back(net.biases[l].size(), 0.0);
        }
    }

    void step(Mlp& net, const MlpGrads& g, double lr) {
        ++t;
        const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
        const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
        for (std::size_t l = 0; l < net.n_layers(); ++l) {
            auto upd = [&](std::vector<double>& p, const std::vector<double>& gr,
                           std::vector<double>& m1, std::vector<double>& m2) {
                for (std::size_t i = 0; i < p.size(); ++i) {
                    m1[i] = beta1 * m1[i] + (1.0 - beta1) * gr[i];
                    m2[i] = beta2 * m2[i] + (1.0 - beta2) * gr[i] * gr[i];
                    p[i] -= lr * (m1[i] / bc1) / (std::sqrt(m2[i] / bc2) + eps);
                }
            };
            upd(net.weights[l], g.weights[l], mw[l], vw[l]);
            upd(net.biases[l], g.biases[l], mb[l], vb[l]);
        }
    }
};

void add_grads(MlpGrads& acc, const MlpGrads& g) {
    for (std::size_t l = 0; l < acc.weights.size(); ++l) {
        for (std::size_t i = 0; i < acc.weights[l].size(); ++i) acc.weights[l][i] += g.weights[l][i];
        for (std::size_t i = 0; i < acc.biases[l].size(); ++i) acc.biases[l][i] += g.biases[l][i];
    }
}

MlpGrads zero_grads(const Mlp& net) {
    MlpGrads g;
    for (std::size_t l = 0; l < net.n_layers(); ++l) {
        g.weights.emplace_back(net.weights[l].size(), 0.0);
        g.biases.emplace_back(net.biases[l].size(), 0.0);
    }
    return g;
}

}  // namespace

std::pair<Critic, TrainReport> train_critic(const Dataset& ds, const FeatureCodec& codec,
                                            const TrainHyper& hyper, std::uint64_t seed) {
    if (ds.samples.empty()) throw config_error("train_critic: empty dataset");
    const std::size_t n = ds.samples.size();
    std::size_t n_val = static_cast<std::size_t>(static_cast<double>(n) * hyper.val_fraction);
    if (n_val >= n) n_val = n - 1;
    const std::size_t n_train = n - n_val;

    TrainReport report;
    report.seed = seed;
    report.n_train = n_train;
    report.n_val = n_val;

    Critic critic;
    for (int k = 0; k < 2; ++k) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n_train; ++i) {
            const Sample& s = ds.samples[i];
            mean += k == 0 ? s.rate_dl : s.resid_si_db;
        }
        mean /= static_cast<double>(n_train);
        double var = 0.0;
        for (std::size_t i = 0; i < n_train; ++i) {
            const Sample& s = ds.samples[i];
            const double d = (k == 0 ? s.rate_dl : s.resid_si_db) - mean;
            var += d * d;
        }
        var /= static_cast<double>(n_train);
        critic.label_mean[k] = mean;
        critic.label_scale[k] = std::max(std::sqrt(var), 1e-6);
    }

    std::vector<std::size_t> dims{codec.env_dim() + codec.cfg_dim()};
    dims.insert(dims.end(), hyper.hidden.begin(), hyper.hidden.end());
    dims.push_back(2);
    Rng rng(seed);
    critic.net = make_mlp(dims, Activation::relu, rng);
    AdamState adam(critic.net);

    std::vector<double> input(dims.front());
    std::vector<std::size_t> order(n_train);
    std::iota(order.begin(), order.end(), 0);

    auto fill_input = [&](const Sample& s) {
        std::copy(s.env.begin(), s.env.end(), input.begin());
        std::copy(s.cfg.begin(), s.cfg.end(), input.begin() + static_cast<long>(s.env.size()));
    };
    auto target = [&](const Sample& s, int k) {
        const double y = k == 0 ? s.rate_dl : s.resid_si_db;
        return (y - critic.label_mean[k]) / critic.label_scale[k];
    };

    const std::size_t batch = std::max<std::size_t>(1, hyper.batch);
    for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
        // Fisher-Yates on the run's own stream
        for (std::size_t i = n_train; i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(rng.next_u64() % i);
            std::swap(order[i - 1], order[j]);
        }
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < n_train; start += batch) {
            const std::size_t stop = std::min(start + batch, n_train);
            MlpGrads acc = zero_grads(critic.net);
            for (std::size_t bi = start; bi < stop; ++bi) {
                const Sample& s = ds.samples[order[bi]];
                fill_input(s);
                const auto out = mlp_forward(critic.net, input);
                double up[2];
                for (int k = 0; k < 2; ++k) {
                    const double err = out[k] - target(s, k);
                    epoch_loss += err * err;
                    up[k] = 2.0 * err / static_cast<double>(stop - start);
                }
                add_grads(acc, mlp_grad(critic.net, input, std::span<const double>(up, 2)));
            }
            adam.step(critic.net, acc, hyper.lr);
        }
        epoch_loss /= static_cast<double>(2 * n_train);
        report.epoch_losses.push_back(epoch_loss);
        if (!std::isfinite(epoch_loss)) throw training_diverged(report);
    }

    double val_loss = 0.0;
    for (std::size_t i = n_train; i < n; ++i) {
        const Sample& s = ds.samples[i];
        fill_input(s);
        const auto out = mlp_forward(critic.net, input);
        for (int k = 0; k < 2; ++k) {
            const double err = out[k] - target(s, k);
            val_loss += err * err;
        }
    }
    report.final_val_loss = n_val > 0 ? val_loss / static_cast<double>(2 * n_val)
                                      : report.epoch_losses.back();
    return {std::move(critic), std::move(report)};
}

std::pair<Mlp, TrainReport> train_generator(const Critic& critic, const FeatureCodec& codec,
                                            const ScenarioSpec& family, const Objective& obj,
                                            const TrainHyper& hyper, std::uint64_t seed) {
    const std::size_t env_d = codec.env_dim();
    const std::size_t cfg_d = codec.cfg_dim();
    if (critic.net.dims.front() != env_d + cfg_d) {
        throw config_error("train_generator: critic input layout mismatch");
    }

    TrainReport report;
    report.seed = seed;
    report.n_train = hyper.n_envs;
    report.n_val = 0;

    // pre-draw the training environments
    std::vector<std::vector<double>> envs;
    envs.reserve(hyper.n_envs);
    for (std::size_t i = 0; i < hyper.n_envs; ++i) {
        Rng er(Rng::derive(seed, {0xE17, i}));
        envs.push_back(codec.encode_env(gen_channels(family, er)));
    }

    std::vector<std::size_t> dims{env_d};
    dims.insert(dims.end(), hyper.hidden.begin(), hyper.hidden.end());
    dims.push_back(cfg_d);
    Rng rng(Rng::derive(seed, {0x6e4}));
    Mlp gen = make_mlp(dims, Activation::tanh_sat, rng);
    AdamState adam(gen);

    std::vector<std::size_t> order(hyper.n_envs);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> critic_in(env_d + cfg_d);

    const std::size_t batch = std::max<std::size_t>(1, hyper.batch);
    const std::size_t n_epochs = hyper.generator_epochs();
    for (std::size_t epoch = 0; epoch < n_epochs; ++epoch) {
        for (std::size_t i = hyper.n_envs; i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(rng.next_u64() % i);
            std::swap(order[i - 1], order[j]);
        }
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < hyper.n_envs; start += batch) {
            const std::size_t stop = std::min(start + batch, hyper.n_envs);
            MlpGrads acc = zero_grads(gen);
            for (std::size_t bi = start; bi < stop; ++bi) {
                const std::vector<double>& env = envs[order[bi]];
                const auto raw = mlp_forward(gen, env);
                const auto cfg_feat = codec.soft_project(raw);
                std::copy(env.begin(), env.end(), critic_in.begin());
                std::copy(cfg_feat.begin(), cfg_feat.end(),
                          critic_in.begin() + static_cast<long>(env_d));
                const auto out = mlp_forward(critic.net, critic_in);
                const double rate = critic.label_mean[0] + critic.label_scale[0] * out[0];
                const double resid_db = critic.label_mean[1] + critic.label_scale[1] * out[1];

                double loss, d_rate, d_resid;
                if (obj.kind == ObjectiveKind::max_rate_st_si) {
                    loss = -rate + hyper.lambda * softplus(resid_db - obj.epsilon_db);
                    d_rate = -1.0;
                    d_resid = hyper.lambda * sigmoid(resid_db - obj.epsilon_db);
                } else {
                    loss = resid_db + hyper.lambda * softplus(obj.r_min - rate);
                    d_rate = -hyper.lambda * sigmoid(obj.r_min - rate);
                    d_resid = 1.0;
                }
                epoch_loss += loss;

                const double inv_b = 1.0 / static_cast<double>(stop - start);
                const double up[2] = {d_rate * critic.label_scale[0] * inv_b,
                                      d_resid * critic.label_scale[1] * inv_b};
                const MlpGrads cg = mlp_grad(critic.net, critic_in, std::span<const double>(up, 2));
                const std::span<const double> cfg_up(cg.input.data() + env_d, cfg_d);
                const auto raw_up = codec.soft_project_backprop(raw, cfg_up);
                add_grads(acc, mlp_grad(gen, env, raw_up));
            }
            adam.step(gen, acc, hyper.lr);
        }
        epoch_loss /= static_cast<double>(hyper.n_envs);
        report.epoch_losses.push_back(epoch_loss);
        if (!std::isfinite(epoch_loss)) throw training_diverged(report);
    }
    report.final_val_loss = report.epoch_losses.back();
    return {std::move(gen), std::move(report)};
}

std::pair<StarConfig, LinkConfig> infer_config(const Mlp& generator, const FeatureCodec& codec,
                                               const ChannelSet& ch, const ScenarioSpec& spec) {
    const auto env = codec.encode_env(ch);
    const auto raw = mlp_forward(generator, env);
    const auto feat = codec.soft_project(raw);
    StarConfig cfg;
    CMatrix w;
    codec.decode_cfg(feat, cfg, w);
    (void)spec;
    LinkConfig link{std::move(w), mrc_combiner(ch)};
    return {std::move(cfg), std::move(link)};
}

namespace {

void write_net(std::ostream& os, const char* name, const Mlp& net) {
    os << "net " << name << ' ' << net.dims.size();
    for (auto d : net.dims) os << ' ' << d;
    os << '\n';
    os << "acts";
    for (auto a : net.acts) os << ' ' << (a == Activation::tanh_sat ? "tanh" : "relu");
    os << '\n';
    for (std::size_t l = 0; l < net.n_layers(); ++l) {
        os << "layer " << l << '\n';
        for (std::size_t i = 0; i < net.weights[l].size(); ++i) {
            os << net.weights[l][i] << (i + 1 == net.weights[l].size() ? '\n' : ' ');
        }
        for (std::size_t i = 0; i < net.biases[l].size(); ++i) {
            os << net.biases[l][i] << (i + 1 == net.biases[l].size() ? '\n' : ' ');
        }
    }
}

Mlp read_net(std::istream& is, const std::string& expect_name) {
    std::string tok, name;
    is >> tok >> name;
    if (tok != "net" || name != expect_name) {
        throw config_error("model: expected net " + expect_name);
    }
    std::size_t nd = 0;
    is >> nd;
    if (nd < 2) throw config_error("model: bad net dims");
    Mlp net;
    net.dims.resize(nd);
    for (auto& d : net.dims) is >> d;
    is >> tok;
    if (tok != "acts") throw config_error("model: expected acts");
    net.acts.resize(nd - 2);
    for (auto& a : net.acts) {
        is >> tok;
        a = tok == "tanh" ? Activation::tanh_sat : Activation::relu;
    }
    for (std::size_t l = 0; l + 1 < nd; ++l) {
        std::size_t idx = 0;
        is >> tok >> idx;
        if (tok != "layer" || idx != l) throw config_error("model: bad layer header");
        net.weights.emplace_back(net.dims[l] * net.dims[l + 1]);
        net.biases.emplace_back(net.dims[l + 1]);
        for (auto& x : net.weights.back()) is >> x;
        for (auto& x : net.biases.back()) is >> x;
    }
    if (!is) throw config_error("model: truncated net block");
    return net;
}

}  // namespace

std::string model_to_text(const ModelBundle& b) {
    std::ostringstream os;
    os.precision(17);
    os << "starfd-model v1\n";
    os << "objective " << to_string(b.objective) << '\n';
    os << "codec " << b.codec.n_tx << ' ' << b.codec.n_rx << ' ' << b.codec.m << ' '
       << to_string(b.codec.mode) << ' ' << b.codec.phase_levels << ' ' << b.codec.p_fd << ' '
       << b.codec.s_hd << ' ' << b.codec.s_g1 << ' ' << b.codec.s_g2r << ' ' << b.codec.s_g2t
       << ' ' << b.codec.s_ha << ' ' << b.codec.s_hfb << ' ' << b.codec.s_w << '\n';
    os << "labels " << b.critic.label_mean[0] << ' ' << b.critic.label_mean[1] << ' '
       << b.critic.label_scale[0] << ' ' << b.critic.label_scale[1] << '\n';
    write_net(os, "critic", b.critic.net);
    write_net(os, "generator", b.generator);
    os << "end\n";
    return os.str();
}

ModelBundle model_from_text(const std::string& text) {
    std::istringstream is(text);
    std::string tok, ver;
    is >> tok >> ver;
    if (tok != "starfd-model" || ver != "v1") {
        throw config_error("model: missing or unsupported version tag");
    }
    ModelBundle b;
    is >> tok;
    if (tok != "objective") throw config_error("model: expected objective");
    is >> tok;
    b.objective = objective_from_string(tok);
    is >> tok;
    if (tok != "codec") throw config_error("model: expected codec");
    std::string mode;
    is >> b.codec.n_tx >> b.codec.n_rx >> b.codec.m >> mode >> b.codec.phase_levels >>
        b.codec.p_fd >> b.codec.s_hd >> b.codec.s_g1 >> b.codec.s_g2r >> b.codec.s_g2t >>
        b.codec.s_ha >> b.codec.s_hfb >> b.codec.s_w;
    b.codec.mode = star_mode_from_string(mode);
    is >> tok;
    if (tok != "labels") throw config_error("model: expected labels");
    is >> b.critic.label_mean[0] >> b.critic.label_mean[1] >> b.critic.label_scale[0] >>
        b.critic.label_scale[1];
    b.critic.net = read_net(is, "critic");
    b.generator = read_net(is, "generator");
    is >> tok;
    if (tok != "end") throw config_error("model: missing end marker");
    return b;
}

void save_model(const ModelBundle& b, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("save_model: cannot open " + path);
    out << model_to_text(b);
    if (!out) throw config_error("save_model: write failed for " + path);
}

ModelBundle load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("load_model: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return model_from_text(ss.str());
}

}  // namespace starfd
