#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "starfd/channel.hpp"
#include "starfd/fdlink.hpp"
#include "starfd/numerics.hpp"
#include "starfd/optim.hpp"
#include "starfd/starris.hpp"

namespace starfd {

enum class Activation { tanh_sat, relu };

/// Plain fully-connected net, linear output layer. Weights are row-major
/// out×in per layer.
struct Mlp {
    std::vector<std::size_t> dims;
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
    std::vector<Activation> acts;  // one per hidden layer

    std::size_t n_layers() const { return weights.size(); }
};

/// Gaussian fan-in scaled initialization.
Mlp make_mlp(const std::vector<std::size_t>& dims, Activation hidden_act, Rng& rng);

std::vector<double> mlp_forward(const Mlp& net, std::span<const double> x);

struct MlpGrads {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
    std::vector<double> input;
};

/// Reverse-mode gradients of upstream^T * net(x) w.r.t. every weight, bias
/// and the input.
MlpGrads mlp_grad(const Mlp& net, std::span<const double> x, std::span<const double> upstream);

struct TrainReport {
    std::vector<double> epoch_losses;
    double final_val_loss = 0.0;
    std::size_t n_train = 0;
    std::size_t n_val = 0;
    std::uint64_t seed = 0;
};

struct training_diverged : std::runtime_error {
    TrainReport report;
    explicit training_diverged(TrainReport r)
        : std::runtime_error("training diverged: non-finite loss"), report(std::move(r)) {}
};

/// Fixed flat layout between (ChannelSet, StarConfig, LinkConfig) and real
/// feature vectors, plus per-block normalization derived from the scenario
/// family's pathloss budget. The config block stores, per element,
/// [split, cos theta_r, sin theta_r, cos theta_t, sin theta_t] where split is
/// the ES split angle or the MS reflect share, followed by the beamformer
/// entries as interleaved re/im.
struct FeatureCodec {
    std::size_t n_tx = 0;
    std::size_t n_rx = 0;
    std::size_t m = 0;
    StarMode mode = StarMode::es;
    unsigned phase_levels = 0;
    double p_fd = 1.0;
    double s_hd = 1.0, s_g1 = 1.0, s_g2r = 1.0, s_g2t = 1.0, s_ha = 1.0, s_hfb = 1.0, s_w = 1.0;

    static FeatureCodec for_family(const ScenarioSpec& spec);

    std::size_t env_dim() const;
    std::size_t cfg_dim() const { return 5 * m + 2 * n_tx; }

    std::vector<double> encode_env(const ChannelSet& ch) const;
    std::vector<double> encode_cfg(const StarConfig& cfg, const LinkConfig& link) const;

    /// Hard projection back to a feasible (StarConfig, w) pair.
    void decode_cfg(std::span<const double> feat, StarConfig& cfg, CMatrix& w) const;

    /// Differentiable map from unconstrained generator outputs onto the
    /// config-feature layout: sigmoid split, normalized phase pairs,
    /// power-normalized beamformer.
    std::vector<double> soft_project(std::span<const double> raw) const;

    /// Pullback of `upstream` through soft_project at `raw`.
    std::vector<double> soft_project_backprop(std::span<const double> raw,
                                              std::span<const double> upstream) const;
};

struct Sample {
    std::uint64_t scenario_seed = 0;
    std::vector<double> env;
    std::vector<double> cfg;
    StarConfig star;
    CMatrix w;
    double rate_dl = 0.0;
    double resid_si_db = 0.0;
};

struct Dataset {
    std::vector<Sample> samples;
};

/// n independent draws: fresh channels from the family, configs uniform over
/// the projected feasible space, labels from evaluate().
Dataset sample_dataset(const ScenarioSpec& family, std::size_t n, Rng& rng);

struct TrainHyper {
    std::vector<std::size_t> hidden{128, 128};
    std::size_t epochs = 200;
    double lr = 1e-3;
    std::size_t batch = 64;
    double lambda = 50.0;      // generator constraint weight
    std::size_t n_envs = 256;  // generator training environments
    double val_fraction = 0.1;  // critic hold-out share
    std::size_t gen_epochs = 0;  // generator epochs; 0 falls back to `epochs`

    std::size_t generator_epochs() const { return gen_epochs == 0 ? epochs : gen_epochs; }

    friend bool operator==(const TrainHyper&, const TrainHyper&) = default;
};

/// Surrogate regressor of [rate_dl, resid_si_db]; labels are standardized
/// inside, the scalers travel with the net.
struct Critic {
    Mlp net;
    double label_mean[2] = {0.0, 0.0};
    double label_scale[2] = {1.0, 1.0};
};

std::pair<Critic, TrainReport> train_critic(const Dataset& ds, const FeatureCodec& codec,
                                            const TrainHyper& hyper, std::uint64_t seed);

/// Trains the configuration generator through the frozen critic: loss is the
/// critic-predicted scalarized objective of the soft-projected output. Only
/// generator weights move.
std::pair<Mlp, TrainReport> train_generator(const Critic& critic, const FeatureCodec& codec,
                                            const ScenarioSpec& family, const Objective& obj,
                                            const TrainHyper& hyper, std::uint64_t seed);

/// One forward pass plus hard projection; always returns a feasible pair.
std::pair<StarConfig, LinkConfig> infer_config(const Mlp& generator, const FeatureCodec& codec,
                                               const ChannelSet& ch, const ScenarioSpec& spec);

struct ModelBundle {
    FeatureCodec codec;
    Critic critic;
    Mlp generator;
    Objective objective;
};

std::string model_to_text(const ModelBundle& b);
ModelBundle model_from_text(const std::string& text);
void save_model(const ModelBundle& b, const std::string& path);
ModelBundle load_model(const std::string& path);

}  // namespace starfd
