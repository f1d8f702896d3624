#include <benchmark/benchmark.h>

#include "starfd/channel.hpp"
#include "starfd/fdlink.hpp"
#include "starfd/neural.hpp"
#include "starfd/optim.hpp"

using namespace starfd;

namespace {

ScenarioSpec spec_with(std::size_t m, unsigned levels) {
    ScenarioSpec spec;
    spec.n_elems = m;
    spec.phase_levels = levels;
    return spec;
}

void BM_gen_channels(benchmark::State& state) {
    const ScenarioSpec spec = spec_with(static_cast<std::size_t>(state.range(0)), 0);
    std::uint64_t seed = 1;
    for (auto _ : state) {
        Rng rng(seed++);
        benchmark::DoNotOptimize(gen_channels(spec, rng));
    }
}
BENCHMARK(BM_gen_channels)->Arg(8)->Arg(64);

void BM_evaluate(benchmark::State& state) {
    const ScenarioSpec spec = spec_with(static_cast<std::size_t>(state.range(0)), 0);
    Rng rng(7);
    const ChannelSet ch = gen_channels(spec, rng);
    std::vector<double> s(spec.n_elems, 0.7), tr(spec.n_elems, 1.0), tt(spec.n_elems, 2.0);
    const StarConfig cfg = project(s, tr, tt, spec.mode, 0);
    LinkConfig link{mrt_beamformer(ch, cfg, spec.p_fd), mrc_combiner(ch)};
    for (auto _ : state) {
        benchmark::DoNotOptimize(evaluate(spec, ch, cfg, link));
    }
}
BENCHMARK(BM_evaluate)->Arg(8)->Arg(64);

void BM_phase_cd_reflect_sweep(benchmark::State& state) {
    const ScenarioSpec spec = spec_with(static_cast<std::size_t>(state.range(0)), 8);
    Rng rng(11);
    const ChannelSet ch = gen_channels(spec, rng);
    std::vector<double> s(spec.n_elems, 0.7), tr(spec.n_elems, 1.0), tt(spec.n_elems, 2.0);
    const StarConfig cfg = project(s, tr, tt, spec.mode, 8);
    LinkConfig link{mrt_beamformer(ch, cfg, spec.p_fd), mrc_combiner(ch)};
    for (auto _ : state) {
        benchmark::DoNotOptimize(phase_cd_reflect(ch, cfg, link, 1));
    }
}
BENCHMARK(BM_phase_cd_reflect_sweep)->Arg(16)->Arg(64);

void BM_alternating_optimize(benchmark::State& state) {
    const ScenarioSpec spec = spec_with(static_cast<std::size_t>(state.range(0)), 8);
    Rng rng(13);
    const ChannelSet ch = gen_channels(spec, rng);
    const Objective obj = Objective::min_si(8.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(alternating_optimize(spec, ch, obj));
    }
}
BENCHMARK(BM_alternating_optimize)->Arg(16)->Arg(64);

void BM_mlp_forward(benchmark::State& state) {
    Rng rng(17);
    const Mlp net = make_mlp({96, 128, 128, 2}, Activation::relu, rng);
    std::vector<double> x(96);
    for (auto& v : x) v = rng.next_unit();
    for (auto _ : state) {
        benchmark::DoNotOptimize(mlp_forward(net, x));
    }
}
BENCHMARK(BM_mlp_forward);

void BM_mlp_grad(benchmark::State& state) {
    Rng rng(19);
    const Mlp net = make_mlp({96, 128, 128, 2}, Activation::relu, rng);
    std::vector<double> x(96);
    for (auto& v : x) v = rng.next_unit();
    const std::vector<double> up{1.0, -0.5};
    for (auto _ : state) {
        benchmark::DoNotOptimize(mlp_grad(net, x, up));
    }
}
BENCHMARK(BM_mlp_grad);

}  // namespace

BENCHMARK_MAIN();
