#include <doctest.h>

#include <cmath>
#include <vector>

#include "starfd/fdlink.hpp"
#include "starfd/optim.hpp"

using namespace starfd;

namespace {

struct Fixture {
    ScenarioSpec spec;
    ChannelSet ch;
    StarConfig cfg;
    LinkConfig link;

    explicit Fixture(std::uint64_t seed = 33, std::size_t m = 6) {
        spec.n_elems = m;
        Rng rng(seed);
        ch = gen_channels(spec, rng);
        std::vector<double> s(m), tr(m), tt(m);
        for (auto& x : s) x = rng.next_unit() * M_PI / 2.0;
        for (auto& x : tr) x = rng.next_unit() * 2.0 * M_PI;
        for (auto& x : tt) x = rng.next_unit() * 2.0 * M_PI;
        cfg = project(s, tr, tt, spec.mode, spec.phase_levels);
        link.v = mrc_combiner(ch);
        link.w = mrt_beamformer(ch, cfg, spec.p_fd);
    }
};

StarConfig no_reflection(std::size_t m) {
    std::vector<double> s(m, M_PI / 2.0), z(m, 0.0);
    return project(s, z, z, StarMode::es, 0);
}

}  // namespace

TEST_CASE("residual power reduces to the direct leak without reflection") {
    Fixture f;
    const StarConfig cfg = no_reflection(f.spec.n_elems);
    const double direct = std::norm(vdot(f.link.v, cmat_mul(f.ch.h_d, f.link.w)));
    CHECK(residual_si_power(f.ch, cfg, f.link, 0.0) == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("constructed null leaves exactly the floor") {
    ScenarioSpec spec;
    spec.n_elems = 5;
    Rng rng(11);
    const NullScenario ns = gen_si_null_channels(spec, rng);
    LinkConfig link;
    link.v = mrc_combiner(ns.ch);
    link.w = mrt_beamformer(ns.ch, ns.null_cfg, spec.p_fd);
    const double floor = 3.5e-13;
    const double r = residual_si_power(ns.ch, ns.null_cfg, link, floor);
    CHECK(r == doctest::Approx(floor).epsilon(1e-9));
}

TEST_CASE("residual power is quadratic in the beamformer scale") {
    Fixture f;
    const double r1 = residual_si_power(f.ch, f.cfg, f.link, 0.0);
    LinkConfig scaled = f.link;
    scaled.w = cmat_scale(f.link.w, 2.0);
    const double r2 = residual_si_power(f.ch, f.cfg, scaled, 0.0);
    CHECK(r2 == doctest::Approx(4.0 * r1).epsilon(1e-12));
}

TEST_CASE("downlink rate fixed points") {
    Fixture f;
    SUBCASE("zero effective channel gives zero rate") {
        const std::size_t m = f.spec.n_elems;
        std::vector<double> s(m, 0.0), z(m, 0.0);
        const StarConfig cfg = project(s, z, z, StarMode::es, 0);  // all reflect
        CHECK(downlink_rate(f.ch, cfg, f.link, f.spec.noise_bob) == 0.0);
    }
    SUBCASE("snr 3 gives 2 bps/Hz and snr 8191 gives 13") {
        // synthetic 1x1 channel tuned to the required snr
        ChannelSet ch;
        ch.h_d = CMatrix::zero(1, 1);
        ch.g1 = CMatrix(1, 1, {cxd(1, 0)});
        ch.g2r = CMatrix::zero(1, 1);
        ch.g2t = CMatrix(1, 1, {cxd(1, 0)});
        ch.h_a = CMatrix(1, 1, {cxd(1, 0)});
        ch.h_fb = CMatrix::zero(1, 1);
        StarConfig cfg;
        cfg.mode = StarMode::es;
        cfg.beta_r = {0.0};
        cfg.beta_t = {1.0};
        cfg.theta_r = {0.0};
        cfg.theta_t = {0.0};
        LinkConfig link;
        link.v = CMatrix(1, 1, {cxd(1, 0)});
        link.w = CMatrix(1, 1, {cxd(std::sqrt(3.0), 0)});
        CHECK(downlink_rate(ch, cfg, link, 1.0) == doctest::Approx(2.0));
        link.w = CMatrix(1, 1, {cxd(std::sqrt(8191.0), 0)});
        CHECK(downlink_rate(ch, cfg, link, 1.0) == doctest::Approx(13.0));
    }
}

TEST_CASE("uplink rate behavior") {
    Fixture f;
    SUBCASE("monotone decreasing in the residual") {
        ScenarioSpec lo = f.spec, hi = f.spec;
        lo.residual_floor = 0.0;
        hi.residual_floor = 1e-9;
        CHECK(uplink_rate(f.ch, f.cfg, f.link, lo) > uplink_rate(f.ch, f.cfg, f.link, hi));
    }
    SUBCASE("plateau value at snr 2^13-1") {
        ChannelSet ch;
        ch.h_d = CMatrix::zero(1, 1);
        ch.g1 = CMatrix(1, 1, {cxd(1, 0)});
        ch.g2r = CMatrix::zero(1, 1);  // no reflected path at all
        ch.g2t = CMatrix(1, 1, {cxd(1, 0)});
        ch.h_a = CMatrix(1, 1, {cxd(1, 0)});
        ch.h_fb = CMatrix::zero(1, 1);
        StarConfig cfg;
        cfg.mode = StarMode::es;
        cfg.beta_r = {0.0};
        cfg.beta_t = {1.0};
        cfg.theta_r = {0.0};
        cfg.theta_t = {0.0};
        LinkConfig link;
        link.v = CMatrix(1, 1, {cxd(1, 0)});
        link.w = CMatrix(1, 1, {cxd(1, 0)});
        ScenarioSpec spec;
        spec.p_alice = static_cast<double>((1 << 13) - 1);
        spec.noise_fd = 1.0;
        spec.residual_floor = 0.0;
        CHECK(uplink_rate(ch, cfg, link, spec) == doctest::Approx(13.0));
    }
    SUBCASE("combiner orthogonal to the uplink channel yields zero") {
        ChannelSet ch = f.ch;
        ch.h_a = CMatrix(2, 1, {cxd(1, 0), cxd(0, 0)});
        LinkConfig link = f.link;
        link.v = CMatrix(2, 1, {cxd(0, 0), cxd(1, 0)});
        ScenarioSpec spec = f.spec;
        spec.residual_floor = 0.0;
        const StarConfig cfg = no_reflection(f.spec.n_elems);
        // kill the reflected leak too so the rate is exactly log2(1+0)
        ChannelSet clean = ch;
        clean.h_d = CMatrix::zero(2, 4);
        CHECK(uplink_rate(clean, cfg, link, spec) == 0.0);
    }
}

TEST_CASE("mrc combiner") {
    ChannelSet ch;
    ch.h_a = CMatrix(2, 1, {cxd(3, 0), cxd(0, 4)});
    const CMatrix v = mrc_combiner(ch);
    CHECK(v(0, 0).real() == doctest::Approx(0.6));
    CHECK(std::abs(v(0, 0).imag()) <= 1e-15);
    CHECK(v(1, 0).imag() == doctest::Approx(0.8));
    CHECK(fro_norm_sq(v) == doctest::Approx(1.0));

    // Cauchy-Schwarz: the MRC direction maximizes |v^H h_a|
    Rng rng(15);
    ChannelSet rch;
    rch.h_a = cgauss_sample(rng, 4, 1, 1.0);
    const CMatrix vm = mrc_combiner(rch);
    const double best = std::norm(vdot(vm, rch.h_a));
    for (int t = 0; t < 50; ++t) {
        CMatrix u = cgauss_sample(rng, 4, 1, 1.0);
        u = cmat_scale(u, 1.0 / std::sqrt(fro_norm_sq(u)));
        CHECK(std::norm(vdot(u, rch.h_a)) <= best * (1.0 + 1e-12));
    }

    ChannelSet zero;
    zero.h_a = CMatrix::zero(2, 1);
    CHECK_THROWS_AS(mrc_combiner(zero), config_error);
}

TEST_CASE("evaluate is consistent with recomputed formulas") {
    Fixture f(91);
    const Metrics m = evaluate(f.spec, f.ch, f.cfg, f.link);

    // independent recomputation straight from the definitions
    const CMatrix h_eff = cmat_add(f.ch.h_d, cmat_mul(f.ch.g2r, cmat_mul(reflect_matrix(f.cfg), f.ch.g1)));
    const CMatrix g_eff = cmat_add(f.ch.h_fb, cmat_mul(f.ch.g2t, cmat_mul(transmit_matrix(f.cfg), f.ch.g1)));
    const cxd si = vdot(f.link.v, cmat_mul(h_eff, f.link.w));
    const cxd dl = cmat_mul(g_eff, f.link.w)(0, 0);
    const cxd ua = vdot(f.link.v, f.ch.h_a);
    const double resid = std::norm(si) + f.spec.residual_floor;
    const double rate_dl = std::log2(1.0 + std::norm(dl) / f.spec.noise_bob);
    const double rate_ul =
        std::log2(1.0 + f.spec.p_alice * std::norm(ua) / (resid + f.spec.noise_fd));
    const double baseline = std::norm(vdot(f.link.v, cmat_mul(f.ch.h_d, f.link.w)));

    CHECK(m.resid_si == doctest::Approx(resid).epsilon(1e-14));
    CHECK(m.rate_dl == doctest::Approx(rate_dl).epsilon(1e-14));
    CHECK(m.rate_ul == doctest::Approx(rate_ul).epsilon(1e-14));
    CHECK(m.baseline_si == doctest::Approx(baseline).epsilon(1e-14));
    CHECK(m.resid_si_db ==
          doctest::Approx(10.0 * std::log10(std::max(resid, 1e-30) / f.spec.noise_fd)).epsilon(1e-14));
    CHECK(m.sic_gain_db ==
          doctest::Approx(10.0 * std::log10(baseline / std::max(resid, 1e-30))).epsilon(1e-14));
}

TEST_CASE("evaluate edge gains") {
    Fixture f;
    SUBCASE("no reflection means zero SIC gain") {
        const StarConfig cfg = no_reflection(f.spec.n_elems);
        const Metrics m = evaluate(f.spec, f.ch, cfg, f.link);
        CHECK(m.sic_gain_db == 0.0);
    }
    SUBCASE("constructed null with zero floor rails at the clamp") {
        ScenarioSpec spec;
        spec.n_elems = 5;
        Rng rng(8);
        const NullScenario ns = gen_si_null_channels(spec, rng);
        LinkConfig link;
        link.v = mrc_combiner(ns.ch);
        link.w = mrt_beamformer(ns.ch, ns.null_cfg, spec.p_fd);
        const Metrics m = evaluate(spec, ns.ch, ns.null_cfg, link);
        CHECK(m.sic_gain_db >= 200.0);
    }
}

TEST_CASE("sic gain is invariant to beamformer scaling") {
    Fixture f;
    ScenarioSpec spec = f.spec;
    spec.residual_floor = 0.0;
    const Metrics m1 = evaluate(spec, f.ch, f.cfg, f.link);
    LinkConfig scaled = f.link;
    scaled.w = cmat_scale(f.link.w, 0.3);
    const Metrics m2 = evaluate(spec, f.ch, f.cfg, scaled);
    CHECK(m1.sic_gain_db == doctest::Approx(m2.sic_gain_db).epsilon(1e-9));
}

TEST_CASE("single-element residual minimum matches a dense phase sweep") {
    Fixture f(51, 4);
    const CascadeTerms t = cascade_terms(f.ch, f.link);
    const std::size_t target = 2;

    // complex sum excluding the target element
    cxd c = t.base_si;
    for (std::size_t i = 0; i < f.cfg.size(); ++i) {
        if (i == target) continue;
        c += f.cfg.beta_r[i] * cxd(std::cos(f.cfg.theta_r[i]), std::sin(f.cfg.theta_r[i])) * t.a0[i];
    }
    const double a = f.cfg.beta_r[target] * std::abs(t.a0[target]);
    const double analytic = std::abs(std::abs(c) - a);

    double sweep_min = 1e300;
    StarConfig cfg = f.cfg;
    for (int k = 0; k < 3600; ++k) {
        cfg.theta_r[target] = 2.0 * M_PI * static_cast<double>(k) / 3600.0;
        sweep_min = std::min(sweep_min, residual_si_power(f.ch, cfg, f.link, 0.0));
    }
    const double analytic_pow = analytic * analytic;
    // grid can miss the exact optimum by at most half a step
    const double slack = 2.0 * a * std::abs(c) * (1.0 - std::cos(M_PI / 3600.0)) + 1e-9;
    CHECK(sweep_min >= analytic_pow - 1e-9);
    CHECK(sweep_min <= analytic_pow + slack);
}
