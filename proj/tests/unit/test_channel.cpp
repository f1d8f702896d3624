#include <doctest.h>

#include <cmath>

#include "starfd/channel.hpp"

using namespace starfd;

TEST_CASE("pathloss reference distance and inverse-square") {
    CHECK(pathloss_lin(1.0, 30.0, 2.0) == doctest::Approx(1e-3));
    CHECK(pathloss_lin(2.0, 30.0, 2.0) == doctest::Approx(2.5e-4));
    CHECK(pathloss_lin(0.1, 30.0, 2.2) > pathloss_lin(0.5, 30.0, 2.2));
    CHECK_THROWS_AS(pathloss_lin(0.0, 30.0, 2.0), config_error);
    CHECK_THROWS_AS(pathloss_lin(-1.0, 30.0, 2.0), config_error);
}

TEST_CASE("pathloss exponent sets the log-gain slope exactly") {
    for (double alpha : {1.0, 2.2, 4.4}) {
        const double ratio = pathloss_lin(0.1, 30.0, alpha) / pathloss_lin(0.5, 30.0, alpha);
        CHECK(std::log10(ratio) == doctest::Approx(alpha * std::log10(5.0)).epsilon(1e-12));
    }
}

TEST_CASE("rician limits") {
    SUBCASE("huge K approaches pure line of sight") {
        Rng rng(5);
        const double gain = 0.25;
        const CMatrix h = rician_channel(rng, 4, 4, gain, 1e9);
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 4; ++j)
                CHECK(std::abs(h(i, j)) == doctest::Approx(std::sqrt(gain)).epsilon(1e-3));
    }
    SUBCASE("K=0 reduces to the scaled Gaussian stream") {
        Rng r1(42), r2(42);
        const double gain = 0.5;
        const CMatrix h = rician_channel(r1, 3, 2, gain, 0.0);
        const CMatrix w = cgauss_sample(r2, 3, 2, 1.0);
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 2; ++j)
                CHECK((h(i, j) == std::sqrt(gain) * w(i, j)));
    }
    SUBCASE("zero gain gives the zero matrix") {
        Rng rng(1);
        CHECK(fro_norm_sq(rician_channel(rng, 2, 2, 0.0, 3.0)) == 0.0);
    }
}

TEST_CASE("gen_channels shapes, blocking and determinism") {
    ScenarioSpec spec;
    spec.n_tx = 2;
    spec.n_rx = 2;
    spec.n_elems = 4;

    Rng rng(spec.seed);
    const ChannelSet ch = gen_channels(spec, rng);
    CHECK(ch.h_d.rows() == 2);
    CHECK(ch.h_d.cols() == 2);
    CHECK(ch.g1.rows() == 4);
    CHECK(ch.g1.cols() == 2);
    CHECK(ch.g2r.rows() == 2);
    CHECK(ch.g2r.cols() == 4);
    CHECK(ch.g2t.rows() == 1);
    CHECK(ch.g2t.cols() == 4);
    CHECK(ch.h_a.rows() == 2);
    CHECK(ch.h_a.cols() == 1);
    CHECK(ch.h_fb.rows() == 1);
    CHECK(ch.h_fb.cols() == 2);
    CHECK(fro_norm_sq(ch.h_fb) == 0.0);  // blocked by default

    Rng r1(99), r2(99);
    const ChannelSet c1 = gen_channels(spec, r1);
    const ChannelSet c2 = gen_channels(spec, r2);
    CHECK(c1.h_d == c2.h_d);
    CHECK(c1.g1 == c2.g1);
    CHECK(c1.g2r == c2.g2r);
    CHECK(c1.g2t == c2.g2t);
    CHECK(c1.h_a == c2.h_a);

    spec.direct_fb_blocked = false;
    Rng r3(99);
    CHECK(fro_norm_sq(gen_channels(spec, r3).h_fb) > 0.0);
}

TEST_CASE("gen_channels entries finite and g1 power matches the pathloss gain") {
    ScenarioSpec spec;
    spec.n_elems = 64;
    spec.n_tx = 4;
    // 64*4 = 256 entries per draw; 40 draws > 1e4 element samples
    const double expect = pathloss_lin(spec.d_sr, spec.pl0_db, spec.alpha_ris);
    double acc = 0.0;
    std::size_t n = 0;
    for (int d = 0; d < 40; ++d) {
        Rng rng(Rng::derive(31337, {static_cast<std::uint64_t>(d)}));
        const ChannelSet ch = gen_channels(spec, rng);
        REQUIRE(cmat_is_finite(ch.g1));
        REQUIRE(cmat_is_finite(ch.g2r));
        REQUIRE(cmat_is_finite(ch.h_d));
        acc += fro_norm_sq(ch.g1);
        n += ch.g1.size();
    }
    const double per_entry = acc / static_cast<double>(n);
    CHECK(per_entry == doctest::Approx(expect).epsilon(0.05));
}

TEST_CASE("validate_geometry reports each violation") {
    ScenarioSpec ok;
    CHECK(validate_geometry(ok).ok());

    ScenarioSpec paper = ok;
    paper.d_sr = 0.1;
    paper.d_fb = 20.0;
    CHECK(validate_geometry(paper).ok());

    ScenarioSpec bad = ok;
    bad.d_sr = 0.0;
    auto rep = validate_geometry(bad);
    REQUIRE(!rep.ok());
    CHECK(rep.errors.front() == "d_sr must be positive");

    ScenarioSpec lvl = ok;
    lvl.phase_levels = 3;
    rep = validate_geometry(lvl);
    REQUIRE(!rep.ok());
    CHECK(rep.errors.front() == "phase levels must be 0 or a power of two");

    ScenarioSpec multi = ok;
    multi.d_sr = -1.0;
    multi.p_fd = 0.0;
    CHECK(validate_geometry(multi).errors.size() >= 2);
}

TEST_CASE("constructed null scenario cancels exactly at its config") {
    ScenarioSpec spec;
    spec.n_elems = 8;
    Rng rng(4);
    const NullScenario ns = gen_si_null_channels(spec, rng);
    const CMatrix eff = effective_si_channel(ns.ch, ns.null_cfg);
    CHECK(fro_norm_sq(eff) <= 1e-24 * fro_norm_sq(ns.ch.h_d));
}
