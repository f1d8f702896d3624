#include <doctest.h>

#include <cmath>

#include "starfd/numerics.hpp"

using namespace starfd;

namespace {

CMatrix random_cmat(Rng& rng, std::size_t r, std::size_t c) { return cgauss_sample(rng, r, c, 1.0); }

// n-point DFT matrix scaled to unitary.
CMatrix unitary_dft(std::size_t n) {
    CMatrix u(n, n);
    const double s = 1.0 / std::sqrt(static_cast<double>(n));
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            const double ph = -2.0 * M_PI * static_cast<double>(r * c) / static_cast<double>(n);
            u(r, c) = s * cxd(std::cos(ph), std::sin(ph));
        }
    }
    return u;
}

}  // namespace

TEST_CASE("cmat_mul identity and annihilator") {
    Rng rng(7);
    const CMatrix b = random_cmat(rng, 2, 2);
    CHECK(cmat_mul(CMatrix::identity(2), b) == b);
    const CMatrix z = CMatrix::zero(2, 2);
    const CMatrix p = cmat_mul(z, b);
    CHECK(fro_norm_sq(p) == 0.0);
}

TEST_CASE("cmat_mul hand-computed 2x2 by 2x1") {
    const CMatrix a(2, 2, {cxd(1, 1), cxd(0, 0), cxd(0, 0), cxd(2, 0)});
    const CMatrix b(2, 1, {cxd(1, 0), cxd(0, 1)});
    const CMatrix p = cmat_mul(a, b);
    CHECK((p(0, 0) == cxd(1, 1)));
    CHECK((p(1, 0) == cxd(0, 2)));
}

TEST_CASE("cmat_mul rejects mismatched shapes") {
    CHECK_THROWS_AS(cmat_mul(CMatrix::zero(2, 3), CMatrix::zero(2, 3)), config_error);
}

TEST_CASE("hermitian basics and involution") {
    const CMatrix d(2, 2, {cxd(1, 0), cxd(0, 0), cxd(0, 0), cxd(3, 0)});
    CHECK(cmat_hermitian(d) == d);

    const CMatrix j(1, 1, {cxd(0, 1)});
    CHECK((cmat_hermitian(j)(0, 0) == cxd(0, -1)));

    Rng rng(11);
    const CMatrix a = random_cmat(rng, 3, 2);
    CHECK(cmat_hermitian(cmat_hermitian(a)) == a);
}

TEST_CASE("fro_norm_sq values and symmetry") {
    CHECK(fro_norm_sq(CMatrix::zero(3, 3)) == 0.0);
    const CMatrix m(1, 2, {cxd(3, 0), cxd(0, 4)});
    CHECK(fro_norm_sq(m) == doctest::Approx(25.0));
    Rng rng(3);
    const CMatrix a = random_cmat(rng, 4, 3);
    CHECK(fro_norm_sq(a) == doctest::Approx(fro_norm_sq(cmat_hermitian(a))));
}

TEST_CASE("cmat_mul associativity on random conformable triples") {
    Rng rng(21);
    for (int t = 0; t < 10; ++t) {
        const CMatrix a = random_cmat(rng, 3, 4);
        const CMatrix b = random_cmat(rng, 4, 2);
        const CMatrix c = random_cmat(rng, 2, 5);
        const CMatrix lhs = cmat_mul(cmat_mul(a, b), c);
        const CMatrix rhs = cmat_mul(a, cmat_mul(b, c));
        const double scale = std::sqrt(fro_norm_sq(lhs));
        CHECK(std::sqrt(fro_norm_sq(cmat_sub(lhs, rhs))) <= 1e-12 * std::max(1.0, scale));
    }
}

TEST_CASE("unitary preserves the Frobenius norm") {
    Rng rng(5);
    const CMatrix u = unitary_dft(4);
    const CMatrix x = random_cmat(rng, 4, 3);
    CHECK(fro_norm_sq(cmat_mul(u, x)) == doctest::Approx(fro_norm_sq(x)).epsilon(1e-10));
}

TEST_CASE("rng streams are reproducible") {
    Rng a(123456789), b(123456789);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
    Rng c(1), d(2);
    bool differ = false;
    for (int i = 0; i < 16 && !differ; ++i) differ = c.next_u64() != d.next_u64();
    CHECK(differ);
}

TEST_CASE("rng derive separates paths and orders") {
    const auto s1 = Rng::derive(42, {1, 2});
    const auto s2 = Rng::derive(42, {2, 1});
    const auto s3 = Rng::derive(43, {1, 2});
    CHECK(s1 != s2);
    CHECK(s1 != s3);
    CHECK(Rng::derive(42, {1, 2}) == s1);
}

TEST_CASE("cgauss_sample degenerate and deterministic") {
    Rng rng(9);
    const CMatrix z = cgauss_sample(rng, 3, 3, 0.0);
    CHECK(fro_norm_sq(z) == 0.0);

    Rng r1(77), r2(77);
    CHECK(cgauss_sample(r1, 4, 4, 2.0) == cgauss_sample(r2, 4, 4, 2.0));

    CHECK_THROWS_AS(cgauss_sample(rng, 1, 1, -1.0), config_error);
}

TEST_CASE("cgauss_sample unit-variance law of large numbers") {
    Rng rng(2024);
    const std::size_t n = 100000;
    const CMatrix m = cgauss_sample(rng, n, 1, 1.0);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += std::norm(m(i, 0));
    const double mean = acc / static_cast<double>(n);
    CHECK(mean >= 0.98);
    CHECK(mean <= 1.02);
}
