#include "starfd/numerics.hpp"

#include <charconv>
#include <cmath>
#include <string>

namespace starfd {

std::string format_double(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, p);
}

CMatrix cmat_mul(const CMatrix& a, const CMatrix& b) {
    if (a.cols() != b.rows()) {
        throw config_error("cmat_mul: dimension mismatch " + std::to_string(a.rows()) + "x" +
                           std::to_string(a.cols()) + " * " + std::to_string(b.rows()) + "x" +
                           std::to_string(b.cols()));
    }
    CMatrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const cxd aik = a(i, k);
            if (aik == cxd{}) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) {
                out(i, j) += aik * b(k, j);
            }
        }
    }
    return out;
}

CMatrix cmat_hermitian(const CMatrix& a) {
    CMatrix out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = std::conj(a(i, j));
    return out;
}

CMatrix cmat_add(const CMatrix& a, const CMatrix& b) {
    if (!a.same_shape(b)) throw config_error("cmat_add: shape mismatch");
    CMatrix out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += b.data()[i];
    return out;
}

CMatrix cmat_sub(const CMatrix& a, const CMatrix& b) {
    if (!a.same_shape(b)) throw config_error("cmat_sub: shape mismatch");
    CMatrix out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] -= b.data()[i];
    return out;
}

CMatrix cmat_scale(const CMatrix& a, cxd s) {
    CMatrix out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] *= s;
    return out;
}

double fro_norm_sq(const CMatrix& a) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::norm(a.data()[i]);
    return acc;
}

bool cmat_is_finite(const CMatrix& a) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        const cxd& e = a.data()[i];
        if (!std::isfinite(e.real()) || !std::isfinite(e.imag())) return false;
    }
    return true;
}

cxd vdot(const CMatrix& a, const CMatrix& b) {
    if (a.cols() != 1 || b.cols() != 1 || a.rows() != b.rows()) {
        throw config_error("vdot: expects equally sized column vectors");
    }
    cxd acc{};
    for (std::size_t i = 0; i < a.rows(); ++i) acc += std::conj(a(i, 0)) * b(i, 0);
    return acc;
}

namespace {

inline std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& s : s_) s = splitmix64(x);
}

std::uint64_t Rng::next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

void Rng::next_gauss_pair(double& z0, double& z1) {
    // Box-Muller; guard the log against an exact zero uniform.
    double u1 = next_unit();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double u2 = next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * M_PI * u2;
    z0 = r * std::cos(phi);
    z1 = r * std::sin(phi);
}

std::uint64_t Rng::derive(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
    std::uint64_t x = master;
    std::uint64_t acc = splitmix64(x);
    for (std::uint64_t p : path) {
        x = acc ^ (p + 0x9e3779b97f4a7c15ULL);
        acc = splitmix64(x);
    }
    return acc;
}

CMatrix cgauss_sample(Rng& rng, std::size_t rows, std::size_t cols, double variance) {
    if (variance < 0.0) throw config_error("cgauss_sample: negative variance");
    CMatrix out(rows, cols);
    if (variance == 0.0) return out;
    const double s = std::sqrt(variance / 2.0);
    for (std::size_t i = 0; i < out.size(); ++i) {
        double z0, z1;
        rng.next_gauss_pair(z0, z1);
        out.data()[i] = cxd(s * z0, s * z1);
    }
    return out;
}

}  // namespace starfd
