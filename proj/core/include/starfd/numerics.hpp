#pragma once

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace starfd {

/// Shortest round-trip decimal rendering; locale-independent, so emitted
/// CSV bytes are stable.
std::string format_double(double v);

using cxd = std::complex<double>;

/// Thrown on fatal configuration errors (bad dimensions, invalid parameters).
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Dense complex matrix, row-major. Dimensions in this project are tiny
/// (at most a few hundred entries), so everything is plain loops over
/// contiguous storage.
class CMatrix {
public:
    CMatrix() = default;
    CMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), e_(rows * cols) {}
    CMatrix(std::size_t rows, std::size_t cols, std::initializer_list<cxd> entries)
        : rows_(rows), cols_(cols), e_(entries) {
        if (e_.size() != rows * cols) {
            throw config_error("CMatrix: initializer length does not match rows*cols");
        }
    }

    static CMatrix zero(std::size_t rows, std::size_t cols) { return CMatrix(rows, cols); }
    static CMatrix identity(std::size_t n) {
        CMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return e_.size(); }

    cxd& operator()(std::size_t r, std::size_t c) { return e_[r * cols_ + c]; }
    const cxd& operator()(std::size_t r, std::size_t c) const { return e_[r * cols_ + c]; }

    cxd* data() { return e_.data(); }
    const cxd* data() const { return e_.data(); }

    bool same_shape(const CMatrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    friend bool operator==(const CMatrix& a, const CMatrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.e_ == b.e_;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<cxd> e_;
};

CMatrix cmat_mul(const CMatrix& a, const CMatrix& b);
CMatrix cmat_hermitian(const CMatrix& a);
CMatrix cmat_add(const CMatrix& a, const CMatrix& b);
CMatrix cmat_sub(const CMatrix& a, const CMatrix& b);
CMatrix cmat_scale(const CMatrix& a, cxd s);

/// Sum of squared entry magnitudes.
double fro_norm_sq(const CMatrix& a);

bool cmat_is_finite(const CMatrix& a);

/// Inner product aᴴb of two column vectors (n×1 each).
cxd vdot(const CMatrix& a, const CMatrix& b);

/// Deterministic generator: xoshiro256++ seeded through SplitMix64.
/// Pure 64-bit integer state transitions, so identical seeds give identical
/// streams on every platform. Gaussian deviates use the trigonometric
/// Box-Muller transform, two uniforms per pair.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    /// Uniform in [0, 1), 53-bit resolution.
    double next_unit();

    /// Pair of independent N(0,1) draws.
    void next_gauss_pair(double& z0, double& z1);

    /// Folds a path of indices into a master seed so parallel workers and
    /// per-trial streams never collide. mix(m, {a,b}) != mix(m, {b,a}).
    static std::uint64_t derive(std::uint64_t master, std::initializer_list<std::uint64_t> path);

private:
    std::uint64_t s_[4];
};

/// rows×cols matrix of i.i.d. circularly-symmetric complex Gaussians with
/// per-entry variance `variance` (half in each of real/imag).
CMatrix cgauss_sample(Rng& rng, std::size_t rows, std::size_t cols, double variance);

}  // namespace starfd
