#pragma once

#include <cstdint>
#include <limits>
#include <string>

#include "conmf/densela.hpp"
#include "conmf/rng.hpp"

namespace conmf {

enum class CompressorKind { None, Gaussian, Rsi, CountGauss, Stream };

/// Compression strategy descriptor. Fields not used by a kind are left at
/// zero so that specs compare and sort canonically.
struct CompressorSpec {
    CompressorKind kind = CompressorKind::None;
    std::size_t nu = 0;        // oversampling beyond rank p (Gaussian, Rsi, CountGauss)
    std::size_t q = 0;         // subspace-iteration exponent (Rsi)
    std::size_t mu = 0;        // sketch oversampling, mu > nu (CountGauss)
    std::size_t nu_i = 0;      // per-refresh oversampling (Stream)
    std::size_t max_iter = 0;  // refresh period (Stream); kInfinite = single draw

    static constexpr std::size_t kInfinite = std::numeric_limits<std::size_t>::max();

    static CompressorSpec none();
    static CompressorSpec gaussian(std::size_t nu);
    static CompressorSpec rsi(std::size_t nu, std::size_t q = 4);
    static CompressorSpec countgauss(std::size_t nu, std::size_t mu);
    static CompressorSpec stream(std::size_t nu_i, std::size_t max_iter = 1);

    /// Sketch dimensions beyond p for this kind (nu or nu_i).
    std::size_t oversampling() const;

    bool compresses() const { return kind != CompressorKind::None; }

    /// Throws std::invalid_argument if the parameters do not fit an n x m
    /// problem of rank p.
    void validate(std::size_t n, std::size_t m, std::size_t p) const;

    std::string describe() const;  // e.g. "stream(nu_i=10,max_iter=1)"

    friend bool operator==(const CompressorSpec&, const CompressorSpec&) = default;
};

/// Canonical strict ordering (kind, then parameters), used for stable output.
bool spec_less(const CompressorSpec& a, const CompressorSpec& b);

/// Left/right compression matrices for an n x m data matrix: left is
/// (p+nu) x n, right is m x (p+nu).
struct CompressionPair {
    Matrix left;
    Matrix right;
};

/// Scaled-Gaussian pair with entries N(0, 1/(p+nu)); left and right come from
/// distinct substreams of src.
CompressionPair gaussian_pair(const RandomSource& src, std::size_t n, std::size_t m, std::size_t p,
                              std::size_t nu);

/// Gaussian pair for refresh `iteration` of a compression stream. Pure in
/// (base_src, iteration): any refresh can be re-drawn in isolation.
CompressionPair stream_pair(const RandomSource& base_src, std::size_t iteration, std::size_t n,
                            std::size_t m, std::size_t p, std::size_t nu_i);

/// Structured left compressor from randomized subspace iteration: rows of the
/// returned (p+nu) x n matrix are orthonormal. With stabilize (default) every
/// half-step re-orthonormalizes; with stabilize off the powered product
/// (X X^T)^q X Omega is formed first and factored once.
Matrix rsi_left(const Matrix& x, std::size_t p, std::size_t nu, std::size_t q,
                const RandomSource& src, bool stabilize = true);

/// Right counterpart; by definition the transpose of rsi_left applied to x^T.
Matrix rsi_right(const Matrix& x, std::size_t p, std::size_t nu, std::size_t q,
                 const RandomSource& src, bool stabilize = true);

/// Composition of a small dense Gaussian with a sparse count sketch, applied
/// in left form: apply(x) = Omega * (S * x) where S * x is accumulated in one
/// pass over the rows of x.
class CountGaussCompressor {
public:
    CountGaussCompressor(const RandomSource& src, std::size_t in_dim, std::size_t p, std::size_t nu,
                         std::size_t mu);

    Matrix apply(const Matrix& x) const;  // x.rows() must equal in_dim()

    const Matrix& gaussian_part() const noexcept { return omega_; }  // (p+nu) x (p+mu)
    const CountSketch& sketch() const noexcept { return sketch_; }
    std::size_t in_dim() const noexcept { return sketch_.in_dim(); }
    std::size_t out_dim() const noexcept { return omega_.rows(); }

private:
    Matrix omega_;
    CountSketch sketch_;
};

CountGaussCompressor countgauss_left(const RandomSource& src, std::size_t n, std::size_t m,
                                     std::size_t p, std::size_t nu, std::size_t mu);
CountGaussCompressor countgauss_right(const RandomSource& src, std::size_t n, std::size_t m,
                                      std::size_t p, std::size_t nu, std::size_t mu);

/// Exact rational value; keeps the 2/3 term of the QR operation count exact.
class Rational {
public:
    Rational() = default;
    Rational(std::int64_t value) : num_(value) {}  // NOLINT: implicit by design of arithmetic use
    Rational(std::int64_t num, std::int64_t den);

    std::int64_t num() const noexcept { return num_; }
    std::int64_t den() const noexcept { return den_; }
    bool is_integer() const noexcept { return den_ == 1; }
    double to_double() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }
    std::string to_string() const;  // "1242750" or "70/3"

    Rational operator+(const Rational& o) const;
    Rational operator-(const Rational& o) const;
    Rational operator*(const Rational& o) const;

    /// floor(*this / o) for positive o.
    std::int64_t floor_div(const Rational& o) const;

    friend bool operator==(const Rational&, const Rational&) = default;
    bool operator<(const Rational& o) const;
    bool operator>(const Rational& o) const { return o < *this; }
    bool operator<=(const Rational& o) const { return !(o < *this); }
    bool operator>=(const Rational& o) const { return !(*this < o); }

private:
    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

/// Operations to project an n x m matrix to p+nu dimensions: n*m*(p+nu).
std::int64_t flops_project(std::size_t n, std::size_t m, std::size_t p, std::size_t nu);

/// Operations to build one structured compressor by q power iterations with
/// Householder QR: 2q(p+nu)nm + 2n(p+nu)^2 - 2/3 (p+nu)^3, kept exact.
Rational flops_rpi(std::size_t n, std::size_t m, std::size_t p, std::size_t nu, std::size_t q);

/// Smallest embedding dimension strictly greater than 8 ln(n_points) / eps^2.
std::size_t jll_min_dim(std::size_t n_points, double eps);

}  // namespace conmf
