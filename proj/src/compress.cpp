#include "conmf/compress.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <tuple>

namespace conmf {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

std::int64_t checked_i64(__int128 v, const char* what) {
    if (v > static_cast<__int128>(std::numeric_limits<std::int64_t>::max()) ||
        v < static_cast<__int128>(std::numeric_limits<std::int64_t>::min()))
        throw std::overflow_error(std::string(what) + ": operation count overflows 64-bit range");
    return static_cast<std::int64_t>(v);
}

std::string size_or_inf(std::size_t v) {
    return v == CompressorSpec::kInfinite ? std::string("inf") : std::to_string(v);
}

}  // namespace

CompressorSpec CompressorSpec::none() { return {}; }

CompressorSpec CompressorSpec::gaussian(std::size_t nu) {
    CompressorSpec s;
    s.kind = CompressorKind::Gaussian;
    s.nu = nu;
    return s;
}

CompressorSpec CompressorSpec::rsi(std::size_t nu, std::size_t q) {
    CompressorSpec s;
    s.kind = CompressorKind::Rsi;
    s.nu = nu;
    s.q = q;
    return s;
}

CompressorSpec CompressorSpec::countgauss(std::size_t nu, std::size_t mu) {
    CompressorSpec s;
    s.kind = CompressorKind::CountGauss;
    s.nu = nu;
    s.mu = mu;
    return s;
}

CompressorSpec CompressorSpec::stream(std::size_t nu_i, std::size_t max_iter) {
    CompressorSpec s;
    s.kind = CompressorKind::Stream;
    s.nu_i = nu_i;
    s.max_iter = max_iter;
    return s;
}

std::size_t CompressorSpec::oversampling() const {
    return kind == CompressorKind::Stream ? nu_i : nu;
}

void CompressorSpec::validate(std::size_t n, std::size_t m, std::size_t p) const {
    if (kind == CompressorKind::None) return;
    const std::size_t k = p + oversampling();
    require(k <= std::min(n, m), "compressor " + describe() + ": p+oversampling = " +
                                     std::to_string(k) + " exceeds min(n,m) = " +
                                     std::to_string(std::min(n, m)));
    if (kind == CompressorKind::CountGauss) {
        require(mu > nu, "countgauss: mu must exceed nu (mu=" + std::to_string(mu) +
                             ", nu=" + std::to_string(nu) + ")");
        require(p + mu <= n && p + mu <= m,
                "countgauss: p+mu = " + std::to_string(p + mu) + " exceeds a data dimension");
    }
    if (kind == CompressorKind::Stream)
        require(max_iter >= 1, "stream: max_iter must be >= 1");
}

std::string CompressorSpec::describe() const {
    switch (kind) {
        case CompressorKind::None:
            return "vanilla";
        case CompressorKind::Gaussian:
            return "gaussian(nu=" + std::to_string(nu) + ")";
        case CompressorKind::Rsi:
            return "rsi(nu=" + std::to_string(nu) + ",q=" + std::to_string(q) + ")";
        case CompressorKind::CountGauss:
            return "countgauss(nu=" + std::to_string(nu) + ",mu=" + std::to_string(mu) + ")";
        case CompressorKind::Stream:
            return "stream(nu_i=" + std::to_string(nu_i) + ",max_iter=" + size_or_inf(max_iter) + ")";
    }
    return "?";
}

bool spec_less(const CompressorSpec& a, const CompressorSpec& b) {
    return std::tie(a.kind, a.nu, a.q, a.mu, a.nu_i, a.max_iter) <
           std::tie(b.kind, b.nu, b.q, b.mu, b.nu_i, b.max_iter);
}

CompressionPair gaussian_pair(const RandomSource& src, std::size_t n, std::size_t m, std::size_t p,
                              std::size_t nu) {
    const std::size_t k = p + nu;
    require(k >= 1 && k <= std::min(n, m), "gaussian_pair: need 1 <= p+nu <= min(n,m), got p+nu=" +
                                               std::to_string(k) + " for " + std::to_string(n) + "x" +
                                               std::to_string(m));
    const double sd = 1.0 / std::sqrt(static_cast<double>(k));
    return {gaussian_matrix(src.substream(0), k, n, sd), gaussian_matrix(src.substream(1), m, k, sd)};
}

CompressionPair stream_pair(const RandomSource& base_src, std::size_t iteration, std::size_t n,
                            std::size_t m, std::size_t p, std::size_t nu_i) {
    return gaussian_pair(base_src.substream(iteration), n, m, p, nu_i);
}

Matrix rsi_left(const Matrix& x, std::size_t p, std::size_t nu, std::size_t q,
                const RandomSource& src, bool stabilize) {
    const std::size_t n = x.rows(), m = x.cols(), k = p + nu;
    require(k >= 1 && k <= n, "rsi_left: need p+nu <= n, got p+nu=" + std::to_string(k) + " for " +
                                  x.shape_str());
    if (stabilize && q >= 1)
        require(k <= m, "rsi_left: stabilized iteration needs p+nu <= m, got p+nu=" +
                            std::to_string(k) + " for " + x.shape_str());

    const double sd = 1.0 / std::sqrt(static_cast<double>(k));
    const Matrix omega = gaussian_matrix(src, m, k, sd);

    if (!stabilize) {
        // Plain power iteration: form (X X^T)^q X Omega, orthonormalize once.
        Matrix y = matmul(x, omega);
        const Matrix xt = transpose(x);
        for (std::size_t j = 0; j < q; ++j) y = matmul(x, matmul(xt, y));
        return transpose(householder_qr(y).q);
    }

    Matrix qf = householder_qr(matmul(x, omega)).q;
    if (q >= 1) {
        const Matrix xt = transpose(x);
        for (std::size_t j = 0; j < q; ++j) {
            const Matrix qt = householder_qr(matmul(xt, qf)).q;
            qf = householder_qr(matmul(x, qt)).q;
        }
    }
    return transpose(qf);
}

Matrix rsi_right(const Matrix& x, std::size_t p, std::size_t nu, std::size_t q,
                 const RandomSource& src, bool stabilize) {
    return transpose(rsi_left(transpose(x), p, nu, q, src, stabilize));
}

CountGaussCompressor::CountGaussCompressor(const RandomSource& src, std::size_t in_dim, std::size_t p,
                                           std::size_t nu, std::size_t mu) {
    require(mu > nu, "countgauss: mu must exceed nu (mu=" + std::to_string(mu) +
                         ", nu=" + std::to_string(nu) + ")");
    require(p + mu <= in_dim, "countgauss: need p+mu <= input dimension, got p+mu=" +
                                  std::to_string(p + mu) + " for dim " + std::to_string(in_dim));
    const std::size_t rows = p + nu, mid = p + mu;
    omega_ = gaussian_matrix(src.substream(0), rows, mid, 1.0 / std::sqrt(static_cast<double>(rows)));
    sketch_ = countsketch_structure(src.substream(1), in_dim, mid);
}

Matrix CountGaussCompressor::apply(const Matrix& x) const {
    require(x.rows() == in_dim(), "countgauss apply: input has " + std::to_string(x.rows()) +
                                      " rows, compressor expects " + std::to_string(in_dim()));
    // S*x by bucket accumulation: one pass over the rows of x.
    Matrix sx(sketch_.out_dim, x.cols());
    for (std::size_t j = 0; j < in_dim(); ++j) {
        double* dst = sx.row(sketch_.bucket[j]);
        const double* srcrow = x.row(j);
        const double s = sketch_.sign[j];
        for (std::size_t c = 0; c < x.cols(); ++c) dst[c] += s * srcrow[c];
    }
    return matmul(omega_, sx);
}

CountGaussCompressor countgauss_left(const RandomSource& src, std::size_t n, std::size_t /*m*/,
                                     std::size_t p, std::size_t nu, std::size_t mu) {
    return CountGaussCompressor(src, n, p, nu, mu);
}

CountGaussCompressor countgauss_right(const RandomSource& src, std::size_t /*n*/, std::size_t m,
                                      std::size_t p, std::size_t nu, std::size_t mu) {
    return CountGaussCompressor(src, m, p, nu, mu);
}

Rational::Rational(std::int64_t num, std::int64_t den) : num_(num), den_(den) {
    if (den_ == 0) throw std::invalid_argument("Rational: zero denominator");
    if (den_ < 0) {
        num_ = -num_;
        den_ = -den_;
    }
    const std::int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
    if (g > 1) {
        num_ /= g;
        den_ /= g;
    }
}

std::string Rational::to_string() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
}

Rational Rational::operator+(const Rational& o) const {
    const __int128 num = static_cast<__int128>(num_) * o.den_ + static_cast<__int128>(o.num_) * den_;
    const __int128 den = static_cast<__int128>(den_) * o.den_;
    return Rational(checked_i64(num, "Rational"), checked_i64(den, "Rational"));
}

Rational Rational::operator-(const Rational& o) const {
    const __int128 num = static_cast<__int128>(num_) * o.den_ - static_cast<__int128>(o.num_) * den_;
    const __int128 den = static_cast<__int128>(den_) * o.den_;
    return Rational(checked_i64(num, "Rational"), checked_i64(den, "Rational"));
}

Rational Rational::operator*(const Rational& o) const {
    const __int128 num = static_cast<__int128>(num_) * o.num_;
    const __int128 den = static_cast<__int128>(den_) * o.den_;
    return Rational(checked_i64(num, "Rational"), checked_i64(den, "Rational"));
}

bool Rational::operator<(const Rational& o) const {
    return static_cast<__int128>(num_) * o.den_ < static_cast<__int128>(o.num_) * den_;
}

std::int64_t Rational::floor_div(const Rational& o) const {
    if (!(Rational(0) < o)) throw std::invalid_argument("Rational::floor_div: divisor must be positive");
    // floor((a/b) / (c/d)) = floor(a*d / (b*c))
    const __int128 num = static_cast<__int128>(num_) * o.den_;
    const __int128 den = static_cast<__int128>(den_) * o.num_;
    __int128 quot = num / den;
    if (num % den != 0 && num < 0) --quot;
    return checked_i64(quot, "Rational::floor_div");
}

std::int64_t flops_project(std::size_t n, std::size_t m, std::size_t p, std::size_t nu) {
    require(n >= 1 && m >= 1 && p >= 1, "flops_project: counts must be >= 1");
    const __int128 v = static_cast<__int128>(n) * m * (p + nu);
    return checked_i64(v, "flops_project");
}

Rational flops_rpi(std::size_t n, std::size_t m, std::size_t p, std::size_t nu, std::size_t q) {
    require(n >= 1 && m >= 1 && p >= 1, "flops_rpi: counts must be >= 1");
    require(q >= 1, "flops_rpi: q must be >= 1");
    const __int128 k = static_cast<__int128>(p) + nu;
    const __int128 t_power = 2 * static_cast<__int128>(q) * k * n * m;
    const __int128 t_qr = 2 * static_cast<__int128>(n) * k * k;
    const __int128 t_cube = 2 * k * k * k;  // divided by 3 exactly below
    return Rational(checked_i64(t_power + t_qr, "flops_rpi")) -
           Rational(checked_i64(t_cube, "flops_rpi"), 3);
}

std::size_t jll_min_dim(std::size_t n_points, double eps) {
    require(n_points >= 2, "jll_min_dim: need at least 2 points");
    require(eps > 0.0 && eps < 1.0, "jll_min_dim: eps must lie in (0,1)");
    const double bound = 8.0 * std::log(static_cast<double>(n_points)) / (eps * eps);
    return static_cast<std::size_t>(std::floor(bound)) + 1;  // strictly greater than the bound
}

}  // namespace conmf
