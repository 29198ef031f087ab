#include "conmf/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace conmf {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix_u64(std::uint64_t z) noexcept {
    z += kGolden;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t stream_key(std::uint64_t seed, std::uint64_t stream) noexcept {
    return mix_u64(seed ^ 0xA0761D6478BD642FULL) ^ mix_u64(stream ^ 0xE7037ED1A0B428DBULL);
}

// Inverse of the standard normal CDF, rational approximations after Wichura's
// PPND16 (relative accuracy near full double precision over (0,1)).
double inverse_normal_cdf(double p) {
    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        const double num =
            (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                  6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
              1.3314166789178437745e2) * r + 3.3871328727963666080e0);
        const double den =
            (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                  3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
                5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
              4.2313330701600911252e1) * r + 1.0);
        return q * num / den;
    }
    double r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double z;
    if (r <= 5.0) {
        r -= 1.6;
        const double num =
            (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
              4.63033784615654529590e0) * r + 1.42343711074968357734e0);
        const double den =
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
              2.05319162663775882187e0) * r + 1.0);
        z = num / den;
    } else {
        r -= 5.0;
        const double num =
            (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
              5.46378491116411436990e0) * r + 6.65790464350110377720e0);
        const double den =
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
        z = num / den;
    }
    return (q < 0.0) ? -z : z;
}

}  // namespace

RandomSource RandomSource::substream(std::uint64_t id) const noexcept {
    return RandomSource(seed_, mix_u64(stream_ ^ (kGolden * (id + 1))));
}

RandomSource::Sequence RandomSource::sequence() const noexcept {
    return Sequence(stream_key(seed_, stream_));
}

std::uint64_t RandomSource::Sequence::next_u64() noexcept {
    state_ += kGolden;
    return mix_u64(state_);
}

double RandomSource::Sequence::next_uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RandomSource::Sequence::next_gaussian() noexcept {
    // offset keeps the argument strictly inside (0, 1)
    const double u = (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    return inverse_normal_cdf(u);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept {
    return mix_u64(base ^ (kGolden * (index + 1)));
}

Matrix gaussian_matrix(const RandomSource& src, std::size_t rows, std::size_t cols, double std_dev) {
    if (rows < 1 || cols < 1) throw std::invalid_argument("gaussian_matrix: dimensions must be >= 1");
    if (!(std_dev > 0.0)) throw std::invalid_argument("gaussian_matrix: std_dev must be positive");
    Matrix out(rows, cols);
    auto seq = src.sequence();
    for (double& v : out.data()) v = seq.next_gaussian() * std_dev;
    return out;
}

Matrix nonneg_uniform_matrix(const RandomSource& src, std::size_t rows, std::size_t cols) {
    if (rows < 1 || cols < 1)
        throw std::invalid_argument("nonneg_uniform_matrix: dimensions must be >= 1");
    Matrix out(rows, cols);
    auto seq = src.sequence();
    for (double& v : out.data()) v = seq.next_uniform();
    return out;
}

Matrix CountSketch::dense() const {
    Matrix s(out_dim, in_dim());
    for (std::size_t j = 0; j < in_dim(); ++j) s(bucket[j], j) = sign[j];
    return s;
}

CountSketch countsketch_structure(const RandomSource& src, std::size_t in_dim, std::size_t out_dim) {
    if (out_dim < 1 || out_dim > in_dim)
        throw std::invalid_argument("countsketch_structure: need 1 <= out_dim <= in_dim, got out_dim=" +
                                    std::to_string(out_dim) + " in_dim=" + std::to_string(in_dim));
    CountSketch cs;
    cs.out_dim = out_dim;
    cs.bucket.resize(in_dim);
    cs.sign.resize(in_dim);
    auto seq = src.sequence();
    for (std::size_t j = 0; j < in_dim; ++j) {
        cs.bucket[j] = static_cast<std::size_t>(seq.next_u64() % out_dim);
        cs.sign[j] = (seq.next_u64() >> 63) ? -1.0 : 1.0;
    }
    return cs;
}

}  // namespace conmf
