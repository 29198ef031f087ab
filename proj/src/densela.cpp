#include "conmf/densela.hpp"

#include <cmath>
#include <stdexcept>

namespace conmf {

namespace {

void check_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument(std::string(op) + ": shape mismatch (" + a.shape_str() +
                                    " vs " + b.shape_str() + ")");
}

// splitmix64-style finalizer, used only to seed the power-iteration start vector
std::uint64_t mix_u64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {
    if (rows == 0 || cols == 0) throw std::invalid_argument("Matrix: dimensions must be positive");
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (rows == 0 || cols == 0) throw std::invalid_argument("Matrix: dimensions must be positive");
    if (data_.size() != rows * cols)
        throw std::invalid_argument("Matrix: data length " + std::to_string(data_.size()) +
                                    " does not match " + shape_str());
    for (double v : data_)
        if (!std::isfinite(v)) throw std::invalid_argument("Matrix: non-finite entry");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> row_lists) {
    rows_ = row_lists.size();
    if (rows_ == 0) throw std::invalid_argument("Matrix: dimensions must be positive");
    cols_ = row_lists.begin()->size();
    if (cols_ == 0) throw std::invalid_argument("Matrix: dimensions must be positive");
    data_.reserve(rows_ * cols_);
    for (const auto& r : row_lists) {
        if (r.size() != cols_) throw std::invalid_argument("Matrix: ragged initializer rows");
        for (double v : r) {
            if (!std::isfinite(v)) throw std::invalid_argument("Matrix: non-finite entry");
            data_.push_back(v);
        }
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix out(n, n);
    for (std::size_t i = 0; i < n; ++i) out(i, i) = 1.0;
    return out;
}

std::string Matrix::shape_str() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows())
        throw std::invalid_argument("matmul: inner dimensions differ (" + a.shape_str() + " * " +
                                    b.shape_str() + ")");
    Matrix out(a.rows(), b.cols());
    const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
    // i-k-j order: each out(i,j) accumulates a(i,0)*b(0,j), a(i,1)*b(1,j), ...
    // strictly in index order, so results are reproducible run to run.
    for (std::size_t i = 0; i < n; ++i) {
        double* out_row = out.row(i);
        const double* a_row = a.row(i);
        for (std::size_t l = 0; l < k; ++l) {
            const double aval = a_row[l];
            const double* b_row = b.row(l);
            for (std::size_t j = 0; j < m; ++j) out_row[j] += aval * b_row[j];
        }
    }
    return out;
}

Matrix transpose(const Matrix& a) {
    Matrix out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
    return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
    check_same_shape(a, b, "add");
    Matrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] + b.data()[i];
    return out;
}

Matrix sub(const Matrix& a, const Matrix& b) {
    check_same_shape(a, b, "sub");
    Matrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] - b.data()[i];
    return out;
}

Matrix scale(const Matrix& a, double s) {
    Matrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] * s;
    return out;
}

double frobenius_norm_sq(const Matrix& a) {
    double sum = 0.0;
    for (double v : a.data()) sum += v * v;
    return sum;
}

double frobenius_norm(const Matrix& a) { return std::sqrt(frobenius_norm_sq(a)); }

QrFactors householder_qr(const Matrix& a) {
    const std::size_t m = a.rows(), n = a.cols();
    if (m < n)
        throw std::invalid_argument("householder_qr: need rows >= cols, got " + a.shape_str());

    // Forward pass: reduce a working copy to upper-triangular form, storing the
    // Householder vector tails below the diagonal (v0 normalized to 1).
    Matrix work = a;
    std::vector<double> beta(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        double sigma = 0.0;
        for (std::size_t i = k + 1; i < m; ++i) sigma += work(i, k) * work(i, k);
        const double x0 = work(k, k);
        if (sigma == 0.0) continue;  // column already reduced; beta stays 0

        const double mu = std::sqrt(x0 * x0 + sigma);
        const double v0 = (x0 <= 0.0) ? x0 - mu : -sigma / (x0 + mu);
        beta[k] = 2.0 * v0 * v0 / (sigma + v0 * v0);
        for (std::size_t i = k + 1; i < m; ++i) work(i, k) /= v0;
        work(k, k) = mu;  // this choice of v makes the new diagonal entry +mu

        for (std::size_t j = k + 1; j < n; ++j) {
            double s = work(k, j);
            for (std::size_t i = k + 1; i < m; ++i) s += work(i, k) * work(i, j);
            s *= beta[k];
            work(k, j) -= s;
            for (std::size_t i = k + 1; i < m; ++i) work(i, j) -= s * work(i, k);
        }
    }

    // Backward accumulation of the thin Q factor.
    Matrix q(m, n);
    for (std::size_t j = 0; j < n; ++j) q(j, j) = 1.0;
    for (std::size_t k = n; k-- > 0;) {
        if (beta[k] == 0.0) continue;
        for (std::size_t j = k; j < n; ++j) {
            double s = q(k, j);
            for (std::size_t i = k + 1; i < m; ++i) s += work(i, k) * q(i, j);
            s *= beta[k];
            q(k, j) -= s;
            for (std::size_t i = k + 1; i < m; ++i) q(i, j) -= s * work(i, k);
        }
    }

    // R is the upper triangle; below-diagonal entries are exact zeros of the
    // fresh matrix, never computed residue.
    Matrix r(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) r(i, j) = work(i, j);

    // Sign convention: nonnegative diagonal. Negating row k of R together with
    // column k of Q leaves the product unchanged.
    for (std::size_t k = 0; k < n; ++k) {
        if (r(k, k) < 0.0) {
            for (std::size_t j = k; j < n; ++j) r(k, j) = -r(k, j);
            for (std::size_t i = 0; i < m; ++i) q(i, k) = -q(i, k);
        }
    }
    return {std::move(q), std::move(r)};
}

double spectral_norm_sq(const Matrix& a, std::size_t iters, std::uint64_t seed) {
    if (iters < 1) throw std::invalid_argument("spectral_norm_sq: iters must be >= 1");
    const std::size_t m = a.rows(), n = a.cols();

    // Seeded start vector on the unit sphere.
    std::vector<double> v(n);
    std::uint64_t state = mix_u64(seed ^ 0x517CC1B727220A95ULL);
    double vnorm_sq = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        state += 0x9E3779B97F4A7C15ULL;
        const double u = static_cast<double>(mix_u64(state) >> 11) * 0x1.0p-53;
        v[j] = 2.0 * u - 1.0;
        vnorm_sq += v[j] * v[j];
    }
    if (vnorm_sq == 0.0) v[0] = 1.0, vnorm_sq = 1.0;
    const double inv = 1.0 / std::sqrt(vnorm_sq);
    for (double& x : v) x *= inv;

    std::vector<double> w(m), z(n);
    double lambda = 0.0;
    for (std::size_t it = 0; it < iters; ++it) {
        for (std::size_t i = 0; i < m; ++i) {
            double s = 0.0;
            const double* arow = a.row(i);
            for (std::size_t j = 0; j < n; ++j) s += arow[j] * v[j];
            w[i] = s;
        }
        double lambda_new = 0.0;  // ||a v||^2 = Rayleigh quotient at unit v
        for (std::size_t i = 0; i < m; ++i) lambda_new += w[i] * w[i];
        if (lambda_new == 0.0) return 0.0;

        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < m; ++i) s += a(i, j) * w[i];
            z[j] = s;
        }
        double znorm = 0.0;
        for (std::size_t j = 0; j < n; ++j) znorm += z[j] * z[j];
        znorm = std::sqrt(znorm);
        if (znorm == 0.0) return 0.0;
        for (std::size_t j = 0; j < n; ++j) v[j] = z[j] / znorm;

        const bool settled = it > 0 && std::fabs(lambda_new - lambda) <= 1e-14 * std::max(1.0, lambda_new);
        lambda = lambda_new;
        if (settled) break;
    }
    return lambda;
}

}  // namespace conmf
