// Test-only reference implementations, independent of the library's own
// computation paths: naive matmul, Jacobi eigenvalues, dense LS by Gaussian
// elimination, exhaustive NNLS enumeration, a deflated power-iteration SVD
// and a KKT certificate.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "conmf/densela.hpp"

namespace oracle {

using conmf::Matrix;

// Per-entry explicit sum, i-j-k order (the library accumulates i-k-j).
inline Matrix triple_loop_matmul(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
            out(i, j) = s;
        }
    return out;
}

inline Matrix random_matrix(std::mt19937_64& gen, std::size_t rows, std::size_t cols,
                            double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    Matrix out(rows, cols);
    for (auto& v : out.data()) v = dist(gen);
    return out;
}

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, descending.
inline std::vector<double> jacobi_eigenvalues(Matrix a, std::size_t sweeps = 100) {
    const std::size_t n = a.rows();
    for (std::size_t sweep = 0; sweep < sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
        if (off < 1e-300) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (a(p, q) == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> eig(n);
    for (std::size_t i = 0; i < n; ++i) eig[i] = a(i, i);
    std::sort(eig.rbegin(), eig.rend());
    return eig;
}

// Dense solve by Gaussian elimination with partial pivoting; false if singular.
inline bool gauss_solve(std::vector<std::vector<double>> m, std::vector<double>& rhs) {
    const std::size_t n = rhs.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::fabs(m[r][col]) > std::fabs(m[piv][col])) piv = r;
        if (std::fabs(m[piv][col]) < 1e-300) return false;
        std::swap(m[col], m[piv]);
        std::swap(rhs[col], rhs[piv]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = m[r][col] / m[col][col];
            for (std::size_t c = col; c < n; ++c) m[r][c] -= f * m[col][c];
            rhs[r] -= f * rhs[col];
        }
    }
    for (std::size_t i = n; i-- > 0;) {
        double v = rhs[i];
        for (std::size_t c = i + 1; c < n; ++c) v -= m[i][c] * rhs[c];
        rhs[i] = v / m[i][i];
    }
    return true;
}

// Exhaustive NNLS per column: try every passive subset, solve the
// equality-constrained LS on it, keep the best feasible candidate.
inline double enumerate_nnls_column(const Matrix& a, const std::vector<double>& bcol,
                                    std::vector<double>* best_h = nullptr) {
    const std::size_t c = a.cols(), r = a.rows();
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> h(c);
    for (std::size_t mask = 0; mask < (std::size_t(1) << c); ++mask) {
        std::vector<std::size_t> idx;
        for (std::size_t j = 0; j < c; ++j)
            if (mask & (std::size_t(1) << j)) idx.push_back(j);
        std::fill(h.begin(), h.end(), 0.0);
        if (!idx.empty()) {
            const std::size_t s = idx.size();
            std::vector<std::vector<double>> gram(s, std::vector<double>(s, 0.0));
            std::vector<double> rhs(s, 0.0);
            for (std::size_t u = 0; u < s; ++u) {
                for (std::size_t v = 0; v < s; ++v)
                    for (std::size_t row = 0; row < r; ++row)
                        gram[u][v] += a(row, idx[u]) * a(row, idx[v]);
                for (std::size_t row = 0; row < r; ++row) rhs[u] += a(row, idx[u]) * bcol[row];
            }
            if (!gauss_solve(gram, rhs)) continue;
            bool feasible = true;
            for (double v : rhs)
                if (v < -1e-12) feasible = false;
            if (!feasible) continue;
            for (std::size_t u = 0; u < s; ++u) h[idx[u]] = std::max(0.0, rhs[u]);
        }
        double obj = 0.0;
        for (std::size_t row = 0; row < r; ++row) {
            double resid = bcol[row];
            for (std::size_t j = 0; j < c; ++j) resid -= a(row, j) * h[j];
            obj += resid * resid;
        }
        obj *= 0.5;
        if (obj < best) {
            best = obj;
            if (best_h) *best_h = h;
        }
    }
    return best;
}

// Top singular values by repeated deflation: power-iterate the residual,
// subtract sigma*u*v^T, repeat.
inline std::vector<double> deflated_singular_values(Matrix m, std::size_t count,
                                                    std::size_t iters = 500) {
    std::vector<double> sv;
    std::mt19937_64 gen(12345);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (std::size_t k = 0; k < count; ++k) {
        std::vector<double> v(m.cols());
        for (auto& x : v) x = dist(gen);
        std::vector<double> u(m.rows(), 0.0);
        double sigma = 0.0;
        for (std::size_t it = 0; it < iters; ++it) {
            // u = M v, normalize; v = M^T u, normalize with sigma
            for (std::size_t i = 0; i < m.rows(); ++i) {
                double s = 0.0;
                for (std::size_t j = 0; j < m.cols(); ++j) s += m(i, j) * v[j];
                u[i] = s;
            }
            double un = 0.0;
            for (double x : u) un += x * x;
            un = std::sqrt(un);
            if (un == 0.0) break;
            for (auto& x : u) x /= un;
            for (std::size_t j = 0; j < m.cols(); ++j) {
                double s = 0.0;
                for (std::size_t i = 0; i < m.rows(); ++i) s += m(i, j) * u[i];
                v[j] = s;
            }
            double vn = 0.0;
            for (double x : v) vn += x * x;
            vn = std::sqrt(vn);
            sigma = vn;
            if (vn == 0.0) break;
            for (auto& x : v) x /= vn;
        }
        sv.push_back(sigma);
        for (std::size_t i = 0; i < m.rows(); ++i)
            for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) -= sigma * u[i] * v[j];
    }
    return sv;
}

struct KktViolation {
    double gradient_sign = 0.0;       // max over entries of max(-g, 0)
    double complementarity = 0.0;     // max over entries of |h g| / (1 + ||g||_inf per column)
    double negativity = 0.0;          // max over entries of max(-h, 0)
};

// Violation magnitudes of the NNLS optimality conditions for min ||B - A H||.
inline KktViolation kkt_violation(const Matrix& a, const Matrix& b, const Matrix& h) {
    KktViolation out;
    const Matrix grad = conmf::sub(conmf::matmul(conmf::matmul(conmf::transpose(a), a), h),
                                   conmf::matmul(conmf::transpose(a), b));
    for (std::size_t col = 0; col < h.cols(); ++col) {
        double ginf = 0.0;
        for (std::size_t j = 0; j < h.rows(); ++j) ginf = std::max(ginf, std::fabs(grad(j, col)));
        for (std::size_t j = 0; j < h.rows(); ++j) {
            out.gradient_sign = std::max(out.gradient_sign, -grad(j, col));
            out.complementarity =
                std::max(out.complementarity, std::fabs(h(j, col) * grad(j, col)) / (1.0 + ginf));
            out.negativity = std::max(out.negativity, -h(j, col));
        }
    }
    return out;
}

}  // namespace oracle
