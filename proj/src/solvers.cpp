#include "conmf/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

namespace conmf {

namespace {

// In-place lower Cholesky of a packed s x s matrix; false on a non-positive
// pivot (also catches NaN).
bool cholesky_inplace(std::vector<double>& mat, std::size_t s) {
    for (std::size_t j = 0; j < s; ++j) {
        double d = mat[j * s + j];
        for (std::size_t k = 0; k < j; ++k) d -= mat[j * s + k] * mat[j * s + k];
        if (!(d > 0.0)) return false;
        const double lj = std::sqrt(d);
        mat[j * s + j] = lj;
        for (std::size_t i = j + 1; i < s; ++i) {
            double v = mat[i * s + j];
            for (std::size_t k = 0; k < j; ++k) v -= mat[i * s + k] * mat[j * s + k];
            mat[i * s + j] = v / lj;
        }
    }
    return true;
}

void cholesky_solve(const std::vector<double>& chol, std::size_t s, std::vector<double>& rhs) {
    for (std::size_t i = 0; i < s; ++i) {
        double v = rhs[i];
        for (std::size_t k = 0; k < i; ++k) v -= chol[i * s + k] * rhs[k];
        rhs[i] = v / chol[i * s + i];
    }
    for (std::size_t i = s; i-- > 0;) {
        double v = rhs[i];
        for (std::size_t k = i + 1; k < s; ++k) v -= chol[k * s + i] * rhs[k];
        rhs[i] = v / chol[i * s + i];
    }
}

double objective_of(const Matrix& a, const Matrix& b, const Matrix& h) {
    return 0.5 * frobenius_norm_sq(sub(b, matmul(a, h)));
}

}  // namespace

NnlsResult nnls_active_set(const Matrix& a, const Matrix& b, double tol) {
    if (a.rows() != b.rows())
        throw std::invalid_argument("nnls_active_set: row mismatch (" + a.shape_str() + " vs " +
                                    b.shape_str() + ")");
    if (!(tol > 0.0)) throw std::invalid_argument("nnls_active_set: tol must be positive");

    const std::size_t c = a.cols(), k = b.cols();
    const Matrix ata = matmul(transpose(a), a);
    const Matrix atb = matmul(transpose(a), b);

    double trace = 0.0;
    for (std::size_t j = 0; j < c; ++j) trace += ata(j, j);
    const double base_ridge = 1e-12 * trace / static_cast<double>(c);

    Matrix h(c, k);
    std::vector<std::uint8_t> passive(c * k, 0);
    std::vector<std::size_t> pivots(k, 0);
    std::vector<std::uint8_t> done(k, 0);
    std::vector<std::uint8_t> pending(k, 0);
    const std::size_t pivot_cap = 3 * c;
    bool warned = false;
    std::size_t solve_passes = 0;

    // Grouped solve: columns sharing a passive mask share one factorization.
    // Results land in z (exact zeros off the passive set).
    auto solve_pending = [&](Matrix& z) {
        ++solve_passes;
        std::map<std::vector<std::uint8_t>, std::vector<std::size_t>> groups;
        for (std::size_t col = 0; col < k; ++col) {
            if (!pending[col]) continue;
            std::vector<std::uint8_t> mask(c);
            for (std::size_t j = 0; j < c; ++j) mask[j] = passive[j * k + col];
            groups[std::move(mask)].push_back(col);
        }
        for (const auto& [mask, cols] : groups) {
            std::vector<std::size_t> idx;
            for (std::size_t j = 0; j < c; ++j)
                if (mask[j]) idx.push_back(j);
            const std::size_t s = idx.size();
            for (std::size_t col : cols)
                for (std::size_t j = 0; j < c; ++j) z(j, col) = 0.0;
            if (s == 0) continue;

            std::vector<double> gram(s * s);
            for (std::size_t r = 0; r < s; ++r)
                for (std::size_t q2 = 0; q2 < s; ++q2) gram[r * s + q2] = ata(idx[r], idx[q2]);

            std::vector<double> chol = gram;
            bool ok = cholesky_inplace(chol, s);
            double ridge = base_ridge;
            for (int attempt = 0; !ok && attempt < 3; ++attempt) {
                if (ridge == 0.0) ridge = 1e-300;
                chol = gram;
                for (std::size_t r = 0; r < s; ++r) chol[r * s + r] += ridge;
                ok = cholesky_inplace(chol, s);
                ridge *= 1e2;
            }
            if (!ok)
                throw std::runtime_error("nnls_active_set: passive-set system is singular beyond repair");

            std::vector<double> rhs(s);
            for (std::size_t col : cols) {
                for (std::size_t r = 0; r < s; ++r) rhs[r] = atb(idx[r], col);
                cholesky_solve(chol, s, rhs);
                for (std::size_t r = 0; r < s; ++r) z(idx[r], col) = rhs[r];
            }
        }
    };

    Matrix z(c, k);
    const std::size_t sweep_cap = 6 * c + 10;
    for (std::size_t sweep = 0; sweep < sweep_cap; ++sweep) {
        // Dual test: w = A^T B - A^T A h. A column is finished when no
        // non-passive coordinate has w above tol.
        const Matrix w = sub(atb, matmul(ata, h));
        bool any_entered = false;
        for (std::size_t col = 0; col < k; ++col) {
            if (done[col]) continue;
            double best = tol;
            std::size_t best_j = c;
            for (std::size_t j = 0; j < c; ++j) {
                if (passive[j * k + col]) continue;
                if (w(j, col) > best) {
                    best = w(j, col);
                    best_j = j;
                }
            }
            if (best_j == c) {
                done[col] = 1;
                continue;
            }
            if (pivots[col] >= pivot_cap) {
                done[col] = 1;  // current h column is feasible; freeze it
                warned = true;
                continue;
            }
            passive[best_j * k + col] = 1;
            ++pivots[col];
            pending[col] = 1;
            any_entered = true;
        }
        if (!any_entered) break;

        // Inner feasibility loop: each pass either accepts the candidate or
        // shrinks a passive set, so it runs at most c+1 times.
        for (std::size_t pass = 0; pass <= c + 1; ++pass) {
            solve_pending(z);
            bool any_infeasible = false;
            for (std::size_t col = 0; col < k; ++col) {
                if (!pending[col]) continue;
                double alpha = 2.0;
                std::size_t alpha_j = c;
                for (std::size_t j = 0; j < c; ++j) {
                    if (!passive[j * k + col] || z(j, col) > 0.0) continue;
                    const double denom = h(j, col) - z(j, col);
                    const double ratio = denom > 0.0 ? h(j, col) / denom : 0.0;
                    if (ratio < alpha) {
                        alpha = ratio;
                        alpha_j = j;
                    }
                }
                if (alpha_j == c) {
                    for (std::size_t j = 0; j < c; ++j) h(j, col) = z(j, col);
                    pending[col] = 0;
                    continue;
                }
                any_infeasible = true;
                for (std::size_t j = 0; j < c; ++j)
                    h(j, col) += alpha * (z(j, col) - h(j, col));
                h(alpha_j, col) = 0.0;
                passive[alpha_j * k + col] = 0;
                for (std::size_t j = 0; j < c; ++j) {
                    if (passive[j * k + col] && h(j, col) <= 0.0) {
                        h(j, col) = 0.0;
                        passive[j * k + col] = 0;
                    }
                }
            }
            if (!any_infeasible) break;
        }
    }

    NnlsResult res;
    res.h = std::move(h);
    res.objective = objective_of(a, b, res.h);
    res.inner_iters = solve_passes;
    res.hit_iteration_cap = warned;
    return res;
}

NnlsResult nnls_nesterov(const Matrix& a, const Matrix& b, const Matrix& h0, std::size_t max_inner,
                         double tol) {
    if (a.rows() != b.rows())
        throw std::invalid_argument("nnls_nesterov: row mismatch (" + a.shape_str() + " vs " +
                                    b.shape_str() + ")");
    if (h0.rows() != a.cols() || h0.cols() != b.cols())
        throw std::invalid_argument("nnls_nesterov: h0 shape " + h0.shape_str() + " does not conform");
    if (max_inner < 1) throw std::invalid_argument("nnls_nesterov: max_inner must be >= 1");
    if (!(tol > 0.0)) throw std::invalid_argument("nnls_nesterov: tol must be positive");
    for (double v : h0.data())
        if (v < 0.0) throw std::invalid_argument("nnls_nesterov: h0 must be nonnegative");

    const Matrix ata = matmul(transpose(a), a);
    const Matrix atb = matmul(transpose(a), b);

    auto projected_gradient_norm = [&](const Matrix& hmat, const Matrix& grad) {
        double s = 0.0;
        for (std::size_t i = 0; i < hmat.size(); ++i) {
            const double g = grad.data()[i];
            const double pg = hmat.data()[i] > 0.0 ? g : std::min(g, 0.0);
            s += pg * pg;
        }
        return std::sqrt(s);
    };

    const double obj0 = objective_of(a, b, h0);
    Matrix h = h0;
    Matrix grad = sub(matmul(ata, h), atb);
    const double pg0 = projected_gradient_norm(h, grad);

    NnlsResult res;
    if (pg0 == 0.0) {  // h0 already stationary
        res.h = std::move(h);
        res.objective = obj0;
        return res;
    }

    const double lips = spectral_norm_sq(a, 500, 0x5EEDULL);
    if (lips <= 0.0) {  // A is numerically zero; gradient was zero above unless atb != 0,
                        // in which case no H changes the residual either
        res.h = std::move(h);
        res.objective = obj0;
        return res;
    }
    const double step = 1.0 / lips;

    Matrix h_prev = h;
    Matrix y = h;
    double alpha = 1.0;
    std::size_t steps = 0;
    bool capped = true;
    for (std::size_t it = 1; it <= max_inner; ++it) {
        const Matrix grad_y = sub(matmul(ata, y), atb);
        Matrix h_next(h.rows(), h.cols());
        for (std::size_t i = 0; i < h.size(); ++i)
            h_next.data()[i] = std::max(0.0, y.data()[i] - step * grad_y.data()[i]);

        const double alpha_next = 0.5 * (1.0 + std::sqrt(4.0 * alpha * alpha + 1.0));
        const double momentum = (alpha - 1.0) / alpha_next;
        for (std::size_t i = 0; i < h.size(); ++i)
            y.data()[i] = h_next.data()[i] + momentum * (h_next.data()[i] - h.data()[i]);

        h_prev = std::move(h);
        h = std::move(h_next);
        alpha = alpha_next;
        steps = it;

        grad = sub(matmul(ata, h), atb);
        if (projected_gradient_norm(h, grad) <= tol * pg0) {
            capped = false;
            break;
        }
    }

    double obj = objective_of(a, b, h);
    if (obj > obj0) {  // acceleration overshoot on a hard instance: keep the start point
        h = h0;
        obj = obj0;
    }
    res.h = std::move(h);
    res.objective = obj;
    res.inner_iters = steps;
    res.hit_iteration_cap = capped;
    return res;
}

}  // namespace conmf
