#pragma once

#include <cstddef>

#include "conmf/densela.hpp"

namespace conmf {

/// Solution of min_{H >= 0} ||B - A H||_F for one or more right-hand sides.
struct NnlsResult {
    Matrix h;                      // entrywise >= 0, zeros are exact
    double objective = 0.0;        // 0.5 * ||B - A H||_F^2, recomputed at return
    std::size_t inner_iters = 0;   // solve passes (active set) or gradient steps (nesterov)
    bool hit_iteration_cap = false;
};

/// Column-grouped active-set solver (Lawson-Hanson with shared A^T A / A^T B
/// and one normal-equations solve per distinct passive set). At return every
/// column satisfies the KKT conditions to tolerance tol: h >= 0, the gradient
/// g = A^T(A h - b) has g_j >= -tol, and |h_j g_j| <= tol (1 + ||g||_inf).
/// Columns that exhaust 3*cols(A) pivots are frozen at their current feasible
/// iterate and flagged through hit_iteration_cap.
NnlsResult nnls_active_set(const Matrix& a, const Matrix& b, double tol);

/// Accelerated projected-gradient solver with step 1/L, L the largest
/// eigenvalue of A^T A. Starts from h0 >= 0 and stops once the projected
/// gradient norm falls to tol times its initial value or after max_inner
/// steps. The returned objective never exceeds the objective at h0.
NnlsResult nnls_nesterov(const Matrix& a, const Matrix& b, const Matrix& h0, std::size_t max_inner,
                         double tol);

}  // namespace conmf
