#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "conmf/compress.hpp"
#include "conmf/densela.hpp"
#include "conmf/rng.hpp"
#include "conmf/solvers.hpp"

namespace conmf {

enum class SolverKind { ActiveSet, Nesterov };

std::string solver_name(SolverKind s);

/// One factorization run: rank, iteration budget, subproblem solver,
/// compression strategy and the seed that fixes every random draw.
///
/// Substream layout of the run seed: 0 -> G0, 1 -> F0, 2 -> compression
/// draws, 3 -> reserved for data synthesis (see bench).
struct NmfConfig {
    std::size_t p = 5;
    std::size_t outer_iters = 100;
    SolverKind solver = SolverKind::ActiveSet;
    CompressorSpec compressor;
    std::uint64_t seed = 0;

    // subproblem solver settings
    double as_tol = 1e-9;
    std::size_t ne_max_inner = 500;
    double ne_tol = 1e-6;
};

struct RunLabel {
    SolverKind solver = SolverKind::ActiveSet;
    CompressorSpec compressor;
    std::uint64_t seed = 0;

    std::string to_string() const;
};

/// Relative reconstruction error per outer iteration; values[0] is the error
/// of the random initialization.
struct RreTrace {
    std::vector<double> values;
    RunLabel label;
};

/// ||x - g f||_F^2 / ||x||_F^2. Throws on a zero x.
double rre(const Matrix& x, const Matrix& g, const Matrix& f);

struct NmfResult {
    Matrix g;
    Matrix f;
    RreTrace trace;
};

/// Alternating NNLS on the full data (no compression).
NmfResult vanilla_nmf(const Matrix& x, const NmfConfig& cfg);

/// Dual random compression with a pair (L, R) fixed before the loop; per
/// iteration the G-update sees (X R, F R) and the F-update sees (L X, L G).
NmfResult compressed_nmf(const Matrix& x, const NmfConfig& cfg);

/// compressed_nmf with an explicitly supplied pair instead of a drawn one.
NmfResult compressed_nmf_with_pair(const Matrix& x, const NmfConfig& cfg, const CompressionPair& pair);

/// Compression stream: a fresh Gaussian pair every max_iter iterations, each
/// refresh drawn from the substream indexed by its refresh counter.
NmfResult gcs_nmf(const Matrix& x, const NmfConfig& cfg);

/// Dispatch on cfg.compressor.kind.
NmfResult run_nmf(const Matrix& x, const NmfConfig& cfg);

}  // namespace conmf
