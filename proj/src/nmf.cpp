#include "conmf/nmf.hpp"

#include <functional>
#include <memory>
#include <stdexcept>

namespace conmf {

namespace {

void check_nonnegative_data(const Matrix& x, const char* who) {
    for (double v : x.data())
        if (v < 0.0) throw std::invalid_argument(std::string(who) + ": x must be nonnegative");
}

void check_config(const NmfConfig& cfg) {
    if (cfg.p < 1) throw std::invalid_argument("NmfConfig: p must be >= 1");
    if (cfg.outer_iters < 1) throw std::invalid_argument("NmfConfig: outer_iters must be >= 1");
}

struct Factors {
    Matrix g;
    Matrix f;
};

Factors init_factors(const Matrix& x, const NmfConfig& cfg) {
    const RandomSource base(cfg.seed);
    return {nonneg_uniform_matrix(base.substream(0), x.rows(), cfg.p),
            nonneg_uniform_matrix(base.substream(1), cfg.p, x.cols())};
}

// G-update in transposed canonical form: min_{G>=0} ||X_R - G F_R|| becomes
// min_{H>=0} ||X_R^T - F_R^T H|| with H = G^T.
Matrix update_g(const Matrix& x_r, const Matrix& f_r, const Matrix& g_prev, const NmfConfig& cfg) {
    const Matrix a = transpose(f_r);
    const Matrix bt = transpose(x_r);
    if (cfg.solver == SolverKind::ActiveSet)
        return transpose(nnls_active_set(a, bt, cfg.as_tol).h);
    return transpose(nnls_nesterov(a, bt, transpose(g_prev), cfg.ne_max_inner, cfg.ne_tol).h);
}

Matrix update_f(const Matrix& x_l, const Matrix& g_l, const Matrix& f_prev, const NmfConfig& cfg) {
    if (cfg.solver == SolverKind::ActiveSet)
        return nnls_active_set(g_l, x_l, cfg.as_tol).h;
    return nnls_nesterov(g_l, x_l, f_prev, cfg.ne_max_inner, cfg.ne_tol).h;
}

struct CompressOps {
    std::function<Matrix(const Matrix&)> apply_left;   // M -> L M
    std::function<Matrix(const Matrix&)> apply_right;  // M -> M R
};

// Shared driver for every compressed variant. ops_for_refresh(i) supplies the
// pair for the i-th refresh (1-based); refresh_period of kInfinite means the
// first pair is kept for the whole run.
NmfResult run_compressed_loop(const Matrix& x, const NmfConfig& cfg,
                              const std::function<CompressOps(std::size_t)>& ops_for_refresh,
                              std::size_t refresh_period) {
    auto [g, f] = init_factors(x, cfg);
    RreTrace trace;
    trace.label = {cfg.solver, cfg.compressor, cfg.seed};
    trace.values.reserve(cfg.outer_iters + 1);
    trace.values.push_back(rre(x, g, f));

    std::size_t iters_done = 0, refresh = 0;
    while (iters_done < cfg.outer_iters) {
        ++refresh;
        const CompressOps ops = ops_for_refresh(refresh);
        const Matrix x_l = ops.apply_left(x);
        const Matrix x_r = ops.apply_right(x);
        const std::size_t remaining = cfg.outer_iters - iters_done;
        const std::size_t block =
            refresh_period == CompressorSpec::kInfinite ? remaining : std::min(refresh_period, remaining);
        for (std::size_t counter = 0; counter < block; ++counter) {
            const Matrix f_r = ops.apply_right(f);
            g = update_g(x_r, f_r, g, cfg);
            const Matrix g_l = ops.apply_left(g);
            f = update_f(x_l, g_l, f, cfg);
            trace.values.push_back(rre(x, g, f));
            ++iters_done;
        }
    }
    return {std::move(g), std::move(f), std::move(trace)};
}

CompressOps ops_from_pair(std::shared_ptr<const CompressionPair> pair) {
    CompressOps ops;
    ops.apply_left = [pair](const Matrix& mat) { return matmul(pair->left, mat); };
    ops.apply_right = [pair](const Matrix& mat) { return matmul(mat, pair->right); };
    return ops;
}

}  // namespace

std::string solver_name(SolverKind s) {
    return s == SolverKind::ActiveSet ? "active_set" : "nesterov";
}

std::string RunLabel::to_string() const {
    return solver_name(solver) + "/" + compressor.describe() + "/seed=" + std::to_string(seed);
}

double rre(const Matrix& x, const Matrix& g, const Matrix& f) {
    const double denom = frobenius_norm_sq(x);
    if (denom == 0.0) throw std::invalid_argument("rre: x has zero norm");
    return frobenius_norm_sq(sub(x, matmul(g, f))) / denom;
}

NmfResult vanilla_nmf(const Matrix& x, const NmfConfig& cfg) {
    check_config(cfg);
    check_nonnegative_data(x, "vanilla_nmf");
    if (cfg.compressor.kind != CompressorKind::None)
        throw std::invalid_argument("vanilla_nmf: compressor must be None");

    auto [g, f] = init_factors(x, cfg);
    RreTrace trace;
    trace.label = {cfg.solver, cfg.compressor, cfg.seed};
    trace.values.reserve(cfg.outer_iters + 1);
    trace.values.push_back(rre(x, g, f));
    for (std::size_t it = 0; it < cfg.outer_iters; ++it) {
        g = update_g(x, f, g, cfg);
        f = update_f(x, g, f, cfg);
        trace.values.push_back(rre(x, g, f));
    }
    return {std::move(g), std::move(f), std::move(trace)};
}

NmfResult compressed_nmf(const Matrix& x, const NmfConfig& cfg) {
    check_config(cfg);
    check_nonnegative_data(x, "compressed_nmf");
    const CompressorSpec& spec = cfg.compressor;
    if (spec.kind != CompressorKind::Gaussian && spec.kind != CompressorKind::Rsi &&
        spec.kind != CompressorKind::CountGauss)
        throw std::invalid_argument("compressed_nmf: compressor must be Gaussian, Rsi or CountGauss");
    const std::size_t n = x.rows(), m = x.cols();
    spec.validate(n, m, cfg.p);

    const RandomSource comp_src = RandomSource(cfg.seed).substream(2);
    switch (spec.kind) {
        case CompressorKind::Gaussian: {
            auto pair = std::make_shared<CompressionPair>(
                stream_pair(comp_src, 1, n, m, cfg.p, spec.nu));
            return run_compressed_loop(
                x, cfg, [&](std::size_t) { return ops_from_pair(pair); }, CompressorSpec::kInfinite);
        }
        case CompressorKind::Rsi: {
            auto pair = std::make_shared<CompressionPair>(
                CompressionPair{rsi_left(x, cfg.p, spec.nu, spec.q, comp_src.substream(0)),
                                rsi_right(x, cfg.p, spec.nu, spec.q, comp_src.substream(1))});
            return run_compressed_loop(
                x, cfg, [&](std::size_t) { return ops_from_pair(pair); }, CompressorSpec::kInfinite);
        }
        default: {  // CountGauss
            auto cg_l = std::make_shared<CountGaussCompressor>(
                countgauss_left(comp_src.substream(0), n, m, cfg.p, spec.nu, spec.mu));
            auto cg_r = std::make_shared<CountGaussCompressor>(
                countgauss_right(comp_src.substream(1), n, m, cfg.p, spec.nu, spec.mu));
            CompressOps ops;
            ops.apply_left = [cg_l](const Matrix& mat) { return cg_l->apply(mat); };
            ops.apply_right = [cg_r](const Matrix& mat) { return transpose(cg_r->apply(transpose(mat))); };
            return run_compressed_loop(
                x, cfg, [&](std::size_t) { return ops; }, CompressorSpec::kInfinite);
        }
    }
}

NmfResult compressed_nmf_with_pair(const Matrix& x, const NmfConfig& cfg, const CompressionPair& pair) {
    check_config(cfg);
    check_nonnegative_data(x, "compressed_nmf_with_pair");
    if (pair.left.cols() != x.rows() || pair.right.rows() != x.cols())
        throw std::invalid_argument("compressed_nmf_with_pair: pair does not conform to x");
    auto shared = std::make_shared<CompressionPair>(pair);
    return run_compressed_loop(
        x, cfg, [&](std::size_t) { return ops_from_pair(shared); }, CompressorSpec::kInfinite);
}

NmfResult gcs_nmf(const Matrix& x, const NmfConfig& cfg) {
    check_config(cfg);
    check_nonnegative_data(x, "gcs_nmf");
    const CompressorSpec& spec = cfg.compressor;
    if (spec.kind != CompressorKind::Stream)
        throw std::invalid_argument("gcs_nmf: compressor must be Stream");
    const std::size_t n = x.rows(), m = x.cols();
    spec.validate(n, m, cfg.p);

    const RandomSource comp_src = RandomSource(cfg.seed).substream(2);
    auto provider = [&](std::size_t refresh) {
        auto pair = std::make_shared<CompressionPair>(
            stream_pair(comp_src, refresh, n, m, cfg.p, spec.nu_i));
        return ops_from_pair(std::move(pair));
    };
    return run_compressed_loop(x, cfg, provider, spec.max_iter);
}

NmfResult run_nmf(const Matrix& x, const NmfConfig& cfg) {
    switch (cfg.compressor.kind) {
        case CompressorKind::None:
            return vanilla_nmf(x, cfg);
        case CompressorKind::Stream:
            return gcs_nmf(x, cfg);
        default:
            return compressed_nmf(x, cfg);
    }
}

}  // namespace conmf
