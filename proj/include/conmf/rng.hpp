#pragma once

#include <cstdint>
#include <vector>

#include "conmf/densela.hpp"

namespace conmf {

/// Addressable pseudo-random source identified by a (seed, stream_id) pair.
/// A source is an immutable descriptor: every generator call restarts the
/// same value sequence, so identical arguments always produce identical
/// output. Independent sequences are obtained through substream(), which
/// makes any point of a run replayable in isolation — substream i can be
/// re-derived later without generating streams 0..i-1 first.
class RandomSource {
public:
    explicit RandomSource(std::uint64_t seed, std::uint64_t stream_id = 0) noexcept
        : seed_(seed), stream_(stream_id) {}

    RandomSource substream(std::uint64_t id) const noexcept;

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_; }

    /// Stateful iterator over this source's value sequence (splitmix-style
    /// counter generator keyed on the seed/stream pair).
    class Sequence {
    public:
        explicit Sequence(std::uint64_t key) noexcept : state_(key) {}
        std::uint64_t next_u64() noexcept;
        double next_uniform() noexcept;   // [0, 1)
        double next_gaussian() noexcept;  // standard normal via inverse CDF, one draw each

    private:
        std::uint64_t state_;
    };

    Sequence sequence() const noexcept;

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
};

/// Deterministically derive an independent 64-bit seed from (base, index).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept;

/// rows x cols matrix of i.i.d. N(0, std_dev^2) entries, consuming exactly
/// rows*cols draws of the stream in row-major order.
Matrix gaussian_matrix(const RandomSource& src, std::size_t rows, std::size_t cols, double std_dev);

/// rows x cols matrix of i.i.d. Uniform[0,1) entries.
Matrix nonneg_uniform_matrix(const RandomSource& src, std::size_t rows, std::size_t cols);

/// Sparse sign-and-bucket sketch: represents the out_dim x in_dim matrix S
/// with exactly one nonzero per column, S[bucket[j], j] = sign[j].
struct CountSketch {
    std::vector<std::size_t> bucket;  // length in_dim, values in [0, out_dim)
    std::vector<double> sign;         // length in_dim, each +1 or -1
    std::size_t out_dim = 0;

    std::size_t in_dim() const noexcept { return bucket.size(); }

    /// Dense out_dim x in_dim materialization of S (testing / inspection).
    Matrix dense() const;
};

CountSketch countsketch_structure(const RandomSource& src, std::size_t in_dim, std::size_t out_dim);

}  // namespace conmf
