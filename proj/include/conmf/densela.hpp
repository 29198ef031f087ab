#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

namespace conmf {

/// Dense real matrix, row-major storage. Entries are 64-bit floats and must
/// be finite; constructors that accept data reject NaN/Inf. Kernels take
/// matrices by const reference and return fresh values, so a constructed
/// Matrix can be shared freely across threads.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols);  // zero-filled
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
    Matrix(std::initializer_list<std::initializer_list<double>> row_lists);

    static Matrix identity(std::size_t n);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

    const double* row(std::size_t i) const { return data_.data() + i * cols_; }
    double* row(std::size_t i) { return data_.data() + i * cols_; }

    const std::vector<double>& data() const noexcept { return data_; }
    std::vector<double>& data() noexcept { return data_; }

    std::string shape_str() const;  // "3x4"

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// a*b with deterministic left-to-right accumulation per output entry.
Matrix matmul(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& a);
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double s);

double frobenius_norm(const Matrix& a);

/// Sum of squared entries (Frobenius norm squared, no square root taken).
double frobenius_norm_sq(const Matrix& a);

struct QrFactors {
    Matrix q;  // rows x cols, orthonormal columns
    Matrix r;  // cols x cols, upper triangular, nonnegative diagonal
};

/// Thin Householder QR of a tall matrix (rows >= cols). Entries of r below
/// the diagonal are exactly zero; the sign convention diag(r) >= 0 makes the
/// factorization unique for full-rank inputs. Rank deficiency is allowed and
/// shows up as zero diagonal entries in r.
QrFactors householder_qr(const Matrix& a);

/// Power-iteration estimate of the largest eigenvalue of a^T a, i.e. the
/// squared spectral norm of a. Runs at most `iters` iterations (stops early
/// once the estimate is stationary to machine precision) from a start vector
/// derived deterministically from `seed`.
double spectral_norm_sq(const Matrix& a, std::size_t iters, std::uint64_t seed);

}  // namespace conmf
