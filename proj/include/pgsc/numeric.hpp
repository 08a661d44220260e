// SPDX-License-Identifier: Apache-2.0
//
// pgsc - pilot-guided multimodal semantic communication simulator
// ------------------------------------------------------------------------

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "pgsc/error.hpp"

namespace pgsc {

using Real = double;
using Complex = std::complex<double>;

/// Dense row-major matrix. Used for both the real-valued network tensors
/// and the complex-valued channel-domain signals.
template <typename T>
class Matrix {
   public:
    using value_type = T;

    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, T fill = T{}) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<T> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != rows_ * cols_)
            throw Error(ErrorCode::DimensionMismatch, "matrix data length does not match shape");
    }
    Matrix(std::initializer_list<std::initializer_list<T>> rows) {
        rows_ = rows.size();
        cols_ = rows_ ? rows.begin()->size() : 0;
        data_.reserve(rows_ * cols_);
        for (const auto& r : rows) {
            if (r.size() != cols_) throw Error(ErrorCode::DimensionMismatch, "ragged matrix literal");
            data_.insert(data_.end(), r.begin(), r.end());
        }
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1};
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    T& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    const T& operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }
    T& operator[](std::size_t i) noexcept { return data_[i]; }
    const T& operator[](std::size_t i) const noexcept { return data_[i]; }

    std::span<T> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    std::span<const T> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

    std::span<T> data() noexcept { return data_; }
    std::span<const T> data() const noexcept { return data_; }
    const std::vector<T>& storage() const noexcept { return data_; }

    void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

    bool same_shape(const Matrix& o) const noexcept { return rows_ == o.rows_ && cols_ == o.cols_; }
    bool operator==(const Matrix& o) const = default;

   private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

using RealMatrix = Matrix<Real>;
using ComplexMatrix = Matrix<Complex>;

std::string shape_string(std::size_t rows, std::size_t cols);

template <typename T>
std::string shape_of(const Matrix<T>& m) {
    return shape_string(m.rows(), m.cols());
}

bool all_finite(const RealMatrix& a) noexcept;
bool all_finite(const ComplexMatrix& a) noexcept;

/// Conjugate transpose.
ComplexMatrix hermitian(const ComplexMatrix& a);
RealMatrix transpose(const RealMatrix& a);

/// Matrix product. The inner sum runs left to right over k, so results are
/// bit-identical for identical inputs.
RealMatrix matmul(const RealMatrix& a, const RealMatrix& b);
ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b);

/// a^T * b without materializing the transpose.
RealMatrix matmul_tn(const RealMatrix& a, const RealMatrix& b);
/// a * b^T without materializing the transpose.
RealMatrix matmul_nt(const RealMatrix& a, const RealMatrix& b);

RealMatrix add(const RealMatrix& a, const RealMatrix& b);
RealMatrix sub(const RealMatrix& a, const RealMatrix& b);
ComplexMatrix add(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix sub(const ComplexMatrix& a, const ComplexMatrix& b);
RealMatrix scale(const RealMatrix& a, Real s);
ComplexMatrix scale(const ComplexMatrix& a, Complex s);
void add_inplace(RealMatrix& acc, const RealMatrix& b);
void axpy_inplace(RealMatrix& acc, Real alpha, const RealMatrix& b);

Real frobenius_norm_sq(const RealMatrix& a) noexcept;
Real frobenius_norm_sq(const ComplexMatrix& a) noexcept;
Real max_abs_diff(const RealMatrix& a, const RealMatrix& b);
Real max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);

/// Solves A X = B for Hermitian positive definite A by Cholesky factorization.
/// Throws IllConditioned when min pivot / max pivot < 1e-12 or a pivot is not positive.
ComplexMatrix solve_hermitian_system(const ComplexMatrix& a, const ComplexMatrix& b);

inline constexpr Real kNormalizeEpsilon = 1e-12;
inline constexpr Real kPivotRatioFloor = 1e-12;

/// Divides each row with sum > 1e-12 by its sum. Rows at or below the floor are
/// returned unchanged, so an all-zero row stays all-zero.
RealMatrix row_l1_normalize(const RealMatrix& a);

enum class Activation { Relu, Tanh, Sigmoid, SoftmaxRow };

RealMatrix elementwise(const RealMatrix& a, Activation fn);

inline Real relu(Real x) noexcept { return x > 0.0 ? x : 0.0; }
inline Real sigmoid(Real x) noexcept { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace pgsc
