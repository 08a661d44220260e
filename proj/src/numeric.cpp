// SPDX-License-Identifier: Apache-2.0
//
// pgsc - pilot-guided multimodal semantic communication simulator
// ------------------------------------------------------------------------

#include "pgsc/numeric.hpp"

#include <algorithm>
#include <limits>

namespace pgsc {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::IllConditioned: return "IllConditioned";
        case ErrorCode::OddLength: return "OddLength";
        case ErrorCode::OddWidth: return "OddWidth";
        case ErrorCode::NonPositivePower: return "NonPositivePower";
        case ErrorCode::ZeroFrame: return "ZeroFrame";
        case ErrorCode::TooShort: return "TooShort";
        case ErrorCode::ZeroPilotSymbol: return "ZeroPilotSymbol";
        case ErrorCode::ZeroVector: return "ZeroVector";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::IoFailure: return "IoFailure";
        case ErrorCode::FormatError: return "FormatError";
        case ErrorCode::NonFinite: return "NonFinite";
    }
    return "Unknown";
}

std::string shape_string(std::size_t rows, std::size_t cols) {
    return std::to_string(rows) + "x" + std::to_string(cols);
}

namespace {

template <typename T>
bool finite_all(const Matrix<T>& a) noexcept {
    for (const auto& v : a.data()) {
        if constexpr (std::is_same_v<T, Complex>) {
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
        } else {
            if (!std::isfinite(v)) return false;
        }
    }
    return true;
}

template <typename T>
Matrix<T> matmul_impl(const Matrix<T>& a, const Matrix<T>& b) {
    if (a.cols() != b.rows())
        throw Error(ErrorCode::DimensionMismatch, "matmul " + shape_of(a) + " * " + shape_of(b));
    const std::size_t n = a.rows(), m = b.cols(), inner = a.cols();
    Matrix<T> out(n, m);
    // i-k-j order keeps each output element's sum in increasing k.
    for (std::size_t i = 0; i < n; ++i) {
        T* o = &out(i, 0);
        for (std::size_t k = 0; k < inner; ++k) {
            const T aik = a(i, k);
            const T* brow = &b(k, 0);
            for (std::size_t j = 0; j < m; ++j) o[j] += aik * brow[j];
        }
    }
    return out;
}

template <typename T>
Matrix<T> zip_impl(const Matrix<T>& a, const Matrix<T>& b, bool subtract) {
    if (!a.same_shape(b)) throw Error(ErrorCode::DimensionMismatch, shape_of(a) + " vs " + shape_of(b));
    Matrix<T> out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = subtract ? out[i] - b[i] : out[i] + b[i];
    return out;
}

template <typename T>
Real max_abs_diff_impl(const Matrix<T>& a, const Matrix<T>& b) {
    if (!a.same_shape(b)) throw Error(ErrorCode::DimensionMismatch, shape_of(a) + " vs " + shape_of(b));
    Real m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, static_cast<Real>(std::abs(a[i] - b[i])));
    return m;
}

}  // namespace

bool all_finite(const RealMatrix& a) noexcept { return finite_all(a); }
bool all_finite(const ComplexMatrix& a) noexcept { return finite_all(a); }

ComplexMatrix hermitian(const ComplexMatrix& a) {
    ComplexMatrix out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = std::conj(a(i, j));
    return out;
}

RealMatrix transpose(const RealMatrix& a) {
    RealMatrix out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
    return out;
}

RealMatrix matmul(const RealMatrix& a, const RealMatrix& b) { return matmul_impl(a, b); }
ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b) { return matmul_impl(a, b); }

RealMatrix matmul_tn(const RealMatrix& a, const RealMatrix& b) {
    if (a.rows() != b.rows())
        throw Error(ErrorCode::DimensionMismatch, "matmul_tn " + shape_of(a) + " * " + shape_of(b));
    RealMatrix out(a.cols(), b.cols());
    for (std::size_t k = 0; k < a.rows(); ++k) {
        const Real* arow = &a(k, 0);
        const Real* brow = &b(k, 0);
        for (std::size_t i = 0; i < a.cols(); ++i) {
            const Real aki = arow[i];
            if (aki == 0.0) continue;
            Real* o = &out(i, 0);
            for (std::size_t j = 0; j < b.cols(); ++j) o[j] += aki * brow[j];
        }
    }
    return out;
}

RealMatrix matmul_nt(const RealMatrix& a, const RealMatrix& b) {
    if (a.cols() != b.cols())
        throw Error(ErrorCode::DimensionMismatch, "matmul_nt " + shape_of(a) + " * " + shape_of(b));
    RealMatrix out(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const Real* arow = &a(i, 0);
        for (std::size_t j = 0; j < b.rows(); ++j) {
            const Real* brow = &b(j, 0);
            Real s = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) s += arow[k] * brow[k];
            out(i, j) = s;
        }
    }
    return out;
}

RealMatrix add(const RealMatrix& a, const RealMatrix& b) { return zip_impl(a, b, false); }
RealMatrix sub(const RealMatrix& a, const RealMatrix& b) { return zip_impl(a, b, true); }
ComplexMatrix add(const ComplexMatrix& a, const ComplexMatrix& b) { return zip_impl(a, b, false); }
ComplexMatrix sub(const ComplexMatrix& a, const ComplexMatrix& b) { return zip_impl(a, b, true); }

RealMatrix scale(const RealMatrix& a, Real s) {
    RealMatrix out = a;
    for (auto& v : out.data()) v *= s;
    return out;
}

ComplexMatrix scale(const ComplexMatrix& a, Complex s) {
    ComplexMatrix out = a;
    for (auto& v : out.data()) v *= s;
    return out;
}

void add_inplace(RealMatrix& acc, const RealMatrix& b) { axpy_inplace(acc, 1.0, b); }

void axpy_inplace(RealMatrix& acc, Real alpha, const RealMatrix& b) {
    if (!acc.same_shape(b)) throw Error(ErrorCode::DimensionMismatch, shape_of(acc) + " vs " + shape_of(b));
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += alpha * b[i];
}

Real frobenius_norm_sq(const RealMatrix& a) noexcept {
    Real s = 0.0;
    for (auto v : a.data()) s += v * v;
    return s;
}

Real frobenius_norm_sq(const ComplexMatrix& a) noexcept {
    Real s = 0.0;
    for (auto v : a.data()) s += std::norm(v);
    return s;
}

Real max_abs_diff(const RealMatrix& a, const RealMatrix& b) { return max_abs_diff_impl(a, b); }
Real max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) { return max_abs_diff_impl(a, b); }

ComplexMatrix solve_hermitian_system(const ComplexMatrix& a, const ComplexMatrix& b) {
    const std::size_t n = a.rows();
    if (a.cols() != n) throw Error(ErrorCode::DimensionMismatch, "system matrix not square: " + shape_of(a));
    if (b.rows() != n) throw Error(ErrorCode::DimensionMismatch, "rhs " + shape_of(b) + " for " + shape_of(a));

    // Cholesky A = L L^H; the pivots are the squared diagonal entries of L.
    ComplexMatrix l(n, n);
    std::vector<Real> pivots(n);
    for (std::size_t j = 0; j < n; ++j) {
        Real d = a(j, j).real();
        for (std::size_t k = 0; k < j; ++k) d -= std::norm(l(j, k));
        if (!(d > 0.0) || !std::isfinite(d))
            throw Error(ErrorCode::IllConditioned, "non-positive pivot in Hermitian solve");
        pivots[j] = d;
        const Real ljj = std::sqrt(d);
        l(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            Complex s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * std::conj(l(j, k));
            l(i, j) = s / ljj;
        }
    }
    const auto [mn, mx] = std::minmax_element(pivots.begin(), pivots.end());
    if (n > 0 && *mn / *mx < kPivotRatioFloor)
        throw Error(ErrorCode::IllConditioned, "pivot ratio below 1e-12 in Hermitian solve");

    ComplexMatrix x = b;
    for (std::size_t c = 0; c < b.cols(); ++c) {
        for (std::size_t i = 0; i < n; ++i) {
            Complex s = x(i, c);
            for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * x(k, c);
            x(i, c) = s / l(i, i);
        }
        for (std::size_t ii = n; ii-- > 0;) {
            Complex s = x(ii, c);
            for (std::size_t k = ii + 1; k < n; ++k) s -= std::conj(l(k, ii)) * x(k, c);
            x(ii, c) = s / l(ii, ii);
        }
    }
    return x;
}

RealMatrix row_l1_normalize(const RealMatrix& a) {
    RealMatrix out = a;
    for (std::size_t r = 0; r < out.rows(); ++r) {
        auto row = out.row(r);
        Real s = 0.0;
        for (auto v : row) s += v;
        if (s > kNormalizeEpsilon)
            for (auto& v : row) v /= s;
    }
    return out;
}

RealMatrix elementwise(const RealMatrix& a, Activation fn) {
    RealMatrix out = a;
    switch (fn) {
        case Activation::Relu:
            for (auto& v : out.data()) v = relu(v);
            break;
        case Activation::Tanh:
            for (auto& v : out.data()) v = std::tanh(v);
            break;
        case Activation::Sigmoid:
            for (auto& v : out.data()) v = sigmoid(v);
            break;
        case Activation::SoftmaxRow:
            if (a.cols() == 0) throw Error(ErrorCode::DimensionMismatch, "softmax over zero columns");
            for (std::size_t r = 0; r < out.rows(); ++r) {
                auto row = out.row(r);
                const Real mx = *std::max_element(row.begin(), row.end());
                Real s = 0.0;
                for (auto& v : row) {
                    v = std::exp(v - mx);
                    s += v;
                }
                for (auto& v : row) v /= s;
            }
            break;
    }
    return out;
}

}  // namespace pgsc
