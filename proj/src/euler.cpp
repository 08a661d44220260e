// SPDX-License-Identifier: Apache-2.0
//
// pgsc - pilot-guided multimodal semantic communication simulator
// ------------------------------------------------------------------------

#include "pgsc/euler.hpp"

#include <numbers>

namespace pgsc {

std::vector<Complex> euler_forward(std::span<const Real> x) {
    if (x.empty() || x.size() % 2 != 0)
        throw Error(ErrorCode::OddLength, "Euler mapping needs an even, nonzero length, got " + std::to_string(x.size()));
    const std::size_t half = x.size() / 2;
    std::vector<Complex> z(half);
    for (std::size_t j = 0; j < half; ++j) z[j] = Complex(x[j], x[half + j]);
    return z;
}

std::vector<Real> euler_inverse(std::span<const Complex> z) {
    const std::size_t half = z.size();
    std::vector<Real> x(2 * half);
    for (std::size_t j = 0; j < half; ++j) {
        x[j] = z[j].real();
        x[half + j] = z[j].imag();
    }
    return x;
}

PolarSignal to_polar(std::span<const Complex> z) {
    PolarSignal p;
    p.magnitude.resize(z.size());
    p.phase.resize(z.size());
    for (std::size_t j = 0; j < z.size(); ++j) {
        const Real r = z[j].real(), s = z[j].imag();
        const Real lambda = std::hypot(r, s);
        Real theta = 0.0;
        if (lambda > 0.0) {
            theta = std::atan2(s, r);
            // atan2(-0, x<0) yields -pi; fold onto the half-open range.
            if (theta <= -std::numbers::pi) theta = std::numbers::pi;
        }
        p.magnitude[j] = lambda;
        p.phase[j] = theta;
    }
    return p;
}

std::vector<Complex> from_polar(const PolarSignal& p) {
    if (p.magnitude.size() != p.phase.size())
        throw Error(ErrorCode::DimensionMismatch, "magnitude and phase lengths differ");
    std::vector<Complex> z(p.magnitude.size());
    for (std::size_t j = 0; j < z.size(); ++j)
        z[j] = Complex(p.magnitude[j] * std::cos(p.phase[j]), p.magnitude[j] * std::sin(p.phase[j]));
    return z;
}

ComplexMatrix euler_forward_rows(const RealMatrix& x) {
    if (x.cols() == 0 || x.cols() % 2 != 0)
        throw Error(ErrorCode::OddLength, "Euler mapping needs an even row width, got " + std::to_string(x.cols()));
    const std::size_t half = x.cols() / 2;
    ComplexMatrix z(x.rows(), half);
    for (std::size_t t = 0; t < x.rows(); ++t)
        for (std::size_t j = 0; j < half; ++j) z(t, j) = Complex(x(t, j), x(t, half + j));
    return z;
}

RealMatrix euler_inverse_rows(const ComplexMatrix& z) {
    const std::size_t half = z.cols();
    RealMatrix x(z.rows(), 2 * half);
    for (std::size_t t = 0; t < z.rows(); ++t)
        for (std::size_t j = 0; j < half; ++j) {
            x(t, j) = z(t, j).real();
            x(t, half + j) = z(t, j).imag();
        }
    return x;
}

}  // namespace pgsc
