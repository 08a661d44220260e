// SPDX-License-Identifier: Apache-2.0
//
// pgsc - pilot-guided multimodal semantic communication simulator
// ------------------------------------------------------------------------

#pragma once

#include <span>
#include <vector>

#include "pgsc/numeric.hpp"

namespace pgsc {

/// Magnitude/phase view of a complex vector. Phase lies in (-pi, pi];
/// a zero magnitude is given phase 0.
struct PolarSignal {
    std::vector<Real> magnitude;
    std::vector<Real> phase;
};

/// Real -> complex mapping: the first half of x becomes the real parts, the
/// second half the imaginary parts. Throws OddLength for odd or empty x.
std::vector<Complex> euler_forward(std::span<const Real> x);

/// Complex -> real decomposition, [Re(z) ; Im(z)].
std::vector<Real> euler_inverse(std::span<const Complex> z);

PolarSignal to_polar(std::span<const Complex> z);
std::vector<Complex> from_polar(const PolarSignal& p);

/// Row-wise forms used by the codecs: T x d real <-> T x d/2 complex.
ComplexMatrix euler_forward_rows(const RealMatrix& x);
RealMatrix euler_inverse_rows(const ComplexMatrix& z);

}  // namespace pgsc
