// SPDX-License-Identifier: Apache-2.0
//
// pgsc - pilot-guided multimodal semantic communication simulator
// ------------------------------------------------------------------------

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pgsc {

enum class ErrorCode {
    DimensionMismatch,
    ShapeMismatch,
    IllConditioned,
    OddLength,
    OddWidth,
    NonPositivePower,
    ZeroFrame,
    TooShort,
    ZeroPilotSymbol,
    ZeroVector,
    ConfigError,
    IoFailure,
    FormatError,
    NonFinite,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
   public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

   private:
    ErrorCode code_;
};

}  // namespace pgsc
