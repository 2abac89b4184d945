#pragma once

#include <stdexcept>
#include <string>

namespace manip {

enum class ErrorCode {
    InvalidDepth,
    OutOfBounds,
    ShapeMismatch,
    EmptyObject,
    BehindCamera,
    MaskOverlap,
    EmptyRegion,
    DegenerateBox,
    DegenerateScene,
    EmptySample,
    InsufficientFrames,
    InvalidRotation,
    FormatError,
    IoError,
    ConfigError,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, std::string message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
          code_(code) {}

    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

}  // namespace manip
