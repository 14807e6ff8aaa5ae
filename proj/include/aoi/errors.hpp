#pragma once

#include <stdexcept>
#include <string>

namespace aoi {

/// An argument is outside its documented range (z out of [1, Z_MAX], v2 < 0, ...).
struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A process has no deliveries/detections (m = 0) or the underlying chain is
/// not ergodic (|theta| >= 1, r + s = 0), so second-order quantities are undefined.
struct DegenerateProcessError : std::domain_error {
    using std::domain_error::domain_error;
};

/// A chain handed to the reference computations failed the ergodicity check.
struct ErgodicityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The age truncation cap was exhausted with too much probability mass left.
struct AgeCapError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace aoi
