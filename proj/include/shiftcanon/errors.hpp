#pragma once

#include <stdexcept>
#include <string>

namespace shiftcanon {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Reference bin magnitude is below the degenerate-phase threshold.
struct DegeneratePhase : Error {
    using Error::Error;
};

/// A channel has zero standard deviation and cannot be z-normalized.
struct ConstantChannel : Error {
    using Error::Error;
};

/// Tensor/layer shapes are inconsistent.
struct ShapeMismatch : Error {
    using Error::Error;
};

/// Batch statistics requested on a batch that is too small.
struct DegenerateBatch : Error {
    using Error::Error;
};

/// Training loss became NaN/Inf.
struct NonFiniteLoss : Error {
    using Error::Error;
};

/// Residual after shift recovery exceeds the caller's tolerance.
struct NotAShiftVariant : Error {
    using Error::Error;
};

/// Binomial kernel length outside the supported set.
struct UnsupportedLength : Error {
    using Error::Error;
};

/// Prediction/label sequences have different lengths.
struct LengthMismatch : Error {
    using Error::Error;
};

struct EmptyDataset : Error {
    using Error::Error;
};

struct InsufficientSamples : Error {
    using Error::Error;
};

struct IoFailure : Error {
    using Error::Error;
};

/// Dataset record could not be parsed; message carries line number and reason.
struct MalformedRecord : Error {
    using Error::Error;
};

}  // namespace shiftcanon
