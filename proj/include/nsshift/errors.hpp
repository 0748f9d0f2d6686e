#pragma once

#include <stdexcept>
#include <string>

namespace nsshift {

/// Base class for all nsshift domain errors (distinguishes them from
/// usage/programming errors at the CLI boundary).
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A comparison of exact scaled quantities could not be resolved within the
/// configured maximum working precision.
struct PrecisionExhausted : Error {
    using Error::Error;
};

/// An exact value would not fit the configured representation limits
/// (e.g. a dyadic rescaling that needs more bits than the cap allows).
struct RepresentationLimit : Error {
    using Error::Error;
};

/// A window contains more distinct block-intersection segments than the
/// configured cap.
struct IterationBudgetExceeded : Error {
    using Error::Error;
};

/// Sampling window larger than the configured memory budget.
struct WindowTooLarge : Error {
    using Error::Error;
};

/// A factor assigns probability zero to an observed symbol.
struct ZeroDensity : Error {
    using Error::Error;
};

/// Some factor pair has affinity zero where a positive lower bound is required.
struct DegenerateFactor : Error {
    using Error::Error;
};

/// Renewal recursion produced a meaningfully negative interarrival mass.
struct InvalidRenewalSequence : Error {
    int offending_index;
    InvalidRenewalSequence(const std::string& msg, int n)
        : Error(msg), offending_index(n) {}
};

struct BadMeasureSpec : Error {
    using Error::Error;
};

}
