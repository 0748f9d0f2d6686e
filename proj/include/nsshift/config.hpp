#pragma once

// Process-wide working precision for floating accumulation: 53 uses plain
// double, 64 (default) accumulates logs and products in long double. Exact
// integer and interval arithmetic are unaffected.

#include <cstdlib>
#include <string>

#include "nsshift/errors.hpp"

namespace nsshift {

inline int& precision_bits() {
    static int bits = [] {
        if (const char* env = std::getenv("NSSHIFT_PRECISION")) {
            const int v = std::atoi(env);
            if (v == 53 || v == 64) return v;
        }
        return 64;
    }();
    return bits;
}

inline void set_precision_bits(int bits) {
    if (bits != 53 && bits != 64)
        throw Error("precision must be 53 or 64 bits, got " + std::to_string(bits));
    precision_bits() = bits;
}

/// Accumulator whose width follows the configured precision.
class LogAccumulator {
public:
    LogAccumulator() : wide_(precision_bits() >= 64) {}

    void add(double v) {
        if (wide_)
            wide_acc_ += static_cast<long double>(v);
        else
            acc_ += v;
    }

    double value() const {
        return wide_ ? static_cast<double>(wide_acc_) : acc_;
    }

private:
    bool wide_;
    long double wide_acc_ = 0.0L;
    double acc_ = 0.0;
};

}
