#pragma once

// Arbitrary precision coordinate indices and an exact accumulator for sums of
// IEEE doubles. Coordinates on the two-sided shift reach magnitudes far past
// any machine word (block endpoints of the inductive construction exceed
// 2^700), so every index is a bignum.

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "nsshift/errors.hpp"

namespace nsshift {

using BigIndex = boost::multiprecision::cpp_int;

/// floor(log2(x)) for x > 0.
inline long floor_log2(const BigIndex& x) {
    if (x <= 0) throw Error("floor_log2: argument must be positive");
    return static_cast<long>(boost::multiprecision::msb(x));
}

inline BigIndex pow2(unsigned long e) {
    return BigIndex(1) << e;
}

inline std::string to_decimal(const BigIndex& x) {
    return x.str();
}

inline BigIndex parse_decimal(const std::string& s) {
    try {
        return BigIndex(s);
    } catch (const std::exception&) {
        throw BadMeasureSpec("not a decimal integer: '" + s + "'");
    }
}

inline bool fits_long(const BigIndex& x) {
    return x >= std::numeric_limits<long>::min() && x <= std::numeric_limits<long>::max();
}

inline long to_long(const BigIndex& x) {
    if (!fits_long(x)) throw RepresentationLimit("index does not fit a machine word: " + x.str());
    return static_cast<long>(x);
}

/// Exact running sum of values m*2^e (IEEE doubles and integer multiples of
/// them). Everything is tracked as one big integer against a common binary
/// scale, so addition is associative and two mathematically equal sums
/// compare equal bit for bit. Rounding happens once, on readout.
class ExactDyadicSum {
public:
    ExactDyadicSum() = default;

    void add(double v, const BigIndex& count) {
        if (v == 0.0 || count == 0) return;
        if (!std::isfinite(v)) throw Error("ExactDyadicSum: non-finite addend");
        int e = 0;
        double m = std::frexp(v, &e);
        // m in [0.5,1): m*2^53 is an integer
        auto mant = BigIndex(static_cast<long long>(std::ldexp(m, 53)));
        long scale = e - 53;
        align(scale);
        num_ += mant * count << static_cast<unsigned long>(scale - scale_);
    }

    void add(double v) { add(v, 1); }

    bool is_zero() const { return num_ == 0; }

    bool operator==(const ExactDyadicSum& o) const {
        // compare num_*2^scale_ == o.num_*2^o.scale_
        if ((num_ == 0) != (o.num_ == 0)) return false;
        if (num_ == 0) return true;
        if (scale_ <= o.scale_)
            return num_ == o.num_ << static_cast<unsigned long>(o.scale_ - scale_);
        return o.num_ == num_ << static_cast<unsigned long>(scale_ - o.scale_);
    }

    /// Round to nearest double (ties to even).
    double to_double() const {
        if (num_ == 0) return 0.0;
        const bool neg = num_ < 0;
        BigIndex a = neg ? BigIndex(-num_) : num_;
        long nbits = floor_log2(a) + 1;
        double d;
        long scale = scale_;
        if (nbits <= 53) {
            d = a.convert_to<double>();
        } else {
            const long drop = nbits - 54;
            BigIndex q = a >> static_cast<unsigned long>(drop);
            const bool sticky = (q << static_cast<unsigned long>(drop)) != a;
            const bool round_bit = (q & 1) != 0;
            q >>= 1;
            if (round_bit && (sticky || (q & 1) != 0)) ++q;
            d = q.convert_to<double>();
            scale += drop + 1;
        }
        d = std::ldexp(d, static_cast<int>(std::max<long>(
                std::min<long>(scale, std::numeric_limits<int>::max()),
                std::numeric_limits<int>::min())));
        return neg ? -d : d;
    }

private:
    void align(long scale) {
        if (num_ == 0) {
            scale_ = scale;
            return;
        }
        if (scale < scale_) {
            num_ <<= static_cast<unsigned long>(scale_ - scale);
            scale_ = scale;
        }
    }

    BigIndex num_;
    long scale_ = 0;
};

}
