#pragma once

// Per-coordinate marginal of a product measure on {0,1}^Z, and the two scalar
// kernels everything else is built from: the coordinate Hellinger affinity
// h(p,q) = sqrt(p0*q0) + sqrt(p1*q1) and the squared-root distance summand
// d(p,q) = (sqrt p0 - sqrt q0)^2 + (sqrt p1 - sqrt q1)^2 = 2(1 - h).

#include <cmath>
#include <utility>

#include "nsshift/errors.hpp"

namespace nsshift {

class Factor {
public:
    explicit Factor(double p0) : p0_(p0) {
        if (!(p0 >= 0.0 && p0 <= 1.0))
            throw Error("Factor: p0 outside [0,1]");
    }

    double p0() const { return p0_; }
    double p1() const { return 1.0 - p0_; }

    double prob(int bit) const { return bit == 0 ? p0() : p1(); }

    Factor swapped() const { return Factor(p1()); }

    bool operator==(const Factor& o) const { return p0_ == o.p0_; }
    bool operator!=(const Factor& o) const { return !(*this == o); }

private:
    double p0_;
};

inline Factor fair_factor() { return Factor(0.5); }

inline double factor_affinity(const Factor& p, const Factor& q) {
    return std::sqrt(p.p0() * q.p0()) + std::sqrt(p.p1() * q.p1());
}

inline double factor_distance_term(const Factor& p, const Factor& q) {
    const double a = std::sqrt(p.p0()) - std::sqrt(q.p0());
    const double b = std::sqrt(p.p1()) - std::sqrt(q.p1());
    return a * a + b * b;
}

/// Lower bound of d(a, p) over p0 in [plo, phi]; d is monotone on either side
/// of a, so the infimum sits at an endpoint (or is 0 when a lies inside).
inline double min_distance_term_over_range(const Factor& a, double plo, double phi) {
    if (plo > phi) std::swap(plo, phi);
    if (a.p0() >= plo && a.p0() <= phi) return 0.0;
    const double at_lo = factor_distance_term(a, Factor(plo));
    const double at_hi = factor_distance_term(a, Factor(phi));
    return at_lo < at_hi ? at_lo : at_hi;
}

}
