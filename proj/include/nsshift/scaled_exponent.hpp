#pragma once

// Exact positive reals of the form 2^a * e^(b * 2^-k). Closed under products
// and integer powers, with exact comparison: the pure dyadic-exponent case is
// settled by integer cross-multiplication (with floor-log2 dominance first, so
// dyadic scales of any magnitude are fine), the mixed case by adaptive
// interval refinement of ln 2. Mixed comparisons need the dyadic scales to fit
// a machine word; the inductive construction keeps them there through every
// level whose A-set this type is asked to maximize.

#include <string>
#include <utility>
#include <vector>

#include "nsshift/bigint.hpp"
#include "nsshift/errors.hpp"
#include "nsshift/huge_int.hpp"
#include "nsshift/interval.hpp"

namespace nsshift {

class ScaledExponent {
public:
    ScaledExponent() : a_(0), b_(0), k_(0) {}

    static ScaledExponent one() { return ScaledExponent(); }

    static ScaledExponent pow2(const BigIndex& a) {
        ScaledExponent r;
        r.a_ = a;
        return r;
    }

    /// e^(b * 2^-k)
    static ScaledExponent exp_dyadic(const BigIndex& b, const BigIndex& k) {
        if (k < 0) throw Error("ScaledExponent: negative dyadic scale");
        ScaledExponent r;
        r.b_ = b;
        r.k_ = k;
        r.normalize();
        return r;
    }

    const BigIndex& a() const { return a_; }
    const BigIndex& b() const { return b_; }
    const BigIndex& k() const { return k_; }

    bool is_one() const { return a_ == 0 && b_ == 0; }

    ScaledExponent mul(const ScaledExponent& o) const {
        ScaledExponent r;
        r.a_ = a_ + o.a_;
        if (b_ == 0) {
            r.b_ = o.b_;
            r.k_ = o.k_;
        } else if (o.b_ == 0) {
            r.b_ = b_;
            r.k_ = k_;
        } else {
            const BigIndex K = k_ > o.k_ ? k_ : o.k_;
            const BigIndex s1 = K - k_, s2 = K - o.k_;
            if (s1 > kShiftCap || s2 > kShiftCap)
                throw RepresentationLimit(
                    "ScaledExponent::mul: dyadic rescale exceeds representation cap");
            r.b_ = (b_ << to_long(s1)) + (o.b_ << to_long(s2));
            r.k_ = K;
        }
        r.normalize();
        return r;
    }

    ScaledExponent pow(const BigIndex& e) const {
        ScaledExponent r;
        r.a_ = a_ * e;
        r.b_ = b_ * e;
        r.k_ = k_;
        r.normalize();
        return r;
    }

    ScaledExponent square() const { return pow(2); }

    /// Exact three-way comparison.
    int compare(const ScaledExponent& o) const {
        // sign of (a - a')ln2 + b*2^-k - b'*2^-k'
        const BigIndex da = a_ - o.a_;
        if (b_ == 0 && o.b_ == 0) return sgn(da);
        if (da == 0) return dyadic_sign(b_, k_, o.b_, o.k_);
        if (!fits_long(k_) || !fits_long(o.k_))
            throw RepresentationLimit(
                "ScaledExponent::compare: mixed comparison with oversized dyadic scale");
        return sign_ln2_dyadic(da, {{b_, k_}, {-o.b_, o.k_}});
    }

    bool operator==(const ScaledExponent& o) const { return compare(o) == 0; }
    bool operator<(const ScaledExponent& o) const { return compare(o) < 0; }
    bool operator<=(const ScaledExponent& o) const { return compare(o) <= 0; }
    bool operator>(const ScaledExponent& o) const { return compare(o) > 0; }
    bool operator>=(const ScaledExponent& o) const { return compare(o) >= 0; }

    /// Nearest-double value; saturates when the dyadic part underflows.
    double to_double() const {
        if (!fits_long(a_)) return a_ > 0 ? HUGE_VAL : 0.0;
        double ex = 0.0;
        if (b_ != 0) {
            if (!fits_long(k_) || floor_log2(b_ < 0 ? BigIndex(-b_) : b_) - k_ < -80) {
                ex = 0.0;  // e^(b 2^-k) ~ 1 below double resolution
            } else {
                MpFloat t(256);
                mpfr_set_bigint(t.raw(), b_);
                mpfr_mul_2si(t.raw(), t.raw(), -to_long(k_), MPFR_RNDN);
                ex = mpfr_get_d(t.raw(), MPFR_RNDN);
            }
        }
        return std::ldexp(std::exp(ex), static_cast<int>(to_long(a_)));
    }

    /// For lambda >= 1: lambda/(1+lambda) rounded to double. Values within an
    /// ulp of 1 collapse to probability exactly 1/2.
    double factor_p0() const {
        if (b_ != 0 && (!fits_long(k_) || k_ > 128)) return 0.5;
        MpFloat v(256);
        mpfr_set_ui(v.raw(), 1, MPFR_RNDN);
        if (b_ != 0) {
            MpFloat e(256);
            mpfr_set_bigint(e.raw(), b_);
            mpfr_mul_2si(e.raw(), e.raw(), -to_long(k_), MPFR_RNDN);
            mpfr_exp(v.raw(), e.raw(), MPFR_RNDN);
        }
        if (a_ != 0) mpfr_mul_2si(v.raw(), v.raw(), to_long(a_), MPFR_RNDN);
        MpFloat denom(256);
        mpfr_add_ui(denom.raw(), v.raw(), 1, MPFR_RNDN);
        mpfr_div(v.raw(), v.raw(), denom.raw(), MPFR_RNDN);
        return mpfr_get_d(v.raw(), MPFR_RNDN);
    }

private:
    static constexpr long kShiftCap = 1 << 24;

    static int sgn(const BigIndex& x) { return x == 0 ? 0 : (x < 0 ? -1 : 1); }

    // sign of b*2^-k - b'*2^-k', exact at any scale magnitude
    static int dyadic_sign(const BigIndex& b1, const BigIndex& k1,
                           const BigIndex& b2, const BigIndex& k2) {
        if (b1 == 0) return -sgn(b2);
        if (b2 == 0) return sgn(b1);
        if (sgn(b1) != sgn(b2)) return sgn(b1);
        // same sign: compare magnitudes via floor-log2 dominance first
        const BigIndex m1 = b1 < 0 ? BigIndex(-b1) : b1;
        const BigIndex m2 = b2 < 0 ? BigIndex(-b2) : b2;
        const BigIndex e1 = BigIndex(floor_log2(m1)) - k1;
        const BigIndex e2 = BigIndex(floor_log2(m2)) - k2;
        const int s = sgn(b1);
        if (e1 + 1 < e2) return -s;
        if (e2 + 1 < e1) return s;
        // scales now within a word of each other after normalization
        const BigIndex K = k1 > k2 ? k1 : k2;
        const BigIndex s1 = K - k1, s2 = K - k2;
        if (s1 > kShiftCap || s2 > kShiftCap)
            throw RepresentationLimit("ScaledExponent: dyadic comparison cap");
        const BigIndex d = (b1 << to_long(s1)) - (b2 << to_long(s2));
        return sgn(d);
    }

    void normalize() {
        if (b_ == 0) {
            k_ = 0;
            return;
        }
        while (k_ > 0 && (b_ & 1) == 0) {
            b_ >>= 1;
            --k_;
        }
    }

    BigIndex a_, b_, k_;
};

/// Logarithm of a positive quantity, kept as c*ln2 + sum num_i * 2^-scale_i
/// with nonnegative exact components of unbounded size. This is the shape of
/// log(max A_t^2); shifting it by 2^m and taking the ceiling splits exactly
/// into a plain integer plus one ceil(2^j ln2) term.
struct LogExpr {
    BigIndex ln2_coeff;  // >= 0
    struct Dyadic {
        HugeInt num;    // >= 0
        HugeInt scale;  // value = num * 2^-scale
    };
    std::vector<Dyadic> terms;

    void add_dyadic(HugeInt num, HugeInt scale) {
        if (num.is_zero()) return;
        terms.push_back({std::move(num), std::move(scale)});
    }

    struct CeilSplit {
        HugeInt integer_part;
        std::optional<HugeInt> ceil_j;  // leftover ceil(2^j ln2) term
    };

    /// Decompose ceil(value * 2^m): every dyadic term must become an integer
    /// under the shift (scale_i <= m, certified) and the ln2 coefficient must
    /// be a power of two.
    CeilSplit shifted_ceil(const HugeInt& m) const {
        CeilSplit out;
        for (const auto& t : terms) {
            auto sh = HugeInt::try_sub(m, t.scale);
            if (!sh || HugeInt::compare(t.scale, m) > 0)
                throw RepresentationLimit("LogExpr: dyadic term does not shift to an integer");
            out.integer_part = HugeInt::add(out.integer_part, t.num.mul_pow2(*sh));
        }
        if (ln2_coeff != 0) {
            if ((ln2_coeff & (ln2_coeff - 1)) != 0)
                throw RepresentationLimit("LogExpr: ln2 coefficient is not a power of two");
            out.ceil_j = m.add_small(BigIndex(floor_log2(ln2_coeff)));
        }
        return out;
    }

    /// Enclosure; requires machine-word dyadic scales (the explicit regime).
    Ival enclose(mpfr_prec_t prec) const {
        Ival acc = Ival::ln2(prec);
        acc.mul_bigint(ln2_coeff);
        if (ln2_coeff == 0) acc = Ival::zero(prec);
        for (const auto& t : terms) {
            if (!t.num.is_explicit() || !t.scale.is_explicit())
                throw RepresentationLimit("LogExpr::enclose: symbolic term");
            Ival iv = Ival::exact_bigint(t.num.to_bigindex(), prec);
            iv.mul_2si(-to_long(t.scale.to_bigindex()));
            acc.add(iv);
        }
        return acc;
    }
};

}
