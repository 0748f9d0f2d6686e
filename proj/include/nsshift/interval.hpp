#pragma once

// Directed-rounding interval arithmetic over MPFR. This is the engine behind
// every exact comparison involving ln 2: callers evaluate at some precision,
// and if the interval straddles the decision boundary they double the
// precision and try again. A mixed expression a*ln2 + b*2^-k vanishes only
// when both coefficients do (ln 2 is irrational), so the refinement loop
// terminates whenever the screened-out exact-zero case does not apply.

#include <mpfr.h>

#include <string>
#include <utility>
#include <vector>

#include "nsshift/bigint.hpp"
#include "nsshift/errors.hpp"

namespace nsshift {

inline constexpr mpfr_prec_t kDefaultMaxPrec = 1 << 20;

class MpFloat {
public:
    explicit MpFloat(mpfr_prec_t prec = 64) {
        mpfr_init2(v_, prec);
        mpfr_set_zero(v_, 1);
    }
    ~MpFloat() { mpfr_clear(v_); }
    MpFloat(const MpFloat& o) {
        mpfr_init2(v_, mpfr_get_prec(o.v_));
        mpfr_set(v_, o.v_, MPFR_RNDN);
    }
    MpFloat(MpFloat&& o) noexcept {
        mpfr_init2(v_, 2);
        mpfr_swap(v_, o.v_);
    }
    MpFloat& operator=(const MpFloat& o) {
        if (this != &o) {
            mpfr_set_prec(v_, mpfr_get_prec(o.v_));
            mpfr_set(v_, o.v_, MPFR_RNDN);
        }
        return *this;
    }
    MpFloat& operator=(MpFloat&& o) noexcept {
        mpfr_swap(v_, o.v_);
        return *this;
    }

    mpfr_ptr raw() { return v_; }
    mpfr_srcptr raw() const { return v_; }

    double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
    int sign() const { return mpfr_sgn(v_); }

private:
    mpfr_t v_;
};

/// Exact conversion cpp_int -> mpfr; the target precision must cover the bit
/// length so the set cannot round.
inline void mpfr_set_bigint(mpfr_ptr out, const BigIndex& x) {
    if (x == 0) {
        mpfr_set_zero(out, 1);
        return;
    }
    const bool neg = x < 0;
    const BigIndex a = neg ? BigIndex(-x) : x;
    if (mpfr_get_prec(out) < floor_log2(a) + 1)
        throw Error("mpfr_set_bigint: precision below the operand width");
    const std::string hex = a.str(0, std::ios_base::hex);
    if (mpfr_set_str(out, hex.c_str(), 16, MPFR_RNDN) != 0)
        throw Error("mpfr_set_bigint: parse failure");
    if (neg) mpfr_neg(out, out, MPFR_RNDN);
}

inline BigIndex bigint_from_mpz(mpz_srcptr z) {
    char* s = mpz_get_str(nullptr, 16, z);
    std::string str(s);
    void (*freefunc)(void*, size_t);
    mp_get_memory_functions(nullptr, nullptr, &freefunc);
    freefunc(s, str.size() + 1);
    const bool neg = !str.empty() && str[0] == '-';
    BigIndex r(std::string("0x") + (neg ? str.substr(1) : str));
    return neg ? BigIndex(-r) : r;
}

/// [lo, hi] enclosure with both endpoints at the same precision.
struct Ival {
    MpFloat lo, hi;

    explicit Ival(mpfr_prec_t prec = 64) : lo(prec), hi(prec) {}

    static Ival zero(mpfr_prec_t prec) { return Ival(prec); }

    static Ival exact_bigint(const BigIndex& x, mpfr_prec_t prec) {
        long need = (x == 0) ? 2 : floor_log2(x < 0 ? BigIndex(-x) : x) + 2;
        Ival r(std::max<mpfr_prec_t>(prec, need));
        mpfr_set_bigint(r.lo.raw(), x);
        mpfr_set(r.hi.raw(), r.lo.raw(), MPFR_RNDN);
        return r;
    }

    static Ival ln2(mpfr_prec_t prec) {
        Ival r(prec);
        mpfr_const_log2(r.lo.raw(), MPFR_RNDD);
        mpfr_const_log2(r.hi.raw(), MPFR_RNDU);
        return r;
    }

    /// [0, 2^e] slack interval.
    static Ival slack_pow2(long e, mpfr_prec_t prec) {
        Ival r(prec);
        mpfr_set_zero(r.lo.raw(), 1);
        mpfr_set_ui(r.hi.raw(), 1, MPFR_RNDU);
        mpfr_mul_2si(r.hi.raw(), r.hi.raw(), e, MPFR_RNDU);
        return r;
    }

    void add(const Ival& o) {
        mpfr_add(lo.raw(), lo.raw(), o.lo.raw(), MPFR_RNDD);
        mpfr_add(hi.raw(), hi.raw(), o.hi.raw(), MPFR_RNDU);
    }

    void sub(const Ival& o) {
        MpFloat nlo(mpfr_get_prec(lo.raw())), nhi(mpfr_get_prec(hi.raw()));
        mpfr_sub(nlo.raw(), lo.raw(), o.hi.raw(), MPFR_RNDD);
        mpfr_sub(nhi.raw(), hi.raw(), o.lo.raw(), MPFR_RNDU);
        lo = std::move(nlo);
        hi = std::move(nhi);
    }

    void mul_2si(long e) {
        mpfr_mul_2si(lo.raw(), lo.raw(), e, MPFR_RNDD);
        mpfr_mul_2si(hi.raw(), hi.raw(), e, MPFR_RNDU);
    }

    /// Multiply by an exactly-represented big integer.
    void mul_bigint(const BigIndex& c) {
        if (c == 0) {
            mpfr_set_zero(lo.raw(), 1);
            mpfr_set_zero(hi.raw(), 1);
            return;
        }
        mpfr_prec_t p = mpfr_get_prec(lo.raw());
        MpFloat cm(std::max<mpfr_prec_t>(
            p, floor_log2(c < 0 ? BigIndex(-c) : c) + 2));
        mpfr_set_bigint(cm.raw(), c);
        MpFloat nlo(p), nhi(p);
        if (c > 0) {
            mpfr_mul(nlo.raw(), lo.raw(), cm.raw(), MPFR_RNDD);
            mpfr_mul(nhi.raw(), hi.raw(), cm.raw(), MPFR_RNDU);
        } else {
            mpfr_mul(nlo.raw(), hi.raw(), cm.raw(), MPFR_RNDD);
            mpfr_mul(nhi.raw(), lo.raw(), cm.raw(), MPFR_RNDU);
        }
        lo = std::move(nlo);
        hi = std::move(nhi);
    }

    /// Interval product; both operands must be nonnegative.
    void mul_nonneg(const Ival& o) {
        mpfr_prec_t p = mpfr_get_prec(lo.raw());
        MpFloat nlo(p), nhi(p);
        mpfr_mul(nlo.raw(), lo.raw(), o.lo.raw(), MPFR_RNDD);
        mpfr_mul(nhi.raw(), hi.raw(), o.hi.raw(), MPFR_RNDU);
        lo = std::move(nlo);
        hi = std::move(nhi);
    }

    bool contains_zero() const { return lo.sign() <= 0 && hi.sign() >= 0; }

    /// Definite sign, or 0 when the interval straddles zero.
    int definite_sign() const {
        if (lo.sign() > 0) return 1;
        if (hi.sign() < 0) return -1;
        return 0;
    }

    /// this < o definitely?
    bool definitely_less(const Ival& o) const {
        return mpfr_less_p(hi.raw(), o.lo.raw()) != 0;
    }
};

/// Sign of A*ln2 + sum B_i*2^{-K_i}. Exact: the all-zero case and the pure
/// dyadic case are decided by integer arithmetic, the rest by refinement.
inline int sign_ln2_dyadic(const BigIndex& A,
                           std::vector<std::pair<BigIndex, BigIndex>> dyadics,
                           mpfr_prec_t max_prec = kDefaultMaxPrec) {
    bool any_dyadic = false;
    for (auto& [b, k] : dyadics) {
        if (k < 0) throw Error("sign_ln2_dyadic: negative dyadic scale");
        if (b != 0) any_dyadic = true;
    }
    if (!any_dyadic) return A == 0 ? 0 : (A > 0 ? 1 : -1);
    if (A == 0) {
        // combine exactly over the largest scale
        BigIndex kmax = 0;
        for (auto& [b, k] : dyadics)
            if (b != 0 && k > kmax) kmax = k;
        BigIndex acc = 0;
        for (auto& [b, k] : dyadics) {
            if (b == 0) continue;
            BigIndex shift = kmax - k;
            if (shift > (1 << 24))
                throw RepresentationLimit("sign_ln2_dyadic: dyadic rescale too wide");
            acc += b << static_cast<unsigned long>(shift);
        }
        return acc == 0 ? 0 : (acc > 0 ? 1 : -1);
    }
    for (mpfr_prec_t prec = 192; prec <= max_prec; prec *= 2) {
        Ival acc = Ival::ln2(prec);
        acc.mul_bigint(A);
        for (auto& [b, k] : dyadics) {
            if (b == 0) continue;
            Ival t = Ival::exact_bigint(b, prec);
            t.mul_2si(-to_long(k));
            acc.add(t);
        }
        if (int s = acc.definite_sign(); s != 0) return s;
    }
    throw PrecisionExhausted("sign_ln2_dyadic: undecided at maximum precision");
}

/// Exact ceil(2^j * ln 2) by interval refinement.
inline BigIndex ceil_pow2_ln2(long j, mpfr_prec_t max_prec = kDefaultMaxPrec) {
    if (j < 0) throw Error("ceil_pow2_ln2: negative exponent");
    for (mpfr_prec_t prec = static_cast<mpfr_prec_t>(j) + 64; prec <= max_prec;
         prec *= 2) {
        Ival v = Ival::ln2(prec);
        v.mul_2si(j);
        mpz_t zlo, zhi;
        mpz_init(zlo);
        mpz_init(zhi);
        mpfr_get_z(zlo, v.lo.raw(), MPFR_RNDU);  // ceil of lower endpoint
        mpfr_get_z(zhi, v.hi.raw(), MPFR_RNDU);
        const bool agreed = mpz_cmp(zlo, zhi) == 0;
        BigIndex r = bigint_from_mpz(zlo);
        mpz_clear(zlo);
        mpz_clear(zhi);
        if (agreed) return r;
    }
    throw PrecisionExhausted("ceil_pow2_ln2: undecided at maximum precision");
}

}
