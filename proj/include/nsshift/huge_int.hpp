#pragma once

// Exact nonnegative integers of the form
//
//     small  +  sum_i  coeff_i * 2^{exp_i} * (ceil(2^{j_i} * ln 2) or 1)
//
// where coeff, exp and j are themselves values of this type. The inductive
// level construction produces integers (m_t, M_t, and past level three n_t,
// N_t) whose plain binary representation would need ~2^700 bits and more, so
// they are kept in this nested form. All comparisons stay exact: dominance in
// floor(log2), structural cancellation, and adaptive-precision interval
// refinement for the rest. ceil(2^j ln2) factors require j >= 2, which pins
// floor(log2) of that factor to exactly j-1.

#include <compare>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nsshift/bigint.hpp"
#include "nsshift/errors.hpp"
#include "nsshift/interval.hpp"

namespace nsshift {

class HugeInt {
public:
    using Ptr = std::shared_ptr<const HugeInt>;

    struct Term {
        Ptr coeff;   // >= 1
        Ptr exp2;    // >= 0
        Ptr ceil_j;  // null, or >= 2
    };

    HugeInt() = default;
    explicit HugeInt(const BigIndex& v) : small_(v) {
        if (v < 0) throw Error("HugeInt: negative value");
    }
    explicit HugeInt(unsigned long v) : small_(v) {}

    static HugeInt from(const BigIndex& v) { return HugeInt(v); }

    static Ptr ptr(HugeInt v) { return std::make_shared<const HugeInt>(std::move(v)); }

    bool is_explicit() const { return terms_.empty(); }
    bool is_zero() const { return terms_.empty() && small_ == 0; }

    const BigIndex& to_bigindex() const {
        if (!is_explicit())
            throw RepresentationLimit("HugeInt: value has no explicit representation");
        return small_;
    }

    const BigIndex& explicit_part() const { return small_; }
    const std::vector<Term>& terms() const { return terms_; }

    // ----- construction --------------------------------------------------

    static HugeInt add(const HugeInt& a, const HugeInt& b) {
        HugeInt r;
        r.small_ = a.small_ + b.small_;
        r.terms_ = a.terms_;
        for (const auto& t : b.terms_) r.push_term(t);
        r.fold();
        return r;
    }

    HugeInt add_small(const BigIndex& v) const {
        HugeInt r(*this);
        r.small_ += v;
        if (r.small_ < 0) throw Error("HugeInt: negative value");
        return r;
    }

    static HugeInt mul(const HugeInt& a, const HugeInt& b) {
        HugeInt r;
        r.small_ = a.small_ * b.small_;
        for (const auto& t : a.terms_) r.push_term(scale_term(t, b.small_));
        for (const auto& t : b.terms_) r.push_term(scale_term(t, a.small_));
        for (const auto& ta : a.terms_)
            for (const auto& tb : b.terms_) {
                if (ta.ceil_j && tb.ceil_j)
                    throw RepresentationLimit(
                        "HugeInt: product of two ceil(2^j ln2) factors is not representable");
                Term t;
                t.coeff = ptr(mul(*ta.coeff, *tb.coeff));
                t.exp2 = ptr(add(*ta.exp2, *tb.exp2));
                t.ceil_j = ta.ceil_j ? ta.ceil_j : tb.ceil_j;
                r.push_term(std::move(t));
            }
        r.fold();
        return r;
    }

    HugeInt mul_small(const BigIndex& c) const {
        if (c < 0) throw Error("HugeInt: negative multiplier");
        return mul(*this, HugeInt(c));
    }

    /// this * 2^e
    HugeInt mul_pow2(const HugeInt& e) const {
        if (e.is_zero()) return *this;
        HugeInt r;
        for (const auto& t : terms_) {
            Term nt = t;
            nt.exp2 = ptr(add(*t.exp2, e));
            r.terms_.push_back(std::move(nt));
        }
        if (small_ != 0) {
            Term nt;
            nt.coeff = ptr(HugeInt(small_));
            nt.exp2 = ptr(e);
            r.terms_.push_back(std::move(nt));
        }
        r.fold();
        return r;
    }

    static HugeInt pow2_of(const HugeInt& e) { return HugeInt(BigIndex(1)).mul_pow2(e); }

    /// ceil(2^j * ln 2); explicit whenever j is small enough to materialize.
    static HugeInt ceil_ln2(const HugeInt& j, long explicit_bits_cap = 4096) {
        if (j.is_explicit() && j.to_bigindex() < 2)
            throw Error("HugeInt::ceil_ln2: j must be >= 2");
        if (j.is_explicit() && j.to_bigindex() <= explicit_bits_cap)
            return HugeInt(ceil_pow2_ln2(to_long(j.to_bigindex())));
        HugeInt r;
        Term t;
        t.coeff = ptr(HugeInt(BigIndex(1)));
        t.exp2 = ptr(HugeInt());
        t.ceil_j = ptr(j);
        r.terms_.push_back(std::move(t));
        return r;
    }

    // ----- structural subtraction ----------------------------------------

    /// a - b when b's structure embeds into a's (term-by-term with coefficient
    /// dominance). Returns nullopt when the embedding fails; never guesses.
    static std::optional<HugeInt> try_sub(const HugeInt& a, const HugeInt& b) {
        HugeInt r;
        r.small_ = a.small_;
        r.terms_ = a.terms_;
        for (const auto& tb : b.terms_) {
            bool matched = false;
            for (std::size_t i = 0; i < r.terms_.size(); ++i) {
                const auto& ta = r.terms_[i];
                if (!deep_equal(*ta.exp2, *tb.exp2)) continue;
                if ((ta.ceil_j == nullptr) != (tb.ceil_j == nullptr)) continue;
                if (ta.ceil_j && !deep_equal(*ta.ceil_j, *tb.ceil_j)) continue;
                auto cd = try_sub(*ta.coeff, *tb.coeff);
                if (!cd) return std::nullopt;
                if (cd->is_zero())
                    r.terms_.erase(r.terms_.begin() + static_cast<long>(i));
                else
                    r.terms_[i].coeff = ptr(std::move(*cd));
                matched = true;
                break;
            }
            if (!matched) return std::nullopt;
        }
        r.small_ -= b.small_;
        if (r.small_ < 0) {
            if (!r.terms_.empty()) return std::nullopt;  // would need a borrow
            return std::nullopt;
        }
        r.fold();
        return r;
    }

    /// Signed difference a - b when it reduces to an explicit machine word.
    static std::optional<long> diff_small(const HugeInt& a, const HugeInt& b) {
        if (a.is_explicit() && b.is_explicit()) {
            BigIndex d = a.small_ - b.small_;
            if (fits_long(d)) return to_long(d);
            return std::nullopt;
        }
        if (auto d = try_sub(a, b); d && d->is_explicit() && fits_long(d->small_))
            return to_long(d->small_);
        if (auto d = try_sub(b, a); d && d->is_explicit() && fits_long(d->small_))
            return -to_long(d->small_);
        return std::nullopt;
    }

    static bool deep_equal(const HugeInt& a, const HugeInt& b) {
        if (&a == &b) return true;
        if (a.small_ != b.small_) return false;
        if (a.terms_.size() != b.terms_.size()) return false;
        std::vector<bool> used(b.terms_.size(), false);
        for (const auto& ta : a.terms_) {
            bool matched = false;
            for (std::size_t i = 0; i < b.terms_.size(); ++i) {
                if (used[i]) continue;
                const auto& tb = b.terms_[i];
                if ((ta.ceil_j == nullptr) != (tb.ceil_j == nullptr)) continue;
                if (ta.ceil_j && !deep_equal(*ta.ceil_j, *tb.ceil_j)) continue;
                if (!deep_equal(*ta.exp2, *tb.exp2)) continue;
                if (!deep_equal(*ta.coeff, *tb.coeff)) continue;
                used[i] = true;
                matched = true;
                break;
            }
            if (!matched) return false;
        }
        return true;
    }

    // ----- floor(log2) ----------------------------------------------------

    /// Exact floor(log2(value)); value must be positive.
    HugeInt fl2() const {
        if (is_explicit()) {
            if (small_ <= 0) throw Error("HugeInt::fl2: value must be positive");
            return HugeInt(BigIndex(floor_log2(small_)));
        }
        // base scale: the largest certain lower exponent among the parts
        HugeInt base = term_lower_exp(terms_[0]);
        for (std::size_t i = 1; i < terms_.size(); ++i) {
            HugeInt cand = term_lower_exp(terms_[i]);
            if (compare(cand, base) > 0) base = std::move(cand);
        }
        if (small_ > 0) {
            HugeInt cand(BigIndex(floor_log2(small_)));
            if (compare(cand, base) > 0) base = std::move(cand);
        }
        // value * 2^-base lies in [1, 2^g_max); pin g by interval refinement
        const long parts = static_cast<long>(terms_.size()) + (small_ > 0 ? 1 : 0);
        long g_max = 2;
        while ((1L << g_max) < 4 * parts) ++g_max;
        g_max += 2;
        for (mpfr_prec_t prec = 128; prec <= kDefaultMaxPrec; prec *= 2) {
            Ival v = enclose_scaled(base, prec);
            for (long g = 0; g <= g_max; ++g) {
                Ival p(prec);
                mpfr_set_ui(p.lo.raw(), 1, MPFR_RNDD);
                mpfr_mul_2si(p.lo.raw(), p.lo.raw(), g + 1, MPFR_RNDD);
                mpfr_set(p.hi.raw(), p.lo.raw(), MPFR_RNDU);
                if (v.definitely_less(p)) {
                    // value < 2^{base+g+1}; need value >= 2^{base+g}
                    Ival q(prec);
                    mpfr_set_ui(q.lo.raw(), 1, MPFR_RNDD);
                    mpfr_mul_2si(q.lo.raw(), q.lo.raw(), g, MPFR_RNDD);
                    mpfr_set(q.hi.raw(), q.lo.raw(), MPFR_RNDU);
                    if (q.definitely_less(v) || ge_exact_pow2_scaled(v, g))
                        return base.add_small(g);
                    break;  // undecided at this precision
                }
            }
        }
        throw PrecisionExhausted("HugeInt::fl2: undecided at maximum precision");
    }

    // ----- comparison ------------------------------------------------------

    /// Exact three-way comparison.
    static int compare(const HugeInt& a, const HugeInt& b) {
        if (a.is_explicit() && b.is_explicit())
            return a.small_ == b.small_ ? 0 : (a.small_ < b.small_ ? -1 : 1);
        if (deep_equal(a, b)) return 0;
        if (auto d = try_sub(a, b)) return d->is_zero() ? 0 : 1;
        if (auto d = try_sub(b, a)) return d->is_zero() ? 0 : -1;
        if (a.is_zero()) return -1;
        if (b.is_zero()) return 1;
        HugeInt fa = a.fl2();
        HugeInt fb = b.fl2();
        if (auto d = diff_small(fa, fb)) {
            if (*d < 0) return -1;
            if (*d > 0) return 1;
        } else {
            int c = compare(fa, fb);  // strictly smaller towers: terminates
            if (c != 0) return c;
        }
        // same floor(log2): interval refinement at that common scale
        for (mpfr_prec_t prec = 128; prec <= kDefaultMaxPrec; prec *= 2) {
            Ival ia = a.enclose_scaled(fa, prec);
            Ival ib = b.enclose_scaled(fa, prec);
            if (ia.definitely_less(ib)) return -1;
            if (ib.definitely_less(ia)) return 1;
            if (prec >= 2048) {
                // possibly equal values in different shapes: materialize
                auto ma = a.try_materialize();
                auto mb = b.try_materialize();
                if (ma && mb) return *ma == *mb ? 0 : (*ma < *mb ? -1 : 1);
            }
        }
        throw PrecisionExhausted("HugeInt::compare: undecided at maximum precision");
    }

    static int compare(const HugeInt& a, const BigIndex& b) {
        if (b < 0) return 1;
        return compare(a, HugeInt(b));
    }

    // ----- numeric views ---------------------------------------------------

    /// Enclosure of value * 2^-scale. The scale should be within a machine
    /// word of floor(log2(value)) or the parts become slack-bounded.
    Ival enclose_scaled(const HugeInt& scale, mpfr_prec_t prec) const {
        Ival acc = Ival::zero(prec);
        const long slack_gap = static_cast<long>(prec) + 32;
        if (small_ > 0) {
            HugeInt sx(BigIndex(floor_log2(small_)));
            if (auto w = diff_small(sx, scale)) {
                Ival t = Ival::exact_bigint(small_, std::max<mpfr_prec_t>(prec, 64));
                t.mul_2si(*w - to_long(BigIndex(floor_log2(small_))));
                acc.add(t);
            } else if (below_by(sx, scale, slack_gap)) {
                acc.add(Ival::slack_pow2(-slack_gap + 2, prec));
            } else {
                throw PrecisionExhausted("HugeInt: unresolvable enclosure window");
            }
        }
        for (const auto& t : terms_) {
            HugeInt texp = add(*t.exp2, t.coeff->fl2());
            if (t.ceil_j) texp = add(texp, *t.ceil_j);
            if (auto w = diff_small(texp, scale)) {
                Ival iv = t.coeff->enclose_scaled(t.coeff->fl2(), prec);  // in [1,2)
                if (t.ceil_j) {
                    Ival cl = Ival::ln2(prec);  // ceil(2^j ln2) * 2^-j in [ln2, ln2+2^-j]
                    long j_slack = ceil_j_slack(*t.ceil_j, prec);
                    cl.add(Ival::slack_pow2(-j_slack, prec));
                    iv.mul_nonneg(cl);
                }
                iv.mul_2si(*w);
                acc.add(iv);
            } else if (below_by(texp, scale, slack_gap)) {
                acc.add(Ival::slack_pow2(-slack_gap + 2, prec));
            } else {
                throw PrecisionExhausted("HugeInt: unresolvable enclosure window");
            }
        }
        return acc;
    }

    /// Explicit value when every component is explicit and the bit budget
    /// allows; used as a comparison fallback, never in the hot path.
    std::optional<BigIndex> try_materialize(long cap_bits = 1 << 20) const {
        BigIndex acc = small_;
        for (const auto& t : terms_) {
            if (!t.coeff->is_explicit() || !t.exp2->is_explicit()) return std::nullopt;
            const BigIndex& e = t.exp2->to_bigindex();
            if (e > cap_bits) return std::nullopt;
            BigIndex v = t.coeff->to_bigindex();
            if (t.ceil_j) {
                if (!t.ceil_j->is_explicit() || t.ceil_j->to_bigindex() > cap_bits)
                    return std::nullopt;
                v *= ceil_pow2_ln2(to_long(t.ceil_j->to_bigindex()));
            }
            if (floor_log2(v) + to_long(e) > cap_bits) return std::nullopt;
            acc += v << static_cast<unsigned long>(to_long(e));
        }
        return acc;
    }

    /// Approximate log2 for reporting only.
    double approx_log2() const {
        if (is_zero()) return -std::numeric_limits<double>::infinity();
        HugeInt f = fl2();
        if (f.is_explicit() && fits_long(f.to_bigindex()))
            return static_cast<double>(to_long(f.to_bigindex())) +
                   std::log2(enclose_scaled(f, 96).lo.to_double());
        return std::numeric_limits<double>::infinity();
    }

private:
    static Term scale_term(const Term& t, const BigIndex& c) {
        Term r = t;
        if (c != 1) r.coeff = ptr(t.coeff->mul_small(c));
        return r;
    }

    static HugeInt term_lower_exp(const Term& t) {
        // term >= 2^{exp + fl2(coeff) + (j-1 if ceil)}
        HugeInt e = add(*t.exp2, t.coeff->fl2());
        if (t.ceil_j) {
            e = add(e, *t.ceil_j);
            auto dec = try_sub(e, HugeInt(BigIndex(1)));
            if (!dec) throw RepresentationLimit("HugeInt: exponent lacks an explicit unit");
            e = std::move(*dec);
        }
        return e;
    }

    /// true when a <= b - need (certified).
    static bool below_by(const HugeInt& a, const HugeInt& b, long need) {
        return compare(a.add_small(BigIndex(need)), b) <= 0;
    }

    static long ceil_j_slack(const HugeInt& j, mpfr_prec_t prec) {
        if (j.is_explicit() && fits_long(j.to_bigindex())) {
            long jv = to_long(j.to_bigindex());
            return std::min<long>(jv, static_cast<long>(prec) + 32);
        }
        long cap = static_cast<long>(prec) + 32;
        if (compare(j, BigIndex(cap)) >= 0) return cap;
        throw PrecisionExhausted("HugeInt: ceil factor scale unresolved");
    }

    static bool ge_exact_pow2_scaled(const Ival& v, long g) {
        // v is an enclosure of value*2^-base; decide value*2^-base >= 2^g when
        // the lower endpoint equals the power exactly (value == 2^{base+g}).
        MpFloat p(mpfr_get_prec(v.lo.raw()));
        mpfr_set_ui(p.raw(), 1, MPFR_RNDN);
        mpfr_mul_2si(p.raw(), p.raw(), g, MPFR_RNDN);
        return mpfr_cmp(v.lo.raw(), p.raw()) >= 0;
    }

    void push_term(Term t) {
        for (auto& mine : terms_) {
            if ((mine.ceil_j == nullptr) != (t.ceil_j == nullptr)) continue;
            if (mine.ceil_j && !deep_equal(*mine.ceil_j, *t.ceil_j)) continue;
            if (!deep_equal(*mine.exp2, *t.exp2)) continue;
            mine.coeff = ptr(add(*mine.coeff, *t.coeff));
            return;
        }
        terms_.push_back(std::move(t));
    }

    void fold() {
        constexpr long kFoldBitsCap = 1 << 16;
        std::vector<Term> keep;
        for (auto& t : terms_) {
            if (t.coeff->is_zero()) continue;
            if (!t.ceil_j && t.coeff->is_explicit() && t.exp2->is_explicit() &&
                t.exp2->to_bigindex() <= kFoldBitsCap &&
                floor_log2(t.coeff->to_bigindex()) + to_long(t.exp2->to_bigindex()) <
                    kFoldBitsCap) {
                small_ += t.coeff->to_bigindex()
                          << static_cast<unsigned long>(to_long(t.exp2->to_bigindex()));
            } else {
                keep.push_back(std::move(t));
            }
        }
        terms_ = std::move(keep);
    }

    BigIndex small_;           // >= 0
    std::vector<Term> terms_;  // unordered; merged on equal (exp2, ceil_j)
};

}
