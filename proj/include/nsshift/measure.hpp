#pragma once

// Two-sided product measures on {0,1}^Z as piecewise-constant factor rules:
// explicit blocks over a covered index range, a constant positive tail, and a
// described negative tail. Shifts P∘T^n are an offset on top of a shared
// rule, so factor_at(P∘T^n, k) = factor_at(P, k-n) holds by construction.
//
// Negative tails ("depth" d counts downward from the covered range, d = 0 at
// the first coordinate below it):
//   Const      - eventually constant
//   Periodic   - cycle[d mod q]; two accumulation values when the cycle is
//                not constant
//   Staircase  - plateaus of two values on geometrically growing blocks,
//                joined by ramps with geometrically shrinking steps (keeps
//                d(P, P∘T) summable while liminf != limsup)
//   LevelTail  - continuation of an inductive level construction, factors
//                converging to a declared limit
//   Opaque     - factors observable, nothing certified

#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "nsshift/bigint.hpp"
#include "nsshift/errors.hpp"
#include "nsshift/factor.hpp"

namespace nsshift {

struct Block {
    BigIndex lo, hi;  // inclusive
    Factor f;
};

struct ConstTail {
    Factor f;
};

struct PeriodicTail {
    std::vector<Factor> cycle;  // depth d carries cycle[d % size]
};

struct StaircaseTail {
    double hi_p0 = 0.7;
    double lo_p0 = 0.3;
    int first_epoch = 1;
    bool symbol_swap = false;  // emit every factor 0/1-swapped
};

/// Implemented by the level construction; measure code sees only this view.
struct LevelTailView {
    virtual ~LevelTailView() = default;
    /// Factor at tail depth d >= 0.
    virtual Factor factor_at_depth(const BigIndex& d) const = 0;
    /// Smallest depth d' <= d whose factor run still contains d.
    virtual BigIndex run_start_depth(const BigIndex& d) const = 0;
    /// Upper bound on the d-mass a shift by |n| can pick up from level
    /// u >= from_level blocks (their boundaries and factor gaps).
    virtual double shift_mass_bound(const BigIndex& n_abs, int from_level) const = 0;
    /// Upper bound on sum over levels u >= from_level of
    /// (lambda-block length) * d-term(p_u, limit).
    virtual double limit_mass_bound(int from_level) const = 0;
    /// First level whose blocks lie entirely below the covered range.
    virtual int first_tail_level() const = 0;
    /// p0 of the first tail level; deeper levels lie between limit and that.
    virtual double max_tail_p0() const = 0;
    /// |p0(level) - limit| monotonically nonincreasing over built levels.
    virtual bool validate_limit(const Factor& limit) const = 0;
};

struct LevelTail {
    std::shared_ptr<const LevelTailView> view;
    Factor limit{0.5};
};

struct OpaqueTail {
    Factor observed{0.5};
};

using NegTail = std::variant<ConstTail, PeriodicTail, StaircaseTail, LevelTail, OpaqueTail>;

// ---- staircase geometry ----------------------------------------------------

namespace staircase {

// epoch m: hi plateau 2^m, down ramp 2^m-1, lo plateau 2^m, up ramp 2^m-1
inline BigIndex epoch_size(int m) { return pow2(static_cast<unsigned long>(m) + 2) - 2; }

/// Cumulative size of epochs first..m (0 when m < first).
inline BigIndex cum_size(int first, int m) {
    if (m < first) return 0;
    return pow2(static_cast<unsigned long>(m) + 3) -
           pow2(static_cast<unsigned long>(first) + 2) - 2 * (m - first + 1);
}

struct Pos {
    int epoch;
    BigIndex offset;  // within epoch
};

inline Pos locate(const StaircaseTail& t, const BigIndex& d) {
    int m = t.first_epoch;
    while (cum_size(t.first_epoch, m) <= d) ++m;
    return {m, d - cum_size(t.first_epoch, m - 1)};
}

inline double step(const StaircaseTail& t, int m) {
    return (t.hi_p0 - t.lo_p0) / std::ldexp(1.0, m);
}

inline Factor factor_at(const StaircaseTail& t, const BigIndex& d) {
    const Pos pos = locate(t, d);
    const BigIndex a = pow2(static_cast<unsigned long>(pos.epoch));
    const double delta = step(t, pos.epoch);
    Factor f = Factor(0.5);
    if (pos.offset < a)
        f = Factor(t.hi_p0);
    else if (pos.offset < 2 * a - 1) {
        const long j = to_long(pos.offset - a + 1);
        f = Factor(t.hi_p0 - static_cast<double>(j) * delta);
    } else if (pos.offset < 3 * a - 1)
        f = Factor(t.lo_p0);
    else {
        const long j = to_long(pos.offset - (3 * a - 1) + 1);
        f = Factor(t.lo_p0 + static_cast<double>(j) * delta);
    }
    return t.symbol_swap ? f.swapped() : f;
}

/// Smallest depth of the constant piece containing d.
inline BigIndex run_start(const StaircaseTail& t, const BigIndex& d) {
    const Pos pos = locate(t, d);
    const BigIndex base = cum_size(t.first_epoch, pos.epoch - 1);
    const BigIndex a = pow2(static_cast<unsigned long>(pos.epoch));
    if (pos.offset < a) return base;                      // hi plateau
    if (pos.offset < 2 * a - 1) return d;                 // ramp coordinate
    if (pos.offset < 3 * a - 1) return base + 2 * a - 1;  // lo plateau
    return d;
}

/// Upper bound on the d-mass a shift by |n| can pick up from epochs >= m0:
/// each epoch m has at most 2^{m+1}+1 jumps of size step(m), each jump is
/// crossed at most |n| times, and d-term <= 1.5*(jump)^2 for factors in the
/// plateau range.
inline double shift_mass_bound(const StaircaseTail& t, double n_abs, int m0) {
    double total = 0.0;
    for (int m = std::max(m0, t.first_epoch);; ++m) {
        const double jumps = 2.0 * std::ldexp(1.0, m + 1) + 1.0;
        const double b = 1.5 * n_abs * jumps * step(t, m) * step(t, m);
        if (b < 1e-300) {
            total += 2e-300;
            break;
        }
        total += b * 1.0000001;  // absorb rounding into the bound
    }
    return total;
}

}  // namespace staircase

// ---- periodic helpers --------------------------------------------------------

namespace periodic {

inline Factor factor_at(const PeriodicTail& t, const BigIndex& d) {
    const auto q = static_cast<long>(t.cycle.size());
    return t.cycle[static_cast<std::size_t>(to_long(d % q))];
}

inline BigIndex run_start(const PeriodicTail& t, const BigIndex& d) {
    const auto q = static_cast<long>(t.cycle.size());
    const long i = to_long(d % q);
    const Factor v = t.cycle[static_cast<std::size_t>(i)];
    long back = 0;
    while (back < q && d - back > 0) {
        const long idx = static_cast<long>((((i - back - 1) % q) + q) % q);
        if (!(t.cycle[static_cast<std::size_t>(idx)] == v)) break;
        ++back;
    }
    if (back >= q) return 0;  // constant cycle
    return d - back;
}

}  // namespace periodic

// ---- the rule and the measure -------------------------------------------------

class BlockRule {
public:
    BlockRule(std::vector<Block> blocks, Factor pos_tail, NegTail neg_tail,
              BigIndex cover_lo_if_empty = BigIndex(0))
        : blocks_(std::move(blocks)),
          pos_tail_(pos_tail),
          neg_tail_(std::move(neg_tail)) {
        if (blocks_.empty()) {
            cover_lo_ = cover_lo_if_empty;
            cover_hi_ = cover_lo_ - 1;
        } else {
            for (std::size_t i = 0; i < blocks_.size(); ++i) {
                if (blocks_[i].lo > blocks_[i].hi)
                    throw BadMeasureSpec("block with lo > hi");
                if (i > 0 && blocks_[i].lo != blocks_[i - 1].hi + 1)
                    throw BadMeasureSpec("blocks must be contiguous and ascending");
            }
            cover_lo_ = blocks_.front().lo;
            cover_hi_ = blocks_.back().hi;
        }
    }

    const std::vector<Block>& blocks() const { return blocks_; }
    const BigIndex& cover_lo() const { return cover_lo_; }
    const BigIndex& cover_hi() const { return cover_hi_; }
    const Factor& pos_tail() const { return pos_tail_; }
    const NegTail& neg_tail() const { return neg_tail_; }

    Factor factor_at(const BigIndex& k) const {
        if (k > cover_hi_) return pos_tail_;
        if (k >= cover_lo_) return block_at(k).f;
        return tail_factor(depth(k));
    }

    /// Largest k' in [k, clamp] with the factor constant on [k, k'].
    BigIndex run_end(const BigIndex& k, const BigIndex& clamp) const {
        if (k > clamp) throw Error("run_end: empty range");
        if (k > cover_hi_) return clamp;
        if (k >= cover_lo_) {
            const Block& b = block_at(k);
            return b.hi < clamp ? b.hi : clamp;
        }
        const BigIndex start = tail_run_start(depth(k));
        const BigIndex k_end = cover_lo_ - 1 - start;
        return k_end < clamp ? k_end : clamp;
    }

private:
    BigIndex depth(const BigIndex& k) const { return cover_lo_ - 1 - k; }

    const Block& block_at(const BigIndex& k) const {
        std::size_t lo = 0, hi = blocks_.size();
        while (hi - lo > 1) {
            std::size_t mid = (lo + hi) / 2;
            if (blocks_[mid].lo <= k)
                lo = mid;
            else
                hi = mid;
        }
        return blocks_[lo];
    }

    Factor tail_factor(const BigIndex& d) const {
        return std::visit(
            [&](const auto& t) -> Factor {
                using T = std::decay_t<decltype(t)>;
                if constexpr (std::is_same_v<T, ConstTail>)
                    return t.f;
                else if constexpr (std::is_same_v<T, PeriodicTail>)
                    return periodic::factor_at(t, d);
                else if constexpr (std::is_same_v<T, StaircaseTail>)
                    return staircase::factor_at(t, d);
                else if constexpr (std::is_same_v<T, LevelTail>)
                    return t.view->factor_at_depth(d);
                else
                    return t.observed;
            },
            neg_tail_);
    }

    BigIndex tail_run_start(const BigIndex& d) const {
        return std::visit(
            [&](const auto& t) -> BigIndex {
                using T = std::decay_t<decltype(t)>;
                if constexpr (std::is_same_v<T, ConstTail>) {
                    (void)t;
                    return BigIndex(0);
                } else if constexpr (std::is_same_v<T, PeriodicTail>)
                    return periodic::run_start(t, d);
                else if constexpr (std::is_same_v<T, StaircaseTail>)
                    return staircase::run_start(t, d);
                else if constexpr (std::is_same_v<T, LevelTail>)
                    return t.view->run_start_depth(d);
                else {
                    (void)t;
                    return BigIndex(0);
                }
            },
            neg_tail_);
    }

    std::vector<Block> blocks_;
    BigIndex cover_lo_, cover_hi_;
    Factor pos_tail_;
    NegTail neg_tail_;
};

class ProductMeasure {
public:
    explicit ProductMeasure(std::shared_ptr<const BlockRule> rule, BigIndex shift = 0)
        : rule_(std::move(rule)), shift_(std::move(shift)) {}

    const BlockRule& rule() const { return *rule_; }
    const std::shared_ptr<const BlockRule>& rule_ptr() const { return rule_; }
    const BigIndex& shift_offset() const { return shift_; }

    Factor factor_at(const BigIndex& k) const { return rule_->factor_at(k - shift_); }

    /// P∘T^n
    ProductMeasure shifted(const BigIndex& n) const {
        return ProductMeasure(rule_, shift_ + n);
    }

    BigIndex run_end(const BigIndex& k, const BigIndex& clamp) const {
        return rule_->run_end(k - shift_, clamp - shift_) + shift_;
    }

    bool same_rule(const ProductMeasure& o) const { return rule_ == o.rule_; }

private:
    std::shared_ptr<const BlockRule> rule_;
    BigIndex shift_;
};

/// Decorator applying the 0/1 symbol swap to an inner level-tail view.
/// Distance terms and affinities are invariant under the swap, so every
/// certificate delegates unchanged.
class SwappedLevelView : public LevelTailView {
public:
    explicit SwappedLevelView(std::shared_ptr<const LevelTailView> inner)
        : inner_(std::move(inner)) {}

    Factor factor_at_depth(const BigIndex& d) const override {
        return inner_->factor_at_depth(d).swapped();
    }
    BigIndex run_start_depth(const BigIndex& d) const override {
        return inner_->run_start_depth(d);
    }
    double shift_mass_bound(const BigIndex& n_abs, int from_level) const override {
        return inner_->shift_mass_bound(n_abs, from_level);
    }
    double limit_mass_bound(int from_level) const override {
        return inner_->limit_mass_bound(from_level);
    }
    int first_tail_level() const override { return inner_->first_tail_level(); }
    double max_tail_p0() const override { return 1.0 - inner_->max_tail_p0(); }
    bool validate_limit(const Factor& limit) const override {
        return inner_->validate_limit(limit.swapped());
    }

private:
    std::shared_ptr<const LevelTailView> inner_;
};

/// The 0/1 symbol swap applied to every factor simultaneously.
inline ProductMeasure swap_symbols(const ProductMeasure& P) {
    std::vector<Block> blocks;
    for (const auto& b : P.rule().blocks())
        blocks.push_back(Block{b.lo, b.hi, b.f.swapped()});
    NegTail tail = std::visit(
        [](const auto& t) -> NegTail {
            using T = std::decay_t<std::remove_cvref_t<decltype(t)>>;
            if constexpr (std::is_same_v<T, ConstTail>)
                return ConstTail{t.f.swapped()};
            else if constexpr (std::is_same_v<T, PeriodicTail>) {
                PeriodicTail r;
                for (const auto& f : t.cycle) r.cycle.push_back(f.swapped());
                return r;
            } else if constexpr (std::is_same_v<T, StaircaseTail>) {
                StaircaseTail r = t;
                r.symbol_swap = !r.symbol_swap;
                return r;
            } else if constexpr (std::is_same_v<T, LevelTail>)
                return LevelTail{std::make_shared<const SwappedLevelView>(t.view),
                                 t.limit.swapped()};
            else
                return OpaqueTail{t.observed.swapped()};
        },
        P.rule().neg_tail());
    auto rule = std::make_shared<const BlockRule>(std::move(blocks),
                                                  P.rule().pos_tail().swapped(),
                                                  std::move(tail), P.rule().cover_lo());
    return ProductMeasure(rule, P.shift_offset());
}

/// Segment-aligned traversal of two factor functions over [lo, hi]: emit is
/// called with (count, factor under P, factor under Q) for maximal segments
/// on which both are constant.
template <typename Emit>
void sweep_pair(const ProductMeasure& P, const ProductMeasure& Q, const BigIndex& lo,
                const BigIndex& hi, long budget, Emit&& emit) {
    BigIndex k = lo;
    long used = 0;
    while (k <= hi) {
        if (++used > budget)
            throw IterationBudgetExceeded(
                "sweep_pair: window exceeds the segment iteration budget");
        const BigIndex ep = P.run_end(k, hi);
        const BigIndex eq = Q.run_end(k, hi);
        const BigIndex e = ep < eq ? ep : eq;
        emit(BigIndex(e - k + 1), P.factor_at(k), Q.factor_at(k));
        k = e + 1;
    }
}

}
