#pragma once

// The dichotomy classifier: a nonsingular product measure either admits a
// shift-invariant equivalent product probability (the limit product of its
// negative-tail factors, when the distance to it converges) or is of
// nonsingular zero type. Inputs failing the nonsingularity precondition or
// carrying undecidable tails are reported as such, never guessed.

#include <string>
#include <variant>

#include "nsshift/distance.hpp"
#include "nsshift/fixtures.hpp"
#include "nsshift/measure.hpp"

namespace nsshift {

struct NotNonsingular {
    DivergesDistance witness;  // d(P, P∘T) lower-bound family
};

struct EquivalentInvariant {
    ProductMeasure q;   // stationary product, all factors equal
    double distance;    // d(P, Q) in [distance, distance + tail_bound]
    double tail_bound;
};

struct ZeroTypeVerdict {
    enum class Reason { SingularToLimitProduct, NoLimit };
    Reason reason;
    std::string detail;
};

struct DegenerateVerdict {
    double limit_p0;
};

struct Inconclusive {
    std::string diagnostic;
};

using Classification =
    std::variant<NotNonsingular, EquivalentInvariant, ZeroTypeVerdict, DegenerateVerdict,
                 Inconclusive>;

inline const char* verdict_name(const Classification& c) {
    struct V {
        const char* operator()(const NotNonsingular&) const { return "NotNonsingular"; }
        const char* operator()(const EquivalentInvariant&) const { return "EquivalentInvariant"; }
        const char* operator()(const ZeroTypeVerdict& z) const {
            return z.reason == ZeroTypeVerdict::Reason::SingularToLimitProduct
                       ? "ZeroType(SingularToLimitProduct)"
                       : "ZeroType(NoLimit)";
        }
        const char* operator()(const DegenerateVerdict&) const { return "Degenerate"; }
        const char* operator()(const Inconclusive&) const { return "Inconclusive"; }
    };
    return std::visit(V{}, c);
}

namespace detail_classify {

struct LimitInfo {
    enum class Kind { HasLimit, NoLimit, Unknown } kind;
    Factor limit{0.5};
};

inline LimitInfo negative_limit(const ProductMeasure& P) {
    using K = LimitInfo::Kind;
    return std::visit(
        [](const auto& t) -> LimitInfo {
            using T = std::decay_t<decltype(t)>;
            if constexpr (std::is_same_v<T, ConstTail>)
                return {K::HasLimit, t.f};
            else if constexpr (std::is_same_v<T, PeriodicTail>) {
                for (const auto& f : t.cycle)
                    if (!(f == t.cycle.front())) return {K::NoLimit, Factor(0.5)};
                return {K::HasLimit, t.cycle.front()};
            } else if constexpr (std::is_same_v<T, StaircaseTail>)
                return {K::NoLimit, Factor(0.5)};
            else if constexpr (std::is_same_v<T, LevelTail>) {
                if (t.view->validate_limit(t.limit)) return {K::HasLimit, t.limit};
                return {K::Unknown, t.limit};
            } else
                return {K::Unknown, Factor(0.5)};
        },
        P.rule().neg_tail());
}

}  // namespace detail_classify

inline Classification classify(const ProductMeasure& P, long budget = kDefaultSweepBudget) {
    using detail_classify::LimitInfo;

    // nonsingularity first: d(P, P∘T) must converge (Kakutani)
    const DistanceResult d1 = kakutani_distance_exact(P, P.shifted(1), budget);
    if (auto* w = std::get_if<DivergesDistance>(&d1)) return NotNonsingular{*w};
    if (std::get_if<UndecidableDistance>(&d1)) {
        const double partial =
            kakutani_distance_truncated(P, P.shifted(1), BigIndex(1024), budget).value();
        return Inconclusive{"d(P, P∘T) undecidable from the tail descriptor; d_1024 = " +
                            std::to_string(partial)};
    }

    const LimitInfo lim = detail_classify::negative_limit(P);
    if (lim.kind == LimitInfo::Kind::NoLimit)
        return ZeroTypeVerdict{ZeroTypeVerdict::Reason::NoLimit,
                               "negative-tail factors have liminf != limsup"};
    if (lim.kind == LimitInfo::Kind::Unknown) {
        const double partial =
            kakutani_distance_truncated(P, P.shifted(1), BigIndex(1024), budget).value();
        return Inconclusive{"negative tail descriptor absent or failed validation; d_1024(P,P∘T) = " +
                            std::to_string(partial)};
    }

    if (lim.limit.p0() == 0.0 || lim.limit.p0() == 1.0)
        return DegenerateVerdict{lim.limit.p0()};

    const ProductMeasure Q = constant_measure(lim.limit);
    const DistanceResult dq = kakutani_distance_exact(P, Q, budget);
    if (auto* f = std::get_if<FiniteDistance>(&dq))
        return EquivalentInvariant{Q, f->value, f->tail_bound};
    if (auto* w = std::get_if<DivergesDistance>(&dq))
        return ZeroTypeVerdict{ZeroTypeVerdict::Reason::SingularToLimitProduct,
                               "d(P, limit product) diverges: " + w->witness};
    return Inconclusive{std::get<UndecidableDistance>(dq).diagnostic};
}

}
