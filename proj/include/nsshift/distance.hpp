#pragma once

// Kakutani distance and Hellinger affinity between product measures: windowed
// sums by block intersection (exact dyadic accumulation, so block evaluation
// and per-index evaluation agree bit for bit), and full-line verdicts with
// certificates. A Finite(v, eps) verdict means the true distance lies in
// [v, v+eps]; Diverges carries a lower-bound family; Undecidable is reported
// whenever the tail descriptors cannot certify either way.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <variant>

#include "nsshift/bigint.hpp"
#include "nsshift/config.hpp"
#include "nsshift/errors.hpp"
#include "nsshift/factor.hpp"
#include "nsshift/measure.hpp"

namespace nsshift {

inline constexpr long kDefaultSweepBudget = 4'000'000;

struct WindowSum {
    ExactDyadicSum exact;
    double value() const { return exact.to_double(); }
};

/// d_N(P,Q) = sum_{|k| <= N} d-term; block-segment evaluation.
inline WindowSum kakutani_distance_truncated(const ProductMeasure& P, const ProductMeasure& Q,
                                             const BigIndex& N,
                                             long budget = kDefaultSweepBudget) {
    if (N < 0) throw Error("kakutani_distance_truncated: N must be >= 0");
    WindowSum out;
    sweep_pair(P, Q, -N, N, budget, [&](const BigIndex& count, Factor a, Factor b) {
        if (!(a == b)) out.exact.add(factor_distance_term(a, b), count);
    });
    return out;
}

/// rho_N(P,Q) = prod_{|k| <= N} h; computed in log space.
inline double hellinger_affinity(const ProductMeasure& P, const ProductMeasure& Q,
                                 const BigIndex& N, long budget = kDefaultSweepBudget) {
    if (N < 0) throw Error("hellinger_affinity: N must be >= 0");
    LogAccumulator acc;
    bool hit_zero = false;
    sweep_pair(P, Q, -N, N, budget, [&](const BigIndex& count, Factor a, Factor b) {
        if (a == b) return;
        const double h = factor_affinity(a, b);
        if (h <= 0.0) {
            hit_zero = true;
            return;
        }
        acc.add(count.convert_to<double>() * std::log(h));
    });
    if (hit_zero) return 0.0;
    return std::exp(acc.value());
}

struct ProportionalityReport {
    double d = 0;
    double minus_log_rho = 0;
    double c = 1;  // min coordinate affinity over the window
    bool degenerate = false;
    bool holds = false;
};

/// d_N/2 <= -log rho_N <= d_N/(2c) with c = min_k h_k over the window.
inline ProportionalityReport proportionality_check(const ProductMeasure& P,
                                                   const ProductMeasure& Q, const BigIndex& N,
                                                   long budget = kDefaultSweepBudget) {
    ProportionalityReport rep;
    ExactDyadicSum d;
    long double log_rho = 0.0L;
    sweep_pair(P, Q, -N, N, budget, [&](const BigIndex& count, Factor a, Factor b) {
        const double h = factor_affinity(a, b);
        if (h < rep.c) rep.c = h;
        if (a == b) return;
        d.add(factor_distance_term(a, b), count);
        if (h > 0.0)
            log_rho += static_cast<long double>(count.convert_to<double>()) *
                       std::log(static_cast<long double>(h));
    });
    rep.d = d.to_double();
    if (rep.c <= 0.0) {
        rep.degenerate = true;
        rep.minus_log_rho = HUGE_VAL;
        rep.holds = false;
        return rep;
    }
    rep.minus_log_rho = static_cast<double>(-log_rho);
    const double slack = 1e-9 * (1.0 + rep.d);
    rep.holds = rep.d / 2 <= rep.minus_log_rho + slack &&
                rep.minus_log_rho <= rep.d / (2 * rep.c) + slack;
    return rep;
}

struct FiniteDistance {
    double value = 0;
    double tail_bound = 0;
};

struct DivergesDistance {
    double per_unit = 0;    // lower bound per term/period of the witness family
    std::string witness;
};

struct UndecidableDistance {
    std::string diagnostic;
};

using DistanceResult = std::variant<FiniteDistance, DivergesDistance, UndecidableDistance>;

inline bool is_finite(const DistanceResult& r) {
    return std::holds_alternative<FiniteDistance>(r);
}
inline bool is_diverges(const DistanceResult& r) {
    return std::holds_alternative<DivergesDistance>(r);
}

namespace detail_dist {

struct TailCtx {
    const ProductMeasure* m;
    const NegTail* tail;
    BigIndex abs_cover_lo;  // tail governs k < this
};

inline bool cycle_constant(const PeriodicTail& t) {
    for (const auto& f : t.cycle)
        if (!(f == t.cycle.front())) return false;
    return true;
}

/// Result of certifying the region k < floor for one ordered pair of tails.
using NegCert = std::variant<double, DivergesDistance, UndecidableDistance>;

inline NegCert neg_certificate(const TailCtx& A, const TailCtx& B, const BigIndex& floor_k) {
    const NegTail& ta = *A.tail;
    const NegTail& tb = *B.tail;

    if (std::holds_alternative<OpaqueTail>(ta) || std::holds_alternative<OpaqueTail>(tb))
        return UndecidableDistance{"a negative tail carries no certificate"};

    // symmetric dispatch: order the pair by kind index for fewer cases
    const bool swap = ta.index() > tb.index();
    const TailCtx& X = swap ? B : A;
    const TailCtx& Y = swap ? A : B;
    const NegTail& tx = *X.tail;
    const NegTail& ty = *Y.tail;

    // Const x Const
    if (auto* cx = std::get_if<ConstTail>(&tx)) {
        if (auto* cy = std::get_if<ConstTail>(&ty)) {
            const double g = factor_distance_term(cx->f, cy->f);
            if (g == 0.0) return 0.0;
            return DivergesDistance{g, "constant negative tails differ at every coordinate"};
        }
        if (auto* py = std::get_if<PeriodicTail>(&ty)) {
            double period_mass = 0;
            for (const auto& f : py->cycle) period_mass += factor_distance_term(f, cx->f);
            if (period_mass == 0.0) return 0.0;
            return DivergesDistance{period_mass,
                                    "periodic tail vs constant: positive mass every period"};
        }
        if (auto* sy = std::get_if<StaircaseTail>(&ty)) {
            const Factor hi(sy->hi_p0), lo(sy->lo_p0);
            const double g = std::max(factor_distance_term(hi, cx->f),
                                      factor_distance_term(lo, cx->f));
            return DivergesDistance{g, "staircase plateaus recur with a fixed gap to the constant"};
        }
        if (auto* ly = std::get_if<LevelTail>(&ty)) {
            if (cx->f == ly->limit)
                return ly->view->limit_mass_bound(ly->view->first_tail_level());
            const double g = min_distance_term_over_range(cx->f, ly->limit.p0(),
                                                          ly->view->max_tail_p0());
            if (g == 0.0)
                return UndecidableDistance{"constant sits inside the level tail range"};
            return DivergesDistance{g, "level tail converges away from the constant"};
        }
    }

    if (auto* px = std::get_if<PeriodicTail>(&tx)) {
        if (auto* py = std::get_if<PeriodicTail>(&ty)) {
            const long qx = static_cast<long>(px->cycle.size());
            const long qy = static_cast<long>(py->cycle.size());
            const long L = std::lcm(qx, qy);
            double period_mass = 0;
            for (long i = 0; i < L; ++i) {
                const BigIndex k = floor_k - 1 - i;
                period_mass += factor_distance_term(X.m->factor_at(k), Y.m->factor_at(k));
            }
            if (period_mass == 0.0) return 0.0;
            return DivergesDistance{period_mass, "aligned periodic tails differ every period"};
        }
        if (std::get_if<StaircaseTail>(&ty))
            return UndecidableDistance{"periodic against staircase tails"};
        if (auto* ly = std::get_if<LevelTail>(&ty)) {
            // non-constant cycle: some value keeps a gap to the limit range
            double gmax = 0;
            for (const auto& f : px->cycle)
                gmax = std::max(gmax, min_distance_term_over_range(f, ly->limit.p0(),
                                                                   ly->view->max_tail_p0()));
            if (gmax > 0.0)
                return DivergesDistance{gmax, "a periodic value recurs away from the level limit"};
            return UndecidableDistance{"periodic values inside the level tail range"};
        }
    }

    if (auto* sx = std::get_if<StaircaseTail>(&tx)) {
        if (auto* sy = std::get_if<StaircaseTail>(&ty)) {
            const bool same_shape = sx->hi_p0 == sy->hi_p0 && sx->lo_p0 == sy->lo_p0 &&
                                    sx->first_epoch == sy->first_epoch &&
                                    sx->symbol_swap == sy->symbol_swap;
            if (X.m->same_rule(*Y.m) || same_shape) {
                // relative displacement of the two tail patterns
                const BigIndex rel = (X.abs_cover_lo - Y.abs_cover_lo);
                const BigIndex deeper =
                    X.abs_cover_lo < Y.abs_cover_lo ? X.abs_cover_lo : Y.abs_cover_lo;
                const BigIndex d = deeper - 1 - floor_k;  // depth already swept past
                const auto pos = staircase::locate(*sx, d < 0 ? BigIndex(0) : d);
                double n_abs = rel < 0 ? -rel.convert_to<double>() : rel.convert_to<double>();
                return staircase::shift_mass_bound(*sx, n_abs, pos.epoch);
            }
            return UndecidableDistance{"two unrelated staircase tails"};
        }
        if (auto* ly = std::get_if<LevelTail>(&ty)) {
            const double g =
                std::max(min_distance_term_over_range(Factor(sx->hi_p0), ly->limit.p0(),
                                                      ly->view->max_tail_p0()),
                         min_distance_term_over_range(Factor(sx->lo_p0), ly->limit.p0(),
                                                      ly->view->max_tail_p0()));
            if (g > 0.0)
                return DivergesDistance{g, "staircase plateaus recur away from the level limit"};
            return UndecidableDistance{"staircase plateaus inside the level tail range"};
        }
    }

    if (auto* lx = std::get_if<LevelTail>(&tx)) {
        if (auto* ly = std::get_if<LevelTail>(&ty)) {
            if (X.m->same_rule(*Y.m)) {
                const BigIndex rel = X.m->shift_offset() - Y.m->shift_offset();
                return lx->view->shift_mass_bound(rel < 0 ? BigIndex(-rel) : rel,
                                                  lx->view->first_tail_level());
            }
            if (lx->limit == ly->limit) {
                return 2.0 * (lx->view->limit_mass_bound(lx->view->first_tail_level()) +
                              ly->view->limit_mass_bound(ly->view->first_tail_level()));
            }
            const double g = min_distance_term_over_range(lx->limit, ly->limit.p0(),
                                                          ly->view->max_tail_p0());
            if (g > 0.0)
                return DivergesDistance{g, "level tails converge to different limits"};
            return UndecidableDistance{"level tails with entangled limits"};
        }
    }

    return UndecidableDistance{"unsupported negative tail combination"};
}

}  // namespace detail_dist

/// Full-line distance with a certificate.
inline DistanceResult kakutani_distance_exact(const ProductMeasure& P, const ProductMeasure& Q,
                                              long budget = kDefaultSweepBudget) {
    using namespace detail_dist;

    // positive side: both constant beyond the covers
    const BigIndex pos_start_p = P.rule().cover_hi() + P.shift_offset() + 1;
    const BigIndex pos_start_q = Q.rule().cover_hi() + Q.shift_offset() + 1;
    const BigIndex whi = (pos_start_p > pos_start_q ? pos_start_p : pos_start_q) + 1;
    {
        const double g = factor_distance_term(P.factor_at(whi + 1), Q.factor_at(whi + 1));
        if (g != 0.0)
            return DivergesDistance{g, "positive tails differ at every coordinate"};
    }

    TailCtx A{&P, &P.rule().neg_tail(), P.rule().cover_lo() + P.shift_offset()};
    TailCtx B{&Q, &Q.rule().neg_tail(), Q.rule().cover_lo() + Q.shift_offset()};

    // window floor: below both covers, with room for periodic alignment and a
    // dozen staircase epochs so the certified remainder is small
    BigIndex wlo = A.abs_cover_lo < B.abs_cover_lo ? A.abs_cover_lo : B.abs_cover_lo;
    BigIndex pad(4);
    {
        const BigIndex rel = P.shift_offset() - Q.shift_offset();
        pad += rel < 0 ? -rel : rel;
        long q = 1;
        if (auto* p = std::get_if<PeriodicTail>(A.tail)) q = std::lcm(q, static_cast<long>(p->cycle.size()));
        if (auto* p = std::get_if<PeriodicTail>(B.tail)) q = std::lcm(q, static_cast<long>(p->cycle.size()));
        pad += 2 * q;
        if (auto* s = std::get_if<StaircaseTail>(A.tail))
            pad += staircase::cum_size(s->first_epoch, s->first_epoch + 13);
        else if (auto* s = std::get_if<StaircaseTail>(B.tail))
            pad += staircase::cum_size(s->first_epoch, s->first_epoch + 13);
    }
    wlo -= pad;

    const NegCert cert = neg_certificate(A, B, wlo);
    if (auto* u = std::get_if<UndecidableDistance>(&cert)) return *u;
    if (auto* d = std::get_if<DivergesDistance>(&cert)) return *d;

    WindowSum mid;
    sweep_pair(P, Q, wlo, whi, budget, [&](const BigIndex& count, Factor a, Factor b) {
        if (!(a == b)) mid.exact.add(factor_distance_term(a, b), count);
    });
    return FiniteDistance{mid.value(), std::get<double>(cert)};
}

}
