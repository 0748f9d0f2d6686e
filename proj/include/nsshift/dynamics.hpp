#pragma once

// Radon-Nikodym machinery for the shift: windowed derivative evaluation along
// sampled configurations, mean and square-root identities, zero-type
// profiles, k-fold power products and the Hopf conservativity ledger.
//
// The windowed derivative of T^n at w is prod_{k in window}
// P_{k-n}(w_k)/P_k(w_k); it is exact given w, and the d-mass outside the
// window is reported as an accuracy indicator.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "nsshift/construction.hpp"
#include "nsshift/distance.hpp"
#include "nsshift/errors.hpp"
#include "nsshift/measure.hpp"
#include "nsshift/rng.hpp"

namespace nsshift {

inline constexpr long kDefaultSampleBudget = 60'000'000;

struct Window {
    BigIndex lo, hi;
    BigIndex length() const { return hi - lo + 1; }
};

/// A source of configuration bits; marginals are factor_at(P,k).
struct BitSource {
    virtual ~BitSource() = default;
    virtual int bit(const BigIndex& k) const = 0;
};

/// Lazily sampled configuration of P, keyed by (seed, path, coordinate).
class LazyPath : public BitSource {
public:
    LazyPath(const ProductMeasure& P, std::uint64_t seed, std::uint64_t path_index)
        : p_(&P), seed_(seed), path_(path_index) {}

    int bit(const BigIndex& k) const override {
        return uniform01(seed_, path_, k) < p_->factor_at(k).p0() ? 0 : 1;
    }

private:
    const ProductMeasure* p_;
    std::uint64_t seed_, path_;
};

struct SamplePath : BitSource {
    Window window;
    std::vector<std::uint8_t> symbols;
    std::uint64_t seed = 0;
    std::uint64_t path_index = 0;

    int bit(const BigIndex& k) const override {
        if (k < window.lo || k > window.hi)
            throw Error("SamplePath: coordinate outside window");
        return symbols[static_cast<std::size_t>(to_long(k - window.lo))];
    }
};

inline std::vector<SamplePath> sample_paths(const ProductMeasure& P, const Window& win,
                                            std::uint64_t seed, long count,
                                            long budget = kDefaultSampleBudget) {
    if (count < 1) throw Error("sample_paths: count must be >= 1");
    if (win.lo > win.hi) throw Error("sample_paths: empty window");
    if (win.length() * count > budget)
        throw WindowTooLarge("sample_paths: window*count exceeds the memory budget");
    std::vector<SamplePath> out;
    out.reserve(static_cast<std::size_t>(count));
    const long len = to_long(win.length());
    for (long i = 0; i < count; ++i) {
        SamplePath sp;
        sp.window = win;
        sp.seed = seed;
        sp.path_index = static_cast<std::uint64_t>(i);
        sp.symbols.resize(static_cast<std::size_t>(len));
        LazyPath lazy(P, seed, sp.path_index);
        for (long j = 0; j < len; ++j)
            sp.symbols[static_cast<std::size_t>(j)] =
                static_cast<std::uint8_t>(lazy.bit(win.lo + j));
        out.push_back(std::move(sp));
    }
    return out;
}

/// Windowed log-derivative along w: exact given the bits; only mismatch
/// segments contribute, so deep covers cost nothing.
inline double rn_log_windowed(const ProductMeasure& P, const ProductMeasure& Pn,
                              const Window& win, const BitSource& w,
                              long budget = kDefaultSweepBudget) {
    long double acc = 0.0L;
    BigIndex k = win.lo;
    long used = 0;
    while (k <= win.hi) {
        if (++used > budget) throw IterationBudgetExceeded("rn window: too many segments");
        const BigIndex e1 = Pn.run_end(k, win.hi);
        const BigIndex e2 = P.run_end(k, win.hi);
        const BigIndex e = e1 < e2 ? e1 : e2;
        const Factor num = Pn.factor_at(k);
        const Factor den = P.factor_at(k);
        if (!(num == den)) {
            for (BigIndex j = k; j <= e; ++j) {
                if (++used > budget)
                    throw IterationBudgetExceeded("rn window: mismatch coordinates over budget");
                const int b = w.bit(j);
                const double pn = num.prob(b);
                const double pd = den.prob(b);
                if (pd == 0.0 || pn == 0.0)
                    throw ZeroDensity("rn derivative: zero-probability symbol");
                acc += std::log(static_cast<long double>(pn)) -
                       std::log(static_cast<long double>(pd));
            }
        }
        k = e + 1;
    }
    return static_cast<double>(acc);
}

inline double rn_value(const ProductMeasure& P, const ProductMeasure& Pn, const Window& win,
                       const BitSource& w, long budget = kDefaultSweepBudget) {
    return std::exp(rn_log_windowed(P, Pn, win, w, budget));
}

struct RnValue {
    double log_value = 0;
    double tail_dmass = 0;  // d-mass of (P, P∘T^n) outside the window
    double value() const { return std::exp(log_value); }
};

inline RnValue rn_derivative_windowed(const ProductMeasure& P, const BigIndex& n,
                                      const Window& win, const BitSource& w,
                                      long budget = kDefaultSweepBudget) {
    RnValue out;
    const ProductMeasure Pn = P.shifted(n);
    out.log_value = rn_log_windowed(P, Pn, win, w, budget);

    const DistanceResult full = kakutani_distance_exact(P, Pn);
    if (auto* f = std::get_if<FiniteDistance>(&full)) {
        WindowSum in;
        sweep_pair(Pn, P, win.lo, win.hi, budget,
                   [&](const BigIndex& count, Factor a, Factor b) {
                       if (!(a == b)) in.exact.add(factor_distance_term(a, b), count);
                   });
        out.tail_dmass = std::max(0.0, f->value - in.value()) + f->tail_bound;
    } else {
        out.tail_dmass = HUGE_VAL;
    }
    return out;
}

struct MeanRnReport {
    double exact_product = 1.0;  // prod_k sum_b P_{k-n}(b); 1 by factorization
    double mc_mean = 0;
    double mc_stderr = 0;
    long count = 0;
    bool within_4sigma = false;
};

inline MeanRnReport mean_rn_check(const ProductMeasure& P, const BigIndex& n, const Window& win,
                                  std::uint64_t seed, long count,
                                  long budget = kDefaultSweepBudget) {
    MeanRnReport rep;
    rep.count = count;
    const ProductMeasure Pn = P.shifted(n);
    double prod = 1.0;
    sweep_pair(Pn, P, win.lo, win.hi, budget, [&](const BigIndex& cnt, Factor a, Factor b) {
        if (a == b) return;
        const double s = a.p0() + a.p1();
        if (s != 1.0) prod *= std::pow(s, cnt.convert_to<double>());
    });
    rep.exact_product = prod;

    double sum = 0, sumsq = 0;
    for (long i = 0; i < count; ++i) {
        LazyPath w(P, seed, static_cast<std::uint64_t>(i));
        const double v = rn_value(P, Pn, win, w, budget);
        sum += v;
        sumsq += v * v;
    }
    rep.mc_mean = sum / static_cast<double>(count);
    rep.mc_stderr = std::sqrt(std::max(0.0, sumsq / count - rep.mc_mean * rep.mc_mean) /
                              static_cast<double>(count));
    rep.within_4sigma = std::abs(rep.mc_mean - 1.0) <= 4.0 * rep.mc_stderr + 1e-12;
    return rep;
}

struct SqrtRnReport {
    double estimate = 0;
    double std_error = 0;
    double affinity_target = 0;  // prod over the window of h(P_k, P_{k-n})
    bool within_4sigma = false;
};

inline SqrtRnReport sqrt_rn_estimator(const ProductMeasure& P, const BigIndex& n,
                                      const Window& win, std::uint64_t seed, long count,
                                      long budget = kDefaultSweepBudget) {
    SqrtRnReport rep;
    const ProductMeasure Pn = P.shifted(n);
    long double acc = 0.0L;
    bool zero = false;
    sweep_pair(Pn, P, win.lo, win.hi, budget, [&](const BigIndex& cnt, Factor a, Factor b) {
        if (a == b) return;
        const double h = factor_affinity(a, b);
        if (h <= 0)
            zero = true;
        else
            acc += static_cast<long double>(cnt.convert_to<double>()) *
                   std::log(static_cast<long double>(h));
    });
    rep.affinity_target = zero ? 0.0 : static_cast<double>(std::exp(acc));

    double sum = 0, sumsq = 0;
    for (long i = 0; i < count; ++i) {
        LazyPath w(P, seed, static_cast<std::uint64_t>(i));
        const double v = std::exp(0.5 * rn_log_windowed(P, Pn, win, w, budget));
        sum += v;
        sumsq += v * v;
    }
    rep.estimate = sum / static_cast<double>(count);
    rep.std_error = std::sqrt(std::max(0.0, sumsq / count - rep.estimate * rep.estimate) /
                              static_cast<double>(count));
    rep.within_4sigma =
        std::abs(rep.estimate - rep.affinity_target) <= 4.0 * rep.std_error + 1e-12;
    return rep;
}

struct ZeroTypeRow {
    long n = 0;
    double d = 0;             // value or lower bound
    std::string certificate;  // "finite(+tail)", "diverges", "truncated-lower-bound"
    double rho_upper = 1.0;   // rho <= exp(-d/2)
};

inline std::vector<ZeroTypeRow> zero_type_profile(const ProductMeasure& P,
                                                  const std::vector<long>& n_list,
                                                  const BigIndex& fallback_N = BigIndex(4096),
                                                  long budget = kDefaultSweepBudget) {
    std::vector<ZeroTypeRow> out;
    for (long n : n_list) {
        ZeroTypeRow row;
        row.n = n;
        const DistanceResult r = kakutani_distance_exact(P, P.shifted(BigIndex(n)), budget);
        if (auto* f = std::get_if<FiniteDistance>(&r)) {
            row.d = f->value;
            row.certificate = "finite(+" + std::to_string(f->tail_bound) + ")";
        } else if (std::holds_alternative<DivergesDistance>(r)) {
            row.d = HUGE_VAL;
            row.certificate = "diverges";
        } else {
            row.d = kakutani_distance_truncated(P, P.shifted(BigIndex(n)), fallback_N, budget)
                        .value();
            row.certificate = "truncated-lower-bound";
        }
        row.rho_upper = std::exp(-row.d / 2.0);
        out.push_back(row);
    }
    return out;
}

struct PowerSpec {
    std::vector<long> exponents;  // l_1..l_k, all nonzero

    explicit PowerSpec(std::vector<long> ls) : exponents(std::move(ls)) {
        if (exponents.empty()) throw Error("PowerSpec: need at least one exponent");
        for (long l : exponents)
            if (l == 0) throw Error("PowerSpec: exponents must be nonzero");
    }

    long max_abs() const {
        long m = 0;
        for (long l : exponents) m = std::max(m, std::labs(l));
        return m;
    }
};

/// Derivative of T^{l_1} x ... x T^{l_k} at step n along one configuration
/// per fold. Canonical evaluation order keeps the value invariant under
/// permutations of the (l_i, w_i) pairs.
inline double power_rn(const ProductMeasure& P, const PowerSpec& spec, long n, const Window& win,
                       const std::vector<const BitSource*>& paths,
                       long budget = kDefaultSweepBudget) {
    if (paths.size() != spec.exponents.size())
        throw Error("power_rn: one path per fold required");
    std::vector<std::size_t> order(paths.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return spec.exponents[a] < spec.exponents[b];
    });
    double prod = 1.0;
    for (std::size_t i : order) {
        const ProductMeasure Pn = P.shifted(BigIndex(spec.exponents[i] * n));
        prod *= rn_value(P, Pn, win, *paths[i], budget);
    }
    return prod;
}

struct ConservativityLedgerRow {
    int t = 0;
    int folds = 0;
    long L = 0;
    bool bound_holds = false;  // (floor(m_t/L) - N_t) 2^(-k N_t - 1) >= 1/2, exact
    double log2_bound = 0;     // approximate, display only
};

/// log2 of (floor(m_t/L) - N_t) * 2^(-k N_t - 1), approximate (display only).
inline double ledger_log2(const LevelParams& lv, int folds, long L) {
    if (!lv.N.is_explicit() || !fits_long(lv.N.to_bigindex())) return -HUGE_VAL;
    const double kn = static_cast<double>(folds) * static_cast<double>(to_long(lv.N.to_bigindex()));
    double log2_count;
    if (lv.m.is_explicit() && floor_log2(lv.m.to_bigindex()) < 900) {
        const BigIndex count = lv.m.to_bigindex() / L - lv.N.to_bigindex();
        if (count <= 0) return -HUGE_VAL;
        log2_count = std::log2(count.convert_to<double>());
    } else {
        // N_t is negligible against m_t/L beyond the base level
        log2_count = lv.m.approx_log2() - std::log2(static_cast<double>(L));
    }
    const double v = log2_count - kn - 1.0;
    return std::isfinite(v) ? v : -HUGE_VAL;
}

/// Exact check of (floor(m_t/L) - N_t) * 2^(-k N_t - 1) >= 1/2 for one level.
inline ConservativityLedgerRow conservativity_bound_check(const LevelParams& lv, int folds,
                                                          long L) {
    ConservativityLedgerRow row;
    row.t = lv.t;
    row.folds = folds;
    row.L = L;
    // floor(m/L) - N >= 2^(k N)  <=>  m >= L*(N + 2^(k N))
    const HugeInt rhs =
        HugeInt::add(lv.N, HugeInt::pow2_of(lv.N.mul_small(BigIndex(folds))))
            .mul_small(BigIndex(L));
    row.bound_holds = HugeInt::compare(lv.m, rhs) >= 0;
    row.log2_bound = ledger_log2(lv, folds, L);
    return row;
}

struct ConservativityReport {
    std::vector<double> partial_sums;  // running sums of the power derivative
    std::vector<ConservativityLedgerRow> ledger;
};

inline ConservativityReport conservativity_sums(const ProductMeasure& P, const PowerSpec& spec,
                                                const std::vector<const BitSource*>& paths,
                                                long N, const Window& win,
                                                long budget = kDefaultSweepBudget) {
    ConservativityReport rep;
    rep.partial_sums.reserve(static_cast<std::size_t>(N));
    double acc = 0;
    for (long n = 1; n <= N; ++n) {
        acc += power_rn(P, spec, n, win, paths, budget);
        rep.partial_sums.push_back(acc);
    }
    if (auto* lt = std::get_if<LevelTail>(&P.rule().neg_tail())) {
        if (auto* kv = dynamic_cast<const SchemeTailView*>(lt->view.get())) {
            const int k = static_cast<int>(spec.exponents.size());
            for (const auto& lv : kv->scheme()->levels())
                rep.ledger.push_back(conservativity_bound_check(lv, k, spec.max_abs()));
        }
    }
    return rep;
}

struct QuantileRow {
    long n = 0;
    std::vector<double> deciles;  // 10%..90%, nearest rank
    double median = 0;
};

inline std::vector<QuantileRow> rn_tends_zero_diagnostic(const ProductMeasure& P,
                                                         const std::vector<long>& n_list,
                                                         const Window& win, std::uint64_t seed,
                                                         long count,
                                                         long budget = kDefaultSweepBudget) {
    std::vector<QuantileRow> out;
    for (long n : n_list) {
        const ProductMeasure Pn = P.shifted(BigIndex(n));
        std::vector<double> vals;
        vals.reserve(static_cast<std::size_t>(count));
        for (long i = 0; i < count; ++i) {
            LazyPath w(P, seed, static_cast<std::uint64_t>(i));
            vals.push_back(rn_value(P, Pn, win, w, budget));
        }
        std::sort(vals.begin(), vals.end());
        QuantileRow row;
        row.n = n;
        for (int q = 1; q <= 9; ++q) {
            auto rank = static_cast<std::size_t>(
                std::ceil(q / 10.0 * static_cast<double>(count)));
            if (rank == 0) rank = 1;
            row.deciles.push_back(vals[std::min(vals.size() - 1, rank - 1)]);
        }
        row.median = row.deciles[4];
        out.push_back(row);
    }
    return out;
}

}
