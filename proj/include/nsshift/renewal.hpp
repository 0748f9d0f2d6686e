#pragma once

// Markov renewal-function diagnostics: aperiodicity, null recurrence, the
// power-product divergence criterion, the renewal <-> interarrival recursion
// and renewal-process simulation. Numerical partial sums never decide a
// limit on their own; convergence verdicts come from the declared analytic
// tail class, or stay Inconclusive.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "nsshift/errors.hpp"
#include "nsshift/rng.hpp"

namespace nsshift {

enum class TailClass {
    LogPower,  // p(t) ~ 1/(log t)^c: series and all finite products diverge
    Summable,  // sum p(n) converges
    Custom,    // no verdict beyond partial sums
};

struct RenewalFunction {
    std::string name;
    std::function<double(double)> eval;  // [0,inf) -> [0,1], eval(0) = 1
    TailClass tail = TailClass::Custom;

    double operator()(double t) const {
        const double v = eval(t);
        if (!(v >= 0.0 && v <= 1.0))
            throw Error("renewal function left [0,1] at t=" + std::to_string(t));
        return v;
    }
};

/// p(t) = 1/log(e+t)
inline RenewalFunction log_renewal() {
    return {"log", [](double t) { return 1.0 / std::log(std::exp(1.0) + t); },
            TailClass::LogPower};
}

/// p(t) = q^t
inline RenewalFunction geometric_renewal(double q) {
    if (!(q > 0.0 && q < 1.0)) throw Error("geometric renewal needs q in (0,1)");
    return {"geom:" + std::to_string(q), [q](double t) { return std::pow(q, t); },
            TailClass::Summable};
}

/// Piecewise-linear interpolation of (t, value) samples; Custom tail.
inline RenewalFunction table_renewal(std::vector<std::pair<double, double>> pts,
                                     std::string name = "table") {
    if (pts.empty()) throw Error("table renewal needs at least one point");
    std::sort(pts.begin(), pts.end());
    if (pts.front().first > 0.0) pts.insert(pts.begin(), {0.0, 1.0});
    return {std::move(name),
            [pts](double t) {
                if (t <= pts.front().first) return pts.front().second;
                if (t >= pts.back().first) return pts.back().second;
                auto it = std::lower_bound(pts.begin(), pts.end(), std::make_pair(t, -1.0));
                const auto [t1, v1] = *it;
                const auto [t0, v0] = *(it - 1);
                const double w = (t - t0) / (t1 - t0);
                return v0 + w * (v1 - v0);
            },
            TailClass::Custom};
}

struct RenewalSequence {
    std::vector<double> u;  // u[0] = 1

    static RenewalSequence from_function(const RenewalFunction& p, long N) {
        RenewalSequence s;
        s.u.resize(static_cast<std::size_t>(N) + 1);
        for (long n = 0; n <= N; ++n) s.u[static_cast<std::size_t>(n)] = p(static_cast<double>(n));
        if (s.u[0] != 1.0) throw Error("renewal sequence must start at u_0 = 1");
        return s;
    }
};

struct InterarrivalDist {
    std::vector<double> f;  // f[0] unused, f[m] for m >= 1
};

// ---- aperiodicity -------------------------------------------------------------

struct AperiodicityResult {
    enum class Kind { Aperiodic, Periodic, Unknown } kind;
    long period = 0;                 // for Periodic
    std::vector<long> witness;      // minimal support prefix reaching gcd 1
};

inline AperiodicityResult aperiodicity_check(const RenewalSequence& seq, long horizon) {
    if (horizon < 1) throw Error("aperiodicity_check: horizon must be >= 1");
    horizon = std::min<long>(horizon, static_cast<long>(seq.u.size()) - 1);
    long g = 0;
    std::vector<long> support;
    for (long n = 1; n <= horizon; ++n) {
        if (seq.u[static_cast<std::size_t>(n)] > 0.0) {
            const long g2 = std::gcd(g, n);
            if (g2 != g) support.push_back(n);
            g = g2;
            if (g == 1) return {AperiodicityResult::Kind::Aperiodic, 0, support};
        }
    }
    if (g == 0) return {AperiodicityResult::Kind::Unknown, 0, {}};
    return {AperiodicityResult::Kind::Periodic, g, support};
}

// ---- convergence verdicts -----------------------------------------------------

enum class SeriesVerdict { Diverges, Converges, Inconclusive };

inline const char* verdict_name(SeriesVerdict v) {
    switch (v) {
        case SeriesVerdict::Diverges: return "Diverges";
        case SeriesVerdict::Converges: return "Converges";
        default: return "Inconclusive";
    }
}

struct SeriesReport {
    SeriesVerdict verdict = SeriesVerdict::Inconclusive;
    std::vector<double> partial_sums;
    double last_term = 0;
    bool terms_vanish = false;
};

/// sum p(n) = inf together with p(n) -> 0: null recurrence of the chain.
inline SeriesReport null_recurrence_verdict(const RenewalFunction& p, long N) {
    if (N < 1) throw Error("null_recurrence_verdict: N must be >= 1");
    SeriesReport rep;
    rep.partial_sums.reserve(static_cast<std::size_t>(N));
    double acc = 0;
    for (long n = 1; n <= N; ++n) {
        rep.last_term = p(static_cast<double>(n));
        acc += rep.last_term;
        rep.partial_sums.push_back(acc);
    }
    switch (p.tail) {
        case TailClass::LogPower:
            rep.verdict = SeriesVerdict::Diverges;  // integral comparison with 1/(log x)^c
            rep.terms_vanish = true;
            break;
        case TailClass::Summable:
            rep.verdict = SeriesVerdict::Converges;
            rep.terms_vanish = true;
            break;
        default:
            rep.verdict = SeriesVerdict::Inconclusive;
            rep.terms_vanish = rep.last_term < 1e-6;
    }
    return rep;
}

/// sum_n prod_j p(n*|t_j|): the power-product criterion. For LogPower tails
/// the product behaves like 1/(log n)^k, so the series diverges for every
/// finite k and all positive times.
inline SeriesReport pwm_criterion(const RenewalFunction& p, std::vector<double> times, long N) {
    if (times.empty()) throw Error("pwm_criterion: need at least one time");
    if (N < 1) throw Error("pwm_criterion: N must be >= 1");
    for (auto& t : times) {
        t = std::abs(t);  // negative times act through their absolute value
        if (t == 0.0) throw Error("pwm_criterion: times must be nonzero");
    }
    SeriesReport rep;
    rep.partial_sums.reserve(static_cast<std::size_t>(N));
    double acc = 0;
    for (long n = 1; n <= N; ++n) {
        double term = 1.0;
        for (double t : times) term *= p(static_cast<double>(n) * t);
        rep.last_term = term;
        acc += term;
        rep.partial_sums.push_back(acc);
    }
    switch (p.tail) {
        case TailClass::LogPower:
            rep.verdict = SeriesVerdict::Diverges;
            rep.terms_vanish = true;
            break;
        case TailClass::Summable:
            rep.verdict = SeriesVerdict::Converges;
            rep.terms_vanish = true;
            break;
        default:
            rep.verdict = SeriesVerdict::Inconclusive;
            rep.terms_vanish = rep.last_term < 1e-6;
    }
    return rep;
}

// ---- renewal <-> interarrival recursion ----------------------------------------

/// u_n = sum_{m=1..n} f_m u_{n-m}; inverted for f. Meaningfully negative f_n
/// invalidates the input as a renewal sequence.
inline InterarrivalDist interarrival_from_renewal(const RenewalSequence& seq, long N,
                                                  double tolerance = 1e-12) {
    if (seq.u.empty() || seq.u[0] != 1.0)
        throw Error("interarrival_from_renewal: u_0 must equal 1");
    N = std::min<long>(N, static_cast<long>(seq.u.size()) - 1);
    InterarrivalDist d;
    d.f.assign(static_cast<std::size_t>(N) + 1, 0.0);
    for (long n = 1; n <= N; ++n) {
        double conv = 0;
        for (long m = 1; m < n; ++m)
            conv += d.f[static_cast<std::size_t>(m)] * seq.u[static_cast<std::size_t>(n - m)];
        const double fn = seq.u[static_cast<std::size_t>(n)] - conv;
        if (fn < -tolerance)
            throw InvalidRenewalSequence(
                "interarrival mass f_" + std::to_string(n) + " = " + std::to_string(fn) +
                    " below -tolerance: not a renewal sequence",
                static_cast<int>(n));
        d.f[static_cast<std::size_t>(n)] = fn;
    }
    return d;
}

inline RenewalSequence renewal_from_interarrival(const InterarrivalDist& d, long N) {
    RenewalSequence s;
    s.u.assign(static_cast<std::size_t>(N) + 1, 0.0);
    s.u[0] = 1.0;
    const long M = static_cast<long>(d.f.size()) - 1;
    for (long n = 1; n <= N; ++n) {
        double acc = 0;
        for (long m = 1; m <= std::min(n, M); ++m)
            acc += d.f[static_cast<std::size_t>(m)] * s.u[static_cast<std::size_t>(n - m)];
        s.u[static_cast<std::size_t>(n)] = acc;
    }
    return s;
}

// ---- simulation ----------------------------------------------------------------

/// Renewal epochs with interarrival law f (mass beyond the horizon = no
/// return); returns the empirical u_n over the given number of runs.
inline std::vector<double> simulate_renewal(const InterarrivalDist& d, long horizon,
                                            std::uint64_t seed, long runs) {
    if (horizon < 1 || runs < 1) throw Error("simulate_renewal: need horizon, runs >= 1");
    const long M = static_cast<long>(d.f.size()) - 1;
    double total = 0;
    std::vector<double> cdf(d.f.size(), 0.0);
    for (long m = 1; m <= M; ++m) {
        if (d.f[static_cast<std::size_t>(m)] < 0)
            throw InvalidRenewalSequence("negative interarrival mass", static_cast<int>(m));
        total += d.f[static_cast<std::size_t>(m)];
        cdf[static_cast<std::size_t>(m)] = total;
    }
    if (total > 1.0 + 1e-9)
        throw Error("simulate_renewal: interarrival masses exceed 1");

    std::vector<long> hits(static_cast<std::size_t>(horizon) + 1, 0);
    for (long r = 0; r < runs; ++r) {
        long t = 0;
        std::uint64_t step = 0;
        while (t <= horizon) {
            if (t > 0) ++hits[static_cast<std::size_t>(t)];
            const double u = uniform01(seed, static_cast<std::uint64_t>(r), BigIndex(step++));
            if (u >= total) break;  // no further return
            const auto it = std::lower_bound(cdf.begin() + 1, cdf.end(), u);
            t += static_cast<long>(it - cdf.begin());
        }
    }
    std::vector<double> uhat(static_cast<std::size_t>(horizon) + 1, 0.0);
    uhat[0] = 1.0;
    for (long n = 1; n <= horizon; ++n)
        uhat[static_cast<std::size_t>(n)] =
            static_cast<double>(hits[static_cast<std::size_t>(n)]) / static_cast<double>(runs);
    return uhat;
}

}
