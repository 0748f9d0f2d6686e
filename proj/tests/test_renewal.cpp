#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "nsshift/renewal.hpp"

using namespace nsshift;

TEST_CASE("builtin renewal families") {
    auto lg = log_renewal();
    CHECK(lg(0.0) == 1.0);
    CHECK(lg(1.0) == Catch::Approx(1.0 / std::log(std::exp(1.0) + 1.0)).margin(1e-15));
    // strictly decreasing
    double prev = 1.0;
    for (double t = 0.5; t < 50; t += 0.5) {
        CHECK(lg(t) < prev);
        prev = lg(t);
    }

    auto ge = geometric_renewal(0.5);
    CHECK(ge(0.0) == 1.0);
    CHECK(ge(3.0) == Catch::Approx(0.125).margin(1e-15));
    CHECK_THROWS_AS(geometric_renewal(1.5), Error);
}

TEST_CASE("aperiodicity verdicts") {
    auto seq = RenewalSequence::from_function(log_renewal(), 100);
    auto a = aperiodicity_check(seq, 100);
    CHECK(a.kind == AperiodicityResult::Kind::Aperiodic);
    REQUIRE(!a.witness.empty());
    CHECK(a.witness.front() == 1);  // u_1 > 0 already gives gcd 1

    RenewalSequence even;
    even.u = {1.0, 0.0, 0.5, 0.0, 0.3, 0.0, 0.2};
    auto b = aperiodicity_check(even, 6);
    CHECK(b.kind == AperiodicityResult::Kind::Periodic);
    CHECK(b.period == 2);

    RenewalSequence silent;
    silent.u = {1.0, 0.0, 0.0, 0.0};
    CHECK(aperiodicity_check(silent, 3).kind == AperiodicityResult::Kind::Unknown);
}

TEST_CASE("null recurrence verdicts by tail class") {
    auto rl = null_recurrence_verdict(log_renewal(), 1000);
    CHECK(rl.verdict == SeriesVerdict::Diverges);
    CHECK(rl.terms_vanish);
    CHECK(rl.partial_sums.back() > 100.0);  // sum of 1/log grows fast

    auto rg = null_recurrence_verdict(geometric_renewal(0.5), 100);
    CHECK(rg.verdict == SeriesVerdict::Converges);
    CHECK(rg.partial_sums.back() == Catch::Approx(1.0).margin(1e-12));

    auto tbl = table_renewal({{0.0, 1.0}, {10.0, 0.5}, {100.0, 0.25}});
    auto rc = null_recurrence_verdict(tbl, 50);
    CHECK(rc.verdict == SeriesVerdict::Inconclusive);
}

TEST_CASE("power criterion: partial sums and verdicts") {
    auto rep = pwm_criterion(log_renewal(), {1.0, 2.0, 0.5}, 100000);
    CHECK(rep.verdict == SeriesVerdict::Diverges);
    // partial sums keep growing
    CHECK(rep.partial_sums.back() > rep.partial_sums[rep.partial_sums.size() / 2]);

    // negative times run through |t|
    auto rep2 = pwm_criterion(log_renewal(), {-1.0, 2.0}, 100);
    CHECK(rep2.partial_sums.back() ==
          Catch::Approx(pwm_criterion(log_renewal(), {1.0, 2.0}, 100).partial_sums.back())
              .margin(1e-12));

    // k = 1, t = 1 reduces to the null recurrence sum term by term
    auto a = pwm_criterion(log_renewal(), {1.0}, 500);
    auto b = null_recurrence_verdict(log_renewal(), 500);
    for (std::size_t i = 0; i < 500; ++i)
        REQUIRE(a.partial_sums[i] == b.partial_sums[i]);

    auto geo = pwm_criterion(geometric_renewal(0.5), {1.0, 1.0}, 100);
    CHECK(geo.verdict == SeriesVerdict::Converges);
    CHECK(geo.partial_sums.back() == Catch::Approx(1.0 / 3.0).margin(1e-9));  // sum 4^-n
}

TEST_CASE("interarrival recursion: known values and round trip") {
    // u == 1 everywhere: deterministic unit interarrivals
    RenewalSequence ones;
    ones.u.assign(50, 1.0);
    auto f1 = interarrival_from_renewal(ones, 49);
    CHECK(f1.f[1] == 1.0);
    for (std::size_t m = 2; m < f1.f.size(); ++m) CHECK(f1.f[m] == 0.0);

    // the log family: f_1 = u_1, f_2 = u_2 - u_1^2
    auto seq = RenewalSequence::from_function(log_renewal(), 10000);
    auto f = interarrival_from_renewal(seq, 10000);
    const double u1 = 1.0 / std::log(std::exp(1.0) + 1.0);
    const double u2 = 1.0 / std::log(std::exp(1.0) + 2.0);
    CHECK(f.f[1] == Catch::Approx(u1).margin(1e-15));
    CHECK(f.f[2] == Catch::Approx(u2 - u1 * u1).margin(1e-15));
    // validity over the horizon: no meaningfully negative masses
    for (std::size_t m = 1; m < f.f.size(); ++m) REQUIRE(f.f[m] >= -1e-12);

    // round trip to 1e-10
    auto back = renewal_from_interarrival(f, 10000);
    for (std::size_t n = 0; n < back.u.size(); ++n)
        REQUIRE(std::abs(back.u[n] - seq.u[n]) <= 1e-10);
}

TEST_CASE("invalid renewal sequences are flagged with the offending index") {
    RenewalSequence bad;
    bad.u = {1.0, 0.9, 0.1};  // u_2 < u_1^2 - huge: f_2 = 0.1 - 0.81 < 0
    try {
        interarrival_from_renewal(bad, 2);
        FAIL("expected InvalidRenewalSequence");
    } catch (const InvalidRenewalSequence& e) {
        CHECK(e.offending_index == 2);
    }
}

TEST_CASE("simulation matches the recursion at 4-sigma") {
    // two-point interarrival law: u_1 = .5, u_2 = .75, u_3 = .625
    InterarrivalDist d;
    d.f = {0.0, 0.5, 0.5};
    auto u = renewal_from_interarrival(d, 20);
    CHECK(u.u[1] == 0.5);
    CHECK(u.u[2] == 0.75);
    CHECK(u.u[3] == 0.625);

    const long runs = 100000;
    auto uhat = simulate_renewal(d, 20, 123, runs);
    for (long n = 1; n <= 20; ++n) {
        const double p = u.u[static_cast<std::size_t>(n)];
        const double sigma = std::sqrt(p * (1 - p) / runs);
        REQUIRE(std::abs(uhat[static_cast<std::size_t>(n)] - p) <= 4 * sigma + 1e-9);
    }

    // determinism
    auto uhat2 = simulate_renewal(d, 20, 123, runs);
    CHECK(uhat == uhat2);

    // unit mass at 1: every epoch hit
    InterarrivalDist delta1;
    delta1.f = {0.0, 1.0};
    auto u1 = simulate_renewal(delta1, 10, 5, 100);
    for (long n = 0; n <= 10; ++n) CHECK(u1[static_cast<std::size_t>(n)] == 1.0);
}

TEST_CASE("log-family simulation against the recursion oracle") {
    auto seq = RenewalSequence::from_function(log_renewal(), 1000);
    auto f = interarrival_from_renewal(seq, 1000);
    const long runs = 100000;
    auto uhat = simulate_renewal(f, 1000, 2024, runs);
    long checked = 0;
    for (long n = 1; n <= 1000; n += 97) {
        const double p = seq.u[static_cast<std::size_t>(n)];
        const double sigma = std::sqrt(p * (1 - p) / runs);
        REQUIRE(std::abs(uhat[static_cast<std::size_t>(n)] - p) <= 4 * sigma + 1e-9);
        ++checked;
    }
    CHECK(checked > 5);
}
