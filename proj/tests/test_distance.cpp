#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "nsshift/distance.hpp"
#include "nsshift/fixtures.hpp"

using namespace nsshift;

namespace {

const double kTerm = 0.2111456180001683;  // d((0.9,.1),(0.5,.5))

/// Naive per-index oracle with the same exact accumulation.
ExactDyadicSum naive_d_window(const ProductMeasure& P, const ProductMeasure& Q, long N) {
    ExactDyadicSum s;
    for (long k = -N; k <= N; ++k)
        s.add(factor_distance_term(P.factor_at(BigIndex(k)), Q.factor_at(BigIndex(k))));
    return s;
}

}  // namespace

TEST_CASE("d_N fixed cases") {
    auto fair = fair_measure();
    CHECK(kakutani_distance_truncated(fair, fair, BigIndex(100)).value() == 0.0);
    CHECK(kakutani_distance_truncated(fair, fair, pow2(300)).value() == 0.0);

    auto pert = perturbed_measure();
    CHECK(kakutani_distance_truncated(pert, fair, BigIndex(5)).value() ==
          Catch::Approx(kTerm).margin(1e-15));

    // step vs its shift by 3, window 10: coordinates 0,1,2 mismatch
    auto step = step_measure();
    CHECK(kakutani_distance_truncated(step, step.shifted(BigIndex(3)), BigIndex(10)).value() ==
          Catch::Approx(3 * kTerm).margin(1e-14));
}

TEST_CASE("block sweep equals the naive per-index sum exactly") {
    std::mt19937_64 gen(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        // random contiguous rule: up to 20 blocks around the origin
        std::vector<Block> blocks;
        long lo = -static_cast<long>(gen() % 50) - 1;
        long cursor = lo;
        const int nb = 1 + static_cast<int>(gen() % 20);
        for (int b = 0; b < nb; ++b) {
            long len = 1 + static_cast<long>(gen() % 10);
            blocks.push_back(Block{BigIndex(cursor), BigIndex(cursor + len - 1), Factor(u(gen))});
            cursor += len;
        }
        NegTail tail = (gen() % 2) ? NegTail(ConstTail{Factor(u(gen))})
                                   : NegTail(PeriodicTail{{Factor(u(gen)), Factor(u(gen)),
                                                           Factor(u(gen))}});
        auto rule = std::make_shared<const BlockRule>(std::move(blocks), Factor(u(gen)),
                                                      std::move(tail));
        ProductMeasure P(rule);
        const long n = static_cast<long>(gen() % 201) - 100;
        const long N = 1 + static_cast<long>(gen() % 1000);
        ProductMeasure Q = P.shifted(BigIndex(n));

        auto fast = kakutani_distance_truncated(P, Q, BigIndex(N));
        auto slow = naive_d_window(P, Q, N);
        REQUIRE(fast.exact == slow);
        REQUIRE(fast.value() == slow.to_double());
    }
}

TEST_CASE("monotonicity in N") {
    auto st = staircase_measure();
    auto Q = st.shifted(BigIndex(1));
    double prev_d = -1.0, prev_rho = 2.0;
    for (long N : {1L, 4L, 16L, 64L, 256L}) {
        const double d = kakutani_distance_truncated(st, Q, BigIndex(N)).value();
        const double rho = hellinger_affinity(st, Q, BigIndex(N));
        CHECK(d >= prev_d);
        CHECK(rho <= prev_rho + 1e-15);
        prev_d = d;
        prev_rho = rho;
    }
}

TEST_CASE("affinity fixed cases and symmetry") {
    auto fair = fair_measure();
    auto pert = perturbed_measure();
    CHECK(hellinger_affinity(fair, fair, BigIndex(1000)) == 1.0);
    CHECK(hellinger_affinity(pert, fair, BigIndex(10)) ==
          Catch::Approx(0.8944271909999159).margin(1e-12));

    auto step = step_measure();
    for (long n : {1L, 5L}) {
        const double lhs = hellinger_affinity(step, step.shifted(BigIndex(n)), BigIndex(100));
        const double rhs = std::pow(0.8944271909999159, static_cast<double>(n));
        CHECK(lhs == Catch::Approx(rhs).margin(1e-12));
        CHECK(hellinger_affinity(step.shifted(BigIndex(n)), step, BigIndex(100)) ==
              Catch::Approx(lhs).margin(1e-15));
    }
}

TEST_CASE("proportionality bounds") {
    auto fair = fair_measure();
    auto rep0 = proportionality_check(fair, fair, BigIndex(50));
    CHECK(rep0.d == 0.0);
    CHECK(rep0.minus_log_rho == 0.0);
    CHECK(rep0.c == 1.0);
    CHECK(rep0.holds);

    auto pert = perturbed_measure();
    auto rep1 = proportionality_check(pert, fair, BigIndex(5));
    CHECK(rep1.d == Catch::Approx(0.211146).margin(1e-6));
    CHECK(rep1.minus_log_rho == Catch::Approx(0.111572).margin(1e-6));
    CHECK(rep1.c == Catch::Approx(0.894427).margin(1e-6));
    CHECK(rep1.holds);

    auto step = step_measure();
    auto rep5 = proportionality_check(step, step.shifted(BigIndex(5)), BigIndex(10));
    CHECK(rep5.d == Catch::Approx(1.055728).margin(1e-6));
    CHECK(rep5.minus_log_rho == Catch::Approx(0.557859).margin(1e-6));
    CHECK(rep5.holds);

    // degenerate factor: h = 0 at the clashing coordinate
    auto deg = perturbed_measure(1.0);
    auto degq = ProductMeasure(std::make_shared<const BlockRule>(
        std::vector<Block>{Block{BigIndex(0), BigIndex(0), Factor(0.0)}}, fair_factor(),
        NegTail(ConstTail{fair_factor()})));
    auto repd = proportionality_check(deg, degq, BigIndex(3));
    CHECK(repd.degenerate);
    CHECK(std::isinf(repd.minus_log_rho));
}

TEST_CASE("exact distance: finite certificates") {
    auto fair = fair_measure();
    auto r0 = kakutani_distance_exact(fair, fair);
    REQUIRE(is_finite(r0));
    CHECK(std::get<FiniteDistance>(r0).value == 0.0);
    CHECK(std::get<FiniteDistance>(r0).tail_bound == 0.0);

    auto pert = perturbed_measure();
    auto r1 = kakutani_distance_exact(pert, fair);
    REQUIRE(is_finite(r1));
    CHECK(std::get<FiniteDistance>(r1).value == Catch::Approx(kTerm).margin(1e-15));
    CHECK(std::get<FiniteDistance>(r1).tail_bound == 0.0);

    // step vs its own shift: mismatch lives on finitely many coordinates
    auto step = step_measure();
    for (long n = 1; n <= 64; n *= 2) {
        auto r = kakutani_distance_exact(step, step.shifted(BigIndex(n)));
        REQUIRE(is_finite(r));
        ExactDyadicSum expect;
        expect.add(kTerm, BigIndex(n));
        CHECK(std::get<FiniteDistance>(r).value == expect.to_double());
        CHECK(std::get<FiniteDistance>(r).tail_bound == 0.0);
    }
}

TEST_CASE("exact distance: divergence certificates") {
    auto fair = fair_measure();
    auto step = step_measure();
    auto r = kakutani_distance_exact(step, fair);
    REQUIRE(is_diverges(r));
    CHECK(std::get<DivergesDistance>(r).per_unit == Catch::Approx(kTerm).margin(1e-15));

    // alternating vs its shift by one: every tail coordinate mismatches
    auto alt = alternating_measure();
    auto ra = kakutani_distance_exact(alt, alt.shifted(BigIndex(1)));
    REQUIRE(is_diverges(ra));
    const double per = std::get<DivergesDistance>(ra).per_unit;
    CHECK(per == Catch::Approx(2 * factor_distance_term(Factor(0.3), Factor(0.7))).margin(1e-12));

    // different positive tails
    auto rp = kakutani_distance_exact(fair, step_measure(0.5).shifted(BigIndex(0)));
    REQUIRE(is_finite(rp));  // (0.5 step is just fair)
    auto odd = ProductMeasure(std::make_shared<const BlockRule>(
        std::vector<Block>{}, Factor(0.6), NegTail(ConstTail{fair_factor()})));
    auto rq = kakutani_distance_exact(fair, odd);
    REQUIRE(is_diverges(rq));
}

TEST_CASE("exact distance: staircase self-shift is finite, vs constant diverges") {
    auto st = staircase_measure();
    auto r = kakutani_distance_exact(st, st.shifted(BigIndex(1)));
    REQUIRE(is_finite(r));
    const auto& f = std::get<FiniteDistance>(r);
    CHECK(f.value > 0.1);   // plateaus/ramps near the cover contribute
    CHECK(f.value < 1.0);   // total jump mass is ~0.5
    CHECK(f.tail_bound < 1e-3);

    auto rv = kakutani_distance_exact(st, fair_measure());
    REQUIRE(is_diverges(rv));
}

TEST_CASE("exact distance: level tails") {
    auto kos = level_measure(2);
    for (long n : {1L, 7L, 64L}) {
        auto r = kakutani_distance_exact(kos, kos.shifted(BigIndex(n)));
        REQUIRE(is_finite(r));
        CHECK(std::get<FiniteDistance>(r).tail_bound < 1e-100);
    }
    auto rfair = kakutani_distance_exact(kos, fair_measure());
    REQUIRE(is_finite(rfair));  // the adopted parameters put P ~ fair product
    CHECK(std::get<FiniteDistance>(rfair).value ==
          Catch::Approx(0.0793).epsilon(0.05));

    auto rstep = kakutani_distance_exact(kos, step_measure());
    REQUIRE(is_diverges(rstep));
}

TEST_CASE("divergence and vanishing-affinity certificates coincide") {
    // whenever the full-line distance diverges, the truncated affinity decays
    // toward 0; whenever it is finite, the affinity stays bounded below
    const auto alt = alternating_measure();
    const auto st = staircase_measure();
    struct Case {
        ProductMeasure p, q;
        bool diverges;
    } cases[] = {
        {alt, alt.shifted(BigIndex(1)), true},
        {step_measure(), fair_measure(), true},
        {st, st.shifted(BigIndex(1)), false},
        {perturbed_measure(), fair_measure(), false},
    };
    for (const auto& c : cases) {
        const auto r = kakutani_distance_exact(c.p, c.q);
        REQUIRE(is_diverges(r) == c.diverges);
        const double rho_small = hellinger_affinity(c.p, c.q, BigIndex(64));
        const double rho_big = hellinger_affinity(c.p, c.q, BigIndex(4096));
        if (c.diverges) {
            CHECK(rho_big < rho_small);
            CHECK(rho_big < 0.01);
        } else {
            CHECK(rho_big > 0.2);
        }
    }
}

TEST_CASE("exact distance: opaque tails are undecidable") {
    auto op = ProductMeasure(std::make_shared<const BlockRule>(
        std::vector<Block>{}, fair_factor(), NegTail(OpaqueTail{fair_factor()})));
    auto r = kakutani_distance_exact(op, op.shifted(BigIndex(1)));
    CHECK(std::holds_alternative<UndecidableDistance>(r));
}
