#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "nsshift/fixtures.hpp"
#include "nsshift/measure.hpp"

using namespace nsshift;

TEST_CASE("factor_at on the fixtures") {
    CHECK(fair_measure().factor_at(pow2(997)).p0() == 0.5);  // ~10^300
    CHECK(fair_measure().factor_at(-pow2(997)).p0() == 0.5);

    auto step = step_measure();
    CHECK(step.factor_at(BigIndex(0)).p0() == 0.5);
    CHECK(step.factor_at(BigIndex(-1)).p0() == 0.9);
    CHECK(step.factor_at(BigIndex(-1000000)).p0() == 0.9);

    auto pert = perturbed_measure();
    CHECK(pert.factor_at(BigIndex(0)).p0() == 0.9);
    CHECK(pert.factor_at(BigIndex(1)).p0() == 0.5);
    CHECK(pert.factor_at(BigIndex(-1)).p0() == 0.5);

    auto alt = alternating_measure();
    CHECK(alt.factor_at(BigIndex(-1)).p0() == 0.7);
    CHECK(alt.factor_at(BigIndex(-2)).p0() == 0.3);
    CHECK(alt.factor_at(BigIndex(-3)).p0() == 0.7);
    CHECK(alt.factor_at(BigIndex(-1001)).p0() == 0.7);
    CHECK(alt.factor_at(BigIndex(-1002)).p0() == 0.3);
    CHECK(alt.factor_at(BigIndex(5)).p0() == 0.5);
}

TEST_CASE("shift consistency against brute force") {
    std::mt19937_64 gen(99);
    auto meas = level_measure(2);
    for (int trial = 0; trial < 40; ++trial) {
        const long n = static_cast<long>(gen() % 201) - 100;
        const long k = static_cast<long>(gen() % 2001) - 1000;
        const ProductMeasure shifted = meas.shifted(BigIndex(n));
        REQUIRE(shifted.factor_at(BigIndex(k)) == meas.factor_at(BigIndex(k - n)));
    }
    // composition of shifts
    auto s = meas.shifted(BigIndex(3)).shifted(BigIndex(-8));
    CHECK(s.factor_at(BigIndex(0)) == meas.factor_at(BigIndex(5)));
}

TEST_CASE("staircase tail structure") {
    auto st = staircase_measure();
    // epoch 1 from depth 0: hi, hi, ramp(1 step), lo, lo, ramp(1 step)
    CHECK(st.factor_at(BigIndex(-1)).p0() == 0.7);
    CHECK(st.factor_at(BigIndex(-2)).p0() == 0.7);
    CHECK(st.factor_at(BigIndex(-3)).p0() == 0.5);  // 0.7 - 0.2
    CHECK(st.factor_at(BigIndex(-4)).p0() == 0.3);
    CHECK(st.factor_at(BigIndex(-5)).p0() == 0.3);
    CHECK(st.factor_at(BigIndex(-6)).p0() == Catch::Approx(0.5));
    // epoch 2 starts at depth 6: four coordinates of hi
    CHECK(st.factor_at(BigIndex(-7)).p0() == 0.7);
    CHECK(st.factor_at(BigIndex(-10)).p0() == 0.7);
    CHECK(st.factor_at(BigIndex(-11)).p0() == Catch::Approx(0.6));  // first down step
    // plateaus grow geometrically: both accumulation values recur forever
    bool seen_hi = false, seen_lo = false;
    for (long d = 1000; d < 2100; ++d) {
        const double p = st.factor_at(BigIndex(-d)).p0();
        seen_hi = seen_hi || p == 0.7;
        seen_lo = seen_lo || p == 0.3;
    }
    CHECK(seen_hi);
    CHECK(seen_lo);
}

TEST_CASE("sweep_pair emits maximal aligned segments") {
    auto step = step_measure();
    auto Q = step.shifted(BigIndex(3));
    std::vector<std::pair<long, std::pair<double, double>>> segs;
    sweep_pair(step, Q, BigIndex(-8), BigIndex(8), 1000,
               [&](const BigIndex& count, Factor a, Factor b) {
                   segs.push_back({to_long(count), {a.p0(), b.p0()}});
               });
    // segments: [-8,-1] (0.9,0.9), [0,2] (0.5,0.9), [3,8] (0.5,0.5)
    REQUIRE(segs.size() == 3);
    CHECK(segs[0] == std::make_pair(8L, std::make_pair(0.9, 0.9)));
    CHECK(segs[1] == std::make_pair(3L, std::make_pair(0.5, 0.9)));
    CHECK(segs[2] == std::make_pair(6L, std::make_pair(0.5, 0.5)));
}

TEST_CASE("sweep budget guards pathological windows") {
    auto alt = alternating_measure();
    CHECK_THROWS_AS(sweep_pair(alt, alt.shifted(BigIndex(1)), -BigIndex(100000),
                               BigIndex(100000), 50, [](auto&&...) {}),
                    IterationBudgetExceeded);
}

TEST_CASE("symbol swap flips every factor") {
    for (const auto& m : {step_measure(), alternating_measure(), staircase_measure(),
                          level_measure(2)}) {
        auto sw = swap_symbols(m);
        for (long k = -40; k <= 40; ++k)
            REQUIRE(sw.factor_at(BigIndex(k)).p0() == m.factor_at(BigIndex(k)).p1());
    }
}

TEST_CASE("block rules validate shape") {
    CHECK_THROWS_AS(BlockRule({Block{BigIndex(0), BigIndex(-1), fair_factor()}}, fair_factor(),
                              NegTail(ConstTail{fair_factor()})),
                    BadMeasureSpec);
    CHECK_THROWS_AS(BlockRule({Block{BigIndex(0), BigIndex(1), fair_factor()},
                               Block{BigIndex(3), BigIndex(4), fair_factor()}},
                              fair_factor(), NegTail(ConstTail{fair_factor()})),
                    BadMeasureSpec);
}
