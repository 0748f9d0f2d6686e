#include <catch2/catch_amalgamated.hpp>

#include "nsshift/construction.hpp"
#include "nsshift/interval.hpp"

using namespace nsshift;

TEST_CASE("base level is exactly the decreed one") {
    auto ls = build_levels(1);
    REQUIRE(ls.size() == 1);
    const auto& l1 = ls[0];
    CHECK(l1.t == 1);
    CHECK(l1.n.to_bigindex() == 2);
    CHECK(l1.m.to_bigindex() == 4);
    CHECK(l1.N.to_bigindex() == 3);
    CHECK(l1.M.to_bigindex() == 7);
    CHECK(l1.M_prev.to_bigindex() == 1);
    CHECK(l1.lambda->compare(ScaledExponent::pow2(BigIndex(1))) == 0);
    CHECK(l1.p0 == 2.0 / 3.0);
}

TEST_CASE("level 2 derived values against independent oracles") {
    auto ls = build_levels(2);
    const auto& l2 = ls[1];

    // k2 = floor(log2(7*4)) + 1 = 5, evaluated directly
    CHECK(l2.k.to_bigindex() == floor_log2(BigIndex(28)) + 1);
    CHECK(l2.k.to_bigindex() == 5);
    CHECK(l2.lambda->compare(ScaledExponent::exp_dyadic(BigIndex(1), BigIndex(5))) == 0);

    // brute force max{a^2 : a in A_1} over all five elements 2^x, |x| <= 2
    ScaledExponent best = ScaledExponent::pow2(BigIndex(-2)).square();
    for (long x = -1; x <= 2; ++x) {
        ScaledExponent cand = ScaledExponent::pow2(BigIndex(x)).square();
        if (cand > best) best = cand;
    }
    CHECK(best.compare(ScaledExponent::pow2(BigIndex(4))) == 0);
    CHECK(a_max({ls[0]}).square().compare(best) == 0);

    // n2 = ceil(128 * ln 16) = ceil(2^9 ln 2) = 355 by high-precision interval
    CHECK(ceil_pow2_ln2(9) == 355);
    CHECK(l2.n.to_bigindex() == 355);
    CHECK(choose_n({ls[0]}, *l2.lambda) == 355);

    CHECK(l2.N.to_bigindex() == 362);
    CHECK(l2.m.to_bigindex() == 2 * BigIndex(362) * (BigIndex(2) + pow2(724)));
    CHECK(l2.M.to_bigindex() == 362 + 2 * BigIndex(362) * (BigIndex(2) + pow2(724)));
}

TEST_CASE("choose_n conventions") {
    // lambda = 2, max A = 4: minimal n with 2^(n/4) >= 16 is n = 16 (equality)
    auto l1only = build_levels(1);
    CHECK(choose_n(l1only, ScaledExponent::pow2(BigIndex(1))) == 16);
    CHECK(choose_n(l1only, *build_levels(2)[1].lambda) == 355);
}

TEST_CASE("level 3 stays explicit, level 4 goes symbolic") {
    auto ls = build_levels(4);
    const auto& l3 = ls[2];
    const auto& l4 = ls[3];

    // k3 = floor(log2(M2)) + 3 + 1
    CHECK(l3.k.to_bigindex() == floor_log2(ls[1].M.to_bigindex()) + 4);
    CHECK(l3.k.to_bigindex() == 737);
    // n3 = 355*2^735 + ceil(2^741 ln 2), derived independently
    const BigIndex n3_oracle = BigIndex(355) * pow2(735) + ceil_pow2_ln2(741);
    REQUIRE(l3.n.is_explicit());
    CHECK(l3.n.to_bigindex() == n3_oracle);
    REQUIRE(l3.N.is_explicit());
    CHECK(!l3.m.is_explicit());
    CHECK(!l3.M.is_explicit());

    REQUIRE(l4.k.is_explicit());
    CHECK(l4.k.to_bigindex() ==
          3 * l3.N.to_bigindex() + floor_log2(3 * l3.N.to_bigindex()) + 5);
    CHECK(!l4.n.is_explicit());
    CHECK(!l4.N.is_explicit());
}

TEST_CASE("constraint suite passes for t <= 4") {
    auto ls = build_levels(4);
    for (const auto& lv : ls) {
        INFO("level " << lv.t);
        CHECK(verify_lambda_constraint(lv));
    }
    for (const auto& rep : verify_growth(ls)) {
        INFO("level " << rep.t << " witness " << rep.witness);
        CHECK(rep.pass);
    }
    for (int t = 2; t <= 4; ++t) {
        auto rep = verify_n_minimality(ls, t);
        INFO("level " << t << " method " << rep.method);
        CHECK(rep.holds_at_n);
        CHECK(rep.fails_below);
    }
    // deterministic rebuild is identical
    auto ls2 = build_levels(4);
    for (int t = 1; t <= 4; ++t) {
        CHECK(HugeInt::compare(ls[t - 1].n, ls2[t - 1].n) == 0);
        CHECK(HugeInt::compare(ls[t - 1].M, ls2[t - 1].M) == 0);
    }
}

TEST_CASE("dyadic compatibility lambda_u = lambda_t^(2^(k_t-k_u))") {
    auto ls = build_levels(3);
    const auto& l2 = ls[1];
    const auto& l3 = ls[2];
    const BigIndex shift = l3.k.to_bigindex() - l2.k.to_bigindex();
    ScaledExponent rhs = l3.lambda->pow(pow2(static_cast<unsigned long>(to_long(shift))));
    CHECK(l2.lambda->compare(rhs) == 0);
}

TEST_CASE("corrupted m fails the growth suite with a witness") {
    auto ls = build_levels(2);
    // halve m_2: breaks the defining identity
    ls[1].m = HugeInt(ls[1].m.to_bigindex() / 2);
    auto reps = verify_growth(ls);
    CHECK(reps[0].pass);
    CHECK(!reps[1].pass);
    CHECK(!reps[1].witness.empty());
}

TEST_CASE("lambda strictly decreasing via k strictly increasing") {
    auto ls = build_levels(4);
    CHECK(ls[1].lambda->compare(*ls[0].lambda) < 0);
    for (std::size_t i = 2; i < ls.size(); ++i)
        CHECK(HugeInt::compare(ls[i].k, ls[i - 1].k) > 0);
}

TEST_CASE("emitted measure block layout") {
    auto scheme = std::make_shared<const LevelScheme>(2);
    ProductMeasure P = measure_from_levels(scheme);

    // level-1 lambda block {-2,-1} at (2/3, 1/3); level-1 fair block {-6..-3}
    CHECK(P.factor_at(BigIndex(-1)).p0() == 2.0 / 3.0);
    CHECK(P.factor_at(BigIndex(-2)).p0() == 2.0 / 3.0);
    CHECK(P.factor_at(BigIndex(-3)).p0() == 0.5);
    CHECK(P.factor_at(BigIndex(-6)).p0() == 0.5);

    // level-2 lambda block [-361, -7]
    const double p2 = build_levels(2)[1].p0;
    CHECK(p2 == Catch::Approx(0.5078118).epsilon(1e-6));
    CHECK(P.factor_at(BigIndex(-7)).p0() == p2);
    CHECK(P.factor_at(BigIndex(-361)).p0() == p2);
    CHECK(P.factor_at(BigIndex(-362)).p0() == 0.5);

    // positive side fair, also far out
    CHECK(P.factor_at(BigIndex(5)).p0() == 0.5);
    CHECK(P.factor_at(pow2(300)).p0() == 0.5);

    // deep negative coordinates resolve through the tail: level-2 fair block
    // runs down to -M2+1, then the level-3 lambda block (collapsed to 1/2
    // in double) and so on; every index resolves
    const BigIndex M2 = build_levels(2)[1].M.to_bigindex();
    CHECK(P.factor_at(-M2 + 1).p0() == 0.5);
    CHECK(P.factor_at(-M2).p0() == 0.5);
    CHECK(P.factor_at(-M2 - pow2(200)).p0() == 0.5);

    // every index in a window resolves to one of the expected runs
    BigIndex k(-400);
    int segments = 0;
    while (k <= -1) {
        BigIndex e = P.run_end(k, BigIndex(-1));
        CHECK(e >= k);
        k = e + 1;
        ++segments;
    }
    CHECK(segments == 4);  // [-400,-362] fair2, [-361,-7] l2, [-6,-3] fair1, [-2,-1] l1
}

TEST_CASE("tail view certificates are positive and tiny") {
    auto scheme = std::make_shared<const LevelScheme>(2);
    ProductMeasure P = measure_from_levels(scheme);
    const auto& tail = std::get<LevelTail>(P.rule().neg_tail());
    const double sm = tail.view->shift_mass_bound(BigIndex(64), tail.view->first_tail_level());
    CHECK(sm > 0.0);
    CHECK(sm < 1e-200);
    const double lm = tail.view->limit_mass_bound(tail.view->first_tail_level());
    CHECK(lm > 0.0);
    CHECK(lm < 1e-200);
    CHECK(tail.view->validate_limit(Factor(0.5)));
    CHECK(!tail.view->validate_limit(Factor(0.4)));
}

TEST_CASE("level 5 builds and verifies on fully symbolic parameters") {
    auto ls = build_levels(5);
    CHECK(!ls[4].k.is_explicit());
    CHECK(!ls[4].n.is_explicit());
    CHECK(verify_lambda_constraint(ls[4]));
    for (const auto& rep : verify_growth(ls)) CHECK(rep.pass);
    auto mr = verify_n_minimality(ls, 5);
    CHECK(mr.holds_at_n);
    CHECK(mr.fails_below);
    CHECK(mr.method == "structural");
}

TEST_CASE("single-level build still resolves deep coordinates") {
    auto P = level_measure(1);
    // the scheme extends itself so every machine-representable index resolves
    CHECK(P.factor_at(BigIndex(-1)).p0() == 2.0 / 3.0);
    CHECK(P.factor_at(BigIndex(-7)).p0() == build_levels(2)[1].p0);  // level-2 block
    CHECK(P.factor_at(-pow2(400)).p0() == 0.5);
    // and it is the same measure as deeper builds
    auto P2 = level_measure(3);
    for (long k = -500; k <= 10; k += 7)
        CHECK(P.factor_at(BigIndex(k)) == P2.factor_at(BigIndex(k)));
}

TEST_CASE("epsilon policy parsing") {
    CHECK(EpsilonPolicy::parse("dyadic:2^-t").a == 1);
    CHECK(EpsilonPolicy::parse("dyadic:2^-3t").a == 3);
    CHECK_THROWS_AS(EpsilonPolicy::parse("harmonic"), BadMeasureSpec);
    // a faster-shrinking eps still builds and passes constraints
    auto ls = build_levels(3, EpsilonPolicy{2, 0});
    CHECK(ls[1].k.to_bigindex() == floor_log2(BigIndex(7 * 16)) + 1);
    for (const auto& rep : verify_growth(ls)) CHECK(rep.pass);
}
