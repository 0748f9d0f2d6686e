#include <catch2/catch_amalgamated.hpp>

#include "nsshift/interval.hpp"

using namespace nsshift;

TEST_CASE("sign_ln2_dyadic: screened exact cases") {
    CHECK(sign_ln2_dyadic(BigIndex(0), {{BigIndex(0), BigIndex(0)}}) == 0);
    CHECK(sign_ln2_dyadic(BigIndex(3), {{BigIndex(0), BigIndex(0)}}) == 1);
    CHECK(sign_ln2_dyadic(BigIndex(-3), {}) == -1);
    // pure dyadic: 5*2^-3 - 10*2^-4 = 0
    CHECK(sign_ln2_dyadic(BigIndex(0), {{BigIndex(5), BigIndex(3)}, {BigIndex(-10), BigIndex(4)}}) == 0);
}

TEST_CASE("sign_ln2_dyadic: mixed expressions around ln2") {
    // ln2 < 1
    CHECK(sign_ln2_dyadic(BigIndex(1), {{BigIndex(-1), BigIndex(0)}}) == -1);
    // ln2 > 1/2
    CHECK(sign_ln2_dyadic(BigIndex(1), {{BigIndex(-1), BigIndex(1)}}) == 1);
    // 2^9 ln2 vs 355: 354.891... < 355
    CHECK(sign_ln2_dyadic(BigIndex(512), {{BigIndex(-355), BigIndex(0)}}) == -1);
    CHECK(sign_ln2_dyadic(BigIndex(512), {{BigIndex(-354), BigIndex(0)}}) == 1);
    // a tight one: 2^60 ln2 vs its ceiling
    BigIndex c = ceil_pow2_ln2(60);
    CHECK(sign_ln2_dyadic(pow2(60), {{-c, BigIndex(0)}}) == -1);
    CHECK(sign_ln2_dyadic(pow2(60), {{-(c - 1), BigIndex(0)}}) == 1);
}

TEST_CASE("ceil_pow2_ln2 known values") {
    CHECK(ceil_pow2_ln2(0) == 1);   // ceil(0.693...)
    CHECK(ceil_pow2_ln2(1) == 2);   // ceil(1.386...)
    CHECK(ceil_pow2_ln2(9) == 355); // ceil(354.891...)
    // stability at moderately deep scales: value has exactly j bits
    BigIndex v = ceil_pow2_ln2(741);
    CHECK(floor_log2(v) == 740);
}

TEST_CASE("interval arithmetic basics") {
    Ival a = Ival::exact_bigint(BigIndex(3), 128);
    Ival b = Ival::ln2(128);
    a.mul_nonneg(b);
    CHECK(a.lo.to_double() < 3 * 0.6931471805599454);
    CHECK(a.hi.to_double() > 3 * 0.6931471805599452);
    a.sub(a);  // self-subtraction must contain zero
    CHECK(a.contains_zero());
}
