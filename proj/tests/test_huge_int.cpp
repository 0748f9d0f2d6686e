#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "nsshift/huge_int.hpp"

using namespace nsshift;

namespace {

HugeInt h(long v) { return HugeInt(BigIndex(v)); }

}  // namespace

TEST_CASE("explicit arithmetic agrees with cpp_int") {
    std::mt19937_64 gen(3);
    for (int i = 0; i < 200; ++i) {
        BigIndex a = BigIndex(gen() % 100000);
        BigIndex b = BigIndex(gen() % 100000) + 1;
        HugeInt ha(a), hb(b);
        CHECK(HugeInt::add(ha, hb).to_bigindex() == a + b);
        CHECK(HugeInt::mul(ha, hb).to_bigindex() == a * b);
        CHECK(HugeInt::compare(ha, hb) == (a == b ? 0 : (a < b ? -1 : 1)));
        if (a > 0) CHECK(HugeInt(a).fl2().to_bigindex() == floor_log2(a));
    }
}

TEST_CASE("moderate powers fold to explicit form") {
    // 724*(2 + 2^724) = m_2 of the construction: still explicit
    HugeInt inner = HugeInt::add(h(2), HugeInt::pow2_of(h(724)));
    HugeInt m2 = inner.mul_small(BigIndex(724));
    REQUIRE(m2.is_explicit());
    CHECK(m2.to_bigindex() == 724 * (BigIndex(2) + pow2(724)));
    CHECK(m2.fl2().to_bigindex() == floor_log2(724 * (BigIndex(2) + pow2(724))));
}

TEST_CASE("symbolic powers: fl2 and comparisons by dominance") {
    // x = 3*2^(2^100) + 7; fl2(x) = 2^100 + 1
    HugeInt e = HugeInt::pow2_of(h(100));  // 2^100, explicit
    HugeInt x = HugeInt::add(HugeInt(BigIndex(3)).mul_pow2(e), h(7));
    REQUIRE(!x.is_explicit());
    HugeInt f = x.fl2();
    REQUIRE(f.is_explicit());
    CHECK(f.to_bigindex() == pow2(100) + 1);

    // 3*2^(2^100) + 7  >  2^(2^100 + 1)  (since 3 > 2)
    HugeInt y = HugeInt::pow2_of(HugeInt(pow2(100) + 1));
    CHECK(HugeInt::compare(x, y) > 0);
    // and < 2^(2^100 + 2)
    HugeInt z = HugeInt::pow2_of(HugeInt(pow2(100) + 2));
    CHECK(HugeInt::compare(x, z) < 0);
}

TEST_CASE("ceil(2^j ln2) terms: explicit and symbolic agree on small j") {
    HugeInt c9 = HugeInt::ceil_ln2(h(9));
    REQUIRE(c9.is_explicit());
    CHECK(c9.to_bigindex() == 355);

    // force the symbolic representation and check fl2 = j - 1
    HugeInt cj = HugeInt::ceil_ln2(h(500), /*explicit_bits_cap=*/10);
    REQUIRE(!cj.is_explicit());
    CHECK(cj.fl2().to_bigindex() == 499);
    // against the materialized value
    HugeInt cm = HugeInt::ceil_ln2(h(500));
    REQUIRE(cm.is_explicit());
    CHECK(HugeInt::compare(cj, cm) == 0);
    CHECK(HugeInt::compare(cj, HugeInt(cm.to_bigindex() - 1)) > 0);
    CHECK(HugeInt::compare(cj, HugeInt(cm.to_bigindex() + 1)) < 0);
}

TEST_CASE("structural subtraction") {
    HugeInt e = HugeInt::pow2_of(h(90));
    HugeInt n4ish = HugeInt::add(HugeInt(BigIndex(5)).mul_pow2(e), h(40));
    auto d = HugeInt::diff_small(n4ish, HugeInt::add(HugeInt(BigIndex(5)).mul_pow2(e), h(12)));
    REQUIRE(d.has_value());
    CHECK(*d == 28);

    auto d2 = HugeInt::diff_small(HugeInt(BigIndex(5)).mul_pow2(e), n4ish);
    REQUIRE(d2.has_value());  // resolved through the reversed embedding
    CHECK(*d2 == -40);
}

TEST_CASE("deep towers compare") {
    // a = 2^(3*2^800), b = 2^(2^801): 3*2^800 > 2^801 = 2*2^800
    HugeInt ea = HugeInt(BigIndex(3)).mul_pow2(HugeInt::pow2_of(h(800)));
    // ^ that's 3*2^(2^800)... build exponents as values instead:
    HugeInt exp_a = HugeInt::pow2_of(h(800)).mul_small(BigIndex(3));
    HugeInt exp_b = HugeInt::pow2_of(h(801));
    HugeInt a = HugeInt::pow2_of(exp_a);
    HugeInt b = HugeInt::pow2_of(exp_b);
    CHECK(HugeInt::compare(exp_a, exp_b) > 0);
    CHECK(HugeInt::compare(a, b) > 0);
    CHECK(HugeInt::compare(a, a) == 0);
}

TEST_CASE("mixed ceil and power terms: the level-4 shape") {
    // k ~ 3*N3 + fl2(3*N3) + 5 with N3 a 744-bit explicit value
    BigIndex n3 = 355 * pow2(735) + ceil_pow2_ln2(741);
    BigIndex m2v = 724 * (BigIndex(2) + pow2(724));
    BigIndex N3 = m2v + 362 + n3;
    BigIndex k4 = 3 * N3 + floor_log2(3 * N3) + 5;

    // n4 = 355*2^(k4-2) + n3*2^(k4-734) + ceil(2^(k4+4) ln 2)
    HugeInt n4 = HugeInt::add(
        HugeInt::add(HugeInt(BigIndex(355)).mul_pow2(HugeInt(k4 - 2)),
                     HugeInt(n3).mul_pow2(HugeInt(k4 - 734))),
        HugeInt::ceil_ln2(HugeInt(k4 + 4)));
    REQUIRE(!n4.is_explicit());
    HugeInt f = n4.fl2();
    REQUIRE(f.is_explicit());
    // n4 * 2^-k4 ~ 88.75 + 798.7 + 11.09 ~ 898.6, so fl2 = k4 + 9
    CHECK(f.to_bigindex() == k4 + 9);
}
