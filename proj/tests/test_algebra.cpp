/**
 * @file test_algebra.cpp
 * @brief Unit tests for field arithmetic, randomness and dense matrices.
 */
#include <cmath>
#include <map>

#include "doctest.h"
#include "kronscale/algebra.hpp"

using namespace kronscale;

namespace {

/// Extended-Euclid inverse modulo p (independent of the library's Fermat inverse).
std::uint64_t euclid_inverse(std::uint64_t a, std::uint64_t p) {
    __int128 t = 0, nt = 1, r = p, nr = a;
    while (nr != 0) {
        __int128 q = r / nr;
        __int128 tmp = t - q * nt;
        t = nt;
        nt = tmp;
        tmp = r - q * nr;
        r = nr;
        nr = tmp;
    }
    if (t < 0) t += p;
    return static_cast<std::uint64_t>(t);
}

/// Schoolbook GF(2)[x] product reduced bit by bit (independent of the fast path).
std::uint64_t gf2_reference_mul(std::uint64_t a, std::uint64_t b, unsigned w, std::uint64_t low) {
    std::uint64_t r = 0;
    for (int i = static_cast<int>(w) - 1; i >= 0; --i) {
        bool top = (r >> (w - 1)) & 1;
        r = (w == 64) ? (r << 1) : ((r << 1) & ((std::uint64_t{1} << w) - 1));
        if (top) r ^= low;
        if ((b >> i) & 1) r ^= a;
    }
    return r;
}

std::vector<FieldSpec> all_specs() {
    return {FieldSpec::prime(7), FieldSpec::prime(1000000007), FieldSpec::default_prime(),
            FieldSpec::prime((std::uint64_t{1} << 62) - 57), FieldSpec::gf2(8), FieldSpec::gf2(16),
            FieldSpec::gf2(32), FieldSpec::gf2(64)};
}

}  // namespace

TEST_CASE("field spec grammar") {
    CHECK(FieldSpec::parse("p=7").modulus == 7);
    CHECK(FieldSpec::parse("gf2 w=16").width == 16);
    CHECK(FieldSpec::parse("p=2305843009213693951") == FieldSpec::default_prime());
    CHECK(FieldSpec::default_prime().to_string() == "p=2305843009213693951");
    CHECK(FieldSpec::gf2(64).to_string() == "gf2 w=64");
    CHECK_THROWS_AS(FieldSpec::parse("p=8"), InvalidField);
    CHECK_THROWS_AS(FieldSpec::parse("gf2 w=12"), InvalidField);
    CHECK_THROWS_AS(FieldSpec::parse("q=5"), InvalidField);
    CHECK_THROWS_AS(FieldSpec::prime(std::uint64_t{1} << 62), InvalidField);
}

TEST_CASE("primality") {
    CHECK(is_prime_u64(2));
    CHECK(is_prime_u64(kDefaultPrime));
    CHECK_FALSE(is_prime_u64(1));
    CHECK_FALSE(is_prime_u64(561));  // Carmichael
    CHECK_FALSE(is_prime_u64(3215031751ULL));
    int count = 0;
    for (std::uint64_t n = 0; n < 1000; ++n) count += is_prime_u64(n);
    CHECK(count == 168);
}

TEST_CASE("field_arith examples") {
    FieldSpec z7 = FieldSpec::prime(7);
    CHECK(field_arith(z7, FieldOp::Mul, {z7, 3}, {z7, 5}).value == 1);
    FieldSpec g8 = FieldSpec::gf2(8);
    CHECK(field_arith(g8, FieldOp::Add, {g8, 0xA7}, {g8, 0xA7}).value == 0);
    CHECK_THROWS_AS(field_arith(z7, FieldOp::Inv, {z7, 0}, {z7, 0}), DivisionByZero);
    CHECK_THROWS_AS(field_arith(z7, FieldOp::Add, {z7, 1}, {g8, 1}), FieldMismatch);
    CHECK_THROWS_AS(field_arith(z7, FieldOp::Add, {g8, 1}, {z7, 1}), FieldMismatch);
    CHECK(field_arith(z7, FieldOp::Pow, {z7, 3}, {z7, 6}).value == 1);
    CHECK(field_arith(z7, FieldOp::Sub, {z7, 2}, {z7, 5}).value == 4);
}

TEST_CASE("prime inverses match extended Euclid") {
    Rng rng(11);
    for (auto spec : {FieldSpec::prime(1000000007), FieldSpec::default_prime()}) {
        Field f(spec);
        for (int i = 0; i < 100; ++i) {
            std::uint64_t a = f.random(rng, true);
            std::uint64_t ia = field_arith(spec, FieldOp::Inv, {spec, a}, {spec, 0}).value;
            CHECK(ia == euclid_inverse(a, spec.modulus));
            CHECK(f.mul(a, ia) == 1);
        }
    }
}

TEST_CASE("GF(2^w) multiplication matches schoolbook reduction") {
    Rng rng(5);
    for (unsigned w : {8u, 16u, 32u, 64u}) {
        FieldSpec spec = FieldSpec::gf2(w);
        Field f(spec);
        for (int i = 0; i < 2000; ++i) {
            std::uint64_t a = f.random(rng), b = f.random(rng);
            CHECK(f.mul(a, b) == gf2_reference_mul(a, b, w, spec.poly_low));
        }
    }
    // AES test vector: {57} * {83} = {c1} in GF(2^8) with 0x11B.
    CHECK(Field(FieldSpec::gf2(8)).mul(0x57, 0x83) == 0xC1);
}

TEST_CASE("field axioms on random triples") {
    Rng rng(2024);
    for (const auto& spec : all_specs()) {
        Field f(spec);
        for (int i = 0; i < 1000; ++i) {
            auto a = f.random(rng), b = f.random(rng), c = f.random(rng);
            CHECK(f.add(f.add(a, b), c) == f.add(a, f.add(b, c)));
            CHECK(f.mul(f.mul(a, b), c) == f.mul(a, f.mul(b, c)));
            CHECK(f.mul(a, f.add(b, c)) == f.add(f.mul(a, b), f.mul(a, c)));
            CHECK(f.add(a, f.neg(a)) == 0);
            CHECK(f.sub(f.add(a, b), b) == a);
            if (a != 0) CHECK(f.mul(a, f.inv(a)) == 1);
            if (spec.is_char2()) {
                auto s = f.add(a, b);
                CHECK(f.mul(s, s) == f.add(f.mul(a, a), f.mul(b, b)));
            }
        }
    }
}

TEST_CASE("GF(2^w) multiplicative group order") {
    // a^(2^w - 1) = 1 for every nonzero a; this fails for reducible moduli.
    Rng rng(3);
    for (unsigned w : {8u, 16u, 32u, 64u}) {
        Field f(FieldSpec::gf2(w));
        std::uint64_t order = w == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << w) - 1;
        for (int i = 0; i < 50; ++i) CHECK(f.pow(f.random(rng, true), order) == 1);
    }
    // Exhaustive check in GF(2^8): every nonzero element has an inverse.
    Field f8(FieldSpec::gf2(8));
    for (std::uint64_t a = 1; a < 256; ++a) CHECK(f8.mul(a, f8.inv(a)) == 1);
}

TEST_CASE("random_element determinism and distribution") {
    FieldSpec z5 = FieldSpec::prime(5);
    Rng r1(1), r2(1);
    CHECK(random_element(FieldSpec::default_prime(), r1).value ==
          random_element(FieldSpec::default_prime(), r2).value);

    Rng rng(77);
    std::map<std::uint64_t, int> freq;
    for (int i = 0; i < 10000; ++i) ++freq[random_element(z5, rng).value];
    const double sigma = std::sqrt(10000 * 0.2 * 0.8);
    for (std::uint64_t v = 0; v < 5; ++v) CHECK(std::abs(freq[v] - 2000) <= 5 * sigma);

    FieldSpec g8 = FieldSpec::gf2(8);
    bool saw_zero = false;
    for (int i = 0; i < 10000; ++i) saw_zero |= random_element(g8, rng, true).value == 0;
    CHECK_FALSE(saw_zero);
}

TEST_CASE("rng split and below") {
    Rng a(9);
    Rng c1 = a.split(1), c2 = a.split(1), c3 = a.split(2);
    CHECK(c1.next() == c2.next());
    CHECK(Rng(9).split(2).next() == c3.next());
    Rng r(4);
    for (int i = 0; i < 1000; ++i) CHECK(r.below(7) < 7);
    CHECK_THROWS_AS(r.below(0), InvalidArgument);
    for (int i = 0; i < 100; ++i) {
        auto v = r.range(-3, 3);
        CHECK(v >= -3);
        CHECK(v <= 3);
    }
}

TEST_CASE("value formatting round trip") {
    for (const auto& spec : all_specs()) {
        Field f(spec);
        Rng rng(8);
        for (int i = 0; i < 20; ++i) {
            auto v = f.random(rng);
            CHECK(parse_value(spec, format_value(spec, v)) == v);
        }
    }
    CHECK_THROWS_AS(parse_value(FieldSpec::prime(7), "9"), InvalidArgument);
    CHECK_THROWS_AS(parse_value(FieldSpec::gf2(8), "0x100"), InvalidArgument);
    CHECK(parse_value(FieldSpec::prime(7), "0x6") == 6);
}

TEST_CASE("determinant and rank") {
    Field f(FieldSpec::prime(1000000007));
    Matrix m(3, 3);
    // [[2,0,1],[1,3,2],[1,1,1]] has determinant 2(3-2) - 0 + 1(1-3) = 0
    std::uint64_t vals[9] = {2, 0, 1, 1, 3, 2, 1, 1, 1};
    for (int i = 0; i < 9; ++i) m.at(i / 3, i % 3) = vals[i];
    CHECK(determinant(f, m) == 0);
    CHECK(rank(f, m) == 2);
    m.at(2, 2) = 2;  // determinant becomes 2(6-2) + 1(1-3) = 6
    CHECK(determinant(f, m) == 6);
    CHECK(rank(f, m) == 3);
    Matrix swap(2, 2);
    swap.at(0, 1) = swap.at(1, 0) = 1;
    CHECK(determinant(f, swap) == f.neg(1));
    Field g(FieldSpec::gf2(16));
    CHECK(determinant(g, swap) == 1);
    CHECK_THROWS_AS(determinant(f, Matrix(2, 3)), ShapeError);
    Matrix p = multiply(f, m, m.transpose());
    CHECK(determinant(f, p) == f.mul(6, 6));
}
