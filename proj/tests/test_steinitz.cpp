/**
 * @file test_steinitz.cpp
 * @brief Unit tests for the exact Steinitz ordering and concentration partition.
 */
#include <algorithm>
#include <numeric>

#include "doctest.h"
#include "kronscale/algebra.hpp"
#include "kronscale/steinitz.hpp"

using namespace kronscale;

namespace {

/// Brute-force optimum over all r! orders.
Rational brute_force_bound(const VectorFamily& f) {
    std::vector<std::size_t> perm(f.size());
    std::iota(perm.begin(), perm.end(), 0);
    Rational best{1 << 30, 1};
    do {
        auto dev = prefix_deviations(f, perm);
        Rational m{0, 1};
        for (const auto& d : dev)
            if (m < d) m = d;
        if (m < best) best = m;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

VectorFamily random_family(Rng& rng, std::size_t d, std::size_t r, std::int64_t den, std::int64_t spread) {
    VectorFamily f;
    f.dim = d;
    f.den = den;
    for (std::size_t i = 0; i < r; ++i) {
        std::vector<std::int64_t> v(d);
        for (auto& x : v) x = rng.range(-spread, spread);
        f.nums.push_back(v);
    }
    return f;
}

/// Integer type vectors (nonnegative entries summing to b), scaled by 1/b.
VectorFamily random_types(Rng& rng, std::int64_t b, std::size_t r) {
    VectorFamily f;
    f.dim = 3;
    f.den = b;
    for (std::size_t i = 0; i < r; ++i) {
        std::int64_t a = rng.range(0, b);
        std::int64_t c = rng.range(0, b - a);
        f.nums.push_back({a, c, b - a - c});
    }
    return f;
}

bool is_bijection(std::vector<std::size_t> p, std::size_t r) {
    std::sort(p.begin(), p.end());
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i] != i) return false;
    return p.size() == r;
}

}  // namespace

TEST_CASE("rational arithmetic is normalized") {
    CHECK(Rational::make(2, 4) == Rational{1, 2});
    CHECK(Rational::make(3, -6) == Rational{-1, 2});
    CHECK(Rational::make(0, 5) == Rational{0, 1});
    CHECK(Rational{1, 3} < Rational{1, 2});
    CHECK(Rational::make(6, 3).to_string() == "2");
    CHECK_THROWS_AS(Rational::make(1, 0), DivisionByZero);
}

TEST_CASE("vector family parsing") {
    VectorFamily f = parse_vector_family("2 3\n1/2 -1/3\n0 1\n# comment\n-1 1/6\n");
    CHECK(f.dim == 2);
    CHECK(f.den == 6);
    CHECK(f.nums[0] == std::vector<std::int64_t>{3, -2});
    CHECK(f.nums[2] == std::vector<std::int64_t>{-6, 1});
    CHECK(f.norm(0) == Rational{1, 2});
    CHECK_THROWS_AS(parse_vector_family("1 1\n3/2\n"), ParseError);
    CHECK_THROWS_AS(parse_vector_family("2 1\n1\n"), ParseError);
    CHECK_THROWS_AS(parse_vector_family("1 2\n1\n"), ParseError);
    CHECK_THROWS_AS(parse_vector_family("1 1\n1/0\n"), ParseError);
}

TEST_CASE("two opposite unit vectors give bound 1") {
    VectorFamily f = parse_vector_family("1 2\n1\n-1\n");
    auto res = steinitz_permutation(f);
    // total is zero, so after one vector the deviation is exactly 1
    CHECK(res.bound == Rational{1, 1});
    CHECK(is_bijection(res.perm, 2));
    CHECK(res.perm == std::vector<std::size_t>{1, 0});  // least class (-1) first
}

TEST_CASE("identical vectors have zero deviation for d = 0 offset") {
    VectorFamily f;
    f.dim = 1;
    f.den = 1;
    f.nums.assign(5, {0});
    auto res = steinitz_permutation(f);
    CHECK(res.bound == Rational{0, 1});
    auto cp = concentration_partition(f, {2, 3});
    for (const auto& d : cp.deviation) CHECK(d == Rational{0, 1});
}

TEST_CASE("exact optimum matches exhaustive search") {
    Rng rng(2024);
    for (int t = 0; t < 60; ++t) {
        std::size_t r = 1 + rng.below(7);
        std::size_t d = 1 + rng.below(3);
        VectorFamily f = random_family(rng, d, r, 4, 4);
        auto res = steinitz_permutation(f);
        CHECK(is_bijection(res.perm, r));
        CHECK(res.bound == brute_force_bound(f));
        Rational m{0, 1};
        for (const auto& p : res.prefix)
            if (m < p) m = p;
        CHECK(m == res.bound);
        CHECK(res.prefix.size() == r);
    }
}

TEST_CASE("achieved bound stays within the dimension") {
    Rng rng(99);
    for (int t = 0; t < 100; ++t) {
        std::size_t d = 1 + rng.below(3);
        VectorFamily f = random_family(rng, d, 1 + rng.below(14), 3, 3);
        auto res = steinitz_permutation(f);
        CHECK(res.bound <= Rational{static_cast<std::int64_t>(d), 1});
    }
}

TEST_CASE("steinitz ordering is deterministic") {
    Rng rng(5);
    VectorFamily f = random_types(rng, 3, 20);
    auto a = steinitz_permutation(f);
    auto b = steinitz_permutation(f);
    CHECK(a.perm == b.perm);
    CHECK(a.bound == b.bound);
}

TEST_CASE("class cap and lattice size are enforced") {
    Rng rng(8);
    VectorFamily f = random_family(rng, 3, 30, 50, 50);
    CHECK_THROWS_AS(steinitz_permutation(f, 4), TooManyClasses);
    VectorFamily bad;
    bad.dim = 1;
    bad.den = 1;
    bad.nums = {{2}};
    CHECK_THROWS_AS(steinitz_permutation(bad), InvalidArgument);
}

TEST_CASE("concentration partition on random types") {
    Rng rng(31);
    // b = 2, r = 12, four groups of three
    for (int t = 0; t < 30; ++t) {
        VectorFamily f = random_types(rng, 2, 12);
        auto cp = concentration_partition(f, {3, 3, 3, 3});
        REQUIRE(cp.groups.size() == 4);
        std::vector<std::size_t> all;
        for (std::size_t j = 0; j < 4; ++j) {
            CHECK(cp.groups[j].size() == 3);
            CHECK(cp.deviation[j] <= Rational{4, 1});  // 4d/g = 4
            CHECK(cp.deviation[j] == group_deviation(f, cp.groups[j]));
            all.insert(all.end(), cp.groups[j].begin(), cp.groups[j].end());
        }
        CHECK(is_bijection(all, 12));
    }
    VectorFamily f = random_types(rng, 2, 6);
    CHECK_THROWS_AS(concentration_partition(f, {2, 3}), PartitionSizeError);
    CHECK_THROWS_AS(concentration_partition(f, {6, 0}), PartitionSizeError);
}

TEST_CASE("group deviation by hand") {
    VectorFamily f = parse_vector_family("1 4\n1\n0\n0\n-1\n");
    // global average 0; group {0,1} averages 1/2
    CHECK(group_deviation(f, {0, 1}) == Rational{1, 2});
    CHECK(group_deviation(f, {0, 3}) == Rational{0, 1});
}
