/**
 * @file test_matchcon.cpp
 * @brief Unit tests for basis matchings, the matchings connectivity tensor,
 *        block factorization and join-formula validation.
 */
#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "doctest.h"
#include "kronscale/errors.hpp"
#include "kronscale/matchcon.hpp"

using namespace kronscale;

namespace {

std::vector<unsigned> iota_list(unsigned n) {
    std::vector<unsigned> v(n);
    std::iota(v.begin(), v.end(), 0u);
    return v;
}

/// Independent basis recursion: the index is read most-significant-first as
/// a string a_1..a_k, and the last character decides the pair of x_q.
void oracle_basis(std::vector<unsigned> xs, std::vector<int> a, std::set<std::pair<unsigned, unsigned>>& out) {
    if (xs.size() == 2) {
        out.insert({xs[0], xs[1]});
        return;
    }
    if (xs.empty()) return;
    const int last = a.back();
    a.pop_back();
    const std::size_t q = xs.size();
    const unsigned partner = last ? xs[q - 3] : xs[q - 2];
    out.insert({partner, xs[q - 1]});
    std::vector<unsigned> rest;
    for (std::size_t i = 0; i + 1 < q; ++i)
        if (xs[i] != partner) rest.push_back(xs[i]);
    oracle_basis(rest, a, out);
}

/// Independent cycle test by walking: every touched vertex has degree 2 and a
/// walk from one touched vertex visits all of them.
bool walk_single_cycle(const std::vector<std::pair<unsigned, unsigned>>& edges) {
    if (edges.empty()) return true;
    std::map<unsigned, std::vector<std::size_t>> inc;
    for (std::size_t e = 0; e < edges.size(); ++e) {
        inc[edges[e].first].push_back(e);
        inc[edges[e].second].push_back(e);
    }
    for (const auto& [v, es] : inc)
        if (es.size() != 2) return false;
    std::size_t steps = 0, e = 0;
    unsigned v = edges[0].first;
    std::set<std::size_t> used;
    do {
        used.insert(e);
        v = edges[e].first == v ? edges[e].second : edges[e].first;
        e = inc[v][0] == e ? inc[v][1] : inc[v][0];
        ++steps;
    } while (e != 0 && steps <= edges.size());
    return used.size() == edges.size();
}

}  // namespace

TEST_CASE("basis matchings follow the recursion") {
    CHECK(basis_matchings({}).size() == 1);
    CHECK(basis_matchings({}).front().edges.empty());
    CHECK(basis_matchings({4, 9}).size() == 1);
    auto four = basis_matchings(iota_list(4));
    REQUIRE(four.size() == 2);
    CHECK(four[0].edges == Pairing{{0, 1}, {2, 3}});
    CHECK(four[1].edges == Pairing{{0, 2}, {1, 3}});
    for (unsigned n : {2u, 4u, 6u, 8u}) {
        const auto xs = iota_list(n);
        const auto all = basis_matchings(xs);
        CHECK(all.size() == (std::size_t{1} << (n / 2 - 1)));
        std::set<Pairing> distinct;
        const auto ladder = ladder_edges(xs);
        for (const auto& b : all) {
            distinct.insert(b.edges);
            std::vector<int> bits;
            for (unsigned i = 0; i < basis_bits(n); ++i) bits.push_back(static_cast<int>(b.a >> i & 1));
            std::set<std::pair<unsigned, unsigned>> expect;
            oracle_basis(xs, bits, expect);
            CHECK(Pairing(expect.begin(), expect.end()) == b.edges);
            std::vector<int> cover(n);
            for (auto [u, v] : b.edges) {
                ++cover[u];
                ++cover[v];
                CHECK(std::binary_search(ladder.begin(), ladder.end(), std::make_pair(u, v)));
            }
            CHECK(std::all_of(cover.begin(), cover.end(), [](int c) { return c == 1; }));
        }
        CHECK(distinct.size() == all.size());
    }
    CHECK_THROWS_AS(basis_matchings(iota_list(3)), ParityError);
    CHECK(basis_complement(8, 0b101) == 0b010);
}

TEST_CASE("single-cycle convention") {
    CHECK(is_single_cycle({{0, 1}}, {{0, 1}}));
    CHECK(is_single_cycle({{0, 1}, {2, 3}}, {{0, 2}, {1, 3}}));
    CHECK_FALSE(is_single_cycle({{0, 1}, {2, 3}}, {{0, 1}, {2, 3}}));
    CHECK(is_single_cycle({}, {}, {}));
    CHECK_FALSE(is_single_cycle({{0, 1}}, {}));
    CHECK(is_single_cycle({{0, 1}}, {{1, 2}}, {{0, 2}}));
    // cross-check against a walking oracle on all pairs of matchings of 6 points
    const auto pm = perfect_matchings(iota_list(6));
    CHECK(pm.size() == 15);
    for (const auto& a : pm)
        for (const auto& b : pm) {
            Pairing u = a;
            u.insert(u.end(), b.begin(), b.end());
            CHECK(is_single_cycle(a, b) == walk_single_cycle(u));
        }
}

TEST_CASE("basis identity, cut observation and rank") {
    const std::size_t pairs[] = {1, 1, 9, 225, 11025};
    for (unsigned n = 0; n <= 8; n += 2) {
        const auto rep = verify_basis_identity(iota_list(n));
        CHECK(rep.ok);
        CHECK(rep.pairs_checked == pairs[n / 2]);
        CHECK(verify_cut_observation(n));
    }
    CHECK_THROWS_AS(verify_basis_identity(iota_list(5)), ParityError);
    for (unsigned n : {2u, 4u, 6u}) CHECK(basis_incidence_rank(n) == (std::size_t{1} << (n / 2 - 1)));
}

TEST_CASE("fingerprint codes round-trip") {
    for (unsigned q : {0u, 1u, 3u, 4u}) {
        std::set<std::uint64_t> codes;
        for (const auto& f : fingerprints(q, MatchingFamily::All)) {
            CHECK(Fingerprint::decode(f.code(), q) == f);
            codes.insert(f.code());
        }
        CHECK(codes.size() == fingerprints(q, MatchingFamily::All).size());
    }
    CHECK(fingerprints(4).size() == 42);
    CHECK(fingerprints(4, MatchingFamily::All).size() == 16 + 6 * 4 + 3);
    Fingerprint bad{{1, 0}, {}};
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    Fingerprint bad2{{1, 1, 3}, {{0, 1}}};
    CHECK_THROWS_AS(bad2.validate(), InvalidArgument);
    CHECK_THROWS_AS(fingerprints(9), TooLarge);
}

TEST_CASE("matchings connectivity tensor") {
    // independent count for q = 2: each slot either holds the pair {0,1} on
    // both elements or no pair; the union is a cycle iff 0 or 2 slots hold it
    const Tensor h2 = build_H(2);
    std::size_t expect = 0;
    const std::uint8_t opts[3] = {0, 1, 2};
    for (auto a0 : opts)
        for (auto a1 : opts)
            for (auto b0 : opts)
                for (auto b1 : opts) {
                    const std::uint8_t c0 = a0 + b0, c1 = a1 + b1;
                    if (c0 > 2 || c1 > 2) continue;
                    if ((a0 == 1) != (a1 == 1) || (b0 == 1) != (b1 == 1) || (c0 == 1) != (c1 == 1)) continue;
                    const int pairs = (a0 == 1) + (b0 == 1) + (c0 == 1);
                    expect += pairs == 0 || pairs == 2;
                }
    CHECK(h2.nnz() == expect);
    CHECK(expect == 12);

    const Tensor h4 = build_H(4);
    for (const auto& [t, v] : h4.entries()) {
        CHECK(v == 1);
        CHECK(h4.get({t.b, t.a, t.c}) == 1);
        const auto f1 = Fingerprint::decode(t.a, 4), f2 = Fingerprint::decode(t.b, 4), f3 = Fingerprint::decode(t.c, 4);
        Pairing u = f1.m;
        u.insert(u.end(), f2.m.begin(), f2.m.end());
        u.insert(u.end(), f3.m.begin(), f3.m.end());
        CHECK(walk_single_cycle(u));
        for (unsigned e = 0; e < 4; ++e) CHECK(f1.d[e] + f2.d[e] == f3.d[e]);
    }
    // every feasible basis triple with a cycle is present
    std::size_t feasible_cycles = 0;
    const auto fps = fingerprints(4);
    for (const auto& x : fps)
        for (const auto& y : fps)
            for (const auto& z : fps) feasible_cycles += connectivity_entry(x, y, z);
    CHECK(h4.nnz() == feasible_cycles);

    CHECK(restrict_H(h4, 4, 2, {2, 0, 2}) == h2);
    CHECK(restrict_H(h4, 4, 2, {0, 0, 0}) == h2);
    CHECK(restrict_H(build_H(3), 3, 2, {0, 2, 2}) == h2);
    CHECK_THROWS_AS(restrict_H(h4, 4, 2, {1, 0, 1}), InvalidArgument);
    CHECK_THROWS_AS(build_H(9), TooLarge);
}

TEST_CASE("block factorization of the connectivity tensor") {
    for (auto [q, b] : {std::pair{2u, 2u}, {2u, 1u}, {3u, 1u}, {3u, 2u}, {4u, 1u}, {4u, 2u}, {4u, 3u}, {5u, 2u}, {6u, 2u}, {6u, 3u}}) {
        CAPTURE(q);
        CAPTURE(b);
        const auto rep = verify_factorization(q, b);
        for (const auto& f : rep.failures) MESSAGE(f);
        CHECK(rep.ok());
        CHECK(rep.triples > 0);
        CHECK(rep.type_bound_ok);
        CHECK(rep.coefficient_failures == 0);
    }
    const auto single = verify_factorization(2, 2);
    CHECK(single.blocks == 1);
    CHECK(single.types == 1);
    CHECK_THROWS_AS(verify_factorization(7, 3), TooLarge);
}

TEST_CASE("tree decomposition format and validation") {
    for (auto [g, td] : {c4_join_fixture(), k4_join_fixture()}) {
        CHECK_NOTHROW(td.validate(g));
        const auto text = format_tree_decomposition(td);
        const auto back = parse_tree_decomposition(text);
        CHECK(format_tree_decomposition(back) == text);
        CHECK_NOTHROW(back.validate(g));
    }
    auto [g, td] = c4_join_fixture();
    auto twice = td;
    for (auto& b : twice.bags)
        if (b.kind == BagKind::IntroduceEdge && b.edge == std::pair{2u, 3u}) b.edge = {0, 1};
    CHECK_THROWS_AS(twice.validate(g), InvalidArgument);
    CHECK_THROWS_AS(parse_tree_decomposition("bag 1 - teleport {}"), ParseError);
    CHECK_THROWS_AS(parse_tree_decomposition("bag 1 - leaf 1,2"), ParseError);
    const auto one = parse_tree_decomposition("# comment\nbag 2 - forget 1 {}\nbag 1 2 introduce-vertex 1 {1}\nbag 0 1 leaf {}\n");
    Graph single;
    single.n = 1;
    CHECK_NOTHROW(one.validate(single));
    auto bad_root = parse_tree_decomposition("bag 1 - introduce-vertex 1 {1}\nbag 0 1 leaf {}\n");
    CHECK_THROWS_AS(bad_root.validate(single), InvalidArgument);
}

TEST_CASE("brute-force tables") {
    // leaf, then a single edge: the introduce-edge bag holds X = {e} with M = {uv}
    Graph g;
    g.n = 2;
    g.edges = {{0, 1}};
    const auto td = parse_tree_decomposition(
        "bag 1 - forget 1 {}\nbag 2 1 forget 2 {1}\nbag 3 2 introduce-edge 1-2 {1,2}\n"
        "bag 4 3 introduce-vertex 2 {1,2}\nbag 5 4 introduce-vertex 1 {1}\nbag 6 5 leaf {}\n");
    const auto t = bruteforce_tables(g, td, {7});
    const std::size_t leaf = td.index_of(6), ie = td.index_of(3);
    REQUIRE(t.odd[leaf].size() == 1);
    CHECK(t.odd[leaf][0] == TableKey{0, 0});
    const Fingerprint edge_fp{{1, 1}, {{0, 1}}};
    CHECK(std::binary_search(t.odd[ie].begin(), t.odd[ie].end(), TableKey{edge_fp.code(), 7}));
    CHECK(std::binary_search(t.odd[ie].begin(), t.odd[ie].end(), TableKey{0, 0}));
    CHECK(verify_join(g, td, {7}).ok);
    CHECK(verify_join(g, td, {7}).joins == 0);

    // K4 root: every vertex is forgotten (degree 2), so the odd entries are
    // exactly the weights carried by an odd number of Hamiltonian cycles
    auto [k4, k4td] = k4_join_fixture();
    Rng rng(5);
    const auto w = default_weights(k4, rng);
    for (auto x : w) CHECK((x >= 1 && x <= 16));
    const auto tk = bruteforce_tables(k4, k4td, w);
    std::map<std::uint64_t, int> hc;
    std::vector<unsigned> perm{1, 2, 3};
    auto weight_of = [&](unsigned u, unsigned v) {
        for (std::size_t e = 0; e < k4.edges.size(); ++e)
            if (k4.edges[e] == std::pair{std::min(u, v), std::max(u, v)}) return w[e];
        return std::uint64_t{0};
    };
    int cycles = 0;
    do {
        if (perm[0] > perm[2]) continue;  // each cycle once (fix vertex 0 and direction)
        ++cycles;
        hc[weight_of(0, perm[0]) + weight_of(perm[0], perm[1]) + weight_of(perm[1], perm[2]) + weight_of(perm[2], 0)]++;
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(cycles == 3);
    std::vector<TableKey> expect;
    for (auto [weight, cnt] : hc)
        if (cnt % 2) expect.push_back({0, weight});
    CHECK(tk.odd[k4td.root()] == expect);
    int parity = 0;
    for (const auto& [weight, cnt] : hc) parity += cnt;
    CHECK(parity % 2 == 1);
}

TEST_CASE("join formula on the fixtures") {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        for (auto [g, td] : {c4_join_fixture(), k4_join_fixture()}) {
            Rng rng(seed);
            const auto rep = verify_join(g, td, default_weights(g, rng));
            CHECK(rep.ok);
            CHECK(rep.joins == 1);
            CHECK(rep.entries_checked > 0);
        }
    }
}
