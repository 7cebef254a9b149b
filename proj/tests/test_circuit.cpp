/**
 * @file test_circuit.cpp
 * @brief Unit tests for the circuit IR, transforms and text format.
 */
#include <sstream>

#include "doctest.h"
#include "kronscale/circuit.hpp"
#include "support.hpp"

using namespace kronscale;
using namespace kronscale::testing;

namespace {

std::vector<std::uint64_t> random_inputs(const Circuit& c, Rng& rng) {
    std::vector<std::uint64_t> v(c.num_inputs());
    for (auto& x : v) x = c.field().random(rng);
    return v;
}

/// Naive recursive evaluator (no memoization beyond the recursion itself).
std::uint64_t recursive_eval(const Circuit& c, GateId g, const std::vector<std::uint64_t>& in,
                             std::vector<std::optional<std::uint64_t>>& memo) {
    if (memo[g]) return *memo[g];
    const Field& f = c.field();
    std::uint64_t v = 0;
    switch (c.kind(g)) {
        case GateKind::Input: v = in[c.input_index(g)]; break;
        case GateKind::Const: v = c.const_value(g); break;
        case GateKind::Add:
            for (GateId a : c.args(g)) v = f.add(v, recursive_eval(c, a, in, memo));
            break;
        case GateKind::Mul:
            v = 1;
            for (GateId a : c.args(g)) v = f.mul(v, recursive_eval(c, a, in, memo));
            break;
    }
    memo[g] = v;
    return v;
}

}  // namespace

TEST_CASE("input name grammar") {
    CHECK(subset_name('x', 0b101) == "x:{1,3}");
    CHECK(subset_name('y', 0) == "y:{}");
    CHECK(tuple_name('a', {2, 1}) == "a:{2,1}");
    char side;
    std::uint64_t mask;
    REQUIRE(parse_subset_name("z:{2,5}", side, mask));
    CHECK(side == 'z');
    CHECK(mask == 0b10010);
    CHECK_FALSE(parse_subset_name("x:{3,2}", side, mask));
    CHECK_NOTHROW(validate_input_name("a:{3,1}"));
    CHECK_NOTHROW(validate_input_name("v:alpha_1"));
    CHECK_THROWS_AS(validate_input_name("x:{2,2}"), InvalidArgument);
    CHECK_THROWS_AS(validate_input_name("plain"), InvalidArgument);
    CHECK_THROWS_AS(validate_input_name("v:a b"), InvalidArgument);
}

TEST_CASE("evaluate examples") {
    FieldSpec z7 = FieldSpec::prime(7);
    Circuit c(z7);
    GateId x = c.input("v:x"), y = c.input("v:y");
    c.add_output(c.mul(x, y));
    CHECK(evaluate(c, Assignment{{"v:x", 2}, {"v:y", 3}})[0] == 6);
    CHECK_THROWS_AS(evaluate(c, Assignment{{"v:x", 2}}), UnassignedInput);
    auto tagged = evaluate(c, ElementAssignment{{"v:x", {z7, 2}}, {"v:y", {z7, 3}}});
    CHECK(tagged[0].value == 6);
    CHECK_THROWS_AS(evaluate(c, ElementAssignment{{"v:x", {FieldSpec::gf2(8), 2}}, {"v:y", {z7, 3}}}),
                    FieldMismatch);

    Circuit d(FieldSpec::gf2(8));
    GateId u = d.input("v:x");
    d.add_output(d.add({u, u}));
    CHECK(evaluate(d, Assignment{{"v:x", 0x35}})[0] == 0);
}

TEST_CASE("evaluate matches expansion and recursive evaluation") {
    Rng rng(101);
    for (int t = 0; t < 20; ++t) {
        Circuit c = random_circuit(rng, FieldSpec::prime(1000003), 5, 50, 5);
        auto poly = expand(c);
        for (int k = 0; k < 20; ++k) {
            auto in = random_inputs(c, rng);
            auto out = evaluate_inputs(c, in);
            CHECK(out[0] == poly_eval(c.field(), poly[0], in));
        }
    }
    for (int t = 0; t < 10; ++t) {
        Circuit c = random_circuit(rng, FieldSpec::gf2(16), 8, 200, 40);
        auto in = random_inputs(c, rng);
        std::vector<std::optional<std::uint64_t>> memo(c.num_gates());
        CHECK(evaluate_inputs(c, in)[0] == recursive_eval(c, c.outputs()[0], in, memo));
    }
}

TEST_CASE("formal degrees and skewness") {
    Circuit c;
    GateId x1 = c.input("x:{1}"), x2 = c.input("x:{2}"), x3 = c.input("x:{3}");
    GateId s1 = c.add({x1, x2}), s2 = c.add({x2, x3});
    GateId p = c.mul(c.mul(s1, s2), c.mul(s2, s1));  // Mul of two degree-2 subcircuits
    c.add_output(p);
    auto deg = formal_degrees(c);
    CHECK(deg[p] == 4);
    CHECK(analyze_skew(c) == Degree{2});

    // product of sums: 1-skew
    Circuit ps;
    GateId acc = ps.add({ps.input("a:{1,1}"), ps.input("a:{1,2}")});
    for (int i = 2; i <= 4; ++i) acc = ps.mul(acc, ps.add({ps.input(tuple_name('a', {i, 1})), ps.input(tuple_name('a', {i, 2}))}));
    ps.add_output(acc);
    CHECK(analyze_skew(ps) == Degree{1});

    Circuit t;
    GateId ids[3] = {t.input("v:a"), t.input("v:b"), t.input("v:c")};
    t.add_output(t.mul_n(ids));
    CHECK_FALSE(analyze_skew(t).has_value());
    CHECK(analyze_skew(normalize_binary(t)) == Degree{1});

    Circuit lin;
    lin.add_output(lin.add({lin.input("v:a"), lin.constant(3)}));
    CHECK(analyze_skew(lin) == Degree{0});
}

TEST_CASE("homogenize small example") {
    Circuit c;
    GateId x1 = c.input("x:{1}"), x2 = c.input("x:{2}");
    c.add_output(c.add({x1, c.mul(x1, x2)}));
    auto h = homogenize(c, 2);
    REQUIRE(h.circuit.outputs().size() == 3);
    auto polys = expand(h.circuit);
    CHECK(polys[0].empty());
    CHECK(polys[1] == SparsePoly{{{1, 0}, 1}});
    CHECK(polys[2] == SparsePoly{{{1, 1}, 1}});
    CHECK_THROWS_AS(homogenize(c, 1), DegreeBound);
}

TEST_CASE("homogenize semantics, scaling and size bound") {
    Rng rng(7);
    const FieldSpec spec = FieldSpec::prime(1000000007);
    std::vector<std::string> names;
    for (int i = 1; i <= 6; ++i) names.push_back(subset_name('x', std::uint64_t{1} << (i - 1)));
    for (int t = 0; t < 20; ++t) {
        Circuit c = random_skew_circuit(rng, spec, names, 60, 1 + t % 3, 6);
        Degree d = formal_degrees(c)[c.outputs()[0]];
        if (d == 0) continue;
        auto h = homogenize(c, d);
        auto q = analyze_skew(c);
        REQUIRE(q.has_value());
        CHECK(h.circuit.size() <= homogenize_factor(*q) * d * c.size());
        CHECK(analyze_skew(h.circuit).value_or(kDegreeTop) <= *q);
        const Field& f = c.field();
        for (int k = 0; k < 20; ++k) {
            auto in = random_inputs(c, rng);
            auto orig = evaluate_inputs(c, in)[0];
            auto comps = evaluate_inputs(h.circuit, in);
            std::uint64_t s = 0;
            for (auto v : comps) s = f.add(s, v);
            CHECK(s == orig);
            // component k at t*x equals t^k times its value at x, for every gate
            std::uint64_t tt = f.random(rng, true);
            auto scaled = in;
            for (auto& v : scaled) v = f.mul(v, tt);
            auto all = evaluate_all(h.circuit, in), alls = evaluate_all(h.circuit, scaled);
            for (GateId g = 0; g < c.num_gates(); ++g)
                for (Degree j = 0; j <= d; ++j) {
                    GateId cg = h.component(g, j);
                    if (cg == kNoGate) continue;
                    CHECK(alls[cg] == f.mul(f.pow(tt, j), all[cg]));
                }
        }
    }
}

TEST_CASE("homogenize fixes homogeneous circuits") {
    Circuit c;
    GateId a = c.input("v:a"), b = c.input("v:b");
    c.add_output(c.add({c.mul(a, b), c.mul(b, b)}));
    auto h = homogenize(c, 2);
    Rng rng(1);
    for (int k = 0; k < 10; ++k) {
        auto in = random_inputs(c, rng);
        auto comps = evaluate_inputs(h.circuit, in);
        CHECK(comps[0] == 0);
        CHECK(comps[1] == 0);
        CHECK(comps[2] == evaluate_inputs(c, in)[0]);
    }
}

TEST_CASE("baur_strassen examples") {
    Circuit c;
    GateId x1 = c.input("x:{1}"), x2 = c.input("x:{2}");
    c.add_output(c.mul(x1, x2));
    Circuit g = baur_strassen(c, {"x:{1}", "x:{2}", "x:{3}"});
    REQUIRE(g.outputs().size() == 3);
    auto out = evaluate(g, Assignment{{"x:{1}", 5}, {"x:{2}", 9}});
    CHECK(out[0] == 9);
    CHECK(out[1] == 5);
    CHECK(out[2] == 0);

    Circuit sq(FieldSpec::gf2(16));
    GateId x = sq.input("v:x");
    sq.add_output(sq.mul(x, x));
    Circuit gs = baur_strassen(sq, {"v:x"});
    CHECK(evaluate(gs, Assignment{{"v:x", 0x1234}})[0] == 0);

    Circuit two;
    two.add_output(two.input("v:a"));
    two.add_output(two.input("v:b"));
    CHECK_THROWS_AS(baur_strassen(two, {"v:a"}), SingleOutputRequired);
}

TEST_CASE("baur_strassen matches symbolic derivatives; linearity; size") {
    Rng rng(41);
    const FieldSpec spec = FieldSpec::prime(1000003);
    for (int t = 0; t < 20; ++t) {
        Circuit c = random_circuit(rng, spec, 4, 40, 5);
        std::vector<std::string> wrt = c.input_names();
        Circuit g = baur_strassen(c, wrt);
        CHECK(g.outputs().size() == wrt.size());
        CHECK(g.size() <= kBaurStrassenFactor * c.size());
        auto poly = expand(c)[0];
        for (int k = 0; k < 10; ++k) {
            auto in = random_inputs(c, rng);
            auto grad = evaluate_inputs(g, in);
            for (std::size_t i = 0; i < wrt.size(); ++i)
                CHECK(grad[i] == poly_eval(c.field(), poly_diff(c.field(), poly, i), in));
        }
    }
    // gradient of a sum equals the sum of gradients
    for (int t = 0; t < 10; ++t) {
        Circuit a = random_circuit(rng, spec, 4, 30, 4);
        Circuit b = random_circuit(rng, spec, 4, 30, 4);
        Circuit s(spec);
        for (const auto& n : a.input_names()) s.input(n);
        std::vector<GateId> outs;
        for (const Circuit* part : {&a, &b}) {
            auto o = inline_circuit(s, *part, [&](const std::string& n) { return s.input(n); });
            outs.push_back(s.or_zero(o[0]));
        }
        s.add_output(s.add(outs));
        std::vector<std::string> wrt = s.input_names();
        Circuit gs = baur_strassen(s, wrt), ga = baur_strassen(a, wrt), gb = baur_strassen(b, wrt);
        auto in = random_inputs(s, rng);
        Assignment asg;
        for (std::size_t i = 0; i < wrt.size(); ++i) asg[wrt[i]] = in[i];
        auto vs = evaluate(gs, asg), va = evaluate(ga, asg), vb = evaluate(gb, asg);
        for (std::size_t i = 0; i < wrt.size(); ++i) CHECK(vs[i] == s.field().add(va[i], vb[i]));
    }
}

TEST_CASE("text format round trips") {
    Circuit empty(FieldSpec::prime(7));
    empty.input("v:a");
    CHECK(parse_circuit(serialize(empty)) == empty);

    Circuit g64(FieldSpec::gf2(64));
    GateId a = g64.input("x:{1}");
    GateId k = g64.constant(0xFEDCBA9876543210ULL);
    g64.add_output(g64.mul(a, k));
    g64.add_output(g64.add({a, k, a}));
    Circuit back = parse_circuit(serialize(g64));
    CHECK(back == g64);
    CHECK(serialize(back) == serialize(g64));

    Rng rng(5);
    Circuit big = random_circuit(rng, FieldSpec::default_prime(), 30, 100000, 50);
    Circuit big2 = parse_circuit(serialize(big));
    CHECK(big2 == big);
    auto in = random_inputs(big, rng);
    CHECK(evaluate_inputs(big, in) == evaluate_inputs(big2, in));
}

TEST_CASE("text format errors carry line numbers") {
    auto line_of = [](const std::string& text) -> std::size_t {
        try {
            parse_circuit(text);
        } catch (const ParseError& e) {
            return e.line();
        }
        return 0;
    };
    CHECK(line_of("circuit v2\n") == 1);
    CHECK(line_of("circuit v1\nfield p=7\nin 0 v:a\nadd 2 0\n") == 4);
    CHECK(line_of("circuit v1\nfield p=7\nin 0 v:a\nmul 1 0\n") == 4);
    CHECK(line_of("circuit v1\n# comment\nfield p=7\nin 0 v:a\nconst 1 9\n") == 5);
    CHECK(line_of("circuit v1\nfield p=7\nin 0 v:a\nout 3\n") == 4);
    CHECK(line_of("circuit v1\nfield p=9\n") == 2);
    CHECK(line_of("circuit v1\nfield p=7\nin 0 v:a\nin 1 v:a\n") == 4);
    Circuit ok = parse_circuit("circuit v1\nfield p=7   # seven\nin 0 v:a\nconst 1 0x3\nmul 2 0 1\nout 2\n");
    CHECK(evaluate(ok, Assignment{{"v:a", 3}})[0] == 2);

    Circuit nary;
    GateId ids[3] = {nary.input("v:a"), nary.input("v:b"), nary.input("v:c")};
    nary.add_output(nary.mul_n(ids));
    CHECK_THROWS_AS(serialize(nary), InvalidCircuit);
}

TEST_CASE("dead-gate elimination is explicit") {
    Circuit c;
    GateId a = c.input("v:a"), b = c.input("v:b");
    c.mul(a, b);  // dead
    c.add_output(c.add({a, b}));
    Circuit d = eliminate_dead(c);
    CHECK(c.size() == 4);
    CHECK(d.size() == 2);
    CHECK(d.num_inputs() == 2);
    CHECK(evaluate(d, Assignment{{"v:a", 3}, {"v:b", 4}})[0] == 7);
}
