/**
 * @file test_coeffx.cpp
 * @brief Unit tests for full-monomial coefficient extraction.
 */
#include <string>

#include "doctest.h"
#include "kronscale/coeffx.hpp"
#include "support.hpp"

using namespace kronscale;
using namespace kronscale::testing;

namespace {

std::vector<std::string> xnames(unsigned n) {
    std::vector<std::string> v;
    for (unsigned i = 1; i <= n; ++i) v.push_back(subset_name('x', Mask{1} << (i - 1)));
    return v;
}

/// Oracle: coefficient of the full monomial in `vars`, as a function of the other
/// inputs, evaluated at `others` from the symbolic expansion.
std::uint64_t oracle(const Circuit& c, const std::vector<std::string>& vars, const Assignment& others) {
    const Field& f = c.field();
    SparsePoly p = expand(c)[0];
    std::vector<char> isx(c.num_inputs(), 0);
    for (const auto& v : vars)
        if (GateId g = c.find_input(v); g != kNoGate) isx[c.input_index(g)] = 1;
    std::uint64_t acc = 0;
    for (const auto& [m, co] : p) {
        bool ok = true;
        std::uint64_t t = co;
        std::size_t xcount = 0;
        for (std::size_t i = 0; i < m.size() && ok; ++i) {
            if (isx[i]) {
                if (m[i] > 1) ok = false;
                xcount += m[i];
            } else if (m[i]) {
                t = f.mul(t, f.pow(others.at(c.input_names()[i]), m[i]));
            }
        }
        if (ok && xcount == vars.size()) acc = f.add(acc, t);
    }
    return acc;
}

Assignment random_others(Rng& rng, const Circuit& c, const std::vector<std::string>& vars) {
    Assignment a;
    for (const auto& name : c.input_names())
        if (std::find(vars.begin(), vars.end(), name) == vars.end()) a[name] = c.field().random(rng, false);
    return a;
}

std::uint64_t eval1(const Circuit& c, const Assignment& a) {
    Assignment b;
    for (const auto& name : c.input_names()) b[name] = a.count(name) ? a.at(name) : 0;
    return evaluate(c, b)[0];
}

/// prod_i (x_{3i-2} + x_{3i-1} + x_{3i})^3 as a 1-skew chain.
Circuit cube_product(unsigned groups) {
    Circuit c;
    GateId acc = c.one();
    for (unsigned i = 0; i < groups; ++i) {
        GateId s = c.add({c.input(subset_name('x', Mask{1} << (3 * i))), c.input(subset_name('x', Mask{2} << (3 * i))),
                          c.input(subset_name('x', Mask{4} << (3 * i)))});
        for (int k = 0; k < 3; ++k) acc = c.mul(s, acc);
    }
    c.add_output(acc);
    return c;
}

}  // namespace

TEST_CASE("direct extraction on small examples") {
    Circuit prod;
    GateId acc = prod.one();
    for (const auto& x : xnames(5)) acc = prod.mul(prod.input(x), acc);
    prod.add_output(acc);
    CHECK(eval1(extract_coeff_direct(prod, xnames(5)), {}) == 1);

    for (FieldSpec spec : {FieldSpec::default_prime(), FieldSpec::gf2(8)}) {
        Circuit sq(spec);
        GateId s = sq.add({sq.input("x:{1}"), sq.input("x:{2}")});
        sq.add_output(sq.mul(s, s));
        Circuit e = extract_coeff_direct(sq, xnames(2));
        CHECK(eval1(e, {}) == (spec.is_char2() ? 0u : 2u));
        CHECK(coeff_direct_value(sq, xnames(2), {})[0] == (spec.is_char2() ? 0u : 2u));
    }
}

TEST_CASE("direct extraction matches symbolic expansion") {
    Rng rng(91);
    for (int rep = 0; rep < 25; ++rep) {
        unsigned n = 2 + static_cast<unsigned>(rng.below(8));
        auto vars = xnames(n);
        Circuit c = random_full_skew_circuit(rng, FieldSpec::default_prime(), vars, {"v:a", "v:b"});
        Circuit e = extract_coeff_direct(c, vars);
        for (const auto& name : e.input_names()) CHECK(name[0] == 'v');
        Assignment others = random_others(rng, c, vars);
        const std::uint64_t want = oracle(c, vars, others);
        CHECK(eval1(e, others) == want);
        CHECK(coeff_direct_value(c, vars, others)[0] == want);
    }
    // q-skew circuits with q = 2
    for (int rep = 0; rep < 15; ++rep) {
        auto vars = xnames(6);
        Circuit c = random_skew_circuit(rng, FieldSpec::default_prime(), vars, 30, 2, 6);
        Assignment none;
        CHECK(eval1(extract_coeff_direct(c, vars), none) == oracle(c, vars, none));
    }
}

TEST_CASE("skewness violations are rejected") {
    Circuit c;
    GateId a = c.mul(c.input("x:{1}"), c.input("x:{2}"));
    GateId b = c.mul(c.input("x:{3}"), c.input("x:{4}"));
    c.add_output(c.mul(a, b));
    ExtractionOptions opt;
    opt.max_skew = 1;
    CHECK_THROWS_AS(extract_coeff_direct(c, xnames(4), opt), NotSkew);
    CHECK(eval1(extract_coeff_direct(c, xnames(4)), {}) == 1);  // fine as a 2-skew circuit
    CHECK_THROWS_AS(extract_coeff_direct(c, {"x:{1}", "x:{1}"}), InvalidArgument);
}

TEST_CASE("degree padding") {
    Rng rng(5);
    auto vars = xnames(7);
    Circuit c = random_full_skew_circuit(rng, FieldSpec::default_prime(), vars);
    PaddedCircuit p = pad_degree(c, vars);
    CHECK(p.n == 9);
    CHECK(p.vars.size() == 9);
    CHECK(p.circuit.num_inputs() == c.num_inputs() + 2);
    CHECK(coeff_direct_value(p.circuit, p.vars, {})[0] == coeff_direct_value(c, vars, {})[0]);
    PaddedCircuit same = pad_degree(cube_product(3), xnames(9));
    CHECK(same.n == 9);
    CHECK(same.circuit.num_inputs() == 9);
    CHECK(pad_degree(c, xnames(10)).n == 12);
}

TEST_CASE("layered form is homogeneous and 1-skew") {
    Rng rng(8);
    for (int rep = 0; rep < 10; ++rep) {
        auto vars = xnames(6);
        Circuit c = rep % 2 ? random_full_skew_circuit(rng, FieldSpec::default_prime(), vars, {"v:a"})
                            : random_skew_circuit(rng, FieldSpec::default_prime(), vars, 25, 2, 6);
        LayeredCircuit L = layer_circuit(c, vars);
        const Circuit& h = L.circuit;
        for (GateId g = 0; g < h.num_gates(); ++g) {
            if (h.kind(g) == GateKind::Add)
                for (GateId a : h.args(g)) CHECK(L.degree[a] == L.degree[g]);
            if (h.kind(g) == GateKind::Mul) {
                GateId a = h.args(g)[0], b = h.args(g)[1];
                bool ok = L.degree[a] == 0 || L.degree[b] == 0 ||
                          std::find(L.x.begin(), L.x.end(), a) != L.x.end();
                CHECK(ok);
                CHECK(L.degree[g] == L.degree[a] + L.degree[b]);
            }
        }
        if (L.output != kNoGate) CHECK(L.degree[L.output] == 6);
        Assignment others = random_others(rng, c, vars);
        CHECK(coeff_direct_value(h, vars, others)[0] == coeff_direct_value(c, vars, others)[0]);
    }
}

TEST_CASE("tripartition extraction on structured examples") {
    Circuit cubes = cube_product(3);
    ExtractionStats st;
    Circuit e = extract_coeff_tripartition(cubes, xnames(9), {}, &st);
    CHECK(eval1(e, {}) == 216);
    CHECK(st.n == 9);
    CHECK(st.pairs >= 1);

    // permanent polynomial prod_i (sum_j a_ij x_j) of the identity matrix
    Circuit perm;
    GateId acc = perm.one();
    for (unsigned i = 0; i < 9; ++i) {
        std::vector<GateId> row;
        for (unsigned j = 0; j < 9; ++j)
            row.push_back(perm.mul(perm.constant(i == j ? 1 : 0), perm.input(subset_name('x', Mask{1} << j))));
        acc = perm.mul(perm.add(std::span<const GateId>(row)), acc);
    }
    perm.add_output(acc);
    CHECK(eval1(extract_coeff_tripartition(perm, xnames(9)), {}) == 1);
    CHECK(eval1(extract_coeff_direct(perm, xnames(9)), {}) == 1);
}

TEST_CASE("tripartition and direct extraction agree") {
    Rng rng(1234);
    for (int rep = 0; rep < 6; ++rep) {
        auto vars = xnames(9);
        Circuit c = random_full_skew_circuit(rng, FieldSpec::default_prime(), vars, {"v:a", "v:b"});
        Circuit tri = extract_coeff_tripartition(c, vars);
        Circuit dir = extract_coeff_direct(c, vars);
        Assignment others = random_others(rng, c, vars);
        const std::uint64_t want = oracle(c, vars, others);
        CHECK(want != 0);
        CHECK(eval1(tri, others) == want);
        CHECK(eval1(dir, others) == want);
    }
    // fewer variables: padding kicks in
    auto vars = xnames(5);
    Circuit c = random_full_skew_circuit(rng, FieldSpec::default_prime(), vars);
    CHECK(eval1(extract_coeff_tripartition(c, vars), {}) == oracle(c, vars, {}));
    // q-skew input is deskewed first
    auto v6 = xnames(6);
    Circuit q2 = random_skew_circuit(rng, FieldSpec::default_prime(), v6, 30, 2, 6);
    CHECK(eval1(extract_coeff_tripartition(q2, v6), {}) == oracle(q2, v6, {}));
}
