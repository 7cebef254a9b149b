/**
 * @file support.hpp
 * @brief Test-only oracles and generators: sparse polynomial expansion of
 *        circuits, symbolic differentiation, and random circuit builders.
 *
 * Everything here is deliberately naive and independent of the library's
 * transforms so that it can serve as a reference.
 */
#pragma once

#include <map>
#include <string>
#include <vector>

#include "kronscale/algebra.hpp"
#include "kronscale/circuit.hpp"

namespace kronscale::testing {

/// Exponent vector (indexed by circuit input index) -> coefficient.
using Monomial = std::vector<std::uint16_t>;
using SparsePoly = std::map<Monomial, std::uint64_t>;

inline void poly_add_term(const Field& f, SparsePoly& p, const Monomial& m, std::uint64_t c) {
    if (c == 0) return;
    auto [it, fresh] = p.emplace(m, c);
    if (!fresh) {
        it->second = f.add(it->second, c);
        if (it->second == 0) p.erase(it);
    }
}

inline SparsePoly poly_mul(const Field& f, const SparsePoly& a, const SparsePoly& b) {
    SparsePoly r;
    for (const auto& [ma, ca] : a)
        for (const auto& [mb, cb] : b) {
            Monomial m(ma.size());
            for (std::size_t i = 0; i < m.size(); ++i) m[i] = static_cast<std::uint16_t>(ma[i] + mb[i]);
            poly_add_term(f, r, m, f.mul(ca, cb));
        }
    return r;
}

/// Expands every output of `c` into a sparse polynomial (naive recursion over gates).
inline std::vector<SparsePoly> expand(const Circuit& c) {
    const Field& f = c.field();
    const std::size_t n = c.num_inputs();
    std::vector<SparsePoly> val(c.num_gates());
    for (GateId g = 0; g < c.num_gates(); ++g) {
        switch (c.kind(g)) {
            case GateKind::Input: {
                Monomial m(n, 0);
                m[c.input_index(g)] = 1;
                val[g][m] = 1;
                break;
            }
            case GateKind::Const:
                if (c.const_value(g) != 0) val[g][Monomial(n, 0)] = c.const_value(g);
                break;
            case GateKind::Add:
                for (GateId a : c.args(g))
                    for (const auto& [m, co] : val[a]) poly_add_term(f, val[g], m, co);
                break;
            case GateKind::Mul: {
                auto as = c.args(g);
                SparsePoly acc = val[as[0]];
                for (std::size_t i = 1; i < as.size(); ++i) acc = poly_mul(f, acc, val[as[i]]);
                val[g] = std::move(acc);
                break;
            }
        }
    }
    std::vector<SparsePoly> outs;
    for (GateId o : c.outputs()) outs.push_back(val[o]);
    return outs;
}

/// Evaluates a sparse polynomial at `x` (indexed like the monomials).
inline std::uint64_t poly_eval(const Field& f, const SparsePoly& p, const std::vector<std::uint64_t>& x) {
    std::uint64_t s = 0;
    for (const auto& [m, co] : p) {
        std::uint64_t t = co;
        for (std::size_t i = 0; i < m.size(); ++i)
            if (m[i]) t = f.mul(t, f.pow(x[i], m[i]));
        s = f.add(s, t);
    }
    return s;
}

/// Symbolic partial derivative with respect to variable `var`.
inline SparsePoly poly_diff(const Field& f, const SparsePoly& p, std::size_t var) {
    SparsePoly r;
    for (const auto& [m, co] : p) {
        if (m[var] == 0) continue;
        Monomial d = m;
        d[var] -= 1;
        poly_add_term(f, r, d, f.mul(co, f.from_int(m[var])));
    }
    return r;
}

/// Coefficient of the monomial with exponent 1 on every listed input and 0 elsewhere.
inline std::uint64_t full_monomial_coeff(const SparsePoly& p, std::size_t ninputs,
                                         const std::vector<std::size_t>& vars) {
    Monomial m(ninputs, 0);
    for (std::size_t v : vars) m[v] = 1;
    auto it = p.find(m);
    return it == p.end() ? 0 : it->second;
}

/**
 * Random circuit with `nin` inputs named v:in<i> and `ngates` internal gates;
 * Add fan-in 1..3, binary Mul.  Degrees are kept <= max_degree by replacing
 * offending products with sums.
 */
inline Circuit random_circuit(Rng& rng, const FieldSpec& spec, int nin, int ngates, Degree max_degree = 6,
                              const std::string& prefix = "v:in") {
    Circuit c(spec);
    std::vector<GateId> pool;
    std::vector<Degree> deg;
    for (int i = 0; i < nin; ++i) {
        pool.push_back(c.input(prefix + std::to_string(i)));
        deg.push_back(1);
    }
    const Field& f = c.field();
    pool.push_back(c.constant(f.random(rng)));
    deg.push_back(0);
    for (int k = 0; k < ngates; ++k) {
        auto pick = [&]() { return rng.below(pool.size()); };
        if (rng.chance(1, 2)) {
            std::size_t a = pick(), b = pick();
            if (deg[a] + deg[b] <= max_degree) {
                pool.push_back(c.mul(pool[a], pool[b]));
                deg.push_back(deg[a] + deg[b]);
                continue;
            }
        }
        int fan = 1 + static_cast<int>(rng.below(3));
        std::vector<GateId> as;
        Degree d = 0;
        for (int j = 0; j < fan; ++j) {
            std::size_t a = pick();
            as.push_back(pool[a]);
            d = std::max(d, deg[a]);
        }
        pool.push_back(c.add(as));
        deg.push_back(d);
    }
    c.add_output(pool.back());
    return c;
}

/**
 * Random q-skew circuit: every product multiplies an arbitrary gate by a
 * gate of formal degree <= q.  Output degree is capped at max_degree.
 */
inline Circuit random_skew_circuit(Rng& rng, const FieldSpec& spec, const std::vector<std::string>& names,
                                   int ngates, Degree q, Degree max_degree) {
    Circuit c(spec);
    const Field& f = c.field();
    std::vector<GateId> pool;
    std::vector<Degree> deg;
    for (const auto& nm : names) {
        pool.push_back(c.input(nm));
        deg.push_back(1);
    }
    pool.push_back(c.constant(f.random(rng, true)));
    deg.push_back(0);
    for (int k = 0; k < ngates; ++k) {
        std::size_t a = rng.below(pool.size());
        if (rng.chance(3, 5)) {
            std::vector<std::size_t> low;
            for (std::size_t i = 0; i < pool.size(); ++i)
                if (deg[i] <= q && deg[i] + deg[a] <= max_degree) low.push_back(i);
            if (!low.empty()) {
                std::size_t b = low[rng.below(low.size())];
                pool.push_back(rng.chance(1, 2) ? c.mul(pool[a], pool[b]) : c.mul(pool[b], pool[a]));
                deg.push_back(deg[a] + deg[b]);
                continue;
            }
        }
        std::size_t b = rng.below(pool.size());
        pool.push_back(c.add({pool[a], pool[b]}));
        deg.push_back(std::max(deg[a], deg[b]));
    }
    c.add_output(pool.back());
    return c;
}


/**
 * Random 1-skew circuit over the listed extraction variables whose output has
 * degree exactly n = names.size() (generically nonzero full coefficient).
 * Each step multiplies the running product by a random linear form and mixes
 * in earlier partial products of the same degree; `coeffs` optional
 * coefficient inputs appear inside the linear forms.
 */
inline Circuit random_full_skew_circuit(Rng& rng, const FieldSpec& spec, const std::vector<std::string>& names,
                                        const std::vector<std::string>& coeffs = {}) {
    Circuit c(spec);
    const Field& f = c.field();
    std::vector<GateId> xs, cs;
    for (const auto& nm : names) xs.push_back(c.input(nm));
    for (const auto& nm : coeffs) cs.push_back(c.input(nm));
    auto linear = [&]() {
        std::vector<GateId> terms;
        for (GateId x : xs) {
            if (!rng.chance(2, 3)) continue;
            GateId coef = !cs.empty() && rng.chance(1, 3) ? cs[rng.below(cs.size())] : c.constant(f.random(rng, true));
            terms.push_back(c.mul(coef, x));
        }
        if (terms.empty()) terms.push_back(xs[rng.below(xs.size())]);
        return terms.size() == 1 ? terms[0] : c.add(std::span<const GateId>(terms));
    };
    std::vector<std::vector<GateId>> by_degree(names.size() + 1);
    GateId cur = linear();
    by_degree[1].push_back(cur);
    for (std::size_t k = 2; k <= names.size(); ++k) {
        GateId other = by_degree[k - 1][rng.below(by_degree[k - 1].size())];
        GateId base = rng.chance(1, 2) ? c.add({cur, other}) : cur;
        cur = rng.chance(1, 2) ? c.mul(linear(), base) : c.mul(base, linear());
        by_degree[k].push_back(cur);
        if (rng.chance(1, 2)) by_degree[k].push_back(c.mul(linear(), by_degree[k - 1][0]));
    }
    if (by_degree.back().size() > 1) cur = c.add({by_degree.back()[0], by_degree.back()[1]});
    c.add_output(cur);
    return c;
}

}  // namespace kronscale::testing
