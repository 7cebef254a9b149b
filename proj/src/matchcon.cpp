/**
 * @file matchcon.cpp
 * @brief Basis matchings, the matchings connectivity tensor, block
 *        factorization verification, and join-formula validation.
 */
#include "kronscale/matchcon.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "kronscale/errors.hpp"
#include "line_reader.hpp"

namespace kronscale {

namespace {

constexpr unsigned kMaxVertex = 64;

std::vector<unsigned> bits_of(std::uint64_t mask) {
    std::vector<unsigned> out;
    for (unsigned v = 0; mask; ++v, mask >>= 1)
        if (mask & 1) out.push_back(v);
    return out;
}

std::string describe(const Pairing& p) {
    std::string s = "{";
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (i) s += ' ';
        s += std::to_string(p[i].first) + "-" + std::to_string(p[i].second);
    }
    return s + "}";
}

std::string describe(const Fingerprint& f) {
    std::string s = "d=";
    for (auto x : f.d) s += static_cast<char>('0' + x);
    return s + " M=" + describe(f.m);
}

}  // namespace

Pairing normalize_pairing(Pairing p) {
    std::uint64_t seen = 0;
    for (auto& [u, v] : p) {
        if (u > v) std::swap(u, v);
        if (u == v || v >= kMaxVertex || (seen >> u & 1) || (seen >> v & 1))
            throw InvalidArgument("pairing repeats a vertex or exceeds 64 vertices");
        seen |= std::uint64_t{1} << u | std::uint64_t{1} << v;
    }
    std::sort(p.begin(), p.end());
    return p;
}

bool is_single_cycle(const std::vector<const Pairing*>& parts) {
    unsigned deg[kMaxVertex] = {};
    unsigned parent[kMaxVertex];
    std::iota(parent, parent + kMaxVertex, 0u);
    auto find = [&](unsigned x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    std::uint64_t touched = 0;
    for (const Pairing* p : parts)
        for (auto [u, v] : *p) {
            if (u >= kMaxVertex || v >= kMaxVertex) throw InvalidArgument("vertex index exceeds 63");
            ++deg[u];
            ++deg[v];
            touched |= std::uint64_t{1} << u | std::uint64_t{1} << v;
            parent[find(u)] = find(v);
        }
    if (touched == 0) return true;
    const unsigned root = find(static_cast<unsigned>(__builtin_ctzll(touched)));
    for (unsigned v : bits_of(touched))
        if (deg[v] != 2 || find(v) != root) return false;
    return true;
}

bool is_single_cycle(const Pairing& m1, const Pairing& m2, const Pairing& m3) {
    return is_single_cycle(std::vector<const Pairing*>{&m1, &m2, &m3});
}

// ------------------------------------------------------------ basis matchings

unsigned basis_bits(std::size_t size) { return size <= 2 ? 0 : static_cast<unsigned>(size / 2 - 1); }

Pairing basis_matching(const std::vector<unsigned>& xs, std::uint64_t a) {
    if (xs.size() % 2) throw ParityError("basis matchings need an even vertex set, got " + std::to_string(xs.size()));
    std::vector<unsigned> rest = xs;
    Pairing out;
    // peel off the pair containing the last vertex, reading a from its last bit
    while (rest.size() > 2) {
        const unsigned bit = basis_bits(rest.size()) - 1;
        const std::size_t q = rest.size();
        const std::size_t partner = (a >> bit & 1) ? q - 3 : q - 2;
        out.emplace_back(rest[partner], rest[q - 1]);
        rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(q - 1));
        rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(partner));
    }
    if (rest.size() == 2) out.emplace_back(rest[0], rest[1]);
    return normalize_pairing(std::move(out));
}

std::vector<BasisMatching> basis_matchings(const std::vector<unsigned>& xs) {
    if (xs.size() % 2) throw ParityError("basis matchings need an even vertex set, got " + std::to_string(xs.size()));
    std::vector<unsigned> sorted = xs;
    std::sort(sorted.begin(), sorted.end());
    std::vector<BasisMatching> out;
    const std::uint64_t count = std::uint64_t{1} << basis_bits(sorted.size());
    for (std::uint64_t a = 0; a < count; ++a) out.push_back({sorted, a, basis_matching(sorted, a)});
    return out;
}

std::uint64_t basis_complement(std::size_t size, std::uint64_t a) {
    return ~a & ((std::uint64_t{1} << basis_bits(size)) - 1);
}

Pairing ladder_edges(const std::vector<unsigned>& xs) {
    std::set<std::pair<unsigned, unsigned>> all;
    for (const auto& b : basis_matchings(xs)) all.insert(b.edges.begin(), b.edges.end());
    return Pairing(all.begin(), all.end());
}

std::vector<Pairing> perfect_matchings(const std::vector<unsigned>& xs) {
    if (xs.size() % 2) throw ParityError("perfect matchings need an even vertex set");
    std::vector<Pairing> out;
    Pairing cur;
    std::function<void(std::vector<unsigned>)> rec = [&](std::vector<unsigned> rest) {
        if (rest.empty()) {
            out.push_back(normalize_pairing(cur));
            return;
        }
        const unsigned first = rest[0];
        for (std::size_t i = 1; i < rest.size(); ++i) {
            std::vector<unsigned> next;
            for (std::size_t j = 1; j < rest.size(); ++j)
                if (j != i) next.push_back(rest[j]);
            cur.emplace_back(first, rest[i]);
            rec(std::move(next));
            cur.pop_back();
        }
    };
    std::vector<unsigned> sorted = xs;
    std::sort(sorted.begin(), sorted.end());
    rec(sorted);
    return out;
}

BasisIdentityReport verify_basis_identity(const std::vector<unsigned>& xs) {
    const auto basis = basis_matchings(xs);
    const auto all = perfect_matchings(xs);
    BasisIdentityReport rep;
    // hc[m][a] = [M_m u B(X, a) is a Hamiltonian cycle]
    std::vector<std::vector<bool>> hc(all.size(), std::vector<bool>(basis.size()));
    for (std::size_t m = 0; m < all.size(); ++m)
        for (std::size_t a = 0; a < basis.size(); ++a) hc[m][a] = is_single_cycle(all[m], basis[a].edges);
    for (std::size_t m1 = 0; m1 < all.size(); ++m1)
        for (std::size_t m2 = 0; m2 < all.size(); ++m2) {
            ++rep.pairs_checked;
            const bool lhs = is_single_cycle(all[m1], all[m2]);
            bool rhs = false;
            for (std::size_t a = 0; a < basis.size(); ++a)
                rhs ^= hc[m1][a] && hc[m2][basis_complement(xs.size(), a)];
            if (lhs != rhs && rep.ok) {
                rep.ok = false;
                rep.counterexample = std::make_pair(all[m1], all[m2]);
            }
        }
    return rep;
}

bool verify_cut_observation(unsigned size) {
    std::vector<unsigned> xs(size);
    std::iota(xs.begin(), xs.end(), 0u);
    for (const auto& b : basis_matchings(xs))
        for (unsigned cut = 1; cut < size; ++cut) {
            unsigned crossing = 0;
            for (auto [u, v] : b.edges) crossing += (u < cut) != (v < cut);
            if (crossing > 2) return false;
        }
    return true;
}

std::size_t basis_incidence_rank(unsigned size) {
    std::vector<unsigned> xs(size);
    std::iota(xs.begin(), xs.end(), 0u);
    const auto basis = basis_matchings(xs);
    const auto all = perfect_matchings(xs);
    std::vector<std::vector<bool>> rows;
    for (const auto& b : basis) {
        std::vector<bool> row(all.size());
        for (std::size_t m = 0; m < all.size(); ++m) row[m] = is_single_cycle(b.edges, all[m]);
        rows.push_back(std::move(row));
    }
    std::size_t rank = 0;
    for (std::size_t col = 0; col < all.size() && rank < rows.size(); ++col) {
        std::size_t piv = rank;
        while (piv < rows.size() && !rows[piv][col]) ++piv;
        if (piv == rows.size()) continue;
        std::swap(rows[piv], rows[rank]);
        for (std::size_t r = 0; r < rows.size(); ++r)
            if (r != rank && rows[r][col])
                for (std::size_t c = 0; c < all.size(); ++c) rows[r][c] = rows[r][c] != rows[rank][c];
        ++rank;
    }
    return rank;
}

// ------------------------------------------------------------ fingerprints

std::vector<unsigned> Fingerprint::ones() const {
    std::vector<unsigned> out;
    for (unsigned v = 0; v < d.size(); ++v)
        if (d[v] == 1) out.push_back(v);
    return out;
}

void Fingerprint::validate() const {
    if (d.size() > kMaxFingerprintGround) throw InvalidArgument("fingerprint ground exceeds 8 elements");
    std::uint64_t covered = 0;
    for (auto [u, v] : m) {
        if (u >= v || v >= d.size() || d[u] != 1 || d[v] != 1 || (covered >> u & 1) || (covered >> v & 1))
            throw InvalidArgument("fingerprint matching is not a perfect matching of d^{-1}(1)");
        covered |= std::uint64_t{1} << u | std::uint64_t{1} << v;
    }
    for (unsigned v = 0; v < d.size(); ++v) {
        if (d[v] > 2) throw InvalidArgument("fingerprint degree outside {0,1,2}");
        if (d[v] == 1 && !(covered >> v & 1)) throw InvalidArgument("degree-1 element left unmatched");
    }
}

std::uint64_t Fingerprint::code() const {
    if (d.size() > kMaxFingerprintGround) throw TooLarge("fingerprint codes need at most 8 elements");
    std::uint64_t c = 0;
    for (unsigned v = 0; v < d.size(); ++v) c |= std::uint64_t{d[v]} << (2 * v);
    for (auto [u, v] : m) c |= std::uint64_t{v} << (16 + 4 * u) | std::uint64_t{u} << (16 + 4 * v);
    return c;
}

Fingerprint Fingerprint::decode(std::uint64_t code, unsigned q) {
    if (q > kMaxFingerprintGround) throw TooLarge("fingerprint codes need at most 8 elements");
    Fingerprint f;
    f.d.resize(q);
    for (unsigned v = 0; v < q; ++v) f.d[v] = static_cast<std::uint8_t>(code >> (2 * v) & 3);
    for (unsigned v = 0; v < q; ++v) {
        if (f.d[v] != 1) continue;
        const unsigned w = static_cast<unsigned>(code >> (16 + 4 * v) & 15);
        if (v < w) f.m.emplace_back(v, w);
    }
    f.validate();
    return f;
}

std::vector<Fingerprint> fingerprints(unsigned q, MatchingFamily family) {
    if (q > kMaxFingerprintGround) throw TooLarge("fingerprints are enumerated for at most 8 elements");
    std::vector<Fingerprint> out;
    std::uint64_t total = 1;
    for (unsigned i = 0; i < q; ++i) total *= 3;
    for (std::uint64_t code = 0; code < total; ++code) {
        Fingerprint f;
        f.d.resize(q);
        for (unsigned v = 0, c = static_cast<unsigned>(code); v < q; ++v, c /= 3) f.d[v] = static_cast<std::uint8_t>(c % 3);
        const auto ones = f.ones();
        if (ones.size() % 2) continue;
        if (family == MatchingFamily::Basis) {
            for (auto& b : basis_matchings(ones)) out.push_back({f.d, std::move(b.edges)});
        } else {
            for (auto& m : perfect_matchings(ones)) out.push_back({f.d, std::move(m)});
        }
    }
    return out;
}

bool connectivity_entry(const Fingerprint& f1, const Fingerprint& f2, const Fingerprint& f3) {
    if (f1.d.size() != f2.d.size() || f1.d.size() != f3.d.size())
        throw ShapeError("fingerprints over different ground sets");
    for (std::size_t v = 0; v < f1.d.size(); ++v)
        if (f1.d[v] + f2.d[v] != f3.d[v]) return false;
    return is_single_cycle(f1.m, f2.m, f3.m);
}

namespace {

/// Matchings of every even subset of {0..q-1}, indexed by bitmask.
std::vector<std::vector<Pairing>> matchings_by_mask(unsigned q, MatchingFamily family) {
    std::vector<std::vector<Pairing>> out(std::size_t{1} << q);
    for (std::uint64_t mask = 0; mask < out.size(); ++mask) {
        const auto xs = bits_of(mask);
        if (xs.size() % 2) continue;
        if (family == MatchingFamily::Basis) {
            for (auto& b : basis_matchings(xs)) out[mask].push_back(std::move(b.edges));
        } else {
            out[mask] = perfect_matchings(xs);
        }
    }
    return out;
}

std::uint64_t ones_mask(const std::vector<std::uint8_t>& d) {
    std::uint64_t m = 0;
    for (unsigned v = 0; v < d.size(); ++v)
        if (d[v] == 1) m |= std::uint64_t{1} << v;
    return m;
}

}  // namespace

Tensor build_H(unsigned q, MatchingFamily family) {
    if (q > kMaxFingerprintGround) throw TooLarge("H_q is built explicitly only for q <= 8");
    Tensor h = Tensor::opaque(FieldSpec::gf2(8));
    const auto by_mask = matchings_by_mask(q, family);
    // per element, (d1, d2) with d1 + d2 <= 2; d3 = d1 + d2
    static constexpr std::uint8_t kPairs[6][2] = {{0, 0}, {0, 1}, {0, 2}, {1, 0}, {1, 1}, {2, 0}};
    std::uint64_t total = 1;
    for (unsigned i = 0; i < q; ++i) total *= 6;
    Fingerprint f1, f2, f3;
    f1.d.resize(q);
    f2.d.resize(q);
    f3.d.resize(q);
    for (std::uint64_t code = 0; code < total; ++code) {
        std::uint64_t c = code;
        for (unsigned v = 0; v < q; ++v, c /= 6) {
            f1.d[v] = kPairs[c % 6][0];
            f2.d[v] = kPairs[c % 6][1];
            f3.d[v] = static_cast<std::uint8_t>(f1.d[v] + f2.d[v]);
        }
        const auto& l1 = by_mask[ones_mask(f1.d)];
        const auto& l2 = by_mask[ones_mask(f2.d)];
        const auto& l3 = by_mask[ones_mask(f3.d)];
        for (const auto& m1 : l1)
            for (const auto& m2 : l2)
                for (const auto& m3 : l3) {
                    if (!is_single_cycle(m1, m2, m3)) continue;
                    f1.m = m1;
                    f2.m = m2;
                    f3.m = m3;
                    h.add({f1.code(), f2.code(), f3.code()}, 1);
                }
    }
    return h;
}

Tensor restrict_H(const Tensor& h, unsigned q, unsigned q_prime, const std::array<std::uint8_t, 3>& tail) {
    if (!h.is_opaque()) throw InvalidArgument("restrict_H expects a fingerprint-indexed tensor");
    if (q_prime > q) throw InvalidArgument("restriction must shrink the ground set");
    for (auto t : tail)
        if (t != 0 && t != 2) throw InvalidArgument("fixed trailing degrees must be 0 or 2");
    Tensor out = Tensor::opaque(h.spec());
    auto cut = [&](std::uint64_t code, std::uint8_t want, std::optional<std::uint64_t>& res) {
        Fingerprint f = Fingerprint::decode(code, q);
        for (unsigned v = q_prime; v < q; ++v)
            if (f.d[v] != want) return;
        f.d.resize(q_prime);
        res = f.code();
    };
    for (const auto& [t, v] : h.entries()) {
        std::optional<std::uint64_t> a, b, c;
        cut(t.a, tail[0], a);
        cut(t.b, tail[1], b);
        cut(t.c, tail[2], c);
        if (a && b && c) out.add({*a, *b, *c}, v);
    }
    return out;
}

// ------------------------------------------------------------ factorization
//
// Internally the third slot uses the complementary degree d3' = 2 - d3, so a
// triple is degree-feasible when d1 + d2 + d3' = 2 at every element.  The
// crossing type of a triple lists, per slot, the matching pairs joining two
// different blocks.  Vertices touched by exactly one crossing pair (V') are
// the endpoints of crossing paths; contracting those paths leaves a
// perfect matching pi of V', and the cycle indicator expands over basis
// matchings A of V' (with pi u complement(A) Hamiltonian).  Each block then
// sees its internal pairs plus the A-pairs restricted to it, with A-pairs
// leaving the block closed up according to their exits.

namespace {

struct BlockLayout {
    unsigned q, b, r;
    unsigned block(unsigned v) const { return v / b; }
    unsigned lo(unsigned j) const { return j * b; }
    unsigned hi(unsigned j) const { return std::min(q, (j + 1) * b); }
};

struct CrossingType {
    std::array<Pairing, 3> crossing;
    std::vector<unsigned> count;   ///< crossing pairs at each element
    std::vector<unsigned> vprime;  ///< elements with exactly one crossing pair
    Pairing contracted;            ///< V' paired along crossing paths
    unsigned closed_cycles = 0;
    bool overfull = false;         ///< some element has three crossing pairs
};

CrossingType crossing_type(const BlockLayout& L, const std::array<const Fingerprint*, 3>& f) {
    CrossingType t;
    t.count.assign(L.q, 0);
    std::vector<std::vector<unsigned>> adj(L.q);
    for (unsigned i = 0; i < 3; ++i)
        for (auto [u, v] : f[i]->m)
            if (L.block(u) != L.block(v)) {
                t.crossing[i].emplace_back(u, v);
                ++t.count[u];
                ++t.count[v];
                adj[u].push_back(v);
                adj[v].push_back(u);
            }
    for (unsigned v = 0; v < L.q; ++v) {
        if (t.count[v] >= 3) t.overfull = true;
        if (t.count[v] == 1) t.vprime.push_back(v);
    }
    if (t.overfull) return t;
    std::vector<bool> seen(L.q);
    for (unsigned s : t.vprime) {
        if (seen[s]) continue;
        unsigned prev = s, cur = adj[s][0];
        seen[s] = true;
        while (t.count[cur] == 2) {
            seen[cur] = true;
            // leave through the other incidence (a doubled pair lists the same neighbour twice)
            const unsigned next = adj[cur][0] == prev ? adj[cur][1] : adj[cur][0];
            prev = cur;
            cur = next;
        }
        seen[cur] = true;
        t.contracted.emplace_back(std::min(s, cur), std::max(s, cur));
    }
    std::sort(t.contracted.begin(), t.contracted.end());
    for (unsigned s = 0; s < L.q; ++s) {
        if (seen[s] || t.count[s] != 2) continue;
        ++t.closed_cycles;
        for (unsigned prev = s, cur = s;;) {
            seen[cur] = true;
            const unsigned next = adj[cur][0] == prev && adj[cur][0] != adj[cur][1] ? adj[cur][1] : adj[cur][0];
            prev = cur;
            cur = next;
            if (seen[cur]) break;
        }
    }
    return t;
}

struct Term {
    enum Kind { Basis, Designated, AllEmpty } kind = Basis;
    Pairing a;       ///< Basis: the matching A of V'
    unsigned j0 = 0; ///< Designated: the block allowed to be non-empty
};

std::string describe(const Term& t) {
    switch (t.kind) {
        case Term::Basis: return "A=" + describe(t.a);
        case Term::Designated: return "designated block " + std::to_string(t.j0);
        case Term::AllEmpty: return "all blocks empty";
    }
    return {};
}

/// Basis matchings A of V' with pi u complement(A) Hamiltonian (before the cut filter).
std::vector<Pairing> expansion_set(const CrossingType& t) {
    std::vector<Pairing> out;
    const std::size_t n = t.vprime.size();
    const std::uint64_t count = std::uint64_t{1} << basis_bits(n);
    for (std::uint64_t a = 0; a < count; ++a) {
        const Pairing comp = basis_matching(t.vprime, basis_complement(n, a));
        if (is_single_cycle(t.contracted, comp)) out.push_back(basis_matching(t.vprime, a));
    }
    return out;
}

/// A crosses every inter-block boundary that has V' on both sides exactly twice.
bool passes_cut_filter(const BlockLayout& L, const CrossingType& t, const Pairing& a) {
    for (unsigned j = 1; j < L.r; ++j) {
        const unsigned cut = L.lo(j);
        const bool left = t.vprime.front() < cut, right = t.vprime.back() >= cut;
        if (!left || !right) continue;
        unsigned crossing = 0;
        for (auto [u, v] : a) crossing += (u < cut) != (v < cut);
        if (crossing != 2) return false;
    }
    return true;
}

std::vector<Term> terms_of(const BlockLayout& L, const CrossingType& t) {
    std::vector<Term> out;
    if (t.overfull) return out;
    if (!t.vprime.empty()) {
        if (t.closed_cycles > 0) return out;
        for (auto& a : expansion_set(t))
            if (passes_cut_filter(L, t, a)) out.push_back({Term::Basis, std::move(a), 0});
        return out;
    }
    if (t.closed_cycles >= 2) return out;
    if (t.closed_cycles == 1) {
        out.push_back({Term::AllEmpty, {}, 0});
        return out;
    }
    // no crossing at all: one term per block allowed to hold the cycle, and
    // an extra all-empty term when the block count is even (so that the
    // all-empty configuration is counted an odd number of times)
    for (unsigned j = 0; j < L.r; ++j) out.push_back({Term::Designated, {}, j});
    if (L.r % 2 == 0) out.push_back({Term::AllEmpty, {}, 0});
    return out;
}

/**
 * Rerouted fingerprint of slot i restricted to block j.  Uses only the type,
 * the term, and the slot's own fingerprint; none means the slot is killed.
 */
std::optional<Fingerprint> reroute(const BlockLayout& L, const CrossingType& t, const Term& term, unsigned slot,
                                   unsigned j, const Fingerprint& f) {
    const unsigned lo = L.lo(j), hi = L.hi(j);
    std::vector<bool> cross(L.q);
    for (auto [u, v] : t.crossing[slot]) cross[u] = cross[v] = true;
    Pairing internal;
    for (auto [u, v] : f.m) {
        if (L.block(u) == j && L.block(v) == j) internal.emplace_back(u - lo, v - lo);
        if ((L.block(u) != L.block(v)) != (std::find(t.crossing[slot].begin(), t.crossing[slot].end(),
                                                     std::make_pair(u, v)) != t.crossing[slot].end()))
            return std::nullopt;  // the slot is not of this type
    }
    std::vector<bool> in_vprime(L.q);
    bool block_has_vprime = false;
    for (unsigned v : t.vprime) {
        in_vprime[v] = true;
        block_has_vprime |= L.block(v) == j;
    }

    Fingerprint g;
    g.d.resize(hi - lo);
    auto finish = [&](Pairing m) -> std::optional<Fingerprint> {
        g.m = std::move(m);
        for (auto x : g.d)
            if (x > 2) return std::nullopt;
        try {
            g.m = normalize_pairing(std::move(g.m));
            g.validate();
        } catch (const InvalidArgument&) {
            return std::nullopt;
        }
        return g;
    };
    auto degree = [&](unsigned v, int extra) -> int { return int(f.d[v]) - int(cross[v]) + extra; };
    auto set_degrees = [&](auto&& extra) -> bool {
        for (unsigned v = lo; v < hi; ++v) {
            const int x = degree(v, extra(v));
            if (x < 0 || x > 2) return false;
            g.d[v - lo] = static_cast<std::uint8_t>(x);
        }
        return true;
    };
    auto slot1_bonus = [&](unsigned v) { return slot == 0 && t.count[v] == 2 ? 2 : 0; };

    const bool restrict_only = term.kind == Term::Designated && term.j0 == j;
    const bool must_be_empty = !restrict_only && (term.kind != Term::Basis || !block_has_vprime);
    if (restrict_only) {
        if (!set_degrees([](unsigned) { return 0; })) return std::nullopt;
        return finish(internal);
    }
    if (must_be_empty) {
        if (!internal.empty()) return std::nullopt;
        if (!set_degrees(slot1_bonus)) return std::nullopt;
        return finish({});
    }
    if (slot != 0) {
        if (!set_degrees([](unsigned) { return 0; })) return std::nullopt;
        return finish(internal);
    }

    // slot 1 of a block holding V' vertices: compose internal pairs with the
    // A-pairs inside the block and the closures of A-pairs leaving it
    Pairing a_local;
    std::vector<unsigned> left, right;
    unsigned pass_through = 0;
    for (auto [u, v] : term.a) {
        const unsigned bu = L.block(u), bv = L.block(v);
        if (bu == j && bv == j) a_local.emplace_back(u - lo, v - lo);
        else if (bu == j) (bv < j ? left : right).push_back(u - lo);
        else if (bv == j) (bu < j ? left : right).push_back(v - lo);
        else if (std::min(bu, bv) < j && std::max(bu, bv) > j) ++pass_through;
    }
    if (left.size() == 2 && right.empty() && pass_through == 0) a_local.emplace_back(left[0], left[1]);
    else if (right.size() == 2 && left.empty() && pass_through == 0) a_local.emplace_back(right[0], right[1]);
    else if (left.size() == 2 && right.size() == 2 && pass_through == 0) {
        a_local.emplace_back(left[0], left[1]);
        a_local.emplace_back(right[0], right[1]);
    } else if (left.size() == 1 && right.size() == 1 && pass_through == 1)
        a_local.emplace_back(left[0], right[0]);
    else if (!left.empty() || !right.empty() || pass_through != 0)
        return std::nullopt;  // exit pattern that cannot lie on a single cycle

    if (!set_degrees([&](unsigned v) { return (in_vprime[v] ? 1 : 0) + slot1_bonus(v); })) return std::nullopt;

    // walk the composition of internal and A pairs
    const unsigned n = hi - lo;
    std::vector<std::vector<unsigned>> adj(n);
    for (const Pairing* p : {&internal, &a_local})
        for (auto [u, v] : *p) {
            adj[u].push_back(v);
            adj[v].push_back(u);
        }
    for (const auto& a : adj)
        if (a.size() > 2) return std::nullopt;
    std::vector<bool> seen(n);
    Pairing ends;
    for (unsigned s = 0; s < n; ++s) {
        if (seen[s] || adj[s].size() != 1) continue;
        unsigned prev = s, cur = adj[s][0];
        seen[s] = true;
        while (adj[cur].size() == 2) {
            seen[cur] = true;
            const unsigned next = adj[cur][0] == prev ? adj[cur][1] : adj[cur][0];
            prev = cur;
            cur = next;
        }
        seen[cur] = true;
        ends.emplace_back(s, cur);
    }
    unsigned cycles = 0;
    for (unsigned s = 0; s < n; ++s) {
        if (seen[s] || adj[s].empty()) continue;
        ++cycles;
        std::vector<unsigned> stack{s};
        while (!stack.empty()) {
            const unsigned x = stack.back();
            stack.pop_back();
            if (seen[x]) continue;
            seen[x] = true;
            for (unsigned y : adj[x]) stack.push_back(y);
        }
    }
    if (cycles > 0) {
        // a closed slot-1 cycle is the whole block's cycle: nothing else may be open
        if (cycles > 1 || !ends.empty()) return std::nullopt;
        for (unsigned v : t.vprime)
            if (L.block(v) == j && adj[v - lo].empty()) return std::nullopt;
    }
    return finish(std::move(ends));
}

/// Per-block H_b entry of the rerouted triple (third slot in complementary degrees).
bool block_entry(const std::array<std::optional<Fingerprint>, 3>& g) {
    if (!g[0] || !g[1] || !g[2]) return false;
    Fingerprint third = *g[2];
    for (auto& x : third.d) x = static_cast<std::uint8_t>(2 - x);
    return connectivity_entry(*g[0], *g[1], third);
}

bool term_product(const BlockLayout& L, const CrossingType& t, const Term& term,
                  const std::array<const Fingerprint*, 3>& f) {
    for (unsigned j = 0; j < L.r; ++j) {
        std::array<std::optional<Fingerprint>, 3> g;
        for (unsigned i = 0; i < 3; ++i) g[i] = reroute(L, t, term, i, j, *f[i]);
        if (!block_entry(g)) return false;
    }
    return true;
}

/// Internal (non-crossing) pairs of all three slots, as global pairs.
Pairing internal_pairs(const BlockLayout& L, const std::array<const Fingerprint*, 3>& f, std::optional<unsigned> block) {
    Pairing out;
    for (const Fingerprint* fp : f)
        for (auto [u, v] : fp->m)
            if (L.block(u) == L.block(v) && (!block || L.block(u) == *block)) out.emplace_back(u, v);
    return out;
}

/// Ground truth of a term: the configuration the term is meant to count.
bool term_truth(const BlockLayout& L, const Term& term, const std::array<const Fingerprint*, 3>& f) {
    const Pairing internal = internal_pairs(L, f, std::nullopt);
    switch (term.kind) {
        case Term::Basis: return is_single_cycle(internal, term.a);
        case Term::AllEmpty: return internal.empty();
        case Term::Designated: {
            const Pairing inside = internal_pairs(L, f, term.j0);
            return inside.size() == internal.size() && is_single_cycle(inside, {});
        }
    }
    return false;
}

struct FactorizationContext {
    BlockLayout layout;
    const Tensor* h;
    FactorizationReport* rep;

    void fail(std::size_t& counter, const std::string& stage, const std::array<const Fingerprint*, 3>& f,
              const CrossingType& t, const std::string& detail) {
        ++counter;
        if (rep->failures.size() >= 20) return;
        std::string s = stage + ": " + describe(*f[0]) + " | " + describe(*f[1]) + " | " + describe(*f[2]) +
                        " (third slot complementary); type X1=" + describe(t.crossing[0]) +
                        " X2=" + describe(t.crossing[1]) + " X3=" + describe(t.crossing[2]);
        if (!detail.empty()) s += "; " + detail;
        rep->failures.push_back(std::move(s));
    }

    /// Full sum over the terms of the triple's type.
    bool rhs(const CrossingType& t, const std::vector<Term>& terms, const std::array<const Fingerprint*, 3>& f) {
        bool sum = false;
        for (const auto& term : terms) sum ^= term_product(layout, t, term, f);
        return sum;
    }

    bool lhs(const std::array<const Fingerprint*, 3>& f) {
        Fingerprint third = *f[2];
        for (auto& x : third.d) x = static_cast<std::uint8_t>(2 - x);
        return h->get({f[0]->code(), f[1]->code(), third.code()}) != 0;
    }

    /// All three stages for one degree-feasible triple.
    void check(const std::array<const Fingerprint*, 3>& f) {
        const CrossingType t = crossing_type(layout, f);
        const Pairing all = [&] {
            Pairing p;
            for (const Fingerprint* fp : f) p.insert(p.end(), fp->m.begin(), fp->m.end());
            return p;
        }();
        const bool cycle = is_single_cycle(all, {});
        const auto terms = terms_of(layout, t);

        // basis expansion after contracting crossing paths
        if (!t.vprime.empty()) {
            ++rep->expansion_checks;
            bool sum = false;
            if (t.closed_cycles == 0) {
                const Pairing internal = internal_pairs(layout, f, std::nullopt);
                for (const auto& a : expansion_set(t)) sum ^= is_single_cycle(internal, a);
            }
            if (sum != cycle) fail(rep->expansion_failures, "basis expansion", f, t, "");
        }

        // every term: global configuration vs per-block product; filtered A never single
        for (const auto& term : terms) {
            ++rep->reroute_checks;
            if (term_truth(layout, term, f) != term_product(layout, t, term, f))
                fail(rep->reroute_failures, "reroute", f, t, describe(term));
        }
        if (!t.vprime.empty() && t.closed_cycles == 0) {
            const Pairing internal = internal_pairs(layout, f, std::nullopt);
            for (const auto& a : expansion_set(t))
                if (!passes_cut_filter(layout, t, a)) {
                    ++rep->reroute_checks;
                    if (is_single_cycle(internal, a))
                        fail(rep->reroute_failures, "cut filter", f, t, "A=" + describe(a));
                }
        }

        ++rep->coefficient_checks;
        const bool want = lhs(f);
        if (want != cycle) fail(rep->coefficient_failures, "tensor entry", f, t, "H_q disagrees with the cycle test");
        if (rhs(t, terms, f) != want) fail(rep->coefficient_failures, "coefficient", f, t, "");
    }

    /// Coefficient comparison only (degree-infeasible triples: H_q is zero there).
    void check_coefficient(const std::array<const Fingerprint*, 3>& f) {
        const CrossingType t = crossing_type(layout, f);
        ++rep->coefficient_checks;
        if (rhs(t, terms_of(layout, t), f) != lhs(f)) fail(rep->coefficient_failures, "coefficient", f, t, "");
    }
};

}  // namespace

FactorizationReport verify_factorization(unsigned q, unsigned b) {
    if (q > 6 || b > 3) throw TooLarge("factorization is verified exhaustively only for q <= 6, b <= 3");
    if (b == 0) throw InvalidArgument("block size must be positive");
    FactorizationReport rep;
    rep.q = q;
    rep.b = b;
    rep.blocks = q == 0 ? 0 : (q + b - 1) / b;
    const Tensor h = build_H(q);
    FactorizationContext ctx{{q, b, rep.blocks}, &h, &rep};
    const auto by_mask = matchings_by_mask(q, MatchingFamily::Basis);

    // degree-feasible triples: (d1, d2, d3') a composition of 2 at each element
    static constexpr std::uint8_t kComp[6][3] = {{2, 0, 0}, {0, 2, 0}, {0, 0, 2}, {1, 1, 0}, {1, 0, 1}, {0, 1, 1}};
    std::uint64_t total = 1;
    for (unsigned i = 0; i < q; ++i) total *= 6;
    std::set<std::array<Pairing, 3>> types;
    std::array<Fingerprint, 3> f;
    for (auto& x : f) x.d.resize(q);
    for (std::uint64_t code = 0; code < total; ++code) {
        std::uint64_t c = code;
        for (unsigned v = 0; v < q; ++v, c /= 6)
            for (unsigned i = 0; i < 3; ++i) f[i].d[v] = kComp[c % 6][i];
        const auto& l0 = by_mask[ones_mask(f[0].d)];
        const auto& l1 = by_mask[ones_mask(f[1].d)];
        const auto& l2 = by_mask[ones_mask(f[2].d)];
        for (const auto& m0 : l0)
            for (const auto& m1 : l1)
                for (const auto& m2 : l2) {
                    f[0].m = m0;
                    f[1].m = m1;
                    f[2].m = m2;
                    const std::array<const Fingerprint*, 3> fp{&f[0], &f[1], &f[2]};
                    ++rep.triples;
                    types.insert(crossing_type(ctx.layout, fp).crossing);
                    ctx.check(fp);
                }
    }
    rep.types = types.size();
    rep.type_bound_ok =
        std::log(static_cast<long double>(rep.types)) <= 12.0L * rep.blocks * std::log(20.0L * b);

    // the remaining (degree-infeasible) triples, where H_q vanishes: all of
    // them for q <= 4, a fixed pseudo-random sample for larger q
    const auto all = fingerprints(q);
    auto infeasible = [&](const std::array<const Fingerprint*, 3>& fp) {
        for (unsigned v = 0; v < q; ++v)
            if (fp[0]->d[v] + fp[1]->d[v] + fp[2]->d[v] != 2) return true;
        return false;
    };
    if (q <= 4) {
        for (const auto& x : all)
            for (const auto& y : all)
                for (const auto& z : all) {
                    const std::array<const Fingerprint*, 3> fp{&x, &y, &z};
                    if (infeasible(fp)) ctx.check_coefficient(fp);
                }
    } else {
        Rng rng(0x6d617463686e6f6eULL);
        for (unsigned s = 0; s < 200000; ++s) {
            const std::array<const Fingerprint*, 3> fp{&all[rng.below(all.size())], &all[rng.below(all.size())],
                                                       &all[rng.below(all.size())]};
            if (infeasible(fp)) ctx.check_coefficient(fp);
        }
    }
    return rep;
}

// ------------------------------------------------------------ tree decompositions

namespace {

const char* kind_name(BagKind k) {
    switch (k) {
        case BagKind::Leaf: return "leaf";
        case BagKind::IntroduceVertex: return "introduce-vertex";
        case BagKind::IntroduceEdge: return "introduce-edge";
        case BagKind::Forget: return "forget";
        case BagKind::Join: return "join";
    }
    return "?";
}

std::pair<unsigned, unsigned> ordered(unsigned u, unsigned v) { return {std::min(u, v), std::max(u, v)}; }

}  // namespace

std::size_t NiceTreeDecomposition::index_of(unsigned id) const {
    for (std::size_t i = 0; i < bags.size(); ++i)
        if (bags[i].id == id) return i;
    throw InvalidArgument("no bag with id " + std::to_string(id));
}

std::size_t NiceTreeDecomposition::root() const {
    std::optional<std::size_t> r;
    for (std::size_t i = 0; i < bags.size(); ++i)
        if (!bags[i].parent) {
            if (r) throw InvalidArgument("tree decomposition has several roots");
            r = i;
        }
    if (!r) throw InvalidArgument("tree decomposition has no root");
    return *r;
}

std::vector<std::size_t> NiceTreeDecomposition::children(std::size_t index) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < bags.size(); ++i)
        if (bags[i].parent && *bags[i].parent == bags[index].id) out.push_back(i);
    return out;
}

void NiceTreeDecomposition::validate(const Graph& g) const {
    g.validate();
    if (g.directed) throw InvalidArgument("tree decompositions are for undirected graphs");
    if (bags.empty()) throw InvalidArgument("empty tree decomposition");
    std::set<unsigned> ids;
    for (const auto& b : bags) {
        if (!ids.insert(b.id).second) throw InvalidArgument("duplicate bag id " + std::to_string(b.id));
        if (!std::is_sorted(b.members.begin(), b.members.end()) ||
            std::adjacent_find(b.members.begin(), b.members.end()) != b.members.end())
            throw InvalidArgument("bag " + std::to_string(b.id) + " members must be distinct");
        for (unsigned v : b.members)
            if (v >= g.n) throw InvalidArgument("bag " + std::to_string(b.id) + " names a vertex outside the graph");
    }
    const std::size_t r = root();
    // every bag reaches the root
    for (std::size_t i = 0; i < bags.size(); ++i) {
        std::size_t cur = i, steps = 0;
        while (bags[cur].parent) {
            cur = index_of(*bags[cur].parent);
            if (++steps > bags.size()) throw InvalidArgument("tree decomposition contains a cycle");
        }
    }
    if (!bags[r].members.empty()) throw InvalidArgument("root bag must be empty");

    std::map<std::pair<unsigned, unsigned>, unsigned> introduced;
    for (std::size_t i = 0; i < bags.size(); ++i) {
        const Bag& b = bags[i];
        const auto ch = children(i);
        const std::string where = "bag " + std::to_string(b.id) + " (" + kind_name(b.kind) + "): ";
        auto has = [](const std::vector<unsigned>& m, unsigned v) { return std::binary_search(m.begin(), m.end(), v); };
        auto expect_children = [&](std::size_t n) {
            if (ch.size() != n) throw InvalidArgument(where + "expected " + std::to_string(n) + " children");
        };
        switch (b.kind) {
            case BagKind::Leaf:
                expect_children(0);
                if (!b.members.empty()) throw InvalidArgument(where + "leaf bags are empty");
                break;
            case BagKind::IntroduceVertex: {
                expect_children(1);
                auto m = bags[ch[0]].members;
                if (has(m, b.vertex)) throw InvalidArgument(where + "vertex already present in the child");
                m.push_back(b.vertex);
                std::sort(m.begin(), m.end());
                if (m != b.members) throw InvalidArgument(where + "bag must be the child plus the vertex");
                break;
            }
            case BagKind::Forget: {
                expect_children(1);
                auto m = bags[ch[0]].members;
                if (!has(m, b.vertex)) throw InvalidArgument(where + "forgotten vertex absent from the child");
                std::erase(m, b.vertex);
                if (m != b.members) throw InvalidArgument(where + "bag must be the child minus the vertex");
                break;
            }
            case BagKind::IntroduceEdge: {
                expect_children(1);
                if (bags[ch[0]].members != b.members) throw InvalidArgument(where + "bag must equal its child");
                if (!has(b.members, b.edge.first) || !has(b.members, b.edge.second))
                    throw InvalidArgument(where + "edge endpoints must lie in the bag");
                ++introduced[b.edge];
                break;
            }
            case BagKind::Join:
                expect_children(2);
                if (bags[ch[0]].members != b.members || bags[ch[1]].members != b.members)
                    throw InvalidArgument(where + "join children must have the same bag");
                break;
        }
    }
    std::set<std::pair<unsigned, unsigned>> edges;
    for (auto [u, v] : g.edges) {
        const auto e = ordered(u, v);
        if (!edges.insert(e).second) throw InvalidArgument("graph has a repeated edge");
        const auto it = introduced.find(e);
        if (it == introduced.end() || it->second != 1)
            throw InvalidArgument("edge " + std::to_string(u + 1) + "-" + std::to_string(v + 1) +
                                  " must be introduced exactly once");
    }
    for (const auto& [e, cnt] : introduced)
        if (!edges.count(e)) throw InvalidArgument("introduced edge is not in the graph");
    // the bags containing each vertex form a connected subtree
    for (unsigned v = 0; v < g.n; ++v) {
        std::size_t nodes = 0, links = 0;
        for (const auto& b : bags) {
            if (!std::binary_search(b.members.begin(), b.members.end(), v)) continue;
            ++nodes;
            if (b.parent) {
                const auto& p = bags[index_of(*b.parent)].members;
                links += std::binary_search(p.begin(), p.end(), v);
            }
        }
        if (nodes == 0) throw InvalidArgument("vertex " + std::to_string(v + 1) + " lies in no bag");
        if (links + 1 != nodes) throw InvalidArgument("bags containing vertex " + std::to_string(v + 1) + " are not connected");
    }
}

NiceTreeDecomposition parse_tree_decomposition(std::istream& in) {
    detail::LineReader r(in);
    NiceTreeDecomposition td;
    std::vector<std::string> tok;
    while (r.next(tok)) {
        if (tok.size() < 4 || tok[0] != "bag")
            throw ParseError(r.line(), "expected 'bag <id> <parent|-> <kind> [vertex|u-v] {members}'");
        Bag b;
        b.id = static_cast<unsigned>(r.integer(tok[1]));
        if (tok[2] != "-") b.parent = static_cast<unsigned>(r.integer(tok[2]));
        const std::string& kind = tok[3];
        std::size_t next = 4;
        auto vertex = [&](const std::string& s) {
            const auto v = r.integer(s);
            if (v == 0 || v > kMaxVertex) throw ParseError(r.line(), "vertex out of range: " + s);
            return static_cast<unsigned>(v - 1);
        };
        auto need = [&] {
            if (next >= tok.size()) throw ParseError(r.line(), "missing argument for " + kind);
            return tok[next++];
        };
        if (kind == "leaf") b.kind = BagKind::Leaf;
        else if (kind == "join") b.kind = BagKind::Join;
        else if (kind == "introduce-vertex" || kind == "forget") {
            b.kind = kind == "forget" ? BagKind::Forget : BagKind::IntroduceVertex;
            b.vertex = vertex(need());
        } else if (kind == "introduce-edge") {
            b.kind = BagKind::IntroduceEdge;
            const std::string e = need();
            const auto dash = e.find('-');
            if (dash == std::string::npos) throw ParseError(r.line(), "expected an edge 'u-v', got '" + e + "'");
            b.edge = ordered(vertex(e.substr(0, dash)), vertex(e.substr(dash + 1)));
        } else {
            throw ParseError(r.line(), "unknown bag kind '" + kind + "'");
        }
        std::string members;
        for (; next < tok.size(); ++next) members += tok[next];
        if (members.size() < 2 || members.front() != '{' || members.back() != '}')
            throw ParseError(r.line(), "expected bag members '{v1,v2,...}'");
        std::stringstream ss(members.substr(1, members.size() - 2));
        for (std::string item; std::getline(ss, item, ',');)
            if (!item.empty()) b.members.push_back(vertex(item));
        std::sort(b.members.begin(), b.members.end());
        td.bags.push_back(std::move(b));
    }
    if (td.bags.empty()) throw ParseError(r.line() + 1, "no bags");
    return td;
}

NiceTreeDecomposition parse_tree_decomposition(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_tree_decomposition(in);
}

std::string format_tree_decomposition(const NiceTreeDecomposition& td) {
    std::ostringstream out;
    for (const auto& b : td.bags) {
        out << "bag " << b.id << ' ';
        if (b.parent) out << *b.parent;
        else out << '-';
        out << ' ' << kind_name(b.kind);
        if (b.kind == BagKind::IntroduceVertex || b.kind == BagKind::Forget) out << ' ' << b.vertex + 1;
        if (b.kind == BagKind::IntroduceEdge) out << ' ' << b.edge.first + 1 << '-' << b.edge.second + 1;
        out << " {";
        for (std::size_t i = 0; i < b.members.size(); ++i) out << (i ? "," : "") << b.members[i] + 1;
        out << "}\n";
    }
    return out.str();
}

namespace {

/// Builds a decomposition bottom-up; each step's bag becomes the previous one's parent.
class DecompositionBuilder {
public:
    unsigned leaf() { return add(BagKind::Leaf, {}, 0, {}); }
    unsigned introduce(unsigned child, unsigned v) {
        auto m = members(child);
        m.push_back(v);
        std::sort(m.begin(), m.end());
        return attach(child, add(BagKind::IntroduceVertex, m, v, {}));
    }
    unsigned forget(unsigned child, unsigned v) {
        auto m = members(child);
        std::erase(m, v);
        return attach(child, add(BagKind::Forget, m, v, {}));
    }
    unsigned edge(unsigned child, unsigned u, unsigned v) {
        return attach(child, add(BagKind::IntroduceEdge, members(child), 0, ordered(u, v)));
    }
    unsigned join(unsigned a, unsigned b) {
        const unsigned id = add(BagKind::Join, members(a), 0, {});
        attach(a, id);
        return attach(b, id);
    }
    NiceTreeDecomposition take() { return std::move(td_); }

private:
    unsigned add(BagKind kind, std::vector<unsigned> m, unsigned v, std::pair<unsigned, unsigned> e) {
        Bag b;
        b.id = static_cast<unsigned>(td_.bags.size()) + 1;
        b.kind = kind;
        b.vertex = v;
        b.edge = e;
        b.members = std::move(m);
        td_.bags.push_back(std::move(b));
        return td_.bags.back().id;
    }
    unsigned attach(unsigned child, unsigned parent) {
        td_.bags[child - 1].parent = parent;
        return parent;
    }
    std::vector<unsigned> members(unsigned id) const { return td_.bags[id - 1].members; }
    NiceTreeDecomposition td_;
};

Graph undirected(unsigned n, std::vector<std::pair<unsigned, unsigned>> edges) {
    Graph g;
    g.n = n;
    g.edges = std::move(edges);
    return g;
}

}  // namespace

std::pair<Graph, NiceTreeDecomposition> c4_join_fixture() {
    // vertices 0..3 on the cycle 0-1-2-3-0; the join bag is {0, 2}
    DecompositionBuilder bld;
    auto half = [&](unsigned mid) {
        unsigned x = bld.introduce(bld.introduce(bld.leaf(), 0), 2);
        x = bld.introduce(x, mid);
        x = bld.edge(x, 0, mid);
        x = bld.edge(x, mid, 2);
        return bld.forget(x, mid);
    };
    const unsigned a = half(1), b = half(3);
    bld.forget(bld.forget(bld.join(a, b), 0), 2);
    return {undirected(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}}), bld.take()};
}

std::pair<Graph, NiceTreeDecomposition> k4_join_fixture() {
    DecompositionBuilder bld;
    auto half = [&](const std::vector<std::pair<unsigned, unsigned>>& edges) {
        unsigned x = bld.leaf();
        for (unsigned v = 0; v < 4; ++v) x = bld.introduce(x, v);
        for (auto [u, v] : edges) x = bld.edge(x, u, v);
        return x;
    };
    const unsigned a = half({{0, 1}, {2, 3}, {0, 2}});
    const unsigned b = half({{1, 3}, {0, 3}, {1, 2}});
    unsigned x = bld.join(a, b);
    for (unsigned v = 4; v-- > 0;) x = bld.forget(x, v);
    return {undirected(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}), bld.take()};
}

std::vector<std::uint64_t> default_weights(const Graph& g, Rng& rng) {
    std::vector<std::uint64_t> w(g.edges.size());
    const std::int64_t top = std::max<std::int64_t>(1, std::int64_t{g.n} * g.n);
    for (auto& x : w) x = static_cast<std::uint64_t>(rng.range(1, top));
    return w;
}

std::size_t DpTables::entries() const {
    std::size_t n = 0;
    for (const auto& t : odd) n += t.size();
    return n;
}

namespace {

/// Edge indices introduced in the subtree of each bag, and the vertices of its bags.
struct Subtrees {
    std::vector<std::vector<std::size_t>> edges;
    std::vector<std::uint64_t> vertices;
};

Subtrees subtrees(const Graph& g, const NiceTreeDecomposition& td) {
    Subtrees s;
    s.edges.resize(td.bags.size());
    s.vertices.assign(td.bags.size(), 0);
    std::map<std::pair<unsigned, unsigned>, std::size_t> edge_index;
    for (std::size_t e = 0; e < g.edges.size(); ++e) edge_index[ordered(g.edges[e].first, g.edges[e].second)] = e;
    for (std::size_t i = 0; i < td.bags.size(); ++i) {
        // charge bag i's own contribution to it and all its ancestors
        std::uint64_t own = 0;
        for (unsigned v : td.bags[i].members) own |= std::uint64_t{1} << v;
        for (std::size_t cur = i;;) {
            s.vertices[cur] |= own;
            if (td.bags[i].kind == BagKind::IntroduceEdge) s.edges[cur].push_back(edge_index.at(td.bags[i].edge));
            if (!td.bags[cur].parent) break;
            cur = td.index_of(*td.bags[cur].parent);
        }
    }
    for (auto& e : s.edges) std::sort(e.begin(), e.end());
    return s;
}

/// Position of each bag member, or -1.
std::vector<int> positions(const Bag& b, unsigned n) {
    std::vector<int> pos(n, -1);
    for (std::size_t i = 0; i < b.members.size(); ++i) pos[b.members[i]] = static_cast<int>(i);
    return pos;
}

bool is_forest(const Pairing& x, unsigned n) {
    std::vector<unsigned> parent(n);
    std::iota(parent.begin(), parent.end(), 0u);
    std::function<unsigned(unsigned)> find = [&](unsigned v) { return parent[v] == v ? v : parent[v] = find(parent[v]); };
    for (auto [u, v] : x) {
        const unsigned a = find(u), b = find(v);
        if (a == b) return false;
        parent[a] = b;
    }
    return true;
}

}  // namespace

DpTables bruteforce_tables(const Graph& g, const NiceTreeDecomposition& td, const std::vector<std::uint64_t>& weights) {
    td.validate(g);
    if (weights.size() != g.edges.size()) throw ShapeError("one weight per edge expected");
    const Subtrees sub = subtrees(g, td);
    DpTables out;
    out.odd.resize(td.bags.size());
    for (std::size_t i = 0; i < td.bags.size(); ++i) {
        const Bag& bag = td.bags[i];
        const auto& es = sub.edges[i];
        if (es.size() > 20) throw TooLarge("bag " + std::to_string(bag.id) + " has more than 20 edges below it");
        if (bag.members.size() > kMaxFingerprintGround)
            throw TooLarge("bag " + std::to_string(bag.id) + " has more than 8 vertices");
        const auto pos = positions(bag, g.n);
        std::map<TableKey, bool> parity;
        for (std::uint64_t sel = 0; sel < (std::uint64_t{1} << es.size()); ++sel) {
            Pairing x;
            std::uint64_t w = 0;
            std::vector<unsigned> deg(g.n);
            for (std::size_t k = 0; k < es.size(); ++k)
                if (sel >> k & 1) {
                    const auto [u, v] = g.edges[es[k]];
                    x.emplace_back(std::min(u, v), std::max(u, v));
                    w += weights[es[k]];
                    ++deg[u];
                    ++deg[v];
                }
            bool ok = true;
            Fingerprint f;
            f.d.assign(bag.members.size(), 0);
            for (unsigned v = 0; v < g.n && ok; ++v) {
                if (!(sub.vertices[i] >> v & 1)) continue;
                if (pos[v] < 0) ok = deg[v] == 2;
                else if (deg[v] > 2) ok = false;
                else f.d[static_cast<std::size_t>(pos[v])] = static_cast<std::uint8_t>(deg[v]);
            }
            if (!ok) continue;
            const auto ones = f.ones();
            // partial solutions with open ends must be cycle-free
            if (!ones.empty() && !is_forest(x, g.n)) continue;
            for (const auto& b : basis_matchings(ones)) {
                Pairing m;
                for (auto [p, r] : b.edges) m.emplace_back(bag.members[p], bag.members[r]);
                if (!is_single_cycle(x, m)) continue;
                f.m = b.edges;
                auto& slot = parity[{f.code(), w}];
                slot = !slot;
            }
        }
        for (const auto& [k, odd] : parity)
            if (odd) out.odd[i].push_back(k);
    }
    return out;
}

JoinReport verify_join(const Graph& g, const NiceTreeDecomposition& td, const std::vector<std::uint64_t>& weights) {
    const DpTables t = bruteforce_tables(g, td, weights);
    JoinReport rep;
    for (std::size_t i = 0; i < td.bags.size(); ++i) {
        if (td.bags[i].kind != BagKind::Join) continue;
        ++rep.joins;
        const auto ch = td.children(i);
        const unsigned q = static_cast<unsigned>(td.bags[i].members.size());
        // complement of each child entry's basis matching within its own d^{-1}(1)
        auto complemented = [&](const TableKey& k) {
            Fingerprint f = Fingerprint::decode(k.fingerprint, q);
            const auto ones = f.ones();
            for (const auto& b : basis_matchings(ones))
                if (b.edges == f.m) {
                    f.m = basis_matching(ones, basis_complement(ones.size(), b.a));
                    return f;
                }
            throw InvalidArgument("table entry is not indexed by a basis matching");
        };
        std::map<TableKey, bool> rhs;
        for (const auto& k1 : t.odd[ch[0]]) {
            const Fingerprint f1 = complemented(k1);
            for (const auto& k2 : t.odd[ch[1]]) {
                const Fingerprint f2 = complemented(k2);
                Fingerprint f;
                f.d.resize(q);
                bool ok = true;
                for (unsigned v = 0; v < q && ok; ++v) {
                    const unsigned s = f1.d[v] + f2.d[v];
                    ok = s <= 2;
                    f.d[v] = static_cast<std::uint8_t>(s);
                }
                if (!ok) continue;
                for (const auto& b : basis_matchings(f.ones())) {
                    if (!is_single_cycle(f1.m, f2.m, b.edges)) continue;
                    f.m = b.edges;
                    auto& slot = rhs[{f.code(), k1.weight + k2.weight}];
                    slot = !slot;
                }
            }
        }
        std::vector<TableKey> odd_rhs;
        for (const auto& [k, odd] : rhs)
            if (odd) odd_rhs.push_back(k);
        const auto& lhs = t.odd[i];
        rep.entries_checked += std::max(lhs.size(), odd_rhs.size());
        if (lhs != odd_rhs && rep.ok) {
            std::vector<TableKey> diff;
            std::set_symmetric_difference(lhs.begin(), lhs.end(), odd_rhs.begin(), odd_rhs.end(),
                                          std::back_inserter(diff));
            rep.ok = false;
            const TableKey& k = diff.front();
            rep.counterexample = JoinReport::Counterexample{
                td.bags[i].id, Fingerprint::decode(k.fingerprint, q), k.weight,
                std::binary_search(lhs.begin(), lhs.end(), k)};
        }
    }
    return rep;
}

}  // namespace kronscale
