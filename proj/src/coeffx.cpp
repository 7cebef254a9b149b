/**
 * @file coeffx.cpp
 * @brief Direct subset DP and the three-layer tripartition extraction.
 */
#include "kronscale/coeffx.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <unordered_map>
#include <unordered_set>

namespace kronscale {

namespace {

constexpr unsigned kMaxDirectVars = 24;

Degree sat_add(Degree a, Degree b) { return a > kDegreeTop - b ? kDegreeTop : a + b; }

/// Circuit with binary products only (rewrites n-ary products as chains).
const Circuit& binary_form(const Circuit& c, std::optional<Circuit>& holder) {
    for (GateId g = 0; g < c.num_gates(); ++g)
        if (c.kind(g) == GateKind::Mul && c.args(g).size() != 2) {
            holder = normalize_binary(c);
            return *holder;
        }
    return c;
}

/// Position of each input (by input index) among the extraction variables, or -1.
std::vector<int> variable_positions(const Circuit& c, const std::vector<std::string>& vars) {
    std::unordered_map<std::string, int> pos;
    for (std::size_t i = 0; i < vars.size(); ++i)
        if (!pos.emplace(vars[i], static_cast<int>(i)).second)
            throw InvalidArgument("extraction variable '" + vars[i] + "' listed twice");
    std::vector<int> out(c.num_inputs(), -1);
    for (std::size_t i = 0; i < c.num_inputs(); ++i)
        if (auto it = pos.find(c.input_names()[i]); it != pos.end()) out[i] = it->second;
    return out;
}

/// Calls f(T) for every T subset of S with |T| <= k (T = 0 included).
template <class F>
void for_each_small_subset(Mask s, Degree k, F&& f) {
    f(Mask{0});
    if (k == 0) return;
    // iterate by picking bits in increasing order
    std::vector<Mask> bits;
    for (Mask m = s; m; m &= m - 1) bits.push_back(m & (~m + 1));
    std::function<void(std::size_t, Mask, Degree)> rec = [&](std::size_t from, Mask acc, Degree left) {
        for (std::size_t i = from; i < bits.size(); ++i) {
            Mask t = acc | bits[i];
            f(t);
            if (left > 1) rec(i + 1, t, left - 1);
        }
    };
    if (k == 1) {
        for (Mask b : bits) f(b);
        return;
    }
    rec(0, 0, k);
}

// ------------------------------------------------------------ direct DP

struct CircuitBackend {
    using V = GateId;
    static constexpr V none = kNoGate;
    Circuit& out;
    std::vector<GateId> other_inputs;  // by original input index (kNoGate for variables)

    static bool is_none(V v) { return v == kNoGate; }
    V one() { return out.one(); }
    V constant(std::uint64_t v) { return v == 0 ? kNoGate : out.constant(v); }
    V input(std::size_t idx) { return other_inputs[idx]; }
    V sum(std::span<const V> t) { return out.sum_or_none(t); }
    V mul(V a, V b) { return out.mul_or_none(a, b); }
};

struct NumericBackend {
    using V = std::uint64_t;
    static constexpr V none = 0;
    const Field& f;
    std::vector<std::uint64_t> other_values;

    static bool is_none(V v) { return v == 0; }
    V one() { return 1; }
    V constant(std::uint64_t v) { return v; }
    V input(std::size_t idx) { return other_values[idx]; }
    V sum(std::span<const V> t) {
        V acc = 0;
        for (V v : t) acc = f.add(acc, v);
        return acc;
    }
    V mul(V a, V b) { return f.mul(a, b); }
};

template <class B>
std::vector<typename B::V> direct_dp(const Circuit& c, const std::vector<int>& xpos, unsigned n, Degree max_skew,
                                     B& be, std::size_t* entries) {
    using V = typename B::V;
    const std::size_t G = c.num_gates();
    const Mask full = low_bits(n);
    const std::size_t width = std::size_t{1} << n;
    std::vector<Degree> deg(G, 0);
    std::vector<std::vector<V>> tab(G);
    std::vector<GateId> last_use(G, 0);
    for (GateId g = 0; g < G; ++g)
        for (GateId a : c.args(g)) last_use[a] = g;
    for (GateId o : c.outputs()) last_use[o] = static_cast<GateId>(G);

    auto at = [&](GateId g, Mask m) -> V {
        const auto& t = tab[g];
        if (t.size() == 1) return m == 0 ? t[0] : B::none;
        return t[m];
    };
    std::vector<V> terms;
    for (GateId g = 0; g < G; ++g) {
        auto args = c.args(g);
        switch (c.kind(g)) {
            case GateKind::Input: {
                const std::size_t idx = c.input_index(g);
                if (xpos[idx] >= 0) {
                    deg[g] = 1;
                    tab[g].assign(width, B::none);
                    tab[g][Mask{1} << xpos[idx]] = be.one();
                } else {
                    tab[g] = {be.input(idx)};
                }
                break;
            }
            case GateKind::Const:
                tab[g] = {be.constant(c.const_value(g))};
                break;
            case GateKind::Add: {
                for (GateId a : args) deg[g] = std::max(deg[g], deg[a]);
                if (deg[g] == 0) {
                    terms.clear();
                    for (GateId a : args) terms.push_back(tab[a][0]);
                    tab[g] = {be.sum(terms)};
                    break;
                }
                tab[g].assign(width, B::none);
                for (Mask s = 0; s <= full; ++s) {
                    if (static_cast<Degree>(std::popcount(s)) > deg[g]) continue;
                    terms.clear();
                    for (GateId a : args)
                        if (V v = at(a, s); !B::is_none(v)) terms.push_back(v);
                    tab[g][s] = be.sum(terms);
                }
                break;
            }
            case GateKind::Mul: {
                GateId lo = args[0], hi = args[1];
                if (deg[lo] > deg[hi]) std::swap(lo, hi);
                if (deg[lo] > max_skew)
                    throw NotSkew("product of two factors of degree " + std::to_string(deg[lo]) + " and " +
                                  std::to_string(deg[hi]) + " exceeds skewness " + std::to_string(max_skew));
                deg[g] = sat_add(deg[lo], deg[hi]);
                if (deg[g] == 0) {
                    tab[g] = {be.mul(tab[lo][0], tab[hi][0])};
                    break;
                }
                tab[g].assign(width, B::none);
                for (Mask s = 0; s <= full; ++s) {
                    if (static_cast<Degree>(std::popcount(s)) > deg[g]) continue;
                    terms.clear();
                    for_each_small_subset(s, deg[lo], [&](Mask t) {
                        V a = at(lo, t);
                        if (B::is_none(a)) return;
                        V b = at(hi, s & ~t);
                        if (B::is_none(b)) return;
                        terms.push_back(be.mul(a, b));
                    });
                    tab[g][s] = be.sum(terms);
                }
                break;
            }
        }
        if (entries) *entries += tab[g].size();
        for (GateId a : args)
            if (last_use[a] == g) std::vector<V>().swap(tab[a]);
    }
    std::vector<V> out;
    for (GateId o : c.outputs()) out.push_back(at(o, full));
    return out;
}

}  // namespace

std::vector<Degree> variable_degrees(const Circuit& c, const std::vector<std::string>& vars) {
    auto xpos = variable_positions(c, vars);
    std::vector<Degree> deg(c.num_gates(), 0);
    for (GateId g = 0; g < c.num_gates(); ++g) {
        switch (c.kind(g)) {
            case GateKind::Input:
                deg[g] = xpos[c.input_index(g)] >= 0 ? 1 : 0;
                break;
            case GateKind::Const:
                break;
            case GateKind::Add:
                for (GateId a : c.args(g)) deg[g] = std::max(deg[g], deg[a]);
                break;
            case GateKind::Mul:
                for (GateId a : c.args(g)) deg[g] = sat_add(deg[g], deg[a]);
                break;
        }
    }
    return deg;
}

std::vector<std::string> select_variables(const Circuit& c, const std::string& prefix) {
    std::vector<std::string> out;
    for (const auto& name : c.input_names()) {
        auto colon = name.find(':');
        std::string_view head = colon == std::string::npos ? std::string_view(name) : std::string_view(name).substr(0, colon);
        if (head == prefix || name == prefix) out.push_back(name);
    }
    return out;
}

Circuit extract_coeff_direct(const Circuit& c0, const std::vector<std::string>& vars, const ExtractionOptions& opt,
                             ExtractionStats* stats) {
    if (vars.size() > kMaxDirectVars)
        throw InvalidArgument("direct extraction supports at most " + std::to_string(kMaxDirectVars) + " variables");
    std::optional<Circuit> holder;
    const Circuit& c = binary_form(c0, holder);
    auto xpos = variable_positions(c, vars);
    Circuit out(c.spec());
    CircuitBackend be{out, {}};
    be.other_inputs.assign(c.num_inputs(), kNoGate);
    for (std::size_t i = 0; i < c.num_inputs(); ++i)
        if (xpos[i] < 0) be.other_inputs[i] = out.input(c.input_names()[i]);
    std::size_t entries = 0;
    auto tops = direct_dp(c, xpos, static_cast<unsigned>(vars.size()), opt.max_skew, be, &entries);
    for (GateId t : tops) out.add_output(out.or_zero(t));
    if (stats) {
        stats->n = static_cast<unsigned>(vars.size());
        stats->table_entries = entries;
    }
    return eliminate_dead(out);
}

std::vector<std::uint64_t> coeff_direct_value(const Circuit& c0, const std::vector<std::string>& vars,
                                              const Assignment& others, Degree max_skew) {
    if (vars.size() > kMaxDirectVars)
        throw InvalidArgument("direct extraction supports at most " + std::to_string(kMaxDirectVars) + " variables");
    std::optional<Circuit> holder;
    const Circuit& c = binary_form(c0, holder);
    auto xpos = variable_positions(c, vars);
    NumericBackend be{c.field(), {}};
    be.other_values.assign(c.num_inputs(), 0);
    for (std::size_t i = 0; i < c.num_inputs(); ++i)
        if (xpos[i] < 0) {
            auto it = others.find(c.input_names()[i]);
            if (it == others.end()) throw UnassignedInput("no value for input '" + c.input_names()[i] + "'");
            if (!c.field().valid(it->second)) throw InvalidArgument("value of '" + it->first + "' is not canonical");
            be.other_values[i] = it->second;
        }
    return direct_dp(c, xpos, static_cast<unsigned>(vars.size()), max_skew, be, nullptr);
}

// ------------------------------------------------------------ padding

PaddedCircuit pad_degree(const Circuit& c, const std::vector<std::string>& vars) {
    PaddedCircuit p;
    p.circuit = c;
    p.vars = vars;
    unsigned n = static_cast<unsigned>(vars.size());
    unsigned target = std::max(9u, (n + 2) / 3 * 3);
    std::vector<GateId> outs = c.outputs();
    unsigned serial = 1;
    for (unsigned k = n; k < target; ++k) {
        std::string name;
        do name = "v:pad" + std::to_string(serial++);
        while (p.circuit.find_input(name) != kNoGate);
        GateId v = p.circuit.input(name);
        p.vars.push_back(name);
        for (GateId& o : outs) o = p.circuit.mul(v, o);
    }
    p.circuit.set_outputs(outs);
    p.n = target;
    return p;
}

// ------------------------------------------------------------ layered form

LayeredCircuit layer_circuit(const Circuit& c0, const std::vector<std::string>& vars, Degree max_skew) {
    if (c0.outputs().size() != 1) throw SingleOutputRequired("layering needs a single-output circuit");
    std::optional<Circuit> holder;
    const Circuit& c = binary_form(c0, holder);
    auto xpos = variable_positions(c, vars);
    const auto xdeg = variable_degrees(c, vars);
    const unsigned n = static_cast<unsigned>(vars.size());

    LayeredCircuit L;
    L.n = n;
    L.circuit = Circuit(c.spec());
    Circuit& h = L.circuit;
    auto setdeg = [&](GateId g, Degree d) {
        if (g == kNoGate) return g;
        if (g >= L.degree.size()) L.degree.resize(g + 1, kDegreeTop);
        L.degree[g] = d;
        return g;
    };
    for (const auto& v : vars) L.x.push_back(setdeg(h.input(v), 1));
    for (std::size_t i = 0; i < c.num_inputs(); ++i)
        if (xpos[i] < 0) setdeg(h.input(c.input_names()[i]), 0);

    // comp[g][k]: degree-k part of g (multilinear-relevant); small[g]: coefficients of
    // x^T (0 < |T| <= q) as degree-0 gates, for gates of degree <= q.
    std::vector<std::vector<GateId>> comp(c.num_gates());
    std::vector<std::map<Mask, GateId>> small(c.num_gates());
    auto comp_at = [&](GateId g, Degree k) { return k < comp[g].size() ? comp[g][k] : kNoGate; };
    auto chain = [&](Mask t, GateId base, Degree d) {
        for (Mask m = t; m; m &= m - 1) {
            base = setdeg(h.mul(L.x[std::countr_zero(m)], base), ++d);
        }
        return base;
    };
    std::vector<GateId> terms;
    for (GateId g = 0; g < c.num_gates(); ++g) {
        const Degree top = std::min<Degree>(n, xdeg[g]);
        comp[g].assign(top + 1, kNoGate);
        auto args = c.args(g);
        switch (c.kind(g)) {
            case GateKind::Input: {
                const int p = xpos[c.input_index(g)];
                if (p >= 0) {
                    if (n >= 1) comp[g][1] = L.x[p];
                    small[g][Mask{1} << p] = setdeg(h.one(), 0);
                } else {
                    comp[g][0] = setdeg(h.input(c.input_name(g)), 0);
                }
                break;
            }
            case GateKind::Const:
                comp[g][0] = c.const_value(g) == 0 ? kNoGate : setdeg(h.constant(c.const_value(g)), 0);
                break;
            case GateKind::Add: {
                for (Degree k = 0; k <= top; ++k) {
                    terms.clear();
                    for (GateId a : args) terms.push_back(comp_at(a, k));
                    comp[g][k] = setdeg(h.sum_or_none(terms), k);
                }
                if (xdeg[g] >= 1 && xdeg[g] <= max_skew) {
                    std::map<Mask, std::vector<GateId>> acc;
                    for (GateId a : args)
                        for (const auto& [t, v] : small[a]) acc[t].push_back(v);
                    for (auto& [t, vs] : acc)
                        if (GateId s = h.sum_or_none(vs); s != kNoGate) small[g][t] = setdeg(s, 0);
                }
                break;
            }
            case GateKind::Mul: {
                GateId lo = args[0], hi = args[1];
                if (xdeg[lo] > xdeg[hi]) std::swap(lo, hi);
                if (xdeg[lo] > max_skew)
                    throw NotSkew("product of two factors of degree " + std::to_string(xdeg[lo]) + " and " +
                                  std::to_string(xdeg[hi]) + " exceeds skewness " + std::to_string(max_skew));
                for (Degree k = 0; k <= top; ++k) {
                    terms.clear();
                    if (GateId t0 = h.mul_or_none(comp_at(lo, 0), comp_at(hi, k)); t0 != kNoGate)
                        terms.push_back(setdeg(t0, k));
                    for (const auto& [t, a] : small[lo]) {
                        const Degree j = static_cast<Degree>(std::popcount(t));
                        if (j > k) continue;
                        GateId base = comp_at(hi, k - j);
                        if (base == kNoGate) continue;
                        terms.push_back(setdeg(h.mul(a, chain(t, base, k - j)), k));
                    }
                    comp[g][k] = setdeg(h.sum_or_none(terms), k);
                }
                if (xdeg[g] >= 1 && xdeg[g] <= max_skew) {
                    auto ext = [&](GateId a) {
                        std::vector<std::pair<Mask, GateId>> e;
                        if (GateId z = comp_at(a, 0); z != kNoGate) e.emplace_back(0, z);
                        for (const auto& kv : small[a]) e.push_back(kv);
                        return e;
                    };
                    std::map<Mask, std::vector<GateId>> acc;
                    for (const auto& [ta, va] : ext(args[0]))
                        for (const auto& [tb, vb] : ext(args[1]))
                            if ((ta & tb) == 0 && (ta | tb) != 0) acc[ta | tb].push_back(setdeg(h.mul(va, vb), 0));
                    for (auto& [t, vs] : acc)
                        if (GateId s = h.sum_or_none(vs); s != kNoGate) small[g][t] = setdeg(s, 0);
                }
                break;
            }
        }
    }
    L.output = comp_at(c.outputs()[0], n);
    h.add_output(h.or_zero(L.output));
    L.degree.resize(h.num_gates(), 0);
    return L;
}

// ------------------------------------------------------------ tripartition

namespace {

/// Colex ranking of the k-subsets of [n], per k.
class SubsetIndex {
public:
    explicit SubsetIndex(unsigned n) : n_(n) {
        for (unsigned i = 0; i <= 64; ++i) {
            binom_[i][0] = 1;
            for (unsigned j = 1; j <= i; ++j) binom_[i][j] = binom_[i - 1][j - 1] + binom_[i - 1][j];
        }
        // Colex order of k-subsets is increasing numeric order of their masks.
        masks_.resize(n + 1);
        for (Mask m = 0; m <= low_bits(n); ++m) {
            masks_[std::popcount(m)].push_back(m);
            if (m == low_bits(n)) break;
        }
    }
    std::size_t count(unsigned k) const { return k > n_ ? 0 : masks_[k].size(); }
    const std::vector<Mask>& masks(unsigned k) const { return masks_[k]; }
    std::size_t rank(Mask m) const {
        std::size_t r = 0;
        unsigned i = 0;
        for (; m; m &= m - 1) r += binom_[std::countr_zero(m)][++i];
        return r;
    }

private:
    unsigned n_;
    std::uint64_t binom_[65][65] = {};
    std::vector<std::vector<Mask>> masks_;
};

using Table = std::vector<GateId>;                // indexed by colex rank within a size
using LinearForm = std::map<GateId, Table>;       // cut gate -> coefficient table

}  // namespace

Circuit extract_coeff_tripartition(const Circuit& c, const std::vector<std::string>& vars, const ExtractionOptions& opt,
                                   ExtractionStats* stats) {
    if (c.outputs().size() != 1) throw SingleOutputRequired("tripartition extraction needs a single output");
    PaddedCircuit pc = pad_degree(c, vars);
    const unsigned n = pc.n, m = n / 3;
    if (n % 3 != 0 || n < 9) throw InternalError("padding did not produce n = 3m >= 9");
    LayeredCircuit L = layer_circuit(pc.circuit, pc.vars, opt.max_skew);
    const Circuit& h = L.circuit;
    const auto& deg = L.degree;

    Circuit out(c.spec());
    {
        auto xpos = variable_positions(c, vars);
        for (std::size_t i = 0; i < c.num_inputs(); ++i)
            if (xpos[i] < 0) out.input(c.input_names()[i]);
    }
    ExtractionStats st;
    st.n = n;
    if (L.output == kNoGate) {
        out.add_output(out.zero());
        if (stats) *stats = st;
        return out;
    }

    // Gates that can reach the output.
    std::vector<char> live(h.num_gates(), 0);
    live[L.output] = 1;
    for (GateId g = L.output + 1; g-- > 0;)
        if (live[g])
            for (GateId a : h.args(g)) live[a] = 1;

    // Degree-0 gates are coefficients: copy them into the result.
    std::vector<GateId> map0(h.num_gates(), kNoGate);
    std::vector<GateId> buf;
    for (GateId g = 0; g < h.num_gates(); ++g) {
        if (!live[g] || deg[g] != 0) continue;
        switch (h.kind(g)) {
            case GateKind::Input:
                map0[g] = out.input(h.input_name(g));
                break;
            case GateKind::Const:
                map0[g] = out.constant(h.const_value(g));
                break;
            case GateKind::Add:
                buf.clear();
                for (GateId a : h.args(g)) buf.push_back(map0[a]);
                map0[g] = out.sum_or_none(buf);
                break;
            case GateKind::Mul:
                map0[g] = out.mul_or_none(map0[h.args(g)[0]], map0[h.args(g)[1]]);
                break;
        }
    }

    SubsetIndex idx(n);
    auto split = [&](GateId g, GateId& lo, GateId& hi) {
        auto a = h.args(g);
        lo = a[0];
        hi = a[1];
        if (deg[lo] > deg[hi]) std::swap(lo, hi);
        if (deg[lo] > 1) throw InternalError("layered circuit has a product of two non-linear factors");
    };

    // Bottom layer: multilinear tables of gates of degree 1..m.
    std::vector<Table> F(h.num_gates());
    auto f_at = [&](GateId g, Mask s) -> GateId {
        if (deg[g] == 0) return s == 0 ? map0[g] : kNoGate;
        return F[g][idx.rank(s)];
    };
    for (GateId g = 0; g < h.num_gates(); ++g) {
        if (!live[g] || deg[g] == 0 || deg[g] > m) continue;
        const unsigned k = static_cast<unsigned>(deg[g]);
        Table& t = F[g];
        t.assign(idx.count(k), kNoGate);
        st.table_entries += t.size();
        switch (h.kind(g)) {
            case GateKind::Input: {
                auto it = std::find(L.x.begin(), L.x.end(), g);
                t[idx.rank(Mask{1} << (it - L.x.begin()))] = out.one();
                break;
            }
            case GateKind::Const:
                throw InternalError("constant of positive degree");
            case GateKind::Add:
                for (std::size_t r = 0; r < t.size(); ++r) {
                    buf.clear();
                    for (GateId a : h.args(g)) buf.push_back(F[a][r]);
                    t[r] = out.sum_or_none(buf);
                }
                break;
            case GateKind::Mul: {
                GateId lo, hi;
                split(g, lo, hi);
                for (std::size_t r = 0; r < t.size(); ++r) {
                    const Mask s = idx.masks(k)[r];
                    if (deg[lo] == 0) {
                        t[r] = out.mul_or_none(map0[lo], f_at(hi, s));
                        continue;
                    }
                    buf.clear();
                    for (Mask b = s; b; b &= b - 1) {
                        const Mask bit = b & (~b + 1);
                        buf.push_back(out.mul_or_none(F[lo][idx.rank(bit)], f_at(hi, s & ~bit)));
                    }
                    t[r] = out.sum_or_none(buf);
                }
                break;
            }
        }
    }

    // Middle and top layers: linear forms in the cut gates of degree `base`.
    auto linear_layer = [&](unsigned base, unsigned top) {
        std::vector<LinearForm> lin(h.num_gates());
        auto lin_of = [&](GateId g) -> const LinearForm& {
            if (deg[g] == base && lin[g].empty()) lin[g][g] = Table{out.one()};
            return lin[g];
        };
        for (GateId g = 0; g < h.num_gates(); ++g) {
            if (!live[g] || deg[g] <= base || deg[g] > top) continue;
            const unsigned e = static_cast<unsigned>(deg[g]) - base;
            LinearForm& res = lin[g];
            if (h.kind(g) == GateKind::Add) {
                std::map<GateId, std::vector<Table>> acc;
                for (GateId a : h.args(g))
                    for (const auto& [cut, t] : lin_of(a)) acc[cut].push_back(t);
                for (auto& [cut, ts] : acc) {
                    Table t(idx.count(e), kNoGate);
                    for (std::size_t r = 0; r < t.size(); ++r) {
                        buf.clear();
                        for (const auto& x : ts) buf.push_back(x[r]);
                        t[r] = out.sum_or_none(buf);
                    }
                    res.emplace(cut, std::move(t));
                }
            } else if (h.kind(g) == GateKind::Mul) {
                GateId lo, hi;
                split(g, lo, hi);
                if (deg[hi] < base) throw InternalError("cut layer is bypassed by a product");
                for (const auto& [cut, th] : lin_of(hi)) {
                    Table t(idx.count(e), kNoGate);
                    for (std::size_t r = 0; r < t.size(); ++r) {
                        if (deg[lo] == 0) {
                            t[r] = out.mul_or_none(map0[lo], th[r]);
                            continue;
                        }
                        const Mask s = idx.masks(e)[r];
                        buf.clear();
                        for (Mask b = s; b; b &= b - 1) {
                            const Mask bit = b & (~b + 1);
                            buf.push_back(out.mul_or_none(F[lo][idx.rank(bit)], th[idx.rank(s & ~bit)]));
                        }
                        t[r] = out.sum_or_none(buf);
                    }
                    res.emplace(cut, std::move(t));
                }
            } else {
                throw InternalError("input or constant above the cut");
            }
            for (const auto& [cut, t] : res) st.table_entries += t.size();
        }
        return lin;
    };
    auto linY = linear_layer(m, 2 * m);
    auto linZ = linear_layer(2 * m, 3 * m);
    const LinearForm& top = linZ[L.output];

    // Recombine: sum over (y, z) of P_m(f_y, g_{y,z}, h_z).
    const unsigned b = opt.b ? opt.b : 1;
    const unsigned g = opt.g ? opt.g : 1;
    PPlan plan = plan_P(m, b, g, opt.provider ? opt.provider : trivial_provider(c.spec()));
    PreparedDecomposition pd(plan.dec);
    std::vector<GateId> parts;
    std::unordered_set<GateId> ys;
    std::size_t budget = opt.arc_budget;
    for (const auto& [z, hz] : top) {
        ++st.cut_z;
        for (const auto& [y, gyz] : linY[z]) {
            ys.insert(y);
            ++st.pairs;
            const Table& fy = F[y];
            auto bind = [&](int side, Mask s) -> GateId {
                const std::size_t r = idx.rank(s);
                return side == 0 ? fy[r] : side == 1 ? gyz[r] : hz[r];
            };
            const std::size_t before = out.size();
            GateId p = build_P_into(out, plan.sd, pd, bind, nullptr, budget);
            budget -= std::min(budget, out.size() - before);
            ++st.p_copies;
            if (p != kNoGate) parts.push_back(p);
        }
    }
    st.cut_y = ys.size();
    out.add_output(out.or_zero(out.sum_or_none(parts)));
    if (stats) *stats = st;
    return eliminate_dead(out);
}

Circuit extract_coeff(const Circuit& c, const std::vector<std::string>& vars, ExtractionMethod method,
                      const ExtractionOptions& opt, ExtractionStats* stats) {
    return method == ExtractionMethod::Direct ? extract_coeff_direct(c, vars, opt, stats)
                                              : extract_coeff_tripartition(c, vars, opt, stats);
}

}  // namespace kronscale
