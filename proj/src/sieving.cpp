/**
 * @file sieving.cpp
 * @brief Determinantal/odd sieving and the detection applications built on
 *        the clow-sequence determinant circuit.
 */
#include "kronscale/sieving.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "kronscale/errors.hpp"
#include "line_reader.hpp"

namespace kronscale {

namespace {

void require_char2(const FieldSpec& spec, const char* what) {
    if (!spec.is_char2())
        throw CharacteristicError(std::string(what) + " needs a characteristic-2 field, got " + spec.to_string());
}

bool is_one(const Circuit& c, GateId g) { return c.kind(g) == GateKind::Const && c.const_value(g) == 1; }

/// Product that elides a constant-one factor.
GateId times(Circuit& c, GateId coeff, GateId g) { return is_one(c, coeff) ? g : c.mul(coeff, g); }

/// Replaces each input in `xvars` by `make(i, x_i)` while copying `c`.
template <class Make>
Circuit substitute(const Circuit& c, const std::vector<std::string>& xvars, const SieveMatrix& a, Make&& make) {
    if (xvars.size() != a.cols())
        throw ShapeError("sieve matrix has " + std::to_string(a.cols()) + " columns for " +
                         std::to_string(xvars.size()) + " variables");
    if (c.spec() != a.spec) throw FieldMismatch("sieve matrix and circuit use different fields");
    Circuit out(c.spec());
    std::vector<GateId> y;
    for (const auto& name : sieve_variables(static_cast<unsigned>(a.rows()))) y.push_back(out.input(name));
    // Keep the original inputs first so their order survives.
    for (const auto& name : c.input_names()) out.input(name);
    std::unordered_map<std::string, std::size_t> column;
    for (std::size_t i = 0; i < xvars.size(); ++i)
        if (!column.emplace(xvars[i], i).second) throw InvalidArgument("repeated sieve variable " + xvars[i]);
    auto bind = [&](const std::string& name) -> GateId {
        GateId in = out.input(name);
        auto it = column.find(name);
        if (it == column.end()) return in;
        std::vector<GateId> terms;
        for (std::size_t j = 0; j < a.rows(); ++j)
            if (std::uint64_t v = a.a.at(j, it->second)) terms.push_back(times(out, out.constant(v), y[j]));
        return make(out, it->second, in, out.sum_or_none(terms));
    };
    for (GateId o : inline_circuit(out, c, bind)) out.add_output(out.or_zero(o));
    return out;
}

SieveMethod resolve(SieveMethod m, std::size_t k) {
    if (m != SieveMethod::Auto) return m;
    return k <= kSieveDirectMaxK ? SieveMethod::Direct : SieveMethod::Tripartition;
}

/**
 * Runs the trials on a substituted circuit: every input other than the y
 * variables receives a fresh uniform value per trial; a nonzero coefficient
 * of y_1...y_k is a certificate.
 */
SieveResult run_trials(const Circuit& q, std::size_t k, Rng& rng, const SieveOptions& opt) {
    if (q.outputs().size() != 1) throw SingleOutputRequired("sieving expects a single-output circuit");
    const auto yvars = sieve_variables(static_cast<unsigned>(k));
    const SieveMethod method = resolve(opt.method, k);
    std::optional<Circuit> compiled;
    if (method == SieveMethod::Tripartition) compiled = extract_coeff_tripartition(q, yvars, opt.extraction);
    const Field& f = q.field();
    std::unordered_set<std::string> ys(yvars.begin(), yvars.end());
    SieveResult res;
    for (unsigned t = 0; t < opt.trials; ++t) {
        Rng trial = rng.fork();
        Assignment values;
        for (const auto& name : q.input_names())
            if (!ys.count(name)) values[name] = f.random(trial);
        ++res.trials_run;
        std::uint64_t v = 0;
        if (compiled) {
            Assignment own;
            for (const auto& name : compiled->input_names()) own[name] = values.at(name);
            v = evaluate(*compiled, own)[0];
        } else {
            v = coeff_direct_value(q, yvars, values, opt.extraction.max_skew)[0];
        }
        if (v != 0) {
            res.found = true;
            res.hit_trial = t;
            break;
        }
    }
    return res;
}

Degree output_degree(const Circuit& c) {
    if (c.outputs().empty()) return 0;
    return formal_degrees(c)[c.outputs()[0]];
}

void merge(SieveResult& total, const SieveResult& part) {
    if (part.found && !total.found) {
        total.found = true;
        total.hit_trial = total.trials_run + *part.hit_trial;
    }
    total.trials_run += part.trials_run;
}

}  // namespace

FieldSpec default_sieve_field() { return FieldSpec::gf2(32); }

SieveMatrix vandermonde(unsigned k, unsigned n, const FieldSpec& spec, Rng& rng) {
    if (!spec.has_at_least(std::uint64_t{n} + 1))
        throw FieldTooSmall("Vandermonde matrix with " + std::to_string(n) + " distinct nonzero points needs |F| >= " +
                            std::to_string(n + 1));
    Field f(spec);
    std::vector<std::uint64_t> pts;
    std::unordered_set<std::uint64_t> used;
    while (pts.size() < n) {
        std::uint64_t p = f.random(rng, true);
        if (used.insert(p).second) pts.push_back(p);
    }
    SieveMatrix m{spec, Matrix(k, n)};
    for (unsigned j = 0; j < n; ++j) {
        std::uint64_t pw = 1;
        for (unsigned i = 0; i < k; ++i) {
            m.a.at(i, j) = pw;
            pw = f.mul(pw, pts[j]);
        }
    }
    return m;
}

SieveMethod parse_sieve_method(std::string_view text) {
    if (text == "auto") return SieveMethod::Auto;
    if (text == "direct") return SieveMethod::Direct;
    if (text == "tri" || text == "tripartition") return SieveMethod::Tripartition;
    throw InvalidArgument("unknown sieve method '" + std::string(text) + "' (expected auto|direct|tri)");
}

std::vector<std::string> sieve_variables(unsigned k) {
    std::vector<std::string> v;
    for (unsigned j = 0; j < k; ++j) v.push_back(subset_name('y', Mask{1} << j));
    return v;
}

Circuit det_substitute(const Circuit& c, const std::vector<std::string>& xvars, const SieveMatrix& a) {
    return substitute(c, xvars, a, [](Circuit& out, std::size_t, GateId x, GateId lin) {
        return out.mul_or_none(x, lin);
    });
}

Circuit odd_substitute(const Circuit& c, const std::vector<std::string>& xvars, const SieveMatrix& a) {
    return substitute(c, xvars, a, [](Circuit& out, std::size_t i, GateId x, GateId lin) {
        if (lin == kNoGate) return x;
        GateId p = out.input(tuple_name('p', {static_cast<int>(i + 1)}));
        return out.mul(x, out.add({out.one(), out.mul(p, lin)}));
    });
}

SieveResult det_sieve(const Circuit& c, const std::vector<std::string>& xvars, const SieveMatrix& a, Rng& rng,
                      const SieveOptions& opt) {
    require_char2(c.spec(), "determinantal sieving");
    if (!c.spec().has_at_least(2 * a.rows()))
        throw FieldTooSmall("determinantal sieving needs |F| >= 2k = " + std::to_string(2 * a.rows()));
    return run_trials(det_substitute(c, xvars, a), a.rows(), rng, opt);
}

SieveResult odd_sieve(const Circuit& c, const std::vector<std::string>& xvars, const SieveMatrix& a, Rng& rng,
                      const SieveOptions& opt) {
    require_char2(c.spec(), "odd sieving");
    const Degree d = output_degree(c);
    if (d == kDegreeTop || !c.spec().has_at_least(d + a.rows()))
        throw FieldTooSmall("odd sieving needs |F| >= deg + k");
    // Every y_j enters together with one factor z, so the coefficient of
    // y_1...y_k already has z-degree k; z itself is not materialized.
    return run_trials(odd_substitute(c, xvars, a), a.rows(), rng, opt);
}

// ------------------------------------------------------------ determinant

GateId mv_det_into(Circuit& c, const GateMatrix& m) {
    require_char2(c.spec(), "the clow-sequence determinant");
    const std::size_t n = m.size();
    for (const auto& row : m)
        if (row.size() != n) throw ShapeError("determinant of a non-square matrix");
    if (n == 0) return c.one();
    // Clow sequences: each clow starts at its head h, visits only vertices
    // above h, and returns to h; heads increase along the sequence.  In
    // characteristic 2 the sum over all clow sequences of total length n is
    // the determinant (the non-cycle-cover sequences cancel in pairs).
    //   closed[h+1] : sequences of the current length whose last head is h (slot 0: empty)
    //   open[h*n+v] : current clow with head h is at vertex v
    using Terms = std::vector<GateId>;
    std::vector<Terms> closed(n + 1), open(n * n);
    closed[0].push_back(c.one());
    for (std::size_t len = 0; len < n; ++len) {
        std::vector<Terms> nclosed(n + 1), nopen(n * n);
        GateId below = kNoGate;  // sequences whose last head is < h
        for (std::size_t h = 0; h < n; ++h) {
            GateId prev = c.sum_or_none(closed[h]);
            below = prev == kNoGate ? below : below == kNoGate ? prev : c.add({below, prev});
            if (below != kNoGate) open[h * n + h].push_back(below);
        }
        for (std::size_t h = 0; h < n; ++h)
            for (std::size_t v = h; v < n; ++v) {
                GateId g = c.sum_or_none(open[h * n + v]);
                if (g == kNoGate) continue;
                for (std::size_t w = h; w < n; ++w) {
                    const GateId e = m[v][w];
                    if (e == kNoGate) continue;
                    GateId t = times(c, e, g);
                    (w == h ? nclosed[h + 1] : nopen[h * n + w]).push_back(t);
                }
            }
        closed = std::move(nclosed);
        open = std::move(nopen);
    }
    Terms fin;
    for (std::size_t slot = 1; slot <= n; ++slot)
        if (GateId g = c.sum_or_none(closed[slot]); g != kNoGate) fin.push_back(g);
    return c.or_zero(c.sum_or_none(fin));
}

Circuit mv_det_circuit(unsigned k, const FieldSpec& spec) {
    require_char2(spec, "the clow-sequence determinant");
    Circuit c(spec);
    GateMatrix m(k, std::vector<GateId>(k));
    for (unsigned i = 0; i < k; ++i)
        for (unsigned j = 0; j < k; ++j) m[i][j] = c.input(tuple_name('a', {static_cast<int>(i + 1), static_cast<int>(j + 1)}));
    c.add_output(mv_det_into(c, m));
    return c;
}

// ------------------------------------------------------------ k-path

Circuit kpath_circuit(const Graph& g, unsigned k, const FieldSpec& spec, Rng& rng) {
    g.validate();
    Field f(spec);
    Circuit c(spec);
    std::vector<GateId> x;
    for (unsigned v = 0; v < g.n; ++v) x.push_back(c.input(subset_name('x', Mask{1} << v)));
    std::vector<std::vector<unsigned>> out(g.n);
    for (auto [u, v] : g.edges) {
        out[u].push_back(v);
        if (!g.directed) out[v].push_back(u);
    }
    // vec = A_{i+1} ... A_k alpha, built from the right.
    std::vector<GateId> vec = x;
    for (unsigned i = k; i >= 1; --i) {
        std::vector<GateId> next(g.n, kNoGate);
        for (unsigned u = 0; u < g.n; ++u) {
            std::vector<GateId> terms;
            for (unsigned w : out[u]) {
                const std::uint64_t label = f.random(rng);
                if (vec[w] != kNoGate && label != 0) terms.push_back(times(c, c.constant(label), vec[w]));
            }
            if (GateId s = c.sum_or_none(terms); s != kNoGate) next[u] = c.mul(x[u], s);
        }
        vec = std::move(next);
    }
    std::erase(vec, kNoGate);
    c.add_output(c.or_zero(c.sum_or_none(vec)));
    return c;
}

SieveResult kpath_detect(const Graph& g, unsigned k, Rng& rng, const SieveOptions& opt, const FieldSpec& spec) {
    g.validate();
    SieveResult total;
    if (k + 1 > g.n) {
        total.trials_run = 0;
        return total;
    }
    SieveMatrix a = vandermonde(k + 1, g.n, spec, rng);
    std::vector<std::string> xvars;
    for (unsigned v = 0; v < g.n; ++v) xvars.push_back(subset_name('x', Mask{1} << v));
    SieveOptions once = opt;
    once.trials = 1;
    for (unsigned t = 0; t < opt.trials && !total.found; ++t) {
        Rng trial = rng.fork();
        Circuit p = kpath_circuit(g, k, spec, trial);
        merge(total, det_sieve(p, xvars, a, trial, once));
    }
    return total;
}

// ------------------------------------------------------------ matroid intersection

Circuit matroid_polynomial(const SieveMatrix& a, const SieveMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError("A and B must have the same shape");
    if (a.spec != b.spec) throw FieldMismatch("A and B use different fields");
    if (a.cols() > 64) throw InvalidArgument("at most 64 columns");
    const Field f(a.spec);
    Circuit c(a.spec);
    std::vector<GateId> x;
    for (std::size_t i = 0; i < a.cols(); ++i) x.push_back(c.input(subset_name('x', Mask{1} << i)));
    const std::size_t k = a.rows();
    GateMatrix m(k, std::vector<GateId>(k, kNoGate));
    for (std::size_t r = 0; r < k; ++r)
        for (std::size_t s = 0; s < k; ++s) {
            std::vector<GateId> terms;
            for (std::size_t i = 0; i < a.cols(); ++i)
                if (std::uint64_t v = f.mul(a.a.at(r, i), b.a.at(s, i))) terms.push_back(times(c, c.constant(v), x[i]));
            m[r][s] = c.sum_or_none(terms);
        }
    c.add_output(mv_det_into(c, m));
    return c;
}

SieveResult matroid3_detect(const SieveMatrix& a, const SieveMatrix& b, const SieveMatrix& cm, Rng& rng,
                            const SieveOptions& opt) {
    if (cm.rows() != a.rows() || cm.cols() != a.cols()) throw ShapeError("C must have the shape of A and B");
    Circuit p = matroid_polynomial(a, b);
    std::vector<std::string> xvars;
    for (std::size_t i = 0; i < a.cols(); ++i) xvars.push_back(subset_name('x', Mask{1} << i));
    return det_sieve(p, xvars, cm, rng, opt);
}

void TripleSystem::validate() const {
    for (const auto& t : triples)
        if (t[0] >= nu || t[1] >= nv || t[2] >= nw) throw InvalidArgument("triple coordinate out of range");
}

TripleSystem parse_triples(std::istream& in) {
    detail::LineReader r(in);
    auto head = r.tokens("'nu nv nw m' header");
    if (head.size() != 4) throw ParseError(r.line(), "expected 'nu nv nw m'");
    TripleSystem t;
    t.nu = static_cast<unsigned>(r.integer(head[0]));
    t.nv = static_cast<unsigned>(r.integer(head[1]));
    t.nw = static_cast<unsigned>(r.integer(head[2]));
    const std::uint64_t m = r.integer(head[3]);
    if (m > 64) throw ParseError(r.line(), "at most 64 triples");
    const unsigned lim[3] = {t.nu, t.nv, t.nw};
    for (std::uint64_t k = 0; k < m; ++k) {
        auto row = r.tokens("triple " + std::to_string(k + 1));
        if (row.size() != 3) throw ParseError(r.line(), "expected 'u v w'");
        std::array<unsigned, 3> tr{};
        for (int s = 0; s < 3; ++s) {
            const std::uint64_t v = r.integer(row[s]);
            if (v < 1 || v > lim[s]) throw ParseError(r.line(), "coordinate " + row[s] + " out of range");
            tr[s] = static_cast<unsigned>(v - 1);
        }
        t.triples.push_back(tr);
    }
    return t;
}

TripleSystem parse_triples(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_triples(in);
}

std::string format_triples(const TripleSystem& t) {
    std::ostringstream out;
    out << t.nu << ' ' << t.nv << ' ' << t.nw << ' ' << t.triples.size() << '\n';
    for (const auto& tr : t.triples) out << tr[0] + 1 << ' ' << tr[1] + 1 << ' ' << tr[2] + 1 << '\n';
    return out.str();
}

std::array<SieveMatrix, 3> matching3d_matrices(const TripleSystem& t, unsigned k, const FieldSpec& spec, Rng& rng) {
    t.validate();
    SieveMatrix vm = vandermonde(k, std::max({t.nu, t.nv, t.nw}), spec, rng);
    std::array<SieveMatrix, 3> out;
    for (int s = 0; s < 3; ++s) {
        out[s] = SieveMatrix{spec, Matrix(k, t.triples.size())};
        for (std::size_t j = 0; j < t.triples.size(); ++j)
            for (unsigned i = 0; i < k; ++i) out[s].a.at(i, j) = vm.a.at(i, t.triples[j][s]);
    }
    return out;
}

SieveResult matching3d_detect(const TripleSystem& t, unsigned k, Rng& rng, const SieveOptions& opt,
                              const FieldSpec& spec) {
    auto mats = matching3d_matrices(t, k, spec, rng);
    return matroid3_detect(mats[0], mats[1], mats[2], rng, opt);
}

// ------------------------------------------------------------ long cycle

Circuit longcycle_polynomial(const Graph& g, std::size_t edge, const FieldSpec& spec) {
    g.validate();
    if (g.directed) throw InvalidArgument("long-cycle polynomial needs an undirected graph");
    if (edge >= g.edges.size()) throw InvalidArgument("edge index out of range");
    if (g.edges.size() > 64) throw InvalidArgument("at most 64 edges");
    Circuit c(spec);
    GateMatrix m(g.n, std::vector<GateId>(g.n, kNoGate));
    for (std::size_t f = 0; f < g.edges.size(); ++f) {
        if (f == edge) continue;
        auto [u, w] = g.edges[f];
        m[u][w] = m[w][u] = c.input(subset_name('x', Mask{1} << f));
    }
    auto [s, t] = g.edges[edge];
    m[t][s] = c.one();
    // Unit diagonal: vertices off the s-t path may be fixed points, so the
    // rest of the graph need not have a perfect matching.
    for (unsigned v = 0; v < g.n; ++v) m[v][v] = c.one();
    c.add_output(mv_det_into(c, m));
    return c;
}

SieveResult longcycle_detect(const Graph& g, unsigned k, Rng& rng, const SieveOptions& opt, const FieldSpec& spec) {
    require_char2(spec, "long-cycle detection");
    const std::vector<bool> side = bipartition(g);
    std::vector<unsigned> u_index(g.n, 0);
    unsigned nu = 0;
    for (unsigned v = 0; v < g.n; ++v)
        if (side[v]) u_index[v] = nu++;
    const unsigned rows = std::max(1u, (k + 1) / 2);
    SieveMatrix vm = vandermonde(rows, nu, spec, rng);
    SieveResult total;
    for (std::size_t e = 0; e < g.edges.size() && !total.found; ++e) {
        Circuit p = longcycle_polynomial(g, e, spec);
        std::vector<std::string> xvars;
        SieveMatrix a{spec, Matrix(rows, g.edges.size() - 1)};
        for (std::size_t f = 0, col = 0; f < g.edges.size(); ++f) {
            if (f == e) continue;
            xvars.push_back(subset_name('x', Mask{1} << f));
            auto [u, w] = g.edges[f];
            const unsigned in_u = side[u] ? u : w;
            for (unsigned i = 0; i < rows; ++i) a.a.at(i, col) = vm.a.at(i, u_index[in_u]);
            ++col;
        }
        merge(total, odd_sieve(p, xvars, a, rng, opt));
    }
    return total;
}

}  // namespace kronscale
