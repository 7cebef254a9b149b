/**
 * @file circuit.cpp
 * @brief Circuit IR, evaluation, degree analysis and structural passes.
 */
#include "kronscale/circuit.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

namespace kronscale {

// ------------------------------------------------------------ input names

std::string subset_name(char side, std::uint64_t mask) {
    std::string s;
    s += side;
    s += ":{";
    bool first = true;
    for (unsigned i = 0; i < 64; ++i) {
        if (!((mask >> i) & 1)) continue;
        if (!first) s += ',';
        s += std::to_string(i + 1);
        first = false;
    }
    s += '}';
    return s;
}

std::string tuple_name(char prefix, std::initializer_list<int> idx) {
    std::string s;
    s += prefix;
    s += ":{";
    bool first = true;
    for (int i : idx) {
        if (!first) s += ',';
        s += std::to_string(i);
        first = false;
    }
    s += '}';
    return s;
}

std::string free_name(std::string_view ident) { return "v:" + std::string(ident); }

namespace {

/// Parses `{i,j,...}` into integers; false on malformed text.
bool parse_index_list(std::string_view body, std::vector<long>& out) {
    out.clear();
    if (body.size() < 2 || body.front() != '{' || body.back() != '}') return false;
    body = body.substr(1, body.size() - 2);
    if (body.empty()) return true;
    std::size_t pos = 0;
    while (pos <= body.size()) {
        std::size_t comma = body.find(',', pos);
        if (comma == std::string_view::npos) comma = body.size();
        std::string_view tok = body.substr(pos, comma - pos);
        long v = 0;
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size()) return false;
        out.push_back(v);
        pos = comma + 1;
        if (comma == body.size()) break;
    }
    return true;
}

}  // namespace

bool parse_subset_name(std::string_view name, char& side, std::uint64_t& mask) {
    if (name.size() < 4 || name[1] != ':') return false;
    if (name[0] != 'x' && name[0] != 'y' && name[0] != 'z') return false;
    std::vector<long> idx;
    if (!parse_index_list(name.substr(2), idx)) return false;
    std::uint64_t m = 0;
    long prev = 0;
    for (long v : idx) {
        if (v <= prev || v > 64) return false;
        m |= std::uint64_t{1} << (v - 1);
        prev = v;
    }
    side = name[0];
    mask = m;
    return true;
}

void validate_input_name(std::string_view name) {
    auto bad = [&](const char* why) {
        throw InvalidArgument("input name '" + std::string(name) + "': " + why);
    };
    if (name.size() < 3 || name[1] != ':' || !std::isalpha(static_cast<unsigned char>(name[0])))
        bad("expected '<letter>:...'");
    for (char ch : name)
        if (std::isspace(static_cast<unsigned char>(ch)) || ch == '#') bad("contains whitespace or '#'");
    if (name[0] == 'v') return;
    char side;
    std::uint64_t mask;
    if (name[0] == 'x' || name[0] == 'y' || name[0] == 'z') {
        if (!parse_subset_name(name, side, mask)) bad("expected strictly increasing list in 1..64");
        return;
    }
    std::vector<long> idx;
    if (!parse_index_list(name.substr(2), idx)) bad("expected '{i,j,...}'");
}

// ------------------------------------------------------------ Circuit

Circuit::Circuit(FieldSpec spec) : spec_(spec), field_(spec) {}

void Circuit::reserve(std::size_t gates, std::size_t arcs) {
    kind_.reserve(gates);
    beg_.reserve(gates + 1);
    payload_.reserve(gates);
    args_.reserve(arcs);
}

GateId Circuit::push(GateKind k, std::uint64_t payload) {
    if (kind_.size() >= kNoGate - 1) throw TooLarge("circuit exceeds 2^32 gates");
    kind_.push_back(static_cast<std::uint8_t>(k));
    payload_.push_back(payload);
    beg_.push_back(args_.size());
    return static_cast<GateId>(kind_.size() - 1);
}

GateId Circuit::input(std::string_view name) {
    if (auto it = by_name_.find(std::string(name)); it != by_name_.end()) return it->second;
    validate_input_name(name);
    GateId g = push(GateKind::Input, input_names_.size());
    input_names_.emplace_back(name);
    input_gates_.push_back(g);
    by_name_.emplace(std::string(name), g);
    return g;
}

GateId Circuit::constant(std::uint64_t value, bool fresh) {
    if (!field_.valid(value)) throw InvalidArgument("constant is not a canonical field value");
    if (!fresh) {
        if (auto it = const_cache_.find(value); it != const_cache_.end()) return it->second;
    }
    GateId g = push(GateKind::Const, value);
    const_cache_.try_emplace(value, g);
    return g;
}

GateId Circuit::zero() { return constant(0); }
GateId Circuit::one() { return constant(1); }

GateId Circuit::add(std::span<const GateId> args) {
    if (args.empty()) throw InvalidCircuit("Add gate needs at least one argument");
    GateId self = static_cast<GateId>(kind_.size());
    for (GateId a : args)
        if (a >= self) throw InvalidCircuit("argument does not precede gate");
    args_.insert(args_.end(), args.begin(), args.end());
    kind_.push_back(static_cast<std::uint8_t>(GateKind::Add));
    payload_.push_back(0);
    beg_.push_back(args_.size());
    return self;
}

GateId Circuit::mul(GateId a, GateId b) {
    GateId ab[2] = {a, b};
    return mul_n(ab);
}

GateId Circuit::mul_n(std::span<const GateId> args) {
    if (args.empty()) throw InvalidCircuit("Mul gate needs at least one argument");
    GateId self = static_cast<GateId>(kind_.size());
    for (GateId a : args)
        if (a >= self) throw InvalidCircuit("argument does not precede gate");
    args_.insert(args_.end(), args.begin(), args.end());
    kind_.push_back(static_cast<std::uint8_t>(GateKind::Mul));
    payload_.push_back(0);
    beg_.push_back(args_.size());
    return self;
}

GateId Circuit::sum_or_none(std::span<const GateId> terms) {
    std::size_t live = 0;
    GateId last = kNoGate;
    for (GateId t : terms)
        if (t != kNoGate) {
            ++live;
            last = t;
        }
    if (live <= 1) return last;
    if (live == terms.size()) return add(terms);
    std::vector<GateId> keep;
    keep.reserve(live);
    for (GateId t : terms)
        if (t != kNoGate) keep.push_back(t);
    return add(keep);
}

void Circuit::add_output(GateId g) {
    if (g >= num_gates()) throw InvalidCircuit("output id out of range");
    outputs_.push_back(g);
}

void Circuit::set_outputs(std::vector<GateId> outs) {
    for (GateId g : outs)
        if (g >= num_gates()) throw InvalidCircuit("output id out of range");
    outputs_ = std::move(outs);
}

GateId Circuit::find_input(std::string_view name) const {
    auto it = by_name_.find(std::string(name));
    return it == by_name_.end() ? kNoGate : it->second;
}

bool operator==(const Circuit& a, const Circuit& b) {
    return a.spec_ == b.spec_ && a.kind_ == b.kind_ && a.beg_ == b.beg_ && a.args_ == b.args_ &&
           a.payload_ == b.payload_ && a.input_names_ == b.input_names_ && a.outputs_ == b.outputs_;
}

// ------------------------------------------------------------ evaluation

std::vector<std::uint64_t> evaluate_all(const Circuit& c, std::span<const std::uint64_t> inputs) {
    if (inputs.size() != c.num_inputs()) throw UnassignedInput("input vector has wrong length");
    const Field& f = c.field();
    const std::size_t n = c.num_gates();
    std::vector<std::uint64_t> val(n);
    for (GateId g = 0; g < n; ++g) {
        switch (c.kind(g)) {
            case GateKind::Input: val[g] = inputs[c.input_index(g)]; break;
            case GateKind::Const: val[g] = c.const_value(g); break;
            case GateKind::Add: {
                std::uint64_t s = 0;
                for (GateId a : c.args(g)) s = f.add(s, val[a]);
                val[g] = s;
                break;
            }
            case GateKind::Mul: {
                auto as = c.args(g);
                std::uint64_t p = val[as[0]];
                for (std::size_t i = 1; i < as.size(); ++i) p = f.mul(p, val[as[i]]);
                val[g] = p;
                break;
            }
        }
    }
    return val;
}

std::vector<std::uint64_t> evaluate_inputs(const Circuit& c, std::span<const std::uint64_t> inputs) {
    auto val = evaluate_all(c, inputs);
    std::vector<std::uint64_t> out;
    out.reserve(c.outputs().size());
    for (GateId o : c.outputs()) out.push_back(val[o]);
    return out;
}

std::vector<std::uint64_t> evaluate(const Circuit& c, const Assignment& assignment) {
    std::vector<std::uint64_t> in(c.num_inputs());
    for (std::size_t i = 0; i < in.size(); ++i) {
        auto it = assignment.find(c.input_names()[i]);
        if (it == assignment.end()) throw UnassignedInput("no value for '" + c.input_names()[i] + "'");
        if (!c.field().valid(it->second))
            throw InvalidArgument("value for '" + c.input_names()[i] + "' is not canonical");
        in[i] = it->second;
    }
    return evaluate_inputs(c, in);
}

std::vector<FieldElement> evaluate(const Circuit& c, const ElementAssignment& assignment) {
    Assignment raw;
    raw.reserve(assignment.size());
    for (const auto& [name, e] : assignment) {
        if (e.spec != c.spec())
            throw FieldMismatch("value for '" + name + "' belongs to " + e.spec.to_string());
        raw.emplace(name, e.value);
    }
    std::vector<FieldElement> out;
    for (std::uint64_t v : evaluate(c, raw)) out.push_back(FieldElement{c.spec(), v});
    return out;
}

// ------------------------------------------------------------ degrees

std::vector<Degree> formal_degrees(const Circuit& c) {
    std::vector<Degree> deg(c.num_gates());
    for (GateId g = 0; g < c.num_gates(); ++g) {
        switch (c.kind(g)) {
            case GateKind::Input: deg[g] = 1; break;
            case GateKind::Const: deg[g] = 0; break;
            case GateKind::Add: {
                Degree m = 0;
                for (GateId a : c.args(g)) m = std::max(m, deg[a]);
                deg[g] = m;
                break;
            }
            case GateKind::Mul: {
                Degree s = 0;
                for (GateId a : c.args(g)) {
                    if (deg[a] == kDegreeTop || s > kDegreeTop - 1 - deg[a]) {
                        s = kDegreeTop;
                        break;
                    }
                    s += deg[a];
                }
                deg[g] = s;
                break;
            }
        }
    }
    return deg;
}

std::optional<Degree> analyze_skew(const Circuit& c) {
    auto deg = formal_degrees(c);
    Degree q = 0;
    for (GateId g = 0; g < c.num_gates(); ++g) {
        if (c.kind(g) != GateKind::Mul) continue;
        auto as = c.args(g);
        if (as.size() != 2) return std::nullopt;
        q = std::max(q, std::min(deg[as[0]], deg[as[1]]));
    }
    if (q == kDegreeTop) return std::nullopt;
    return q;
}

// ------------------------------------------------------------ structural passes

namespace {

/// Copies gate `g` of `src` into `dst` with arguments translated by `map`.
GateId copy_gate(Circuit& dst, const Circuit& src, GateId g, const std::vector<GateId>& map,
                 bool binarize) {
    switch (src.kind(g)) {
        case GateKind::Input: return dst.input(src.input_name(g));
        case GateKind::Const: return dst.constant(src.const_value(g), true);
        case GateKind::Add: {
            std::vector<GateId> as;
            for (GateId a : src.args(g)) as.push_back(map[a]);
            return dst.add(as);
        }
        case GateKind::Mul: {
            std::vector<GateId> as;
            for (GateId a : src.args(g)) as.push_back(map[a]);
            if (!binarize || as.size() == 2) return dst.mul_n(as);
            if (as.size() == 1) {
                GateId one = dst.constant(1, true);
                return dst.mul(as[0], one);
            }
            GateId acc = dst.mul(as[0], as[1]);
            for (std::size_t i = 2; i < as.size(); ++i) acc = dst.mul(acc, as[i]);
            return acc;
        }
    }
    throw InternalError("unknown gate kind");
}

}  // namespace

Circuit normalize_binary(const Circuit& c) {
    Circuit out(c.spec());
    out.reserve(c.num_gates(), c.size());
    std::vector<GateId> map(c.num_gates());
    for (GateId g = 0; g < c.num_gates(); ++g) map[g] = copy_gate(out, c, g, map, true);
    std::vector<GateId> outs;
    for (GateId o : c.outputs()) outs.push_back(map[o]);
    out.set_outputs(outs);
    return out;
}

Circuit eliminate_dead(const Circuit& c) {
    std::vector<char> live(c.num_gates(), 0);
    for (GateId o : c.outputs()) live[o] = 1;
    for (GateId g = static_cast<GateId>(c.num_gates()); g-- > 0;) {
        if (!live[g]) continue;
        for (GateId a : c.args(g)) live[a] = 1;
    }
    Circuit out(c.spec());
    std::vector<GateId> map(c.num_gates(), kNoGate);
    for (GateId g = 0; g < c.num_gates(); ++g)
        if (live[g] || c.kind(g) == GateKind::Input) map[g] = copy_gate(out, c, g, map, false);
    std::vector<GateId> outs;
    for (GateId o : c.outputs()) outs.push_back(map[o]);
    out.set_outputs(outs);
    return out;
}

std::vector<GateId> inline_circuit(Circuit& dst, const Circuit& src,
                                   const std::function<GateId(const std::string&)>& bind) {
    if (src.spec() != dst.spec()) throw FieldMismatch("inlining a circuit over another field");
    std::vector<char> live(src.num_gates(), 0);
    for (GateId o : src.outputs()) live[o] = 1;
    for (GateId g = static_cast<GateId>(src.num_gates()); g-- > 0;)
        if (live[g])
            for (GateId a : src.args(g)) live[a] = 1;

    std::vector<GateId> map(src.num_gates(), kNoGate);
    std::vector<GateId> buf;
    for (GateId g = 0; g < src.num_gates(); ++g) {
        if (!live[g]) continue;
        switch (src.kind(g)) {
            case GateKind::Input: map[g] = bind(src.input_name(g)); break;
            case GateKind::Const:
                map[g] = src.const_value(g) == 0 ? kNoGate : dst.constant(src.const_value(g));
                break;
            case GateKind::Add:
                buf.clear();
                for (GateId a : src.args(g)) buf.push_back(map[a]);
                map[g] = dst.sum_or_none(buf);
                break;
            case GateKind::Mul: {
                buf.clear();
                bool zero = false;
                for (GateId a : src.args(g)) {
                    if (map[a] == kNoGate) zero = true;
                    buf.push_back(map[a]);
                }
                map[g] = zero ? kNoGate : dst.mul_n(buf);
                break;
            }
        }
    }
    std::vector<GateId> outs;
    for (GateId o : src.outputs()) outs.push_back(map[o]);
    return outs;
}

// ------------------------------------------------------------ homogenization

Homogenized homogenize(const Circuit& input, Degree d) {
    // The component table is indexed by the binary-normalized circuit, which
    // coincides with the input unless it contains n-ary products.
    std::optional<Circuit> normalized;
    if (!analyze_skew(input).has_value()) normalized = normalize_binary(input);
    const Circuit& c = normalized ? *normalized : input;
    auto deg = formal_degrees(c);
    for (GateId o : c.outputs())
        if (deg[o] > d)
            throw DegreeBound("output of formal degree " +
                              (deg[o] == kDegreeTop ? std::string("unbounded") : std::to_string(deg[o])) +
                              " exceeds " + std::to_string(d));
    if (d > (Degree{1} << 20)) throw TooLarge("homogenization degree too large");

    Homogenized h{Circuit(c.spec()), d, {}};
    const std::size_t w = d + 1;
    h.comp.assign(c.num_gates() * w, kNoGate);
    Circuit& out = h.circuit;
    std::vector<GateId> buf;
    for (GateId g = 0; g < c.num_gates(); ++g) {
        GateId* cg = &h.comp[g * w];
        switch (c.kind(g)) {
            case GateKind::Input:
                // Keep every input (so names and indices match the original).
                {
                    GateId in = out.input(c.input_name(g));
                    if (d >= 1) cg[1] = in;
                }
                break;
            case GateKind::Const:
                cg[0] = out.constant(c.const_value(g), true);
                break;
            case GateKind::Add:
                for (Degree k = 0; k <= std::min(d, deg[g]); ++k) {
                    buf.clear();
                    for (GateId a : c.args(g)) buf.push_back(h.comp[a * w + k]);
                    cg[k] = out.sum_or_none(buf);
                }
                break;
            case GateKind::Mul: {
                auto as = c.args(g);
                const GateId* ca = &h.comp[as[0] * w];
                const GateId* cb = &h.comp[as[1] * w];
                // Iterate over the side with fewer live components (the low side
                // of a skew product), so each component needs at most q+1 terms.
                std::vector<Degree> la, lb;
                for (Degree i = 0; i <= d; ++i) {
                    if (ca[i] != kNoGate) la.push_back(i);
                    if (cb[i] != kNoGate) lb.push_back(i);
                }
                bool swap = lb.size() < la.size();
                const GateId* lo = swap ? cb : ca;
                const GateId* hi = swap ? ca : cb;
                const auto& llo = swap ? lb : la;
                for (Degree k = 0; k <= std::min(d, deg[g]); ++k) {
                    buf.clear();
                    for (Degree i : llo) {
                        if (i > k) break;
                        if (hi[k - i] == kNoGate) continue;
                        buf.push_back(swap ? out.mul(hi[k - i], lo[i]) : out.mul(lo[i], hi[k - i]));
                    }
                    cg[k] = out.sum_or_none(buf);
                }
                break;
            }
        }
    }
    std::vector<GateId> outs;
    for (GateId o : c.outputs())
        for (Degree k = 0; k <= d; ++k) outs.push_back(out.or_zero(h.comp[o * w + k]));
    out.set_outputs(outs);
    return h;
}

// ------------------------------------------------------------ Baur-Strassen

Circuit baur_strassen(const Circuit& input, const std::vector<std::string>& wrt) {
    if (input.outputs().size() != 1)
        throw SingleOutputRequired("gradient needs exactly one output, got " +
                                   std::to_string(input.outputs().size()));
    if (!analyze_skew(input).has_value())
        throw InvalidCircuit("gradient requires binary multiplication gates");
    const Circuit c = eliminate_dead(input);
    const GateId root = c.outputs()[0];

    Circuit out(c.spec());
    out.reserve(3 * c.num_gates(), 4 * c.size());
    std::vector<GateId> fwd(c.num_gates());
    for (GateId g = 0; g < c.num_gates(); ++g) fwd[g] = copy_gate(out, c, g, fwd, false);

    // Adjoint contributions; kUnit marks the exact constant 1 (seed of the
    // root), which lets products with it be elided.
    constexpr GateId kUnit = kNoGate - 1;
    std::vector<std::vector<GateId>> contrib(c.num_gates());
    contrib[root].push_back(kUnit);
    std::vector<GateId> adj(c.num_gates(), kNoGate);
    std::vector<GateId> buf;
    for (GateId g = static_cast<GateId>(c.num_gates()); g-- > 0;) {
        auto& cs = contrib[g];
        if (cs.empty()) continue;
        GateId a;
        if (cs.size() == 1) {
            a = cs[0];
        } else {
            buf.clear();
            for (GateId t : cs) buf.push_back(t == kUnit ? out.one() : t);
            a = out.add(buf);
        }
        std::vector<GateId>().swap(cs);
        adj[g] = a;
        switch (c.kind(g)) {
            case GateKind::Input:
            case GateKind::Const: break;
            case GateKind::Add:
                for (GateId x : c.args(g)) contrib[x].push_back(a);
                break;
            case GateKind::Mul: {
                auto as = c.args(g);
                GateId l = as[0], r = as[1];
                contrib[l].push_back(a == kUnit ? fwd[r] : out.mul(a, fwd[r]));
                contrib[r].push_back(a == kUnit ? fwd[l] : out.mul(a, fwd[l]));
                break;
            }
        }
    }
    std::vector<GateId> outs;
    for (const auto& name : wrt) {
        GateId g = c.find_input(name);
        GateId a = g == kNoGate ? kNoGate : adj[g];
        if (a == kNoGate) outs.push_back(out.zero());
        else if (a == kUnit) outs.push_back(out.one());
        else outs.push_back(a);
    }
    out.set_outputs(outs);
    return out;
}

// ------------------------------------------------------------ statistics

CircuitStats circuit_stats(const Circuit& c) {
    CircuitStats s;
    s.gates = c.num_gates();
    s.arcs = c.size();
    s.outputs = c.outputs().size();
    std::vector<std::size_t> depth(c.num_gates(), 0);
    for (GateId g = 0; g < c.num_gates(); ++g) {
        switch (c.kind(g)) {
            case GateKind::Input: ++s.inputs; break;
            case GateKind::Const: ++s.constants; break;
            case GateKind::Add: ++s.adds; break;
            case GateKind::Mul: ++s.muls; break;
        }
        for (GateId a : c.args(g)) depth[g] = std::max(depth[g], depth[a] + 1);
    }
    auto deg = formal_degrees(c);
    for (GateId o : c.outputs()) {
        s.depth = std::max(s.depth, depth[o]);
        s.max_output_degree = std::max(s.max_output_degree, deg[o]);
    }
    s.skew = analyze_skew(c);
    return s;
}

}  // namespace kronscale
