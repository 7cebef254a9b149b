/**
 * @file circuit_io.cpp
 * @brief Text format v1 for circuits.
 *
 * @code
 * circuit v1
 * field <field spec>
 * in <id> <name>
 * const <id> <value>
 * add <id> <id>+
 * mul <id> <id> <id>
 * out <id>+
 * @endcode
 * Ids are consecutive from 0 in topological order; `#` starts a comment;
 * several `out` lines concatenate; a circuit without outputs has none.
 */
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include "kronscale/circuit.hpp"

namespace kronscale {

void serialize(const Circuit& c, std::ostream& out) {
    out << "circuit v1\n";
    out << "field " << c.spec().to_string() << '\n';
    std::string line;
    for (GateId g = 0; g < c.num_gates(); ++g) {
        line.clear();
        switch (c.kind(g)) {
            case GateKind::Input:
                line = "in " + std::to_string(g) + ' ' + c.input_name(g);
                break;
            case GateKind::Const:
                line = "const " + std::to_string(g) + ' ' + format_value(c.spec(), c.const_value(g));
                break;
            case GateKind::Add:
                line = "add " + std::to_string(g);
                for (GateId a : c.args(g)) line += ' ' + std::to_string(a);
                break;
            case GateKind::Mul:
                if (c.args(g).size() != 2)
                    throw InvalidCircuit("text format requires binary multiplication (gate " +
                                         std::to_string(g) + ")");
                line = "mul " + std::to_string(g) + ' ' + std::to_string(c.args(g)[0]) + ' ' +
                       std::to_string(c.args(g)[1]);
                break;
        }
        out << line << '\n';
    }
    if (!c.outputs().empty()) {
        out << "out";
        for (GateId o : c.outputs()) out << ' ' << o;
        out << '\n';
    }
}

std::string serialize(const Circuit& c) {
    std::ostringstream os;
    serialize(c, os);
    return os.str();
}

namespace {

std::vector<std::string_view> tokenize(std::string_view line) {
    std::vector<std::string_view> toks;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
        if (j > i) toks.push_back(line.substr(i, j - i));
        i = j;
    }
    return toks;
}

std::uint64_t to_id(std::string_view tok, std::size_t lineno) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
        throw ParseError(lineno, "bad integer '" + std::string(tok) + "'");
    return v;
}

}  // namespace

Circuit parse_circuit(std::istream& in) {
    std::string raw;
    std::size_t lineno = 0;
    enum { kHeader, kField, kBody } state = kHeader;
    std::optional<Circuit> c;
    std::vector<GateId> outs;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string_view line(raw);
        if (auto h = line.find('#'); h != std::string_view::npos) line = line.substr(0, h);
        auto toks = tokenize(line);
        if (toks.empty()) continue;
        if (state == kHeader) {
            if (toks.size() != 2 || toks[0] != "circuit" || toks[1] != "v1")
                throw ParseError(lineno, "expected 'circuit v1'");
            state = kField;
            continue;
        }
        if (state == kField) {
            if (toks[0] != "field") throw ParseError(lineno, "expected 'field <spec>'");
            std::string_view rest = line.substr(line.find("field") + 5);
            try {
                c.emplace(FieldSpec::parse(rest));
            } catch (const Error& e) {
                throw ParseError(lineno, e.what());
            }
            state = kBody;
            continue;
        }
        const std::string_view op = toks[0];
        try {
            if (op == "out") {
                for (std::size_t i = 1; i < toks.size(); ++i) {
                    auto id = to_id(toks[i], lineno);
                    if (id >= c->num_gates()) throw ParseError(lineno, "output id out of range");
                    outs.push_back(static_cast<GateId>(id));
                }
                if (toks.size() < 2) throw ParseError(lineno, "'out' needs at least one id");
                continue;
            }
            if (toks.size() < 2) throw ParseError(lineno, "missing gate id");
            auto id = to_id(toks[1], lineno);
            if (id != c->num_gates())
                throw ParseError(lineno, "gate id " + std::to_string(id) + " is not consecutive (expected " +
                                             std::to_string(c->num_gates()) + ")");
            if (op == "in") {
                if (toks.size() != 3) throw ParseError(lineno, "expected 'in <id> <name>'");
                if (c->find_input(toks[2]) != kNoGate)
                    throw ParseError(lineno, "duplicate input name '" + std::string(toks[2]) + "'");
                c->input(toks[2]);
            } else if (op == "const") {
                if (toks.size() != 3) throw ParseError(lineno, "expected 'const <id> <value>'");
                c->constant(parse_value(c->spec(), toks[2]), true);
            } else if (op == "add" || op == "mul") {
                std::vector<GateId> as;
                for (std::size_t i = 2; i < toks.size(); ++i) {
                    auto a = to_id(toks[i], lineno);
                    if (a >= id) throw ParseError(lineno, "argument " + std::to_string(a) + " does not precede gate");
                    as.push_back(static_cast<GateId>(a));
                }
                if (op == "add") {
                    if (as.empty()) throw ParseError(lineno, "'add' needs at least one argument");
                    c->add(as);
                } else {
                    if (as.size() != 2) throw ParseError(lineno, "'mul' takes exactly two arguments");
                    c->mul(as[0], as[1]);
                }
            } else {
                throw ParseError(lineno, "unknown directive '" + std::string(op) + "'");
            }
        } catch (const ParseError&) {
            throw;
        } catch (const Error& e) {
            throw ParseError(lineno, e.what());
        }
    }
    if (state != kBody) throw ParseError(lineno + 1, "truncated header");
    c->set_outputs(std::move(outs));
    return std::move(*c);
}

Circuit parse_circuit(std::string_view text) {
    std::istringstream is{std::string(text)};
    return parse_circuit(is);
}

}  // namespace kronscale
