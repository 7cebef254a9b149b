/**
 * @file graph.cpp
 * @brief Graph validation, text format and bipartition.
 */
#include "kronscale/graph.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

#include "kronscale/errors.hpp"
#include "line_reader.hpp"

namespace kronscale {

void Graph::validate() const {
    if (n > 64) throw InvalidArgument("graphs are limited to 64 vertices");
    for (auto [u, v] : edges) {
        if (u >= n || v >= n) throw InvalidArgument("edge endpoint outside [1, " + std::to_string(n) + "]");
        if (u == v) throw InvalidArgument("self-loop at vertex " + std::to_string(u + 1));
    }
    if (side_u && (directed || *side_u > n)) throw InvalidArgument("invalid bipartition declaration");
}

Graph parse_graph(std::istream& in) {
    detail::LineReader r(in);
    auto head = r.tokens("graph header");
    if (head.size() < 3 || head.size() > 5 || (head[0] != "directed" && head[0] != "undirected"))
        throw ParseError(r.line(), "expected 'directed|undirected n m [|U| [|W|]]'");
    Graph g;
    g.directed = head[0] == "directed";
    const std::uint64_t n = r.integer(head[1]), m = r.integer(head[2]);
    if (n > 64) throw ParseError(r.line(), "graphs are limited to 64 vertices");
    g.n = static_cast<unsigned>(n);
    if (head.size() >= 4) {
        if (g.directed) throw ParseError(r.line(), "bipartition declared on a directed graph");
        const std::uint64_t u = r.integer(head[3]);
        if (u > n || (head.size() == 5 && u + r.integer(head[4]) != n))
            throw ParseError(r.line(), "bipartition sizes do not add up to n");
        g.side_u = static_cast<unsigned>(u);
    }
    std::unordered_set<std::uint64_t> seen;
    for (std::uint64_t k = 0; k < m; ++k) {
        auto row = r.tokens("edge " + std::to_string(k + 1));
        if (row.size() != 2) throw ParseError(r.line(), "expected 'u v'");
        const std::uint64_t u = r.integer(row[0]), v = r.integer(row[1]);
        if (u < 1 || v < 1 || u > n || v > n) throw ParseError(r.line(), "vertex outside [1, n]");
        if (u == v) throw ParseError(r.line(), "self-loop");
        const std::uint64_t a = g.directed ? u : std::min(u, v), b = g.directed ? v : std::max(u, v);
        if (!seen.insert(a * 128 + b).second) throw ParseError(r.line(), "repeated edge");
        g.edges.emplace_back(static_cast<unsigned>(u - 1), static_cast<unsigned>(v - 1));
    }
    return g;
}

Graph parse_graph(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_graph(in);
}

std::string format_graph(const Graph& g) {
    std::ostringstream out;
    out << (g.directed ? "directed " : "undirected ") << g.n << ' ' << g.edges.size();
    if (g.side_u) out << ' ' << *g.side_u << ' ' << g.n - *g.side_u;
    out << '\n';
    for (auto [u, v] : g.edges) out << u + 1 << ' ' << v + 1 << '\n';
    return out.str();
}

std::vector<bool> bipartition(const Graph& g) {
    g.validate();
    if (g.directed) throw BipartitenessError("bipartition of a directed graph");
    std::vector<bool> side(g.n, false);
    if (g.side_u) {
        for (unsigned v = 0; v < g.n; ++v) side[v] = v < *g.side_u;
        for (auto [u, v] : g.edges)
            if (side[u] == side[v])
                throw BipartitenessError("edge {" + std::to_string(u + 1) + "," + std::to_string(v + 1) +
                                         "} does not cross the declared bipartition");
        return side;
    }
    std::vector<std::vector<unsigned>> adj(g.n);
    for (auto [u, v] : g.edges) {
        adj[u].push_back(v);
        adj[v].push_back(u);
    }
    std::vector<int> colour(g.n, -1);
    for (unsigned s = 0; s < g.n; ++s) {
        if (colour[s] >= 0) continue;
        colour[s] = 0;
        std::vector<unsigned> stack{s};
        while (!stack.empty()) {
            unsigned u = stack.back();
            stack.pop_back();
            for (unsigned v : adj[u]) {
                if (colour[v] < 0) {
                    colour[v] = 1 - colour[u];
                    stack.push_back(v);
                } else if (colour[v] == colour[u]) {
                    throw BipartitenessError("odd cycle through vertex " + std::to_string(v + 1));
                }
            }
        }
    }
    for (unsigned v = 0; v < g.n; ++v) side[v] = colour[v] == 0;
    return side;
}

}  // namespace kronscale
