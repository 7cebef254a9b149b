/**
 * @file graph.hpp
 * @brief Small simple graphs (at most 64 vertices) with a plain-text edge
 *        list format and bipartition detection.
 */
#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace kronscale {

/// Simple graph on vertices 0..n-1 (1-based in files).
struct Graph {
    bool directed = false;
    unsigned n = 0;
    std::vector<std::pair<unsigned, unsigned>> edges;
    /// Declared bipartition: vertices < side_u form U (undirected graphs only).
    std::optional<unsigned> side_u;
    /// Throws InvalidArgument on out-of-range vertices, self-loops or n > 64.
    void validate() const;
};

/// Graph file: `directed|undirected n m [|U| [|W|]]`, then m lines `u v`.
Graph parse_graph(std::istream& in);
Graph parse_graph(std::string_view text);
std::string format_graph(const Graph& g);

/**
 * Side of every vertex (true = U).  Uses the declared bipartition when
 * present (checking that every edge crosses it), otherwise 2-colours each
 * component with its least vertex in U.  Throws BipartitenessError.
 */
std::vector<bool> bipartition(const Graph& g);

}  // namespace kronscale
