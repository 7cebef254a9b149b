/**
 * @file line_reader.hpp
 * @brief Internal helper for the line-oriented text formats: skips blank
 *        lines and '#' comments and reports 1-based line numbers.
 */
#pragma once

#include <charconv>
#include <cstdint>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "kronscale/errors.hpp"

namespace kronscale::detail {

/// Reads non-empty lines with '#' comments stripped, tracking line numbers.
class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    /// Next non-empty line split into tokens; throws ParseError with `what` at EOF.
    std::vector<std::string> tokens(const std::string& what) {
        std::vector<std::string> out;
        if (next(out)) return out;
        throw ParseError(lineno_ + 1, "unexpected end of input, expected " + what);
    }

    /// Next non-empty line split into tokens; false at end of input.
    bool next(std::vector<std::string>& out) {
        std::string line;
        while (std::getline(in_, line)) {
            ++lineno_;
            if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
            std::istringstream ss(line);
            out.clear();
            for (std::string t; ss >> t;) out.push_back(t);
            if (!out.empty()) return true;
        }
        return false;
    }
    std::size_t line() const { return lineno_; }

    std::uint64_t integer(const std::string& tok) const {
        std::uint64_t v = 0;
        auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || p != tok.data() + tok.size())
            throw ParseError(lineno_, "expected a non-negative integer, got '" + tok + "'");
        return v;
    }

private:
    std::istream& in_;
    std::size_t lineno_ = 0;
};

}  // namespace kronscale::detail
