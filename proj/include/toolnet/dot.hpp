#pragma once

#include "toolnet/graph.hpp"
#include "toolnet/navigation.hpp"

#include <string>
#include <string_view>

namespace toolnet {

inline std::string dot_quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        if (c == '\n') {
            out += "\\n";
            continue;
        }
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

// Graphviz digraph in canonical (from, to) order. Edges whose current weight
// is below min_weight are left out; labels use the times10 rendering.
inline std::string export_dot(const ToolGraph& g, double min_weight = 0.0) {
    std::string out = "digraph toolnet {\n  rankdir=LR;\n";
    out += "  " + dot_quote(kStartNode) + " [shape=box, style=filled, fillcolor=lightblue];\n";
    out += "  " + dot_quote(kEndNode) + " [shape=box, style=filled, fillcolor=lightgray];\n";
    for (const auto& n : g.tools()) {
        out += "  " + dot_quote(n.id) + " [label=" +
               dot_quote(n.id + " (s=" + std::to_string(n.accumulated_score) + ")");
        if (!n.active) out += ", style=dashed";
        out += "];\n";
    }
    for (const auto& e : g.edges()) {
        if (e.current_weight < min_weight) continue;
        out += "  " + dot_quote(e.from) + " -> " + dot_quote(e.to) + " [label=" +
               dot_quote(render_weight(e.current_weight, WeightFormat::times10)) + "];\n";
    }
    out += "}\n";
    return out;
}

}  // namespace toolnet
