#pragma once

#include "toolnet/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace toolnet {

inline constexpr std::string_view kStartNode = "start";
inline constexpr std::string_view kEndNode = "end";

// Row sums must stay within this distance of 1.
inline constexpr double kRowTolerance = 1e-9;
// Edges at or below this weight count as absent for degree and successor queries.
inline constexpr double kEpsilonPrune = 1e-6;

struct UpdateParams {
    double alpha = 0.5;  // update speed
    double beta = 0.3;   // weight of the prior in the interpolation

    void validate() const {
        if (!std::isfinite(alpha) || alpha <= 0.0)
            throw Error(ErrorCode::NonPositiveAlpha, "alpha must be > 0");
        if (!std::isfinite(beta) || beta < 0.0 || beta > 1.0)
            throw Error(ErrorCode::InvalidParams, "beta must lie in [0,1]");
    }

    bool operator==(const UpdateParams&) const = default;
};

inline bool is_reserved_id(std::string_view id) { return id == kStartNode || id == kEndNode; }

inline void validate_tool_id(std::string_view id) {
    if (id.empty()) throw Error(ErrorCode::InvalidParams, "tool id must be non-empty");
    if (is_reserved_id(id))
        throw Error(ErrorCode::ReservedToolId, "'" + std::string(id) + "' is reserved");
}

// Registry entry: what a caller knows about a tool before any graph exists.
struct ToolSpec {
    std::string id;
    std::string description;
    std::string category;

    bool operator==(const ToolSpec&) const = default;
};

struct ToolNode {
    std::string id;
    std::string description;
    std::string category;
    std::int64_t accumulated_score = 0;
    bool active = true;

    bool operator==(const ToolNode&) const = default;
};

struct Edge {
    std::string from;
    std::string to;
    double prior_weight = 0.0;
    double current_weight = 0.0;

    bool operator==(const Edge&) const = default;
};

struct Successor {
    std::string id;
    double weight = 0.0;

    bool operator==(const Successor&) const = default;
};

struct DegreeEntry {
    std::string node;
    std::size_t out_degree = 0;
    double row_sum_deviation = 0.0;
    bool flagged = false;
};

struct DegreeReport {
    std::vector<DegreeEntry> rows;  // sorted by node id
    bool any_flagged = false;

    const DegreeEntry* find(std::string_view node) const {
        for (const auto& r : rows)
            if (r.node == node) return &r;
        return nullptr;
    }

    // Largest out-degree among tool rows ("start" excluded).
    std::size_t max_tool_out_degree() const {
        std::size_t best = 0;
        for (const auto& r : rows)
            if (r.node != kStartNode) best = std::max(best, r.out_degree);
        return best;
    }
};

namespace detail {
struct GraphAccess;
}

// Weighted directed tool graph with implicit "start" and "end" nodes.
//
// Node indices: 0 is "start", 1 is "end", tools follow sorted by id. Out-rows
// are kept sorted by target index. The graph is a plain value: copy it to hand
// it to another thread, share const references for concurrent reads.
class ToolGraph {
public:
    using NodeIndex = std::size_t;
    static constexpr NodeIndex kStartIndex = 0;
    static constexpr NodeIndex kEndIndex = 1;

    struct OutEdge {
        NodeIndex to = 0;
        double prior = 0.0;
        double current = 0.0;

        bool operator==(const OutEdge&) const = default;
    };

    ToolGraph() = default;

    // Non-informative graph: every tool reaches every tool and "end" with
    // weight 1/(N+1); "start" reaches every tool with weight 1/N.
    static ToolGraph uniform(std::span<const ToolSpec> tools, UpdateParams params = {}) {
        ToolGraph g = with_nodes(tools, params);
        const std::size_t n = g.tools_.size();
        const double tool_w = 1.0 / static_cast<double>(n + 1);
        const double start_w = 1.0 / static_cast<double>(n);
        for (NodeIndex t = 2; t < n + 2; ++t) g.out_[kStartIndex].push_back({t, start_w, start_w});
        for (NodeIndex i = 2; i < n + 2; ++i) {
            auto& row = g.out_[i];
            row.reserve(n + 1);
            row.push_back({kEndIndex, tool_w, tool_w});
            for (NodeIndex j = 2; j < n + 2; ++j) row.push_back({j, tool_w, tool_w});
        }
        return g;
    }

    // Assembles a graph from explicit nodes and edges, checking every
    // structural axiom. Row sums are not enforced here; degree_check reports them.
    static ToolGraph from_parts(std::vector<ToolNode> nodes, std::span<const Edge> edges,
                                UpdateParams params, std::uint64_t iteration) {
        std::vector<ToolSpec> specs;
        specs.reserve(nodes.size());
        for (const auto& n : nodes) specs.push_back({n.id, n.description, n.category});
        ToolGraph g = with_nodes(specs, params);
        g.iteration_ = iteration;
        for (auto& n : nodes) {
            auto idx = *g.find(n.id);
            g.tools_[idx - 2] = std::move(n);
        }
        for (const auto& e : edges) {
            auto from = g.find(e.from);
            auto to = g.find(e.to);
            if (!from || !to)
                throw Error(ErrorCode::InvalidGraph, "edge " + e.from + "->" + e.to + " references unknown node");
            if (*from == kEndIndex) throw Error(ErrorCode::InvalidGraph, "edge leaves 'end'");
            if (*to == kStartIndex) throw Error(ErrorCode::InvalidGraph, "edge enters 'start'");
            if (*from == kStartIndex && *to == kEndIndex)
                throw Error(ErrorCode::InvalidGraph, "'start' must not connect to 'end'");
            for (double w : {e.prior_weight, e.current_weight})
                if (!std::isfinite(w) || w < 0.0 || w > 1.0)
                    throw Error(ErrorCode::InvalidGraph, "edge " + e.from + "->" + e.to + " weight outside [0,1]");
            g.out_[*from].push_back({*to, e.prior_weight, e.current_weight});
        }
        for (auto& row : g.out_) {
            std::sort(row.begin(), row.end(), [](const OutEdge& a, const OutEdge& b) { return a.to < b.to; });
            for (std::size_t k = 1; k < row.size(); ++k)
                if (row[k].to == row[k - 1].to) throw Error(ErrorCode::InvalidGraph, "duplicate edge");
        }
        g.check_axioms();
        return g;
    }

    const UpdateParams& params() const noexcept { return params_; }
    std::uint64_t iteration() const noexcept { return iteration_; }
    std::size_t tool_count() const noexcept { return tools_.size(); }
    std::size_t node_count() const noexcept { return names_.size(); }

    // Tool nodes in id order.
    const std::vector<ToolNode>& tools() const noexcept { return tools_; }

    std::optional<NodeIndex> find(std::string_view id) const {
        auto it = index_.find(id);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    bool contains(std::string_view id) const { return find(id).has_value(); }

    const std::string& name(NodeIndex idx) const { return names_.at(idx); }

    const ToolNode& tool(std::string_view id) const {
        auto idx = find(id);
        if (!idx || *idx < 2) throw Error(ErrorCode::UnknownNode, "no tool '" + std::string(id) + "'");
        return tools_[*idx - 2];
    }

    std::span<const OutEdge> out_edges(NodeIndex idx) const { return out_.at(idx); }

    std::optional<Edge> edge(std::string_view from, std::string_view to) const {
        auto f = find(from);
        auto t = find(to);
        if (!f || !t) return std::nullopt;
        const auto& row = out_[*f];
        auto it = std::lower_bound(row.begin(), row.end(), *t,
                                   [](const OutEdge& e, NodeIndex target) { return e.to < target; });
        if (it == row.end() || it->to != *t) return std::nullopt;
        return Edge{names_[*f], names_[*t], it->prior, it->current};
    }

    std::size_t edge_count() const {
        std::size_t n = 0;
        for (const auto& row : out_) n += row.size();
        return n;
    }

    // All edges ordered by (from, to) id.
    std::vector<Edge> edges() const {
        std::vector<NodeIndex> order(names_.size());
        for (NodeIndex i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](NodeIndex a, NodeIndex b) { return names_[a] < names_[b]; });
        std::vector<Edge> out;
        out.reserve(edge_count());
        for (NodeIndex from : order) {
            std::vector<const OutEdge*> row;
            for (const auto& e : out_[from]) row.push_back(&e);
            std::sort(row.begin(), row.end(),
                      [&](const OutEdge* a, const OutEdge* b) { return names_[a->to] < names_[b->to]; });
            for (const OutEdge* e : row) out.push_back({names_[from], names_[e->to], e->prior, e->current});
        }
        return out;
    }

    // Visible out-neighbors: weight above kEpsilonPrune, inactive tools hidden
    // unless they are the source itself. Ordered by weight descending, then id.
    std::vector<Successor> successors(std::string_view from) const {
        auto idx = find(from);
        if (!idx) throw Error(ErrorCode::UnknownNode, "no node '" + std::string(from) + "'");
        if (*idx == kEndIndex) throw Error(ErrorCode::EndHasNoSuccessors, "'end' is a sink");
        std::vector<Successor> out;
        for (const auto& e : out_[*idx]) {
            if (e.current <= kEpsilonPrune) continue;
            if (e.to >= 2 && e.to != *idx && !tools_[e.to - 2].active) continue;
            out.push_back({names_[e.to], e.current});
        }
        std::sort(out.begin(), out.end(), [](const Successor& a, const Successor& b) {
            if (a.weight != b.weight) return a.weight > b.weight;
            return a.id < b.id;
        });
        return out;
    }

    void set_active(std::string_view tool_id, bool active) {
        auto idx = find(tool_id);
        if (!idx || *idx < 2) throw Error(ErrorCode::UnknownNode, "no tool '" + std::string(tool_id) + "'");
        tools_[*idx - 2].active = active;
    }

    DegreeReport degree_check(double epsilon_prune = kEpsilonPrune) const {
        DegreeReport report;
        for (NodeIndex i = 0; i < names_.size(); ++i) {
            if (i == kEndIndex) continue;
            DegreeEntry entry{names_[i], 0, 0.0, false};
            double sum = 0.0;
            for (const auto& e : out_[i]) {
                sum += e.current;
                if (e.current > epsilon_prune) ++entry.out_degree;
            }
            entry.row_sum_deviation = std::abs(sum - 1.0);
            entry.flagged = !(entry.row_sum_deviation <= kRowTolerance);
            report.any_flagged = report.any_flagged || entry.flagged;
            report.rows.push_back(std::move(entry));
        }
        std::sort(report.rows.begin(), report.rows.end(),
                  [](const DegreeEntry& a, const DegreeEntry& b) { return a.node < b.node; });
        return report;
    }

    bool operator==(const ToolGraph& other) const {
        return params_ == other.params_ && iteration_ == other.iteration_ && tools_ == other.tools_ &&
               out_ == other.out_;
    }

private:
    friend struct detail::GraphAccess;

    static ToolGraph with_nodes(std::span<const ToolSpec> tools, UpdateParams params) {
        params.validate();
        if (tools.empty()) throw Error(ErrorCode::EmptyToolSet, "at least one tool is required");
        ToolGraph g;
        g.params_ = params;
        for (const auto& t : tools) validate_tool_id(t.id);
        std::vector<ToolSpec> sorted(tools.begin(), tools.end());
        std::sort(sorted.begin(), sorted.end(), [](const ToolSpec& a, const ToolSpec& b) { return a.id < b.id; });
        for (std::size_t k = 1; k < sorted.size(); ++k)
            if (sorted[k].id == sorted[k - 1].id)
                throw Error(ErrorCode::DuplicateToolId, "tool '" + sorted[k].id + "' listed twice");
        g.names_ = {std::string(kStartNode), std::string(kEndNode)};
        g.index_.emplace(std::string(kStartNode), kStartIndex);
        g.index_.emplace(std::string(kEndNode), kEndIndex);
        for (auto& t : sorted) {
            g.index_.emplace(t.id, g.names_.size());
            g.names_.push_back(t.id);
            g.tools_.push_back({std::move(t.id), std::move(t.description), std::move(t.category), 0, true});
        }
        g.out_.resize(g.names_.size());
        return g;
    }

    bool has_edge(NodeIndex from, NodeIndex to) const {
        const auto& row = out_[from];
        return std::binary_search(row.begin(), row.end(), OutEdge{to, 0, 0},
                                  [](const OutEdge& a, const OutEdge& b) { return a.to < b.to; });
    }

    void check_axioms() const {
        for (NodeIndex t = 2; t < names_.size(); ++t) {
            if (!has_edge(t, t)) throw Error(ErrorCode::InvalidGraph, "missing self-loop on '" + names_[t] + "'");
            if (!has_edge(t, kEndIndex)) throw Error(ErrorCode::InvalidGraph, "missing '" + names_[t] + "'->end");
            if (!has_edge(kStartIndex, t)) throw Error(ErrorCode::InvalidGraph, "missing start->'" + names_[t] + "'");
        }
    }

    UpdateParams params_{};
    std::uint64_t iteration_ = 0;
    std::vector<std::string> names_;
    std::vector<ToolNode> tools_;
    std::map<std::string, NodeIndex, std::less<>> index_;
    std::vector<std::vector<OutEdge>> out_;
};

namespace detail {

// Mutation hooks reserved for the construction routines.
struct GraphAccess {
    static std::vector<ToolGraph::OutEdge>& row(ToolGraph& g, ToolGraph::NodeIndex i) { return g.out_[i]; }
    static ToolNode& node(ToolGraph& g, ToolGraph::NodeIndex i) { return g.tools_[i - 2]; }
    static void bump_iteration(ToolGraph& g) { ++g.iteration_; }
    static ToolGraph empty_with(std::span<const ToolSpec> tools, UpdateParams params) {
        return ToolGraph::with_nodes(tools, params);
    }
    static void verify(const ToolGraph& g) { g.check_axioms(); }
};

}  // namespace detail

}  // namespace toolnet
