#pragma once

#include "toolnet/error.hpp"
#include "toolnet/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace toolnet {

enum class Outcome { success, failure, gave_up };

inline std::string_view to_string(Outcome o) {
    switch (o) {
        case Outcome::success: return "success";
        case Outcome::failure: return "failure";
        case Outcome::gave_up: return "gave_up";
    }
    return "failure";
}

inline Outcome parse_outcome(std::string_view s) {
    if (s == "success") return Outcome::success;
    if (s == "failure") return Outcome::failure;
    if (s == "gave_up") return Outcome::gave_up;
    throw Error(ErrorCode::ParseError, "unknown outcome '" + std::string(s) + "'");
}

struct Step {
    std::string tool;
    std::string thought;
    std::string arguments;
    std::string observation;

    bool operator==(const Step&) const = default;
};

// One task's tool calls. The terminal "end" is implicit and never stored.
struct Trajectory {
    std::string task_id;
    std::string query;
    std::vector<Step> steps;
    Outcome outcome = Outcome::failure;

    bool operator==(const Trajectory&) const = default;
};

inline constexpr int kMinScore = -3;
inline constexpr int kMaxScore = 3;

struct ToolScore {
    std::string tool;
    int score = 0;
    std::string reason;

    bool operator==(const ToolScore&) const = default;
};

struct EvaluatorReport {
    std::string trajectory_id;
    std::vector<ToolScore> scores;

    bool operator==(const EvaluatorReport&) const = default;
};

// 2-gram estimate of the transition weights. Each trajectory contributes the
// bigrams of [tool_1, ..., tool_n, end]; a row is count(i,j)/count(i).
//
// Observed sources get their observed edges plus the mandatory self-loop and
// ->end edge (zero weight when unobserved). Unobserved sources keep the
// uniform row of ToolGraph::uniform. "start" is uniform over all tools.
// Prior and current weights are equal on return.
inline ToolGraph static_construct(std::span<const ToolSpec> tools, std::span<const Trajectory> corpus,
                                  bool success_only = true, UpdateParams params = {}) {
    ToolGraph g = detail::GraphAccess::empty_with(tools, params);
    const std::size_t n_nodes = g.node_count();
    using Idx = ToolGraph::NodeIndex;

    std::vector<std::map<Idx, std::uint64_t>> counts(n_nodes);
    std::vector<std::uint64_t> totals(n_nodes, 0);
    std::size_t used = 0;
    for (const auto& t : corpus) {
        std::vector<Idx> seq;
        seq.reserve(t.steps.size() + 1);
        for (const auto& s : t.steps) {
            auto idx = g.find(s.tool);
            if (!idx || *idx < 2)
                throw Error(ErrorCode::UnknownToolInCorpus,
                            "trajectory '" + t.task_id + "' uses unknown tool '" + s.tool + "'");
            seq.push_back(*idx);
        }
        if (success_only && t.outcome != Outcome::success) continue;
        if (seq.empty()) continue;
        ++used;
        seq.push_back(ToolGraph::kEndIndex);
        for (std::size_t k = 0; k + 1 < seq.size(); ++k) {
            ++counts[seq[k]][seq[k + 1]];
            ++totals[seq[k]];
        }
    }
    if (used == 0) throw Error(ErrorCode::EmptyCorpus, "no usable trajectories in corpus");

    const std::size_t n_tools = g.tool_count();
    const double start_w = 1.0 / static_cast<double>(n_tools);
    const double uniform_w = 1.0 / static_cast<double>(n_tools + 1);
    auto& start_row = detail::GraphAccess::row(g, ToolGraph::kStartIndex);
    for (Idx t = 2; t < n_nodes; ++t) start_row.push_back({t, start_w, start_w});

    for (Idx i = 2; i < n_nodes; ++i) {
        auto& row = detail::GraphAccess::row(g, i);
        if (totals[i] == 0) {
            row.push_back({ToolGraph::kEndIndex, uniform_w, uniform_w});
            for (Idx j = 2; j < n_nodes; ++j) row.push_back({j, uniform_w, uniform_w});
            continue;
        }
        auto observed = counts[i];
        observed.try_emplace(ToolGraph::kEndIndex, 0);
        observed.try_emplace(i, 0);
        const double denom = static_cast<double>(totals[i]);
        for (const auto& [j, c] : observed) {
            const double w = static_cast<double>(c) / denom;
            row.push_back({j, w, w});
        }
    }
    return g;
}

// Maps an accumulated score to a positive multiplier: alpha*x + 1 for x >= 0,
// exp(alpha*x) below zero. Continuous at 0 with f(0) = 1.
inline double f_map(std::int64_t x, double alpha) {
    if (!std::isfinite(alpha) || alpha <= 0.0) throw Error(ErrorCode::NonPositiveAlpha, "alpha must be > 0");
    const double ax = alpha * static_cast<double>(x);
    return x >= 0 ? ax + 1.0 : std::exp(ax);
}

inline void validate_report(const ToolGraph& g, const EvaluatorReport& report) {
    std::set<std::string_view> seen;
    for (const auto& s : report.scores) {
        auto idx = g.find(s.tool);
        if (!idx || *idx < 2)
            throw Error(ErrorCode::UnknownToolInReport, "report names unknown tool '" + s.tool + "'");
        if (s.score < kMinScore || s.score > kMaxScore)
            throw Error(ErrorCode::ScoreOutOfRange,
                        "score " + std::to_string(s.score) + " for '" + s.tool + "' outside [-3,3]");
        if (!seen.insert(s.tool).second)
            throw Error(ErrorCode::DuplicateReportEntry, "tool '" + s.tool + "' scored twice");
    }
}

// Recomputes every tool row from the accumulated scores after folding the
// report in. For source i and neighbor j:
//   dw(i,j) = f(s_j) / sum_{k in out(i)} f(s_k),   s_end = 0
//   w(i,j)  = beta * prior(i,j) + (1 - beta) * dw(i,j)
// "start" keeps its weights. The report is validated before anything changes.
inline void apply_evaluation_in_place(ToolGraph& g, const EvaluatorReport& report) {
    validate_report(g, report);
    for (const auto& s : report.scores) {
        auto idx = *g.find(s.tool);
        detail::GraphAccess::node(g, idx).accumulated_score += s.score;
    }
    detail::GraphAccess::bump_iteration(g);

    const double alpha = g.params().alpha;
    const double beta = g.params().beta;
    std::vector<double> f(g.node_count(), 1.0);
    for (ToolGraph::NodeIndex i = 2; i < g.node_count(); ++i)
        f[i] = f_map(g.tools()[i - 2].accumulated_score, alpha);

    for (ToolGraph::NodeIndex i = 2; i < g.node_count(); ++i) {
        auto& row = detail::GraphAccess::row(g, i);
        double denom = 0.0;
        for (const auto& e : row) denom += f[e.to];
        for (auto& e : row) e.current = beta * e.prior + (1.0 - beta) * (f[e.to] / denom);
    }
}

inline ToolGraph apply_evaluation(ToolGraph g, const EvaluatorReport& report) {
    apply_evaluation_in_place(g, report);
    return g;
}

// Deterministic stand-in for the LLM evaluator.
struct OracleRubric {
    std::map<std::string, int, std::less<>> base;
    int success_modifier = 0;
    int failure_modifier = 0;
    int gave_up_modifier = 0;

    int modifier(Outcome o) const {
        switch (o) {
            case Outcome::success: return success_modifier;
            case Outcome::failure: return failure_modifier;
            case Outcome::gave_up: return gave_up_modifier;
        }
        return 0;
    }

    bool operator==(const OracleRubric&) const = default;
};

// One entry per distinct tool in first-use order: clamp(base + modifier, -3, 3).
// Tools missing from the rubric score 0.
inline EvaluatorReport evaluate_trajectory_oracle(const Trajectory& t, const OracleRubric& rubric) {
    EvaluatorReport report{t.task_id, {}};
    std::set<std::string_view> seen;
    for (const auto& step : t.steps) {
        if (!seen.insert(step.tool).second) continue;
        auto it = rubric.base.find(step.tool);
        if (it == rubric.base.end()) {
            report.scores.push_back({step.tool, 0, "not in rubric"});
            continue;
        }
        const int raw = it->second + rubric.modifier(t.outcome);
        const int score = std::clamp(raw, kMinScore, kMaxScore);
        report.scores.push_back({step.tool, score,
                                 "base " + std::to_string(it->second) + ", outcome " +
                                     std::string(to_string(t.outcome)) + " modifier " +
                                     std::to_string(rubric.modifier(t.outcome))});
    }
    return report;
}

}  // namespace toolnet
