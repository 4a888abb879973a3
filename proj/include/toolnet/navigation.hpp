#pragma once

#include "toolnet/construction.hpp"
#include "toolnet/error.hpp"
#include "toolnet/graph.hpp"
#include "toolnet/retrieval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <deque>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace toolnet {

// Name under which the "end" node is offered to a policy.
inline constexpr std::string_view kFinishTool = "Finish";
inline constexpr std::string_view kFinishDescription = "submit the final answer, or give up and restart";

// ---- weight rendering -------------------------------------------------------

enum class WeightFormat { none, div100, div10, integer, times10 };

inline std::string_view to_string(WeightFormat f) {
    switch (f) {
        case WeightFormat::none: return "none";
        case WeightFormat::div100: return "div100";
        case WeightFormat::div10: return "div10";
        case WeightFormat::integer: return "integer";
        case WeightFormat::times10: return "times10";
    }
    return "none";
}

inline WeightFormat parse_weight_format(std::string_view s) {
    for (auto f : {WeightFormat::none, WeightFormat::div100, WeightFormat::div10, WeightFormat::integer,
                   WeightFormat::times10})
        if (to_string(f) == s) return f;
    throw Error(ErrorCode::InvalidParams, "unknown weight format '" + std::string(s) + "'");
}

// Renders w in [0,1] from the percentage p = 100w. Rounding is half away from zero.
inline std::string render_weight(double w, WeightFormat fmt) {
    const double p = 100.0 * w;
    char buf[64];
    switch (fmt) {
        case WeightFormat::none: return {};
        case WeightFormat::div100: std::snprintf(buf, sizeof buf, "%.2f", p / 100.0); return buf;
        case WeightFormat::div10: std::snprintf(buf, sizeof buf, "%.1f", p / 10.0); return buf;
        case WeightFormat::integer: return std::to_string(std::llround(p));
        case WeightFormat::times10: return std::to_string(std::llround(10.0 * p));
    }
    return {};
}

struct ToolOption {
    std::string id;
    std::string description;
    double weight = 0.0;

    bool operator==(const ToolOption&) const = default;
};

// Numbered tool list in the given order; the order is never changed here.
inline std::string format_tool_context(std::span<const ToolOption> options, WeightFormat fmt) {
    std::string out = fmt == WeightFormat::none ? "Available tools:\n"
                                                : "Tool scores (higher is more recommended):\n";
    std::size_t rank = 1;
    for (const auto& o : options) {
        out += std::to_string(rank++) + ". " + o.id;
        if (fmt != WeightFormat::none) out += " (score: " + render_weight(o.weight, fmt) + ")";
        if (!o.description.empty()) out += " — " + o.description;
        out += "\n";
    }
    return out;
}

// ---- token accounting -------------------------------------------------------

// Count of maximal non-whitespace runs. A proxy, not a tokenizer.
inline std::size_t count_tokens(std::string_view text) {
    std::size_t n = 0;
    bool in_token = false;
    for (char c : text) {
        const bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
        if (!space && !in_token) ++n;
        in_token = !space;
    }
    return n;
}

// ---- session context --------------------------------------------------------

struct ContextEntry {
    std::string observation;
    std::string thought;
    std::string action;

    bool operator==(const ContextEntry&) const = default;
};

// Bounded FIFO of the most recent (observation, thought, action) tuples.
class SessionContext {
public:
    explicit SessionContext(std::size_t capacity = 8) : capacity_(capacity) {
        if (capacity == 0) throw Error(ErrorCode::InvalidParams, "context capacity must be >= 1");
    }

    void push(ContextEntry entry) {
        if (entries_.size() == capacity_) entries_.pop_front();
        entries_.push_back(std::move(entry));
    }

    std::size_t capacity() const noexcept { return capacity_; }
    std::size_t size() const noexcept { return entries_.size(); }
    const std::deque<ContextEntry>& entries() const noexcept { return entries_; }

    std::string render() const {
        std::string out;
        for (const auto& e : entries_)
            out += "Observation: " + e.observation + "\nThought: " + e.thought + "\nAction: " + e.action + "\n";
        return out;
    }

private:
    std::size_t capacity_;
    std::deque<ContextEntry> entries_;
};

// ---- policy / environment ---------------------------------------------------

struct Decision {
    std::string tool;  // an option id, or "Finish"
    std::string arguments;
    std::string thought;
};

class Policy {
public:
    virtual ~Policy() = default;
    virtual Decision choose(const SessionContext& context, std::string_view observation,
                            std::span<const ToolOption> options) = 0;
};

struct EnvironmentFault : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class Environment {
public:
    virtual ~Environment() = default;
    virtual std::string initial_observation() = 0;
    // May throw EnvironmentFault; the message becomes the observation.
    virtual std::string execute(std::string_view tool, std::string_view arguments) = 0;
    // Judged once the policy chose Finish.
    virtual Outcome final_outcome(const Trajectory& /*trajectory*/) const { return Outcome::success; }
};

// ---- session loop -----------------------------------------------------------

enum class OptionMode {
    graph,      // step 1 from the start set, then graph successors with weights
    full_list,  // every active tool at every step, no weights
};

struct SessionConfig {
    std::size_t max_steps = 8;
    std::size_t context_capacity = 8;
    WeightFormat weight_format = WeightFormat::times10;
    OptionMode mode = OptionMode::graph;
    std::string task_id;
};

struct SessionResult {
    Trajectory trajectory;
    bool finished = false;
    std::size_t steps_used = 0;
    std::size_t tokens_used = 0;

    bool operator==(const SessionResult&) const = default;
};

inline std::vector<ToolOption> start_options(const ToolGraph& g, const StartSet& start) {
    std::vector<ToolOption> options;
    for (const auto& c : start.ranked)
        options.push_back({c.id, g.tool(c.id).description, std::clamp(c.score, 0.0, 1.0)});
    options.push_back({std::string(kFinishTool), std::string(kFinishDescription), 0.0});
    return options;
}

// Successors of `previous` with "end" shown as Finish. Finish is appended
// with weight 0 when "end" is not a visible successor.
inline std::vector<ToolOption> successor_options(const ToolGraph& g, std::string_view previous) {
    std::vector<ToolOption> options;
    bool has_finish = false;
    for (const auto& s : g.successors(previous)) {
        if (s.id == kEndNode) {
            options.push_back({std::string(kFinishTool), std::string(kFinishDescription), s.weight});
            has_finish = true;
        } else {
            options.push_back({s.id, g.tool(s.id).description, s.weight});
        }
    }
    if (!has_finish) options.push_back({std::string(kFinishTool), std::string(kFinishDescription), 0.0});
    return options;
}

inline std::vector<ToolOption> full_list_options(const ToolGraph& g) {
    std::vector<ToolOption> options;
    for (const auto& t : g.tools())
        if (t.active) options.push_back({t.id, t.description, 0.0});
    options.push_back({std::string(kFinishTool), std::string(kFinishDescription), 0.0});
    return options;
}

inline std::string render_decision(const Decision& d) {
    return "Thought: " + d.thought + "\nAction: " + d.tool + "\nArguments: " + d.arguments + "\n";
}

// Runs one task. Every step costs count_tokens(prompt) + count_tokens(policy
// output), where the prompt is the context queue, the current observation and
// the formatted tool list. An option outside the list is rejected once and
// retried; a second miss in the same step aborts the session as a failure.
inline SessionResult run_session(const ToolGraph& g, const StartSet& start, Environment& env, Policy& policy,
                                 const SessionConfig& cfg = {}) {
    if (cfg.mode == OptionMode::graph && start.ranked.empty())
        throw Error(ErrorCode::InvalidParams, "start set is empty");
    if (g.contains(kFinishTool)) throw Error(ErrorCode::InvalidParams, "a tool may not be named 'Finish'");
    SessionResult result;
    result.trajectory.task_id = cfg.task_id;
    std::string observation = env.initial_observation();
    result.trajectory.query = observation;
    SessionContext context(cfg.context_capacity);
    const WeightFormat fmt = cfg.mode == OptionMode::full_list ? WeightFormat::none : cfg.weight_format;

    std::optional<std::string> previous;
    bool aborted = false;
    while (result.steps_used < cfg.max_steps && !result.finished && !aborted) {
        std::vector<ToolOption> options;
        if (cfg.mode == OptionMode::full_list)
            options = full_list_options(g);
        else if (!previous)
            options = start_options(g, start);
        else
            options = successor_options(g, *previous);
        const std::string prompt = context.render() + "Observation: " + observation + "\n" +
                                   format_tool_context(options, fmt);

        std::optional<Decision> accepted;
        for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
            Decision d = policy.choose(context, observation, options);
            result.tokens_used += count_tokens(prompt) + count_tokens(render_decision(d));
            const bool valid =
                std::any_of(options.begin(), options.end(), [&](const ToolOption& o) { return o.id == d.tool; });
            if (valid) accepted = std::move(d);
        }
        if (!accepted) {
            aborted = true;
            break;
        }
        ++result.steps_used;
        if (accepted->tool == kFinishTool) {
            result.finished = true;
            break;
        }
        std::string next;
        try {
            next = env.execute(accepted->tool, accepted->arguments);
        } catch (const EnvironmentFault& fault) {
            next = std::string("ERROR: ") + fault.what();
        }
        context.push({observation, accepted->thought, accepted->tool + "(" + accepted->arguments + ")"});
        result.trajectory.steps.push_back({accepted->tool, accepted->thought, accepted->arguments, next});
        observation = std::move(next);
        previous = accepted->tool;
    }

    if (result.finished)
        result.trajectory.outcome = env.final_outcome(result.trajectory);
    else if (aborted)
        result.trajectory.outcome = Outcome::failure;
    else
        result.trajectory.outcome = Outcome::gave_up;
    return result;
}

}  // namespace toolnet
