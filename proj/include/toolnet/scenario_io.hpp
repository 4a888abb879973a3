#pragma once

// JSON forms of scenario specs, sparsity reports and token comparisons.

#include "toolnet/io.hpp"
#include "toolnet/simulation.hpp"

#include <filesystem>
#include <string>

namespace toolnet {

namespace detail {

inline std::string_view to_string(AgentKind k) { return k == AgentKind::scripted ? "scripted" : "stochastic"; }
inline std::string_view to_string(ScenarioMode m) { return m == ScenarioMode::toolnet ? "toolnet" : "full_list"; }
inline std::string_view to_string(StartMode m) { return m == StartMode::graph ? "graph" : "retrieval"; }

template <typename Enum, std::size_t N>
Enum parse_enum(std::string_view s, const std::array<Enum, N>& values, std::string_view what) {
    for (auto v : values)
        if (detail::to_string(v) == s) return v;
    throw Error(ErrorCode::InvalidSpec, "unknown " + std::string(what) + " '" + std::string(s) + "'");
}

}  // namespace detail

inline json expectations_to_json(const Expectations& e) {
    json j = json::object();
    json bounds = json::array();
    for (const auto& b : e.nonincreasing_after) bounds.push_back({{"tool", b.tool}, {"iteration", b.iteration}});
    j["nonincreasing_after"] = std::move(bounds);
    j["final_score_positive"] = e.final_score_positive;
    j["final_score_nonpositive"] = e.final_score_nonpositive;
    if (e.crossover) {
        json c = {{"primary", e.crossover->primary}, {"fallback", e.crossover->fallback}};
        if (e.crossover->by_iteration) c["by_iteration"] = *e.crossover->by_iteration;
        j["crossover"] = std::move(c);
    }
    return j;
}

inline Expectations expectations_from_json(const json& j) {
    constexpr std::string_view what = "scenario.expect";
    Expectations e;
    if (j.contains("nonincreasing_after"))
        for (const auto& b : j.at("nonincreasing_after"))
            e.nonincreasing_after.push_back(
                {detail::field<std::string>(b, "tool", what), detail::field<std::uint64_t>(b, "iteration", what)});
    e.final_score_positive = detail::field_or<std::vector<std::string>>(j, "final_score_positive", {}, what);
    e.final_score_nonpositive = detail::field_or<std::vector<std::string>>(j, "final_score_nonpositive", {}, what);
    if (j.contains("crossover")) {
        const json& c = j.at("crossover");
        CrossoverExpectation x{detail::field<std::string>(c, "primary", what),
                               detail::field<std::string>(c, "fallback", what), std::nullopt};
        if (c.contains("by_iteration")) x.by_iteration = detail::field<std::uint64_t>(c, "by_iteration", what);
        e.crossover = std::move(x);
    }
    return e;
}

inline json scenario_to_json(const ScenarioSpec& s) {
    json tools = json::array();
    for (const auto& t : s.tools) {
        json tj = {{"id", t.id},
                   {"description", t.description},
                   {"category", t.category},
                   {"behavior", to_string(t.behavior)}};
        if (t.crashes_at) tj["crashes_at"] = *t.crashes_at;
        tools.push_back(std::move(tj));
    }
    json prior = json::array();
    for (const auto& t : s.prior_corpus) prior.push_back(trajectory_to_json(t));
    json j = {{"name", s.name},
              {"mode", detail::to_string(s.mode)},
              {"seed", s.seed},
              {"iterations", s.iterations},
              {"params", {{"alpha", s.params.alpha}, {"beta", s.params.beta}}},
              {"session",
               {{"max_steps", s.max_steps},
                {"context_capacity", s.context_capacity},
                {"weight_format", to_string(s.weight_format)}}},
              {"start", {{"mode", detail::to_string(s.start_mode)}, {"k", s.k_retrieval}}},
              {"queries", s.queries},
              {"tools", std::move(tools)},
              {"agent", {{"kind", detail::to_string(s.agent.kind)}, {"script", s.agent.script}}},
              {"evaluator",
               {{"base", s.evaluator.base},
                {"modifiers",
                 {{"success", s.evaluator.success_modifier},
                  {"failure", s.evaluator.failure_modifier},
                  {"gave_up", s.evaluator.gave_up_modifier}}}}},
              {"prior_corpus", std::move(prior)},
              {"prior_success_only", s.prior_success_only}};
    if (s.expect) j["expect"] = expectations_to_json(*s.expect);
    return j;
}

inline ScenarioSpec scenario_from_json(const json& j) {
    constexpr std::string_view what = "scenario";
    if (!j.is_object()) throw Error(ErrorCode::InvalidSpec, "scenario must be a JSON object");
    ScenarioSpec s;
    try {
        s.name = detail::field_or<std::string>(j, "name", "", what);
        s.mode = detail::parse_enum(detail::field_or<std::string>(j, "mode", "toolnet", what),
                                    std::array{ScenarioMode::toolnet, ScenarioMode::full_list}, "mode");
        s.seed = detail::field_or<std::uint64_t>(j, "seed", 0, what);
        s.iterations = detail::field<std::uint64_t>(j, "iterations", what);
        if (j.contains("params")) {
            const json& p = j.at("params");
            s.params.alpha = detail::field_or<double>(p, "alpha", s.params.alpha, what);
            s.params.beta = detail::field_or<double>(p, "beta", s.params.beta, what);
        }
        if (j.contains("session")) {
            const json& c = j.at("session");
            s.max_steps = detail::field_or<std::size_t>(c, "max_steps", s.max_steps, what);
            s.context_capacity = detail::field_or<std::size_t>(c, "context_capacity", s.context_capacity, what);
            s.weight_format =
                parse_weight_format(detail::field_or<std::string>(c, "weight_format", "times10", what));
        }
        if (j.contains("start")) {
            const json& st = j.at("start");
            s.start_mode = detail::parse_enum(detail::field_or<std::string>(st, "mode", "graph", what),
                                              std::array{StartMode::graph, StartMode::retrieval}, "start mode");
            s.k_retrieval = detail::field_or<std::size_t>(st, "k", s.k_retrieval, what);
        }
        s.queries = detail::field_or<std::vector<std::string>>(j, "queries", s.queries, what);
        for (const auto& t : detail::field<json>(j, "tools", what)) {
            ScenarioTool tool{detail::field<std::string>(t, "id", what),
                              detail::field_or<std::string>(t, "description", "", what),
                              detail::field_or<std::string>(t, "category", "", what),
                              parse_tool_behavior(detail::field_or<std::string>(t, "behavior", "answer_relevant", what)),
                              std::nullopt};
            if (t.contains("crashes_at")) tool.crashes_at = detail::field<std::uint64_t>(t, "crashes_at", what);
            s.tools.push_back(std::move(tool));
        }
        const json& agent = detail::field<json>(j, "agent", what);
        s.agent.kind = detail::parse_enum(detail::field<std::string>(agent, "kind", what),
                                          std::array{AgentKind::scripted, AgentKind::stochastic}, "agent kind");
        s.agent.script = detail::field_or<std::vector<std::vector<std::string>>>(agent, "script", {}, what);
        if (j.contains("evaluator")) {
            const json& ev = j.at("evaluator");
            for (const auto& [tool, base] : detail::field_or<std::map<std::string, int>>(ev, "base", {}, what))
                s.evaluator.base[tool] = base;
            if (ev.contains("modifiers")) {
                const json& m = ev.at("modifiers");
                s.evaluator.success_modifier = detail::field_or<int>(m, "success", 0, what);
                s.evaluator.failure_modifier = detail::field_or<int>(m, "failure", 0, what);
                s.evaluator.gave_up_modifier = detail::field_or<int>(m, "gave_up", 0, what);
            }
        }
        if (j.contains("prior_corpus"))
            for (const auto& t : j.at("prior_corpus")) s.prior_corpus.push_back(trajectory_from_json(t));
        s.prior_success_only = detail::field_or<bool>(j, "prior_success_only", true, what);
        if (j.contains("expect")) s.expect = expectations_from_json(j.at("expect"));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::InvalidSpec) throw;
        throw Error(ErrorCode::InvalidSpec, e.what());
    }
    validate_scenario(s);
    return s;
}

inline ScenarioSpec load_scenario(const std::filesystem::path& path) {
    return scenario_from_json(parse_json_text(read_text_file(path), "scenario"));
}

inline json sparsity_to_json(const SparsityReport& r) {
    json top = json::array();
    for (const auto& [id, n] : r.top_tools) top.push_back({{"id", id}, {"successor_count", n}});
    return {{"successor_count_histogram", r.successor_count_histogram},
            {"call_count_histogram", r.call_count_histogram},
            {"top_tools", std::move(top)},
            {"empty_successor_histogram", r.empty_successor_histogram}};
}

inline json token_comparison_to_json(const TokenComparison& c) {
    return {{"toolnet_tokens", c.toolnet_tokens},
            {"full_list_tokens", c.full_list_tokens},
            {"ratio", c.ratio ? json(*c.ratio) : json(nullptr)}};
}

}  // namespace toolnet
