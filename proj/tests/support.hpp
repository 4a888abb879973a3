#pragma once

// Test-only helpers: independent oracles, random generators and the scenario
// fixtures shared by the unit and acceptance suites.

#include "toolnet/toolnet.hpp"

#include <cstdint>
#include <cstdio>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace toolnet::testing {

inline std::vector<ToolSpec> make_tools(std::initializer_list<const char*> ids) {
    std::vector<ToolSpec> out;
    for (const char* id : ids) out.push_back({id, std::string("tool ") + id, ""});
    return out;
}

inline Trajectory make_trajectory(std::string task_id, std::vector<std::string> tools,
                                  Outcome outcome = Outcome::success) {
    Trajectory t{std::move(task_id), "q", {}, outcome};
    for (auto& tool : tools) t.steps.push_back({std::move(tool), "", "", ""});
    return t;
}

inline std::string tool_name(std::size_t i, std::size_t width = 2) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "t%0*zu", static_cast<int>(width), i);
    return buf;
}

// Brute-force 2-gram table: rows of (count(i,j), count(i)) built from the
// token sequences with "end" appended. Works on strings only and shares no
// code with static_construct.
struct BigramOracle {
    std::map<std::string, std::map<std::string, long>> pair_counts;
    std::map<std::string, long> source_counts;

    explicit BigramOracle(const std::vector<Trajectory>& corpus, bool success_only = true) {
        for (const auto& t : corpus) {
            if (success_only && t.outcome != Outcome::success) continue;
            std::vector<std::string> seq;
            for (const auto& s : t.steps) seq.push_back(s.tool);
            seq.push_back("end");
            for (std::size_t k = 0; k + 1 < seq.size(); ++k) {
                pair_counts[seq[k]][seq[k + 1]] += 1;
                source_counts[seq[k]] += 1;
            }
        }
    }

    // Expected weight of (from,to), or nullopt for an unobserved source row.
    std::optional<double> weight(const std::string& from, const std::string& to) const {
        auto src = source_counts.find(from);
        if (src == source_counts.end()) return std::nullopt;
        auto row = pair_counts.at(from);
        auto it = row.find(to);
        const long c = it == row.end() ? 0 : it->second;
        return static_cast<double>(c) / static_cast<double>(src->second);
    }
};

// Random corpus: up to max_tools tools, up to max_trajectories trajectories of
// 1..max_steps steps, mixed outcomes.
struct RandomCorpus {
    std::vector<ToolSpec> tools;
    std::vector<Trajectory> corpus;
};

inline RandomCorpus random_corpus(std::mt19937_64& rng, std::size_t max_tools = 20, std::size_t max_traj = 50,
                                  std::size_t max_steps = 10) {
    std::uniform_int_distribution<std::size_t> n_tools_d(1, max_tools);
    std::uniform_int_distribution<std::size_t> n_traj_d(1, max_traj);
    std::uniform_int_distribution<std::size_t> n_steps_d(1, max_steps);
    std::uniform_int_distribution<int> outcome_d(0, 3);
    RandomCorpus rc;
    const std::size_t n = n_tools_d(rng);
    for (std::size_t i = 0; i < n; ++i) rc.tools.push_back({tool_name(i), "random tool " + tool_name(i), ""});
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    const std::size_t m = n_traj_d(rng);
    for (std::size_t k = 0; k < m; ++k) {
        std::vector<std::string> seq;
        const std::size_t len = n_steps_d(rng);
        for (std::size_t s = 0; s < len; ++s) seq.push_back(tool_name(pick(rng)));
        const int o = outcome_d(rng);
        // at least one success so success_only filtering never empties the corpus
        const Outcome outcome = (k == 0 || o < 2) ? Outcome::success : (o == 2 ? Outcome::failure : Outcome::gave_up);
        rc.corpus.push_back(make_trajectory("traj-" + std::to_string(k), std::move(seq), outcome));
    }
    return rc;
}

inline EvaluatorReport random_report(std::mt19937_64& rng, const ToolGraph& g) {
    std::uniform_int_distribution<int> score_d(kMinScore, kMaxScore);
    std::bernoulli_distribution include(0.6);
    EvaluatorReport r{"random", {}};
    for (const auto& t : g.tools())
        if (include(rng)) r.scores.push_back({t.id, score_d(rng), "random"});
    return r;
}

// ---- scenario fixtures -------------------------------------------------------

// Two functionally identical weather tools; the primary crashes at iteration 50.
inline ScenarioSpec crash_fallback_scenario(std::uint64_t iterations = 380, std::uint64_t seed = 2024) {
    ScenarioSpec s;
    s.name = "crash-fallback";
    s.seed = seed;
    s.iterations = iterations;
    s.tools = {
        {"planner", "plan the request and decide which service to call", "planning",
         ToolBehavior::noisy_nothing_found, std::nullopt},
        {"weather_api", "current weather and forecast for a city", "weather", ToolBehavior::answer_relevant, 50},
        {"weather_api_backup", "current weather and forecast for a city", "weather", ToolBehavior::answer_relevant,
         std::nullopt},
    };
    s.queries = {"what is the weather in Lisbon tomorrow"};
    s.agent = {AgentKind::scripted, {{"planner"}, {"weather_api", "weather_api_backup"}}};
    s.evaluator.base = {{"planner", 0}, {"weather_api", 2}, {"weather_api_backup", 2}};
    s.evaluator.failure_modifier = -1;
    return s;
}

// One relevant tool among three noisy ones, explored by a seeded stochastic agent.
inline ScenarioSpec noisy_tools_scenario(std::uint64_t iterations = 100, std::uint64_t seed = 7) {
    ScenarioSpec s;
    s.name = "noisy-tools";
    s.seed = seed;
    s.iterations = iterations;
    s.tools = {
        {"knowledge_base", "answer science questions from the curated knowledge base", "qa",
         ToolBehavior::answer_relevant, std::nullopt},
        {"web_search", "search the web", "noise", ToolBehavior::noisy_nothing_found, std::nullopt},
        {"archive_lookup", "look up archived pages", "noise", ToolBehavior::noisy_nothing_found, std::nullopt},
        {"number_oracle", "return a number", "noise", ToolBehavior::noisy_random_number, std::nullopt},
    };
    s.queries = {"which gas do plants absorb"};
    s.agent = {AgentKind::stochastic, {}};
    s.evaluator.base = {{"knowledge_base", 2}, {"web_search", -1}, {"archive_lookup", -1}, {"number_oracle", -1}};
    return s;
}

// n-tool pipeline library. The prior corpus makes tool i lead to i+1 and i+2
// only, so every row has at most self, i+1, i+2 and end (out-degree <= 4).
inline ScenarioSpec pipeline_scenario(std::size_t n_tools, ScenarioMode mode, std::uint64_t iterations = 10,
                                      std::size_t script_len = 5) {
    ScenarioSpec s;
    s.name = "pipeline-" + std::to_string(n_tools);
    s.mode = mode;
    s.seed = 11;
    s.iterations = iterations;
    s.start_mode = StartMode::retrieval;
    s.k_retrieval = 1;
    const std::size_t width = n_tools > 100 ? 4 : 3;
    for (std::size_t i = 0; i < n_tools; ++i) {
        const auto id = tool_name(i, width);
        s.tools.push_back({id, "tool " + id + " handles one stage of the data pipeline", "pipeline",
                           ToolBehavior::answer_relevant, std::nullopt});
        s.evaluator.base[id] = 1;
    }
    for (std::size_t i = 0; i < n_tools; ++i) {
        s.prior_corpus.push_back(make_trajectory("p" + std::to_string(i) + "a",
                                                 {tool_name(i, width), tool_name((i + 1) % n_tools, width)}));
        s.prior_corpus.push_back(make_trajectory("p" + std::to_string(i) + "b",
                                                 {tool_name(i, width), tool_name((i + 2) % n_tools, width)}));
    }
    s.queries = {"begin the pipeline with " + tool_name(0, width)};
    for (std::size_t k = 0; k < script_len; ++k) s.agent.script.push_back({tool_name(k, width)});
    return s;
}

}  // namespace toolnet::testing
