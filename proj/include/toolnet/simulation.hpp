#pragma once

#include "toolnet/construction.hpp"
#include "toolnet/error.hpp"
#include "toolnet/graph.hpp"
#include "toolnet/navigation.hpp"
#include "toolnet/retrieval.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace toolnet {

// ---- scenario description ---------------------------------------------------

enum class ToolBehavior { answer_relevant, noisy_nothing_found, noisy_random_number };

inline std::string_view to_string(ToolBehavior b) {
    switch (b) {
        case ToolBehavior::answer_relevant: return "answer_relevant";
        case ToolBehavior::noisy_nothing_found: return "noisy_nothing_found";
        case ToolBehavior::noisy_random_number: return "noisy_random_number";
    }
    return "answer_relevant";
}

inline ToolBehavior parse_tool_behavior(std::string_view s) {
    for (auto b : {ToolBehavior::answer_relevant, ToolBehavior::noisy_nothing_found, ToolBehavior::noisy_random_number})
        if (to_string(b) == s) return b;
    throw Error(ErrorCode::InvalidSpec, "unknown tool behavior '" + std::string(s) + "'");
}

struct ScenarioTool {
    std::string id;
    std::string description;
    std::string category;
    ToolBehavior behavior = ToolBehavior::answer_relevant;
    std::optional<std::uint64_t> crashes_at;  // first iteration (1-based) at which the tool errors

    bool operator==(const ScenarioTool&) const = default;
};

enum class AgentKind {
    // Walks a script of steps; each step names the acceptable tools and the
    // agent takes the highest-ranked acceptable option. Finish when nothing
    // acceptable is offered or the script is exhausted.
    scripted,
    // Samples a non-Finish option proportionally to its shown weight (uniform
    // when all are zero); chooses Finish once a tool has answered.
    stochastic,
};

struct AgentSpec {
    AgentKind kind = AgentKind::scripted;
    std::vector<std::vector<std::string>> script;

    bool operator==(const AgentSpec&) const = default;
};

enum class ScenarioMode { toolnet, full_list };
enum class StartMode { graph, retrieval };

struct ScoreBound {
    std::string tool;
    std::uint64_t iteration = 0;

    bool operator==(const ScoreBound&) const = default;
};

struct CrossoverExpectation {
    std::string primary;
    std::string fallback;
    std::optional<std::uint64_t> by_iteration;

    bool operator==(const CrossoverExpectation&) const = default;
};

// Optional checks evaluated after a run; the CLI turns a failed check into exit code 3.
struct Expectations {
    std::vector<ScoreBound> nonincreasing_after;
    std::vector<std::string> final_score_positive;
    std::vector<std::string> final_score_nonpositive;
    std::optional<CrossoverExpectation> crossover;

    bool operator==(const Expectations&) const = default;
};

struct ScenarioSpec {
    std::string name;
    std::vector<ScenarioTool> tools;
    AgentSpec agent;
    OracleRubric evaluator;
    std::uint64_t iterations = 0;
    std::uint64_t seed = 0;
    ScenarioMode mode = ScenarioMode::toolnet;
    UpdateParams params;
    StartMode start_mode = StartMode::graph;
    std::size_t k_retrieval = kDefaultRetrievalK;
    std::vector<std::string> queries{"solve the task"};
    std::size_t max_steps = 8;
    std::size_t context_capacity = 8;
    WeightFormat weight_format = WeightFormat::times10;
    std::vector<Trajectory> prior_corpus;  // empty: start from the uniform graph
    bool prior_success_only = true;
    std::optional<Expectations> expect;

    std::vector<ToolSpec> registry() const {
        std::vector<ToolSpec> out;
        for (const auto& t : tools) out.push_back({t.id, t.description, t.category});
        return out;
    }

    bool operator==(const ScenarioSpec&) const = default;
};

// Rubric base for a tool once it has crashed.
inline constexpr int kCrashedToolBase = -2;
inline constexpr std::string_view kAnswerPrefix = "ANSWER:";
inline constexpr std::string_view kCrashMessage = "tool unavailable";

inline void validate_scenario(const ScenarioSpec& spec) {
    auto bad = [](const std::string& msg) { throw Error(ErrorCode::InvalidSpec, msg); };
    if (spec.tools.empty()) bad("scenario has no tools");
    std::set<std::string_view> ids;
    for (const auto& t : spec.tools) {
        if (t.id.empty() || is_reserved_id(t.id) || t.id == kFinishTool) bad("invalid tool id '" + t.id + "'");
        if (!ids.insert(t.id).second) bad("duplicate tool id '" + t.id + "'");
        if (t.crashes_at && *t.crashes_at < 1) bad("crashes_at must be >= 1 for '" + t.id + "'");
    }
    for (const auto& step : spec.agent.script)
        for (const auto& id : step)
            if (!ids.contains(id)) bad("agent script names unknown tool '" + id + "'");
    if (spec.queries.empty()) bad("scenario needs at least one query");
    if (spec.k_retrieval == 0) bad("k_retrieval must be >= 1");
    if (spec.max_steps == 0 || spec.context_capacity == 0) bad("max_steps and context_capacity must be >= 1");
    try {
        spec.params.validate();
    } catch (const Error& e) {
        bad(e.what());
    }
}

// ---- seeded agents and environment ------------------------------------------

// 53-bit uniform double in [0,1); independent of the standard library's distributions.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

class ScriptedPolicy final : public Policy {
public:
    explicit ScriptedPolicy(const std::vector<std::vector<std::string>>& script) : script_(script) {}

    Decision choose(const SessionContext&, std::string_view, std::span<const ToolOption> options) override {
        if (step_ >= script_.size()) return {std::string(kFinishTool), "", "script complete"};
        const auto& acceptable = script_[step_];
        for (const auto& o : options) {
            if (std::find(acceptable.begin(), acceptable.end(), o.id) != acceptable.end()) {
                ++step_;
                return {o.id, "", "step " + std::to_string(step_) + " calls " + o.id};
            }
        }
        return {std::string(kFinishTool), "", "no acceptable tool offered"};
    }

private:
    const std::vector<std::vector<std::string>>& script_;
    std::size_t step_ = 0;
};

class StochasticPolicy final : public Policy {
public:
    explicit StochasticPolicy(std::mt19937_64& rng) : rng_(rng) {}

    Decision choose(const SessionContext&, std::string_view observation,
                    std::span<const ToolOption> options) override {
        if (observation.starts_with(kAnswerPrefix)) return {std::string(kFinishTool), "", "answer found"};
        std::vector<const ToolOption*> candidates;
        double total = 0.0;
        for (const auto& o : options) {
            if (o.id == kFinishTool) continue;
            candidates.push_back(&o);
            total += o.weight;
        }
        if (candidates.empty()) return {std::string(kFinishTool), "", "nothing to call"};
        const double u = uniform01(rng_);
        const ToolOption* pick = candidates.back();
        if (total > 0.0) {
            double acc = 0.0;
            for (const ToolOption* c : candidates) {
                acc += c->weight / total;
                if (u < acc) {
                    pick = c;
                    break;
                }
            }
        } else {
            pick = candidates[std::min(candidates.size() - 1, static_cast<std::size_t>(u * candidates.size()))];
        }
        return {pick->id, "", "try " + pick->id};
    }

private:
    std::mt19937_64& rng_;
};

class ScenarioEnvironment final : public Environment {
public:
    ScenarioEnvironment(const ScenarioSpec& spec, std::uint64_t iteration, std::string query, std::mt19937_64& rng)
        : spec_(spec), iteration_(iteration), query_(std::move(query)), rng_(rng) {}

    std::string initial_observation() override { return query_; }

    std::string execute(std::string_view tool, std::string_view) override {
        const auto it = std::find_if(spec_.tools.begin(), spec_.tools.end(),
                                     [&](const ScenarioTool& t) { return t.id == tool; });
        if (it == spec_.tools.end()) throw EnvironmentFault("unknown tool");
        if (it->crashes_at && *it->crashes_at <= iteration_) throw EnvironmentFault(std::string(kCrashMessage));
        switch (it->behavior) {
            case ToolBehavior::answer_relevant: return std::string(kAnswerPrefix) + " " + it->id + " resolved the task";
            case ToolBehavior::noisy_nothing_found: return "Nothing Found";
            case ToolBehavior::noisy_random_number: return std::to_string(rng_() % 1000000);
        }
        return {};
    }

    Outcome final_outcome(const Trajectory& t) const override {
        for (const auto& s : t.steps)
            if (s.observation.starts_with(kAnswerPrefix)) return Outcome::success;
        return Outcome::failure;
    }

private:
    const ScenarioSpec& spec_;
    std::uint64_t iteration_;
    std::string query_;
    std::mt19937_64& rng_;
};

// ---- running ----------------------------------------------------------------

struct TracePoint {
    std::uint64_t iteration = 0;
    std::int64_t accumulated_score = 0;
    double mean_inbound_weight = 0.0;

    bool operator==(const TracePoint&) const = default;
};

struct ScoreTrace {
    std::map<std::string, std::vector<TracePoint>> series;  // by tool id

    bool operator==(const ScoreTrace&) const = default;
};

struct ScenarioResult {
    ScoreTrace trace;
    std::vector<SessionResult> sessions;
    ToolGraph graph_final;

    std::size_t total_tokens() const {
        std::size_t n = 0;
        for (const auto& s : sessions) n += s.tokens_used;
        return n;
    }
};

// Mean current weight over stored in-edges from tool nodes ("start" excluded).
inline std::vector<double> mean_inbound_weights(const ToolGraph& g) {
    std::vector<double> sum(g.node_count(), 0.0);
    std::vector<std::size_t> count(g.node_count(), 0);
    for (ToolGraph::NodeIndex i = 2; i < g.node_count(); ++i)
        for (const auto& e : g.out_edges(i)) {
            sum[e.to] += e.current;
            ++count[e.to];
        }
    std::vector<double> mean(g.node_count(), 0.0);
    for (std::size_t i = 0; i < mean.size(); ++i)
        if (count[i] > 0) mean[i] = sum[i] / static_cast<double>(count[i]);
    return mean;
}

inline OracleRubric rubric_at(const ScenarioSpec& spec, std::uint64_t iteration) {
    OracleRubric r = spec.evaluator;
    for (const auto& t : spec.tools)
        if (t.crashes_at && *t.crashes_at <= iteration) r.base[t.id] = kCrashedToolBase;
    return r;
}

// Alternates sessions with evaluator updates for spec.iterations rounds.
inline ScenarioResult run_scenario(const ScenarioSpec& spec) {
    validate_scenario(spec);
    const auto registry = spec.registry();
    ScenarioResult result{{},
                          {},
                          spec.prior_corpus.empty()
                              ? ToolGraph::uniform(registry, spec.params)
                              : static_construct(registry, spec.prior_corpus, spec.prior_success_only, spec.params)};
    ToolGraph& graph = result.graph_final;
    for (const auto& t : graph.tools()) result.trace.series[t.id];

    std::mt19937_64 rng(spec.seed);
    std::optional<TfidfEmbedder> embedder;
    if (spec.start_mode == StartMode::retrieval) embedder.emplace(tfidf_for_graph(graph));
    std::map<std::string, StartSet> start_cache;

    SessionConfig cfg;
    cfg.max_steps = spec.max_steps;
    cfg.context_capacity = spec.context_capacity;
    cfg.weight_format = spec.weight_format;
    cfg.mode = spec.mode == ScenarioMode::full_list ? OptionMode::full_list : OptionMode::graph;

    for (std::uint64_t it = 1; it <= spec.iterations; ++it) {
        const std::string& query = spec.queries[(it - 1) % spec.queries.size()];
        auto cached = start_cache.find(query);
        if (cached == start_cache.end()) {
            StartSet start = embedder ? select_start_set(graph, *embedder, query, spec.k_retrieval)
                                      : graph_start_set(graph);
            cached = start_cache.emplace(query, std::move(start)).first;
        }

        ScenarioEnvironment env(spec, it, query, rng);
        cfg.task_id = "iteration-" + std::to_string(it);
        SessionResult session;
        if (spec.agent.kind == AgentKind::scripted) {
            ScriptedPolicy policy(spec.agent.script);
            session = run_session(graph, cached->second, env, policy, cfg);
        } else {
            StochasticPolicy policy(rng);
            session = run_session(graph, cached->second, env, policy, cfg);
        }

        apply_evaluation_in_place(graph, evaluate_trajectory_oracle(session.trajectory, rubric_at(spec, it)));

        const auto inbound = mean_inbound_weights(graph);
        for (ToolGraph::NodeIndex i = 2; i < graph.node_count(); ++i) {
            const auto& node = graph.tools()[i - 2];
            result.trace.series[node.id].push_back({it, node.accumulated_score, inbound[i]});
        }
        result.sessions.push_back(std::move(session));
    }
    return result;
}

inline std::string trace_to_csv(const ScoreTrace& trace) {
    std::string out = "iteration,tool_id,accumulated_score,mean_inbound_weight\n";
    std::size_t length = 0;
    for (const auto& [id, s] : trace.series) length = std::max(length, s.size());
    for (std::size_t k = 0; k < length; ++k)
        for (const auto& [id, s] : trace.series) {
            if (k >= s.size()) continue;
            const auto& p = s[k];
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.12g", p.mean_inbound_weight);
            out += std::to_string(p.iteration) + "," + id + "," + std::to_string(p.accumulated_score) + "," + buf +
                   "\n";
        }
    return out;
}

inline bool session_calls(const SessionResult& s, std::string_view tool) {
    return std::any_of(s.trajectory.steps.begin(), s.trajectory.steps.end(),
                       [&](const Step& step) { return step.tool == tool; });
}

// Earliest iteration N* such that from N* on the fallback's mean inbound weight
// strictly exceeds the primary's and every session calls the fallback but not
// the primary. nullopt when no such iteration exists.
inline std::optional<std::uint64_t> find_crossover(const ScenarioResult& r, std::string_view primary,
                                                   std::string_view fallback) {
    const auto p = r.trace.series.find(std::string(primary));
    const auto f = r.trace.series.find(std::string(fallback));
    if (p == r.trace.series.end() || f == r.trace.series.end()) return std::nullopt;
    const auto& ps = p->second;
    const auto& fs = f->second;
    std::optional<std::uint64_t> crossover;
    for (std::size_t k = ps.size(); k-- > 0;) {
        const bool ok = fs[k].mean_inbound_weight > ps[k].mean_inbound_weight &&
                        session_calls(r.sessions[k], fallback) && !session_calls(r.sessions[k], primary);
        if (!ok) break;
        crossover = ps[k].iteration;
    }
    return crossover;
}

inline std::vector<std::string> check_expectations(const Expectations& expect, const ScenarioResult& r) {
    std::vector<std::string> failures;
    auto series = [&](const std::string& id) -> const std::vector<TracePoint>* {
        auto it = r.trace.series.find(id);
        return it == r.trace.series.end() ? nullptr : &it->second;
    };
    for (const auto& b : expect.nonincreasing_after) {
        const auto* s = series(b.tool);
        if (!s) {
            failures.push_back("unknown tool '" + b.tool + "'");
            continue;
        }
        for (std::size_t k = 1; k < s->size(); ++k)
            if ((*s)[k - 1].iteration >= b.iteration && (*s)[k].accumulated_score > (*s)[k - 1].accumulated_score) {
                failures.push_back("score of '" + b.tool + "' rises at iteration " +
                                   std::to_string((*s)[k].iteration));
                break;
            }
    }
    for (const auto& id : expect.final_score_positive) {
        const auto* s = series(id);
        if (!s || s->empty() || s->back().accumulated_score <= 0)
            failures.push_back("final score of '" + id + "' is not positive");
    }
    for (const auto& id : expect.final_score_nonpositive) {
        const auto* s = series(id);
        if (!s || (!s->empty() && s->back().accumulated_score > 0))
            failures.push_back("final score of '" + id + "' is positive");
    }
    if (expect.crossover) {
        const auto& c = *expect.crossover;
        const auto at = find_crossover(r, c.primary, c.fallback);
        if (!at)
            failures.push_back("no crossover from '" + c.primary + "' to '" + c.fallback + "'");
        else if (c.by_iteration && *at > *c.by_iteration)
            failures.push_back("crossover at iteration " + std::to_string(*at) + " is later than " +
                               std::to_string(*c.by_iteration));
    }
    return failures;
}

// ---- token comparison -------------------------------------------------------

struct TokenComparison {
    std::size_t toolnet_tokens = 0;
    std::size_t full_list_tokens = 0;
    std::optional<double> ratio;  // toolnet / full_list; nullopt when full_list used no tokens
};

inline TokenComparison compare_token_usage(const ScenarioSpec& a, const ScenarioSpec& b) {
    if (a.mode == b.mode) throw Error(ErrorCode::SpecMismatch, "specs must differ in mode");
    ScenarioSpec a_as_b = a;
    a_as_b.mode = b.mode;
    if (!(a_as_b == b)) throw Error(ErrorCode::SpecMismatch, "specs differ in more than the mode");
    const ScenarioSpec& toolnet = a.mode == ScenarioMode::toolnet ? a : b;
    const ScenarioSpec& full = a.mode == ScenarioMode::toolnet ? b : a;
    TokenComparison out;
    out.toolnet_tokens = run_scenario(toolnet).total_tokens();
    out.full_list_tokens = run_scenario(full).total_tokens();
    if (out.full_list_tokens > 0)
        out.ratio = static_cast<double>(out.toolnet_tokens) / static_cast<double>(out.full_list_tokens);
    return out;
}

// ---- corpus sparsity statistics ---------------------------------------------

inline const std::vector<std::string>& histogram_buckets() {
    static const std::vector<std::string> buckets{"1", "2", "3", "4", "5", ">5"};
    return buckets;
}

inline std::string bucket_of(std::size_t n) { return n > 5 ? ">5" : std::to_string(n); }

// Raw counts behind a SparsityReport; merging counts then reporting equals
// reporting on the concatenated corpora.
struct CorpusCounts {
    std::map<std::string, std::set<std::string>> successors;  // distinct next tools, "end" excluded
    std::map<std::string, std::uint64_t> calls;

    bool operator==(const CorpusCounts&) const = default;
};

inline CorpusCounts count_corpus(std::span<const Trajectory> corpus) {
    CorpusCounts c;
    for (const auto& t : corpus)
        for (std::size_t k = 0; k < t.steps.size(); ++k) {
            const auto& tool = t.steps[k].tool;
            ++c.calls[tool];
            auto& next = c.successors[tool];
            if (k + 1 < t.steps.size()) next.insert(t.steps[k + 1].tool);
        }
    return c;
}

inline CorpusCounts merge_counts(CorpusCounts a, const CorpusCounts& b) {
    for (const auto& [tool, next] : b.successors) a.successors[tool].insert(next.begin(), next.end());
    for (const auto& [tool, n] : b.calls) a.calls[tool] += n;
    return a;
}

struct SparsityReport {
    std::map<std::string, double> successor_count_histogram;
    std::map<std::string, double> call_count_histogram;
    std::vector<std::pair<std::string, std::size_t>> top_tools;
    bool empty_successor_histogram = false;  // no tool had an observed successor

    bool operator==(const SparsityReport&) const = default;
};

inline constexpr std::size_t kTopToolsLimit = 10;

inline SparsityReport sparsity_from_counts(const CorpusCounts& c, std::size_t top_limit = kTopToolsLimit) {
    SparsityReport r;
    for (const auto& b : histogram_buckets()) {
        r.successor_count_histogram[b] = 0.0;
        r.call_count_histogram[b] = 0.0;
    }
    std::size_t with_successors = 0;
    for (const auto& [tool, next] : c.successors)
        if (!next.empty()) {
            ++with_successors;
            r.successor_count_histogram[bucket_of(next.size())] += 1.0;
            r.top_tools.emplace_back(tool, next.size());
        }
    if (with_successors == 0)
        r.empty_successor_histogram = true;
    else
        for (auto& [b, v] : r.successor_count_histogram) v /= static_cast<double>(with_successors);
    for (const auto& [tool, n] : c.calls) r.call_count_histogram[bucket_of(n)] += 1.0;
    if (!c.calls.empty())
        for (auto& [b, v] : r.call_count_histogram) v /= static_cast<double>(c.calls.size());
    std::sort(r.top_tools.begin(), r.top_tools.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (r.top_tools.size() > top_limit) r.top_tools.resize(top_limit);
    return r;
}

inline SparsityReport analyze_corpus(std::span<const Trajectory> corpus) {
    if (corpus.empty()) throw Error(ErrorCode::EmptyCorpus, "corpus is empty");
    return sparsity_from_counts(count_corpus(corpus));
}

}  // namespace toolnet
