#pragma once

// Command-line front end. Kept header-only so the test suite can drive it
// in-process with captured streams.
//
// Exit codes: 0 success, 1 I/O failure, 2 validation failure,
// 3 a scenario expectation did not hold.

#include "toolnet/toolnet.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace toolnet::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitScenario = 3;

namespace detail {

inline void emit(const std::string& path, const std::string& content, std::ostream& out) {
    if (path.empty() || path == "-")
        out << content;
    else
        write_text_file(path, content);
}

}  // namespace detail

inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"toolnet: weighted tool graphs for agent tool selection"};
    app.require_subcommand(1);

    double alpha = UpdateParams{}.alpha;
    double beta = UpdateParams{}.beta;
    std::size_t k_retrieval = kDefaultRetrievalK;
    std::string weight_format = "times10";
    std::uint64_t seed = 0;

    // build
    auto* build = app.add_subcommand("build", "Build a graph from a registry and a trajectory corpus");
    std::string registry_path, corpus_path, out_path;
    bool no_corpus = false, include_failures = false;
    build->add_option("--registry", registry_path, "Tool registry JSON")->required();
    auto* corpus_opt = build->add_option("--corpus", corpus_path, "Trajectory JSONL corpus");
    auto* no_corpus_opt = build->add_flag("--no-corpus", no_corpus, "Build the uniform non-informative graph");
    corpus_opt->excludes(no_corpus_opt);
    build->add_flag("--include-failures", include_failures, "Count unsuccessful trajectories as well");
    build->add_option("--out", out_path, "Output graph JSON (stdout when omitted)");
    build->add_option("--alpha", alpha, "Update speed")->envname("TOOLNET_ALPHA");
    build->add_option("--beta", beta, "Prior interpolation weight")->envname("TOOLNET_BETA");

    // update
    auto* update = app.add_subcommand("update", "Apply one evaluator report to a graph");
    std::string graph_path, report_path;
    update->add_option("--graph", graph_path, "Input graph JSON")->required();
    update->add_option("--report", report_path, "Evaluator report JSON")->required();
    update->add_option("--out", out_path, "Output graph JSON (stdout when omitted)");

    // successors
    auto* succ = app.add_subcommand("successors", "List the successors of a node");
    std::string from, query;
    succ->add_option("--graph", graph_path, "Graph JSON")->required();
    succ->add_option("--from", from, "Source node id")->required();
    succ->add_option("--format", weight_format, "none|div100|div10|integer|times10")
        ->envname("TOOLNET_WEIGHT_FORMAT");
    succ->add_option("--query", query, "Rank the start set by similarity to this task (with --from start)");
    succ->add_option("-k,--k", k_retrieval, "Start-set size for --query")->envname("TOOLNET_K");

    // simulate
    auto* sim = app.add_subcommand("simulate", "Run a scenario file");
    std::string scenario_path, trace_path, graph_out;
    bool compare = false;
    sim->add_option("--scenario", scenario_path, "Scenario JSON")->required();
    sim->add_option("--trace", trace_path, "Trace CSV output (stdout when omitted)");
    sim->add_option("--graph-out", graph_out, "Final graph JSON output");
    sim->add_flag("--compare", compare, "Also run the other mode and report token usage of both");
    auto* seed_opt = sim->add_option("--seed", seed, "Override the scenario seed")->envname("TOOLNET_SEED");
    auto* sim_alpha = sim->add_option("--alpha", alpha, "Override alpha")->envname("TOOLNET_ALPHA");
    auto* sim_beta = sim->add_option("--beta", beta, "Override beta")->envname("TOOLNET_BETA");

    // stats
    auto* stats = app.add_subcommand("stats", "Sparsity statistics of a trajectory corpus");
    stats->add_option("--corpus", corpus_path, "Trajectory JSONL corpus")->required();
    stats->add_option("--out", out_path, "Output JSON (stdout when omitted)");

    // export-dot
    auto* dot = app.add_subcommand("export-dot", "Render a graph as Graphviz DOT");
    double min_weight = 0.0;
    dot->add_option("--graph", graph_path, "Graph JSON")->required();
    dot->add_option("--min-weight", min_weight, "Hide edges below this weight");
    dot->add_option("--out", out_path, "Output DOT (stdout when omitted)");

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (*build) {
            const UpdateParams params{alpha, beta};
            params.validate();
            if (corpus_path.empty() && !no_corpus)
                throw Error(ErrorCode::InvalidParams, "build needs --corpus or --no-corpus");
            const auto registry = load_registry(registry_path);
            const ToolGraph g = no_corpus ? ToolGraph::uniform(registry, params)
                                          : static_construct(registry, load_corpus(corpus_path), !include_failures,
                                                             params);
            detail::emit(out_path, serialize_graph(g), out);
        } else if (*update) {
            ToolGraph g = load_graph(graph_path);
            apply_evaluation_in_place(g, load_report(report_path));
            detail::emit(out_path, serialize_graph(g), out);
        } else if (*succ) {
            const WeightFormat fmt = parse_weight_format(weight_format);
            if (k_retrieval == 0) throw Error(ErrorCode::InvalidParams, "k must be >= 1");
            const ToolGraph g = load_graph(graph_path);
            std::vector<ToolOption> options;
            if (from == kStartNode && !query.empty()) {
                const auto embedder = tfidf_for_graph(g);
                for (const auto& c : select_start_set(g, embedder, query, k_retrieval).ranked)
                    options.push_back({c.id, g.tool(c.id).description, std::clamp(c.score, 0.0, 1.0)});
            } else {
                for (const auto& s : g.successors(from))
                    options.push_back({s.id, s.id == kEndNode ? std::string(kFinishDescription)
                                                             : g.tool(s.id).description,
                                       s.weight});
            }
            out << format_tool_context(options, fmt);
        } else if (*sim) {
            ScenarioSpec spec = load_scenario(scenario_path);
            if (*seed_opt) spec.seed = seed;
            if (*sim_alpha) spec.params.alpha = alpha;
            if (*sim_beta) spec.params.beta = beta;
            validate_scenario(spec);
            const ScenarioResult result = run_scenario(spec);
            detail::emit(trace_path, trace_to_csv(result.trace), out);
            if (!graph_out.empty()) save_graph(graph_out, result.graph_final);

            json summary = {{"scenario", spec.name},
                            {"mode", spec.mode == ScenarioMode::toolnet ? "toolnet" : "full_list"},
                            {"iterations", spec.iterations},
                            {"total_tokens", result.total_tokens()}};
            std::size_t finished = 0;
            for (const auto& s : result.sessions) finished += s.finished ? 1 : 0;
            summary["finished_sessions"] = finished;
            json scores = json::object();
            for (const auto& t : result.graph_final.tools()) scores[t.id] = t.accumulated_score;
            summary["final_scores"] = std::move(scores);
            if (compare) {
                ScenarioSpec other = spec;
                other.mode = spec.mode == ScenarioMode::toolnet ? ScenarioMode::full_list : ScenarioMode::toolnet;
                summary["token_comparison"] = token_comparison_to_json(compare_token_usage(spec, other));
            }
            std::vector<std::string> failures;
            if (spec.expect) failures = check_expectations(*spec.expect, result);
            summary["expectation_failures"] = failures;
            // The trace owns stdout when no --trace path is given.
            std::ostream& sink = trace_path.empty() || trace_path == "-" ? err : out;
            sink << summary.dump(2) << "\n";
            if (!failures.empty()) {
                for (const auto& f : failures) err << "expectation failed: " << f << "\n";
                return kExitScenario;
            }
        } else if (*stats) {
            const auto report = analyze_corpus(load_corpus(corpus_path));
            detail::emit(out_path, sparsity_to_json(report).dump(2) + "\n", out);
        } else if (*dot) {
            if (!std::isfinite(min_weight)) throw Error(ErrorCode::InvalidParams, "--min-weight must be finite");
            detail::emit(out_path, export_dot(load_graph(graph_path), min_weight), out);
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return e.is_io() ? kExitIo : kExitValidation;
    } catch (const json::exception& e) {
        err << "error: malformed input: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitOk;
}

}  // namespace toolnet::cli
