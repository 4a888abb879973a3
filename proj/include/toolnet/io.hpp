#pragma once

// File formats: graph JSON, tool registry JSON, trajectory JSONL and
// evaluator report JSON. Output is canonical (sorted keys, fixed weight
// rendering) so that files can be compared byte for byte.

#include "toolnet/construction.hpp"
#include "toolnet/error.hpp"
#include "toolnet/graph.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace toolnet {

using json = nlohmann::json;

inline constexpr int kGraphFormatVersion = 1;

// 12 significant digits, shortest general form ("0.25", "0.333333333333", "1").
inline std::string format_weight(double w) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), w, std::chars_format::general, 12);
    if (ec != std::errc{}) throw Error(ErrorCode::InvalidParams, "cannot render weight");
    return std::string(buf.data(), ptr);
}

inline double parse_weight(std::string_view text) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw Error(ErrorCode::ParseError, "bad weight '" + std::string(text) + "'");
    return value;
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw Error(ErrorCode::Io, "read failed on '" + path.string() + "'");
    return ss.str();
}

inline void write_text_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorCode::Io, "write failed on '" + path.string() + "'");
}

inline json parse_json_text(std::string_view text, std::string_view what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ParseError, std::string(what) + ": " + e.what());
    }
}

namespace detail {

template <typename T>
T field(const json& j, const char* key, std::string_view what) {
    if (!j.is_object() || !j.contains(key))
        throw Error(ErrorCode::ParseError, std::string(what) + ": missing field '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string(what) + ": field '" + key + "': " + e.what());
    }
}

template <typename T>
T field_or(const json& j, const char* key, T fallback, std::string_view what) {
    if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return fallback;
    return field<T>(j, key, what);
}

}  // namespace detail

// ---- graph ------------------------------------------------------------------

inline json graph_to_json(const ToolGraph& g) {
    json nodes = json::array();
    for (const auto& n : g.tools()) {
        nodes.push_back({{"id", n.id},
                         {"description", n.description},
                         {"category", n.category},
                         {"accumulated_score", n.accumulated_score},
                         {"active", n.active}});
    }
    json edges = json::array();
    for (const auto& e : g.edges()) {
        edges.push_back({{"from", e.from},
                         {"to", e.to},
                         {"prior_weight", format_weight(e.prior_weight)},
                         {"current_weight", format_weight(e.current_weight)}});
    }
    return {{"format_version", kGraphFormatVersion},
            {"params", {{"alpha", g.params().alpha}, {"beta", g.params().beta}}},
            {"iteration", g.iteration()},
            {"nodes", std::move(nodes)},
            {"edges", std::move(edges)}};
}

inline std::string serialize_graph(const ToolGraph& g) { return graph_to_json(g).dump(2) + "\n"; }

inline ToolGraph graph_from_json(const json& j) {
    constexpr std::string_view what = "graph";
    const int version = detail::field<int>(j, "format_version", what);
    if (version != kGraphFormatVersion)
        throw Error(ErrorCode::ParseError, "unsupported graph format_version " + std::to_string(version));
    const json& p = j.at("params");
    UpdateParams params{detail::field<double>(p, "alpha", what), detail::field<double>(p, "beta", what)};
    const auto iteration = detail::field<std::uint64_t>(j, "iteration", what);

    std::vector<ToolNode> nodes;
    for (const auto& n : detail::field<json>(j, "nodes", what)) {
        nodes.push_back({detail::field<std::string>(n, "id", what),
                         detail::field_or<std::string>(n, "description", "", what),
                         detail::field_or<std::string>(n, "category", "", what),
                         detail::field_or<std::int64_t>(n, "accumulated_score", 0, what),
                         detail::field_or<bool>(n, "active", true, what)});
    }
    std::vector<Edge> edges;
    for (const auto& e : detail::field<json>(j, "edges", what)) {
        edges.push_back({detail::field<std::string>(e, "from", what), detail::field<std::string>(e, "to", what),
                         parse_weight(detail::field<std::string>(e, "prior_weight", what)),
                         parse_weight(detail::field<std::string>(e, "current_weight", what))});
    }
    return ToolGraph::from_parts(std::move(nodes), edges, params, iteration);
}

inline ToolGraph deserialize_graph(std::string_view text) { return graph_from_json(parse_json_text(text, "graph")); }

inline ToolGraph load_graph(const std::filesystem::path& path) { return deserialize_graph(read_text_file(path)); }

inline void save_graph(const std::filesystem::path& path, const ToolGraph& g) {
    write_text_file(path, serialize_graph(g));
}

// ---- tool registry ----------------------------------------------------------

inline std::vector<ToolSpec> registry_from_json(const json& j) {
    if (!j.is_array()) throw Error(ErrorCode::ParseError, "registry: expected a JSON array");
    std::vector<ToolSpec> tools;
    for (const auto& t : j) {
        tools.push_back({detail::field<std::string>(t, "id", "registry"),
                         detail::field_or<std::string>(t, "description", "", "registry"),
                         detail::field_or<std::string>(t, "category", "", "registry")});
    }
    return tools;
}

inline json registry_to_json(std::span<const ToolSpec> tools) {
    json arr = json::array();
    for (const auto& t : tools) arr.push_back({{"id", t.id}, {"description", t.description}, {"category", t.category}});
    return arr;
}

inline std::vector<ToolSpec> load_registry(const std::filesystem::path& path) {
    return registry_from_json(parse_json_text(read_text_file(path), "registry"));
}

// ---- trajectories -----------------------------------------------------------

inline json trajectory_to_json(const Trajectory& t) {
    json steps = json::array();
    for (const auto& s : t.steps)
        steps.push_back(
            {{"tool", s.tool}, {"thought", s.thought}, {"arguments", s.arguments}, {"observation", s.observation}});
    return {{"task_id", t.task_id}, {"query", t.query}, {"outcome", to_string(t.outcome)}, {"steps", std::move(steps)}};
}

inline Trajectory trajectory_from_json(const json& j) {
    constexpr std::string_view what = "trajectory";
    Trajectory t;
    t.task_id = detail::field<std::string>(j, "task_id", what);
    t.query = detail::field_or<std::string>(j, "query", "", what);
    t.outcome = parse_outcome(detail::field<std::string>(j, "outcome", what));
    for (const auto& s : detail::field<json>(j, "steps", what)) {
        Step step{detail::field<std::string>(s, "tool", what), detail::field_or<std::string>(s, "thought", "", what),
                  detail::field_or<std::string>(s, "arguments", "", what),
                  detail::field_or<std::string>(s, "observation", "", what)};
        validate_tool_id(step.tool);
        t.steps.push_back(std::move(step));
    }
    if (t.steps.empty()) throw Error(ErrorCode::ParseError, "trajectory '" + t.task_id + "' has no steps");
    return t;
}

inline std::string serialize_jsonl(std::span<const Trajectory> corpus) {
    std::string out;
    for (const auto& t : corpus) out += trajectory_to_json(t).dump() + "\n";
    return out;
}

// Blank lines are skipped; any malformed line fails the whole read.
inline std::vector<Trajectory> parse_jsonl(std::string_view text) {
    std::vector<Trajectory> corpus;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        try {
            corpus.push_back(trajectory_from_json(parse_json_text(line, "trajectory")));
        } catch (const Error& e) {
            throw Error(e.code(), "line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return corpus;
}

inline std::vector<Trajectory> load_corpus(const std::filesystem::path& path) {
    return parse_jsonl(read_text_file(path));
}

// ---- evaluator reports ------------------------------------------------------

inline json report_to_json(const EvaluatorReport& r) {
    json scores = json::array();
    for (const auto& s : r.scores) scores.push_back({{"tool_name", s.tool}, {"score", s.score}, {"reason", s.reason}});
    return {{"trajectory_id", r.trajectory_id}, {"scores_of_tools", std::move(scores)}};
}

inline EvaluatorReport report_from_json(const json& j) {
    constexpr std::string_view what = "report";
    EvaluatorReport r;
    r.trajectory_id = detail::field_or<std::string>(j, "trajectory_id", "", what);
    for (const auto& s : detail::field<json>(j, "scores_of_tools", what)) {
        const json& score = s.contains("score") ? s.at("score") : json();
        if (!score.is_number_integer())
            throw Error(ErrorCode::ScoreOutOfRange, "score must be an integer in [-3,3]");
        const auto value = score.get<std::int64_t>();
        if (value < kMinScore || value > kMaxScore)
            throw Error(ErrorCode::ScoreOutOfRange, "score " + std::to_string(value) + " outside [-3,3]");
        r.scores.push_back({detail::field<std::string>(s, "tool_name", what), static_cast<int>(value),
                            detail::field_or<std::string>(s, "reason", "", what)});
    }
    return r;
}

inline EvaluatorReport load_report(const std::filesystem::path& path) {
    return report_from_json(parse_json_text(read_text_file(path), "report"));
}

}  // namespace toolnet
