#include "support.hpp"

#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>

using namespace toolnet;
using namespace toolnet::testing;

namespace {

// Compares against tests/golden/<name>; TOOLNET_UPDATE_GOLDEN=1 rewrites the file instead.
void check_golden(const std::string& name, const std::string& actual) {
    const std::filesystem::path path = std::filesystem::path(TOOLNET_GOLDEN_DIR) / name;
    if (std::getenv("TOOLNET_UPDATE_GOLDEN")) {
        write_text_file(path, actual);
        return;
    }
    REQUIRE(read_text_file(path) == actual);
}

ToolGraph evolved_graph() {
    const std::vector<Trajectory> corpus{make_trajectory("1", {"A", "B"}), make_trajectory("2", {"A", "B"}),
                                         make_trajectory("3", {"A", "C"})};
    std::vector<ToolSpec> tools{{"A", "search the web", "search"},
                                {"B", "summarize \"quoted\" text", "nlp"},
                                {"C", "calculator", "math"}};
    auto g = static_construct(tools, corpus, true, {0.5, 0.3});
    apply_evaluation_in_place(g, {"r1", {{"A", 2, ""}, {"C", -1, ""}}});
    apply_evaluation_in_place(g, {"r2", {{"B", 3, ""}}});
    g.set_active("C", false);
    return g;
}

}  // namespace

TEST_CASE("weights render with 12 significant digits", "[formats]") {
    REQUIRE(format_weight(0.25) == "0.25");
    REQUIRE(format_weight(1.0 / 3.0) == "0.333333333333");
    REQUIRE(format_weight(1.0) == "1");
    REQUIRE(format_weight(0.0) == "0");
    REQUIRE(parse_weight("0.333333333333") == 0.333333333333);
    REQUIRE_THROWS_AS(parse_weight("0.3x"), Error);
}

TEST_CASE("graph JSON golden files", "[formats]") {
    check_golden("uniform_ab.json", serialize_graph(ToolGraph::uniform(make_tools({"B", "A"}))));
    check_golden("evolved_abc.json", serialize_graph(evolved_graph()));
}

TEST_CASE("graph JSON round trip preserves every field", "[formats][property]") {
    std::mt19937_64 rng(42);
    for (int round = 0; round < 25; ++round) {
        const auto rc = random_corpus(rng, 10, 15, 6);
        auto g = static_construct(rc.tools, rc.corpus, round % 2 == 0, {0.25 + round * 0.1, 0.3});
        for (int k = 0; k < round % 4; ++k) apply_evaluation_in_place(g, random_report(rng, g));
        if (round % 3 == 0) g.set_active(rc.tools.front().id, false);

        const std::string text = serialize_graph(g);
        const ToolGraph back = deserialize_graph(text);
        REQUIRE(serialize_graph(back) == text);
        REQUIRE(back.tools() == g.tools());
        REQUIRE(back.iteration() == g.iteration());
        REQUIRE(back.params() == g.params());
        const auto e1 = g.edges();
        const auto e2 = back.edges();
        REQUIRE(e1.size() == e2.size());
        for (std::size_t i = 0; i < e1.size(); ++i) {
            REQUIRE(e1[i].from == e2[i].from);
            REQUIRE(e1[i].to == e2[i].to);
            REQUIRE(format_weight(e1[i].current_weight) == format_weight(e2[i].current_weight));
            REQUIRE(format_weight(e1[i].prior_weight) == format_weight(e2[i].prior_weight));
        }
        REQUIRE_FALSE(back.degree_check().any_flagged);
    }
}

TEST_CASE("graph JSON rejects malformed input", "[formats]") {
    const std::string good = serialize_graph(ToolGraph::uniform(make_tools({"A"})));
    REQUIRE_THROWS_AS(deserialize_graph("{"), Error);
    auto j = json::parse(good);
    j["format_version"] = 2;
    REQUIRE_THROWS_AS(deserialize_graph(j.dump()), Error);
    j = json::parse(good);
    j["edges"][0]["current_weight"] = "abc";
    REQUIRE_THROWS_AS(deserialize_graph(j.dump()), Error);
    j = json::parse(good);
    j["edges"].erase(0);
    REQUIRE_THROWS_AS(deserialize_graph(j.dump()), Error);
    j = json::parse(good);
    j["nodes"][0]["id"] = "end";
    REQUIRE_THROWS_AS(deserialize_graph(j.dump()), Error);
}

TEST_CASE("trajectory JSONL round trip", "[formats]") {
    std::vector<Trajectory> corpus{
        {"t1", "what is 2+2", {{"Calc", "add", "2+2", "4"}, {"Answer", "done", "4", ""}}, Outcome::success},
        {"t2", "weather \"today\"", {{"Weather", "", "{\"city\":\"Oslo\"}", "rain\nlater"}}, Outcome::gave_up},
    };
    const auto text = serialize_jsonl(corpus);
    REQUIRE(std::count(text.begin(), text.end(), '\n') == 2);
    REQUIRE(parse_jsonl(text) == corpus);
    REQUIRE(parse_jsonl("\n" + text + "\n\n") == corpus);

    REQUIRE_THROWS_AS(parse_jsonl(R"({"task_id":"x","outcome":"success","steps":[]})"), Error);
    REQUIRE_THROWS_AS(parse_jsonl(R"({"task_id":"x","outcome":"maybe","steps":[{"tool":"A"}]})"), Error);
    REQUIRE_THROWS_AS(parse_jsonl(R"({"task_id":"x","outcome":"success","steps":[{"tool":"end"}]})"), Error);
    try {
        (void)parse_jsonl(text + "not json\n");
        FAIL("expected a parse error");
    } catch (const Error& e) {
        REQUIRE(std::string(e.what()).find("line 3") != std::string::npos);
    }
}

TEST_CASE("evaluator report JSON", "[formats]") {
    const auto r = report_from_json(json::parse(
        R"({"trajectory_id":"t1","scores_of_tools":[{"tool_name":"A","score":3,"reason":"useful"},
            {"tool_name":"B","score":-3,"reason":"errors"}]})"));
    REQUIRE(r.trajectory_id == "t1");
    REQUIRE(r.scores.size() == 2);
    REQUIRE(r.scores[1].score == -3);
    REQUIRE(report_from_json(report_to_json(r)) == r);

    REQUIRE_THROWS_AS(report_from_json(json::parse(R"({"scores_of_tools":[{"tool_name":"A","score":7}]})")), Error);
    REQUIRE_THROWS_AS(report_from_json(json::parse(R"({"scores_of_tools":[{"tool_name":"A","score":1.5}]})")), Error);
    REQUIRE_THROWS_AS(report_from_json(json::parse(R"({"scores_of_tools":[{"tool_name":"A"}]})")), Error);
    REQUIRE(report_from_json(json::parse(R"({"trajectory_id":"x","scores_of_tools":[]})")).scores.empty());
}

TEST_CASE("registry JSON", "[formats]") {
    const auto tools = registry_from_json(
        json::parse(R"([{"id":"A","description":"first"},{"id":"B","description":"second","category":"c"}])"));
    REQUIRE(tools == std::vector<ToolSpec>{{"A", "first", ""}, {"B", "second", "c"}});
    REQUIRE(registry_from_json(registry_to_json(tools)) == tools);
    REQUIRE_THROWS_AS(registry_from_json(json::parse(R"({"id":"A"})")), Error);
    REQUIRE_THROWS_AS(registry_from_json(json::parse(R"([{"description":"x"}])")), Error);
}

TEST_CASE("scenario JSON round trip", "[formats]") {
    auto spec = crash_fallback_scenario();
    spec.expect = Expectations{{{"weather_api", 50}}, {"weather_api_backup"}, {}, CrossoverExpectation{"weather_api", "weather_api_backup", 150}};
    REQUIRE(scenario_from_json(scenario_to_json(spec)) == spec);
    const auto pipeline = pipeline_scenario(12, ScenarioMode::full_list);
    REQUIRE(scenario_from_json(scenario_to_json(pipeline)) == pipeline);

    auto j = scenario_to_json(spec);
    j["tools"][0]["behavior"] = "explodes";
    REQUIRE_THROWS_AS(scenario_from_json(j), Error);
    j = scenario_to_json(spec);
    j["agent"]["kind"] = "psychic";
    REQUIRE_THROWS_AS(scenario_from_json(j), Error);
    j = scenario_to_json(spec);
    j.erase("iterations");
    REQUIRE_THROWS_AS(scenario_from_json(j), Error);
}

TEST_CASE("bundled scenario files load", "[formats]") {
    for (const auto& entry : std::filesystem::directory_iterator(TOOLNET_SCENARIO_DIR)) {
        if (entry.path().extension() != ".json") continue;
        INFO(entry.path().string());
        REQUIRE_NOTHROW(load_scenario(entry.path()));
    }
}

TEST_CASE("DOT export", "[formats]") {
    const auto g = ToolGraph::uniform(make_tools({"A", "B"}));
    const auto dot = export_dot(g);
    auto count_edges = [](const std::string& s) {
        std::size_t n = 0;
        for (auto pos = s.find(" -> "); pos != std::string::npos; pos = s.find(" -> ", pos + 1)) ++n;
        return n;
    };
    REQUIRE(count_edges(dot) == 8);
    REQUIRE(dot == export_dot(g));
    REQUIRE(count_edges(export_dot(g, 0.9)) == 0);
    REQUIRE(count_edges(export_dot(g, 0.5)) == 2);  // start edges only
    REQUIRE(count_edges(export_dot(ToolGraph::uniform(make_tools({"A"})), 0.9)) == 1);
    REQUIRE(dot.find("\"A\" [label=\"A (s=0)\"]") != std::string::npos);
    REQUIRE(dot.find("\"A\" -> \"B\" [label=\"333\"]") != std::string::npos);
    check_golden("uniform_ab.dot", dot);
    check_golden("evolved_abc.dot", export_dot(evolved_graph()));
}

TEST_CASE("trace CSV golden file", "[formats]") {
    check_golden("crash_fallback_trace.csv", trace_to_csv(run_scenario(crash_fallback_scenario()).trace));
}

TEST_CASE("sparsity JSON", "[formats]") {
    const auto r = analyze_corpus(std::vector{make_trajectory("1", {"A", "B"}), make_trajectory("2", {"A", "C"})});
    const auto j = sparsity_to_json(r);
    REQUIRE(j.at("successor_count_histogram").at("2") == 1.0);
    REQUIRE(j.at("top_tools").at(0).at("id") == "A");
    REQUIRE(j.at("empty_successor_histogram") == false);
}
