#include "support.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

using namespace toolnet;
using namespace toolnet::testing;
using Catch::Approx;

TEST_CASE("tokenizer lowercases and splits on non-alphanumerics", "[retrieval]") {
    REQUIRE(tokenize("Hello, World--42x  ") == std::vector<std::string>{"hello", "world", "42x"});
    REQUIRE(tokenize("").empty());
    REQUIRE(tokenize("!!!").empty());
}

TEST_CASE("tf-idf embedding", "[retrieval]") {
    const std::vector<std::string> corpus{"alpha beta", "beta gamma"};
    const auto e = tfidf_embed(corpus);
    REQUIRE(e.dimension() == 3);

    const auto v = e.embed("beta");
    const auto beta = *e.coordinate("beta");
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i == beta)
            REQUIRE(v[i] != 0.0);
        else
            REQUIRE(v[i] == 0.0);
    }
    // beta appears in both documents: ln(3/3) + 1
    REQUIRE(v[beta] == Approx(1.0));
    REQUIRE(*e.idf("alpha") == Approx(std::log(3.0 / 2.0) + 1.0));

    const auto zero = e.embed("zzz");
    REQUIRE(std::all_of(zero.begin(), zero.end(), [](double x) { return x == 0.0; }));
    REQUIRE(e.embed("").size() == 3);
    REQUIRE(e.embed("Alpha alpha") == e.embed("alpha ALPHA"));

    const std::vector<std::string> same{"a", "a"};
    REQUIRE(*tfidf_embed(same).idf("a") == 1.0);

    REQUIRE_THROWS_AS(tfidf_embed(std::vector<std::string>{}), Error);
}

TEST_CASE("cosine similarity", "[retrieval]") {
    const std::vector<double> a{1.0, 2.0, 0.0};
    const std::vector<double> b{2.0, 0.5, 1.0};
    const std::vector<double> zero{0.0, 0.0, 0.0};
    REQUIRE(cosine_similarity(a, b) == cosine_similarity(b, a));
    REQUIRE(cosine_similarity(a, a) == Approx(1.0).margin(1e-9));
    REQUIRE(cosine_similarity(a, zero) == 0.0);
    const std::vector<double> neg{-1.0, -2.0, 0.0};
    REQUIRE(cosine_similarity(a, neg) == Approx(-1.0).margin(1e-9));
}

TEST_CASE("start set picks the best-matching description", "[retrieval]") {
    const std::vector<ToolSpec> tools{{"WikiSearch", "search wikipedia articles", ""},
                                      {"Calc", "evaluate math expressions", ""}};
    const auto g = ToolGraph::uniform(tools);
    const auto e = tfidf_for_graph(g);
    const auto set = select_start_set(g, e, "search wikipedia for ecosystems", 1);
    REQUIRE(set.ranked.size() == 1);
    REQUIRE(set.ranked[0].id == "WikiSearch");
    // query and description share two of three equally weighted terms
    REQUIRE(set.ranked[0].score == Approx(2.0 / std::sqrt(6.0)).epsilon(1e-12));

    const auto both = select_start_set(g, e, "search wikipedia for ecosystems", 5);
    REQUIRE(both.ranked.size() == 2);
    REQUIRE(both.ranked[1].id == "Calc");
    REQUIRE(both.ranked[1].score == 0.0);
}

TEST_CASE("start set tie-breaks by id", "[retrieval]") {
    const std::vector<ToolSpec> tools{{"zeta", "convert currency amounts", ""},
                                      {"beta", "convert currency amounts", ""},
                                      {"gamma", "draw charts", ""}};
    const auto g = ToolGraph::uniform(tools);
    const auto e = tfidf_for_graph(g);
    REQUIRE(select_start_set(g, e, "convert currency", 1).ranked[0].id == "beta");

    const auto none = select_start_set(g, e, "no overlap here", 3);
    REQUIRE(none.ids() == std::vector<std::string>{"beta", "gamma", "zeta"});
    for (const auto& c : none.ranked) REQUIRE(c.score == 0.0);
}

TEST_CASE("start set skips inactive tools", "[retrieval]") {
    auto g = ToolGraph::uniform(make_tools({"A", "B"}));
    const auto e = tfidf_for_graph(g);
    g.set_active("A", false);
    REQUIRE(select_start_set(g, e, "tool A", 2).ids() == std::vector<std::string>{"B"});
    g.set_active("B", false);
    try {
        (void)select_start_set(g, e, "tool A", 2);
        FAIL("expected NoActiveTools");
    } catch (const Error& err) {
        REQUIRE(err.code() == ErrorCode::NoActiveTools);
    }
    REQUIRE_THROWS_AS(select_start_set(ToolGraph::uniform(make_tools({"A"})), e, "x", 0), Error);
}

TEST_CASE("graph-native start set returns every active tool", "[retrieval]") {
    const auto g = ToolGraph::uniform(make_tools({"C", "A", "B"}));
    const auto set = graph_start_set(g);
    REQUIRE(set.graph_native);
    REQUIRE(set.ids() == std::vector<std::string>{"A", "B", "C"});
    for (const auto& c : set.ranked) REQUIRE(c.score == Approx(1.0 / 3.0));
}

TEST_CASE("start set is order invariant and nested in k", "[retrieval][property]") {
    std::mt19937_64 rng(3);
    const std::vector<std::string> words{"search", "weather", "city", "math", "sum", "map", "route", "news",
                                         "stock", "price", "translate", "text"};
    std::uniform_int_distribution<std::size_t> word(0, words.size() - 1);
    std::uniform_int_distribution<std::size_t> len(1, 5);
    for (int round = 0; round < 25; ++round) {
        std::vector<ToolSpec> tools;
        for (std::size_t i = 0; i < 12; ++i) {
            std::string d;
            for (std::size_t k = len(rng); k > 0; --k) d += words[word(rng)] + " ";
            tools.push_back({tool_name(i), d, ""});
        }
        std::string query;
        for (std::size_t k = len(rng); k > 0; --k) query += words[word(rng)] + " ";

        const auto g = ToolGraph::uniform(tools);
        const auto e = tfidf_for_graph(g);
        auto shuffled = tools;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        const auto g2 = ToolGraph::uniform(shuffled);
        std::vector<std::string> docs;
        for (const auto& t : shuffled) docs.push_back(t.description);
        const auto e2 = tfidf_embed(docs);

        for (std::size_t k = 1; k <= 12; ++k) {
            const auto a = select_start_set(g, e, query, k);
            const auto b = select_start_set(g2, e2, query, k);
            REQUIRE(a.ids() == b.ids());
            if (k > 1) {
                const auto prev = select_start_set(g, e, query, k - 1).ids();
                const auto cur = a.ids();
                REQUIRE(std::equal(prev.begin(), prev.end(), cur.begin()));
            }
            for (const auto& c : a.ranked) {
                REQUIRE(c.score >= -1.0 - 1e-12);
                REQUIRE(c.score <= 1.0 + 1e-12);
            }
        }
        for (const auto& t : tools) {
            const auto v = e.embed(t.description);
            if (std::any_of(v.begin(), v.end(), [](double x) { return x != 0.0; }))
                REQUIRE(cosine_similarity(v, v) == Approx(1.0).margin(1e-9));
        }
    }
}
