#pragma once

#include "toolnet/error.hpp"
#include "toolnet/graph.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace toolnet {

// Anything that maps text to a fixed-dimension vector, deterministically.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::vector<double> embed(std::string_view text) const = 0;
    virtual std::size_t dimension() const = 0;
};

// Lowercased alphanumeric runs.
inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char c : text) {
        const auto uc = static_cast<unsigned char>(c);
        if (std::isalnum(uc)) {
            current.push_back(static_cast<char>(std::tolower(uc)));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

// tf * idf with idf(t) = ln((1 + N) / (1 + df(t))) + 1 over a fixed corpus.
// Vocabulary is sorted, so the provider ignores document order.
class TfidfEmbedder final : public EmbeddingProvider {
public:
    explicit TfidfEmbedder(std::span<const std::string> corpus) {
        if (corpus.empty()) throw Error(ErrorCode::EmptyCorpus, "tf-idf corpus is empty");
        std::map<std::string, std::size_t> df;
        for (const auto& doc : corpus) {
            auto tokens = tokenize(doc);
            std::set<std::string> unique(tokens.begin(), tokens.end());
            for (const auto& t : unique) ++df[t];
        }
        const double n = static_cast<double>(corpus.size());
        for (const auto& [term, count] : df) {
            vocab_.emplace(term, idf_.size());
            idf_.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0);
        }
    }

    std::vector<double> embed(std::string_view text) const override {
        std::vector<double> v(idf_.size(), 0.0);
        for (const auto& t : tokenize(text)) {
            auto it = vocab_.find(t);
            if (it != vocab_.end()) v[it->second] += 1.0;
        }
        for (std::size_t i = 0; i < v.size(); ++i) v[i] *= idf_[i];
        return v;
    }

    std::size_t dimension() const override { return idf_.size(); }

    // idf of a vocabulary term, or nullopt when absent.
    std::optional<double> idf(std::string_view term) const {
        auto it = vocab_.find(term);
        if (it == vocab_.end()) return std::nullopt;
        return idf_[it->second];
    }

    std::optional<std::size_t> coordinate(std::string_view term) const {
        auto it = vocab_.find(term);
        if (it == vocab_.end()) return std::nullopt;
        return it->second;
    }

private:
    std::map<std::string, std::size_t, std::less<>> vocab_;
    std::vector<double> idf_;
};

inline TfidfEmbedder tfidf_embed(std::span<const std::string> corpus) { return TfidfEmbedder(corpus); }

inline TfidfEmbedder tfidf_for_graph(const ToolGraph& g) {
    std::vector<std::string> docs;
    docs.reserve(g.tool_count());
    for (const auto& t : g.tools()) docs.push_back(t.description);
    return TfidfEmbedder(docs);
}

// Zero-norm operands give 0. Result is clamped to [-1, 1].
inline double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

struct StartCandidate {
    std::string id;
    double score = 0.0;  // similarity, or the start-edge weight for graph-native sets

    bool operator==(const StartCandidate&) const = default;
};

struct StartSet {
    std::vector<StartCandidate> ranked;
    std::size_t k = 0;
    bool graph_native = false;

    std::vector<std::string> ids() const {
        std::vector<std::string> out;
        for (const auto& c : ranked) out.push_back(c.id);
        return out;
    }
};

inline constexpr std::size_t kDefaultRetrievalK = 8;

// Top-k active tools by cosine similarity between the query and each tool
// description, ties broken by ascending id.
inline StartSet select_start_set(const ToolGraph& g, const EmbeddingProvider& provider, std::string_view query,
                                 std::size_t k) {
    if (k == 0) throw Error(ErrorCode::InvalidParams, "k_retrieval must be >= 1");
    const auto q = provider.embed(query);
    StartSet set{{}, k, false};
    for (const auto& t : g.tools()) {
        if (!t.active) continue;
        const auto d = provider.embed(t.description);
        set.ranked.push_back({t.id, cosine_similarity(q, d)});
    }
    if (set.ranked.empty()) throw Error(ErrorCode::NoActiveTools, "no active tools to start from");
    std::sort(set.ranked.begin(), set.ranked.end(), [](const StartCandidate& a, const StartCandidate& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.id < b.id;
    });
    if (set.ranked.size() > k) set.ranked.resize(k);
    return set;
}

// All visible successors of "start", carrying their start-edge weights.
inline StartSet graph_start_set(const ToolGraph& g) {
    StartSet set{{}, 0, true};
    for (auto& s : g.successors(kStartNode)) set.ranked.push_back({std::move(s.id), s.weight});
    if (set.ranked.empty()) throw Error(ErrorCode::NoActiveTools, "no active tools to start from");
    set.k = set.ranked.size();
    return set;
}

}  // namespace toolnet
