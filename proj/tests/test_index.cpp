#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "itr/corpus.hpp"
#include "itr/index.hpp"

using namespace itr;

namespace {

Corpus two_doc_corpus() {
    Corpus corpus;
    InstructionFragment d1;
    d1.id = "doc1";
    d1.text = "alpha beta";
    InstructionFragment d2;
    d2.id = "doc2";
    d2.text = "beta gamma";
    corpus.fragments = {d1, d2};
    corpus.safety_overlay.text = "overlay";
    finalize_corpus(corpus);
    return corpus;
}

/// Exhaustive rescoring oracle: recomputes every channel from the formulas
/// and sorts, independently of the retrieve() implementation path.
std::vector<std::string> brute_force_ranking(const Corpus& corpus, const IndexBundle& bundle,
                                             const std::string& query, DocKind kind,
                                             const HybridWeights& weights) {
    const auto& idx = kind == DocKind::instruction ? bundle.instructions : bundle.tools;
    const Vector qv = default_embedder().embed(query);
    std::vector<std::pair<std::string, double>> raw;
    double lo = 1e300;
    double hi = -1e300;
    for (const auto& [id, len] : idx.sparse.doc_lengths) {
        double b = bm25_score(query, id, idx.sparse);
        lo = std::min(lo, b);
        hi = std::max(hi, b);
        raw.push_back({id, b});
    }
    std::vector<std::pair<double, std::string>> fused;
    for (auto& [id, b] : raw) {
        double norm = hi > lo ? (b - lo) / (hi - lo) : (hi > 0 ? 1.0 : 0.0);
        double cos = cosine(qv, idx.dense.vectors.at(id));
        fused.push_back({weights.w1 * cos + weights.w2 * norm, id});
    }
    std::sort(fused.begin(), fused.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    std::vector<std::string> ids;
    for (const auto& [score, id] : fused) ids.push_back(id);
    return ids;
}

}  // namespace

TEST_CASE("build_indices counts documents per kind and is deterministic") {
    Corpus empty;
    empty.safety_overlay.text = "overlay";
    finalize_corpus(empty);
    auto empty_bundle = build_indices(empty);
    CHECK(empty_bundle.instructions.sparse.doc_count == 0);
    CHECK(empty_bundle.tools.sparse.doc_count == 0);

    Corpus corpus = two_doc_corpus();
    ToolSpec t1;
    t1.id = "t1";
    t1.name = "alpha_tool";
    t1.description = "does alpha things";
    ToolSpec t2;
    t2.id = "t2";
    t2.name = "gamma_tool";
    t2.description = "does gamma things";
    corpus.tools = {t1, t2};
    InstructionFragment f3;
    f3.id = "doc3";
    f3.text = "delta epsilon";
    corpus.fragments.push_back(f3);
    finalize_corpus(corpus);

    auto bundle = build_indices(corpus);
    CHECK(bundle.instructions.sparse.doc_count == 3);
    CHECK(bundle.tools.sparse.doc_count == 2);
    CHECK(bundle.summary() == build_indices(corpus).summary());
}

TEST_CASE("bm25 matches a hand evaluation of the Okapi formula") {
    Corpus corpus = two_doc_corpus();
    auto bundle = build_indices(corpus);
    const auto& sparse = bundle.instructions.sparse;

    // idf("alpha") = ln 2 and the tf component collapses to 1.
    CHECK(bm25_score("alpha", "doc1", sparse) == doctest::Approx(0.6931).epsilon(1e-3));
    CHECK(bm25_score("alpha", "doc2", sparse) == 0.0);
    CHECK(bm25_score("nosuchterm", "doc1", sparse) == 0.0);
    CHECK_THROWS_AS(bm25_score("alpha", "missing", sparse), std::out_of_range);
}

TEST_CASE("embedding contract: unit vectors, zero for empty text") {
    const auto& embedder = default_embedder();
    Vector zero = embedder.embed("");
    for (double x : zero) CHECK(x == 0.0);

    Vector v = embedder.embed("alpha beta alpha");
    double norm = 0.0;
    for (double x : v) norm += x * x;
    CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(cosine(v, v) == doctest::Approx(1.0).epsilon(1e-12));

    // Confirmed distinct buckets, so the cosine is exactly zero.
    const auto& bucketed = dynamic_cast<const BucketHashEmbedder&>(embedder);
    REQUIRE(bucketed.bucket_of("alpha") != bucketed.bucket_of("beta"));
    CHECK(cosine(embedder.embed("alpha"), embedder.embed("beta")) == 0.0);
}

TEST_CASE("hybrid fusion is the stated weighted sum") {
    HybridWeights weights{0.5, 0.3, 0.2};
    CHECK(hybrid_score(0.8, 0.5, 0.7, weights) == doctest::Approx(0.69));
    CHECK(hybrid_score(0.0, 0.0, 0.0, weights) == 0.0);
    CHECK(hybrid_score(1.0, 1.0, 1.0, weights) == doctest::Approx(1.0));
    CHECK(hybrid_score(1.0, 1.0, 1.0, HybridWeights{0.2, 0.2, 0.6}) == doctest::Approx(1.0));
    CHECK_THROWS_AS(hybrid_score(0.5, 0.5, 0.5, HybridWeights{0.5, 0.5, 0.5}),
                    std::invalid_argument);
}

TEST_CASE("retrieve ranks the named tool first and respects pool bounds") {
    Corpus corpus;
    corpus.safety_overlay.text = "overlay";
    for (int i = 0; i < 3; ++i) {
        InstructionFragment f;
        f.id = "f" + std::to_string(i);
        f.text = "generic guidance " + std::to_string(i);
        corpus.fragments.push_back(f);
    }
    ToolSpec wanted;
    wanted.id = "t-search";
    wanted.name = "searchdocs";
    wanted.description = "searchdocs finds documents.";
    ToolSpec other;
    other.id = "t-billing";
    other.name = "billingsync";
    other.description = "synchronizes invoices.";
    corpus.tools = {wanted, other};
    finalize_corpus(corpus);
    auto bundle = build_indices(corpus);

    RetrievalConfig config;
    auto sets = retrieve("searchdocs", bundle, config);
    REQUIRE(!sets.tools.empty());
    CHECK(sets.tools.front().id == "t-search");
    CHECK(sets.tools.size() == 2); // M_B larger than the pool returns all

    auto oracle = brute_force_ranking(corpus, bundle, "searchdocs", DocKind::tool, config.weights);
    REQUIRE(oracle.size() == sets.tools.size());
    for (std::size_t i = 0; i < oracle.size(); ++i) CHECK(sets.tools[i].id == oracle[i]);

    CHECK_THROWS_AS(retrieve("", bundle, config), std::invalid_argument);
    CHECK_THROWS_AS(retrieve("   ", bundle, config), std::invalid_argument);
    RetrievalConfig zero_m;
    zero_m.m_a = 0;
    CHECK_THROWS_AS(retrieve("searchdocs", bundle, zero_m), std::invalid_argument);
}

TEST_CASE("identical scores break ties by ascending id") {
    Corpus corpus;
    corpus.safety_overlay.text = "overlay";
    InstructionFragment a;
    a.id = "bbb";
    a.text = "twin text";
    InstructionFragment b;
    b.id = "aaa";
    b.text = "twin text";
    corpus.fragments = {a, b};
    finalize_corpus(corpus);
    auto bundle = build_indices(corpus);

    auto sets = retrieve("twin", bundle, RetrievalConfig{});
    REQUIRE(sets.instructions.size() == 2);
    CHECK(sets.instructions[0].id == "aaa");
    CHECK(sets.instructions[1].id == "bbb");
}

TEST_CASE("degenerate weights reduce to single-channel orderings") {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> words(1, 8);
    const std::vector<std::string> vocab = {"alpha", "beta",  "gamma", "delta",
                                            "omega", "sigma", "kappa", "theta"};
    Corpus corpus;
    corpus.safety_overlay.text = "overlay";
    for (int i = 0; i < 12; ++i) {
        InstructionFragment f;
        f.id = "d" + std::to_string(100 + i);
        std::string text;
        const int n = words(rng);
        for (int w = 0; w < n; ++w) text += vocab[rng() % vocab.size()] + " ";
        f.text = text;
        corpus.fragments.push_back(f);
    }
    finalize_corpus(corpus);
    auto bundle = build_indices(corpus);
    const std::string query = "alpha gamma";

    SUBCASE("(1,0,0) equals pure cosine order") {
        RetrievalConfig config;
        config.weights = {1.0, 0.0, 0.0};
        auto sets = retrieve(query, bundle, config);
        const Vector qv = default_embedder().embed(query);
        std::vector<std::pair<double, std::string>> expect;
        for (const auto& [id, len] : bundle.instructions.sparse.doc_lengths)
            expect.push_back({cosine(qv, bundle.instructions.dense.vectors.at(id)), id});
        std::sort(expect.begin(), expect.end(), [](const auto& x, const auto& y) {
            if (x.first != y.first) return x.first > y.first;
            return x.second < y.second;
        });
        for (std::size_t i = 0; i < sets.instructions.size(); ++i)
            CHECK(sets.instructions[i].id == expect[i].second);
    }

    SUBCASE("(0,1,0) equals pure BM25 order") {
        RetrievalConfig config;
        config.weights = {0.0, 1.0, 0.0};
        auto sets = retrieve(query, bundle, config);
        std::vector<std::pair<double, std::string>> expect;
        for (const auto& [id, len] : bundle.instructions.sparse.doc_lengths)
            expect.push_back({bm25_score(query, id, bundle.instructions.sparse), id});
        std::sort(expect.begin(), expect.end(), [](const auto& x, const auto& y) {
            if (x.first != y.first) return x.first > y.first;
            return x.second < y.second;
        });
        // Min-max normalization is monotone, so the order carries over.
        for (std::size_t i = 0; i < sets.instructions.size(); ++i)
            CHECK(sets.instructions[i].id == expect[i].second);
    }
}

TEST_CASE("positive scaling of raw bm25 leaves the normalized ranking unchanged") {
    std::vector<double> raw = {0.0, 1.3, 0.4, 2.6, 0.9};
    auto ranking_of = [](std::vector<double> xs) {
        double lo = *std::min_element(xs.begin(), xs.end());
        double hi = *std::max_element(xs.begin(), xs.end());
        std::vector<double> norm;
        for (double x : xs) norm.push_back(hi > lo ? (x - lo) / (hi - lo) : (hi > 0 ? 1.0 : 0.0));
        std::vector<std::size_t> order(xs.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (norm[a] != norm[b]) return norm[a] > norm[b];
            return a < b;
        });
        return order;
    };
    auto base = ranking_of(raw);
    for (double scale : {0.01, 0.5, 3.0, 1000.0}) {
        std::vector<double> scaled;
        for (double x : raw) scaled.push_back(x * scale);
        CHECK(ranking_of(scaled) == base);
    }
}

TEST_CASE("rerank fills ce, recomputes hybrid, and permutes only") {
    Corpus corpus;
    corpus.safety_overlay.text = "overlay";
    InstructionFragment exact;
    exact.id = "exact";
    exact.text = "alpha beta";
    InstructionFragment disjoint;
    disjoint.id = "disjoint";
    disjoint.text = "omega sigma";
    InstructionFragment partial;
    partial.id = "partial";
    partial.text = "alpha omega";
    corpus.fragments = {exact, disjoint, partial};
    finalize_corpus(corpus);
    auto bundle = build_indices(corpus);

    RetrievalConfig config;
    auto sets = retrieve("alpha beta", bundle, config);
    auto reranked = rerank("alpha beta", sets.instructions, bundle, config.weights);

    std::multiset<std::string> before;
    for (const auto& c : sets.instructions) before.insert(c.id);
    std::multiset<std::string> after;
    for (const auto& c : reranked) after.insert(c.id);
    CHECK(before == after);

    for (const auto& c : reranked) {
        if (c.id == "exact") CHECK(c.ce == doctest::Approx(1.0));
        if (c.id == "disjoint") CHECK(c.ce == doctest::Approx(0.0));
        CHECK(c.hybrid ==
              doctest::Approx(hybrid_score(c.cosine, c.bm25_norm, c.ce, config.weights)));
    }
}

TEST_CASE("retrieval is deterministic for equal corpus, query and config") {
    Corpus corpus = two_doc_corpus();
    auto bundle = build_indices(corpus);
    auto a = retrieve("alpha beta", bundle, RetrievalConfig{});
    auto b = retrieve("alpha beta", bundle, RetrievalConfig{});
    REQUIRE(a.instructions.size() == b.instructions.size());
    for (std::size_t i = 0; i < a.instructions.size(); ++i) {
        CHECK(a.instructions[i].id == b.instructions[i].id);
        CHECK(a.instructions[i].hybrid == b.instructions[i].hybrid);
    }
}
