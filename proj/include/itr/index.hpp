#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "itr/corpus.hpp"

namespace itr {

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

struct Posting {
    std::string doc_id;
    std::uint32_t term_frequency = 0;
};

struct SparseIndex {
    std::map<std::string, std::vector<Posting>> postings; // doc ids ascending
    std::map<std::string, std::size_t> doc_lengths;       // analyzer tokens per doc
    double avg_doc_length = 0.0;
    std::size_t doc_count = 0;
    Bm25Params params;
};

using Vector = std::vector<double>;

struct DenseIndex {
    std::map<std::string, Vector> vectors; // unit norm, or all-zero for empty text
    std::string embedder_id;
    std::size_t dim = 256;
};

/// Embedding contract. The default is a deterministic lexical stand-in; a
/// real dual encoder plugs in behind the same interface.
class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::size_t dim() const = 0;
    virtual std::string id() const = 0;
    virtual Vector embed(std::string_view text) const = 0;
};

/// Hashes each whitespace token into one of `dim` buckets, counts, then
/// L2-normalizes. Empty text maps to the zero vector.
class BucketHashEmbedder final : public Embedder {
public:
    explicit BucketHashEmbedder(std::size_t dim = 256) : dim_(dim) {}
    std::size_t dim() const override { return dim_; }
    std::string id() const override;
    Vector embed(std::string_view text) const override;
    std::size_t bucket_of(std::string_view token) const;

private:
    std::size_t dim_;
};

/// Cross-encoder contract; scores must land in [0, 1].
class Reranker {
public:
    virtual ~Reranker() = default;
    virtual std::string id() const = 0;
    virtual double score(std::string_view query, std::string_view doc_text) const = 0;
};

/// Jaccard overlap of the query and document token sets.
class JaccardReranker final : public Reranker {
public:
    std::string id() const override { return "jaccard-token-overlap"; }
    double score(std::string_view query, std::string_view doc_text) const override;
};

struct HybridWeights {
    double w1 = 0.5; // cosine
    double w2 = 0.3; // normalized BM25
    double w3 = 0.2; // cross-encoder
    void validate() const; // throws unless w1+w2+w3 == 1 within 1e-9
};

struct ScoredCandidate {
    std::string id;
    DocKind kind = DocKind::instruction;
    double cosine = 0.0;    // [-1, 1]
    double bm25_norm = 0.0; // [0, 1]
    double ce = 0.0;        // [0, 1]
    double hybrid = 0.0;
    std::size_t token_cost = 0;
};

/// Text and metadata retained per indexed document so reranking and
/// selection can run without going back to the corpus.
struct DocRecord {
    std::string id;
    DocKind kind = DocKind::instruction;
    std::string text;
    std::size_t token_cost = 0;
    bool pinned = false;
    std::string domain;
    int priority = 0;
};

struct KindIndex {
    SparseIndex sparse;
    DenseIndex dense;
};

struct IndexBundle {
    KindIndex instructions;
    KindIndex tools;
    std::map<std::string, DocRecord> docs;
    std::string corpus_version;
    std::string embedder_id;
    const Embedder* embedder = nullptr; // non-owning; must outlive the bundle

    /// Per-kind doc_count, avg_doc_length and a content hash, for telemetry.
    nlohmann::json summary() const;
};

/// Lower-cased alphanumeric tokens.
std::vector<std::string> analyze(std::string_view text);

const Embedder& default_embedder();
const Reranker& default_reranker();

/// Deterministic given corpus bytes and embedder id. Throws on dimension
/// mismatch between the embedder and an existing dense index config.
IndexBundle build_indices(const Corpus& corpus, const Embedder& embedder = default_embedder());

/// Okapi BM25 with idf = ln(1 + (N - df + 0.5) / (df + 0.5)). Unknown doc
/// ids throw.
double bm25_score(std::string_view query, const std::string& doc_id, const SparseIndex& index);

double cosine(const Vector& a, const Vector& b);

/// w1*cosine + w2*bm25_norm + w3*ce. The BM25 channel must already be
/// min-max normalized over the candidate pool.
double hybrid_score(double cosine_sim, double bm25_norm, double ce, const HybridWeights& weights);

struct RetrievalConfig {
    std::size_t m_a = 32;
    std::size_t m_b = 32;
    HybridWeights weights;
    bool normalize_bm25 = true; // min-max per query over the candidate pool
};

struct RetrievedSets {
    std::vector<ScoredCandidate> instructions;
    std::vector<ScoredCandidate> tools;
};

/// First-stage retrieval: hybrid = w1*cos + w2*bm25_norm with ce = 0,
/// sorted descending, ties broken by ascending id. Empty queries throw.
RetrievedSets retrieve(std::string_view query, const IndexBundle& bundle,
                       const RetrievalConfig& config);

/// Fills the ce channel, recomputes hybrid and re-sorts. Pure permutation:
/// never adds or removes candidates.
std::vector<ScoredCandidate> rerank(std::string_view query, std::vector<ScoredCandidate> candidates,
                                    const IndexBundle& bundle, const HybridWeights& weights,
                                    const Reranker& reranker = default_reranker());

nlohmann::json to_json(const ScoredCandidate& candidate);

}  // namespace itr
