#include "itr/index.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include "itr/hash.hpp"

namespace itr {

std::vector<std::string> analyze(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

std::string BucketHashEmbedder::id() const {
    return "bucket-fnv1a-" + std::to_string(dim_);
}

std::size_t BucketHashEmbedder::bucket_of(std::string_view token) const {
    return static_cast<std::size_t>(fnv1a64(token) % dim_);
}

Vector BucketHashEmbedder::embed(std::string_view text) const {
    Vector v(dim_, 0.0);
    auto tokens = analyze(text);
    if (tokens.empty()) return v; // zero vector for empty text
    for (const auto& token : tokens) v[bucket_of(token)] += 1.0;
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
    return v;
}

double JaccardReranker::score(std::string_view query, std::string_view doc_text) const {
    auto q = analyze(query);
    auto d = analyze(doc_text);
    std::set<std::string> qs(q.begin(), q.end());
    std::set<std::string> ds(d.begin(), d.end());
    if (qs.empty() && ds.empty()) return 0.0;
    std::size_t common = 0;
    for (const auto& t : qs) common += ds.count(t);
    std::size_t unioned = qs.size() + ds.size() - common;
    return unioned == 0 ? 0.0 : static_cast<double>(common) / static_cast<double>(unioned);
}

void HybridWeights::validate() const {
    if (w1 < 0 || w2 < 0 || w3 < 0)
        throw std::invalid_argument("hybrid weights must be non-negative");
    if (std::abs(w1 + w2 + w3 - 1.0) > 1e-9)
        throw std::invalid_argument("hybrid weights must sum to 1");
}

const Embedder& default_embedder() {
    static const BucketHashEmbedder embedder(256);
    return embedder;
}

const Reranker& default_reranker() {
    static const JaccardReranker reranker;
    return reranker;
}

namespace {

void index_doc(KindIndex& idx, const DocRecord& doc, const Embedder& embedder) {
    auto tokens = analyze(doc.text);
    std::map<std::string, std::uint32_t> tf;
    for (const auto& t : tokens) ++tf[t];
    for (const auto& [term, freq] : tf) idx.sparse.postings[term].push_back({doc.id, freq});
    idx.sparse.doc_lengths[doc.id] = tokens.size();
    idx.dense.vectors[doc.id] = embedder.embed(doc.text);
}

void finish_kind(KindIndex& idx) {
    idx.sparse.doc_count = idx.sparse.doc_lengths.size();
    double total = 0.0;
    for (const auto& [id, len] : idx.sparse.doc_lengths) total += static_cast<double>(len);
    idx.sparse.avg_doc_length =
        idx.sparse.doc_count == 0 ? 0.0 : total / static_cast<double>(idx.sparse.doc_count);
    for (auto& [term, postings] : idx.sparse.postings) {
        std::sort(postings.begin(), postings.end(),
                  [](const Posting& a, const Posting& b) { return a.doc_id < b.doc_id; });
    }
}

std::string kind_content_hash(const KindIndex& idx) {
    std::uint64_t state = kFnvOffset;
    for (const auto& [term, postings] : idx.sparse.postings) {
        state = fnv1a64(term, state);
        for (const auto& p : postings) {
            state = fnv1a64(p.doc_id, state);
            state = fnv1a64(std::to_string(p.term_frequency), state);
        }
    }
    for (const auto& [id, vec] : idx.dense.vectors) {
        state = fnv1a64(id, state);
        for (double x : vec) {
            std::ostringstream repr;
            repr.precision(17);
            repr << x;
            state = fnv1a64(repr.str(), state);
        }
    }
    return hex64(state);
}

}  // namespace

nlohmann::json IndexBundle::summary() const {
    auto kind_summary = [](const KindIndex& idx) {
        return nlohmann::json{{"doc_count", idx.sparse.doc_count},
                              {"avg_doc_length", idx.sparse.avg_doc_length},
                              {"content_hash", kind_content_hash(idx)}};
    };
    return {{"instructions", kind_summary(instructions)},
            {"tools", kind_summary(tools)},
            {"corpus_version", corpus_version},
            {"embedder_id", embedder_id}};
}

IndexBundle build_indices(const Corpus& corpus, const Embedder& embedder) {
    IndexBundle bundle;
    bundle.corpus_version = corpus.version;
    bundle.embedder_id = embedder.id();
    bundle.embedder = &embedder;
    bundle.instructions.dense.dim = embedder.dim();
    bundle.instructions.dense.embedder_id = embedder.id();
    bundle.tools.dense.dim = embedder.dim();
    bundle.tools.dense.embedder_id = embedder.id();
    if (embedder.dim() == 0) throw std::invalid_argument("embedder dimension must be positive");

    for (const auto& f : corpus.fragments) {
        DocRecord doc{f.id, DocKind::instruction, f.text, f.token_cost, f.pinned, f.domain, f.priority};
        index_doc(bundle.instructions, doc, embedder);
        bundle.docs.emplace(doc.id, std::move(doc));
    }
    for (const auto& t : corpus.tools) {
        DocRecord doc{t.id,       DocKind::tool, render_tool_schema(t), t.token_cost,
                      t.pinned,   t.domain,      0};
        index_doc(bundle.tools, doc, embedder);
        bundle.docs.emplace(doc.id, std::move(doc));
    }
    finish_kind(bundle.instructions);
    finish_kind(bundle.tools);
    return bundle;
}

double bm25_score(std::string_view query, const std::string& doc_id, const SparseIndex& index) {
    auto it = index.doc_lengths.find(doc_id);
    if (it == index.doc_lengths.end())
        throw std::out_of_range("bm25_score: unknown doc id " + doc_id);
    const double dl = static_cast<double>(it->second);
    const double n = static_cast<double>(index.doc_count);
    const double k1 = index.params.k1;
    const double b = index.params.b;
    const double norm_len = index.avg_doc_length > 0 ? dl / index.avg_doc_length : 0.0;

    auto terms = analyze(query);
    std::set<std::string> unique(terms.begin(), terms.end());
    double score = 0.0;
    for (const auto& term : unique) {
        auto post = index.postings.find(term);
        if (post == index.postings.end()) continue;
        const auto& list = post->second;
        auto doc_it = std::lower_bound(list.begin(), list.end(), doc_id,
                                       [](const Posting& p, const std::string& id) { return p.doc_id < id; });
        if (doc_it == list.end() || doc_it->doc_id != doc_id) continue;
        const double df = static_cast<double>(list.size());
        const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
        const double tf = static_cast<double>(doc_it->term_frequency);
        score += idf * (tf * (k1 + 1.0)) / (tf + k1 * (1.0 - b + b * norm_len));
    }
    return score;
}

double cosine(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw std::invalid_argument("cosine: dimension mismatch");
    double dot = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
    return dot; // inputs are unit (or zero) vectors
}

double hybrid_score(double cosine_sim, double bm25_norm, double ce, const HybridWeights& weights) {
    weights.validate();
    return weights.w1 * cosine_sim + weights.w2 * bm25_norm + weights.w3 * ce;
}

namespace {

std::vector<ScoredCandidate> score_kind(std::string_view query, const Vector& query_vec,
                                        const KindIndex& idx, const IndexBundle& bundle,
                                        DocKind kind, const RetrievalConfig& config) {
    std::vector<ScoredCandidate> scored;
    scored.reserve(idx.sparse.doc_count);
    double bm25_min = std::numeric_limits<double>::infinity();
    double bm25_max = -std::numeric_limits<double>::infinity();
    for (const auto& [doc_id, len] : idx.sparse.doc_lengths) {
        ScoredCandidate c;
        c.id = doc_id;
        c.kind = kind;
        c.cosine = cosine(query_vec, idx.dense.vectors.at(doc_id));
        c.bm25_norm = bm25_score(query, doc_id, idx.sparse); // raw until normalized below
        c.token_cost = bundle.docs.at(doc_id).token_cost;
        bm25_min = std::min(bm25_min, c.bm25_norm);
        bm25_max = std::max(bm25_max, c.bm25_norm);
        scored.push_back(std::move(c));
    }
    if (config.normalize_bm25 && !scored.empty()) {
        // Min-max over the pool; a flat pool maps to 1 when any term matched,
        // 0 otherwise, so scale never affects ranking.
        const double span = bm25_max - bm25_min;
        for (auto& c : scored) {
            if (span > 0)
                c.bm25_norm = (c.bm25_norm - bm25_min) / span;
            else
                c.bm25_norm = bm25_max > 0 ? 1.0 : 0.0;
        }
    }
    for (auto& c : scored) {
        c.ce = 0.0;
        c.hybrid = hybrid_score(c.cosine, c.bm25_norm, c.ce, config.weights);
    }
    std::sort(scored.begin(), scored.end(), [](const ScoredCandidate& a, const ScoredCandidate& b) {
        if (a.hybrid != b.hybrid) return a.hybrid > b.hybrid;
        return a.id < b.id;
    });
    return scored;
}

}  // namespace

RetrievedSets retrieve(std::string_view query, const IndexBundle& bundle,
                       const RetrievalConfig& config) {
    if (analyze(query).empty()) throw std::invalid_argument("empty query string");
    if (config.m_a < 1 || config.m_b < 1)
        throw std::invalid_argument("retrieve: M_A and M_B must be >= 1");
    config.weights.validate();

    const Embedder& embedder = bundle.embedder ? *bundle.embedder : default_embedder();
    const Vector query_vec = embedder.embed(query);
    RetrievedSets sets;
    sets.instructions =
        score_kind(query, query_vec, bundle.instructions, bundle, DocKind::instruction, config);
    sets.tools = score_kind(query, query_vec, bundle.tools, bundle, DocKind::tool, config);
    if (sets.instructions.size() > config.m_a) sets.instructions.resize(config.m_a);
    if (sets.tools.size() > config.m_b) sets.tools.resize(config.m_b);
    return sets;
}

std::vector<ScoredCandidate> rerank(std::string_view query, std::vector<ScoredCandidate> candidates,
                                    const IndexBundle& bundle, const HybridWeights& weights,
                                    const Reranker& reranker) {
    weights.validate();
    for (auto& c : candidates) {
        c.ce = reranker.score(query, bundle.docs.at(c.id).text);
        c.hybrid = hybrid_score(c.cosine, c.bm25_norm, c.ce, weights);
    }
    std::sort(candidates.begin(), candidates.end(),
              [](const ScoredCandidate& a, const ScoredCandidate& b) {
                  if (a.hybrid != b.hybrid) return a.hybrid > b.hybrid;
                  return a.id < b.id;
              });
    return candidates;
}

nlohmann::json to_json(const ScoredCandidate& candidate) {
    return {{"id", candidate.id},
            {"kind", std::string(to_string(candidate.kind))},
            {"cosine", candidate.cosine},
            {"bm25_norm", candidate.bm25_norm},
            {"ce", candidate.ce},
            {"hybrid", candidate.hybrid},
            {"token_cost", candidate.token_cost}};
}

}  // namespace itr
