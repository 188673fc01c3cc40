#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "itr/cache.hpp"
#include "itr/corpus.hpp"
#include "itr/gate.hpp"
#include "itr/index.hpp"

namespace itr {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct EngineConfig {
    std::vector<std::filesystem::path> corpus_paths; // directories or .jsonl files
    RetrievalConfig retrieval;   // M_A/M_B 32/32, weights 0.5/0.3/0.2
    SelectionConfig selection;   // budget 1500, K_A 4, K_B 2
    GateConfig gate;             // tau 0.5, expand_kb, one fallback
    std::size_t cache_capacity = 1024;
    std::filesystem::path telemetry_path; // empty = in-memory sink
    std::string model_kind = "mock";      // "mock" or "callback"
    std::string model_callback_url;
    double mock_confidence = 0.9;
    int port = 8377;
};

/// Deterministic stand-in client for service use: echoes the query, calls
/// the first exposed tool, reports a fixed confidence (0 with no tools).
class FixedMockModel final : public ModelClient {
public:
    explicit FixedMockModel(double confidence = 0.9) : confidence_(confidence) {}
    ModelReply call(const AssembledPrompt& prompt,
                    const std::vector<std::string>& exposed_tool_ids) override;

private:
    double confidence_;
};

/// POSTs the assembled prompt to a configured URL and reads back
/// (output, tool_call, confidence).
class CallbackModelClient final : public ModelClient {
public:
    explicit CallbackModelClient(std::string url);
    ModelReply call(const AssembledPrompt& prompt,
                    const std::vector<std::string>& exposed_tool_ids) override;

private:
    std::string host_;
    std::string path_;
};

/// Owns the loaded corpus, index bundle, cache, telemetry sink and model
/// client. Corpus and indices are immutable after construction; reload
/// swaps them wholesale.
class Engine {
public:
    explicit Engine(EngineConfig config);

    RetrievedSets retrieve(std::string_view query, std::size_t m_a, std::size_t m_b,
                           bool apply_rerank = true) const;
    SelectionResult select(const std::vector<SelectionCandidate>& instr,
                           const std::vector<SelectionCandidate>& tools,
                           const SelectionConfig& config,
                           const std::vector<std::string>& pinned_ids) const;
    AssembledPrompt assemble(const SelectionResult& selection,
                             std::string_view catalog_summary = {}) const;
    StepResult step(const StepQuery& query, const std::optional<std::string>& gold_tool_id = {});

    const Corpus& corpus() const { return corpus_; }
    const IndexBundle& indices() const { return indices_; }
    const EngineConfig& config() const { return config_; }
    StepConfigs step_configs() const;
    CacheStats cache_stats() const { return cache_->stats(); }
    std::uint64_t scoring_runs() const { return counters_.scoring_runs.load(); }
    nlohmann::json health() const;
    TelemetrySink& telemetry() { return *telemetry_; }

private:
    EngineConfig config_;
    Corpus corpus_;
    IndexBundle indices_;
    std::unique_ptr<SelectionCache> cache_;
    std::unique_ptr<TelemetrySink> telemetry_;
    std::unique_ptr<ModelClient> model_;
    WorkCounters counters_;
    std::uint64_t step_counter_ = 0;
    std::mutex step_mutex_;
};

}  // namespace itr
