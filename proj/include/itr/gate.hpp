#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "itr/assembler.hpp"
#include "itr/cache.hpp"
#include "itr/index.hpp"
#include "itr/selector.hpp"

namespace itr {

struct StepQuery {
    std::string query_text;
    std::vector<std::string> history;  // prior turn summaries
    std::size_t history_tokens = 0;    // U_t
    std::optional<std::string> domain_hint;
};

enum class DiscoveryPolicy { expand_kb, catalog_summary };

std::string_view to_string(DiscoveryPolicy policy);
DiscoveryPolicy discovery_policy_from_string(std::string_view name);

struct GateConfig {
    double tau = 0.5;
    DiscoveryPolicy discovery = DiscoveryPolicy::expand_kb;
    int max_fallbacks = 1;
};

struct ModelReply {
    std::string output;
    std::optional<std::string> tool_call;
    double confidence = 0.0; // [0, 1]
};

/// Pluggable model contract; the deterministic mock lives in the sim
/// harness, the HTTP callback client in the service.
class ModelClient {
public:
    virtual ~ModelClient() = default;
    virtual ModelReply call(const AssembledPrompt& prompt,
                            const std::vector<std::string>& exposed_tool_ids) = 0;
};

/// true = proceed; fallback fires iff confidence < tau (strict).
bool sufficiency_gate(double confidence, double tau);

struct StepConfigs {
    RetrievalConfig retrieval;
    SelectionConfig selection;
    GateConfig gate;

    std::string config_hash() const;
};

struct WorkCounters {
    std::atomic<std::uint64_t> scoring_runs{0}; // retrieval+rerank+select computations
};

class TelemetrySink {
public:
    virtual ~TelemetrySink() = default;
    virtual void append(const nlohmann::json& record) = 0;
};

/// JSON Lines file sink; one line per appended record.
class FileTelemetrySink final : public TelemetrySink {
public:
    explicit FileTelemetrySink(const std::filesystem::path& path);
    void append(const nlohmann::json& record) override;

private:
    std::mutex mutex_;
    std::ofstream out_;
};

class MemoryTelemetrySink final : public TelemetrySink {
public:
    void append(const nlohmann::json& record) override;
    std::vector<nlohmann::json> records() const;

private:
    mutable std::mutex mutex_;
    std::vector<nlohmann::json> records_;
};

struct EngineHandles {
    const Corpus* corpus = nullptr;
    const IndexBundle* indices = nullptr;
    ModelClient* model = nullptr;
    SelectionCache* cache = nullptr;      // optional
    TelemetrySink* telemetry = nullptr;   // optional
    WorkCounters* counters = nullptr;     // optional
};

struct ExpandOutcome {
    SelectionResult selection;
    std::string catalog_summary; // non-empty only under catalog_summary
};

/// expand_kb: rerun greedy with K_B doubled and the budget raised by the
/// summed cost of the next-ranked unselected tools; prior tools are pinned
/// so the new selection is a superset. catalog_summary: selection unchanged,
/// a one-line-per-tool summary is emitted instead.
ExpandOutcome expand_or_discover(const SelectionResult& prior,
                                 const std::vector<ScoredCandidate>& instr_candidates,
                                 const std::vector<ScoredCandidate>& tool_candidates,
                                 const SelectionConfig& selection_config, const GateConfig& gate_config,
                                 const Corpus& corpus, const std::vector<std::string>& pinned_ids);

/// One line per tool: "- name: first sentence of description", id order.
std::string make_catalog_summary(const Corpus& corpus);

/// Pinned items become always-eligible when their domain matches the hint
/// exactly; items pinned with an empty domain are always eligible.
std::vector<std::string> resolve_pinned_ids(const Corpus& corpus,
                                            const std::optional<std::string>& domain_hint);

struct StepResult {
    ModelReply reply;
    SelectionResult selection; // selection behind the final issued prompt
    int prompts_issued = 1;
    bool fallback_taken = false;
    std::size_t tokens_spent = 0;        // sum of tok_itr over issued prompts
    std::size_t first_prompt_tokens = 0; // first prompt total, history excluded
    std::optional<std::string> tool_call;
    double first_confidence = 0.0;
    bool hidden_tool_miss = false; // gold never schema-exposed (when gold known)
    bool cache_hit = false;
    std::vector<std::string> exposed_tools_first;
    std::vector<std::string> exposed_tools_final;

    nlohmann::json to_json() const;
};

class StepError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Algorithm: embed + top-M retrieval, rerank, greedy select, assemble
/// (overlay | instructions | tool schemas | note), model call with the
/// selected tools exposed, sufficiency gate, then at most
/// `max_fallbacks` expand-or-discover retries. Emits one telemetry record.
/// `gold_tool_id` is an evaluation hook for hidden-tool-miss accounting.
StepResult itr_step(const StepQuery& query, const EngineHandles& handles, const StepConfigs& configs,
                    const std::optional<std::string>& gold_tool_id = std::nullopt,
                    const std::string& step_id = {});

}  // namespace itr
