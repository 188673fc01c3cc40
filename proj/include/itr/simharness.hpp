#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "itr/corpus.hpp"
#include "itr/costmodel.hpp"
#include "itr/gate.hpp"
#include "itr/index.hpp"

namespace itr::sim {

/// Deterministic synthetic corpus. Every tool carries two distinctive
/// keywords so queries can target it; fragments carry domain and fragment
/// keywords. When target_static_tokens > 0 the texts are padded so the
/// summed fragment + tool token costs hit the target exactly.
struct SynthSpec {
    std::size_t n_fragments = 40;
    std::size_t n_tools = 20;
    std::size_t n_domains = 4;
    std::int64_t target_static_tokens = 0;
    std::uint64_t seed = 1;
    std::size_t overlay_tokens = 120;
};

Corpus make_synthetic_corpus(const SynthSpec& spec);

struct SimTask {
    std::string id;
    std::size_t catalog_size = 0;
    std::string gold_tool;
    std::string sibling_tool; // same-domain distractor sharing query vocabulary
    std::vector<std::string> gold_instructions;
    std::int64_t steps = 1;
    std::uint64_t query_seed = 0;
    std::string domain;
};

SimTask make_task(const Corpus& corpus, std::uint64_t seed, std::int64_t steps,
                  std::size_t n_domains);

/// Step queries are a pure function of (task, step) so every policy sees the
/// same query stream. confuser_rate biases some steps toward the sibling
/// tool's vocabulary.
std::string make_step_query(const SimTask& task, std::int64_t step, double confuser_rate);

enum class PolicyKind { b0_monolithic, b1_router_only, b2_prompt_rag, itr };

std::string_view to_string(PolicyKind kind);
PolicyKind policy_kind_from_string(std::string_view name);

struct MockChoice {
    std::optional<std::string> tool;
    double confidence = 0.0;
};

/// Hazard-model tool choice. Gold exposed: picked with probability
/// alpha / (alpha + beta*(m-1)), confidence uniform in [tau, 1]. Gold
/// hidden: uniform distractor, confidence uniform in [0, tau). Empty
/// exposure yields no call and confidence 0.
MockChoice mock_model_step(const std::vector<std::string>& exposed_tools, const std::string& gold_tool,
                           const costmodel::HazardParams& hazard, double tau, std::mt19937_64& rng);

/// ModelClient adapter over mock_model_step for the gate's ITR path.
class HazardMockModel final : public ModelClient {
public:
    HazardMockModel(std::string gold_tool, costmodel::HazardParams hazard, double tau,
                    std::mt19937_64& rng)
        : gold_tool_(std::move(gold_tool)), hazard_(hazard), tau_(tau), rng_(&rng) {}

    ModelReply call(const AssembledPrompt& prompt,
                    const std::vector<std::string>& exposed_tool_ids) override;

private:
    std::string gold_tool_;
    costmodel::HazardParams hazard_;
    double tau_;
    std::mt19937_64* rng_;
};

struct ScenarioConfig {
    std::string name = "scenario";
    std::vector<std::size_t> catalog_sizes = {8, 40, 120};
    std::size_t n_fragments = 40;
    std::size_t n_domains = 4;
    std::int64_t target_static_tokens = 0;
    std::int64_t steps = 6;
    std::size_t episodes_per_size = 100;
    std::uint64_t base_seed = 1;
    costmodel::HazardParams hazard;
    RetrievalConfig retrieval;
    SelectionConfig selection;
    GateConfig gate;
    std::int64_t history_growth = 2000;
    std::int64_t u1 = 0;
    double input_rate = 0.003; // currency per 1k input tokens
    double confuser_rate = 0.35;
    bool use_cache = true;
    std::vector<PolicyKind> policies = {PolicyKind::b0_monolithic, PolicyKind::itr};

    static ScenarioConfig from_json(const nlohmann::json& doc);
    static ScenarioConfig load(const std::filesystem::path& file);
    nlohmann::json to_json() const;
};

struct StepRecord {
    std::size_t exposed_count = 0; // schema-exposed tools at the final call
    bool gold_exposed = false;     // gold among schema-exposed tools
    std::string chosen_tool;
    bool correct = false;
    bool fallback = false;
    std::int64_t ctx_tokens = 0;   // all prompts issued this step, history included
    std::int64_t static_tokens = 0; // first prompt, history excluded
};

struct EpisodeTrace {
    std::string task_id;
    PolicyKind policy = PolicyKind::itr;
    std::uint64_t seed = 0;
    std::size_t catalog_size = 0;
    std::vector<StepRecord> steps;
    bool success = false; // gold instructions all exposed and >= 80% steps correct
    std::int64_t total_tokens = 0;
    double cost = 0.0;
    bool hidden_tool_miss = false; // failed with gold hidden at a failing step

    nlohmann::json to_json() const;
};

EpisodeTrace run_episode(PolicyKind policy, const SimTask& task, const Corpus& corpus,
                         const IndexBundle& bundle, const ScenarioConfig& scenario,
                         std::uint64_t seed, SelectionCache* cache = nullptr,
                         WorkCounters* counters = nullptr);

struct PolicyMetrics {
    PolicyKind policy = PolicyKind::itr;
    std::size_t catalog_size = 0;
    std::size_t episodes = 0;
    double ctx_per_step_mean = 0.0;
    double ctx_per_step_ci = 0.0; // 95% half-width
    double tools_correct_pct = 0.0;
    double tools_correct_ci = 0.0;
    double api_success_pct = 0.0;
    double api_success_ci = 0.0;
    double cost_mean = 0.0;
    double miss_rate_pct = 0.0;
    std::vector<double> compounding; // mean cumulative tokens by step
};

struct EpisodeSummary {
    PolicyKind policy;
    std::size_t catalog_size;
    std::uint64_t seed;
    double step_accuracy;
    bool success;
    bool miss;
    std::int64_t total_tokens;
};

struct MetricsTable {
    std::vector<PolicyMetrics> rows;
    nlohmann::json to_json() const;
    nlohmann::json to_table_json() const;
};

struct BenchmarkResult {
    MetricsTable table;
    std::vector<EpisodeSummary> episodes; // deterministic order: (catalog size, seed, policy)
};

BenchmarkResult run_benchmark_detailed(const ScenarioConfig& scenario,
                                       const std::vector<PolicyKind>& policies,
                                       const std::vector<std::uint64_t>& seeds);

/// Aggregates over seeds with mean and 95% CI. Zero seeds yields an empty
/// table.
MetricsTable run_benchmark(const ScenarioConfig& scenario, const std::vector<PolicyKind>& policies,
                           const std::vector<std::uint64_t>& seeds);

}  // namespace itr::sim
