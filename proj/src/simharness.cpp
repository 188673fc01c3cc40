#include "itr/simharness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "itr/assembler.hpp"
#include "itr/selector.hpp"

namespace itr::sim {

namespace {

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    // splitmix64 finalizer over the xor of both inputs
    std::uint64_t z = a ^ (b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2));
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

std::string domain_name(std::size_t d) { return "domain" + std::to_string(d); }
std::string domain_word(std::size_t d) { return "domw" + std::to_string(d); }
std::string tool_keywords(std::size_t idx) {
    return "tkw" + std::to_string(idx) + "a tkw" + std::to_string(idx) + "b";
}
std::string frag_keyword(std::size_t idx) { return "fkw" + std::to_string(idx) + "x"; }

/// Pads `text` with filler words until approx_token_count hits `tokens`
/// exactly (byte-exact padding under the ceil(bytes/4) counter).
void pad_to_tokens(std::string& text, std::size_t tokens, std::uint64_t salt) {
    const std::size_t target_bytes = tokens * 4;
    if (text.size() > target_bytes)
        throw std::invalid_argument("synthetic text exceeds its token target");
    static const char* fillers[] = {"alpha", "delta", "gamma", "sigma", "omega", "theta",
                                    "kappa", "lambda", "vector", "record"};
    std::uint64_t state = salt;
    while (text.size() + 8 <= target_bytes) {
        state = mix(state, text.size());
        text += ' ';
        text += fillers[state % 10];
    }
    while (text.size() < target_bytes) text += '.';
}

/// Splits an integer token budget into `n` near-equal per-item targets.
std::vector<std::size_t> split_budget(std::size_t total, std::size_t n) {
    std::vector<std::size_t> parts(n, n == 0 ? 0 : total / n);
    if (n == 0) return parts;
    std::size_t rem = total % n;
    for (std::size_t i = 0; i < rem; ++i) ++parts[i];
    return parts;
}

}  // namespace

Corpus make_synthetic_corpus(const SynthSpec& spec) {
    Corpus corpus;
    const std::size_t n_domains = std::max<std::size_t>(spec.n_domains, 1);

    std::vector<std::size_t> frag_targets;
    std::vector<std::size_t> tool_targets;
    if (spec.target_static_tokens > 0) {
        const auto total = static_cast<std::size_t>(spec.target_static_tokens);
        const std::size_t frag_share = total / 2;
        frag_targets = split_budget(frag_share, spec.n_fragments);
        tool_targets = split_budget(total - frag_share, spec.n_tools);
    } else {
        frag_targets.assign(spec.n_fragments, 320);
        tool_targets.assign(spec.n_tools, 380);
    }

    for (std::size_t i = 0; i < spec.n_fragments; ++i) {
        InstructionFragment f;
        const std::size_t d = i % n_domains;
        f.id = "frag-" + std::to_string(i);
        f.domain = domain_name(d);
        f.policy_type = i % 7 == 0 ? PolicyType::policy : PolicyType::style;
        f.priority = static_cast<int>(i);
        f.text = "Guidance " + std::to_string(i) + " for " + domain_word(d) + " workflows: apply " +
                 frag_keyword(i) + " conventions when handling " + domain_word(d) +
                 " requests. Keep responses precise and follow the checklist.";
        pad_to_tokens(f.text, frag_targets[i], mix(spec.seed, 1000 + i));
        corpus.fragments.push_back(std::move(f));
    }

    // Tool token targets apply to the rendered schema, so padding lands in
    // the argument schema after measuring the rest of the render.
    for (std::size_t i = 0; i < spec.n_tools; ++i) {
        ToolSpec t;
        const std::size_t d = i % n_domains;
        t.id = "tool-" + std::to_string(i);
        t.name = "tool_" + std::to_string(d) + "_" + std::to_string(i);
        t.domain = domain_name(d);
        t.description = "Performs " + tool_keywords(i) + " operations on " + domain_word(d) +
                        " records. Accepts a record identifier and returns the processed payload.";
        t.argument_schema = "{\"record_id\": \"string\", \"payload\": \"object\"}";
        t.preconditions = {"record_id resolves in the " + domain_word(d) + " store"};
        t.postconditions = {"payload validated and persisted"};
        t.failure_modes = {"unknown record_id", "payload schema mismatch"};
        t.exemplars = {t.name + "({\"record_id\": \"r-" + std::to_string(i) + "\"}) -> ok"};
        const std::size_t base = approx_token_count(render_tool_schema(t));
        if (tool_targets[i] > base) {
            const std::size_t pad_tokens = tool_targets[i] - base;
            std::string pad;
            pad_to_tokens(pad, pad_tokens, mix(spec.seed, 2000 + i));
            t.argument_schema += pad;
        }
        corpus.tools.push_back(std::move(t));
    }

    corpus.safety_overlay.text =
        "Safety overlay: follow content policy at every step. Never fabricate tool results, "
        "never call tools that are not listed, decline unsafe requests, and escalate on "
        "policy conflicts.";
    pad_to_tokens(corpus.safety_overlay.text, spec.overlay_tokens, mix(spec.seed, 3));
    corpus.routing_note = default_routing_note();
    finalize_corpus(corpus);
    return corpus;
}

SimTask make_task(const Corpus& corpus, std::uint64_t seed, std::int64_t steps,
                  std::size_t n_domains) {
    if (corpus.tools.empty()) throw std::invalid_argument("make_task: corpus has no tools");
    std::mt19937_64 rng(mix(seed, 0x7a51));
    SimTask task;
    task.id = "task-" + std::to_string(seed);
    task.catalog_size = corpus.tools.size();
    task.steps = steps;
    task.query_seed = mix(seed, 0x51e9);

    const std::size_t gold_idx = rng() % corpus.tools.size();
    const ToolSpec& gold = corpus.tools[gold_idx];
    task.gold_tool = gold.id;
    task.domain = gold.domain;

    // Same-domain sibling when one exists; any other tool otherwise.
    std::vector<std::size_t> siblings;
    for (std::size_t i = 0; i < corpus.tools.size(); ++i)
        if (i != gold_idx && corpus.tools[i].domain == gold.domain) siblings.push_back(i);
    std::size_t sibling_idx;
    if (!siblings.empty()) {
        sibling_idx = siblings[rng() % siblings.size()];
    } else {
        sibling_idx = (gold_idx + 1) % corpus.tools.size();
    }
    task.sibling_tool = corpus.tools[sibling_idx].id;

    for (const auto& f : corpus.fragments) {
        if (f.domain == gold.domain) task.gold_instructions.push_back(f.id);
        if (task.gold_instructions.size() == 2) break;
    }
    (void)n_domains;
    return task;
}

namespace {

std::size_t index_from_id(const std::string& id) {
    auto pos = id.rfind('-');
    return static_cast<std::size_t>(std::stoul(id.substr(pos + 1)));
}

std::size_t domain_index(const std::string& domain) {
    return static_cast<std::size_t>(std::stoul(domain.substr(6)));
}

}  // namespace

std::string make_step_query(const SimTask& task, std::int64_t step, double confuser_rate) {
    std::mt19937_64 rng(mix(task.query_seed, static_cast<std::uint64_t>(step)));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const bool confused = unit(rng) < confuser_rate;

    const std::size_t d = domain_index(task.domain);
    std::ostringstream q;
    q << "step " << step << " request: need " << domain_word(d) << " workflow guidance";
    if (!task.gold_instructions.empty()) {
        const auto& frag_id =
            task.gold_instructions[static_cast<std::size_t>(step) % task.gold_instructions.size()];
        q << " " << frag_keyword(index_from_id(frag_id));
    }
    const std::string gold_kw = tool_keywords(index_from_id(task.gold_tool));
    const std::string sibling_kw = tool_keywords(index_from_id(task.sibling_tool));
    if (confused) {
        // Sibling vocabulary dominates: the gold tool usually ranks second.
        q << " run " << sibling_kw << " " << sibling_kw << " then " << gold_kw;
    } else {
        q << " run " << gold_kw << " " << gold_kw;
    }
    return q.str();
}

std::string_view to_string(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::b0_monolithic: return "b0_monolithic";
        case PolicyKind::b1_router_only: return "b1_router_only";
        case PolicyKind::b2_prompt_rag: return "b2_prompt_rag";
        case PolicyKind::itr: return "itr";
    }
    return "itr";
}

PolicyKind policy_kind_from_string(std::string_view name) {
    if (name == "b0" || name == "b0_monolithic") return PolicyKind::b0_monolithic;
    if (name == "b1" || name == "b1_router_only") return PolicyKind::b1_router_only;
    if (name == "b2" || name == "b2_prompt_rag") return PolicyKind::b2_prompt_rag;
    if (name == "itr") return PolicyKind::itr;
    throw std::invalid_argument("unknown policy: " + std::string(name));
}

MockChoice mock_model_step(const std::vector<std::string>& exposed_tools, const std::string& gold_tool,
                           const costmodel::HazardParams& hazard, double tau, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double u_choice = unit(rng);
    const double u_conf = unit(rng);
    if (exposed_tools.empty()) return {std::nullopt, 0.0};

    const auto m = static_cast<std::int64_t>(exposed_tools.size());
    const auto gold_it = std::find(exposed_tools.begin(), exposed_tools.end(), gold_tool);

    if (gold_it != exposed_tools.end()) {
        const double p = costmodel::p_correct_mono(m, hazard.alpha, hazard.beta);
        const double confidence = tau + u_conf * (1.0 - tau);
        if (m == 1 || u_choice < p) return {gold_tool, confidence};
        // Re-scale the residual choice mass over the distractors.
        const double frac = (u_choice - p) / (1.0 - p);
        auto idx = static_cast<std::size_t>(frac * static_cast<double>(m - 1));
        idx = std::min(idx, static_cast<std::size_t>(m - 2));
        std::size_t seen = 0;
        for (const auto& id : exposed_tools) {
            if (id == gold_tool) continue;
            if (seen == idx) return {id, confidence};
            ++seen;
        }
        return {exposed_tools.back(), confidence};
    }

    const double confidence = tau > 0.0 ? u_conf * tau : 0.0; // [0, tau)
    auto idx = static_cast<std::size_t>(u_choice * static_cast<double>(m));
    idx = std::min(idx, static_cast<std::size_t>(m - 1));
    return {exposed_tools[idx], confidence};
}

ModelReply HazardMockModel::call(const AssembledPrompt& prompt,
                                 const std::vector<std::string>& exposed_tool_ids) {
    (void)prompt;
    MockChoice choice = mock_model_step(exposed_tool_ids, gold_tool_, hazard_, tau_, *rng_);
    ModelReply reply;
    reply.output = choice.tool ? "call " + *choice.tool : "no viable tool";
    reply.tool_call = choice.tool;
    reply.confidence = choice.confidence;
    return reply;
}

ScenarioConfig ScenarioConfig::from_json(const nlohmann::json& doc) {
    ScenarioConfig cfg;
    cfg.name = doc.value("name", cfg.name);
    if (doc.contains("catalog_sizes"))
        cfg.catalog_sizes = doc.at("catalog_sizes").get<std::vector<std::size_t>>();
    cfg.n_fragments = doc.value("n_fragments", cfg.n_fragments);
    cfg.n_domains = doc.value("n_domains", cfg.n_domains);
    cfg.target_static_tokens = doc.value("target_static_tokens", cfg.target_static_tokens);
    cfg.steps = doc.value("steps", cfg.steps);
    cfg.episodes_per_size = doc.value("episodes_per_size", cfg.episodes_per_size);
    cfg.base_seed = doc.value("base_seed", cfg.base_seed);
    if (doc.contains("hazard")) {
        const auto& h = doc.at("hazard");
        cfg.hazard.alpha = h.value("alpha", cfg.hazard.alpha);
        cfg.hazard.beta = h.value("beta", cfg.hazard.beta);
        cfg.hazard.recall = h.value("recall", cfg.hazard.recall);
    }
    if (doc.contains("retrieval")) {
        const auto& r = doc.at("retrieval");
        cfg.retrieval.m_a = r.value("m_a", cfg.retrieval.m_a);
        cfg.retrieval.m_b = r.value("m_b", cfg.retrieval.m_b);
        if (r.contains("weights")) {
            auto w = r.at("weights").get<std::vector<double>>();
            if (w.size() != 3) throw std::invalid_argument("retrieval.weights must have 3 entries");
            cfg.retrieval.weights = {w[0], w[1], w[2]};
        }
        cfg.retrieval.normalize_bm25 = r.value("normalize_bm25", cfg.retrieval.normalize_bm25);
    }
    if (doc.contains("selection")) {
        const auto& s = doc.at("selection");
        cfg.selection.budget_b = s.value("budget_b", cfg.selection.budget_b);
        cfg.selection.k_a = s.value("k_a", cfg.selection.k_a);
        cfg.selection.k_b = s.value("k_b", cfg.selection.k_b);
        cfg.selection.recall_first = s.value("recall_first", cfg.selection.recall_first);
    }
    if (doc.contains("gate")) {
        const auto& g = doc.at("gate");
        cfg.gate.tau = g.value("tau", cfg.gate.tau);
        if (g.contains("discovery"))
            cfg.gate.discovery = discovery_policy_from_string(g.at("discovery").get<std::string>());
        cfg.gate.max_fallbacks = g.value("max_fallbacks", cfg.gate.max_fallbacks);
    }
    cfg.history_growth = doc.value("history_growth", cfg.history_growth);
    cfg.u1 = doc.value("u1", cfg.u1);
    cfg.input_rate = doc.value("input_rate", cfg.input_rate);
    cfg.confuser_rate = doc.value("confuser_rate", cfg.confuser_rate);
    cfg.use_cache = doc.value("use_cache", cfg.use_cache);
    if (doc.contains("policies")) {
        cfg.policies.clear();
        for (const auto& p : doc.at("policies"))
            cfg.policies.push_back(policy_kind_from_string(p.get<std::string>()));
    }
    return cfg;
}

ScenarioConfig ScenarioConfig::load(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open scenario file: " + file.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("invalid scenario file " + file.string() + ": " + e.what());
    }
    return from_json(doc);
}

nlohmann::json ScenarioConfig::to_json() const {
    nlohmann::json policies_json = nlohmann::json::array();
    for (auto p : policies) policies_json.push_back(std::string(to_string(p)));
    return {{"name", name},
            {"catalog_sizes", catalog_sizes},
            {"n_fragments", n_fragments},
            {"n_domains", n_domains},
            {"target_static_tokens", target_static_tokens},
            {"steps", steps},
            {"episodes_per_size", episodes_per_size},
            {"base_seed", base_seed},
            {"hazard", {{"alpha", hazard.alpha}, {"beta", hazard.beta}, {"recall", hazard.recall}}},
            {"retrieval",
             {{"m_a", retrieval.m_a},
              {"m_b", retrieval.m_b},
              {"weights", {retrieval.weights.w1, retrieval.weights.w2, retrieval.weights.w3}},
              {"normalize_bm25", retrieval.normalize_bm25}}},
            {"selection",
             {{"budget_b", selection.budget_b},
              {"k_a", selection.k_a},
              {"k_b", selection.k_b},
              {"recall_first", selection.recall_first}}},
            {"gate",
             {{"tau", gate.tau},
              {"discovery", std::string(itr::to_string(gate.discovery))},
              {"max_fallbacks", gate.max_fallbacks}}},
            {"history_growth", history_growth},
            {"u1", u1},
            {"input_rate", input_rate},
            {"confuser_rate", confuser_rate},
            {"use_cache", use_cache},
            {"policies", policies_json}};
}

nlohmann::json EpisodeTrace::to_json() const {
    nlohmann::json steps_json = nlohmann::json::array();
    for (const auto& s : steps) {
        steps_json.push_back({{"exposed_count", s.exposed_count},
                              {"gold_exposed", s.gold_exposed},
                              {"chosen_tool", s.chosen_tool},
                              {"correct", s.correct},
                              {"fallback", s.fallback},
                              {"ctx_tokens", s.ctx_tokens},
                              {"static_tokens", s.static_tokens}});
    }
    return {{"task_id", task_id},
            {"policy", std::string(to_string(policy))},
            {"seed", seed},
            {"catalog_size", catalog_size},
            {"steps", steps_json},
            {"success", success},
            {"total_tokens", total_tokens},
            {"cost", cost},
            {"hidden_tool_miss", hidden_tool_miss}};
}

EpisodeTrace run_episode(PolicyKind policy, const SimTask& task, const Corpus& corpus,
                         const IndexBundle& bundle, const ScenarioConfig& scenario,
                         std::uint64_t seed, SelectionCache* cache, WorkCounters* counters) {
    EpisodeTrace trace;
    trace.task_id = task.id;
    trace.policy = policy;
    trace.seed = seed;
    trace.catalog_size = corpus.tools.size();

    std::mt19937_64 rng(mix(task.query_seed, mix(seed, 0xe9)));

    const auto s_total = static_cast<std::int64_t>(corpus.instruction_tokens());
    const auto t_all = static_cast<std::int64_t>(corpus.tool_tokens());
    const auto overlay = static_cast<std::int64_t>(corpus.safety_overlay.token_cost);
    const auto note = static_cast<std::int64_t>(approx_token_count(corpus.routing_note));

    std::vector<std::string> all_tool_ids;
    for (const auto& t : corpus.tools) all_tool_ids.push_back(t.id);
    std::sort(all_tool_ids.begin(), all_tool_ids.end());

    bool all_instructions_exposed =
        policy == PolicyKind::b0_monolithic || policy == PolicyKind::b1_router_only;
    std::set<std::string> exposed_instruction_ids;

    StepConfigs configs{scenario.retrieval, scenario.selection, scenario.gate};

    for (std::int64_t t = 1; t <= task.steps; ++t) {
        const std::int64_t history = scenario.u1 + scenario.history_growth * (t - 1);
        const std::string query = make_step_query(task, t, scenario.confuser_rate);
        StepRecord record;

        switch (policy) {
            case PolicyKind::b0_monolithic: {
                MockChoice choice =
                    mock_model_step(all_tool_ids, task.gold_tool, scenario.hazard, scenario.gate.tau, rng);
                record.exposed_count = all_tool_ids.size();
                record.gold_exposed = true;
                record.chosen_tool = choice.tool.value_or("");
                record.static_tokens = overlay + note + s_total + t_all;
                record.ctx_tokens = costmodel::tok_mono(history + overlay + note, s_total, t_all);
                break;
            }
            case PolicyKind::b1_router_only: {
                RetrievedSets sets = retrieve(query, bundle, scenario.retrieval);
                auto tool_cands =
                    rerank(query, std::move(sets.tools), bundle, scenario.retrieval.weights);
                std::vector<SelectionCandidate> pool;
                for (const auto& c : tool_cands) pool.push_back({c.id, c.kind, c.hybrid, c.token_cost});
                SelectionResult selection = greedy_select({}, pool, scenario.selection, {});
                MockChoice choice =
                    mock_model_step(selection.tools, task.gold_tool, scenario.hazard, scenario.gate.tau, rng);
                std::int64_t t_selected = 0;
                for (const auto& id : selection.tools)
                    t_selected += static_cast<std::int64_t>(bundle.docs.at(id).token_cost);
                record.exposed_count = selection.tools.size();
                record.gold_exposed = std::find(selection.tools.begin(), selection.tools.end(),
                                                task.gold_tool) != selection.tools.end();
                record.chosen_tool = choice.tool.value_or("");
                record.static_tokens = overlay + note + s_total + t_selected;
                record.ctx_tokens = costmodel::tok_itr(history + overlay + note, s_total, t_selected);
                break;
            }
            case PolicyKind::b2_prompt_rag: {
                RetrievedSets sets = retrieve(query, bundle, scenario.retrieval);
                auto instr_cands =
                    rerank(query, std::move(sets.instructions), bundle, scenario.retrieval.weights);
                std::vector<SelectionCandidate> pool;
                for (const auto& c : instr_cands) pool.push_back({c.id, c.kind, c.hybrid, c.token_cost});
                SelectionResult selection = greedy_select(pool, {}, scenario.selection, {});
                for (const auto& id : selection.instructions) exposed_instruction_ids.insert(id);
                MockChoice choice =
                    mock_model_step(all_tool_ids, task.gold_tool, scenario.hazard, scenario.gate.tau, rng);
                std::int64_t s_selected = 0;
                for (const auto& id : selection.instructions)
                    s_selected += static_cast<std::int64_t>(bundle.docs.at(id).token_cost);
                record.exposed_count = all_tool_ids.size();
                record.gold_exposed = true;
                record.chosen_tool = choice.tool.value_or("");
                record.static_tokens = overlay + note + s_selected + t_all;
                record.ctx_tokens = costmodel::tok_itr(history + overlay + note, s_selected, t_all);
                break;
            }
            case PolicyKind::itr: {
                StepQuery step_query;
                step_query.query_text = query;
                step_query.history_tokens = static_cast<std::size_t>(history);
                step_query.domain_hint = task.domain;
                HazardMockModel model(task.gold_tool, scenario.hazard, scenario.gate.tau, rng);
                EngineHandles handles;
                handles.corpus = &corpus;
                handles.indices = &bundle;
                handles.model = &model;
                handles.cache = cache;
                handles.counters = counters;
                StepResult step = itr_step(step_query, handles, configs, task.gold_tool,
                                           task.id + "-s" + std::to_string(t));
                for (const auto& id : step.selection.instructions) exposed_instruction_ids.insert(id);
                record.exposed_count = step.exposed_tools_final.size();
                record.gold_exposed =
                    std::find(step.selection.tools.begin(), step.selection.tools.end(),
                              task.gold_tool) != step.selection.tools.end();
                record.chosen_tool = step.tool_call.value_or("");
                record.fallback = step.fallback_taken;
                record.static_tokens = static_cast<std::int64_t>(step.first_prompt_tokens);
                record.ctx_tokens = static_cast<std::int64_t>(step.tokens_spent);
                break;
            }
        }

        record.correct = record.chosen_tool == task.gold_tool;
        trace.total_tokens += record.ctx_tokens;
        trace.steps.push_back(std::move(record));
    }

    std::size_t correct_steps = 0;
    for (const auto& s : trace.steps) correct_steps += s.correct ? 1 : 0;
    const double accuracy =
        trace.steps.empty() ? 0.0
                            : static_cast<double>(correct_steps) / static_cast<double>(trace.steps.size());

    bool instructions_ok = all_instructions_exposed;
    if (!instructions_ok) {
        instructions_ok = true;
        for (const auto& id : task.gold_instructions)
            if (!exposed_instruction_ids.count(id)) instructions_ok = false;
    }
    trace.success = instructions_ok && accuracy >= 0.8;
    bool any_hidden = false;
    for (const auto& s : trace.steps) any_hidden |= !s.gold_exposed;
    trace.hidden_tool_miss = !trace.success && any_hidden;
    trace.cost = static_cast<double>(trace.total_tokens) / 1000.0 * scenario.input_rate;
    return trace;
}

namespace {

struct Accumulator {
    std::vector<double> ctx_per_step;
    std::vector<double> accuracy;
    std::vector<double> success;
    std::vector<double> cost;
    std::vector<double> miss;
    std::vector<std::vector<double>> cumulative; // per episode, by step
};

std::pair<double, double> mean_ci(const std::vector<double>& xs) {
    if (xs.empty()) return {0.0, 0.0};
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    if (xs.size() < 2) return {mean, 0.0};
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= static_cast<double>(xs.size() - 1);
    const double half = 1.96 * std::sqrt(var / static_cast<double>(xs.size()));
    return {mean, half};
}

}  // namespace

BenchmarkResult run_benchmark_detailed(const ScenarioConfig& scenario,
                                       const std::vector<PolicyKind>& policies,
                                       const std::vector<std::uint64_t>& seeds) {
    BenchmarkResult result;
    if (policies.empty() || seeds.empty()) return result;

    for (std::size_t n : scenario.catalog_sizes) {
        SynthSpec spec;
        spec.n_fragments = scenario.n_fragments;
        spec.n_tools = n;
        spec.n_domains = scenario.n_domains;
        spec.target_static_tokens = scenario.target_static_tokens;
        spec.seed = mix(scenario.base_seed, n);
        Corpus corpus = make_synthetic_corpus(spec);
        IndexBundle bundle = build_indices(corpus);
        SelectionCache cache;
        WorkCounters counters;
        SelectionCache* cache_ptr = scenario.use_cache ? &cache : nullptr;

        std::map<PolicyKind, Accumulator> acc;
        for (std::uint64_t seed : seeds) {
            SimTask task = make_task(corpus, seed, scenario.steps, scenario.n_domains);
            for (PolicyKind policy : policies) {
                EpisodeTrace trace =
                    run_episode(policy, task, corpus, bundle, scenario, seed, cache_ptr, &counters);
                auto& a = acc[policy];
                const double steps = static_cast<double>(trace.steps.size());
                a.ctx_per_step.push_back(steps > 0 ? static_cast<double>(trace.total_tokens) / steps : 0);
                std::size_t correct = 0;
                for (const auto& s : trace.steps) correct += s.correct ? 1 : 0;
                const double accuracy = steps > 0 ? static_cast<double>(correct) / steps : 0;
                a.accuracy.push_back(accuracy);
                a.success.push_back(trace.success ? 1.0 : 0.0);
                a.cost.push_back(trace.cost);
                a.miss.push_back(trace.hidden_tool_miss ? 1.0 : 0.0);
                std::vector<double> cum;
                double running = 0.0;
                for (const auto& s : trace.steps) {
                    running += static_cast<double>(s.ctx_tokens);
                    cum.push_back(running);
                }
                a.cumulative.push_back(std::move(cum));
                result.episodes.push_back({policy, n, seed, accuracy, trace.success,
                                           trace.hidden_tool_miss, trace.total_tokens});
            }
        }

        for (PolicyKind policy : policies) {
            const auto& a = acc[policy];
            PolicyMetrics m;
            m.policy = policy;
            m.catalog_size = n;
            m.episodes = a.accuracy.size();
            std::tie(m.ctx_per_step_mean, m.ctx_per_step_ci) = mean_ci(a.ctx_per_step);
            auto [acc_mean, acc_ci] = mean_ci(a.accuracy);
            m.tools_correct_pct = acc_mean * 100.0;
            m.tools_correct_ci = acc_ci * 100.0;
            auto [s_mean, s_ci] = mean_ci(a.success);
            m.api_success_pct = s_mean * 100.0;
            m.api_success_ci = s_ci * 100.0;
            auto [c_mean, c_ci] = mean_ci(a.cost);
            (void)c_ci;
            m.cost_mean = c_mean;
            auto [miss_mean, miss_ci] = mean_ci(a.miss);
            (void)miss_ci;
            m.miss_rate_pct = miss_mean * 100.0;
            if (!a.cumulative.empty()) {
                const std::size_t steps = a.cumulative.front().size();
                m.compounding.assign(steps, 0.0);
                for (const auto& cum : a.cumulative)
                    for (std::size_t i = 0; i < steps; ++i) m.compounding[i] += cum[i];
                for (auto& v : m.compounding) v /= static_cast<double>(a.cumulative.size());
            }
            result.table.rows.push_back(std::move(m));
        }
    }
    return result;
}

MetricsTable run_benchmark(const ScenarioConfig& scenario, const std::vector<PolicyKind>& policies,
                           const std::vector<std::uint64_t>& seeds) {
    return run_benchmark_detailed(scenario, policies, seeds).table;
}

nlohmann::json MetricsTable::to_json() const {
    nlohmann::json rows_json = nlohmann::json::array();
    for (const auto& r : rows) {
        rows_json.push_back({{"policy", std::string(to_string(r.policy))},
                             {"catalog_size", r.catalog_size},
                             {"episodes", r.episodes},
                             {"ctx_per_step_mean", r.ctx_per_step_mean},
                             {"ctx_per_step_ci", r.ctx_per_step_ci},
                             {"tools_correct_pct", r.tools_correct_pct},
                             {"tools_correct_ci", r.tools_correct_ci},
                             {"api_success_pct", r.api_success_pct},
                             {"api_success_ci", r.api_success_ci},
                             {"cost_mean", r.cost_mean},
                             {"miss_rate_pct", r.miss_rate_pct},
                             {"compounding", r.compounding}});
    }
    return {{"rows", rows_json}};
}

nlohmann::json MetricsTable::to_table_json() const {
    nlohmann::json rows_json = nlohmann::json::array();
    for (const auto& r : rows) {
        std::ostringstream ctx, tc, as;
        ctx.precision(1);
        ctx << std::fixed << r.ctx_per_step_mean << " ±" << r.ctx_per_step_ci;
        tc.precision(1);
        tc << std::fixed << r.tools_correct_pct << " ±" << r.tools_correct_ci;
        as.precision(1);
        as << std::fixed << r.api_success_pct << " ±" << r.api_success_ci;
        std::ostringstream cost;
        cost.precision(4);
        cost << std::fixed << r.cost_mean;
        std::ostringstream miss;
        miss.precision(1);
        miss << std::fixed << r.miss_rate_pct;
        rows_json.push_back({std::string(to_string(r.policy)), r.catalog_size, r.episodes, ctx.str(),
                             tc.str(), as.str(), cost.str(), miss.str()});
    }
    return {{"title", "Episode metrics by policy"},
            {"columns",
             {"policy", "catalog", "episodes", "ctx/step", "tools-correct %", "api-success %",
              "cost", "miss-rate %"}},
            {"rows", rows_json}};
}

}  // namespace itr::sim
