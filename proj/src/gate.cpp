#include "itr/gate.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "itr/hash.hpp"

namespace itr {

std::string_view to_string(DiscoveryPolicy policy) {
    return policy == DiscoveryPolicy::expand_kb ? "expand_kb" : "catalog_summary";
}

DiscoveryPolicy discovery_policy_from_string(std::string_view name) {
    if (name == "expand_kb") return DiscoveryPolicy::expand_kb;
    if (name == "catalog_summary") return DiscoveryPolicy::catalog_summary;
    throw std::invalid_argument("unknown discovery policy: " + std::string(name));
}

bool sufficiency_gate(double confidence, double tau) {
    return !(confidence < tau); // fallback only on strict <
}

std::string StepConfigs::config_hash() const {
    std::ostringstream repr;
    repr.precision(17);
    repr << retrieval.m_a << '|' << retrieval.m_b << '|' << retrieval.weights.w1 << '|'
         << retrieval.weights.w2 << '|' << retrieval.weights.w3 << '|' << retrieval.normalize_bm25
         << '|' << selection.budget_b << '|' << selection.k_a << '|' << selection.k_b << '|'
         << selection.recall_first << '|' << gate.tau << '|' << to_string(gate.discovery) << '|'
         << gate.max_fallbacks;
    return hex64(fnv1a64(repr.str()));
}

FileTelemetrySink::FileTelemetrySink(const std::filesystem::path& path) : out_(path, std::ios::app) {
    if (!out_) throw std::runtime_error("cannot open telemetry sink: " + path.string());
}

void FileTelemetrySink::append(const nlohmann::json& record) {
    std::lock_guard lock(mutex_);
    out_ << record.dump() << "\n";
    out_.flush();
}

void MemoryTelemetrySink::append(const nlohmann::json& record) {
    std::lock_guard lock(mutex_);
    records_.push_back(record);
}

std::vector<nlohmann::json> MemoryTelemetrySink::records() const {
    std::lock_guard lock(mutex_);
    return records_;
}

std::string make_catalog_summary(const Corpus& corpus) {
    std::vector<const ToolSpec*> tools;
    tools.reserve(corpus.tools.size());
    for (const auto& t : corpus.tools) tools.push_back(&t);
    std::sort(tools.begin(), tools.end(),
              [](const ToolSpec* a, const ToolSpec* b) { return a->id < b->id; });
    std::ostringstream out;
    out << "Tool catalog summary:\n";
    for (const auto* t : tools) {
        std::string_view desc = t->description;
        auto stop = desc.find_first_of(".!?");
        if (stop != std::string_view::npos) desc = desc.substr(0, stop + 1);
        out << "- " << t->name << ": " << desc << "\n";
    }
    return out.str();
}

std::vector<std::string> resolve_pinned_ids(const Corpus& corpus,
                                            const std::optional<std::string>& domain_hint) {
    std::vector<std::string> ids;
    auto eligible = [&](bool pinned, const std::string& domain) {
        if (!pinned) return false;
        if (domain.empty()) return true;
        return domain_hint.has_value() && domain == *domain_hint;
    };
    for (const auto& f : corpus.fragments)
        if (eligible(f.pinned, f.domain)) ids.push_back(f.id);
    for (const auto& t : corpus.tools)
        if (eligible(t.pinned, t.domain)) ids.push_back(t.id);
    std::sort(ids.begin(), ids.end());
    return ids;
}

namespace {

std::vector<SelectionCandidate> to_selection_candidates(const std::vector<ScoredCandidate>& scored) {
    std::vector<SelectionCandidate> out;
    out.reserve(scored.size());
    for (const auto& c : scored) out.push_back({c.id, c.kind, c.hybrid, c.token_cost});
    return out;
}

/// Pinned ids missing from the retrieved pools are injected from the corpus
/// with delta 0: they are forced in regardless of score.
void inject_pinned(std::vector<SelectionCandidate>& instr, std::vector<SelectionCandidate>& tools,
                   const std::vector<std::string>& pinned_ids, const IndexBundle& bundle) {
    for (const auto& id : pinned_ids) {
        auto in_pool = [&](const std::vector<SelectionCandidate>& pool) {
            return std::any_of(pool.begin(), pool.end(),
                               [&](const SelectionCandidate& c) { return c.id == id; });
        };
        if (in_pool(instr) || in_pool(tools)) continue;
        auto doc = bundle.docs.find(id);
        if (doc == bundle.docs.end())
            throw std::invalid_argument("pinned id not present in corpus: " + id);
        SelectionCandidate c{doc->second.id, doc->second.kind, 0.0, doc->second.token_cost};
        (c.kind == DocKind::instruction ? instr : tools).push_back(c);
    }
}

}  // namespace

ExpandOutcome expand_or_discover(const SelectionResult& prior,
                                 const std::vector<ScoredCandidate>& instr_candidates,
                                 const std::vector<ScoredCandidate>& tool_candidates,
                                 const SelectionConfig& selection_config, const GateConfig& gate_config,
                                 const Corpus& corpus, const std::vector<std::string>& pinned_ids) {
    if (gate_config.discovery == DiscoveryPolicy::catalog_summary) {
        return {prior, make_catalog_summary(corpus)};
    }

    SelectionConfig expanded = selection_config;
    expanded.k_b = selection_config.k_b * 2;

    // Raise the budget by the cost of the next-ranked tools the doubled cap
    // admits, so prior instructions are not squeezed out by the new tools.
    std::set<std::string> prior_tools(prior.tools.begin(), prior.tools.end());
    std::size_t extra_slots =
        expanded.k_b > prior.tools.size() ? expanded.k_b - prior.tools.size() : 0;
    std::size_t raise = 0;
    for (const auto& c : tool_candidates) { // rank order
        if (extra_slots == 0) break;
        if (prior_tools.count(c.id)) continue;
        raise += c.token_cost;
        --extra_slots;
    }
    // The prior selection must stay affordable: repeated fallbacks re-pin a
    // selection that may already sit above the base budget.
    expanded.budget_b = std::max(selection_config.budget_b, prior.spent_tokens) + raise;

    // Prior tools pinned: the retry exposure must be a superset.
    std::vector<std::string> pinned(pinned_ids);
    pinned.insert(pinned.end(), prior.tools.begin(), prior.tools.end());

    auto instr_pool = to_selection_candidates(instr_candidates);
    auto tool_pool = to_selection_candidates(tool_candidates);
    SelectionResult next = greedy_select(instr_pool, tool_pool, expanded, pinned);
    return {std::move(next), ""};
}

nlohmann::json StepResult::to_json() const {
    // cache_hit is deliberately omitted: replayed steps must serialize
    // identically whether they were computed or served from cache. Hits are
    // recorded in telemetry and the cache stats instead.
    return {{"output", reply.output},
            {"tool_call", tool_call ? nlohmann::json(*tool_call) : nlohmann::json()},
            {"confidence", reply.confidence},
            {"first_confidence", first_confidence},
            {"selection", selection.to_json()},
            {"prompts_issued", prompts_issued},
            {"fallback_taken", fallback_taken},
            {"tokens_spent", tokens_spent},
            {"hidden_tool_miss", hidden_tool_miss},
            {"exposed_tools_first", exposed_tools_first},
            {"exposed_tools_final", exposed_tools_final}};
}

StepResult itr_step(const StepQuery& query, const EngineHandles& handles, const StepConfigs& configs,
                    const std::optional<std::string>& gold_tool_id, const std::string& step_id) {
    if (handles.corpus == nullptr || handles.indices == nullptr || handles.model == nullptr)
        throw std::invalid_argument("itr_step: corpus, indices and model handles are required");
    const Corpus& corpus = *handles.corpus;
    const IndexBundle& indices = *handles.indices;
    if (indices.corpus_version != corpus.version)
        throw StepError("index bundle is stale: rebuild for corpus version " + corpus.version);

    const std::vector<std::string> pinned =
        resolve_pinned_ids(corpus, query.domain_hint);

    auto compute_entry = [&]() -> SelectionEntry {
        if (handles.counters) handles.counters->scoring_runs.fetch_add(1);
        RetrievedSets sets = retrieve(query.query_text, indices, configs.retrieval);
        SelectionEntry entry;
        entry.instr_candidates =
            rerank(query.query_text, std::move(sets.instructions), indices, configs.retrieval.weights);
        entry.tool_candidates =
            rerank(query.query_text, std::move(sets.tools), indices, configs.retrieval.weights);
        auto instr_pool = to_selection_candidates(entry.instr_candidates);
        auto tool_pool = to_selection_candidates(entry.tool_candidates);
        inject_pinned(instr_pool, tool_pool, pinned, indices);
        entry.selection = greedy_select(instr_pool, tool_pool, configs.selection, pinned);
        return entry;
    };

    StepResult result;
    nlohmann::json errors = nlohmann::json::array();
    SelectionEntry entry;
    if (handles.cache) {
        CacheKey key = make_cache_key(query.query_text, query.domain_hint.value_or(""),
                                      corpus.version, configs.config_hash());
        auto [cached, hit] = handles.cache->get_or_compute(key, compute_entry);
        entry = std::move(cached);
        result.cache_hit = hit;
    } else {
        entry = compute_entry();
    }

    auto emit_telemetry = [&](const StepResult& r) {
        if (!handles.telemetry) return;
        handles.telemetry->append({{"step_id", step_id},
                                   {"query", query.query_text},
                                   {"selected_instructions", r.selection.instructions},
                                   {"selected_tools", r.selection.tools},
                                   {"sufficiency", r.first_confidence},
                                   {"fallback", r.fallback_taken},
                                   {"errors", errors},
                                   {"tokens_spent", r.tokens_spent},
                                   {"prompts_issued", r.prompts_issued},
                                   {"hidden_tool_miss", r.hidden_tool_miss},
                                   {"cache_hit", r.cache_hit}});
    };

    result.selection = entry.selection;
    result.exposed_tools_first = entry.selection.tools;
    result.exposed_tools_final = entry.selection.tools;

    try {
        AssembledPrompt prompt =
            assemble_prompt(corpus.safety_overlay, entry.selection, corpus, corpus.routing_note);
        result.first_prompt_tokens = prompt.total_tokens;
        result.tokens_spent = prompt_token_cost(prompt, query.history_tokens);
        ModelReply reply = handles.model->call(prompt, entry.selection.tools);
        result.first_confidence = reply.confidence;

        SelectionConfig current_config = configs.selection;
        int fallbacks = 0;
        while (!sufficiency_gate(reply.confidence, configs.gate.tau) &&
               fallbacks < configs.gate.max_fallbacks) {
            ++fallbacks;
            ExpandOutcome out =
                expand_or_discover(result.selection, entry.instr_candidates, entry.tool_candidates,
                                   current_config, configs.gate, corpus, pinned);
            if (configs.gate.discovery == DiscoveryPolicy::expand_kb)
                current_config.k_b *= 2; // repeated fallbacks keep doubling

            AssembledPrompt retry_prompt =
                assemble_prompt(corpus.safety_overlay, out.selection, corpus, corpus.routing_note,
                                out.catalog_summary);
            std::vector<std::string> exposed = out.selection.tools;
            if (!out.catalog_summary.empty()) {
                // Summaries make the whole catalog eligible for the call.
                std::set<std::string> seen(exposed.begin(), exposed.end());
                for (const auto& t : corpus.tools)
                    if (seen.insert(t.id).second) exposed.push_back(t.id);
            }
            result.tokens_spent += prompt_token_cost(retry_prompt, query.history_tokens);
            reply = handles.model->call(retry_prompt, exposed);
            result.selection = out.selection;
            result.exposed_tools_final = exposed;
            result.fallback_taken = true;
        }

        result.reply = reply;
        result.tool_call = reply.tool_call;
        result.prompts_issued = 1 + fallbacks;
        if (gold_tool_id) {
            // Miss = the gold tool's full schema never reached a prompt.
            auto schema_exposed = [&](const std::vector<std::string>& ids) {
                return std::find(ids.begin(), ids.end(), *gold_tool_id) != ids.end();
            };
            result.hidden_tool_miss =
                !schema_exposed(result.exposed_tools_first) && !schema_exposed(result.selection.tools);
        }
        emit_telemetry(result);
        return result;
    } catch (const std::exception& e) {
        errors.push_back(e.what());
        emit_telemetry(result);
        throw StepError(std::string("model step failed: ") + e.what());
    }
}

}  // namespace itr
