#include "itr/engine.hpp"

#include <httplib.h>

#include <algorithm>

namespace itr {

ModelReply FixedMockModel::call(const AssembledPrompt& prompt,
                                const std::vector<std::string>& exposed_tool_ids) {
    (void)prompt;
    ModelReply reply;
    if (exposed_tool_ids.empty()) {
        reply.output = "no tools exposed";
        reply.confidence = 0.0;
        return reply;
    }
    reply.tool_call = exposed_tool_ids.front();
    reply.output = "call " + exposed_tool_ids.front();
    reply.confidence = confidence_;
    return reply;
}

CallbackModelClient::CallbackModelClient(std::string url) {
    // Split scheme://host[:port] from the path.
    auto scheme_end = url.find("://");
    std::size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    auto path_start = url.find('/', host_start);
    if (path_start == std::string::npos) {
        host_ = url;
        path_ = "/";
    } else {
        host_ = url.substr(0, path_start);
        path_ = url.substr(path_start);
    }
}

ModelReply CallbackModelClient::call(const AssembledPrompt& prompt,
                                     const std::vector<std::string>& exposed_tool_ids) {
    httplib::Client client(host_);
    client.set_read_timeout(30, 0);
    nlohmann::json body = {{"prompt_text", prompt.render_text()},
                           {"prompt", prompt.to_json()},
                           {"exposed_tools", exposed_tool_ids}};
    auto res = client.Post(path_, body.dump(), "application/json");
    if (!res || res->status != 200)
        throw std::runtime_error("model callback failed: " +
                                 (res ? "status " + std::to_string(res->status) : "no response"));
    nlohmann::json doc = nlohmann::json::parse(res->body);
    ModelReply reply;
    reply.output = doc.value("output", "");
    if (doc.contains("tool_call") && !doc.at("tool_call").is_null())
        reply.tool_call = doc.at("tool_call").get<std::string>();
    reply.confidence = doc.value("confidence", 0.0);
    return reply;
}

Engine::Engine(EngineConfig config) : config_(std::move(config)) {
    if (config_.corpus_paths.empty()) throw ConfigError("no corpus paths configured");
    if (config_.selection.budget_b == 0) throw ConfigError("budget-b must be positive");
    try {
        config_.retrieval.weights.validate();
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    if (config_.gate.tau < 0 || config_.gate.tau > 1) throw ConfigError("tau must be in [0, 1]");

    for (const auto& path : config_.corpus_paths) {
        if (!std::filesystem::exists(path))
            throw ConfigError("corpus path does not exist: " + path.string());
        Corpus part;
        try {
            part = std::filesystem::is_directory(path) ? load_corpus_dir(path)
                                                       : load_corpus_jsonl(path);
        } catch (const std::exception& e) {
            throw DataError(std::string("corpus load failed: ") + e.what());
        }
        for (auto& f : part.fragments) corpus_.fragments.push_back(std::move(f));
        for (auto& t : part.tools) corpus_.tools.push_back(std::move(t));
        if (!part.safety_overlay.text.empty()) corpus_.safety_overlay = part.safety_overlay;
        if (!part.routing_note.empty() && part.routing_note != default_routing_note())
            corpus_.routing_note = part.routing_note;
        for (auto& entry : part.change_log) corpus_.change_log.push_back(std::move(entry));
    }
    finalize_corpus(corpus_);

    ValidationReport report = validate_corpus(corpus_);
    for (const auto& issue : report.issues) {
        if (issue.kind == IssueKind::duplicate_id)
            throw DataError("corpus invalid: duplicate id " + issue.id);
    }

    indices_ = build_indices(corpus_);
    cache_ = std::make_unique<SelectionCache>(config_.cache_capacity);
    if (config_.telemetry_path.empty())
        telemetry_ = std::make_unique<MemoryTelemetrySink>();
    else
        telemetry_ = std::make_unique<FileTelemetrySink>(config_.telemetry_path);

    if (config_.model_kind == "mock") {
        model_ = std::make_unique<FixedMockModel>(config_.mock_confidence);
    } else if (config_.model_kind == "callback") {
        if (config_.model_callback_url.empty())
            throw ConfigError("model-kind callback requires a callback url");
        model_ = std::make_unique<CallbackModelClient>(config_.model_callback_url);
    } else {
        throw ConfigError("unknown model kind: " + config_.model_kind);
    }
}

StepConfigs Engine::step_configs() const {
    return {config_.retrieval, config_.selection, config_.gate};
}

RetrievedSets Engine::retrieve(std::string_view query, std::size_t m_a, std::size_t m_b,
                               bool apply_rerank) const {
    RetrievalConfig cfg = config_.retrieval;
    cfg.m_a = m_a;
    cfg.m_b = m_b;
    RetrievedSets sets = itr::retrieve(query, indices_, cfg);
    if (apply_rerank) {
        sets.instructions = rerank(query, std::move(sets.instructions), indices_, cfg.weights);
        sets.tools = rerank(query, std::move(sets.tools), indices_, cfg.weights);
    }
    return sets;
}

SelectionResult Engine::select(const std::vector<SelectionCandidate>& instr,
                               const std::vector<SelectionCandidate>& tools,
                               const SelectionConfig& config,
                               const std::vector<std::string>& pinned_ids) const {
    return greedy_select(instr, tools, config, pinned_ids);
}

AssembledPrompt Engine::assemble(const SelectionResult& selection,
                                 std::string_view catalog_summary) const {
    return assemble_prompt(corpus_.safety_overlay, selection, corpus_, corpus_.routing_note,
                           catalog_summary);
}

StepResult Engine::step(const StepQuery& query, const std::optional<std::string>& gold_tool_id) {
    std::string step_id;
    {
        std::lock_guard lock(step_mutex_);
        step_id = "step-" + std::to_string(++step_counter_);
    }
    EngineHandles handles;
    handles.corpus = &corpus_;
    handles.indices = &indices_;
    handles.model = model_.get();
    handles.cache = cache_.get();
    handles.telemetry = telemetry_.get();
    handles.counters = &counters_;
    return itr_step(query, handles, step_configs(), gold_tool_id, step_id);
}

nlohmann::json Engine::health() const {
    CacheStats cache = cache_->stats();
    return {{"version", {{"engine", "itr/1.0"}, {"corpus", corpus_.version}}},
            {"cache",
             {{"hits", cache.hits},
              {"misses", cache.misses},
              {"evictions", cache.evictions},
              {"size", cache.size},
              {"capacity", cache.capacity}}},
            {"scoring_runs", counters_.scoring_runs.load()},
            {"indices", indices_.summary()}};
}

}  // namespace itr
