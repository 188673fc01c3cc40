#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "itr/costmodel.hpp"
#include "itr/engine.hpp"
#include "itr/service.hpp"
#include "itr/simharness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

itr::EngineConfig g_config;
std::string g_discovery = "expand_kb";
std::vector<std::string> g_corpus_dirs;
double g_w1 = 0.5;
double g_w2 = 0.3;
double g_w3 = 0.2;

itr::Engine make_engine() {
    for (const auto& dir : g_corpus_dirs) g_config.corpus_paths.emplace_back(dir);
    g_config.retrieval.weights = {g_w1, g_w2, g_w3};
    g_config.gate.discovery = itr::discovery_policy_from_string(g_discovery);
    return itr::Engine(g_config);
}

std::vector<itr::SelectionCandidate> to_candidates(const std::vector<itr::ScoredCandidate>& scored) {
    std::vector<itr::SelectionCandidate> out;
    for (const auto& c : scored) out.push_back({c.id, c.kind, c.hybrid, c.token_cost});
    return out;
}

void print_or_write(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        if (text.empty() || text.back() != '\n') std::cout << "\n";
        return;
    }
    std::ofstream out(out_path);
    out << text;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"itr: instruction/tool retrieval engine"};
    app.require_subcommand(1);
    app.fallthrough(); // engine options may follow the subcommand

    app.add_option("--corpus-dir", g_corpus_dirs, "corpus directory or .jsonl file (repeatable)")
        ->envname("ITR_CORPUS_DIR");
    app.add_option("--budget-b", g_config.selection.budget_b, "step token budget")
        ->envname("ITR_BUDGET_B");
    app.add_option("--k-a", g_config.selection.k_a, "max instruction count")->envname("ITR_K_A");
    app.add_option("--k-b", g_config.selection.k_b, "max tool count")->envname("ITR_K_B");
    app.add_option("--m-a", g_config.retrieval.m_a, "instruction retrieval pool")->envname("ITR_M_A");
    app.add_option("--m-b", g_config.retrieval.m_b, "tool retrieval pool")->envname("ITR_M_B");
    app.add_option("--w1", g_w1, "cosine weight")->envname("ITR_W1");
    app.add_option("--w2", g_w2, "bm25 weight")->envname("ITR_W2");
    app.add_option("--w3", g_w3, "re-ranker weight")->envname("ITR_W3");
    app.add_option("--tau", g_config.gate.tau, "sufficiency threshold")->envname("ITR_TAU");
    app.add_option("--discovery", g_discovery, "expand_kb | catalog_summary")
        ->envname("ITR_DISCOVERY");
    app.add_option("--max-fallbacks", g_config.gate.max_fallbacks, "fallback retries per step")
        ->envname("ITR_MAX_FALLBACKS");
    app.add_option("--cache-capacity", g_config.cache_capacity, "selection cache entries")
        ->envname("ITR_CACHE_CAPACITY");
    std::string telemetry_path;
    app.add_option("--telemetry", telemetry_path, "telemetry JSONL sink path")
        ->envname("ITR_TELEMETRY");
    app.add_option("--model-kind", g_config.model_kind, "mock | callback")->envname("ITR_MODEL_KIND");
    app.add_option("--model-callback-url", g_config.model_callback_url, "external model endpoint")
        ->envname("ITR_MODEL_CALLBACK_URL");
    app.add_option("--mock-confidence", g_config.mock_confidence, "mock model confidence")
        ->envname("ITR_MOCK_CONFIDENCE");

    std::string format = "text";

    // ingest
    auto* ingest = app.add_subcommand("ingest", "chunk a system prompt and validate the corpus");
    std::string ingest_prompt;
    std::string ingest_doc_id = "system-prompt";
    std::string ingest_out;
    ingest->add_option("--system-prompt", ingest_prompt, "raw system prompt text file");
    ingest->add_option("--doc-id", ingest_doc_id, "document id for chunked fragments");
    ingest->add_option("--out", ingest_out, "write the merged corpus JSONL here");

    // index
    auto* index_cmd = app.add_subcommand("index", "build indices and print summaries");

    // retrieve
    auto* retrieve_cmd = app.add_subcommand("retrieve", "score candidates for a query");
    std::string query;
    bool no_rerank = false;
    retrieve_cmd->add_option("--query", query, "step query")->required();
    retrieve_cmd->add_flag("--no-rerank", no_rerank, "skip the re-ranker");

    // select
    auto* select_cmd = app.add_subcommand("select", "retrieve, rerank and select under the budget");
    select_cmd->add_option("--query", query, "step query")->required();

    // assemble
    auto* assemble_cmd = app.add_subcommand("assemble", "build the step prompt for a query");
    assemble_cmd->add_option("--query", query, "step query")->required();
    assemble_cmd->add_option("--format", format, "text | json");

    // step
    auto* step_cmd = app.add_subcommand("step", "run one gated step with the configured model");
    std::string domain_hint;
    std::size_t history_tokens = 0;
    step_cmd->add_option("--query", query, "step query")->required();
    step_cmd->add_option("--domain-hint", domain_hint, "domain label for pinning");
    step_cmd->add_option("--history-tokens", history_tokens, "history token total");

    // simulate
    auto* simulate_cmd = app.add_subcommand("simulate", "run a seeded episode benchmark");
    std::string scenario_path;
    std::string sim_out;
    simulate_cmd->add_option("--scenario", scenario_path, "scenario JSON file")->required();
    simulate_cmd->add_option("--format", format, "text | json");
    simulate_cmd->add_option("--out", sim_out, "write the report here instead of stdout");

    // cost-report
    auto* cost_cmd = app.add_subcommand("cost-report", "analytical max-loops and compounding tables");
    cost_cmd->add_option("--format", format, "text | json");
    std::int64_t window = 1'000'000;
    std::int64_t growth = 2'000;
    bool alt_growth = false;
    cost_cmd->add_option("--window", window, "context window tokens");
    cost_cmd->add_option("--history-growth", growth, "history growth per step");
    cost_cmd->add_flag("--alt-growth", alt_growth, "use the ~2.22k/step history preset");

    // consistency-check
    auto* consistency_cmd = app.add_subcommand("consistency-check", "arithmetic identity suite");
    consistency_cmd->add_option("--format", format, "text | json");

    // serve
    auto* serve_cmd = app.add_subcommand("serve", "run the sidecar HTTP service");
    serve_cmd->add_option("--port", g_config.port, "listen port")->envname("ITR_PORT");
    std::string host = "0.0.0.0";
    serve_cmd->add_option("--host", host, "bind address");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    g_config.telemetry_path = telemetry_path;

    try {
        if (*ingest) {
            itr::Corpus corpus;
            if (!g_corpus_dirs.empty()) {
                itr::Engine engine = make_engine();
                corpus = engine.corpus();
            }
            if (!ingest_prompt.empty()) {
                std::ifstream in(ingest_prompt);
                if (!in) throw itr::ConfigError("cannot open system prompt: " + ingest_prompt);
                std::stringstream buffer;
                buffer << in.rdbuf();
                for (auto& f : itr::chunk_document(ingest_doc_id, buffer.str()))
                    corpus.fragments.push_back(std::move(f));
                itr::finalize_corpus(corpus);
            }
            itr::ValidationReport report = itr::validate_corpus(corpus);
            std::cout << report.to_json().dump(2) << "\n";
            if (!ingest_out.empty()) itr::save_corpus_jsonl(corpus, ingest_out);
            std::cout << "fragments: " << corpus.fragments.size() << ", tools: " << corpus.tools.size()
                      << ", version: " << corpus.version << "\n";
            return kExitOk;
        }
        if (*index_cmd) {
            itr::Engine engine = make_engine();
            std::cout << engine.indices().summary().dump(2) << "\n";
            return kExitOk;
        }
        if (*retrieve_cmd) {
            itr::Engine engine = make_engine();
            auto sets = engine.retrieve(query, engine.config().retrieval.m_a,
                                        engine.config().retrieval.m_b, !no_rerank);
            nlohmann::json instructions = nlohmann::json::array();
            for (const auto& c : sets.instructions) instructions.push_back(itr::to_json(c));
            nlohmann::json tools = nlohmann::json::array();
            for (const auto& c : sets.tools) tools.push_back(itr::to_json(c));
            std::cout << nlohmann::json{{"instructions", instructions}, {"tools", tools}}.dump(2)
                      << "\n";
            return kExitOk;
        }
        if (*select_cmd || *assemble_cmd) {
            itr::Engine engine = make_engine();
            auto sets = engine.retrieve(query, engine.config().retrieval.m_a,
                                        engine.config().retrieval.m_b, true);
            auto pinned = itr::resolve_pinned_ids(engine.corpus(), std::nullopt);
            auto selection = engine.select(to_candidates(sets.instructions), to_candidates(sets.tools),
                                           engine.config().selection, pinned);
            if (*select_cmd) {
                std::cout << selection.to_json().dump(2) << "\n";
                return kExitOk;
            }
            auto prompt = engine.assemble(selection);
            if (format == "json")
                std::cout << prompt.to_json().dump(2) << "\n";
            else
                std::cout << prompt.render_text() << "\n";
            return kExitOk;
        }
        if (*step_cmd) {
            itr::Engine engine = make_engine();
            itr::StepQuery step_query;
            step_query.query_text = query;
            step_query.history_tokens = history_tokens;
            if (!domain_hint.empty()) step_query.domain_hint = domain_hint;
            auto result = engine.step(step_query);
            std::cout << result.to_json().dump(2) << "\n";
            return kExitOk;
        }
        if (*simulate_cmd) {
            itr::sim::ScenarioConfig scenario;
            try {
                scenario = itr::sim::ScenarioConfig::load(scenario_path);
            } catch (const std::exception& e) {
                std::cerr << "error: " << e.what() << "\n";
                return kExitData;
            }
            std::vector<std::uint64_t> seeds;
            for (std::size_t i = 0; i < scenario.episodes_per_size; ++i)
                seeds.push_back(scenario.base_seed + i);
            auto table = itr::sim::run_benchmark(scenario, scenario.policies, seeds);
            std::string rendered = format == "json" ? table.to_json().dump(2)
                                                    : itr::report_render(table.to_table_json(), "text");
            print_or_write(rendered, sim_out);
            return kExitOk;
        }
        if (*cost_cmd) {
            const std::int64_t h = alt_growth ? itr::costmodel::kAltHistoryGrowth : growth;
            std::string out = itr::report_render(itr::costmodel::max_loops_table_json(window, h), format);
            out += format == "json" ? "\n" : "\n";
            out += itr::report_render(itr::costmodel::compounding_table_json(), format);
            std::cout << out << "\n";
            return kExitOk;
        }
        if (*consistency_cmd) {
            auto checks = itr::costmodel::consistency_report();
            std::cout << itr::report_render(itr::costmodel::consistency_table_json(), format) << "\n";
            bool all_pass = true;
            for (const auto& c : checks) all_pass &= c.pass;
            return all_pass ? kExitOk : kExitData;
        }
        if (*serve_cmd) {
            itr::Engine engine = make_engine();
            itr::Service service(engine);
            std::cout << "listening on " << host << ":" << g_config.port << "\n";
            return service.listen(host, g_config.port);
        }
    } catch (const itr::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const itr::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitOk;
}
