#include "itr/service.hpp"

#include <httplib.h>

#include <algorithm>
#include <chrono>
#include <sstream>
#include <thread>

#include "itr/gate.hpp"
#include "itr/selector.hpp"

namespace itr {

namespace {

void write_error(httplib::Response& res, int status, const std::string& code,
                 const std::string& message) {
    res.status = status;
    res.set_content(nlohmann::json{{"code", code}, {"message", message}}.dump(),
                    "application/json");
}

/// Maps handler exceptions onto machine-readable error bodies.
template <typename Fn>
void guarded(const httplib::Request& req, httplib::Response& res, Fn&& fn) {
    try {
        fn();
    } catch (const nlohmann::json::exception& e) {
        write_error(res, 400, "bad_request", e.what());
    } catch (const PinnedOverflowError& e) {
        write_error(res, 422, "pinned_overflow", e.what());
    } catch (const std::out_of_range& e) {
        write_error(res, 422, "dangling_id", e.what());
    } catch (const std::invalid_argument& e) {
        const std::string what = e.what();
        if (what.find("empty query") != std::string::npos)
            write_error(res, 400, "empty_query", what);
        else
            write_error(res, 400, "bad_request", what);
    } catch (const StepError& e) {
        write_error(res, 502, "model_error", e.what());
    } catch (const std::exception& e) {
        write_error(res, 500, "internal", e.what());
    }
    (void)req;
}

std::vector<SelectionCandidate> parse_candidates(const nlohmann::json& arr, DocKind default_kind) {
    std::vector<SelectionCandidate> out;
    for (const auto& c : arr) {
        SelectionCandidate cand;
        cand.id = c.at("id").get<std::string>();
        cand.kind = c.value("kind", "") == "tool"
                        ? DocKind::tool
                        : (c.value("kind", "") == "instruction" ? DocKind::instruction : default_kind);
        cand.delta = c.value("delta", 0.0);
        cand.token_cost = c.value("token_cost", std::size_t{0});
        out.push_back(std::move(cand));
    }
    return out;
}

}  // namespace

struct Service::Impl {
    httplib::Server server;
};

Service::Service(Engine& engine) : engine_(engine), impl_(std::make_unique<Impl>()) {
    auto& svr = impl_->server;

    svr.Post("/v1/retrieve", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(req, res, [&] {
            nlohmann::json body = nlohmann::json::parse(req.body);
            const std::string query = body.at("query").get<std::string>();
            const std::size_t m_a = body.value("m_a", engine_.config().retrieval.m_a);
            const std::size_t m_b = body.value("m_b", engine_.config().retrieval.m_b);
            const bool do_rerank = body.value("rerank", true);
            RetrievedSets sets = engine_.retrieve(query, m_a, m_b, do_rerank);
            nlohmann::json instructions = nlohmann::json::array();
            for (const auto& c : sets.instructions) instructions.push_back(to_json(c));
            nlohmann::json tools = nlohmann::json::array();
            for (const auto& c : sets.tools) tools.push_back(to_json(c));
            res.set_content(
                nlohmann::json{{"instructions", instructions}, {"tools", tools}}.dump(),
                "application/json");
        });
    });

    svr.Post("/v1/select", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(req, res, [&] {
            nlohmann::json body = nlohmann::json::parse(req.body);
            auto instr = parse_candidates(body.value("instructions", nlohmann::json::array()),
                                          DocKind::instruction);
            auto tools = parse_candidates(body.value("tools", nlohmann::json::array()), DocKind::tool);
            SelectionConfig cfg = engine_.config().selection;
            cfg.budget_b = body.value("budget_b", cfg.budget_b);
            cfg.k_a = body.value("k_a", cfg.k_a);
            cfg.k_b = body.value("k_b", cfg.k_b);
            auto pinned = body.value("pinned_ids", std::vector<std::string>{});
            SelectionResult selection = engine_.select(instr, tools, cfg, pinned);
            res.set_content(selection.to_json().dump(), "application/json");
        });
    });

    svr.Post("/v1/assemble", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(req, res, [&] {
            nlohmann::json body = nlohmann::json::parse(req.body);
            SelectionResult selection;
            if (body.contains("selection")) {
                selection.instructions =
                    body.at("selection").value("instructions", std::vector<std::string>{});
                selection.tools = body.at("selection").value("tools", std::vector<std::string>{});
            }
            const std::string summary = body.value("catalog_summary", "");
            AssembledPrompt prompt = engine_.assemble(selection, summary);
            res.set_content(nlohmann::json{{"text", prompt.render_text()},
                                           {"structure", prompt.to_json()}}
                                .dump(),
                            "application/json");
        });
    });

    svr.Post("/v1/step", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(req, res, [&] {
            nlohmann::json body = nlohmann::json::parse(req.body);
            StepQuery query;
            query.query_text = body.at("query_text").get<std::string>();
            query.history = body.value("history", std::vector<std::string>{});
            query.history_tokens = body.value("history_tokens", std::size_t{0});
            if (body.contains("domain_hint") && !body.at("domain_hint").is_null())
                query.domain_hint = body.at("domain_hint").get<std::string>();
            std::optional<std::string> gold;
            if (body.contains("gold_tool_id") && !body.at("gold_tool_id").is_null())
                gold = body.at("gold_tool_id").get<std::string>();
            StepResult result = engine_.step(query, gold);
            res.set_content(result.to_json().dump(), "application/json");
        });
    });

    svr.Get("/v1/health", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(req, res, [&] { res.set_content(engine_.health().dump(), "application/json"); });
    });
}

Service::~Service() { stop(); }

int Service::listen(const std::string& host, int port) {
    auto& svr = impl_->server;
    if (port == 0) {
        port_ = svr.bind_to_any_port(host);
        if (port_ < 0) return 1;
        return svr.listen_after_bind() ? 0 : 1;
    }
    port_ = port;
    if (!svr.bind_to_port(host, port)) return 1;
    return svr.listen_after_bind() ? 0 : 1;
}

void Service::stop() {
    if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

bool Service::wait_until_ready(int timeout_ms) const {
    const int slice_ms = 10;
    for (int waited = 0; waited < timeout_ms; waited += slice_ms) {
        if (impl_->server.is_running()) return true;
        std::this_thread::sleep_for(std::chrono::milliseconds(slice_ms));
    }
    return impl_->server.is_running();
}

std::string report_render(const nlohmann::json& table, std::string_view format) {
    if (format == "json") return table.dump(2);
    if (format != "text") throw ConfigError("unknown report format: " + std::string(format));

    std::vector<std::string> columns;
    for (const auto& c : table.value("columns", nlohmann::json::array()))
        columns.push_back(c.get<std::string>());
    const auto rows = table.value("rows", nlohmann::json::array());

    auto cell_text = [](const nlohmann::json& v) -> std::string {
        if (v.is_string()) return v.get<std::string>();
        return v.dump();
    };

    std::vector<std::size_t> widths(columns.size(), 0);
    for (std::size_t i = 0; i < columns.size(); ++i) widths[i] = columns[i].size();
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size() && i < widths.size(); ++i)
            widths[i] = std::max(widths[i], cell_text(row[i]).size());
    }

    std::ostringstream out;
    if (table.contains("title")) out << table.at("title").get<std::string>() << "\n";
    auto emit_row = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i > 0) out << "  ";
            out << cells[i];
            if (i + 1 < cells.size())
                out << std::string(widths[i] > cells[i].size() ? widths[i] - cells[i].size() : 0, ' ');
        }
        out << "\n";
    };
    emit_row(columns);
    std::size_t rule = 0;
    for (std::size_t w : widths) rule += w + 2;
    out << std::string(rule > 2 ? rule - 2 : rule, '-') << "\n";
    for (const auto& row : rows) {
        std::vector<std::string> cells;
        for (const auto& v : row) cells.push_back(cell_text(v));
        emit_row(cells);
    }
    return out.str();
}

}  // namespace itr
