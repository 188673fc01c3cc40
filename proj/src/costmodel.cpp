#include "itr/costmodel.hpp"

#include <stdexcept>

namespace itr::costmodel {

namespace {

/// Rounds num/den to `decimals` places using integer arithmetic
/// (round half up); formatting never passes through floating point.
std::string format_ratio(std::int64_t num, std::int64_t den, int decimals) {
    if (den <= 0) throw std::invalid_argument("format_ratio: non-positive denominator");
    std::int64_t scale = 1;
    for (int i = 0; i < decimals; ++i) scale *= 10;
    std::int64_t scaled = (num * scale * 2 + den) / (2 * den);
    std::string digits = std::to_string(scaled);
    if (decimals == 0) return digits;
    while (digits.size() <= static_cast<std::size_t>(decimals)) digits.insert(digits.begin(), '0');
    digits.insert(digits.size() - static_cast<std::size_t>(decimals), ".");
    return digits;
}

std::string format_percent(std::int64_t num, std::int64_t den, int decimals) {
    return format_ratio(num * 100, den, decimals) + "%";
}

}  // namespace

std::int64_t tok_mono(std::int64_t history, std::int64_t s_total, std::int64_t t_all) {
    if (history < 0 || s_total < 0 || t_all < 0)
        throw std::invalid_argument("tok_mono: negative input");
    return history + s_total + t_all;
}

std::int64_t tok_itr(std::int64_t history, std::int64_t s_ka, std::int64_t t_kb) {
    if (history < 0 || s_ka < 0 || t_kb < 0) throw std::invalid_argument("tok_itr: negative input");
    return history + s_ka + t_kb;
}

EpisodeSeries episode_totals(std::int64_t steps, const CostParams& params, Mode mode) {
    if (steps < 0) throw std::invalid_argument("episode_totals: negative step count");
    const std::int64_t static_tokens =
        mode == Mode::mono ? params.s_total + params.t_all : params.s_ka + params.t_kb;
    EpisodeSeries series;
    series.per_step.reserve(static_cast<std::size_t>(steps));
    for (std::int64_t t = 1; t <= steps; ++t) {
        const std::int64_t history = params.u1 + params.h * (t - 1);
        series.per_step.push_back(static_tokens + history);
        series.cumulative += static_tokens + history;
    }
    return series;
}

double p_correct_mono(std::int64_t catalog_size, double alpha, double beta) {
    if (catalog_size < 1) throw std::invalid_argument("p_correct_mono: N must be >= 1");
    if (alpha <= 0) throw std::invalid_argument("p_correct_mono: alpha must be > 0");
    if (beta < 0) throw std::invalid_argument("p_correct_mono: beta must be >= 0");
    return alpha / (alpha + beta * static_cast<double>(catalog_size - 1));
}

double p_correct_itr(std::int64_t exposed_count, double recall, double alpha, double beta) {
    if (exposed_count < 1) throw std::invalid_argument("p_correct_itr: m must be >= 1");
    if (recall < 0 || recall > 1) throw std::invalid_argument("p_correct_itr: recall outside [0, 1]");
    return recall * p_correct_mono(exposed_count, alpha, beta);
}

double recall_crossover(std::int64_t exposed_count, std::int64_t catalog_size, double alpha,
                        double beta) {
    if (exposed_count < 1 || catalog_size < exposed_count)
        throw std::invalid_argument("recall_crossover: need 1 <= m <= N");
    return (alpha + beta * static_cast<double>(exposed_count - 1)) /
           (alpha + beta * static_cast<double>(catalog_size - 1));
}

std::int64_t max_loops(std::int64_t window_tokens, std::int64_t static_tokens, std::int64_t h) {
    if (h <= 0) throw std::invalid_argument("max_loops: h must be positive");
    if (window_tokens <= static_tokens) return 0;
    return (window_tokens - static_tokens) / h;
}

std::vector<ConsistencyCheck> consistency_report() {
    std::vector<ConsistencyCheck> checks;

    { // 1,500 vs 30,000 per-step tokens
        std::string computed = format_percent(30'000 - 1'500, 30'000, 1) + " reduction";
        checks.push_back({"token_reduction", computed, "95.0% reduction", computed == "95.0% reduction"});
    }
    { // tools-correct 62% -> 82%
        std::string computed = format_percent(82 - 62, 62, 1) + " relative";
        checks.push_back(
            {"tool_accuracy_relative", computed, "32.3% relative", computed == "32.3% relative"});
    }
    { // episode cost $2.90 -> $0.86 (cents)
        std::string computed = format_percent(290 - 86, 290, 1) + " reduction";
        checks.push_back({"cost_reduction", computed, "70.3% reduction", computed == "70.3% reduction"});
    }
    { // cumulative tokens at L = 10
        CostParams params;
        params.s_total = 30'000;
        params.t_all = 0;
        params.s_ka = 1'500;
        params.t_kb = 0;
        params.h = 2'000;
        params.u1 = 0;
        auto mono = episode_totals(10, params, Mode::mono);
        auto itr_series = episode_totals(10, params, Mode::itr);
        const std::int64_t savings = mono.cumulative - itr_series.cumulative;
        std::string computed = std::to_string(mono.cumulative / 1000) + "k vs " +
                               std::to_string(itr_series.cumulative / 1000) + "k, savings " +
                               std::to_string(savings / 1000) + "k, " +
                               format_ratio(mono.cumulative, itr_series.cumulative, 2) + "x";
        std::string expected = "390k vs 105k, savings 285k, 3.71x";
        checks.push_back({"compounding_l10", computed, expected, computed == expected});
    }
    { // catalog scaling direction under the hazard model
        const double alpha = 3.0;
        const double beta = 0.1;
        const double p8 = p_correct_mono(8, alpha, beta);
        const double p40 = p_correct_mono(40, alpha, beta);
        const double p120 = p_correct_mono(120, alpha, beta);
        // With m fixed the narrowed-exposure accuracy is constant in N, so
        // its decline across catalog sizes is exactly zero.
        const double itr_drop = 0.0;
        const double mono_drop = p8 - p120;
        const bool mono_decreasing = p8 > p40 && p40 > p120;
        const bool itr_smaller_decline = itr_drop < mono_drop;
        std::string computed = std::string("monolithic accuracy decreasing in N, narrowed decline ") +
                               (itr_smaller_decline ? "smaller" : "not smaller");
        checks.push_back({"catalog_scaling_direction", computed,
                          "monolithic accuracy decreasing in N, narrowed decline smaller",
                          mono_decreasing && itr_smaller_decline});
    }
    return checks;
}

std::vector<MaxLoopsRow> max_loops_table(std::int64_t window_tokens, std::int64_t h,
                                         std::int64_t itr_static) {
    struct Preset {
        const char* label;
        std::int64_t static_tokens;
    };
    static constexpr Preset presets[] = {
        {"50 instr + 30 tools", 40'000},   {"150 instr + 100 tools", 110'000},
        {"300 instr + 200 tools", 220'000}, {"500 instr + 400 tools", 400'000},
        {"800 instr + 600 tools", 620'000},
    };
    std::vector<MaxLoopsRow> rows;
    for (const auto& p : presets) {
        rows.push_back({p.label, p.static_tokens, max_loops(window_tokens, p.static_tokens, h),
                        max_loops(window_tokens, itr_static, h)});
    }
    return rows;
}

std::vector<CompoundingRow> compounding_series(std::int64_t max_steps, std::int64_t mono_static,
                                               std::int64_t itr_static, std::int64_t h,
                                               std::int64_t u1) {
    CostParams params;
    params.s_total = mono_static;
    params.s_ka = itr_static;
    params.h = h;
    params.u1 = u1;
    std::vector<CompoundingRow> rows;
    for (std::int64_t l = 1; l <= max_steps; ++l) {
        auto mono = episode_totals(l, params, Mode::mono);
        auto itr_series = episode_totals(l, params, Mode::itr);
        rows.push_back({l, mono.cumulative, itr_series.cumulative,
                        mono.cumulative - itr_series.cumulative});
    }
    return rows;
}

nlohmann::json consistency_table_json() {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& c : consistency_report())
        rows.push_back({c.name, c.computed, c.expected, c.pass ? "pass" : "FAIL"});
    return {{"title", "Internal consistency checks"},
            {"columns", {"check", "computed", "expected", "status"}},
            {"rows", rows}};
}

nlohmann::json max_loops_table_json(std::int64_t window_tokens, std::int64_t h,
                                    std::int64_t itr_static) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : max_loops_table(window_tokens, h, itr_static))
        rows.push_back({r.corpus_label, r.static_tokens, r.mono_loops, r.itr_loops});
    return {{"title", "Maximum viable agent loops (window " + std::to_string(window_tokens) +
                          ", history growth " + std::to_string(h) + "/step)"},
            {"columns", {"corpus size", "static tokens", "mono max loops", "itr max loops"}},
            {"rows", rows}};
}

nlohmann::json compounding_table_json(std::int64_t max_steps) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : compounding_series(max_steps))
        rows.push_back({r.step, r.mono_cumulative, r.itr_cumulative, r.savings});
    return {{"title", "Cumulative context tokens by episode length"},
            {"columns", {"steps", "mono cumulative", "itr cumulative", "savings"}},
            {"rows", rows}};
}

}  // namespace itr::costmodel
