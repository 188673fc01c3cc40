#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace itr::costmodel {

struct CostParams {
    std::int64_t s_total = 0;  // sum of all instruction token costs
    std::int64_t t_all = 0;    // sum of all tool token costs
    std::int64_t s_ka = 0;     // selected instruction tokens
    std::int64_t t_kb = 0;     // selected tool tokens
    std::int64_t h = 2000;     // per-step history growth
    std::int64_t u1 = 0;       // initial history tokens
    double input_rate = 0.0;   // currency per 1k tokens
    double output_rate = 0.0;
};

struct HazardParams {
    double alpha = 3.0; // schema/exemplar clarity, > 0
    double beta = 0.1;  // distractor interference, >= 0
    double recall = 1.0;
};

std::int64_t tok_mono(std::int64_t history, std::int64_t s_total, std::int64_t t_all);
std::int64_t tok_itr(std::int64_t history, std::int64_t s_ka, std::int64_t t_kb);

enum class Mode { mono, itr };

struct EpisodeSeries {
    std::vector<std::int64_t> per_step; // static + U_t, with U_t = u1 + h*(t-1)
    std::int64_t cumulative = 0;
};

EpisodeSeries episode_totals(std::int64_t steps, const CostParams& params, Mode mode);

double p_correct_mono(std::int64_t catalog_size, double alpha, double beta);
double p_correct_itr(std::int64_t exposed_count, double recall, double alpha, double beta);

/// Recall below which narrowing to m tools underperforms exposing all n.
double recall_crossover(std::int64_t exposed_count, std::int64_t catalog_size, double alpha,
                        double beta);

/// floor((window - static) / h), clamped at zero.
std::int64_t max_loops(std::int64_t window_tokens, std::int64_t static_tokens, std::int64_t h);

struct ConsistencyCheck {
    std::string name;
    std::string computed;
    std::string expected;
    bool pass = false;
};

/// The five internal-consistency identities, evaluated from first
/// principles with exact rational arithmetic and display rounding.
std::vector<ConsistencyCheck> consistency_report();

struct MaxLoopsRow {
    std::string corpus_label;
    std::int64_t static_tokens = 0;
    std::int64_t mono_loops = 0;
    std::int64_t itr_loops = 0;
};

std::vector<MaxLoopsRow> max_loops_table(std::int64_t window_tokens = 1'000'000,
                                         std::int64_t h = 2'000, std::int64_t itr_static = 1'500);

struct CompoundingRow {
    std::int64_t step = 0;
    std::int64_t mono_cumulative = 0;
    std::int64_t itr_cumulative = 0;
    std::int64_t savings = 0;
};

std::vector<CompoundingRow> compounding_series(std::int64_t max_steps = 15,
                                               std::int64_t mono_static = 30'000,
                                               std::int64_t itr_static = 1'500,
                                               std::int64_t h = 2'000, std::int64_t u1 = 0);

/// Alternate per-loop history increment (~2.22k) used by the per-step
/// savings-percentage series; the default model uses h = 2k.
constexpr std::int64_t kAltHistoryGrowth = 2'222;

nlohmann::json consistency_table_json();
nlohmann::json max_loops_table_json(std::int64_t window_tokens = 1'000'000, std::int64_t h = 2'000,
                                    std::int64_t itr_static = 1'500);
nlohmann::json compounding_table_json(std::int64_t max_steps = 15);

}  // namespace itr::costmodel
