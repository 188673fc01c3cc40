#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "itr/corpus.hpp"

namespace itr {

struct SelectionConfig {
    std::size_t budget_b = 1500; // covers selected fragments + tool schemas only
    std::size_t k_a = 4;
    std::size_t k_b = 2;
    bool recall_first = true;
};

struct SelectionCandidate {
    std::string id;
    DocKind kind = DocKind::instruction;
    double delta = 0.0; // marginal-gain estimate; defaults to re-ranked hybrid
    std::size_t token_cost = 0;
};

struct SkippedItem {
    std::string id;
    std::string reason;
};

struct SelectionResult {
    std::vector<std::string> instructions; // inclusion order
    std::vector<std::string> tools;        // inclusion order
    std::size_t spent_tokens = 0;
    double objective = 0.0; // sum of delta over selected, pinned included
    std::vector<SkippedItem> skipped;

    nlohmann::json to_json() const;
};

/// Pinned items alone do not fit the budget.
class PinnedOverflowError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Score-per-token greedy: pinned items first (regardless of score), then
/// the merged pools sorted by delta/token_cost descending (ties: higher
/// delta, then ascending id), skipping items that do not fit and
/// continuing. Never exceeds budget_b.
SelectionResult greedy_select(const std::vector<SelectionCandidate>& instr_candidates,
                              const std::vector<SelectionCandidate>& tool_candidates,
                              const SelectionConfig& config,
                              const std::vector<std::string>& pinned_ids = {});

/// Exhaustive-enumeration optimum over both kinds; test oracle only.
/// Candidate counts above 22 throw. Ties resolve to the lexicographically
/// smallest sorted id set.
SelectionResult knapsack_oracle(const std::vector<SelectionCandidate>& candidates,
                                const SelectionConfig& config,
                                const std::vector<std::string>& pinned_ids = {});

}  // namespace itr
