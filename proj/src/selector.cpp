#include "itr/selector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

namespace itr {

nlohmann::json SelectionResult::to_json() const {
    nlohmann::json skipped_json = nlohmann::json::array();
    for (const auto& s : skipped) skipped_json.push_back({{"id", s.id}, {"reason", s.reason}});
    return {{"instructions", instructions},
            {"tools", tools},
            {"spent_tokens", spent_tokens},
            {"objective", objective},
            {"skipped", skipped_json}};
}

namespace {

double per_token_ratio(const SelectionCandidate& c) {
    if (c.token_cost == 0) return std::numeric_limits<double>::infinity();
    return c.delta / static_cast<double>(c.token_cost);
}

struct Pools {
    std::map<std::string, SelectionCandidate> by_id;
};

Pools merge_pools(const std::vector<SelectionCandidate>& instr,
                  const std::vector<SelectionCandidate>& tools) {
    Pools pools;
    for (const auto& c : instr) pools.by_id.emplace(c.id, c);
    for (const auto& c : tools) pools.by_id.emplace(c.id, c);
    return pools;
}

}  // namespace

SelectionResult greedy_select(const std::vector<SelectionCandidate>& instr_candidates,
                              const std::vector<SelectionCandidate>& tool_candidates,
                              const SelectionConfig& config,
                              const std::vector<std::string>& pinned_ids) {
    auto pools = merge_pools(instr_candidates, tool_candidates);

    SelectionResult result;
    std::set<std::string> taken;
    std::size_t instr_count = 0;
    std::size_t tool_count = 0;

    auto cap_of = [&](DocKind kind) { return kind == DocKind::instruction ? config.k_a : config.k_b; };
    auto count_of = [&](DocKind kind) -> std::size_t& {
        return kind == DocKind::instruction ? instr_count : tool_count;
    };
    auto take = [&](const SelectionCandidate& c) {
        (c.kind == DocKind::instruction ? result.instructions : result.tools).push_back(c.id);
        result.spent_tokens += c.token_cost;
        result.objective += c.delta;
        ++count_of(c.kind);
        taken.insert(c.id);
    };

    // Pinned items first, regardless of score. Caps stay hard; only a
    // budget overflow from the pinned set alone is an error.
    std::vector<std::string> pinned_sorted(pinned_ids.begin(), pinned_ids.end());
    std::sort(pinned_sorted.begin(), pinned_sorted.end());
    pinned_sorted.erase(std::unique(pinned_sorted.begin(), pinned_sorted.end()), pinned_sorted.end());
    std::size_t pinned_tokens = 0;
    for (const auto& id : pinned_sorted) {
        auto it = pools.by_id.find(id);
        if (it == pools.by_id.end())
            throw std::invalid_argument("pinned id not present in candidate pools: " + id);
        const auto& c = it->second;
        if (count_of(c.kind) >= cap_of(c.kind)) {
            result.skipped.push_back({c.id, "pinned_cap"});
            continue;
        }
        pinned_tokens += c.token_cost;
        if (pinned_tokens > config.budget_b)
            throw PinnedOverflowError("pinned items exceed budget_B at id " + id + " (" +
                                      std::to_string(pinned_tokens) + " > " +
                                      std::to_string(config.budget_b) + " tokens)");
        take(c);
    }

    std::vector<SelectionCandidate> rest;
    rest.reserve(pools.by_id.size());
    for (const auto& [id, c] : pools.by_id)
        if (!taken.count(id)) rest.push_back(c);
    std::sort(rest.begin(), rest.end(), [](const SelectionCandidate& a, const SelectionCandidate& b) {
        double ra = per_token_ratio(a);
        double rb = per_token_ratio(b);
        if (ra != rb) return ra > rb;
        if (a.delta != b.delta) return a.delta > b.delta;
        return a.id < b.id;
    });

    // Skip-and-continue: a non-fitting item does not end the scan.
    for (const auto& c : rest) {
        if (count_of(c.kind) >= cap_of(c.kind)) {
            result.skipped.push_back({c.id, "cap"});
            continue;
        }
        if (result.spent_tokens + c.token_cost > config.budget_b) {
            result.skipped.push_back({c.id, "budget"});
            continue;
        }
        take(c);
    }
    return result;
}

SelectionResult knapsack_oracle(const std::vector<SelectionCandidate>& candidates,
                                const SelectionConfig& config,
                                const std::vector<std::string>& pinned_ids) {
    if (candidates.size() > 22)
        throw std::invalid_argument("knapsack_oracle: candidate count above enumeration bound (22)");

    std::vector<SelectionCandidate> sorted(candidates);
    std::sort(sorted.begin(), sorted.end(),
              [](const SelectionCandidate& a, const SelectionCandidate& b) { return a.id < b.id; });

    std::set<std::string> pinned(pinned_ids.begin(), pinned_ids.end());
    for (const auto& id : pinned) {
        bool found = std::any_of(sorted.begin(), sorted.end(),
                                 [&](const SelectionCandidate& c) { return c.id == id; });
        if (!found) throw std::invalid_argument("pinned id not present in candidates: " + id);
    }

    const std::size_t n = sorted.size();
    bool have_best = false;
    double best_objective = -1.0;
    std::vector<std::size_t> best_pick;

    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
        std::size_t spent = 0;
        std::size_t instr_count = 0;
        std::size_t tool_count = 0;
        double objective = 0.0;
        bool feasible = true;
        bool pins_ok = true;
        std::vector<std::size_t> pick;
        for (std::size_t i = 0; i < n && feasible; ++i) {
            const bool in = (mask >> i) & 1;
            const auto& c = sorted[i];
            if (!in) {
                if (pinned.count(c.id)) pins_ok = false;
                continue;
            }
            spent += c.token_cost;
            objective += c.delta;
            if (c.kind == DocKind::instruction)
                ++instr_count;
            else
                ++tool_count;
            if (spent > config.budget_b || instr_count > config.k_a || tool_count > config.k_b)
                feasible = false;
            pick.push_back(i);
        }
        if (!feasible || !pins_ok) continue;
        if (!have_best || objective > best_objective) {
            have_best = true;
            best_objective = objective;
            best_pick = pick;
            continue;
        }
        if (objective == best_objective) {
            // Deterministic tie-break: lexicographically smallest sorted id set.
            auto ids_of = [&](const std::vector<std::size_t>& pick_set) {
                std::vector<std::string> ids;
                for (auto i : pick_set) ids.push_back(sorted[i].id);
                return ids; // already ascending: sorted[] is id-ordered
            };
            if (ids_of(pick) < ids_of(best_pick)) best_pick = pick;
        }
    }

    if (!have_best) {
        // Pinned items that cannot fit make every subset infeasible.
        throw PinnedOverflowError("pinned items exceed budget_B or caps in oracle instance");
    }

    SelectionResult result;
    for (auto i : best_pick) {
        const auto& c = sorted[i];
        (c.kind == DocKind::instruction ? result.instructions : result.tools).push_back(c.id);
        result.spent_tokens += c.token_cost;
        result.objective += c.delta;
    }
    return result;
}

}  // namespace itr
