#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "itr/corpus.hpp"
#include "itr/selector.hpp"

namespace itr {

enum class SectionKind { safety_overlay, instruction, tool_schema, routing_note };

std::string_view to_string(SectionKind kind);

struct PromptSection {
    SectionKind kind;
    std::string source_id;
    std::string text;
    std::size_t token_cost = 0;
};

/// Section order is fixed: overlay, instructions (priority then id), tool
/// schemas (selection order), routing note. total_tokens is the sum of
/// section token costs.
struct AssembledPrompt {
    std::vector<PromptSection> sections;
    std::size_t total_tokens = 0;

    std::string render_text() const; // the model payload
    nlohmann::json to_json() const;  // structural form for telemetry/tests
};

/// `catalog_summary_text`, when non-empty, renders as an extra tool_schema
/// section after the full schemas (discovery fallback support). Dangling
/// selection ids throw.
AssembledPrompt assemble_prompt(const SafetyOverlay& overlay, const SelectionResult& selection,
                                const Corpus& corpus, std::string_view routing_note_text,
                                std::string_view catalog_summary_text = {});

/// total_tokens + history tokens (the per-step context footprint).
std::size_t prompt_token_cost(const AssembledPrompt& prompt, std::size_t history_tokens);

}  // namespace itr
