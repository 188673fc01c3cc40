#include "itr/assembler.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace itr {

std::string_view to_string(SectionKind kind) {
    switch (kind) {
        case SectionKind::safety_overlay: return "safety_overlay";
        case SectionKind::instruction: return "instruction";
        case SectionKind::tool_schema: return "tool_schema";
        case SectionKind::routing_note: return "routing_note";
    }
    return "unknown";
}

std::string AssembledPrompt::render_text() const {
    std::ostringstream out;
    bool first = true;
    for (const auto& section : sections) {
        if (!first) out << "\n\n";
        out << section.text;
        first = false;
    }
    return out.str();
}

nlohmann::json AssembledPrompt::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& s : sections) {
        arr.push_back({{"kind", std::string(to_string(s.kind))},
                       {"source_id", s.source_id},
                       {"text", s.text},
                       {"token_cost", s.token_cost}});
    }
    return {{"sections", arr}, {"total_tokens", total_tokens}};
}

AssembledPrompt assemble_prompt(const SafetyOverlay& overlay, const SelectionResult& selection,
                                const Corpus& corpus, std::string_view routing_note_text,
                                std::string_view catalog_summary_text) {
    AssembledPrompt prompt;
    prompt.sections.push_back(
        {SectionKind::safety_overlay, "safety_overlay", overlay.text, overlay.token_cost});

    std::vector<const InstructionFragment*> fragments;
    fragments.reserve(selection.instructions.size());
    for (const auto& id : selection.instructions) {
        const auto* f = corpus.find_fragment(id);
        if (f == nullptr) throw std::out_of_range("assemble_prompt: dangling fragment id " + id);
        fragments.push_back(f);
    }
    std::sort(fragments.begin(), fragments.end(),
              [](const InstructionFragment* a, const InstructionFragment* b) {
                  if (a->priority != b->priority) return a->priority < b->priority;
                  return a->id < b->id;
              });
    for (const auto* f : fragments)
        prompt.sections.push_back({SectionKind::instruction, f->id, f->text, f->token_cost});

    for (const auto& id : selection.tools) { // selection order
        const auto* t = corpus.find_tool(id);
        if (t == nullptr) throw std::out_of_range("assemble_prompt: dangling tool id " + id);
        prompt.sections.push_back({SectionKind::tool_schema, t->id, render_tool_schema(*t), t->token_cost});
    }

    if (!catalog_summary_text.empty()) {
        std::string text(catalog_summary_text);
        std::size_t cost = default_token_counter()(text);
        prompt.sections.push_back({SectionKind::tool_schema, "catalog-summary", std::move(text), cost});
    }

    std::string note(routing_note_text);
    std::size_t note_cost = default_token_counter()(note);
    prompt.sections.push_back({SectionKind::routing_note, "routing_note", std::move(note), note_cost});

    prompt.total_tokens = 0;
    for (const auto& s : prompt.sections) prompt.total_tokens += s.token_cost;
    return prompt;
}

std::size_t prompt_token_cost(const AssembledPrompt& prompt, std::size_t history_tokens) {
    return prompt.total_tokens + history_tokens;
}

}  // namespace itr
