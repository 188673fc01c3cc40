#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "itr/tokens.hpp"

namespace itr {

enum class PolicyType { role, style, safety, exemplar, policy, other };

std::string_view to_string(PolicyType type);
PolicyType policy_type_from_string(std::string_view name);

/// Retrievable document kind. Instruction fragments and tool specs share one
/// id space so mixed candidate lists stay unambiguous.
enum class DocKind { instruction, tool };

std::string_view to_string(DocKind kind);

/// A chunk of the system prompt treated as a retrievable document.
struct InstructionFragment {
    std::string id;
    std::string text;
    std::string domain;
    PolicyType policy_type = PolicyType::other;
    int priority = 100;       // lower renders earlier in assembly
    std::int64_t recency = 0; // unix seconds
    bool pinned = false;
    std::size_t token_cost = 0;
};

/// A tool/function schema document. token_cost covers the rendered schema
/// plus up to two exemplars, matching what assembly would emit.
struct ToolSpec {
    std::string id;
    std::string name;
    std::string description;
    std::string argument_schema;
    std::vector<std::string> preconditions;
    std::vector<std::string> postconditions;
    std::vector<std::string> failure_modes;
    std::vector<std::string> exemplars;
    std::size_t token_cost = 0;
    bool pinned = false;
    std::string domain;
};

struct SafetyOverlay {
    std::string text;
    std::size_t token_cost = 0;
};

struct ChangeLogEntry {
    std::int64_t timestamp = 0;
    std::string id;
    std::string action;
};

/// Immutable after load; any mutation path produces a new value with a new
/// version. The change log is excluded from the version hash so no-op
/// save/load round-trips keep the version stable.
struct Corpus {
    std::vector<InstructionFragment> fragments;
    std::vector<ToolSpec> tools;
    SafetyOverlay safety_overlay;
    std::string routing_note;
    std::string version;
    std::vector<ChangeLogEntry> change_log;

    const InstructionFragment* find_fragment(std::string_view id) const;
    const ToolSpec* find_tool(std::string_view id) const;
    std::size_t instruction_tokens() const; // sum of fragment token costs
    std::size_t tool_tokens() const;        // sum of tool token costs
};

/// Plain-text schema rendering used both for prompt assembly and for the
/// tool's token_cost. At most two exemplars are rendered.
std::string render_tool_schema(const ToolSpec& tool);

std::string default_routing_note();

/// Recomputes every token_cost with `counter` and refreshes the version hash.
void finalize_corpus(Corpus& corpus, const TokenCounter& counter = default_token_counter());

std::string compute_corpus_version(const Corpus& corpus);

struct ChunkParams {
    std::size_t min_tokens = 200;
    std::size_t max_tokens = 600;
};

/// Greedy paragraph packing: accumulate consecutive paragraphs until adding
/// the next would exceed max_tokens, then emit. Oversized paragraphs are
/// hard-split at sentence boundaries into max_tokens-bounded pieces. The
/// document tail may fall below min_tokens.
std::vector<InstructionFragment> chunk_document(std::string_view doc_id, std::string_view doc,
                                                const ChunkParams& params = {},
                                                const TokenCounter& counter = default_token_counter());

enum class IssueKind { duplicate_id, duplicate_text, token_range, missing_overlay };

std::string_view to_string(IssueKind kind);

struct ValidationIssue {
    IssueKind kind;
    std::string id;
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    bool empty() const { return issues.empty(); }
    nlohmann::json to_json() const;
};

/// Report-only; never mutates.
ValidationReport validate_corpus(const Corpus& corpus);

/// JSON Lines persistence: one record per fragment/tool/overlay with a
/// "kind" field; field names match the struct fields.
void save_corpus_jsonl(const Corpus& corpus, const std::filesystem::path& file);
Corpus load_corpus_jsonl(const std::filesystem::path& file,
                         const TokenCounter& counter = default_token_counter());

/// Loads every *.jsonl record file in `dir`, then chunks any *.txt raw
/// system-prompt file into instruction fragments (doc id = file stem).
Corpus load_corpus_dir(const std::filesystem::path& dir,
                       const TokenCounter& counter = default_token_counter());

}  // namespace itr
