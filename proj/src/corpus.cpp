#include "itr/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "itr/hash.hpp"

namespace itr {

namespace {

constexpr std::string_view kParagraphSeparator = "\n\n";
constexpr char kFieldSeparator = '\x1e';

std::string lower_collapse(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (unsigned char c : text) {
        if (std::isspace(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

/// Splits on runs of blank lines; paragraph text is preserved verbatim.
std::vector<std::string> split_paragraphs(std::string_view doc) {
    std::vector<std::string> paragraphs;
    std::size_t pos = 0;
    while (pos < doc.size()) {
        std::size_t brk = std::string_view::npos;
        std::size_t brk_end = 0;
        for (std::size_t i = pos; i + 1 < doc.size(); ++i) {
            if (doc[i] != '\n') continue;
            std::size_t j = i + 1;
            bool blank = false;
            while (j < doc.size() && (doc[j] == ' ' || doc[j] == '\t' || doc[j] == '\r')) ++j;
            if (j < doc.size() && doc[j] == '\n') {
                blank = true;
                while (j < doc.size() && (doc[j] == '\n' || doc[j] == ' ' || doc[j] == '\t' || doc[j] == '\r'))
                    ++j;
            }
            if (blank) {
                brk = i;
                brk_end = j;
                break;
            }
        }
        if (brk == std::string_view::npos) {
            paragraphs.emplace_back(doc.substr(pos));
            break;
        }
        paragraphs.emplace_back(doc.substr(pos, brk - pos));
        pos = brk_end;
    }
    std::erase_if(paragraphs, [](const std::string& p) {
        return p.find_first_not_of(" \t\r\n") == std::string::npos;
    });
    return paragraphs;
}

/// Boundaries fall after [.!?] followed by whitespace; trailing whitespace
/// stays with the preceding sentence so concatenation is lossless.
std::vector<std::string> split_sentences(std::string_view paragraph) {
    std::vector<std::string> sentences;
    std::size_t start = 0;
    for (std::size_t i = 0; i < paragraph.size(); ++i) {
        char c = paragraph[i];
        if (c != '.' && c != '!' && c != '?') continue;
        std::size_t j = i + 1;
        while (j < paragraph.size() && std::isspace(static_cast<unsigned char>(paragraph[j]))) ++j;
        if (j == i + 1 && j < paragraph.size()) continue; // mid-token punctuation
        sentences.emplace_back(paragraph.substr(start, j - start));
        start = j;
        i = j - 1;
    }
    if (start < paragraph.size()) sentences.emplace_back(paragraph.substr(start));
    return sentences;
}

std::string fragment_id(std::string_view doc_id, std::size_t ordinal, std::string_view text) {
    std::uint64_t h = fnv1a64(doc_id);
    std::string ord = std::to_string(ordinal);
    h = fnv1a64(std::string_view(&kFieldSeparator, 1), h);
    h = fnv1a64(ord, h);
    h = fnv1a64(std::string_view(&kFieldSeparator, 1), h);
    h = fnv1a64(text, h);
    return hex64(h);
}

void hash_field(std::uint64_t& state, std::string_view value) {
    state = fnv1a64(value, state);
    state = fnv1a64(std::string_view(&kFieldSeparator, 1), state);
}

void hash_list(std::uint64_t& state, const std::vector<std::string>& values) {
    hash_field(state, std::to_string(values.size()));
    for (const auto& v : values) hash_field(state, v);
}

}  // namespace

std::string_view to_string(PolicyType type) {
    switch (type) {
        case PolicyType::role: return "role";
        case PolicyType::style: return "style";
        case PolicyType::safety: return "safety";
        case PolicyType::exemplar: return "exemplar";
        case PolicyType::policy: return "policy";
        case PolicyType::other: return "other";
    }
    return "other";
}

PolicyType policy_type_from_string(std::string_view name) {
    if (name == "role") return PolicyType::role;
    if (name == "style") return PolicyType::style;
    if (name == "safety") return PolicyType::safety;
    if (name == "exemplar") return PolicyType::exemplar;
    if (name == "policy") return PolicyType::policy;
    if (name == "other") return PolicyType::other;
    throw std::invalid_argument("unknown policy_type: " + std::string(name));
}

std::string_view to_string(DocKind kind) {
    return kind == DocKind::instruction ? "instruction" : "tool";
}

const InstructionFragment* Corpus::find_fragment(std::string_view id) const {
    for (const auto& f : fragments)
        if (f.id == id) return &f;
    return nullptr;
}

const ToolSpec* Corpus::find_tool(std::string_view id) const {
    for (const auto& t : tools)
        if (t.id == id) return &t;
    return nullptr;
}

std::size_t Corpus::instruction_tokens() const {
    std::size_t total = 0;
    for (const auto& f : fragments) total += f.token_cost;
    return total;
}

std::size_t Corpus::tool_tokens() const {
    std::size_t total = 0;
    for (const auto& t : tools) total += t.token_cost;
    return total;
}

std::string render_tool_schema(const ToolSpec& tool) {
    std::ostringstream out;
    out << "Tool: " << tool.name << " (id: " << tool.id << ")\n";
    if (!tool.description.empty()) out << "Description: " << tool.description << "\n";
    if (!tool.argument_schema.empty()) out << "Arguments: " << tool.argument_schema << "\n";
    auto bullet_block = [&out](std::string_view title, const std::vector<std::string>& items) {
        if (items.empty()) return;
        out << title << ":\n";
        for (const auto& item : items) out << "- " << item << "\n";
    };
    bullet_block("Preconditions", tool.preconditions);
    bullet_block("Postconditions", tool.postconditions);
    bullet_block("Failure modes", tool.failure_modes);
    std::size_t shown = std::min<std::size_t>(tool.exemplars.size(), 2);
    for (std::size_t i = 0; i < shown; ++i) {
        out << "Example:\n" << tool.exemplars[i] << "\n";
    }
    return out.str();
}

std::string default_routing_note() {
    return "Routing note: only call tools listed above; do not invoke hidden or unlisted tools. "
           "If the exposed tools are insufficient for this step, reply requesting \"tool discovery\" "
           "instead of guessing.";
}

std::string compute_corpus_version(const Corpus& corpus) {
    std::uint64_t state = kFnvOffset;
    hash_field(state, "fragments");
    for (const auto& f : corpus.fragments) {
        hash_field(state, f.id);
        hash_field(state, f.text);
        hash_field(state, f.domain);
        hash_field(state, to_string(f.policy_type));
        hash_field(state, std::to_string(f.priority));
        hash_field(state, std::to_string(f.recency));
        hash_field(state, f.pinned ? "1" : "0");
    }
    hash_field(state, "tools");
    for (const auto& t : corpus.tools) {
        hash_field(state, t.id);
        hash_field(state, t.name);
        hash_field(state, t.description);
        hash_field(state, t.argument_schema);
        hash_list(state, t.preconditions);
        hash_list(state, t.postconditions);
        hash_list(state, t.failure_modes);
        hash_list(state, t.exemplars);
        hash_field(state, t.pinned ? "1" : "0");
        hash_field(state, t.domain);
    }
    hash_field(state, "overlay");
    hash_field(state, corpus.safety_overlay.text);
    hash_field(state, "routing_note");
    hash_field(state, corpus.routing_note);
    return hex64(state);
}

void finalize_corpus(Corpus& corpus, const TokenCounter& counter) {
    for (auto& f : corpus.fragments) f.token_cost = counter(f.text);
    for (auto& t : corpus.tools) t.token_cost = counter(render_tool_schema(t));
    corpus.safety_overlay.token_cost = counter(corpus.safety_overlay.text);
    if (corpus.routing_note.empty()) corpus.routing_note = default_routing_note();
    corpus.version = compute_corpus_version(corpus);
}

std::vector<InstructionFragment> chunk_document(std::string_view doc_id, std::string_view doc,
                                                const ChunkParams& params,
                                                const TokenCounter& counter) {
    if (params.min_tokens > params.max_tokens)
        throw std::invalid_argument("chunk_document: min_tokens > max_tokens");

    std::vector<InstructionFragment> fragments;
    std::string accumulated;

    auto emit = [&](std::string text) {
        InstructionFragment f;
        f.text = std::move(text);
        f.id = fragment_id(doc_id, fragments.size(), f.text);
        f.policy_type = PolicyType::other;
        f.priority = static_cast<int>(fragments.size());
        f.token_cost = counter(f.text);
        fragments.push_back(std::move(f));
    };
    auto flush = [&] {
        if (!accumulated.empty()) {
            emit(std::move(accumulated));
            accumulated.clear();
        }
    };

    for (auto& paragraph : split_paragraphs(doc)) {
        if (counter(paragraph) > params.max_tokens) {
            flush();
            // Pack sentences up to max_tokens; sentences that alone exceed
            // the cap fall back to a flat character split.
            std::string piece;
            auto emit_piece = [&] {
                if (!piece.empty()) {
                    emit(std::move(piece));
                    piece.clear();
                }
            };
            for (auto& sentence : split_sentences(paragraph)) {
                if (counter(sentence) > params.max_tokens) {
                    emit_piece();
                    std::size_t stride = params.max_tokens * 4;
                    for (std::size_t off = 0; off < sentence.size(); off += stride) {
                        std::string slice = sentence.substr(off, stride);
                        if (off + stride < sentence.size())
                            emit(std::move(slice));
                        else
                            piece = std::move(slice);
                    }
                    continue;
                }
                std::string joined = piece.empty() ? sentence : piece + sentence;
                if (counter(joined) > params.max_tokens) {
                    emit_piece();
                    piece = std::move(sentence);
                } else {
                    piece = std::move(joined);
                }
            }
            accumulated = std::move(piece); // tail piece may merge with what follows
            continue;
        }
        std::string joined = accumulated.empty()
                                 ? paragraph
                                 : accumulated + std::string(kParagraphSeparator) + paragraph;
        if (!accumulated.empty() && counter(joined) > params.max_tokens) {
            flush();
            accumulated = std::move(paragraph);
        } else {
            accumulated = std::move(joined);
        }
    }
    flush();
    return fragments;
}

std::string_view to_string(IssueKind kind) {
    switch (kind) {
        case IssueKind::duplicate_id: return "duplicate_id";
        case IssueKind::duplicate_text: return "duplicate_text";
        case IssueKind::token_range: return "token_range";
        case IssueKind::missing_overlay: return "missing_overlay";
    }
    return "unknown";
}

nlohmann::json ValidationReport::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& issue : issues) {
        arr.push_back({{"kind", std::string(to_string(issue.kind))},
                       {"id", issue.id},
                       {"detail", issue.detail}});
    }
    return {{"issues", arr}, {"count", issues.size()}};
}

ValidationReport validate_corpus(const Corpus& corpus) {
    ValidationReport report;
    std::map<std::string, std::size_t> id_counts;
    for (const auto& f : corpus.fragments) ++id_counts[f.id];
    for (const auto& t : corpus.tools) ++id_counts[t.id];
    for (const auto& [id, count] : id_counts) {
        if (count > 1)
            report.issues.push_back({IssueKind::duplicate_id, id,
                                     "id appears " + std::to_string(count) + " times"});
    }

    auto report_dup_texts = [&report](const std::map<std::string, std::vector<std::string>>& by_text) {
        for (const auto& [text, ids] : by_text) {
            if (ids.size() < 2) continue;
            std::string joined;
            for (const auto& id : ids) {
                if (!joined.empty()) joined += ", ";
                joined += id;
            }
            report.issues.push_back({IssueKind::duplicate_text, ids.front(),
                                     "normalized text shared by: " + joined});
        }
    };
    std::map<std::string, std::vector<std::string>> fragment_texts;
    for (const auto& f : corpus.fragments) fragment_texts[lower_collapse(f.text)].push_back(f.id);
    report_dup_texts(fragment_texts);
    std::map<std::string, std::vector<std::string>> tool_texts;
    for (const auto& t : corpus.tools) tool_texts[lower_collapse(render_tool_schema(t))].push_back(t.id);
    report_dup_texts(tool_texts);

    for (const auto& f : corpus.fragments) {
        if (f.token_cost > 600)
            report.issues.push_back({IssueKind::token_range, f.id,
                                     "fragment token_cost " + std::to_string(f.token_cost) +
                                         " above 600"});
    }
    for (const auto& t : corpus.tools) {
        if (t.token_cost < 150 || t.token_cost > 800)
            report.issues.push_back({IssueKind::token_range, t.id,
                                     "tool token_cost " + std::to_string(t.token_cost) +
                                         " outside [150, 800]"});
    }
    if (corpus.safety_overlay.text.empty())
        report.issues.push_back({IssueKind::missing_overlay, "safety_overlay", "overlay text is empty"});
    return report;
}

namespace {

nlohmann::json fragment_to_json(const InstructionFragment& f) {
    return {{"kind", "fragment"},     {"id", f.id},
            {"text", f.text},         {"domain", f.domain},
            {"policy_type", std::string(to_string(f.policy_type))},
            {"priority", f.priority}, {"recency", f.recency},
            {"pinned", f.pinned},     {"token_cost", f.token_cost}};
}

nlohmann::json tool_to_json(const ToolSpec& t) {
    return {{"kind", "tool"},
            {"id", t.id},
            {"name", t.name},
            {"description", t.description},
            {"argument_schema", t.argument_schema},
            {"preconditions", t.preconditions},
            {"postconditions", t.postconditions},
            {"failure_modes", t.failure_modes},
            {"exemplars", t.exemplars},
            {"token_cost", t.token_cost},
            {"pinned", t.pinned},
            {"domain", t.domain}};
}

InstructionFragment fragment_from_json(const nlohmann::json& doc) {
    InstructionFragment f;
    f.id = doc.at("id").get<std::string>();
    f.text = doc.at("text").get<std::string>();
    f.domain = doc.value("domain", "");
    f.policy_type = policy_type_from_string(doc.value("policy_type", "other"));
    f.priority = doc.value("priority", 100);
    f.recency = doc.value("recency", std::int64_t{0});
    f.pinned = doc.value("pinned", false);
    return f;
}

ToolSpec tool_from_json(const nlohmann::json& doc) {
    ToolSpec t;
    t.id = doc.at("id").get<std::string>();
    t.name = doc.at("name").get<std::string>();
    t.description = doc.value("description", "");
    t.argument_schema = doc.value("argument_schema", "");
    t.preconditions = doc.value("preconditions", std::vector<std::string>{});
    t.postconditions = doc.value("postconditions", std::vector<std::string>{});
    t.failure_modes = doc.value("failure_modes", std::vector<std::string>{});
    t.exemplars = doc.value("exemplars", std::vector<std::string>{});
    t.pinned = doc.value("pinned", false);
    t.domain = doc.value("domain", "");
    return t;
}

void absorb_record(Corpus& corpus, const nlohmann::json& doc, const std::string& where) {
    const std::string kind = doc.value("kind", "");
    if (kind == "fragment") {
        corpus.fragments.push_back(fragment_from_json(doc));
    } else if (kind == "tool") {
        corpus.tools.push_back(tool_from_json(doc));
    } else if (kind == "overlay") {
        corpus.safety_overlay.text = doc.at("text").get<std::string>();
    } else if (kind == "routing_note") {
        corpus.routing_note = doc.at("text").get<std::string>();
    } else {
        throw std::invalid_argument("unknown record kind '" + kind + "' in " + where);
    }
}

}  // namespace

void save_corpus_jsonl(const Corpus& corpus, const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot open for write: " + file.string());
    for (const auto& f : corpus.fragments) out << fragment_to_json(f).dump() << "\n";
    for (const auto& t : corpus.tools) out << tool_to_json(t).dump() << "\n";
    if (!corpus.safety_overlay.text.empty()) {
        out << nlohmann::json{{"kind", "overlay"},
                              {"text", corpus.safety_overlay.text},
                              {"token_cost", corpus.safety_overlay.token_cost}}
                   .dump()
            << "\n";
    }
    if (!corpus.routing_note.empty())
        out << nlohmann::json{{"kind", "routing_note"}, {"text", corpus.routing_note}}.dump() << "\n";
}

Corpus load_corpus_jsonl(const std::filesystem::path& file, const TokenCounter& counter) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open corpus file: " + file.string());
    Corpus corpus;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        absorb_record(corpus, nlohmann::json::parse(line),
                      file.string() + ":" + std::to_string(line_no));
    }
    finalize_corpus(corpus, counter);
    return corpus;
}

Corpus load_corpus_dir(const std::filesystem::path& dir, const TokenCounter& counter) {
    if (!std::filesystem::is_directory(dir))
        throw std::runtime_error("not a corpus directory: " + dir.string());
    Corpus corpus;
    std::vector<std::filesystem::path> jsonl_files;
    std::vector<std::filesystem::path> text_files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        auto ext = entry.path().extension();
        if (ext == ".jsonl") jsonl_files.push_back(entry.path());
        if (ext == ".txt") text_files.push_back(entry.path());
    }
    std::sort(jsonl_files.begin(), jsonl_files.end());
    std::sort(text_files.begin(), text_files.end());

    for (const auto& file : jsonl_files) {
        std::ifstream in(file);
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            absorb_record(corpus, nlohmann::json::parse(line),
                          file.string() + ":" + std::to_string(line_no));
        }
    }
    for (const auto& file : text_files) {
        std::ifstream in(file);
        std::stringstream buffer;
        buffer << in.rdbuf();
        auto chunks = chunk_document(file.stem().string(), buffer.str(), {}, counter);
        for (auto& c : chunks) corpus.fragments.push_back(std::move(c));
    }

    const std::int64_t now = 0; // load is not a content change; timestamps stay neutral
    for (const auto& f : corpus.fragments) corpus.change_log.push_back({now, f.id, "load"});
    for (const auto& t : corpus.tools) corpus.change_log.push_back({now, t.id, "load"});
    finalize_corpus(corpus, counter);
    return corpus;
}

}  // namespace itr
