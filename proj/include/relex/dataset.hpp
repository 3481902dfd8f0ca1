#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace relex {

enum class Split { train, test, prompt };

std::string_view to_string(Split split) noexcept;
Split split_from_string(std::string_view name);

/// Half-open token interval [start, end).
struct Span {
    std::size_t start = 0;
    std::size_t end = 0;

    std::size_t size() const noexcept { return end > start ? end - start : 0; }
    bool operator==(const Span&) const = default;
};

/// One annotated sentence with a head and a tail entity.
struct RelationInstance {
    std::string id;
    std::vector<std::string> tokens;
    Span head;
    Span tail;
    std::optional<std::string> head_type;
    std::optional<std::string> tail_type;
    std::string gold_label;
    Split split = Split::train;

    bool operator==(const RelationInstance&) const = default;

    /// Tokens joined by single spaces.
    std::string sentence() const;
    std::string head_text() const;
    std::string tail_text() const;
};

/// Throws ValidationError naming the instance if a span is empty or out of range.
void validate_spans(const RelationInstance& instance);

/// Closed label set of one dataset.
struct RelationSchema {
    std::string dataset_name;
    std::vector<std::string> labels;  // sorted, unique
    std::string negative_label;
    bool directional = false;

    bool contains(std::string_view label) const;
    bool is_negative(std::string_view label) const { return label == negative_label; }
    bool operator==(const RelationSchema&) const = default;
};

// Conventions of the four benchmark datasets. Names match case-insensitively and
// ignore '-' and '_' ("Re-TACRED" == "retacred", "SemEval" == "SemEVAL").

struct SplitCounts {
    std::size_t train = 0;
    std::size_t test = 0;
    std::size_t prompt = 0;
    std::size_t relations = 0;
};

/// Canonical spelling for a named benchmark, or the input unchanged.
std::string canonical_dataset_name(std::string_view name);
bool is_semeval(std::string_view dataset_name);
bool is_tacred_family(std::string_view dataset_name);
std::string negative_label_for(std::string_view dataset_name);
bool is_directional(std::string_view dataset_name);
/// Published split sizes and label counts; nullopt for custom datasets.
std::optional<SplitCounts> expected_counts(std::string_view dataset_name);

/// Full reference label set shipped for each named benchmark; empty for custom names.
std::vector<std::string> reference_labels(std::string_view dataset_name);
RelationSchema reference_schema(std::string_view dataset_name);

// ---------------------------------------------------------------------------
// Loaders

/// LDC TACRED layout: a JSON array of objects with id, token, subj_start/end and
/// obj_start/end (inclusive ends), subj_type/obj_type and relation. TACREV and
/// Re-TACRED use the same layout. When `schema` is given, relations outside it
/// are rejected.
std::vector<RelationInstance> parse_tacred_json(std::string_view text, Split split,
                                                const RelationSchema* schema = nullptr);
std::vector<RelationInstance> load_tacred_family(const std::filesystem::path& path,
                                                 std::string_view dataset_name, Split split,
                                                 const RelationSchema* schema = nullptr);

/// SemEval-2010 Task 8 text layout:
///
///     8001\t"The most common <e1>audits</e1> were about <e2>waste</e2> and recycling."
///     Message-Topic(e1,e2)
///     Comment: ...
///
/// Tokenization: whitespace split, plus a split at every entity marker boundary,
/// plus the sentence-final '.', '!' or '?' as its own token. The sentence number
/// becomes the instance id.
std::vector<RelationInstance> parse_semeval(std::string_view text, Split split);
std::vector<RelationInstance> load_semeval(const std::filesystem::path& path, Split split);

/// Parses one marked sentence ("... <e1>x</e1> ... <e2>y</e2> ...").
RelationInstance parse_marked_sentence(std::string id, std::string_view marked, std::string label,
                                       Split split);
/// Inverse of parse_marked_sentence up to whitespace: tokens joined by spaces
/// with <e1>/<e2> markers re-inserted around the spans.
std::string mark_entities(const RelationInstance& instance);

// ---------------------------------------------------------------------------
// Schema and bundle

/// Sorted distinct gold labels plus the dataset's negative label. Throws
/// ValidationError when a named benchmark's label count differs from the published one.
RelationSchema derive_schema(std::span<const RelationInstance> instances,
                             std::string_view dataset_name);

/// Throws ValidationError for the first instance whose label is outside `schema`.
void validate_labels(const RelationSchema& schema, std::span<const RelationInstance> instances);

struct DatasetBundle {
    RelationSchema schema;
    std::vector<RelationInstance> train;
    std::vector<RelationInstance> test;
    std::vector<RelationInstance> prompt;  // empty when the dataset has no third split

    const std::vector<RelationInstance>& split(Split s) const;
};

/// Validates spans and labels, split disjointness, unique ids per split and the
/// SemEval no-prompt-split rule.
DatasetBundle assemble_bundle(RelationSchema schema, std::vector<RelationInstance> train,
                              std::vector<RelationInstance> test,
                              std::vector<RelationInstance> prompt);

// ---------------------------------------------------------------------------
// Canonical persistence: one JSON object per line with keys, in order,
// id, tokens, head_start, head_end, tail_start, tail_end, head_type, tail_type,
// gold_label, split.

std::string to_jsonl_line(const RelationInstance& instance);
RelationInstance from_jsonl_line(std::string_view line);
void write_instances_jsonl(const std::filesystem::path& path,
                           std::span<const RelationInstance> instances);
std::vector<RelationInstance> read_instances_jsonl(const std::filesystem::path& path);

/// Writes schema.json, train.jsonl, test.jsonl and prompt.jsonl into `dir`.
void save_bundle(const DatasetBundle& bundle, const std::filesystem::path& dir);
DatasetBundle load_bundle(const std::filesystem::path& dir);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace relex
