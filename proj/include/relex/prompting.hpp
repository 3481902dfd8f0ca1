#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "relex/dataset.hpp"

namespace relex {

/// Placeholders available to a simple-query template.
inline constexpr std::string_view kQueryPlaceholders[] = {
    "sentence", "head_entity", "tail_entity", "head_type", "tail_type", "relation_list"};
/// Placeholders available to a demonstration (retrieved example) template.
inline constexpr std::string_view kDemoPlaceholders[] = {
    "example_sentence", "example_head", "example_tail", "example_relation"};

/// Text with `{name}` placeholders. `{{` and `}}` render as literal braces.
class PromptTemplate {
public:
    /// Throws RenderError on unknown placeholders or unbalanced braces.
    static PromptTemplate parse(std::string name, std::string body);

    const std::string& name() const noexcept { return name_; }
    const std::string& body() const noexcept { return body_; }
    const std::set<std::string>& required_placeholders() const noexcept { return required_; }

    /// Throws RenderError naming the first placeholder without a value.
    std::string render(const std::map<std::string, std::string, std::less<>>& values) const;

private:
    struct Piece {
        bool placeholder;
        std::string text;
    };

    std::string name_;
    std::string body_;
    std::set<std::string> required_;
    std::vector<Piece> pieces_;
};

/// Template named after the file stem.
PromptTemplate load_template(const std::filesystem::path& path);

PromptTemplate default_query_template();
/// Same as the default, with the entity types of the TACRED family.
PromptTemplate typed_query_template();
PromptTemplate default_demo_template();

enum class PromptMode { simple, augmented };
std::string_view to_string(PromptMode mode) noexcept;

struct PromptRecord {
    std::string instance_id;
    std::string prompt_text;
    std::string expected_completion;
    PromptMode mode = PromptMode::simple;
    std::string template_name;

    bool operator==(const PromptRecord&) const = default;
};

/// Labels in schema order joined by ", ".
std::string relation_list(const RelationSchema& schema);

PromptRecord render_simple_query(const RelationInstance& instance, const RelationSchema& schema,
                                 const PromptTemplate& query_template);

/// One demonstration block per example (in the given order) followed by the
/// simple-query block of `instance`. Examples must come from the train split
/// and must not be the target itself.
PromptRecord render_augmented_query(const RelationInstance& instance,
                                    std::span<const RelationInstance> examples,
                                    const RelationSchema& schema,
                                    const PromptTemplate& query_template,
                                    const PromptTemplate& demo_template = default_demo_template());

PromptRecord render_augmented_query(const RelationInstance& instance,
                                    const RelationInstance& example,
                                    const RelationSchema& schema,
                                    const PromptTemplate& query_template,
                                    const PromptTemplate& demo_template = default_demo_template());

/// Simple-mode record per instance, order preserved. For SemEval this is fed the
/// train split, which doubles as the prompt dataset.
std::vector<PromptRecord> build_prompt_dataset(std::span<const RelationInstance> split,
                                               const RelationSchema& schema,
                                               const PromptTemplate& query_template);

/// Fine-tuning exchange format: {"instance_id", "prompt", "completion"} per line.
std::string prompt_dataset_jsonl(std::span<const PromptRecord> records);
void write_prompt_dataset(const std::filesystem::path& path, std::span<const PromptRecord> records);

}  // namespace relex
