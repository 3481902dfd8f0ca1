#include "relex/prompting.hpp"

#include <algorithm>

#include <json.hpp>

#include "relex/error.hpp"

namespace relex {

namespace {

bool known_placeholder(std::string_view name) {
    auto in = [&](std::span<const std::string_view> set) {
        return std::find(set.begin(), set.end(), name) != set.end();
    };
    return in(kQueryPlaceholders) || in(kDemoPlaceholders);
}

constexpr std::string_view kDefaultQuery =
    "Given the sentence: {sentence}, what is the relation type between head entity: {head_entity} "
    "and tail entity: {tail_entity} among the following relations? {relation_list}. "
    "Answer with exactly one relation label.";

constexpr std::string_view kTypedQuery =
    "Given the sentence: {sentence}, what is the relation type between {head_type} head entity: "
    "{head_entity} and {tail_type} tail entity: {tail_entity} among the following relations? "
    "{relation_list}. Answer with exactly one relation label.";

constexpr std::string_view kDefaultDemo =
    "Example sentence: {example_sentence}, the relation type between head entity: {example_head} "
    "and tail entity: {example_tail} is {example_relation}.";

using ValueMap = std::map<std::string, std::string, std::less<>>;

ValueMap query_values(const RelationInstance& instance, const RelationSchema& schema) {
    ValueMap values{
        {"sentence", instance.sentence()},
        {"head_entity", instance.head_text()},
        {"tail_entity", instance.tail_text()},
        {"relation_list", relation_list(schema)},
    };
    if (instance.head_type) values["head_type"] = *instance.head_type;
    if (instance.tail_type) values["tail_type"] = *instance.tail_type;
    return values;
}

void check_renderable(const RelationInstance& instance, const RelationSchema& schema) {
    if (schema.labels.empty()) {
        throw RenderError("schema " + schema.dataset_name + " has an empty relation list");
    }
    if (!schema.contains(instance.gold_label)) {
        throw RenderError("instance " + instance.id + ": gold label '" + instance.gold_label +
                          "' not in schema");
    }
}

}  // namespace

PromptTemplate PromptTemplate::parse(std::string name, std::string body) {
    PromptTemplate t;
    t.name_ = std::move(name);
    std::string literal;
    for (std::size_t i = 0; i < body.size();) {
        const char c = body[i];
        if (c == '{' && i + 1 < body.size() && body[i + 1] == '{') {
            literal.push_back('{');
            i += 2;
        } else if (c == '}' && i + 1 < body.size() && body[i + 1] == '}') {
            literal.push_back('}');
            i += 2;
        } else if (c == '{') {
            const auto close = body.find('}', i);
            if (close == std::string::npos) {
                throw RenderError("template " + t.name_ + ": unclosed '{' at byte " + std::to_string(i));
            }
            std::string key = body.substr(i + 1, close - i - 1);
            if (!known_placeholder(key)) {
                throw RenderError("template " + t.name_ + ": unknown placeholder {" + key + "}");
            }
            if (!literal.empty()) t.pieces_.push_back({false, std::move(literal)});
            literal.clear();
            t.required_.insert(key);
            t.pieces_.push_back({true, std::move(key)});
            i = close + 1;
        } else if (c == '}') {
            throw RenderError("template " + t.name_ + ": stray '}' at byte " + std::to_string(i));
        } else {
            literal.push_back(c);
            ++i;
        }
    }
    if (!literal.empty()) t.pieces_.push_back({false, std::move(literal)});
    t.body_ = std::move(body);
    return t;
}

std::string PromptTemplate::render(const ValueMap& values) const {
    std::string out;
    for (const auto& piece : pieces_) {
        if (!piece.placeholder) {
            out += piece.text;
            continue;
        }
        auto it = values.find(piece.text);
        if (it == values.end()) {
            throw RenderError("template " + name_ + ": no value for placeholder {" + piece.text + "}");
        }
        out += it->second;
    }
    return out;
}

PromptTemplate load_template(const std::filesystem::path& path) {
    auto body = read_file(path);
    // Files conventionally end with a newline; it is not part of the template.
    if (body.ends_with("\r\n")) body.resize(body.size() - 2);
    else if (body.ends_with('\n')) body.pop_back();
    return PromptTemplate::parse(path.stem().string(), std::move(body));
}

PromptTemplate default_query_template() {
    return PromptTemplate::parse("default_query", std::string(kDefaultQuery));
}

PromptTemplate typed_query_template() {
    return PromptTemplate::parse("typed_query", std::string(kTypedQuery));
}

PromptTemplate default_demo_template() {
    return PromptTemplate::parse("default_demo", std::string(kDefaultDemo));
}

std::string_view to_string(PromptMode mode) noexcept {
    return mode == PromptMode::simple ? "simple" : "augmented";
}

std::string relation_list(const RelationSchema& schema) {
    std::string out;
    for (std::size_t i = 0; i < schema.labels.size(); ++i) {
        if (i) out += ", ";
        out += schema.labels[i];
    }
    return out;
}

PromptRecord render_simple_query(const RelationInstance& instance, const RelationSchema& schema,
                                 const PromptTemplate& query_template) {
    check_renderable(instance, schema);
    return PromptRecord{instance.id, query_template.render(query_values(instance, schema)),
                        instance.gold_label, PromptMode::simple, query_template.name()};
}

PromptRecord render_augmented_query(const RelationInstance& instance,
                                    std::span<const RelationInstance> examples,
                                    const RelationSchema& schema,
                                    const PromptTemplate& query_template,
                                    const PromptTemplate& demo_template) {
    check_renderable(instance, schema);
    std::string text;
    for (const auto& example : examples) {
        if (example.id == instance.id) {
            throw LeakageError("instance " + instance.id + " retrieved itself as a demonstration");
        }
        if (example.split != Split::train) {
            throw LeakageError("demonstration " + example.id + " for instance " + instance.id +
                               " comes from the " + std::string(to_string(example.split)) +
                               " split, not train");
        }
        text += demo_template.render({
            {"example_sentence", example.sentence()},
            {"example_head", example.head_text()},
            {"example_tail", example.tail_text()},
            {"example_relation", example.gold_label},
        });
        text += '\n';
    }
    text += query_template.render(query_values(instance, schema));
    return PromptRecord{instance.id, std::move(text), instance.gold_label,
                        examples.empty() ? PromptMode::simple : PromptMode::augmented,
                        query_template.name()};
}

PromptRecord render_augmented_query(const RelationInstance& instance,
                                    const RelationInstance& example,
                                    const RelationSchema& schema,
                                    const PromptTemplate& query_template,
                                    const PromptTemplate& demo_template) {
    return render_augmented_query(instance, std::span(&example, 1), schema, query_template,
                                  demo_template);
}

std::vector<PromptRecord> build_prompt_dataset(std::span<const RelationInstance> split,
                                               const RelationSchema& schema,
                                               const PromptTemplate& query_template) {
    std::vector<PromptRecord> out;
    out.reserve(split.size());
    for (const auto& inst : split) out.push_back(render_simple_query(inst, schema, query_template));
    return out;
}

std::string prompt_dataset_jsonl(std::span<const PromptRecord> records) {
    std::string out;
    for (const auto& r : records) {
        nlohmann::ordered_json j;
        j["instance_id"] = r.instance_id;
        j["prompt"] = r.prompt_text;
        j["completion"] = r.expected_completion;
        out += j.dump();
        out.push_back('\n');
    }
    return out;
}

void write_prompt_dataset(const std::filesystem::path& path, std::span<const PromptRecord> records) {
    write_file(path, prompt_dataset_jsonl(records));
}

}  // namespace relex
