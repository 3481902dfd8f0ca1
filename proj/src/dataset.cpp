#include "relex/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "relex/error.hpp"

namespace relex {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string fold_name(std::string_view name) {
    std::string out;
    for (char c : name) {
        if (c == '-' || c == '_' || c == ' ') continue;
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

std::string join(std::span<const std::string> tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out.push_back(' ');
        out += tokens[i];
    }
    return out;
}

const std::vector<std::string>& tacred_labels() {
    static const std::vector<std::string> labels = {
        "no_relation",
        "org:alternate_names",
        "org:city_of_headquarters",
        "org:country_of_headquarters",
        "org:dissolved",
        "org:founded",
        "org:founded_by",
        "org:member_of",
        "org:members",
        "org:number_of_employees/members",
        "org:parents",
        "org:political/religious_affiliation",
        "org:shareholders",
        "org:stateorprovince_of_headquarters",
        "org:subsidiaries",
        "org:top_members/employees",
        "org:website",
        "per:age",
        "per:alternate_names",
        "per:cause_of_death",
        "per:charges",
        "per:children",
        "per:cities_of_residence",
        "per:city_of_birth",
        "per:city_of_death",
        "per:countries_of_residence",
        "per:country_of_birth",
        "per:country_of_death",
        "per:date_of_birth",
        "per:date_of_death",
        "per:employee_of",
        "per:origin",
        "per:other_family",
        "per:parents",
        "per:religion",
        "per:schools_attended",
        "per:siblings",
        "per:spouse",
        "per:stateorprovince_of_birth",
        "per:stateorprovince_of_death",
        "per:stateorprovinces_of_residence",
        "per:title",
    };
    return labels;
}

const std::vector<std::string>& retacred_labels() {
    static const std::vector<std::string> labels = {
        "no_relation",
        "org:alternate_names",
        "org:city_of_branch",
        "org:country_of_branch",
        "org:dissolved",
        "org:founded",
        "org:founded_by",
        "org:member_of",
        "org:members",
        "org:number_of_employees/members",
        "org:political/religious_affiliation",
        "org:shareholders",
        "org:stateorprovince_of_branch",
        "org:top_members/employees",
        "org:website",
        "per:age",
        "per:cause_of_death",
        "per:charges",
        "per:children",
        "per:cities_of_residence",
        "per:city_of_birth",
        "per:city_of_death",
        "per:countries_of_residence",
        "per:country_of_birth",
        "per:country_of_death",
        "per:date_of_birth",
        "per:date_of_death",
        "per:employee_of",
        "per:identity",
        "per:origin",
        "per:other_family",
        "per:parents",
        "per:religion",
        "per:schools_attended",
        "per:siblings",
        "per:spouse",
        "per:stateorprovince_of_birth",
        "per:stateorprovince_of_death",
        "per:stateorprovinces_of_residence",
        "per:title",
    };
    return labels;
}

const std::vector<std::string>& semeval_labels() {
    static const std::vector<std::string> labels = [] {
        std::vector<std::string> out{"Other"};
        for (const char* rel : {"Cause-Effect", "Component-Whole", "Content-Container",
                                "Entity-Destination", "Entity-Origin", "Instrument-Agency",
                                "Member-Collection", "Message-Topic", "Product-Producer"}) {
            out.push_back(std::string(rel) + "(e1,e2)");
            out.push_back(std::string(rel) + "(e2,e1)");
        }
        return out;
    }();
    return labels;
}

ordered_json schema_to_json(const RelationSchema& schema) {
    ordered_json j;
    j["dataset_name"] = schema.dataset_name;
    j["labels"] = schema.labels;
    j["negative_label"] = schema.negative_label;
    j["directional"] = schema.directional;
    return j;
}

RelationSchema schema_from_json(const nlohmann::json& j) {
    RelationSchema s;
    s.dataset_name = j.at("dataset_name").get<std::string>();
    s.labels = j.at("labels").get<std::vector<std::string>>();
    s.negative_label = j.at("negative_label").get<std::string>();
    s.directional = j.at("directional").get<bool>();
    if (!std::is_sorted(s.labels.begin(), s.labels.end()) ||
        std::adjacent_find(s.labels.begin(), s.labels.end()) != s.labels.end()) {
        throw ValidationError("schema labels must be sorted and unique");
    }
    if (!s.contains(s.negative_label)) {
        throw ValidationError("schema negative label '" + s.negative_label + "' is not in labels");
    }
    return s;
}

std::size_t json_index(const nlohmann::json& obj, const char* key, const std::string& id) {
    const auto& v = obj.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) {
        throw ValidationError("instance " + id + ": field '" + key + "' is not a non-negative integer");
    }
    return v.get<std::size_t>();
}

std::optional<std::string> optional_string(const nlohmann::json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    return it->get<std::string>();
}

}  // namespace

std::string_view to_string(Split split) noexcept {
    switch (split) {
        case Split::train: return "train";
        case Split::test: return "test";
        case Split::prompt: return "prompt";
    }
    return "train";
}

Split split_from_string(std::string_view name) {
    if (name == "train") return Split::train;
    if (name == "test") return Split::test;
    if (name == "prompt") return Split::prompt;
    throw ValidationError("unknown split '" + std::string(name) + "'");
}

std::string RelationInstance::sentence() const { return join(tokens); }

std::string RelationInstance::head_text() const {
    return join(std::span(tokens).subspan(head.start, head.size()));
}

std::string RelationInstance::tail_text() const {
    return join(std::span(tokens).subspan(tail.start, tail.size()));
}

void validate_spans(const RelationInstance& instance) {
    const auto n = instance.tokens.size();
    auto check = [&](const Span& s, const char* which) {
        if (s.start >= s.end || s.end > n) {
            throw ValidationError("instance " + instance.id + ": " + which + " span [" +
                                  std::to_string(s.start) + "," + std::to_string(s.end) +
                                  ") invalid for " + std::to_string(n) + " tokens");
        }
    };
    check(instance.head, "head");
    check(instance.tail, "tail");
}

bool RelationSchema::contains(std::string_view label) const {
    return std::binary_search(labels.begin(), labels.end(), label);
}

std::string canonical_dataset_name(std::string_view name) {
    const auto f = fold_name(name);
    if (f == "tacred") return "TACRED";
    if (f == "tacrev") return "TACREV";
    if (f == "retacred") return "Re-TACRED";
    if (f == "semeval") return "SemEVAL";
    return std::string(name);
}

bool is_semeval(std::string_view dataset_name) { return fold_name(dataset_name) == "semeval"; }

bool is_tacred_family(std::string_view dataset_name) {
    const auto f = fold_name(dataset_name);
    return f == "tacred" || f == "tacrev" || f == "retacred";
}

std::string negative_label_for(std::string_view dataset_name) {
    return is_semeval(dataset_name) ? "Other" : "no_relation";
}

bool is_directional(std::string_view dataset_name) { return is_semeval(dataset_name); }

std::optional<SplitCounts> expected_counts(std::string_view dataset_name) {
    const auto f = fold_name(dataset_name);
    if (f == "tacred" || f == "tacrev") return SplitCounts{68124, 15509, 22631, 42};
    if (f == "retacred") return SplitCounts{58465, 13418, 19584, 40};
    if (f == "semeval") return SplitCounts{8000, 2717, 8000, 19};
    return std::nullopt;
}

std::vector<std::string> reference_labels(std::string_view dataset_name) {
    const auto f = fold_name(dataset_name);
    std::vector<std::string> out;
    if (f == "tacred" || f == "tacrev") out = tacred_labels();
    else if (f == "retacred") out = retacred_labels();
    else if (f == "semeval") out = semeval_labels();
    std::sort(out.begin(), out.end());
    return out;
}

RelationSchema reference_schema(std::string_view dataset_name) {
    auto labels = reference_labels(dataset_name);
    if (labels.empty()) {
        throw ValidationError("no reference label set for dataset '" + std::string(dataset_name) + "'");
    }
    return RelationSchema{canonical_dataset_name(dataset_name), std::move(labels),
                          negative_label_for(dataset_name), is_directional(dataset_name)};
}

// ---------------------------------------------------------------------------
// TACRED family

std::vector<RelationInstance> parse_tacred_json(std::string_view text, Split split,
                                                const RelationSchema* schema) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("TACRED JSON: ") + e.what(), e.byte);
    }
    if (!doc.is_array()) throw ParseError("TACRED JSON: top level is not an array", 0);

    std::vector<RelationInstance> out;
    out.reserve(doc.size());
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const auto& obj = doc[i];
        if (!obj.is_object()) {
            throw ParseError("TACRED JSON: element " + std::to_string(i) + " is not an object");
        }
        RelationInstance inst;
        inst.id = obj.contains("id") ? obj["id"].get<std::string>() : std::to_string(i);
        try {
            inst.tokens = obj.at("token").get<std::vector<std::string>>();
            // Source end indices are inclusive.
            inst.head = {json_index(obj, "subj_start", inst.id), json_index(obj, "subj_end", inst.id) + 1};
            inst.tail = {json_index(obj, "obj_start", inst.id), json_index(obj, "obj_end", inst.id) + 1};
            inst.head_type = optional_string(obj, "subj_type");
            inst.tail_type = optional_string(obj, "obj_type");
            inst.gold_label = obj.at("relation").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError("instance " + inst.id + ": " + e.what());
        }
        inst.split = split;
        validate_spans(inst);
        if (schema && !schema->contains(inst.gold_label)) {
            throw ValidationError("instance " + inst.id + ": relation '" + inst.gold_label +
                                  "' not in schema " + schema->dataset_name);
        }
        out.push_back(std::move(inst));
    }
    return out;
}

std::vector<RelationInstance> load_tacred_family(const std::filesystem::path& path,
                                                 std::string_view dataset_name, Split split,
                                                 const RelationSchema* schema) {
    if (!is_tacred_family(dataset_name) && expected_counts(dataset_name)) {
        throw ValidationError(std::string(dataset_name) + " is not a TACRED-format dataset");
    }
    try {
        return parse_tacred_json(read_file(path), split, schema);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// SemEval

RelationInstance parse_marked_sentence(std::string id, std::string_view marked, std::string label,
                                       Split split) {
    struct Marker {
        std::string_view tag;
        int entity;
        bool open;
    };
    static constexpr Marker kMarkers[] = {
        {"<e1>", 1, true}, {"</e1>", 1, false}, {"<e2>", 2, true}, {"</e2>", 2, false}};

    std::string text;
    std::vector<std::size_t> boundaries;
    std::optional<std::size_t> open_at[3];
    std::optional<std::pair<std::size_t, std::size_t>> range[3];

    for (std::size_t i = 0; i < marked.size();) {
        const Marker* hit = nullptr;
        if (marked[i] == '<') {
            for (const auto& m : kMarkers) {
                if (marked.substr(i, m.tag.size()) == m.tag) {
                    hit = &m;
                    break;
                }
            }
        }
        if (!hit) {
            text.push_back(marked[i++]);
            continue;
        }
        const int e = hit->entity;
        if (hit->open) {
            if (open_at[e] || range[e]) {
                throw ParseError("sentence " + id + ": duplicate <e" + std::to_string(e) + "> marker");
            }
            open_at[e] = text.size();
        } else {
            if (!open_at[e]) {
                throw ParseError("sentence " + id + ": </e" + std::to_string(e) + "> without opening marker");
            }
            range[e] = {*open_at[e], text.size()};
            open_at[e].reset();
        }
        boundaries.push_back(text.size());
        i += hit->tag.size();
    }
    for (int e : {1, 2}) {
        if (open_at[e]) {
            throw ParseError("sentence " + id + ": missing closing </e" + std::to_string(e) + "> marker");
        }
        if (!range[e]) {
            throw ParseError("sentence " + id + ": missing <e" + std::to_string(e) + "> marker");
        }
    }

    // Character ranges of tokens: split at whitespace and at marker boundaries.
    std::vector<std::pair<std::size_t, std::size_t>> char_tokens;
    std::size_t start = std::string::npos;
    auto is_boundary = [&](std::size_t pos) {
        return std::find(boundaries.begin(), boundaries.end(), pos) != boundaries.end();
    };
    for (std::size_t i = 0; i <= text.size(); ++i) {
        const bool end_of_text = i == text.size();
        const bool space = !end_of_text && std::isspace(static_cast<unsigned char>(text[i]));
        if (start != std::string::npos && (end_of_text || space || is_boundary(i))) {
            char_tokens.emplace_back(start, i);
            start = std::string::npos;
        }
        if (!end_of_text && !space && start == std::string::npos) start = i;
    }
    if (!char_tokens.empty()) {
        const auto [b, e] = char_tokens.back();
        const char last = text[e - 1];
        if (e - b > 1 && (last == '.' || last == '!' || last == '?')) {
            char_tokens.back().second = e - 1;
            char_tokens.emplace_back(e - 1, e);
        }
    }

    RelationInstance inst;
    inst.id = std::move(id);
    inst.gold_label = std::move(label);
    inst.split = split;
    for (const auto& [b, e] : char_tokens) inst.tokens.push_back(text.substr(b, e - b));

    auto to_span = [&](std::pair<std::size_t, std::size_t> chars) {
        Span s{char_tokens.size(), 0};
        for (std::size_t t = 0; t < char_tokens.size(); ++t) {
            if (char_tokens[t].first >= chars.first && char_tokens[t].second <= chars.second) {
                s.start = std::min(s.start, t);
                s.end = t + 1;
            }
        }
        if (s.end == 0) s = {0, 0};
        return s;
    };
    inst.head = to_span(*range[1]);
    inst.tail = to_span(*range[2]);
    validate_spans(inst);
    return inst;
}

std::string mark_entities(const RelationInstance& instance) {
    std::string out;
    for (std::size_t t = 0; t < instance.tokens.size(); ++t) {
        if (t) out.push_back(' ');
        if (t == instance.head.start) out += "<e1>";
        if (t == instance.tail.start) out += "<e2>";
        out += instance.tokens[t];
        if (t + 1 == instance.tail.end) out += "</e2>";
        if (t + 1 == instance.head.end) out += "</e1>";
    }
    return out;
}

std::vector<RelationInstance> parse_semeval(std::string_view text, Split split) {
    struct Line {
        std::string_view body;
        std::size_t offset;
    };
    std::vector<Line> lines;
    for (std::size_t pos = 0; pos <= text.size();) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        auto body = text.substr(pos, nl - pos);
        while (!body.empty() && (body.back() == '\r' || body.back() == ' ' || body.back() == '\t')) {
            body.remove_suffix(1);
        }
        // UTF-8 byte order mark on the first line.
        if (pos == 0 && body.substr(0, 3) == "\xEF\xBB\xBF") body.remove_prefix(3);
        lines.push_back({body, pos});
        pos = nl + 1;
    }

    auto sentence_line = [](std::string_view body, std::string& number, std::string_view& sentence) {
        std::size_t i = 0;
        while (i < body.size() && std::isspace(static_cast<unsigned char>(body[i]))) ++i;
        const auto digits_begin = i;
        while (i < body.size() && std::isdigit(static_cast<unsigned char>(body[i]))) ++i;
        if (i == digits_begin || i == body.size() || !std::isspace(static_cast<unsigned char>(body[i]))) {
            return false;
        }
        number.assign(body.substr(digits_begin, i - digits_begin));
        while (i < body.size() && std::isspace(static_cast<unsigned char>(body[i]))) ++i;
        auto rest = body.substr(i);
        if (rest.size() >= 2 && rest.front() == '"' && rest.back() == '"') {
            rest = rest.substr(1, rest.size() - 2);
        }
        sentence = rest;
        return true;
    };

    std::vector<RelationInstance> out;
    for (std::size_t li = 0; li < lines.size(); ++li) {
        const auto& line = lines[li];
        if (line.body.empty()) continue;
        std::string number;
        std::string_view sentence;
        if (!sentence_line(line.body, number, sentence)) {
            throw ParseError("SemEval: expected a numbered sentence line", line.offset);
        }
        // The relation line is the next non-empty line, and must not be a comment
        // or another sentence.
        std::size_t rl = li + 1;
        while (rl < lines.size() && lines[rl].body.empty()) ++rl;
        std::string ignored_number;
        std::string_view ignored_sentence;
        if (rl == lines.size() || lines[rl].body.starts_with("Comment") ||
            sentence_line(lines[rl].body, ignored_number, ignored_sentence)) {
            throw ParseError("SemEval: sentence " + number + " has no relation line", line.offset);
        }
        auto label = lines[rl].body;
        while (!label.empty() && std::isspace(static_cast<unsigned char>(label.front()))) label.remove_prefix(1);
        try {
            out.push_back(parse_marked_sentence(number, sentence, std::string(label), split));
        } catch (const ParseError& e) {
            throw ParseError(e.what(), line.offset);
        }
        li = rl;
        while (li + 1 < lines.size() && lines[li + 1].body.starts_with("Comment")) ++li;
    }
    return out;
}

std::vector<RelationInstance> load_semeval(const std::filesystem::path& path, Split split) {
    try {
        return parse_semeval(read_file(path), split);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Schema and bundle

RelationSchema derive_schema(std::span<const RelationInstance> instances,
                             std::string_view dataset_name) {
    if (instances.empty()) throw ValidationError("derive_schema: empty instance list");
    std::set<std::string> labels;
    for (const auto& inst : instances) labels.insert(inst.gold_label);

    RelationSchema schema;
    schema.dataset_name = canonical_dataset_name(dataset_name);
    schema.negative_label = negative_label_for(dataset_name);
    schema.directional = is_directional(dataset_name);
    labels.insert(schema.negative_label);
    schema.labels.assign(labels.begin(), labels.end());

    if (auto expected = expected_counts(dataset_name);
        expected && expected->relations != schema.labels.size()) {
        throw ValidationError(schema.dataset_name + ": derived " + std::to_string(schema.labels.size()) +
                              " relation labels, expected " + std::to_string(expected->relations));
    }
    return schema;
}

void validate_labels(const RelationSchema& schema, std::span<const RelationInstance> instances) {
    for (const auto& inst : instances) {
        if (!schema.contains(inst.gold_label)) {
            throw ValidationError("instance " + inst.id + ": label '" + inst.gold_label +
                                  "' not in schema " + schema.dataset_name);
        }
    }
}

const std::vector<RelationInstance>& DatasetBundle::split(Split s) const {
    switch (s) {
        case Split::train: return train;
        case Split::test: return test;
        case Split::prompt: return prompt;
    }
    return train;
}

DatasetBundle assemble_bundle(RelationSchema schema, std::vector<RelationInstance> train,
                              std::vector<RelationInstance> test,
                              std::vector<RelationInstance> prompt) {
    if (is_semeval(schema.dataset_name) && !prompt.empty()) {
        throw ValidationError("SemEVAL has no separate prompt split; prompt list must be empty");
    }
    std::unordered_map<std::string, Split> owner;
    std::vector<std::string> offenders;
    for (const auto* part : {&train, &test, &prompt}) {
        for (const auto& inst : *part) {
            validate_spans(inst);
            auto [it, inserted] = owner.emplace(inst.id, inst.split);
            if (!inserted) {
                offenders.push_back(inst.id + " (" + std::string(to_string(it->second)) + "/" +
                                    std::string(to_string(inst.split)) + ")");
            }
        }
        validate_labels(schema, *part);
    }
    if (!offenders.empty()) {
        std::string msg = "duplicate instance ids across or within splits:";
        for (const auto& o : offenders) msg += " " + o;
        throw ValidationError(msg);
    }
    return DatasetBundle{std::move(schema), std::move(train), std::move(test), std::move(prompt)};
}

// ---------------------------------------------------------------------------
// Persistence

std::string to_jsonl_line(const RelationInstance& instance) {
    ordered_json j;
    j["id"] = instance.id;
    j["tokens"] = instance.tokens;
    j["head_start"] = instance.head.start;
    j["head_end"] = instance.head.end;
    j["tail_start"] = instance.tail.start;
    j["tail_end"] = instance.tail.end;
    j["head_type"] = instance.head_type ? ordered_json(*instance.head_type) : ordered_json(nullptr);
    j["tail_type"] = instance.tail_type ? ordered_json(*instance.tail_type) : ordered_json(nullptr);
    j["gold_label"] = instance.gold_label;
    j["split"] = to_string(instance.split);
    return j.dump();
}

RelationInstance from_jsonl_line(std::string_view line) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("instance JSONL: ") + e.what(), e.byte);
    }
    RelationInstance inst;
    try {
        inst.id = j.at("id").get<std::string>();
        inst.tokens = j.at("tokens").get<std::vector<std::string>>();
        inst.head = {j.at("head_start").get<std::size_t>(), j.at("head_end").get<std::size_t>()};
        inst.tail = {j.at("tail_start").get<std::size_t>(), j.at("tail_end").get<std::size_t>()};
        inst.head_type = optional_string(j, "head_type");
        inst.tail_type = optional_string(j, "tail_type");
        inst.gold_label = j.at("gold_label").get<std::string>();
        inst.split = split_from_string(j.at("split").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("instance JSONL: ") + e.what());
    }
    validate_spans(inst);
    return inst;
}

void write_instances_jsonl(const std::filesystem::path& path,
                           std::span<const RelationInstance> instances) {
    std::string buf;
    for (const auto& inst : instances) {
        buf += to_jsonl_line(inst);
        buf.push_back('\n');
    }
    write_file(path, buf);
}

std::vector<RelationInstance> read_instances_jsonl(const std::filesystem::path& path) {
    const auto text = read_file(path);
    std::vector<RelationInstance> out;
    std::size_t line_no = 0;
    for (std::size_t pos = 0; pos < text.size();) {
        auto nl = text.find('\n', pos);
        if (nl == std::string::npos) nl = text.size();
        ++line_no;
        std::string_view line(text.data() + pos, nl - pos);
        if (!line.empty()) {
            try {
                out.push_back(from_jsonl_line(line));
            } catch (const ParseError& e) {
                throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what(), pos);
            }
        }
        pos = nl + 1;
    }
    return out;
}

void save_bundle(const DatasetBundle& bundle, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_file(dir / "schema.json", schema_to_json(bundle.schema).dump(2) + "\n");
    write_instances_jsonl(dir / "train.jsonl", bundle.train);
    write_instances_jsonl(dir / "test.jsonl", bundle.test);
    write_instances_jsonl(dir / "prompt.jsonl", bundle.prompt);
}

DatasetBundle load_bundle(const std::filesystem::path& dir) {
    RelationSchema schema;
    try {
        schema = schema_from_json(nlohmann::json::parse(read_file(dir / "schema.json")));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError((dir / "schema.json").string() + ": " + e.what());
    }
    auto read_split = [&](const char* name) {
        const auto p = dir / name;
        return std::filesystem::exists(p) ? read_instances_jsonl(p) : std::vector<RelationInstance>{};
    };
    return assemble_bundle(std::move(schema), read_split("train.jsonl"), read_split("test.jsonl"),
                           read_split("prompt.jsonl"));
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error("write failed for " + path.string());
}

}  // namespace relex
