#include "relex/runner.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "relex/error.hpp"
#include "relex/hashing.hpp"
#include "relex/prompting.hpp"

namespace relex {

namespace {

constexpr Method kMethodOrder[] = {Method::simple, Method::rag, Method::finetuned, Method::rag_finetuned};
constexpr std::string_view kDatasetOrder[] = {"TACRED", "TACREV", "Re-TACRED", "SemEVAL"};

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

template <class T>
T parse_number(std::string_view key, std::string_view value) {
    try {
        std::size_t used = 0;
        const std::string v(value);
        T out{};
        if constexpr (std::is_same_v<T, double>) out = std::stod(v, &used);
        else if constexpr (std::is_same_v<T, int>) out = std::stoi(v, &used);
        else out = static_cast<T>(std::stoull(v, &used));
        if (used != v.size()) throw std::invalid_argument("trailing characters");
        return out;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + std::string(key) + "': cannot parse '" + std::string(value) + "'");
    }
}

bool parse_bool(std::string_view key, std::string_view value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no" || value.empty()) return false;
    throw ConfigError("config key '" + std::string(key) + "': expected true/false, got '" +
                      std::string(value) + "'");
}

std::string resolve_model_id(const ExperimentConfig& config) {
    if (config.serving_manifest.empty()) return config.generation_model_id;
    std::string from_manifest;
    try {
        from_manifest = nlohmann::json::parse(read_file(config.serving_manifest)).at("model_id").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(config.serving_manifest.string() + ": " + e.what());
    }
    if (from_manifest.empty()) throw ConfigError(config.serving_manifest.string() + ": empty model_id");
    if (!config.generation_model_id.empty() && config.generation_model_id != from_manifest) {
        throw ConfigError("generation_model_id '" + config.generation_model_id +
                          "' disagrees with serving manifest model_id '" + from_manifest + "'");
    }
    return from_manifest;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    return out + "\"";
}

std::string pad(std::string s, std::size_t width, bool right) {
    if (s.size() >= width) return s;
    const std::string fill(width - s.size(), ' ');
    return right ? fill + s : s + fill;
}

}  // namespace

std::string_view to_string(Method method) noexcept {
    switch (method) {
        case Method::simple: return "simple";
        case Method::rag: return "rag";
        case Method::finetuned: return "finetuned";
        case Method::rag_finetuned: return "rag_finetuned";
    }
    return "simple";
}

Method method_from_string(std::string_view name) {
    for (auto m : kMethodOrder) {
        if (to_string(m) == name) return m;
    }
    throw ConfigError("unknown method '" + std::string(name) +
                      "' (expected simple, rag, finetuned or rag_finetuned)");
}

// ---------------------------------------------------------------------------
// Config

const std::vector<std::string>& ExperimentConfig::keys() {
    static const std::vector<std::string> k = {
        "dataset_name",       "bundle_path",        "method",
        "generation_endpoint", "generation_model_id", "model_label",
        "serving_manifest",   "embedding_endpoint", "embedding_model",
        "store_path",         "template_path",      "demo_template_path",
        "k",                  "max_new_tokens",     "temperature",
        "stop",               "parallelism",        "cache_path",
        "output_dir",         "seed",               "allow_train_overlap_prompting",
        "normalization_policy", "eval_mode"};
    return k;
}

void ExperimentConfig::set(std::string_view key, std::string_view raw) {
    const auto value = trim(raw);
    if (key == "dataset_name") dataset_name = canonical_dataset_name(value);
    else if (key == "bundle_path") bundle_path = value;
    else if (key == "method") method = method_from_string(value);
    else if (key == "generation_endpoint") generation_endpoint = value;
    else if (key == "generation_model_id") generation_model_id = value;
    else if (key == "model_label") model_label = value;
    else if (key == "serving_manifest") serving_manifest = value;
    else if (key == "embedding_endpoint") embedding_endpoint = value;
    else if (key == "embedding_model") embedding_model = value;
    else if (key == "store_path") store_path = value;
    else if (key == "template_path") template_path = value;
    else if (key == "demo_template_path") demo_template_path = value;
    else if (key == "k") k = parse_number<std::size_t>(key, value);
    else if (key == "max_new_tokens") max_new_tokens = parse_number<int>(key, value);
    else if (key == "temperature") temperature = parse_number<double>(key, value);
    else if (key == "stop") {
        try {
            stop = nlohmann::json::parse(value).get<std::vector<std::string>>();
        } catch (const nlohmann::json::exception&) {
            throw ConfigError("config key 'stop': expected a JSON array of strings, got '" + value + "'");
        }
    } else if (key == "parallelism") parallelism = parse_number<int>(key, value);
    else if (key == "cache_path") cache_path = value;
    else if (key == "output_dir") output_dir = value;
    else if (key == "seed") seed = parse_number<std::uint64_t>(key, value);
    else if (key == "allow_train_overlap_prompting") allow_train_overlap_prompting = parse_bool(key, value);
    else if (key == "normalization_policy") {
        NormalizationPolicy::from_name(value);
        normalization_policy = value;
    } else if (key == "eval_mode") eval_mode = scoring_mode_from_string(value);
    else throw ConfigError("unknown config key '" + std::string(key) + "'");
}

ExperimentConfig ExperimentConfig::parse(std::string_view text) {
    ExperimentConfig config;
    std::size_t line_no = 0;
    for (std::size_t pos = 0; pos <= text.size();) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        ++line_no;
        const auto line = trim(text.substr(pos, nl - pos));
        pos = nl + 1;
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        }
        config.set(trim(std::string_view(line).substr(0, eq)), std::string_view(line).substr(eq + 1));
    }
    return config;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
    return parse(read_file(path));
}

std::map<std::string, std::string> ExperimentConfig::to_map() const {
    return {
        {"dataset_name", dataset_name},
        {"bundle_path", bundle_path.string()},
        {"method", std::string(to_string(method))},
        {"generation_endpoint", generation_endpoint},
        {"generation_model_id", generation_model_id},
        {"model_label", model_label},
        {"serving_manifest", serving_manifest.string()},
        {"embedding_endpoint", embedding_endpoint},
        {"embedding_model", embedding_model},
        {"store_path", store_path.string()},
        {"template_path", template_path.string()},
        {"demo_template_path", demo_template_path.string()},
        {"k", std::to_string(k)},
        {"max_new_tokens", std::to_string(max_new_tokens)},
        {"temperature", nlohmann::json(temperature).dump()},
        {"stop", nlohmann::json(stop).dump()},
        {"parallelism", std::to_string(parallelism)},
        {"cache_path", cache_path.string()},
        {"output_dir", output_dir.string()},
        {"seed", std::to_string(seed)},
        {"allow_train_overlap_prompting", allow_train_overlap_prompting ? "true" : "false"},
        {"normalization_policy", normalization_policy},
        {"eval_mode", std::string(to_string(eval_mode))},
    };
}

ExperimentConfig ExperimentConfig::from_map(const std::map<std::string, std::string>& values) {
    ExperimentConfig config;
    for (const auto& [key, value] : values) config.set(key, value);
    return config;
}

std::string ExperimentConfig::to_text() const {
    const auto values = to_map();
    std::string out;
    for (const auto& key : keys()) out += key + " = " + values.at(key) + "\n";
    return out;
}

void ExperimentConfig::validate() const {
    auto require = [](bool ok, const std::string& what) {
        if (!ok) throw ConfigError(what);
    };
    require(!dataset_name.empty(), "dataset_name is required");
    require(!bundle_path.empty(), "bundle_path is required");
    require(!generation_endpoint.empty(), "generation_endpoint is required");
    require(!generation_model_id.empty() || !serving_manifest.empty(),
            "generation_model_id (or serving_manifest) is required");
    require(!output_dir.empty(), "output_dir is required");
    require(k >= 1, "k must be >= 1");
    require(max_new_tokens >= 1, "max_new_tokens must be >= 1");
    require(temperature >= 0.0, "temperature must be >= 0");
    require(parallelism >= 1, "parallelism must be >= 1");
    NormalizationPolicy::from_name(normalization_policy);
    if (uses_retrieval(method)) {
        require(!embedding_endpoint.empty(), std::string(to_string(method)) + " needs embedding_endpoint");
        require(!store_path.empty(), std::string(to_string(method)) + " needs store_path (a built index)");
    }
    if (is_semeval(dataset_name)) {
        require(method != Method::rag_finetuned,
                "rag_finetuned is not available for SemEVAL: it has no split held out from training "
                "for the prompt dataset, so fine-tuned generators have seen the retrieval corpus");
        require(method != Method::rag || allow_train_overlap_prompting,
                "rag on SemEVAL draws demonstrations from the training split that also forms the prompt "
                "dataset; pass allow_train_overlap_prompting = true to run it anyway");
    }
}

// ---------------------------------------------------------------------------
// Manifest

const std::optional<MetricsReport>& RunManifest::primary_report() const {
    return config.eval_mode == ScoringMode::positive_class ? positive_class : all_class;
}

nlohmann::ordered_json RunManifest::to_json() const {
    nlohmann::ordered_json j;
    nlohmann::ordered_json cfg;
    const auto values = config.to_map();
    for (const auto& key : ExperimentConfig::keys()) cfg[key] = values.at(key);
    j["config"] = cfg;
    j["dataset_counts"] = dataset_counts;
    j["store_fingerprint"] = store_fingerprint;
    j["started_at"] = started_at;
    j["finished_at"] = finished_at;
    j["cache_hits"] = cache_hits;
    j["cache_misses"] = cache_misses;
    j["unparseable_count"] = unparseable_count;
    j["completed"] = completed;
    j["total"] = total;
    j["complete"] = complete;
    nlohmann::ordered_json metrics = nlohmann::ordered_json::object();
    if (positive_class) metrics["positive_class"] = nlohmann::json(*positive_class);
    if (all_class) metrics["all_class"] = nlohmann::json(*all_class);
    j["metrics"] = metrics;
    return j;
}

RunManifest RunManifest::from_json(const nlohmann::json& j) {
    RunManifest m;
    m.config = ExperimentConfig::from_map(j.at("config").get<std::map<std::string, std::string>>());
    m.dataset_counts = j.at("dataset_counts").get<std::map<std::string, std::size_t>>();
    m.store_fingerprint = j.at("store_fingerprint").get<std::string>();
    m.started_at = j.at("started_at").get<std::string>();
    m.finished_at = j.at("finished_at").get<std::string>();
    m.cache_hits = j.at("cache_hits").get<std::size_t>();
    m.cache_misses = j.at("cache_misses").get<std::size_t>();
    m.unparseable_count = j.at("unparseable_count").get<std::size_t>();
    m.completed = j.at("completed").get<std::size_t>();
    m.total = j.at("total").get<std::size_t>();
    m.complete = j.at("complete").get<bool>();
    const auto& metrics = j.at("metrics");
    if (metrics.contains("positive_class")) m.positive_class = metrics["positive_class"].get<MetricsReport>();
    if (metrics.contains("all_class")) m.all_class = metrics["all_class"].get<MetricsReport>();
    return m;
}

void RunManifest::save(const std::filesystem::path& path) const { write_file(path, to_json().dump(2) + "\n"); }

RunManifest RunManifest::load(const std::filesystem::path& path) {
    try {
        return from_json(nlohmann::json::parse(read_file(path)));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Predictions

std::string prediction_jsonl_line(const PredictionLine& line) {
    nlohmann::ordered_json j;
    j["instance_id"] = line.record.instance_id;
    j["prompt_hash"] = line.prompt_hash;
    j["raw_text"] = line.record.raw_text;
    j["normalized_label"] = line.record.normalized_label;
    j["match_kind"] = to_string(line.record.match_kind);
    j["scored_label"] = line.record.scored_label;
    return j.dump();
}

std::vector<PredictionLine> read_predictions_jsonl(const std::filesystem::path& path) {
    const auto text = read_file(path);
    std::vector<PredictionLine> out;
    std::size_t line_no = 0;
    for (std::size_t pos = 0; pos < text.size();) {
        auto nl = text.find('\n', pos);
        if (nl == std::string::npos) nl = text.size();
        ++line_no;
        const std::string_view line(text.data() + pos, nl - pos);
        pos = nl + 1;
        if (line.empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            PredictionLine p;
            p.record.instance_id = j.at("instance_id").get<std::string>();
            p.prompt_hash = j.at("prompt_hash").get<std::string>();
            p.record.raw_text = j.at("raw_text").get<std::string>();
            p.record.normalized_label = j.at("normalized_label").get<std::string>();
            p.record.match_kind = match_kind_from_string(j.at("match_kind").get<std::string>());
            p.record.scored_label = j.at("scored_label").get<std::string>();
            out.push_back(std::move(p));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Run

RunManifest run_experiment(const ExperimentConfig& config_in, const RunEnvironment& env) {
    config_in.validate();
    ExperimentConfig config = config_in;
    const auto model_id = resolve_model_id(config);
    config.generation_model_id = model_id;

    RunManifest manifest;
    manifest.config = config;
    manifest.started_at = utc_now_iso8601();

    const auto bundle = load_bundle(config.bundle_path);
    if (bundle.schema.dataset_name != canonical_dataset_name(config.dataset_name)) {
        throw ConfigError("bundle at " + config.bundle_path.string() + " holds " + bundle.schema.dataset_name +
                          ", config says " + config.dataset_name);
    }
    manifest.dataset_counts = {{"train", bundle.train.size()},
                               {"test", bundle.test.size()},
                               {"prompt", bundle.prompt.size()}};
    if (bundle.test.empty()) throw ConfigError("bundle has an empty test split");

    const auto query_template =
        config.template_path.empty() ? default_query_template() : load_template(config.template_path);
    const auto demo_template = config.demo_template_path.empty() ? default_demo_template()
                                                                 : load_template(config.demo_template_path);
    const LabelNormalizer normalizer(bundle.schema, NormalizationPolicy::from_name(config.normalization_policy));

    std::unordered_set<std::string_view> test_ids;
    for (const auto& inst : bundle.test) test_ids.insert(inst.id);

    // Retrieval setup, including the whole-store leakage scan, happens before
    // any generation request.
    std::unique_ptr<EmbeddingProvider> owned_embedder;
    EmbeddingProvider* embedder = env.embedder;
    std::optional<EmbeddingStore> store;
    std::unordered_map<std::string_view, const RelationInstance*> train_by_id;
    if (uses_retrieval(config.method)) {
        if (!embedder) {
            owned_embedder = make_embedding_provider(config.embedding_endpoint, config.embedding_model, env.retry);
            embedder = owned_embedder.get();
        }
        store.emplace(EmbeddingStore::load(config.store_path));
        store->require_fingerprint(embedder->fingerprint_for(store->dimension()));
        if (embedder->dimension() != 0 && embedder->dimension() != store->dimension()) {
            throw ConfigError("embedding provider dimension " + std::to_string(embedder->dimension()) +
                              " differs from store dimension " + std::to_string(store->dimension()));
        }
        for (const auto& inst : bundle.train) train_by_id.emplace(inst.id, &inst);
        for (const auto& id : store->ids()) {
            if (test_ids.contains(id)) {
                throw LeakageError("embedding store contains test-split instance " + id);
            }
            if (!train_by_id.contains(id)) {
                throw LeakageError("embedding store contains " + id + ", which is not a training instance");
            }
        }
        if (config.k > store->size()) {
            throw ConfigError("k=" + std::to_string(config.k) + " exceeds store size " +
                              std::to_string(store->size()));
        }
        manifest.store_fingerprint = store->fingerprint();
    }

    std::unique_ptr<GenerationEndpoint> owned_endpoint;
    GenerationEndpoint* endpoint = env.endpoint;
    if (!endpoint) {
        owned_endpoint = make_generation_endpoint(config.generation_endpoint);
        endpoint = owned_endpoint.get();
    }
    const auto cache_path = config.cache_path.empty() ? config.output_dir / "cache.jsonl" : config.cache_path;
    ResponseCache cache(cache_path, env.warn);
    LlmClient client(*endpoint, &cache, {config.parallelism, std::chrono::milliseconds(0), env.retry});

    const auto n = bundle.test.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(config.seed);
    std::shuffle(order.begin(), order.end(), rng);

    auto predict = [&](const RelationInstance& inst) {
        PromptRecord prompt;
        if (store) {
            const auto query = embed_text(*embedder, inst.sentence());
            const auto hits = store->query_top_k(embedder->fingerprint_for(store->dimension()), query,
                                                 config.k, inst.id);
            std::vector<RelationInstance> examples;
            examples.reserve(hits.size());
            for (const auto& hit : hits) {
                if (test_ids.contains(hit.neighbor_id)) {
                    throw LeakageError("retrieval for " + inst.id + " returned test instance " + hit.neighbor_id);
                }
                examples.push_back(*train_by_id.at(hit.neighbor_id));
            }
            prompt = render_augmented_query(inst, examples, bundle.schema, query_template, demo_template);
        } else {
            prompt = render_simple_query(inst, bundle.schema, query_template);
        }
        GenerationRequest request{model_id, prompt.prompt_text, config.max_new_tokens, config.temperature,
                                  config.stop};
        const auto response = client.complete(request);
        auto normalized = normalizer.normalize(response.raw_text);
        return PredictionLine{PredictionRecord{inst.id, response.raw_text, std::move(normalized.normalized_label),
                                               normalized.match_kind, std::move(normalized.scored_label)},
                              sha256_hex(prompt.prompt_text)};
    };

    std::vector<std::optional<PredictionLine>> results(n);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> workers;
        const auto worker_count = std::min<std::size_t>(static_cast<std::size_t>(config.parallelism), n);
        for (std::size_t w = 0; w < worker_count; ++w) {
            workers.emplace_back([&] {
                while (!failed.load()) {
                    const auto slot = next.fetch_add(1);
                    if (slot >= n) return;
                    const auto index = order[slot];
                    try {
                        results[index] = predict(bundle.test[index]);
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (!error) error = std::current_exception();
                        failed = true;
                    }
                }
            });
        }
    }

    manifest.total = n;
    manifest.cache_hits = client.cache_hits();
    manifest.cache_misses = client.cache_misses();
    std::string lines;
    std::vector<PredictionRecord> records;
    records.reserve(n);
    for (const auto& r : results) {
        if (!r) continue;
        lines += prediction_jsonl_line(*r);
        lines.push_back('\n');
        records.push_back(r->record);
        if (r->record.match_kind == MatchKind::unparseable) ++manifest.unparseable_count;
    }
    manifest.completed = records.size();
    std::filesystem::create_directories(config.output_dir);

    if (error) {
        write_file(config.output_dir / "predictions.partial.jsonl", lines);
        manifest.finished_at = utc_now_iso8601();
        manifest.complete = false;
        manifest.save(config.output_dir / "manifest.json");
        std::rethrow_exception(error);
    }

    std::filesystem::remove(config.output_dir / "predictions.partial.jsonl");
    write_file(config.output_dir / "predictions.jsonl", lines);
    const auto golds = gold_map(bundle.test);
    manifest.positive_class = score_positive_class(records, golds, bundle.schema);
    manifest.all_class = score_all_class(records, golds, bundle.schema);
    manifest.complete = true;
    manifest.finished_at = utc_now_iso8601();
    manifest.save(config.output_dir / "manifest.json");
    emit_report(std::span(&manifest, 1), config.output_dir);
    return manifest;
}

RunManifest resume(const std::filesystem::path& manifest_path,
                   const std::map<std::string, std::string>& overrides, const RunEnvironment& env) {
    const auto previous = RunManifest::load(manifest_path);
    auto config = previous.config;
    for (const auto& [key, value] : overrides) config.set(key, value);
    const auto before = previous.config.to_map();
    const auto after = config.to_map();
    std::string drift;
    for (const auto& [key, value] : after) {
        if (before.at(key) != value) drift += "\n  " + key + ": '" + before.at(key) + "' -> '" + value + "'";
    }
    if (!drift.empty()) throw ConfigError("config drift against " + manifest_path.string() + ":" + drift);
    return run_experiment(config, env);
}

// ---------------------------------------------------------------------------
// Reports

RenderedReport render_report(std::span<const RunManifest> manifests) {
    std::vector<std::string> models;
    std::vector<std::string> datasets;
    auto remember = [](std::vector<std::string>& seen, const std::string& v) {
        if (std::find(seen.begin(), seen.end(), v) == seen.end()) seen.push_back(v);
    };
    for (const auto& m : manifests) {
        remember(models, m.config.display_model());
        remember(datasets, canonical_dataset_name(m.config.dataset_name));
    }
    std::stable_sort(datasets.begin(), datasets.end(), [](const std::string& a, const std::string& b) {
        auto rank = [](const std::string& d) {
            const auto it = std::find(std::begin(kDatasetOrder), std::end(kDatasetOrder), d);
            return static_cast<std::size_t>(it - std::begin(kDatasetOrder));
        };
        return rank(a) < rank(b);
    });

    // (model, method, dataset) -> cell; later manifests replace earlier ones.
    std::map<std::tuple<std::string, Method, std::string>, std::array<std::string, 3>> cells;
    std::vector<std::pair<std::string, Method>> rows;
    for (const auto& m : manifests) {
        const auto model = m.config.display_model();
        const auto& report = m.primary_report();
        std::array<std::string, 3> cell{"-", "-", "-"};
        if (report) cell = {percent(report->precision), percent(report->recall), percent(report->f1)};
        cells[{model, m.config.method, canonical_dataset_name(m.config.dataset_name)}] = cell;
        if (std::find(rows.begin(), rows.end(), std::pair{model, m.config.method}) == rows.end()) {
            rows.emplace_back(model, m.config.method);
        }
    }
    std::stable_sort(rows.begin(), rows.end(), [&](const auto& a, const auto& b) {
        const auto ma = std::find(models.begin(), models.end(), a.first) - models.begin();
        const auto mb = std::find(models.begin(), models.end(), b.first) - models.begin();
        if (ma != mb) return ma < mb;
        return static_cast<int>(a.second) < static_cast<int>(b.second);
    });

    std::size_t model_w = 5;
    for (const auto& m : models) model_w = std::max(model_w, m.size());
    constexpr std::size_t method_w = 13;
    constexpr std::size_t value_w = 7;
    const std::size_t group_w = 3 * value_w;

    RenderedReport out;
    std::string head1 = pad("Model", model_w, false) + "  " + pad("Method", method_w, false);
    std::string head2 = std::string(model_w + 2 + method_w, ' ');
    for (const auto& d : datasets) {
        head1 += " | " + pad(d, group_w, false);
        head2 += " | " + pad("P(%)", value_w, true) + pad("R(%)", value_w, true) + pad("F1(%)", value_w, true);
    }
    out.text = head1 + "\n" + head2 + "\n";
    out.csv = "model,method";
    for (const auto& d : datasets) out.csv += "," + csv_field(d + " P") + "," + csv_field(d + " R") + "," + csv_field(d + " F1");
    out.csv += "\n";

    for (const auto& [model, method] : rows) {
        std::string line = pad(model, model_w, false) + "  " + pad(std::string(to_string(method)), method_w, false);
        std::string csv = csv_field(model) + "," + std::string(to_string(method));
        for (const auto& d : datasets) {
            auto it = cells.find({model, method, d});
            const std::array<std::string, 3> cell =
                it == cells.end() ? std::array<std::string, 3>{"-", "-", "-"} : it->second;
            line += " | ";
            for (const auto& v : cell) {
                line += pad(v, value_w, true);
                csv += "," + (v == "-" ? std::string() : v);
            }
        }
        out.text += line + "\n";
        out.csv += csv + "\n";
    }
    return out;
}

RenderedReport emit_report(std::span<const RunManifest> manifests, const std::filesystem::path& out_dir) {
    if (manifests.empty()) throw ValidationError("emit_report needs at least one manifest");
    auto report = render_report(manifests);
    write_file(out_dir / "report.txt", report.text);
    write_file(out_dir / "report.csv", report.csv);
    return report;
}

}  // namespace relex
