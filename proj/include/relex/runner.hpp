#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "relex/embedding.hpp"
#include "relex/evaluation.hpp"
#include "relex/llm_client.hpp"

namespace relex {

enum class Method { simple, rag, finetuned, rag_finetuned };
std::string_view to_string(Method method) noexcept;
Method method_from_string(std::string_view name);
constexpr bool uses_retrieval(Method m) noexcept { return m == Method::rag || m == Method::rag_finetuned; }

/// Everything one run needs. Persisted as flat `key = value` text; the keys are
/// the member names below, `stop` takes a JSON array of strings.
struct ExperimentConfig {
    std::string dataset_name;
    std::filesystem::path bundle_path;
    Method method = Method::simple;
    std::string generation_endpoint;
    std::string generation_model_id;
    std::string model_label;              // report row label, defaults to generation_model_id
    std::filesystem::path serving_manifest;  // optional, supplies generation_model_id
    std::string embedding_endpoint;       // "test", "test:<dim>" or URL; rag methods only
    std::string embedding_model = "default";
    std::filesystem::path store_path;
    std::filesystem::path template_path;       // empty: built-in default query template
    std::filesystem::path demo_template_path;  // empty: built-in demonstration template
    std::size_t k = 1;
    int max_new_tokens = 32;
    double temperature = 0.0;
    std::vector<std::string> stop{"\n"};
    int parallelism = 4;
    std::filesystem::path cache_path;
    std::filesystem::path output_dir;
    std::uint64_t seed = 0;
    bool allow_train_overlap_prompting = false;
    std::string normalization_policy = "containment-cascade";
    ScoringMode eval_mode = ScoringMode::positive_class;

    static const std::vector<std::string>& keys();

    /// Throws ConfigError for unknown keys or unparsable values.
    void set(std::string_view key, std::string_view value);
    static ExperimentConfig parse(std::string_view text);
    static ExperimentConfig load(const std::filesystem::path& path);

    /// Canonical string form of every key.
    std::map<std::string, std::string> to_map() const;
    static ExperimentConfig from_map(const std::map<std::string, std::string>& values);
    std::string to_text() const;

    /// Data-hygiene and completeness rules; throws ConfigError.
    void validate() const;
    std::string display_model() const { return model_label.empty() ? generation_model_id : model_label; }
};

struct RunManifest {
    ExperimentConfig config;
    std::map<std::string, std::size_t> dataset_counts;  // train / test / prompt
    std::string store_fingerprint;
    std::string started_at;
    std::string finished_at;
    std::size_t cache_hits = 0;
    std::size_t cache_misses = 0;
    std::size_t unparseable_count = 0;
    std::size_t completed = 0;
    std::size_t total = 0;
    bool complete = false;
    std::optional<MetricsReport> positive_class;
    std::optional<MetricsReport> all_class;

    /// The report matching config.eval_mode.
    const std::optional<MetricsReport>& primary_report() const;

    nlohmann::ordered_json to_json() const;
    static RunManifest from_json(const nlohmann::json& j);
    void save(const std::filesystem::path& path) const;
    static RunManifest load(const std::filesystem::path& path);
};

/// One predictions.jsonl line.
struct PredictionLine {
    PredictionRecord record;
    std::string prompt_hash;
};

std::string prediction_jsonl_line(const PredictionLine& line);
std::vector<PredictionLine> read_predictions_jsonl(const std::filesystem::path& path);

/// Overrides for what the config would otherwise construct.
struct RunEnvironment {
    GenerationEndpoint* endpoint = nullptr;
    EmbeddingProvider* embedder = nullptr;
    RetryPolicy retry{};
    WarningSink warn = stderr_warning;
};

/// Renders, generates (through the response cache), normalizes and scores every
/// test instance, then writes predictions.jsonl, manifest.json, report.txt and
/// report.csv into config.output_dir. If generation fails midway, completed
/// predictions go to predictions.partial.jsonl, the manifest is written with
/// complete = false and the error is rethrown; the cache makes a rerun resume.
RunManifest run_experiment(const ExperimentConfig& config, const RunEnvironment& env = {});

/// Reruns a manifest's config. Any override that changes the config aborts
/// with a ConfigError listing the differing keys.
RunManifest resume(const std::filesystem::path& manifest_path,
                   const std::map<std::string, std::string>& overrides = {},
                   const RunEnvironment& env = {});

struct RenderedReport {
    std::string text;
    std::string csv;
};

/// Rows are (model, method) with models in first-seen order and methods in the
/// order simple, rag, finetuned, rag_finetuned; column groups are datasets
/// (TACRED, TACREV, Re-TACRED, SemEVAL, then others as seen); cells are P/R/F1
/// percentages with two decimals, "-" when absent.
RenderedReport render_report(std::span<const RunManifest> manifests);
RenderedReport emit_report(std::span<const RunManifest> manifests, const std::filesystem::path& out_dir);

}  // namespace relex
