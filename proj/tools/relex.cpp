#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "relex/dataset.hpp"
#include "relex/embedding.hpp"
#include "relex/error.hpp"
#include "relex/evaluation.hpp"
#include "relex/prompting.hpp"
#include "relex/runner.hpp"

namespace fs = std::filesystem;
using namespace relex;

namespace {

std::string flag_name(std::string key) {
    std::replace(key.begin(), key.end(), '_', '-');
    return "--" + key;
}

// One optional --<key> per config key. Only flags actually given are returned.
struct ConfigOverrides {
    std::map<std::string, std::string> values;
    bool allow_overlap = false;

    void attach(CLI::App* cmd) {
        for (const auto& key : ExperimentConfig::keys()) {
            if (key == "allow_train_overlap_prompting") {
                cmd->add_flag(flag_name(key), allow_overlap, "Permit rag on datasets without a held-out prompt split");
                continue;
            }
            cmd->add_option(flag_name(key), values[key], "Override config key " + key);
        }
    }

    std::map<std::string, std::string> given(const CLI::App* cmd) const {
        std::map<std::string, std::string> out;
        for (const auto& key : ExperimentConfig::keys()) {
            if (cmd->count(flag_name(key)) == 0) continue;
            out[key] = key == "allow_train_overlap_prompting" ? "true" : values.at(key);
        }
        return out;
    }
};

int cmd_ingest(const std::string& dataset, const fs::path& train, const fs::path& test,
               const std::optional<fs::path>& prompt, const fs::path& out) {
    const auto name = canonical_dataset_name(dataset);
    std::vector<RelationInstance> train_set, test_set, prompt_set;
    if (is_semeval(name)) {
        if (prompt) throw ConfigError("SemEVAL has no prompt split; drop --prompt");
        train_set = load_semeval(train, Split::train);
        test_set = load_semeval(test, Split::test);
    } else {
        train_set = load_tacred_family(train, name, Split::train);
        test_set = load_tacred_family(test, name, Split::test);
        if (prompt) prompt_set = load_tacred_family(*prompt, name, Split::prompt);
    }
    std::vector<RelationInstance> all;
    all.reserve(train_set.size() + test_set.size() + prompt_set.size());
    all.insert(all.end(), train_set.begin(), train_set.end());
    all.insert(all.end(), test_set.begin(), test_set.end());
    all.insert(all.end(), prompt_set.begin(), prompt_set.end());
    // Named benchmarks keep their full label set even when a slice is ingested,
    // so prompts list every relation; labels outside it are still rejected.
    RelationSchema schema;
    if (expected_counts(name)) {
        schema = reference_schema(name);
        validate_labels(schema, all);
        std::set<std::string> seen;
        for (const auto& inst : all) seen.insert(inst.gold_label);
        seen.insert(schema.negative_label);
        if (seen.size() != schema.labels.size()) {
            std::fprintf(stderr, "relex: warning: %zu of the %zu %s relations occur in the input\n", seen.size(),
                         schema.labels.size(), name.c_str());
        }
    } else {
        schema = derive_schema(all, name);
    }
    const auto bundle = assemble_bundle(std::move(schema), std::move(train_set), std::move(test_set),
                                        std::move(prompt_set));
    save_bundle(bundle, out);

    std::printf("%s: train %zu, test %zu, prompt %zu, relations %zu\n", name.c_str(), bundle.train.size(),
                bundle.test.size(), bundle.prompt.size(), bundle.schema.labels.size());
    if (const auto expected = expected_counts(name)) {
        const bool prompt_ok = bundle.prompt.empty() || bundle.prompt.size() == expected->prompt;
        if (bundle.train.size() != expected->train || bundle.test.size() != expected->test || !prompt_ok) {
            std::fprintf(stderr,
                         "relex: warning: split sizes differ from the published %zu/%zu/%zu for %s\n",
                         expected->train, expected->test, expected->prompt, name.c_str());
        }
    }
    return 0;
}

int cmd_gen_prompts(const fs::path& bundle_dir, const std::string& split_name,
                    const std::optional<fs::path>& template_path, const fs::path& out) {
    const auto bundle = load_bundle(bundle_dir);
    auto split = split_from_string(split_name);
    if (split == Split::prompt && is_semeval(bundle.schema.dataset_name)) {
        std::fprintf(stderr, "relex: note: SemEVAL has no prompt split, using train\n");
        split = Split::train;
    }
    const auto& instances = bundle.split(split);
    if (instances.empty()) throw ConfigError("split '" + split_name + "' is empty in " + bundle_dir.string());
    const auto tmpl = template_path ? load_template(*template_path) : default_query_template();
    const auto records = build_prompt_dataset(instances, bundle.schema, tmpl);
    write_prompt_dataset(out, records);
    std::printf("wrote %zu prompt records to %s\n", records.size(), out.string().c_str());
    return 0;
}

int cmd_build_index(const fs::path& bundle_dir, const std::string& split_name, const std::string& provider_spec,
                    const std::string& model, const fs::path& out) {
    const auto split = split_from_string(split_name);
    if (split != Split::train) {
        throw ConfigError("the retrieval store is built from the train split only");
    }
    const auto bundle = load_bundle(bundle_dir);
    auto provider = make_embedding_provider(provider_spec, model);
    const auto store = build_store(bundle.train, *provider, [](std::size_t done, std::size_t total) {
        if (done % 1000 == 0 || done == total) std::fprintf(stderr, "\rembedded %zu/%zu", done, total);
    });
    std::fprintf(stderr, "\n");
    store.save(out);
    std::printf("%s: %zu vectors, dimension %zu\n", store.fingerprint().c_str(), store.size(), store.dimension());
    return 0;
}

void print_manifest(const RunManifest& m, const fs::path& out_dir) {
    std::printf("%s %s on %s: %zu/%zu predictions, %zu cache hits, %zu misses, %zu unparseable\n",
                m.config.display_model().c_str(), std::string(to_string(m.config.method)).c_str(),
                m.config.dataset_name.c_str(), m.completed, m.total, m.cache_hits, m.cache_misses,
                m.unparseable_count);
    if (m.positive_class) std::printf("%s", format_metrics(*m.positive_class).c_str());
    if (m.all_class) std::printf("%s", format_metrics(*m.all_class).c_str());
    std::printf("outputs in %s\n", out_dir.string().c_str());
}

int cmd_eval(const fs::path& preds_path, const fs::path& bundle_dir, const std::string& mode) {
    const auto bundle = load_bundle(bundle_dir);
    const auto lines = read_predictions_jsonl(preds_path);
    std::vector<PredictionRecord> records;
    records.reserve(lines.size());
    for (const auto& l : lines) records.push_back(l.record);
    const auto report = score(scoring_mode_from_string(mode), records, gold_map(bundle.test), bundle.schema);
    std::printf("%s", format_metrics(report).c_str());
    std::printf("%s\n", nlohmann::json(report).dump(2).c_str());
    return 0;
}

int cmd_report(const std::vector<fs::path>& manifest_paths, const fs::path& out) {
    std::vector<RunManifest> manifests;
    for (const auto& p : manifest_paths) manifests.push_back(RunManifest::load(p));
    fs::create_directories(out);
    const auto report = emit_report(manifests, out);
    std::printf("%s", report.text.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sentence-level relation extraction experiments with retrieval-augmented prompting"};
    app.require_subcommand(1);

    std::string dataset;
    fs::path train, test, out, bundle_dir, preds, config_path, manifest_path;
    std::optional<fs::path> prompt, template_path;
    std::string split = "prompt", index_split = "train", provider, model = "default", mode = "positive_class";
    std::vector<fs::path> manifests;

    auto* ingest = app.add_subcommand("ingest", "Load a benchmark into a canonical bundle directory");
    ingest->add_option("--dataset", dataset, "TACRED, TACREV, Re-TACRED or SemEVAL")->required();
    ingest->add_option("--train", train)->required()->check(CLI::ExistingFile);
    ingest->add_option("--test", test)->required()->check(CLI::ExistingFile);
    ingest->add_option("--prompt", prompt, "Third split (TACRED family dev set)")->check(CLI::ExistingFile);
    ingest->add_option("--out", out, "Bundle directory")->required();

    auto* gen = app.add_subcommand("gen-prompts", "Export the fine-tuning prompt dataset");
    gen->add_option("--bundle", bundle_dir)->required()->check(CLI::ExistingDirectory);
    gen->add_option("--split", split, "train, test or prompt")->capture_default_str();
    gen->add_option("--template", template_path)->check(CLI::ExistingFile);
    gen->add_option("--out", out, "JSONL file")->required();

    auto* index = app.add_subcommand("build-index", "Embed the train split into a retrieval store");
    index->add_option("--bundle", bundle_dir)->required()->check(CLI::ExistingDirectory);
    index->add_option("--split", index_split)->capture_default_str();
    index->add_option("--provider", provider, "Embedding endpoint URL or 'test'")->required();
    index->add_option("--model", model, "Embedding model name sent to the endpoint")->capture_default_str();
    index->add_option("--out", out, "Store file")->required();

    ConfigOverrides run_overrides;
    auto* run = app.add_subcommand("run", "Run one experiment");
    run->add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);
    run_overrides.attach(run);

    ConfigOverrides resume_overrides;
    auto* res = app.add_subcommand("resume", "Rerun a manifest, reusing cached responses");
    res->add_option("--manifest", manifest_path)->required()->check(CLI::ExistingFile);
    resume_overrides.attach(res);

    auto* eval = app.add_subcommand("eval", "Score a predictions file");
    eval->add_option("--preds", preds)->required()->check(CLI::ExistingFile);
    eval->add_option("--bundle", bundle_dir)->required()->check(CLI::ExistingDirectory);
    eval->add_option("--mode", mode, "positive_class or all_class")->capture_default_str();

    auto* report = app.add_subcommand("report", "Tabulate one or more run manifests");
    report->add_option("--manifests", manifests)->required()->check(CLI::ExistingFile);
    report->add_option("--out", out, "Directory for report.txt and report.csv")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (ingest->parsed()) return cmd_ingest(dataset, train, test, prompt, out);
        if (gen->parsed()) return cmd_gen_prompts(bundle_dir, split, template_path, out);
        if (index->parsed()) return cmd_build_index(bundle_dir, index_split, provider, model, out);
        if (run->parsed()) {
            auto config = config_path.empty() ? ExperimentConfig{} : ExperimentConfig::load(config_path);
            for (const auto& [key, value] : run_overrides.given(run)) config.set(key, value);
            const auto manifest = run_experiment(config);
            print_manifest(manifest, config.output_dir);
            return 0;
        }
        if (res->parsed()) {
            const auto manifest = resume(manifest_path, resume_overrides.given(res));
            print_manifest(manifest, manifest.config.output_dir);
            return 0;
        }
        if (eval->parsed()) return cmd_eval(preds, bundle_dir, mode);
        if (report->parsed()) return cmd_report(manifests, out);
    } catch (const LeakageError& e) {
        std::fprintf(stderr, "relex: leakage: %s\n", e.what());
        return 3;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "relex: config: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "relex: error: %s\n", e.what());
        return 1;
    }
    return 0;
}
