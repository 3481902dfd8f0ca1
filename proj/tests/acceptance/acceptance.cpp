// Prints one PASS / FAIL / SKIP line per acceptance criterion. Exit status is
// nonzero if any criterion fails; skips (missing licensed data) do not fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "relex/dataset.hpp"
#include "relex/embedding.hpp"
#include "relex/error.hpp"
#include "relex/evaluation.hpp"
#include "relex/normalization.hpp"
#include "relex/runner.hpp"
#include "run_fixtures.hpp"

using namespace relex;
using namespace relex::testing;
namespace fs = std::filesystem;

namespace {

struct Skip {
    std::string why;
};

struct Failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& what) {
    if (!ok) throw Failure(what);
}

template <class A, class B>
void require_eq(const A& actual, const B& expected, const std::string& what) {
    if (!(actual == expected)) {
        std::ostringstream os;
        os << what << ": got " << actual << ", expected " << expected;
        throw Failure(os.str());
    }
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::optional<fs::path> env_dir(const char* name) {
    const char* v = std::getenv(name);
    if (!v || !*v) return std::nullopt;
    return fs::path(v);
}

// First regular file in `dir` whose lowercased name contains every fragment.
std::optional<fs::path> find_file(const fs::path& dir, std::initializer_list<std::string_view> fragments) {
    std::vector<fs::path> hits;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        std::string name = e.path().filename().string();
        for (auto& c : name) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        bool all = true;
        for (auto f : fragments) all = all && name.find(f) != std::string::npos;
        if (all) hits.push_back(e.path());
    }
    std::sort(hits.begin(), hits.end());
    if (hits.empty()) return std::nullopt;
    return hits.front();
}

RunEnvironment quiet_env(GenerationEndpoint* endpoint = nullptr) {
    RunEnvironment env;
    env.endpoint = endpoint;
    env.retry = no_sleep_retry();
    env.warn = [](std::string_view) {};
    return env;
}

// ---------------------------------------------------------------------------

void semeval_counts() {
    const auto dir = env_dir("RELEX_SEMEVAL_DIR");
    if (!dir) throw Skip{"RELEX_SEMEVAL_DIR not set"};
    const auto train_file = find_file(*dir, {"train", ".txt"});
    const auto test_file = find_file(*dir, {"test", ".txt"});
    if (!train_file || !test_file) throw Skip{"no train/test .txt files under " + dir->string()};
    const auto train = load_semeval(*train_file, Split::train);
    const auto test = load_semeval(*test_file, Split::test);
    require_eq(train.size(), 8000u, "train size");
    require_eq(test.size(), 2717u, "test size");
    std::vector<RelationInstance> all = train;
    all.insert(all.end(), test.begin(), test.end());
    require_eq(derive_schema(all, "SemEVAL").labels.size(), 19u, "label count");
}

void tacred_counts_for(const char* env, const std::string& dataset, std::size_t n_train, std::size_t n_test,
                       std::size_t n_labels, std::vector<std::string>& checked) {
    const auto dir = env_dir(env);
    if (!dir) return;
    const auto train_file = find_file(*dir, {"train", ".json"});
    const auto test_file = find_file(*dir, {"test", ".json"});
    if (!train_file || !test_file) throw Failure(std::string(env) + " has no train/test .json files");
    const auto train = load_tacred_family(*train_file, dataset, Split::train);
    const auto test = load_tacred_family(*test_file, dataset, Split::test);
    require_eq(train.size(), n_train, dataset + " train size");
    require_eq(test.size(), n_test, dataset + " test size");
    std::vector<RelationInstance> all = train;
    all.insert(all.end(), test.begin(), test.end());
    require_eq(derive_schema(all, dataset).labels.size(), n_labels, dataset + " label count");
    if (dataset == "TACRED") {
        const auto negatives = std::count_if(test.begin(), test.end(),
                                             [](const auto& i) { return i.gold_label == "no_relation"; });
        require_eq(static_cast<std::size_t>(negatives), 12184u, "TACRED test no_relation count");
    }
    checked.push_back(dataset);
}

void tacred_family_counts() {
    std::vector<std::string> checked;
    tacred_counts_for("RELEX_TACRED_DIR", "TACRED", 68124, 15509, 42, checked);
    tacred_counts_for("RELEX_TACREV_DIR", "TACREV", 68124, 15509, 42, checked);
    tacred_counts_for("RELEX_RETACRED_DIR", "Re-TACRED", 58465, 13418, 40, checked);
    if (checked.empty()) throw Skip{"RELEX_TACRED_DIR, RELEX_TACREV_DIR and RELEX_RETACRED_DIR not set"};
}

void metrics_oracle() {
    std::mt19937_64 rng(20240601);
    for (int c = 0; c < 1000; ++c) {
        const std::size_t n_labels = 1 + rng() % 5;
        std::vector<std::string> labels = {"neg"};
        for (std::size_t l = 1; l < n_labels; ++l) labels.push_back("r" + std::to_string(l));
        RelationSchema schema{"acc", labels, "neg", false};
        std::sort(schema.labels.begin(), schema.labels.end());
        const std::size_t n = 1 + rng() % 50;
        std::vector<PredictionRecord> preds;
        GoldMap golds;
        std::vector<std::pair<std::string, std::string>> pairs;
        for (std::size_t i = 0; i < n; ++i) {
            const auto id = "x" + std::to_string(i);
            const auto gold = labels[rng() % labels.size()];
            const auto pred = rng() % 3 == 0 ? gold : labels[rng() % labels.size()];
            golds[id] = gold;
            preds.push_back({id, pred, pred, MatchKind::exact, pred});
            pairs.emplace_back(gold, pred);
        }
        for (bool positive : {true, false}) {
            const auto got = positive ? score_positive_class(preds, golds, schema) : score_all_class(preds, golds, schema);
            const auto want = oracle_score(pairs, schema.labels, "neg", positive);
            const std::string tag = "case " + std::to_string(c) + (positive ? " positive_class" : " all_class");
            require(got.tp == want.tp && got.fp == want.fp && got.fn == want.fn, tag + ": counts differ");
            require(got.precision == want.precision && got.recall == want.recall && got.f1 == want.f1,
                    tag + ": P/R/F1 differ");
            require(got.per_label == want.per_label, tag + ": per-label counts differ");
        }
    }
}

void hand_case() {
    RelationSchema schema{"acc", {"neg", "r1", "r2"}, "neg", false};
    const std::vector<std::string> g = {"r1", "r1", "neg", "neg"};
    const std::vector<std::string> p = {"r1", "neg", "r2", "neg"};
    std::vector<PredictionRecord> preds;
    GoldMap golds;
    for (std::size_t i = 0; i < g.size(); ++i) {
        golds["h" + std::to_string(i)] = g[i];
        preds.push_back({"h" + std::to_string(i), p[i], p[i], MatchKind::exact, p[i]});
    }
    const auto r = score_positive_class(preds, golds, schema);
    require_eq(r.precision, 0.5, "precision");
    require_eq(r.recall, 0.5, "recall");
    require_eq(r.f1, 0.5, "f1");
}

void retrieval_oracle() {
    std::mt19937_64 rng(77);
    std::normal_distribution<float> gauss;
    for (int s = 0; s < 200; ++s) {
        const std::size_t dim = 1 + rng() % 64;
        const std::size_t size = 1 + rng() % 5000;
        // Every fourth store uses small integer coordinates so exact ties occur.
        const bool coarse = s % 4 == 0;
        auto draw = [&] {
            std::vector<float> v(dim);
            do {
                for (auto& x : v) x = coarse ? static_cast<float>(static_cast<int>(rng() % 5) - 2) : gauss(rng);
            } while (std::all_of(v.begin(), v.end(), [](float x) { return x == 0.0f; }));
            return v;
        };
        EmbeddingStore store(dim, "acc|random|" + std::to_string(dim));
        std::vector<std::pair<std::string, std::vector<float>>> rows;
        for (std::size_t i = 0; i < size; ++i) {
            char id[16];
            std::snprintf(id, sizeof id, "r%05zu", (i * 7919) % 100000);
            auto v = draw();
            store.add(id, v);
            rows.emplace_back(id, std::move(v));
        }
        for (int q = 0; q < 3; ++q) {
            const auto query = draw();
            const std::size_t k = 1 + rng() % std::min<std::size_t>(size, 20);
            const auto got = store.query_top_k(query, k);
            const auto want = oracle_top_k(rows, query, k);
            require_eq(got.size(), want.size(), "store " + std::to_string(s) + " result size");
            for (std::size_t i = 0; i < got.size(); ++i) {
                require(got[i].neighbor_id == want[i].first,
                        "store " + std::to_string(s) + " rank " + std::to_string(i) + ": " + got[i].neighbor_id +
                            " vs " + want[i].first);
            }
        }
        if (!coarse) {
            // In one dimension every same-sign row is parallel to the query, so
            // rank 1 is shared by the whole tie group and ids decide the order.
            const auto& [self_id, self_vec] = rows[rng() % rows.size()];
            const auto all = store.query_top_k(self_vec, size);
            const auto self = std::find_if(all.begin(), all.end(),
                                           [&](const auto& r) { return r.neighbor_id == self_id; });
            const std::string tag = "self retrieval in store " + std::to_string(s);
            require(self != all.end(), tag + ": missing");
            require(std::abs(self->similarity - 1.0) <= 1e-9, tag + ": similarity off by more than 1e-9");
            if (dim >= 2) require_eq(all.front().neighbor_id, self_id, tag);
            for (auto it = all.begin(); it != self; ++it) {
                require(it->similarity == self->similarity, tag + ": " + it->neighbor_id + " ranks above");
            }
        }
    }
}

void normalization_fixed_points() {
    for (const char* name : {"TACRED", "TACREV", "Re-TACRED", "SemEVAL"}) {
        const LabelNormalizer normalizer(reference_schema(name));
        require(!normalizer.schema().labels.empty(), std::string(name) + " has no labels");
        for (const auto& label : normalizer.schema().labels) {
            const auto r = normalizer.normalize(label);
            require(r.normalized_label == label && r.match_kind == MatchKind::exact,
                    std::string(name) + ": '" + label + "' is not a fixed point");
        }
    }
    const LabelNormalizer semeval(reference_schema("SemEVAL"));
    for (const auto& [mine, other] : {std::pair<std::string, std::string>{"Entity-Origin(e1,e2)", "Entity-Origin(e2,e1)"},
                                      {"Entity-Origin(e2,e1)", "Entity-Origin(e1,e2)"}}) {
        for (const auto& raw : {mine, "The answer is " + mine + ".", canonicalize(mine), "\"" + mine + "\""}) {
            const auto r = semeval.normalize(raw);
            require(r.normalized_label != other, "'" + raw + "' matched " + other);
            require_eq(r.normalized_label, mine, "'" + raw + "'");
        }
    }
}

void end_to_end_mock_run() {
    TempDir tmp;
    const auto bundle = toy_bundle(50, 100, 3);
    save_bundle(bundle, tmp / "bundle");
    {
        std::ofstream fixture(tmp / "mock.jsonl");
        for (const auto& inst : bundle.test) {
            fixture << nlohmann::json{{"match", inst.tokens.back()}, {"completion", inst.gold_label}}.dump() << "\n";
        }
    }
    auto config = toy_config(tmp / "bundle", tmp / "run");
    config.generation_endpoint = "mock:" + (tmp / "mock.jsonl").string();
    const auto m = run_experiment(config, quiet_env());
    require(m.complete, "run incomplete");
    require_eq(percent(m.positive_class->f1), std::string("100.00"), "positive_class F1");
    require_eq(m.positive_class->f1, 1.0, "positive_class F1");
    require_eq(m.unparseable_count, 0u, "unparseable_count");
    require_eq(m.cache_misses, 100u, "first-run endpoint calls");

    // Resume through an endpoint that would fail every call.
    MockGenerationEndpoint dead;
    dead.fail_next(1000000, 500);
    const auto again = resume(config.output_dir / "manifest.json", {}, quiet_env(&dead));
    require_eq(dead.calls(), 0u, "endpoint calls on resume");
    require_eq(again.cache_hits, 100u, "cache hits on resume");
    require(again.positive_class == m.positive_class, "resumed metrics differ");
}

void leakage_guard() {
    TempDir tmp;
    const auto bundle = toy_bundle(40, 10, 5);
    save_bundle(bundle, tmp / "bundle");
    HashingEmbeddingProvider provider(64);
    auto store = build_store(bundle.train, provider);
    store.add(bundle.test[4].id, provider.embed(bundle.test[4].sentence()));
    store.save(tmp / "store.bin");
    auto config = toy_config(tmp / "bundle", tmp / "run", Method::rag);
    config.embedding_endpoint = "test";
    config.store_path = tmp / "store.bin";
    MockGenerationEndpoint endpoint({}, "no_relation");
    bool aborted = false;
    try {
        run_experiment(config, quiet_env(&endpoint));
    } catch (const LeakageError&) {
        aborted = true;
    }
    require(aborted, "run did not abort with a leakage error");
    require_eq(endpoint.calls(), 0u, "generation calls before abort");
}

void determinism() {
    TempDir tmp;
    const auto bundle = toy_bundle(80, 60, 9);
    write_toy_run_inputs(bundle, tmp / "bundle", tmp / "store.bin");
    std::string first;
    for (const char* out : {"a", "b"}) {
        auto config = toy_config(tmp / "bundle", tmp / out, Method::rag);
        config.embedding_endpoint = "test";
        config.store_path = tmp / "store.bin";
        config.k = 2;
        CallbackGenerationEndpoint endpoint(demo_copier(bundle));
        run_experiment(config, quiet_env(&endpoint));
        const auto text = slurp(config.output_dir / "predictions.jsonl");
        require(!text.empty(), "empty predictions");
        if (first.empty()) first = text;
        else require(text == first, "predictions.jsonl differs between runs");
    }
}

struct Criterion {
    const char* name;
    double budget_s;  // 0: no time bound
    std::function<void()> body;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {"dataset fidelity: SemEval 8000/2717/19", 5, semeval_counts},
        {"dataset fidelity: TACRED family counts", 30, tacred_family_counts},
        {"metrics oracle: 1000 randomized cases", 5, metrics_oracle},
        {"hand-derived scoring case: P=R=F1=0.5", 0, hand_case},
        {"retrieval oracle: 200 randomized stores", 60, retrieval_oracle},
        {"normalization fixed points and direction separation", 0, normalization_fixed_points},
        {"end-to-end mock run: F1=1, zero-call resume", 10, end_to_end_mock_run},
        {"leakage guard aborts before generation", 0, leakage_guard},
        {"determinism: byte-identical predictions", 0, determinism},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        std::string status = "PASS";
        std::string detail;
        try {
            c.body();
        } catch (const Skip& s) {
            status = "SKIP";
            detail = s.why;
        } catch (const std::exception& e) {
            status = "FAIL";
            detail = e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (status == "PASS" && c.budget_s > 0 && secs > c.budget_s) {
            status = "FAIL";
            char buf[64];
            std::snprintf(buf, sizeof buf, "took %.2fs, budget %.0fs", secs, c.budget_s);
            detail = buf;
        }
        failed += status == "FAIL";
        std::printf("%s  %-55s %8.3fs%s%s\n", status.c_str(), c.name, secs, detail.empty() ? "" : "  ",
                    detail.c_str());
        std::fflush(stdout);
    }
    return failed ? 1 : 0;
}
