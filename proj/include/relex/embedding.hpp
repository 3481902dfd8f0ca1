#pragma once

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "relex/dataset.hpp"
#include "relex/llm_client.hpp"

namespace relex {

/// dot(a, b) / (|a| |b|), accumulated in double. Throws ValidationError on a
/// dimension mismatch or a zero-norm input.
double cosine_similarity(std::span<const float> a, std::span<const float> b);

double euclidean_norm(std::span<const float> v);

// ---------------------------------------------------------------------------
// Providers

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;

    virtual std::string name() const = 0;
    virtual std::string model() const = 0;
    /// 0 while unknown (HTTP providers learn it from the first reply).
    virtual std::size_t dimension() const = 0;
    virtual std::vector<float> embed(std::string_view text) = 0;

    /// "<name>|<model>|<dimension>".
    std::string fingerprint() const;
    /// The fingerprint a store built by this provider with `dim` would carry.
    std::string fingerprint_for(std::size_t dim) const;
};

/// Offline deterministic provider. Each whitespace token is hashed with FNV-1a 64;
/// the hash seeds a 64-bit LCG (Knuth MMIX constants) whose top 53 bits give
/// `dimension` coordinates in [-1, 1). The sentence vector is the coordinate-wise
/// mean over tokens.
class HashingEmbeddingProvider final : public EmbeddingProvider {
public:
    explicit HashingEmbeddingProvider(std::size_t dimension = 64);

    std::string name() const override { return "test"; }
    std::string model() const override { return "fnv1a-lcg"; }
    std::size_t dimension() const override { return dimension_; }
    std::vector<float> embed(std::string_view text) override;

private:
    std::size_t dimension_;
};

/// POST {"model": ..., "input": text} -> {"embedding": [...]}.
class HttpEmbeddingProvider final : public EmbeddingProvider {
public:
    HttpEmbeddingProvider(std::string url, std::string model, RetryPolicy retry = {},
                          std::size_t dimension = 0);

    std::string name() const override { return "http"; }
    std::string model() const override { return model_; }
    std::size_t dimension() const override { return dimension_.load(); }
    std::vector<float> embed(std::string_view text) override;

private:
    HttpJsonPoster poster_;
    std::string model_;
    RetryPolicy retry_;
    std::atomic<std::size_t> dimension_;
};

/// "test" (optionally "test:<dim>") or an http(s) URL.
std::unique_ptr<EmbeddingProvider> make_embedding_provider(std::string_view spec,
                                                           std::string model = "default",
                                                           RetryPolicy retry = {});

/// Embeds non-empty text and checks the vector has the provider's dimension.
std::vector<float> embed_text(EmbeddingProvider& provider, std::string_view text);

// ---------------------------------------------------------------------------
// Store

struct RetrievalResult {
    std::string query_id;
    std::string neighbor_id;
    double similarity = 0.0;
};

/// Exact cosine index over a contiguous row-major vector table.
///
/// File layout (all integers and floats little-endian):
///
///     {"dimension":d,"count":n,"provider_fingerprint":"..."}\n
///     n times: uint32 id_length | id bytes (UTF-8) | d x float32
class EmbeddingStore {
public:
    EmbeddingStore(std::size_t dimension, std::string provider_fingerprint);

    /// Rejects duplicate ids, wrong dimensions and zero vectors.
    void add(std::string id, std::span<const float> vector);

    std::size_t size() const noexcept { return ids_.size(); }
    std::size_t dimension() const noexcept { return dimension_; }
    const std::string& fingerprint() const noexcept { return fingerprint_; }
    const std::string& id(std::size_t row) const { return ids_.at(row); }
    const std::vector<std::string>& ids() const noexcept { return ids_; }
    std::span<const float> vector(std::size_t row) const;
    double norm(std::size_t row) const { return norms_.at(row); }
    std::optional<std::size_t> find(std::string_view id) const;

    /// Throws ConfigError unless `fingerprint` equals the store's.
    void require_fingerprint(std::string_view fingerprint) const;

    /// The k most similar rows, similarity descending, ties by ascending id.
    std::vector<RetrievalResult> query_top_k(std::span<const float> query, std::size_t k,
                                             std::string_view query_id = {}) const;
    /// As above, after checking the caller's provider fingerprint.
    std::vector<RetrievalResult> query_top_k(std::string_view fingerprint,
                                             std::span<const float> query, std::size_t k,
                                             std::string_view query_id = {}) const;

    void save(const std::filesystem::path& path) const;
    static EmbeddingStore load(const std::filesystem::path& path);

    bool operator==(const EmbeddingStore& other) const;

private:
    std::size_t dimension_;
    std::string fingerprint_;
    std::vector<std::string> ids_;
    std::vector<float> table_;
    std::vector<double> norms_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// One record per instance over its sentence text, in input order. A provider
/// failure aborts with a message carrying the number of completed records.
EmbeddingStore build_store(std::span<const RelationInstance> instances, EmbeddingProvider& provider,
                           const std::function<void(std::size_t, std::size_t)>& progress = {});

}  // namespace relex
