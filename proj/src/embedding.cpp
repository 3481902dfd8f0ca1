#include "relex/embedding.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "relex/error.hpp"
#include "relex/hashing.hpp"

namespace relex {

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);
static_assert(sizeof(float) == 4);

template <class T>
T to_little(T value) {
    if constexpr (std::endian::native == std::endian::big) {
        auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
        std::reverse(bytes.begin(), bytes.end());
        return std::bit_cast<T>(bytes);
    }
    return value;
}

template <class T>
void put_le(std::string& out, T value) {
    const auto le = to_little(value);
    char buf[sizeof(T)];
    std::memcpy(buf, &le, sizeof(T));
    out.append(buf, sizeof(T));
}

template <class T>
T get_le(std::string_view in, std::size_t& pos) {
    if (pos + sizeof(T) > in.size()) throw ParseError("embedding store: truncated record", pos);
    T value;
    std::memcpy(&value, in.data() + pos, sizeof(T));
    pos += sizeof(T);
    return to_little(value);
}

}  // namespace

double euclidean_norm(std::span<const float> v) {
    double sum = 0.0;
    for (float x : v) sum += static_cast<double>(x) * x;
    return std::sqrt(sum);
}

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size()) {
        throw ValidationError("cosine: dimension mismatch " + std::to_string(a.size()) + " vs " +
                              std::to_string(b.size()));
    }
    double dot = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) dot += static_cast<double>(a[i]) * b[i];
    const double na = euclidean_norm(a);
    const double nb = euclidean_norm(b);
    if (na == 0.0 || nb == 0.0) throw ValidationError("cosine: zero-norm vector");
    return dot / (na * nb);
}

// ---------------------------------------------------------------------------
// Providers

std::string EmbeddingProvider::fingerprint() const { return fingerprint_for(dimension()); }

std::string EmbeddingProvider::fingerprint_for(std::size_t dim) const {
    return name() + "|" + model() + "|" + std::to_string(dim);
}

HashingEmbeddingProvider::HashingEmbeddingProvider(std::size_t dimension) : dimension_(dimension) {
    if (dimension_ == 0) throw ConfigError("test embedding provider needs dimension >= 1");
}

std::vector<float> HashingEmbeddingProvider::embed(std::string_view text) {
    std::vector<double> sum(dimension_, 0.0);
    std::size_t tokens = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
        const auto begin = pos;
        while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
        if (pos == begin) break;
        std::uint64_t state = fnv1a64(text.substr(begin, pos - begin));
        for (auto& s : sum) {
            state = state * 6364136223846793005ULL + 1442695040888963407ULL;
            const double unit = static_cast<double>(state >> 11) * 0x1.0p-53;
            s += 2.0 * unit - 1.0;
        }
        ++tokens;
    }
    if (tokens == 0) throw ValidationError("cannot embed text without tokens");
    std::vector<float> out(dimension_);
    std::transform(sum.begin(), sum.end(), out.begin(),
                   [&](double s) { return static_cast<float>(s / static_cast<double>(tokens)); });
    return out;
}

HttpEmbeddingProvider::HttpEmbeddingProvider(std::string url, std::string model, RetryPolicy retry,
                                             std::size_t dimension)
    : poster_(std::move(url)), model_(std::move(model)), retry_(std::move(retry)), dimension_(dimension) {}

std::vector<float> HttpEmbeddingProvider::embed(std::string_view text) {
    const auto body = nlohmann::json{{"model", model_}, {"input", std::string(text)}}.dump();
    const auto reply = with_retries([&] { return poster_.post(body); }, retry_);
    std::vector<float> out;
    try {
        const auto j = nlohmann::json::parse(reply.body);
        out = j.at("embedding").get<std::vector<float>>();
    } catch (const nlohmann::json::exception& e) {
        throw ProtocolError(poster_.url() + ": bad embedding reply: " + e.what());
    }
    if (out.empty()) throw ProtocolError(poster_.url() + ": empty embedding");
    std::size_t unknown = 0;
    dimension_.compare_exchange_strong(unknown, out.size());
    return out;
}

std::unique_ptr<EmbeddingProvider> make_embedding_provider(std::string_view spec, std::string model,
                                                           RetryPolicy retry) {
    if (spec == "test") return std::make_unique<HashingEmbeddingProvider>();
    if (spec.starts_with("test:")) {
        const auto dim = std::stoul(std::string(spec.substr(5)));
        return std::make_unique<HashingEmbeddingProvider>(dim);
    }
    if (spec.starts_with("http://") || spec.starts_with("https://")) {
        return std::make_unique<HttpEmbeddingProvider>(std::string(spec), std::move(model),
                                                       std::move(retry));
    }
    throw ConfigError("embedding provider must be 'test' or an http(s) URL, got '" +
                      std::string(spec) + "'");
}

std::vector<float> embed_text(EmbeddingProvider& provider, std::string_view text) {
    if (text.empty()) throw ValidationError("cannot embed empty text");
    const auto expected = provider.dimension();
    auto v = provider.embed(text);
    if (expected != 0 && v.size() != expected) {
        throw ProtocolError("provider " + provider.name() + " returned dimension " +
                            std::to_string(v.size()) + ", expected " + std::to_string(expected));
    }
    return v;
}

// ---------------------------------------------------------------------------
// Store

EmbeddingStore::EmbeddingStore(std::size_t dimension, std::string provider_fingerprint)
    : dimension_(dimension), fingerprint_(std::move(provider_fingerprint)) {
    if (dimension_ == 0) throw ValidationError("embedding store dimension must be >= 1");
}

void EmbeddingStore::add(std::string id, std::span<const float> vector) {
    if (vector.size() != dimension_) {
        throw ValidationError("embedding for " + id + " has dimension " + std::to_string(vector.size()) +
                              ", store expects " + std::to_string(dimension_));
    }
    const double n = euclidean_norm(vector);
    if (!(n > 0.0) || !std::isfinite(n)) {
        throw ValidationError("embedding for " + id + " is a zero or non-finite vector");
    }
    if (index_.contains(id)) throw ValidationError("duplicate instance id in embedding store: " + id);
    index_.emplace(id, ids_.size());
    ids_.push_back(std::move(id));
    table_.insert(table_.end(), vector.begin(), vector.end());
    norms_.push_back(n);
}

std::span<const float> EmbeddingStore::vector(std::size_t row) const {
    if (row >= ids_.size()) throw std::out_of_range("embedding store row");
    return std::span(table_).subspan(row * dimension_, dimension_);
}

std::optional<std::size_t> EmbeddingStore::find(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

void EmbeddingStore::require_fingerprint(std::string_view fingerprint) const {
    if (fingerprint != fingerprint_) {
        throw ConfigError("embedding provider fingerprint '" + std::string(fingerprint) +
                          "' does not match store fingerprint '" + fingerprint_ + "'");
    }
}

std::vector<RetrievalResult> EmbeddingStore::query_top_k(std::span<const float> query, std::size_t k,
                                                         std::string_view query_id) const {
    if (query.size() != dimension_) {
        throw ValidationError("query dimension " + std::to_string(query.size()) +
                              " does not match store dimension " + std::to_string(dimension_));
    }
    if (k < 1 || k > size()) {
        throw ValidationError("k=" + std::to_string(k) + " outside [1, " + std::to_string(size()) + "]");
    }
    const double qn = euclidean_norm(query);
    if (qn == 0.0) throw ValidationError("query vector has zero norm");

    std::vector<double> sims(size());
    for (std::size_t row = 0; row < size(); ++row) {
        const float* v = table_.data() + row * dimension_;
        double dot = 0.0;
        for (std::size_t i = 0; i < dimension_; ++i) dot += static_cast<double>(query[i]) * v[i];
        sims[row] = dot / (qn * norms_[row]);
    }
    std::vector<std::size_t> order(size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto ranks_before = [&](std::size_t a, std::size_t b) {
        if (sims[a] != sims[b]) return sims[a] > sims[b];
        return ids_[a] < ids_[b];
    };
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      ranks_before);

    std::vector<RetrievalResult> out;
    out.reserve(k);
    for (std::size_t r = 0; r < k; ++r) {
        out.push_back({std::string(query_id), ids_[order[r]], sims[order[r]]});
    }
    return out;
}

std::vector<RetrievalResult> EmbeddingStore::query_top_k(std::string_view fingerprint,
                                                         std::span<const float> query, std::size_t k,
                                                         std::string_view query_id) const {
    require_fingerprint(fingerprint);
    return query_top_k(query, k, query_id);
}

void EmbeddingStore::save(const std::filesystem::path& path) const {
    nlohmann::ordered_json header;
    header["dimension"] = dimension_;
    header["count"] = size();
    header["provider_fingerprint"] = fingerprint_;
    std::string buf = header.dump() + "\n";
    buf.reserve(buf.size() + size() * (dimension_ * 4 + 24));
    for (std::size_t row = 0; row < size(); ++row) {
        put_le(buf, static_cast<std::uint32_t>(ids_[row].size()));
        buf += ids_[row];
        for (float x : vector(row)) put_le(buf, x);
    }
    write_file(path, buf);
}

EmbeddingStore EmbeddingStore::load(const std::filesystem::path& path) {
    const auto data = read_file(path);
    const auto nl = data.find('\n');
    if (nl == std::string::npos) throw ParseError(path.string() + ": missing store header line", 0);
    std::size_t dimension = 0;
    std::size_t count = 0;
    std::string fingerprint;
    try {
        const auto header = nlohmann::json::parse(std::string_view(data).substr(0, nl));
        dimension = header.at("dimension").get<std::size_t>();
        count = header.at("count").get<std::size_t>();
        fingerprint = header.at("provider_fingerprint").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": bad store header: " + e.what(), 0);
    }
    EmbeddingStore store(dimension, std::move(fingerprint));
    const std::string_view body(data);
    std::size_t pos = nl + 1;
    std::vector<float> row(dimension);
    for (std::size_t r = 0; r < count; ++r) {
        const auto len = get_le<std::uint32_t>(body, pos);
        if (pos + len > body.size()) throw ParseError(path.string() + ": truncated id", pos);
        std::string id(body.substr(pos, len));
        pos += len;
        for (auto& x : row) x = get_le<float>(body, pos);
        store.add(std::move(id), row);
    }
    if (pos != body.size()) {
        throw ParseError(path.string() + ": trailing bytes after " + std::to_string(count) + " records", pos);
    }
    return store;
}

bool EmbeddingStore::operator==(const EmbeddingStore& other) const {
    return dimension_ == other.dimension_ && fingerprint_ == other.fingerprint_ && ids_ == other.ids_ &&
           table_ == other.table_;
}

EmbeddingStore build_store(std::span<const RelationInstance> instances, EmbeddingProvider& provider,
                           const std::function<void(std::size_t, std::size_t)>& progress) {
    std::optional<EmbeddingStore> store;
    if (provider.dimension() != 0) store.emplace(provider.dimension(), provider.fingerprint());
    std::size_t done = 0;
    for (const auto& inst : instances) {
        std::vector<float> v;
        try {
            v = embed_text(provider, inst.sentence());
        } catch (const Error& e) {
            throw Error("embedding store build aborted after " + std::to_string(done) + " of " +
                        std::to_string(instances.size()) + " records at instance " + inst.id + ": " +
                        e.what());
        }
        if (!store) store.emplace(v.size(), provider.fingerprint_for(v.size()));
        store->add(inst.id, v);
        ++done;
        if (progress) progress(done, instances.size());
    }
    if (!store) throw ValidationError("cannot build an embedding store from zero instances");
    return std::move(*store);
}

}  // namespace relex
