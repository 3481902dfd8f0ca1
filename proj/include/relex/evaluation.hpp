#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>

#include <json.hpp>

#include "relex/dataset.hpp"
#include "relex/normalization.hpp"

namespace relex {

struct PredictionRecord {
    std::string instance_id;
    std::string raw_text;
    std::string normalized_label;
    MatchKind match_kind = MatchKind::unparseable;
    std::string scored_label;

    bool operator==(const PredictionRecord&) const = default;
};

enum class ScoringMode { positive_class, all_class };
std::string_view to_string(ScoringMode mode) noexcept;
ScoringMode scoring_mode_from_string(std::string_view name);

struct LabelCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    bool operator==(const LabelCounts&) const = default;
};

struct MetricsReport {
    ScoringMode mode = ScoringMode::positive_class;
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::map<std::string, LabelCounts> per_label;
    std::size_t unparseable_count = 0;
    std::size_t total = 0;

    bool operator==(const MetricsReport&) const = default;
};

struct Prf {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Micro precision/recall/F1 from pooled counts; every 0/0 is 0.
Prf micro_prf(std::size_t tp, std::size_t fp, std::size_t fn) noexcept;

using GoldMap = std::unordered_map<std::string, std::string>;

GoldMap gold_map(std::span<const RelationInstance> instances);

/// TACRED-style scoring: pairs where gold and prediction are both the negative
/// label contribute nothing. TP when scored == gold != negative; FP when
/// scored != negative and scored != gold; FN when gold != negative and scored != gold.
MetricsReport score_positive_class(std::span<const PredictionRecord> preds, const GoldMap& golds,
                                   const RelationSchema& schema);

/// Plain micro over every label including the negative one (P = R = accuracy).
MetricsReport score_all_class(std::span<const PredictionRecord> preds, const GoldMap& golds,
                              const RelationSchema& schema);

MetricsReport score(ScoringMode mode, std::span<const PredictionRecord> preds, const GoldMap& golds,
                    const RelationSchema& schema);

void to_json(nlohmann::json& j, const MetricsReport& report);
void from_json(const nlohmann::json& j, MetricsReport& report);

/// Aligned P/R/F1 (percent, two decimals) plus counts, for terminals.
std::string format_metrics(const MetricsReport& report);

/// Two decimals of 100 * value: 0.92 -> "92.00".
std::string percent(double value);

}  // namespace relex
