#include "relex/evaluation.hpp"

#include <cstdio>
#include <unordered_set>

#include "relex/error.hpp"

namespace relex {

namespace {

void check_inputs(std::span<const PredictionRecord> preds, const GoldMap& golds,
                  const RelationSchema& schema) {
    if (preds.empty()) throw ValidationError("no predictions to score");
    std::unordered_set<std::string_view> seen;
    std::string missing;
    std::string duplicates;
    for (const auto& p : preds) {
        if (!seen.insert(p.instance_id).second) duplicates += " " + p.instance_id;
        auto it = golds.find(p.instance_id);
        if (it == golds.end()) {
            missing += " " + p.instance_id;
            continue;
        }
        if (!schema.contains(it->second)) {
            throw ValidationError("gold label '" + it->second + "' of " + p.instance_id + " not in schema");
        }
        if (!schema.contains(p.scored_label)) {
            throw ValidationError("scored label '" + p.scored_label + "' of " + p.instance_id +
                                  " not in schema");
        }
    }
    if (!duplicates.empty()) throw ValidationError("duplicate prediction ids:" + duplicates);
    if (!missing.empty()) throw ValidationError("predictions without a gold label:" + missing);
}

MetricsReport finish(MetricsReport r, std::span<const PredictionRecord> preds) {
    const auto prf = micro_prf(r.tp, r.fp, r.fn);
    r.precision = prf.precision;
    r.recall = prf.recall;
    r.f1 = prf.f1;
    r.total = preds.size();
    for (const auto& p : preds) {
        if (p.match_kind == MatchKind::unparseable) ++r.unparseable_count;
    }
    return r;
}

}  // namespace

std::string_view to_string(ScoringMode mode) noexcept {
    return mode == ScoringMode::positive_class ? "positive_class" : "all_class";
}

ScoringMode scoring_mode_from_string(std::string_view name) {
    if (name == "positive_class") return ScoringMode::positive_class;
    if (name == "all_class") return ScoringMode::all_class;
    throw ConfigError("unknown scoring mode '" + std::string(name) + "'");
}

Prf micro_prf(std::size_t tp, std::size_t fp, std::size_t fn) noexcept {
    Prf out;
    if (tp + fp) out.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    if (tp + fn) out.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    if (out.precision + out.recall > 0.0) {
        out.f1 = 2.0 * out.precision * out.recall / (out.precision + out.recall);
    }
    return out;
}

GoldMap gold_map(std::span<const RelationInstance> instances) {
    GoldMap golds;
    golds.reserve(instances.size());
    for (const auto& inst : instances) golds.emplace(inst.id, inst.gold_label);
    return golds;
}

MetricsReport score_positive_class(std::span<const PredictionRecord> preds, const GoldMap& golds,
                                   const RelationSchema& schema) {
    check_inputs(preds, golds, schema);
    MetricsReport r;
    r.mode = ScoringMode::positive_class;
    for (const auto& p : preds) {
        const auto& gold = golds.at(p.instance_id);
        const auto& pred = p.scored_label;
        const bool gold_pos = !schema.is_negative(gold);
        const bool pred_pos = !schema.is_negative(pred);
        if (pred == gold) {
            if (gold_pos) {
                ++r.tp;
                ++r.per_label[gold].tp;
            }
            continue;
        }
        if (pred_pos) {
            ++r.fp;
            ++r.per_label[pred].fp;
        }
        if (gold_pos) {
            ++r.fn;
            ++r.per_label[gold].fn;
        }
    }
    return finish(std::move(r), preds);
}

MetricsReport score_all_class(std::span<const PredictionRecord> preds, const GoldMap& golds,
                              const RelationSchema& schema) {
    check_inputs(preds, golds, schema);
    MetricsReport r;
    r.mode = ScoringMode::all_class;
    for (const auto& p : preds) {
        const auto& gold = golds.at(p.instance_id);
        const auto& pred = p.scored_label;
        if (pred == gold) {
            ++r.tp;
            ++r.per_label[gold].tp;
        } else {
            ++r.fp;
            ++r.per_label[pred].fp;
            ++r.fn;
            ++r.per_label[gold].fn;
        }
    }
    return finish(std::move(r), preds);
}

MetricsReport score(ScoringMode mode, std::span<const PredictionRecord> preds, const GoldMap& golds,
                    const RelationSchema& schema) {
    return mode == ScoringMode::positive_class ? score_positive_class(preds, golds, schema)
                                               : score_all_class(preds, golds, schema);
}

void to_json(nlohmann::json& j, const MetricsReport& r) {
    nlohmann::json per_label = nlohmann::json::object();
    for (const auto& [label, c] : r.per_label) per_label[label] = {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}};
    j = nlohmann::json{{"mode", to_string(r.mode)},
                       {"tp", r.tp},
                       {"fp", r.fp},
                       {"fn", r.fn},
                       {"precision", r.precision},
                       {"recall", r.recall},
                       {"f1", r.f1},
                       {"per_label", per_label},
                       {"unparseable_count", r.unparseable_count},
                       {"total", r.total}};
}

void from_json(const nlohmann::json& j, MetricsReport& r) {
    r.mode = scoring_mode_from_string(j.at("mode").get<std::string>());
    r.tp = j.at("tp").get<std::size_t>();
    r.fp = j.at("fp").get<std::size_t>();
    r.fn = j.at("fn").get<std::size_t>();
    r.precision = j.at("precision").get<double>();
    r.recall = j.at("recall").get<double>();
    r.f1 = j.at("f1").get<double>();
    r.per_label.clear();
    for (const auto& [label, c] : j.at("per_label").items()) {
        r.per_label[label] = {c.at("tp").get<std::size_t>(), c.at("fp").get<std::size_t>(),
                              c.at("fn").get<std::size_t>()};
    }
    r.unparseable_count = j.at("unparseable_count").get<std::size_t>();
    r.total = j.at("total").get<std::size_t>();
}

std::string percent(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", value * 100.0);
    return buf;
}

std::string format_metrics(const MetricsReport& r) {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "%s\n"
                  "%6s %6s %6s\n"
                  "%6s %6s %6s\n"
                  "tp=%zu fp=%zu fn=%zu total=%zu unparseable=%zu\n",
                  std::string(to_string(r.mode)).c_str(), "P(%)", "R(%)", "F1(%)", percent(r.precision).c_str(),
                  percent(r.recall).c_str(), percent(r.f1).c_str(), r.tp, r.fp, r.fn, r.total,
                  r.unparseable_count);
    return buf;
}

}  // namespace relex
