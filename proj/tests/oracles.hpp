#pragma once

// Reference computations written independently of the library, used by the unit
// and acceptance tests to cross-check retrieval and scoring.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "relex/evaluation.hpp"

namespace relex::testing {

// Exhaustive scan: every similarity is computed, the full list is sorted, and
// the first k ids are returned.
inline std::vector<std::pair<std::string, double>> oracle_top_k(
    const std::vector<std::pair<std::string, std::vector<float>>>& rows, const std::vector<float>& q,
    std::size_t k) {
    double qq = 0.0;
    for (float x : q) qq += static_cast<double>(x) * x;
    std::vector<std::pair<std::string, double>> all;
    all.reserve(rows.size());
    for (const auto& [id, v] : rows) {
        double dot = 0.0, vv = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            dot += static_cast<double>(q[i]) * v[i];
            vv += static_cast<double>(v[i]) * v[i];
        }
        all.emplace_back(id, dot / (std::sqrt(qq) * std::sqrt(vv)));
    }
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    all.resize(std::min(k, all.size()));
    return all;
}

inline std::vector<std::string> oracle_top_k_ids(const std::vector<std::pair<std::string, std::vector<float>>>& rows,
                                                 const std::vector<float>& q, std::size_t k) {
    std::vector<std::string> out;
    for (const auto& [id, sim] : oracle_top_k(rows, q, k)) out.push_back(id);
    return out;
}

// Scoring from a full confusion matrix rather than per-pair rules.
struct OracleMetrics {
    std::size_t tp = 0, fp = 0, fn = 0;
    double precision = 0.0, recall = 0.0, f1 = 0.0;
    std::map<std::string, LabelCounts> per_label;
};

inline OracleMetrics oracle_score(const std::vector<std::pair<std::string, std::string>>& gold_pred,
                                  const std::vector<std::string>& labels, const std::string& negative,
                                  bool positive_class) {
    std::map<std::string, std::map<std::string, std::size_t>> m;  // m[gold][pred]
    for (const auto& [g, p] : gold_pred) ++m[g][p];
    auto cell = [&](const std::string& g, const std::string& p) -> std::size_t {
        auto row = m.find(g);
        if (row == m.end()) return 0;
        auto c = row->second.find(p);
        return c == row->second.end() ? 0 : c->second;
    };
    OracleMetrics out;
    for (const auto& l : labels) {
        if (positive_class && l == negative) continue;
        std::size_t row = 0, col = 0;
        for (const auto& other : labels) {
            row += cell(l, other);
            col += cell(other, l);
        }
        const LabelCounts c{cell(l, l), col - cell(l, l), row - cell(l, l)};
        out.tp += c.tp;
        out.fp += c.fp;
        out.fn += c.fn;
        if (c.tp || c.fp || c.fn) out.per_label[l] = c;
    }
    out.precision = out.tp + out.fp == 0 ? 0.0 : static_cast<double>(out.tp) / static_cast<double>(out.tp + out.fp);
    out.recall = out.tp + out.fn == 0 ? 0.0 : static_cast<double>(out.tp) / static_cast<double>(out.tp + out.fn);
    out.f1 = out.precision + out.recall == 0.0
                 ? 0.0
                 : 2.0 * out.precision * out.recall / (out.precision + out.recall);
    return out;
}

}  // namespace relex::testing
