#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "relex/dataset.hpp"

namespace relex {

inline constexpr std::string_view kUnparseable = "UNPARSEABLE";

enum class MatchKind { exact, canonical, containment, unparseable };
std::string_view to_string(MatchKind kind) noexcept;
MatchKind match_kind_from_string(std::string_view name);

/// Which steps of the matching cascade run. UNPARSEABLE always scores as the
/// schema's negative label.
struct NormalizationPolicy {
    enum class Cascade { containment_cascade, canonical_cascade };
    Cascade cascade = Cascade::containment_cascade;

    /// "containment-cascade" (default) or "canonical-cascade".
    static NormalizationPolicy from_name(std::string_view name);
    std::string_view name() const noexcept;
};

/// Lowercased NFKC case fold; "(e1,e2)" / "(e2,e1)" become "_e1e2" / "_e2e1";
/// runs of whitespace, dashes, '_', ':' and '/' collapse to one '_'; leading and
/// trailing punctuation, quotes and separators are stripped.
std::string canonicalize(std::string_view text);

struct NormalizedOutput {
    std::string normalized_label;  // schema label or UNPARSEABLE
    MatchKind match_kind = MatchKind::unparseable;
    std::string scored_label;      // always a schema label
};

/// Maps free model text onto one schema label. Cascade:
///  1. exact: raw equals a label byte-for-byte;
///  2. canonical: canonical forms are equal for exactly one label;
///  3. containment: the canonical label occurs in the canonical raw text on token
///     boundaries; the longest canonical label wins, then schema order;
///  4. UNPARSEABLE.
class LabelNormalizer {
public:
    explicit LabelNormalizer(RelationSchema schema, NormalizationPolicy policy = {});

    NormalizedOutput normalize(std::string_view raw) const;
    const RelationSchema& schema() const noexcept { return schema_; }

private:
    RelationSchema schema_;
    NormalizationPolicy policy_;
    std::vector<std::string> canonical_;  // parallel to schema_.labels
};

NormalizedOutput normalize_output(std::string_view raw, const RelationSchema& schema,
                                  const NormalizationPolicy& policy = {});

}  // namespace relex
