#include "relex/normalization.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include "relex/error.hpp"

namespace relex {

namespace {

bool is_separator(UChar32 c) {
    return c == '_' || c == ':' || c == '/' || u_isUWhiteSpace(c) ||
           u_hasBinaryProperty(c, UCHAR_DASH);
}

bool is_strippable(UChar32 c) {
    return is_separator(c) || u_ispunct(c) || u_hasBinaryProperty(c, UCHAR_QUOTATION_MARK) ||
           c == '`' || c == 0x00B4;
}

/// Matches "(e1,e2)" / "(e2,e1)" with optional inner whitespace at `pos`.
/// Returns the number of code points consumed, 0 when there is no marker.
std::size_t direction_marker(const std::u32string& s, std::size_t pos, std::u32string& suffix) {
    std::size_t i = pos;
    auto skip_ws = [&] {
        while (i < s.size() && u_isUWhiteSpace(static_cast<UChar32>(s[i]))) ++i;
    };
    auto entity = [&](char32_t& digit) {
        skip_ws();
        if (i + 1 < s.size() && s[i] == U'e' && (s[i + 1] == U'1' || s[i + 1] == U'2')) {
            digit = s[i + 1];
            i += 2;
            return true;
        }
        return false;
    };
    if (s[i] != U'(') return 0;
    ++i;
    char32_t first = 0;
    char32_t second = 0;
    if (!entity(first)) return 0;
    skip_ws();
    if (i >= s.size() || s[i] != U',') return 0;
    ++i;
    if (!entity(second) || first == second) return 0;
    skip_ws();
    if (i >= s.size() || s[i] != U')') return 0;
    suffix = std::u32string{U'e', first, U'e', second};
    return i + 1 - pos;
}

void append_utf8(std::string& out, char32_t c) {
    if (c < 0x80) {
        out.push_back(static_cast<char>(c));
    } else if (c < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (c >> 6)));
        out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else if (c < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (c >> 12)));
        out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (c >> 18)));
        out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    }
}

bool word_byte(char c) {
    const auto u = static_cast<unsigned char>(c);
    return u >= 0x80 || std::isalnum(u);
}

/// `needle` occurs in `hay` with non-word bytes (or the ends) on both sides.
bool contains_on_boundary(std::string_view hay, std::string_view needle) {
    if (needle.empty()) return false;
    for (auto pos = hay.find(needle); pos != std::string_view::npos; pos = hay.find(needle, pos + 1)) {
        const auto end = pos + needle.size();
        const bool left = pos == 0 || !word_byte(hay[pos - 1]) || !word_byte(needle.front());
        const bool right = end == hay.size() || !word_byte(hay[end]) || !word_byte(needle.back());
        if (left && right) return true;
    }
    return false;
}

}  // namespace

std::string_view to_string(MatchKind kind) noexcept {
    switch (kind) {
        case MatchKind::exact: return "exact";
        case MatchKind::canonical: return "canonical";
        case MatchKind::containment: return "containment";
        case MatchKind::unparseable: return "unparseable";
    }
    return "unparseable";
}

MatchKind match_kind_from_string(std::string_view name) {
    if (name == "exact") return MatchKind::exact;
    if (name == "canonical") return MatchKind::canonical;
    if (name == "containment") return MatchKind::containment;
    if (name == "unparseable") return MatchKind::unparseable;
    throw ValidationError("unknown match kind '" + std::string(name) + "'");
}

NormalizationPolicy NormalizationPolicy::from_name(std::string_view name) {
    if (name == "containment-cascade") return {Cascade::containment_cascade};
    if (name == "canonical-cascade") return {Cascade::canonical_cascade};
    throw ConfigError("unknown normalization policy '" + std::string(name) + "'");
}

std::string_view NormalizationPolicy::name() const noexcept {
    return cascade == Cascade::containment_cascade ? "containment-cascade" : "canonical-cascade";
}

std::string canonicalize(std::string_view text) {
    UErrorCode status = U_ZERO_ERROR;
    const auto* nfkc = icu::Normalizer2::getNFKCCasefoldInstance(status);
    if (U_FAILURE(status)) throw Error(std::string("ICU NFKC_Casefold unavailable: ") + u_errorName(status));
    const auto source = icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
    const auto folded = nfkc->normalize(source, status);
    if (U_FAILURE(status)) throw Error(std::string("ICU normalization failed: ") + u_errorName(status));

    std::u32string cps;
    for (int32_t i = 0; i < folded.length();) {
        const UChar32 c = folded.char32At(i);
        cps.push_back(static_cast<char32_t>(c));
        i += U16_LENGTH(c);
    }

    std::u32string out;
    auto separator = [&] {
        if (out.empty() || out.back() != U'_') out.push_back(U'_');
    };
    for (std::size_t i = 0; i < cps.size();) {
        std::u32string suffix;
        if (const auto used = direction_marker(cps, i, suffix)) {
            separator();
            out += suffix;
            i += used;
        } else if (is_separator(static_cast<UChar32>(cps[i]))) {
            separator();
            ++i;
        } else {
            out.push_back(cps[i++]);
        }
    }

    std::size_t begin = 0;
    std::size_t end = out.size();
    while (begin < end && is_strippable(static_cast<UChar32>(out[begin]))) ++begin;
    while (end > begin && is_strippable(static_cast<UChar32>(out[end - 1]))) --end;

    std::string utf8;
    for (std::size_t i = begin; i < end; ++i) append_utf8(utf8, out[i]);
    return utf8;
}

LabelNormalizer::LabelNormalizer(RelationSchema schema, NormalizationPolicy policy)
    : schema_(std::move(schema)), policy_(policy) {
    if (schema_.labels.empty()) throw ValidationError("cannot normalize against an empty schema");
    canonical_.reserve(schema_.labels.size());
    for (const auto& label : schema_.labels) canonical_.push_back(canonicalize(label));
}

NormalizedOutput LabelNormalizer::normalize(std::string_view raw) const {
    const auto& labels = schema_.labels;
    auto matched = [&](std::size_t i, MatchKind kind) {
        return NormalizedOutput{labels[i], kind, labels[i]};
    };

    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == raw) return matched(i, MatchKind::exact);
    }

    const auto canon = canonicalize(raw);
    std::size_t hits = 0;
    std::size_t hit = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (!canon.empty() && canonical_[i] == canon) {
            ++hits;
            hit = i;
        }
    }
    if (hits == 1) return matched(hit, MatchKind::canonical);

    if (policy_.cascade == NormalizationPolicy::Cascade::containment_cascade) {
        std::optional<std::size_t> best;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (!contains_on_boundary(canon, canonical_[i])) continue;
            if (!best || canonical_[i].size() > canonical_[*best].size()) best = i;
        }
        if (best) return matched(*best, MatchKind::containment);
    }

    return NormalizedOutput{std::string(kUnparseable), MatchKind::unparseable, schema_.negative_label};
}

NormalizedOutput normalize_output(std::string_view raw, const RelationSchema& schema,
                                  const NormalizationPolicy& policy) {
    return LabelNormalizer(schema, policy).normalize(raw);
}

}  // namespace relex
