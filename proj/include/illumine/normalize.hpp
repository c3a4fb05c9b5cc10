#pragma once

#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace illumine {

using StopwordSet = std::unordered_set<std::string>;

struct NormalizedTerm {
    std::string normalized;
    std::vector<std::string> tokens;

    bool operator==(const NormalizedTerm&) const = default;
};

/// Folds a label surface to its canonical form: canonical decomposition with
/// combining marks dropped, lowercase, only letters/digits/space/hyphen kept,
/// whitespace collapsed. Stopwords are removed from the tokens only when the
/// term has more than one word; an all-stopword term keeps its whole
/// normalized string as the single token.
///
/// Throws Error(EmptyTerm) when nothing survives.
NormalizedTerm normalize_term(std::string_view surface, const StopwordSet& stopwords);

/// Just the folded string; empty when nothing survives.
std::string fold_text(std::string_view text);

/// One word per line, '#' starts a comment. Words are folded on load.
StopwordSet load_stopwords(const std::string& path);
StopwordSet parse_stopwords(std::string_view text);
const StopwordSet& default_stopwords();

std::vector<std::string> split_words(std::string_view folded);

}  // namespace illumine
