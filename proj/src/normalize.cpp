#include "illumine/normalize.hpp"

#include "illumine/error.hpp"
#include "letter_fold_table.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace illumine {
namespace {

bool is_combining_mark(char32_t cp) {
    return (cp >= 0x0300 && cp <= 0x036F) || (cp >= 0x1AB0 && cp <= 0x1AFF) ||
           (cp >= 0x1DC0 && cp <= 0x1DFF) || (cp >= 0x20D0 && cp <= 0x20FF) ||
           (cp >= 0xFE20 && cp <= 0xFE2F);
}

bool is_space(char32_t cp) {
    return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\f' || cp == '\v' ||
           cp == 0x00A0 || cp == 0x202F || (cp >= 0x2000 && cp <= 0x200A) || cp == 0x3000;
}

// Malformed sequences decode to U+FFFD, which is later dropped.
char32_t next_code_point(std::string_view s, std::size_t& i) {
    const auto lead = static_cast<unsigned char>(s[i]);
    int extra = 0;
    char32_t cp = 0;
    if (lead < 0x80) {
        ++i;
        return lead;
    } else if ((lead & 0xE0) == 0xC0) {
        extra = 1;
        cp = lead & 0x1F;
    } else if ((lead & 0xF0) == 0xE0) {
        extra = 2;
        cp = lead & 0x0F;
    } else if ((lead & 0xF8) == 0xF0) {
        extra = 3;
        cp = lead & 0x07;
    } else {
        ++i;
        return 0xFFFD;
    }
    ++i;
    for (int k = 0; k < extra; ++k, ++i) {
        if (i >= s.size() || (static_cast<unsigned char>(s[i]) & 0xC0) != 0x80) return 0xFFFD;
        cp = (cp << 6) | (static_cast<unsigned char>(s[i]) & 0x3F);
    }
    return cp;
}

void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

// 0 means "drop", ' ' means "separator".
char32_t fold_code_point(char32_t cp) {
    if (cp < 0x80) {
        if (cp >= 'A' && cp <= 'Z') return cp - 'A' + 'a';
        if ((cp >= 'a' && cp <= 'z') || (cp >= '0' && cp <= '9') || cp == '-') return cp;
        if (is_space(cp)) return ' ';
        return 0;
    }
    if (is_space(cp)) return ' ';
    if (is_combining_mark(cp)) return 0;
    const auto& table = detail::kLetterFold;
    const auto it = std::lower_bound(table.begin(), table.end(), cp,
                                     [](const detail::FoldEntry& e, char32_t c) { return e.code_point < c; });
    if (it != table.end() && it->code_point == cp) return it->folded;
    return 0;
}

}  // namespace

std::string fold_text(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    std::size_t i = 0;
    while (i < text.size()) {
        const char32_t folded = fold_code_point(next_code_point(text, i));
        if (folded == 0) continue;
        if (folded == ' ') {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        append_utf8(out, folded);
    }
    return out;
}

std::vector<std::string> split_words(std::string_view folded) {
    std::vector<std::string> words;
    std::size_t start = 0;
    while (start < folded.size()) {
        const std::size_t end = std::min(folded.find(' ', start), folded.size());
        if (end > start) words.emplace_back(folded.substr(start, end - start));
        start = end + 1;
    }
    return words;
}

NormalizedTerm normalize_term(std::string_view surface, const StopwordSet& stopwords) {
    NormalizedTerm term;
    term.normalized = fold_text(surface);
    if (term.normalized.empty())
        throw Error(ErrorCode::EmptyTerm, "'" + std::string(surface) + "' has no letters or digits");

    auto words = split_words(term.normalized);
    if (words.size() > 1) {
        for (auto& w : words)
            if (!stopwords.contains(w)) term.tokens.push_back(std::move(w));
        if (term.tokens.empty()) term.tokens.push_back(term.normalized);
    } else {
        term.tokens = std::move(words);
    }
    return term;
}

StopwordSet parse_stopwords(std::string_view text) {
    StopwordSet words;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        auto folded = fold_text(line);
        if (!folded.empty()) words.insert(std::move(folded));
    }
    return words;
}

StopwordSet load_stopwords(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open stopword file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_stopwords(buf.str());
}

const StopwordSet& default_stopwords() {
    // Default French list; a file passed with --stopwords replaces it.
    static const StopwordSet words = parse_stopwords(
        "a\nau\naux\navec\nce\nces\ndans\nde\ndes\ndu\nd\nelle\nen\net\neux\nil\nje\nla\nle\nles\n"
        "leur\nlui\nl\nma\nmais\nme\nmeme\nmes\nmoi\nmon\nne\nnos\nnotre\nnous\non\nou\npar\npas\n"
        "pour\nqu\nque\nqui\nsa\nse\nses\nson\nsur\nta\nte\ntes\ntoi\nton\ntu\nun\nune\nvos\nvotre\n"
        "vous\nc\nj\nm\nn\ns\nt\ny\nsans\nsous\nvers\nchez\nentre\n");
    return words;
}

}  // namespace illumine
