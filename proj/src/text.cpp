// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 stmkit contributors
//
// Abstract cleaning and tokenization: boilerplate removal, the manual
// equilibrium stem, stopword filtering and Porter stemming.

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "stmkit/corpus.hpp"
#include "stmkit/errors.hpp"
#include "stmkit/porter.hpp"

namespace stmkit {

// Defined in the generated stopwords_data.cpp (embedded copy of
// data/stopwords_en.txt).
extern const char* const kEmbeddedStopwords;

namespace {

bool is_space_byte(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_alpha_byte(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

char lower_byte(char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

bool is_digit_byte(char c) {
    return c >= '0' && c <= '9';
}

// UTF-8 copyright sign.
constexpr std::string_view kCopyrightSign = "\xc2\xa9";

// Matches the copyright sign plus an optional adjacent 4-digit year,
// e.g. "(c) 2019". Returns the match length or 0.
std::size_t match_copyright_mark(std::string_view text, std::size_t pos) {
    if (text.compare(pos, kCopyrightSign.size(), kCopyrightSign) != 0) {
        return 0;
    }
    std::size_t end = pos + kCopyrightSign.size();
    std::size_t probe = end;
    while (probe < text.size() && is_space_byte(text[probe])) {
        ++probe;
    }
    if (probe + 4 <= text.size() && is_digit_byte(text[probe]) &&
        is_digit_byte(text[probe + 1]) && is_digit_byte(text[probe + 2]) &&
        is_digit_byte(text[probe + 3]) &&
        (probe + 4 == text.size() || !is_digit_byte(text[probe + 4]))) {
        end = probe + 4;
    }
    return end - pos;
}

// One removal pass; returns false if nothing matched.
bool strip_pass(const std::string& text,
                const std::vector<std::string>& phrases_by_length,
                std::string& out) {
    const std::size_t n = text.size();
    std::vector<char> removed(n, 0);
    bool any = false;

    std::size_t i = 0;
    while (i < n) {
        std::size_t len = 0;
        for (const auto& phrase : phrases_by_length) {
            if (!phrase.empty() && text.compare(i, phrase.size(), phrase) == 0) {
                len = phrase.size();
                break;
            }
        }
        if (len == 0) {
            len = match_copyright_mark(text, i);
        }
        if (len > 0) {
            std::fill(removed.begin() + static_cast<std::ptrdiff_t>(i),
                      removed.begin() + static_cast<std::ptrdiff_t>(i + len), 1);
            any = true;
            i += len;
        } else {
            ++i;
        }
    }
    if (!any) {
        return false;
    }

    // Absorb whitespace touching a removed span.
    for (std::size_t pos = 0; pos < n; ++pos) {
        if (!removed[pos]) {
            continue;
        }
        std::size_t lo = pos;
        while (lo > 0 && is_space_byte(text[lo - 1]) && !removed[lo - 1]) {
            --lo;
            removed[lo] = 1;
        }
        std::size_t hi = pos;
        while (hi + 1 < n && removed[hi + 1]) {
            ++hi;
        }
        std::size_t after = hi + 1;
        while (after < n && is_space_byte(text[after])) {
            removed[after] = 1;
            ++after;
        }
        pos = after;
    }

    out.clear();
    out.reserve(n);
    bool pending_space = false;
    std::size_t pos = 0;
    while (pos < n) {
        if (removed[pos]) {
            bool had_ws = false;
            while (pos < n && removed[pos]) {
                had_ws = had_ws || is_space_byte(text[pos]);
                ++pos;
            }
            if (!out.empty() && had_ws) {
                pending_space = true;
            }
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(text[pos]);
        ++pos;
    }
    return true;
}

std::unordered_set<std::string> parse_stopword_lines(std::istream& in) {
    std::unordered_set<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        std::size_t b = 0;
        std::size_t e = line.size();
        while (b < e && is_space_byte(line[b])) {
            ++b;
        }
        while (e > b && is_space_byte(line[e - 1])) {
            --e;
        }
        if (e > b) {
            words.insert(line.substr(b, e - b));
        }
    }
    return words;
}

} // namespace

const std::vector<std::string>& default_boilerplate_phrases() {
    static const std::vector<std::string> phrases = {
        "All rights reserved.",
        "All right reserved.",
        "The University of Chicago. All rights reserved.",
        "\xc2\xa9 The Author(s)",
        "Published by Oxford University Press on behalf of The Review of "
        "Economic Studies Limited",
        "Published by Oxford University Press on behalf of",
        "by the President and Fellows of Harvard College and the "
        "Massachusetts Institute of Technology.",
        "AEA. The American Economic Association is hosted by Vanderbilt "
        "University.",
    };
    return phrases;
}

std::string strip_boilerplate(std::string_view text,
                              const std::vector<std::string>& phrases) {
    std::vector<std::string> by_length(phrases.begin(), phrases.end());
    std::sort(by_length.begin(), by_length.end(),
              [](const std::string& a, const std::string& b) {
                  return a.size() != b.size() ? a.size() > b.size() : a < b;
              });

    std::string current(text);
    std::string next;
    // Iterate to a fixed point so removal never exposes a new match.
    while (strip_pass(current, by_length, next)) {
        current.swap(next);
    }
    return current;
}

std::string strip_boilerplate(std::string_view text) {
    return strip_boilerplate(text, default_boilerplate_phrases());
}

std::string normalize_equilibrium(std::string_view text) {
    static constexpr std::string_view kTargets[] = {"equilibrium", "equilibria"};
    static constexpr std::string_view kReplacement = "equilibri";

    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        if (!is_alpha_byte(text[i])) {
            out.push_back(text[i]);
            ++i;
            continue;
        }
        std::size_t e = i;
        while (e < text.size() && is_alpha_byte(text[e])) {
            ++e;
        }
        std::string_view word = text.substr(i, e - i);
        bool replaced = false;
        for (const auto target : kTargets) {
            if (word.size() == target.size() &&
                std::equal(word.begin(), word.end(), target.begin(),
                           [](char a, char b) { return lower_byte(a) == b; })) {
                out.append(kReplacement);
                replaced = true;
                break;
            }
        }
        if (!replaced) {
            out.append(word);
        }
        i = e;
    }
    return out;
}

std::unordered_set<std::string> load_stopwords(std::istream& in) {
    return parse_stopword_lines(in);
}

std::unordered_set<std::string> load_stopwords(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw FormatError("cannot open stopword file: " + path.string());
    }
    return parse_stopword_lines(in);
}

const std::vector<std::string>& default_custom_stopwords() {
    static const std::vector<std::string> words = {"paper", "publish"};
    return words;
}

PreprocessConfig default_preprocess_config() {
    PreprocessConfig config;
    std::istringstream in(kEmbeddedStopwords);
    config.stopwords = parse_stopword_lines(in);
    for (const auto& w : default_custom_stopwords()) {
        config.stopwords.insert(w);
    }
    return config;
}

std::vector<std::string> preprocess(std::string_view cleaned_text,
                                    const PreprocessConfig& config) {
    std::vector<std::string> tokens;
    std::string word;
    const auto flush = [&] {
        if (word.empty()) {
            return;
        }
        if (config.stopwords.count(word) == 0) {
            if (config.stem) {
                std::string stemmed = porter_stem(word);
                if (!stemmed.empty() && config.stopwords.count(stemmed) == 0) {
                    tokens.push_back(std::move(stemmed));
                }
            } else {
                tokens.push_back(word);
            }
        }
        word.clear();
    };

    for (const char c : cleaned_text) {
        if (is_alpha_byte(c)) {
            word.push_back(lower_byte(c));
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

} // namespace stmkit
