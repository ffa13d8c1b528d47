#include "ccnet/augment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace ccnet {

namespace {

bool is_word_byte(unsigned char c) {
    return std::isalnum(c) != 0 || c >= 0x80;
}

[[noreturn]] void parse_fail(const std::string& source, std::size_t line,
                             const std::string& what) {
    throw FormatError(source + ":" + std::to_string(line) + ": " + what);
}

} // namespace

std::string to_lower_ascii(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::vector<TokenSpan> tokenize_spans(std::string_view text) {
    std::vector<TokenSpan> spans;
    std::size_t i = 0;
    while (i < text.size()) {
        if (!is_word_byte(static_cast<unsigned char>(text[i]))) {
            ++i;
            continue;
        }
        std::size_t begin = i;
        while (i < text.size() && is_word_byte(static_cast<unsigned char>(text[i]))) ++i;
        spans.push_back({begin, i});
    }
    return spans;
}

std::vector<std::string> tokenize_lower(std::string_view text) {
    std::vector<std::string> tokens;
    for (const TokenSpan& s : tokenize_spans(text))
        tokens.push_back(to_lower_ascii(text.substr(s.begin, s.end - s.begin)));
    return tokens;
}

Thesaurus parse_thesaurus(std::istream& in, const std::string& source_name) {
    Thesaurus thesaurus;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::size_t bar = line.rfind('|');
        if (bar == std::string::npos)
            parse_fail(source_name, line_no, "expected entry header `word or phrase|N`");
        std::string key = to_lower_ascii(std::string_view(line).substr(0, bar));
        std::string count_str = line.substr(bar + 1);
        std::size_t consumed = 0;
        long count = 0;
        try {
            count = std::stol(count_str, &consumed);
        } catch (const std::exception&) {
            parse_fail(source_name, line_no, "malformed synonym count `" + count_str + "`");
        }
        if (consumed != count_str.size() || count < 1)
            parse_fail(source_name, line_no, "malformed synonym count `" + count_str + "`");
        if (key.empty()) parse_fail(source_name, line_no, "empty entry key");
        std::vector<std::string> synonyms;
        synonyms.reserve(static_cast<std::size_t>(count));
        for (long i = 0; i < count; ++i) {
            ++line_no;
            if (!std::getline(in, line))
                parse_fail(source_name, line_no, "unexpected end of file inside entry `" + key + "`");
            if (line.empty())
                parse_fail(source_name, line_no, "empty synonym line in entry `" + key + "`");
            synonyms.push_back(to_lower_ascii(line));
        }
        if (synonyms.front() == key)
            parse_fail(source_name, line_no,
                       "entry `" + key + "` lists itself as its rank-1 synonym");
        thesaurus.entries[key] = std::move(synonyms);
    }
    return thesaurus;
}

Thesaurus load_thesaurus(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open thesaurus file: " + path);
    return parse_thesaurus(in, path);
}

int sample_replacement_count(int n_replaceable, double p, RngStream& rng) {
    if (n_replaceable <= 0) return 0;
    // P[r] ~ p^r truncated to {0..n} and normalized.
    double total = 0.0;
    double term = 1.0;
    std::vector<double> cumulative(static_cast<std::size_t>(n_replaceable) + 1);
    for (int r = 0; r <= n_replaceable; ++r) {
        total += term;
        cumulative[r] = total;
        term *= p;
    }
    double u = rng.next_double() * total;
    for (int r = 0; r <= n_replaceable; ++r)
        if (u < cumulative[r]) return r;
    return n_replaceable;
}

int sample_synonym_index(int n_synonyms, double q, RngStream& rng) {
    if (n_synonyms < 1) throw ConfigError("sample_synonym_index: need at least one synonym");
    // P[s] ~ q^s over {1..n}; the common q factors out of the normalization.
    double total = 0.0;
    double term = 1.0;
    std::vector<double> cumulative(static_cast<std::size_t>(n_synonyms));
    for (int s = 0; s < n_synonyms; ++s) {
        total += term;
        cumulative[s] = total;
        term *= q;
    }
    double u = rng.next_double() * total;
    for (int s = 0; s < n_synonyms; ++s)
        if (u < cumulative[s]) return s + 1;
    return n_synonyms;
}

std::string augment(std::string_view text, const Thesaurus& thesaurus,
                    const AugmentConfig& config, RngStream& rng) {
    config.validate();
    if (thesaurus.entries.empty()) return std::string(text);

    std::vector<TokenSpan> tokens = tokenize_spans(text);
    std::vector<std::string> lower;
    lower.reserve(tokens.size());
    for (const TokenSpan& s : tokens)
        lower.push_back(to_lower_ascii(text.substr(s.begin, s.end - s.begin)));

    // Replaceable spans: greedy longest phrase match, windows of up to
    // 4 tokens joined with single spaces.
    struct Match {
        std::size_t byte_begin, byte_end;
        const std::vector<std::string>* synonyms;
    };
    std::vector<Match> matches;
    constexpr std::size_t kMaxPhraseTokens = 4;
    std::size_t t = 0;
    while (t < tokens.size()) {
        std::size_t matched = 0;
        const std::vector<std::string>* synonyms = nullptr;
        std::size_t window = std::min(kMaxPhraseTokens, tokens.size() - t);
        for (std::size_t w = window; w >= 1; --w) {
            std::string key = lower[t];
            for (std::size_t j = 1; j < w; ++j) key += " " + lower[t + j];
            if (const auto* syn = thesaurus.lookup(key)) {
                matched = w;
                synonyms = syn;
                break;
            }
        }
        if (matched > 0) {
            matches.push_back({tokens[t].begin, tokens[t + matched - 1].end, synonyms});
            t += matched;
        } else {
            ++t;
        }
    }
    if (matches.empty()) return std::string(text);

    int r = sample_replacement_count(static_cast<int>(matches.size()), config.p, rng);
    if (r == 0) return std::string(text);

    // Choose r distinct positions uniformly (partial Fisher-Yates).
    std::vector<std::size_t> order(matches.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (int i = 0; i < r; ++i) {
        std::size_t j = i + rng.next_below(order.size() - i);
        std::swap(order[i], order[j]);
    }
    std::vector<std::size_t> chosen(order.begin(), order.begin() + r);
    std::sort(chosen.begin(), chosen.end());

    std::string out;
    out.reserve(text.size());
    std::size_t cursor = 0;
    for (std::size_t idx : chosen) {
        const Match& m = matches[idx];
        out.append(text.substr(cursor, m.byte_begin - cursor));
        int s = sample_synonym_index(static_cast<int>(m.synonyms->size()), config.q, rng);
        out.append((*m.synonyms)[s - 1]);
        cursor = m.byte_end;
    }
    out.append(text.substr(cursor));
    return out;
}

} // namespace ccnet
