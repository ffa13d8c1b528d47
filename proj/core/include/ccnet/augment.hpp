#pragma once

#include <istream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ccnet/errors.hpp"
#include "ccnet/rng.hpp"

namespace ccnet {

// Mapping from lowercase word-or-phrase to synonyms ranked best-first
// (rank 1 = most frequently seen meaning).
struct Thesaurus {
    std::unordered_map<std::string, std::vector<std::string>> entries;

    std::size_t size() const { return entries.size(); }
    const std::vector<std::string>* lookup(const std::string& key) const {
        auto it = entries.find(key);
        return it == entries.end() ? nullptr : &it->second;
    }
};

struct AugmentConfig {
    double p = 0.5; // geometric parameter for the replacement count
    double q = 0.5; // geometric parameter for the synonym rank

    void validate() const {
        if (p <= 0.0 || p >= 1.0 || q <= 0.0 || q >= 1.0)
            throw ConfigError("augmentation parameters must satisfy 0 < p, q < 1");
    }
};

// Plain-text format: entry header `word or phrase|N` followed by N synonym
// lines ranked best-first; `#` starts a comment line; UTF-8. Keys and
// synonyms are case-folded on load.
Thesaurus load_thesaurus(const std::string& path);
Thesaurus parse_thesaurus(std::istream& in, const std::string& source_name);

// r over {0..n_replaceable} with P[r] proportional to p^r.
int sample_replacement_count(int n_replaceable, double p, RngStream& rng);

// s over {1..n_synonyms} with P[s] proportional to q^s; rank 1 most likely.
int sample_synonym_index(int n_synonyms, double q, RngStream& rng);

// Replace r thesaurus-matched token spans (greedy longest phrase match, up to
// 4 tokens) with synonyms; everything outside the replaced spans is preserved
// byte-for-byte. Synonyms are inserted lowercase.
std::string augment(std::string_view text, const Thesaurus& thesaurus,
                    const AugmentConfig& config, RngStream& rng);

// Tokenizer shared with the baseline featurizers: maximal runs of
// alphanumeric characters (bytes >= 0x80 count as word characters).
struct TokenSpan {
    std::size_t begin = 0;
    std::size_t end = 0; // one past the last byte
};
std::vector<TokenSpan> tokenize_spans(std::string_view text);
std::vector<std::string> tokenize_lower(std::string_view text);

std::string to_lower_ascii(std::string_view s);

} // namespace ccnet
