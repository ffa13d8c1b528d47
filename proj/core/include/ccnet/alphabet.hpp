#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ccnet/feature_map.hpp"

namespace ccnet {

enum class CaseMode : std::uint8_t {
    fold_lower = 0,  // uppercase input folded to lowercase before lookup
    distinguish = 1, // 26 uppercase letters appended to the base alphabet
};

// Ordered character set defining the one-hot dimension m. Characters are
// Unicode scalar values; anything outside the set quantizes to a zero frame.
class Alphabet {
public:
    Alphabet() = default; // empty; only valid as a placeholder before load
    Alphabet(std::vector<char32_t> characters, CaseMode mode);

    int size() const { return static_cast<int>(characters_.size()); }
    CaseMode case_mode() const { return mode_; }
    const std::vector<char32_t>& characters() const { return characters_; }

    // 1-based index of c after case folding (fold_lower mode only); empty
    // if c is not in the alphabet. Lookup returns the first occurrence: the
    // printed base character list repeats '-', so one slot is unreachable.
    std::optional<int> char_index(char32_t c) const;

private:
    std::vector<char32_t> characters_;
    std::unordered_map<char32_t, int> index_;
    CaseMode mode_ = CaseMode::fold_lower;
};

// The 70-character base alphabet in printed order (26 lowercase letters,
// 10 digits, 33 punctuation/special characters, newline), or the same with
// the 26 uppercase letters appended (96 entries) when distinguishing case.
Alphabet build_alphabet(CaseMode mode);

// Decode UTF-8 into Unicode scalar values; invalid bytes become U+FFFD.
std::vector<char32_t> decode_utf8(std::string_view text);

// One-hot character matrix: the first l0 retained characters of text, in
// backward order (frame 0 holds the last retained character). Out-of-alphabet
// characters and padding beyond the text length become all-zero frames.
template <class T>
FeatureMap<T> quantize(std::string_view text, const Alphabet& alphabet, int l0) {
    if (l0 < 1) throw GeometryError("quantize: l0 must be >= 1");
    FeatureMap<T> out(alphabet.size(), l0);
    std::vector<char32_t> chars = decode_utf8(text);
    int retained = std::min<int>(l0, static_cast<int>(chars.size()));
    for (int pos = 0; pos < retained; ++pos) {
        int frame = retained - 1 - pos; // backward order
        if (auto idx = alphabet.char_index(chars[pos]))
            out.at(*idx - 1, frame) = T(1);
    }
    return out;
}

// One labeled model input. Labels are 1-based class indices.
struct QuantizedSample {
    FeatureMap<float> matrix;
    int label = 0;
};

} // namespace ccnet
