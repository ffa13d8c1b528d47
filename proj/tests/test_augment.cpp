#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ccnet/augment.hpp"

using namespace ccnet;

namespace {

Thesaurus make_thesaurus(const std::string& text) {
    std::istringstream in(text);
    return parse_thesaurus(in, "<memory>");
}

const char* kSmallThesaurus =
    "# comment line\n"
    "good|2\n"
    "fine\n"
    "nice\n"
    "look up|1\n"
    "research\n"
    "fast|3\n"
    "quick\n"
    "rapid\n"
    "speedy\n";

} // namespace

TEST_CASE("tokenizer: alnum runs, UTF-8 bytes are word characters") {
    auto toks = tokenize_lower("Hello, World! x2");
    CHECK(toks == std::vector<std::string>{"hello", "world", "x2"});
    CHECK(tokenize_lower("").empty());
    CHECK(tokenize_lower("  ,.! ").empty());
    CHECK(tokenize_lower("caf\xc3\xa9 au lait") ==
          std::vector<std::string>{"caf\xc3\xa9", "au", "lait"});

    auto spans = tokenize_spans("ab, cd");
    REQUIRE(spans.size() == 2);
    CHECK(spans[0].begin == 0);
    CHECK(spans[0].end == 2);
    CHECK(spans[1].begin == 4);
    CHECK(spans[1].end == 6);
}

TEST_CASE("thesaurus parsing: entries, ranks, comments") {
    Thesaurus t = make_thesaurus(kSmallThesaurus);
    CHECK(t.size() == 3);
    auto* good = t.lookup("good");
    REQUIRE(good != nullptr);
    CHECK(*good == std::vector<std::string>{"fine", "nice"});
    auto* phrase = t.lookup("look up");
    REQUIRE(phrase != nullptr);
    CHECK(*phrase == std::vector<std::string>{"research"});
    CHECK(t.lookup("missing") == nullptr);
}

TEST_CASE("thesaurus parsing: keys and synonyms are case-folded") {
    Thesaurus t = make_thesaurus("GOOD|1\nFINE\n");
    auto* syns = t.lookup("good");
    REQUIRE(syns != nullptr);
    CHECK((*syns)[0] == "fine");
}

TEST_CASE("thesaurus parsing rejects malformed input with line numbers") {
    auto check_throws = [](const std::string& text, const std::string& fragment) {
        std::istringstream in(text);
        try {
            parse_thesaurus(in, "<memory>");
            FAIL("expected FormatError for: " << text);
        } catch (const FormatError& e) {
            CHECK(std::string(e.what()).find(fragment) != std::string::npos);
        }
    };
    check_throws("good|x\nfine\n", "<memory>:1:");
    check_throws("good|2\nfine\n", "<memory>:3:"); // truncated synonym list
    check_throws("good|0\n", "<memory>:1:");       // no synonyms
    check_throws("good|1\ngood\n", "<memory>:2:"); // synonym equals key at rank 1
    check_throws("|1\nfine\n", "<memory>:1:");     // empty key
}

TEST_CASE("replacement count: truncated geometric over {0..n}") {
    const int n = 2;
    const double p = 0.5;
    const int draws = 100000;
    RngStream rng(99);
    std::array<int, 3> counts{};
    for (int i = 0; i < draws; ++i) {
        int r = sample_replacement_count(n, p, rng);
        REQUIRE(r >= 0);
        REQUIRE(r <= n);
        counts[r]++;
    }
    // P proportional to (1, 1/2, 1/4) -> (4/7, 2/7, 1/7)
    const double expect[3] = {4.0 / 7.0, 2.0 / 7.0, 1.0 / 7.0};
    for (int r = 0; r <= n; ++r) {
        double prob = expect[r];
        double sigma = std::sqrt(prob * (1 - prob) / draws);
        CHECK(std::abs(counts[r] / double(draws) - prob) < 3 * sigma);
    }
    CHECK(counts[0] > counts[1]);
    CHECK(counts[1] > counts[2]);
}

TEST_CASE("synonym index: truncated geometric over {1..n}, rank 1 most likely") {
    const int n = 2;
    const double q = 0.5;
    const int draws = 100000;
    RngStream rng(7);
    std::array<int, 3> counts{};
    for (int i = 0; i < draws; ++i) {
        int s = sample_synonym_index(n, q, rng);
        REQUIRE(s >= 1);
        REQUIRE(s <= n);
        counts[s]++;
    }
    // P proportional to (1/2, 1/4) -> (2/3, 1/3)
    const double expect[3] = {0.0, 2.0 / 3.0, 1.0 / 3.0};
    for (int s = 1; s <= n; ++s) {
        double prob = expect[s];
        double sigma = std::sqrt(prob * (1 - prob) / draws);
        CHECK(std::abs(counts[s] / double(draws) - prob) < 3 * sigma);
    }
}

TEST_CASE("tiny p gives almost no replacements") {
    RngStream rng(3);
    double total = 0;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) total += sample_replacement_count(10, 0.01, rng);
    CHECK(total / draws < 0.02);
}

TEST_CASE("single-word replacement preserves surrounding bytes") {
    Thesaurus t = make_thesaurus(kSmallThesaurus);
    AugmentConfig cfg; // p = q = 0.5
    // Find a seed that replaces the one replaceable token.
    bool replaced = false;
    for (std::uint64_t seed = 0; seed < 64 && !replaced; ++seed) {
        RngStream rng(seed);
        std::string out = augment("a good day!", t, cfg, rng);
        if (out != "a good day!") {
            replaced = true;
            CHECK((out == "a fine day!" || out == "a nice day!"));
        }
    }
    CHECK(replaced);
}

TEST_CASE("phrase match wins over shorter token matches") {
    Thesaurus t = make_thesaurus("look up|1\nresearch\nlook|1\nsee\n");
    AugmentConfig cfg;
    cfg.p = 0.99; // force replacements to be near-certain
    bool saw_phrase = false;
    for (std::uint64_t seed = 0; seed < 128; ++seed) {
        RngStream rng(seed);
        const std::string in = "please look up the word";
        std::string out = augment(in, t, cfg, rng);
        // a replacement swaps the whole phrase, never just "look"
        if (out != in) {
            CHECK(out == "please research the word");
            saw_phrase = true;
        }
        // greedy longest match never splits the phrase into "see up"
        CHECK(out.find("see up") == std::string::npos);
    }
    CHECK(saw_phrase);
}

TEST_CASE("augmentation without matches is the identity") {
    Thesaurus t = make_thesaurus(kSmallThesaurus);
    AugmentConfig cfg;
    RngStream rng(5);
    CHECK(augment("nothing matches here", t, cfg, rng) == "nothing matches here");
    Thesaurus empty;
    RngStream rng2(5);
    CHECK(augment("a good day", empty, cfg, rng2) == "a good day");
    RngStream rng3(5);
    CHECK(augment("", t, cfg, rng3).empty());
}

TEST_CASE("augmentation is deterministic for a fixed stream") {
    Thesaurus t = make_thesaurus(kSmallThesaurus);
    AugmentConfig cfg;
    for (std::uint64_t seed = 0; seed < 16; ++seed) {
        RngStream r1(seed), r2(seed);
        std::string text = "the fast good look up trick is fast";
        CHECK(augment(text, t, cfg, r1) == augment(text, t, cfg, r2));
    }
}

TEST_CASE("every output token is the original or a listed synonym") {
    Thesaurus t = make_thesaurus(kSmallThesaurus);
    AugmentConfig cfg;
    cfg.p = 0.9;
    const std::string text = "A fast Good day to look up words, fast!";
    auto allowed = [&](const std::string& tok) {
        static const std::vector<std::string> ok = {"a",     "fast",  "good", "day",
                                                    "to",    "look",  "up",   "words",
                                                    "fine",  "nice",  "quick", "rapid",
                                                    "speedy", "research"};
        for (const auto& w : ok)
            if (w == tok) return true;
        return false;
    };
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        RngStream rng(seed);
        std::string out = augment(text, t, cfg, rng);
        for (const auto& tok : tokenize_lower(out)) CHECK(allowed(tok));
        // punctuation outside token spans survives
        CHECK(out.find(',') != std::string::npos);
        CHECK(out.back() == '!');
    }
}

TEST_CASE("config validation") {
    AugmentConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.p = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.p = 0.5;
    cfg.q = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
