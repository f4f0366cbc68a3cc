#pragma once

#include "elevleak/profile.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace elevleak::textrep {

// Discrete elevation values are kept in integer milli-meters so codebook keys
// compare and serialize exactly. raw mode floors to whole meters, fine mode
// keeps 3 decimal digits.
using DiscreteValue = std::int64_t;

enum class DiscretizeMode { raw, fine };

inline const char* to_string(DiscretizeMode m) { return m == DiscretizeMode::raw ? "raw" : "fine"; }

double floor_meters(double e); // f(e) = floor(e)
double floor_millis(double e); // f(e) = floor(e * 1e3) / 1e3

double discrete_to_meters(DiscreteValue v);

std::vector<DiscreteValue> discretize(const ElevationProfile& profile, DiscretizeMode mode);

// Smallest w >= 1 with alphabet_len^w >= unique_count. Pure integer
// arithmetic, no floating log.
int word_size(int alphabet_len, std::size_t unique_count);

inline const std::string kDefaultAlphabet = "abcdefghijklmnopqrstuvwxyz";

struct Codebook {
    std::string alphabet;
    int word_length = 1;
    std::map<DiscreteValue, std::string> value_to_word; // ascending value order

    const std::string* find(DiscreteValue v) const {
        auto it = value_to_word.find(v);
        return it == value_to_word.end() ? nullptr : &it->second;
    }

    // Inverse lookup; nullopt when the word was never assigned.
    std::optional<DiscreteValue> value_of(std::string_view word) const;

    nlohmann::ordered_json to_json() const;
    static Codebook from_json(const nlohmann::json& j);
};

// Sorted unique corpus values get words in base-l counting order: rank k maps
// to the base-l numeral of k left-padded to the word length.
Codebook build_codebook(const std::vector<std::vector<DiscreteValue>>& corpus,
                        const std::string& alphabet = kDefaultAlphabet);

std::string encode_values(const std::vector<DiscreteValue>& values, const Codebook& codebook);
std::string encode_profile(const ElevationProfile& profile, const Codebook& codebook,
                           DiscretizeMode mode);

std::vector<DiscreteValue> decode_text(const std::string& encoded, const Codebook& codebook);

// exact: only n-grams of exactly n words. cumulative: one corpus pass per
// window size k = 1..n, in that order.
enum class NgramMode { exact, cumulative };

struct TransparentHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const { return std::hash<std::string_view>{}(s); }
    std::size_t operator()(const std::string& s) const { return std::hash<std::string_view>{}(s); }
};

struct Vocabulary {
    int ngram_order = 1;
    int word_length = 1;
    NgramMode mode = NgramMode::cumulative;
    std::vector<std::string> entries; // first-seen order
    std::unordered_map<std::string, std::size_t, TransparentHash, std::equal_to<>> index;

    std::size_t size() const { return entries.size(); }
    bool contains(std::string_view entry) const { return index.find(entry) != index.end(); }
    void append(std::string entry);

    nlohmann::ordered_json to_json() const;
    static Vocabulary from_json(const nlohmann::json& j);
};

// Word-aligned sliding windows (stride = one word) over each corpus line.
Vocabulary build_vocabulary(const std::vector<std::string>& corpus, int ngram_order,
                            int word_length, NgramMode mode = NgramMode::cumulative);

struct FeatureVector {
    std::vector<double> values;  // aligned to Vocabulary entry order
    std::size_t total_hits = 0;  // 0 flags an all-zero vector (kept, not renormalized)
};

// Greedy left-to-right non-overlapping occurrence counts per vocabulary
// entry, normalized so the values sum to 1 when anything matched.
FeatureVector bow_features(const std::string& encoded, const Vocabulary& vocabulary);

// Corpus-wide term frequencies, counted the same way bow_features counts.
std::vector<std::size_t> term_frequencies(const std::vector<std::string>& corpus,
                                          const Vocabulary& vocabulary);

// Drops entries whose corpus-wide count is under min_term_frequency,
// preserving the survivors' order.
Vocabulary prune_vocabulary(const Vocabulary& vocabulary, const std::vector<std::string>& corpus,
                            std::size_t min_term_frequency);

} // namespace elevleak::textrep
