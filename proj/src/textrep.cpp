#include "elevleak/textrep.hpp"

#include "elevleak/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace elevleak::textrep {

double floor_meters(double e) { return std::floor(e); }

double floor_millis(double e) { return std::floor(e * 1e3) / 1e3; }

double discrete_to_meters(DiscreteValue v) { return static_cast<double>(v) / 1e3; }

std::vector<DiscreteValue> discretize(const ElevationProfile& profile, DiscretizeMode mode) {
    std::vector<DiscreteValue> out;
    out.reserve(profile.elevations_m.size());
    for (double e : profile.elevations_m) {
        if (!std::isfinite(e)) throw NonFiniteElevation();
        if (mode == DiscretizeMode::raw) {
            out.push_back(static_cast<DiscreteValue>(std::llround(std::floor(e))) * 1000);
        } else {
            out.push_back(static_cast<DiscreteValue>(std::llround(std::floor(e * 1e3))));
        }
    }
    return out;
}

int word_size(int alphabet_len, std::size_t unique_count) {
    if (alphabet_len < 2) throw InvalidAlphabet();
    if (unique_count < 1) throw ValidationError("unique value count must be >= 1");
    int w = 1;
    // Guard against overflow: capacity saturates once it covers the count.
    unsigned long long capacity = static_cast<unsigned long long>(alphabet_len);
    while (capacity < unique_count) {
        capacity *= static_cast<unsigned long long>(alphabet_len);
        ++w;
    }
    return w;
}

std::optional<DiscreteValue> Codebook::value_of(std::string_view word) const {
    for (const auto& [value, w] : value_to_word)
        if (w == word) return value;
    return std::nullopt;
}

nlohmann::ordered_json Codebook::to_json() const {
    nlohmann::ordered_json j;
    j["alphabet"] = alphabet;
    j["word_length"] = word_length;
    auto entries = nlohmann::ordered_json::array();
    for (const auto& [value, word] : value_to_word)
        entries.push_back({{"value_milli", value}, {"word", word}});
    j["entries"] = entries;
    return j;
}

Codebook Codebook::from_json(const nlohmann::json& j) {
    Codebook cb;
    cb.alphabet = j.at("alphabet").get<std::string>();
    cb.word_length = j.at("word_length").get<int>();
    for (const auto& entry : j.at("entries"))
        cb.value_to_word[entry.at("value_milli").get<DiscreteValue>()] =
            entry.at("word").get<std::string>();
    return cb;
}

Codebook build_codebook(const std::vector<std::vector<DiscreteValue>>& corpus,
                        const std::string& alphabet) {
    if (alphabet.size() < 2) throw InvalidAlphabet();
    if (std::set<char>(alphabet.begin(), alphabet.end()).size() != alphabet.size())
        throw ValidationError("alphabet symbols must be distinct");

    std::set<DiscreteValue> unique;
    for (const auto& sample : corpus) unique.insert(sample.begin(), sample.end());
    if (unique.empty()) throw ValidationError("cannot build a codebook from an empty corpus");

    const int l = static_cast<int>(alphabet.size());
    const int w = word_size(l, unique.size());

    Codebook cb;
    cb.alphabet = alphabet;
    cb.word_length = w;
    std::size_t rank = 0;
    for (DiscreteValue value : unique) {
        std::string word(static_cast<std::size_t>(w), alphabet[0]);
        std::size_t k = rank;
        for (int pos = w - 1; pos >= 0 && k > 0; --pos) {
            word[static_cast<std::size_t>(pos)] = alphabet[k % static_cast<std::size_t>(l)];
            k /= static_cast<std::size_t>(l);
        }
        cb.value_to_word.emplace(value, std::move(word));
        ++rank;
    }
    return cb;
}

std::string encode_values(const std::vector<DiscreteValue>& values, const Codebook& codebook) {
    std::string out;
    out.reserve(values.size() * static_cast<std::size_t>(codebook.word_length));
    for (DiscreteValue v : values) {
        const std::string* word = codebook.find(v);
        if (!word) throw UnknownValue(v);
        out += *word;
    }
    return out;
}

std::string encode_profile(const ElevationProfile& profile, const Codebook& codebook,
                           DiscretizeMode mode) {
    return encode_values(discretize(profile, mode), codebook);
}

std::vector<DiscreteValue> decode_text(const std::string& encoded, const Codebook& codebook) {
    const std::size_t w = static_cast<std::size_t>(codebook.word_length);
    if (w == 0 || encoded.size() % w != 0) throw MisalignedCorpus();
    std::vector<DiscreteValue> out;
    out.reserve(encoded.size() / w);
    for (std::size_t pos = 0; pos < encoded.size(); pos += w) {
        const auto value = codebook.value_of(std::string_view(encoded).substr(pos, w));
        if (!value) throw DataError("text contains a word outside the codebook");
        out.push_back(*value);
    }
    return out;
}

void Vocabulary::append(std::string entry) {
    auto [it, inserted] = index.emplace(std::move(entry), entries.size());
    if (inserted) entries.push_back(it->first);
}

nlohmann::ordered_json Vocabulary::to_json() const {
    nlohmann::ordered_json j;
    j["ngram_order"] = ngram_order;
    j["word_length"] = word_length;
    j["mode"] = mode == NgramMode::cumulative ? "cumulative" : "exact";
    j["entries"] = entries;
    return j;
}

Vocabulary Vocabulary::from_json(const nlohmann::json& j) {
    Vocabulary v;
    v.ngram_order = j.at("ngram_order").get<int>();
    v.word_length = j.at("word_length").get<int>();
    v.mode = j.at("mode").get<std::string>() == "exact" ? NgramMode::exact
                                                        : NgramMode::cumulative;
    for (const auto& e : j.at("entries")) v.append(e.get<std::string>());
    return v;
}

Vocabulary build_vocabulary(const std::vector<std::string>& corpus, int ngram_order,
                            int word_length, NgramMode mode) {
    if (ngram_order < 1) throw ValidationError("ngram order must be >= 1");
    if (word_length < 1) throw ValidationError("word length must be >= 1");
    const std::size_t w = static_cast<std::size_t>(word_length);
    for (const auto& line : corpus)
        if (line.size() % w != 0) throw MisalignedCorpus();

    Vocabulary vocab;
    vocab.ngram_order = ngram_order;
    vocab.word_length = word_length;
    vocab.mode = mode;

    const int k_lo = mode == NgramMode::cumulative ? 1 : ngram_order;
    for (int k = k_lo; k <= ngram_order; ++k) {
        const std::size_t window = w * static_cast<std::size_t>(k);
        for (const auto& line : corpus) {
            if (line.size() < window) continue;
            for (std::size_t pos = 0; pos + window <= line.size(); pos += w)
                vocab.append(line.substr(pos, window));
        }
    }
    return vocab;
}

namespace {

// Shared by bow_features and term_frequencies: greedy left-to-right
// non-overlapping counts per entry. Scanning every word-aligned offset in
// order and skipping matches that overlap the previous accepted match of the
// same entry reproduces an independent per-entry greedy scan.
void count_hits(const std::string& encoded, const Vocabulary& vocab,
                std::vector<std::size_t>& counts) {
    const std::size_t w = static_cast<std::size_t>(vocab.word_length);
    if (w == 0 || encoded.size() % w != 0) throw MisalignedCorpus();
    if (vocab.entries.empty()) return;

    std::size_t max_window = 0;
    for (const auto& e : vocab.entries) max_window = std::max(max_window, e.size());

    std::unordered_map<std::size_t, std::size_t> next_allowed;
    const std::string_view text(encoded);
    for (std::size_t pos = 0; pos < text.size(); pos += w) {
        for (std::size_t len = w; len <= max_window && pos + len <= text.size(); len += w) {
            const auto it = vocab.index.find(text.substr(pos, len));
            if (it == vocab.index.end()) continue;
            auto [slot, fresh] = next_allowed.try_emplace(it->second, 0);
            if (pos < slot->second) continue; // overlaps previous hit of this entry
            ++counts[it->second];
            slot->second = pos + len;
        }
    }
}

} // namespace

FeatureVector bow_features(const std::string& encoded, const Vocabulary& vocabulary) {
    FeatureVector fv;
    fv.values.assign(vocabulary.size(), 0.0);
    std::vector<std::size_t> counts(vocabulary.size(), 0);
    count_hits(encoded, vocabulary, counts);

    std::size_t total = 0;
    for (std::size_t c : counts) total += c;
    fv.total_hits = total;
    if (total == 0) return fv; // all-zero vector, flagged by total_hits
    for (std::size_t i = 0; i < counts.size(); ++i)
        fv.values[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
    return fv;
}

std::vector<std::size_t> term_frequencies(const std::vector<std::string>& corpus,
                                          const Vocabulary& vocabulary) {
    std::vector<std::size_t> counts(vocabulary.size(), 0);
    for (const auto& line : corpus) count_hits(line, vocabulary, counts);
    return counts;
}

Vocabulary prune_vocabulary(const Vocabulary& vocabulary, const std::vector<std::string>& corpus,
                            std::size_t min_term_frequency) {
    const auto counts = term_frequencies(corpus, vocabulary);
    Vocabulary pruned;
    pruned.ngram_order = vocabulary.ngram_order;
    pruned.word_length = vocabulary.word_length;
    pruned.mode = vocabulary.mode;
    for (std::size_t i = 0; i < vocabulary.entries.size(); ++i)
        if (counts[i] >= min_term_frequency) pruned.append(vocabulary.entries[i]);
    return pruned;
}

} // namespace elevleak::textrep
