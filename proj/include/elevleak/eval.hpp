#pragma once

#include "elevleak/dataset.hpp"
#include "elevleak/imagerep.hpp"
#include "elevleak/models/forest.hpp"
#include "elevleak/models/linear_svm.hpp"
#include "elevleak/models/mlp.hpp"
#include "elevleak/models/rounds.hpp"
#include "elevleak/textrep.hpp"

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace elevleak::eval {

// ---- splitting -------------------------------------------------------------

// Stratified k-fold partition of label indices: folds are disjoint, cover
// everything, differ by at most 1 in size, and hold each class's share
// within +-1 sample.
std::vector<std::vector<std::size_t>> kfold_split(const std::vector<int>& labels, std::size_t k,
                                                  std::uint64_t seed);

// Exactly per_class seeded-random samples from every class at `level`.
LabeledDataset balanced_subsample(const LabeledDataset& dataset, LabelLevel level,
                                  std::size_t per_class, std::uint64_t seed);

// Per-sample test probability proportional to 1 / class size, scaled so the
// expected test size is test_fraction * N (clamped at 1). Returns
// (train indices, test indices).
std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
weighted_test_split(const std::vector<int>& labels, double test_fraction, std::uint64_t seed);

std::pair<LabeledDataset, LabeledDataset> weighted_test_split(const LabeledDataset& dataset,
                                                              LabelLevel level,
                                                              double test_fraction,
                                                              std::uint64_t seed);

// Adds derived samples per class until they make up `ratio` of the class
// (within +-1 sample). A derived sample is a contiguous sub-window of its
// source covering at least 70% of it; its source_id records the origin.
LabeledDataset simulate_overlap(const LabeledDataset& dataset, LabelLevel level, double ratio,
                                std::uint64_t seed);

// ---- metrics ---------------------------------------------------------------

struct Metrics {
    double accuracy = 0.0;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    double macro_specificity = 0.0;
    std::vector<std::vector<std::size_t>> confusion; // [true][predicted]
    std::vector<int> absent_classes;                 // contributed 0 to the macros
};

Metrics compute_metrics(const std::vector<int>& predictions, const std::vector<int>& labels,
                        int class_count);

// ---- experiment driver -----------------------------------------------------

enum class ThreatModel { tm1, tm2, tm3 };
enum class Representation { text, image };
enum class CnnMethod { plain, weighted, finetune };

const char* to_string(ThreatModel tm);
const char* to_string(Representation rep);
LabelLevel label_level(ThreatModel tm); // tm1 -> region, tm2 -> borough, tm3 -> city

struct ModelSpec {
    std::string family; // svm | rfc | mlp | cnn
    models::SvmConfig svm;
    models::ForestConfig rfc;
    models::MlpConfig mlp;
    models::CnnConfig cnn;
    CnnMethod cnn_method = CnnMethod::plain;
    // Fine-tuning discard schedule in global class indices of the experiment;
    // empty means drop-smallest-first down to 2 classes.
    std::vector<std::set<int>> finetune_schedule;
};

struct TextConfig {
    std::string alphabet = textrep::kDefaultAlphabet;
    int ngram_order = 8;
    textrep::NgramMode ngram_mode = textrep::NgramMode::cumulative;
    std::size_t prune_min_frequency = 2;
    std::string discretization = "auto"; // auto | raw | fine
};

textrep::DiscretizeMode resolve_discretization(const std::string& setting,
                                               const LabeledDataset& dataset);

struct ProtocolConfig {
    std::size_t k = 10;
    std::optional<std::size_t> per_class; // empty -> smallest class size
    std::uint64_t seed = 0;
    double overlap_ratio = 0.0;
    std::string split = "kfold"; // kfold | weighted
    double test_fraction = 0.2;
    unsigned threads = 1;
};

struct FoldResult {
    Metrics metrics;
    std::size_t test_size = 0;
    std::size_t dropped_test = 0;     // text path: unknown-value samples
    double leakage_fraction = 0.0;    // overlap pairs straddling the split
};

struct TmReport {
    std::string scope; // empty for TM-1/TM-3; city name for TM-2 entries
    std::vector<std::string> class_names;
    std::vector<FoldResult> folds;
    Metrics aggregate; // per-metric mean over folds; confusion summed
};

struct ExperimentReport {
    ThreatModel tm = ThreatModel::tm3;
    Representation representation = Representation::text;
    std::string model_family;
    std::vector<TmReport> reports; // one entry, or one per city for TM-2
};

ExperimentReport run_threat_model(ThreatModel tm, const LabeledDataset& dataset,
                                  Representation representation, const ModelSpec& model,
                                  const TextConfig& text_config, const ProtocolConfig& protocol,
                                  const imagerep::Palette& palette = imagerep::Palette::defaults());

} // namespace elevleak::eval
