#include "elevleak/eval.hpp"

#include "elevleak/errors.hpp"
#include "elevleak/log.hpp"
#include "elevleak/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>
#include <unordered_set>

namespace elevleak::eval {

std::vector<std::vector<std::size_t>> kfold_split(const std::vector<int>& labels, std::size_t k,
                                                  std::uint64_t seed) {
    if (k < 2) throw ValidationError("k must be >= 2");
    if (labels.size() < k) throw TooFewSamples(labels.size(), k);

    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);

    Rng rng(seed);
    std::vector<std::vector<std::size_t>> folds(k);
    std::size_t cursor = 0;
    // A single cursor runs round-robin across class blocks: fold sizes stay
    // within +-1 globally and per class.
    for (auto& [label, indices] : by_class) {
        rng.shuffle(indices);
        for (std::size_t idx : indices) folds[cursor++ % k].push_back(idx);
    }
    for (auto& fold : folds) std::sort(fold.begin(), fold.end());
    return folds;
}

LabeledDataset balanced_subsample(const LabeledDataset& dataset, LabelLevel level,
                                  std::size_t per_class, std::uint64_t seed) {
    if (per_class < 1) throw ValidationError("per-class sample size must be >= 1");
    if (!dataset.has_level(level)) throw MissingLabelLevel(to_string(level));

    std::map<std::string, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < dataset.samples.size(); ++i)
        by_class[dataset.label_of(dataset.samples[i], level)].push_back(i);

    Rng rng(seed);
    std::vector<std::size_t> keep;
    for (auto& [label, indices] : by_class) {
        if (indices.size() < per_class) throw ClassTooSmall(label, indices.size(), per_class);
        rng.shuffle(indices);
        indices.resize(per_class);
        std::sort(indices.begin(), indices.end());
        keep.insert(keep.end(), indices.begin(), indices.end());
    }
    std::sort(keep.begin(), keep.end());

    LabeledDataset out;
    out.samples.reserve(keep.size());
    for (std::size_t idx : keep) out.samples.push_back(dataset.samples[idx]);
    return out;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
weighted_test_split(const std::vector<int>& labels, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0) || !(test_fraction < 1.0))
        throw ValidationError("test fraction must be in (0, 1)");

    std::map<int, std::size_t> class_sizes;
    for (int y : labels) ++class_sizes[y];
    const double n = static_cast<double>(labels.size());
    const double scale = test_fraction * n / static_cast<double>(class_sizes.size());

    Rng rng(seed);
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double p =
            std::min(1.0, scale / static_cast<double>(class_sizes.at(labels[i])));
        (rng.next_double() < p ? test : train).push_back(i);
    }
    if (train.empty() || test.empty()) throw DegenerateSplit();
    return {std::move(train), std::move(test)};
}

std::pair<LabeledDataset, LabeledDataset> weighted_test_split(const LabeledDataset& dataset,
                                                              LabelLevel level,
                                                              double test_fraction,
                                                              std::uint64_t seed) {
    const auto names = dataset.label_names(level);
    const auto labels = dataset.int_labels(level, names);
    auto [train_idx, test_idx] = weighted_test_split(labels, test_fraction, seed);
    LabeledDataset train, test;
    for (std::size_t i : train_idx) train.samples.push_back(dataset.samples[i]);
    for (std::size_t i : test_idx) test.samples.push_back(dataset.samples[i]);
    return {std::move(train), std::move(test)};
}

LabeledDataset simulate_overlap(const LabeledDataset& dataset, LabelLevel level, double ratio,
                                std::uint64_t seed) {
    if (!(ratio >= 0.0) || !(ratio < 1.0)) throw ValidationError("overlap ratio must be in [0, 1)");
    LabeledDataset out = dataset;
    if (ratio == 0.0) return out;
    if (!dataset.has_level(level)) throw MissingLabelLevel(to_string(level));

    std::map<std::string, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < dataset.samples.size(); ++i)
        by_class[dataset.label_of(dataset.samples[i], level)].push_back(i);

    const Rng base(seed);
    std::size_t class_rank = 0;
    for (const auto& [label, indices] : by_class) {
        if (indices.empty()) throw EmptyClass(label);
        Rng rng = base.fork(class_rank++);
        const double n_orig = static_cast<double>(indices.size());
        const std::size_t n_derived =
            static_cast<std::size_t>(std::llround(ratio * n_orig / (1.0 - ratio)));
        for (std::size_t j = 0; j < n_derived; ++j) {
            const Sample& source = dataset.samples[indices[rng.below(indices.size())]];
            const std::size_t len = source.profile.elevations_m.size();
            const std::size_t min_len = std::max<std::size_t>(
                2, static_cast<std::size_t>(std::ceil(0.7 * static_cast<double>(len))));
            const std::size_t window = min_len + rng.below(len - min_len + 1);
            const std::size_t start = rng.below(len - window + 1);

            Sample derived = source;
            derived.id = source.id + "~ov" + std::to_string(j);
            derived.source_id = source.id;
            derived.provenance = "simulated-overlap";
            derived.profile.elevations_m.assign(
                source.profile.elevations_m.begin() + static_cast<std::ptrdiff_t>(start),
                source.profile.elevations_m.begin() + static_cast<std::ptrdiff_t>(start + window));
            out.samples.push_back(std::move(derived));
        }
    }
    out.validate();
    return out;
}

Metrics compute_metrics(const std::vector<int>& predictions, const std::vector<int>& labels,
                        int class_count) {
    if (predictions.size() != labels.size())
        throw LengthMismatch(predictions.size(), labels.size());
    if (class_count < 1) throw ValidationError("class count must be >= 1");
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] < 0 || labels[i] >= class_count || predictions[i] < 0 ||
            predictions[i] >= class_count)
            throw ValidationError("label or prediction outside [0, class_count)");

    Metrics m;
    const std::size_t k = static_cast<std::size_t>(class_count);
    m.confusion.assign(k, std::vector<std::size_t>(k, 0));
    for (std::size_t i = 0; i < labels.size(); ++i)
        ++m.confusion[static_cast<std::size_t>(labels[i])][static_cast<std::size_t>(predictions[i])];

    const double total = static_cast<double>(labels.size());
    double trace = 0.0;
    for (std::size_t c = 0; c < k; ++c) trace += static_cast<double>(m.confusion[c][c]);
    m.accuracy = total > 0.0 ? trace / total : 0.0;

    auto safe_div = [](double num, double den) { return den > 0.0 ? num / den : 0.0; };
    for (std::size_t c = 0; c < k; ++c) {
        double tp = static_cast<double>(m.confusion[c][c]);
        double fn = 0.0, fp = 0.0;
        for (std::size_t o = 0; o < k; ++o) {
            if (o == c) continue;
            fn += static_cast<double>(m.confusion[c][o]);
            fp += static_cast<double>(m.confusion[o][c]);
        }
        const double tn = total - tp - fn - fp;
        const double support = tp + fn;
        if (support == 0.0) {
            m.absent_classes.push_back(static_cast<int>(c));
            continue; // contributes 0 to every macro average
        }
        const double precision = safe_div(tp, tp + fp);
        const double recall = safe_div(tp, support);
        m.macro_precision += precision;
        m.macro_recall += recall;
        m.macro_f1 += safe_div(2.0 * precision * recall, precision + recall);
        m.macro_specificity += safe_div(tn, tn + fp);
    }
    m.macro_precision /= static_cast<double>(k);
    m.macro_recall /= static_cast<double>(k);
    m.macro_f1 /= static_cast<double>(k);
    m.macro_specificity /= static_cast<double>(k);
    return m;
}

const char* to_string(ThreatModel tm) {
    switch (tm) {
    case ThreatModel::tm1: return "tm1";
    case ThreatModel::tm2: return "tm2";
    case ThreatModel::tm3: return "tm3";
    }
    return "?";
}

const char* to_string(Representation rep) {
    return rep == Representation::text ? "text" : "image";
}

LabelLevel label_level(ThreatModel tm) {
    switch (tm) {
    case ThreatModel::tm1: return LabelLevel::region;
    case ThreatModel::tm2: return LabelLevel::borough;
    case ThreatModel::tm3: return LabelLevel::city;
    }
    return LabelLevel::city;
}

textrep::DiscretizeMode resolve_discretization(const std::string& setting,
                                               const LabeledDataset& dataset) {
    if (setting == "raw") return textrep::DiscretizeMode::raw;
    if (setting == "fine") return textrep::DiscretizeMode::fine;
    if (setting != "auto") throw ConfigError("text.discretization", "must be auto, raw or fine");
    // Mined segment profiles are sparse, so they keep 3-decimal precision;
    // everything else floors to whole meters.
    const bool all_mined = !dataset.samples.empty() &&
                           std::all_of(dataset.samples.begin(), dataset.samples.end(),
                                       [](const Sample& s) { return s.provenance == "mined"; });
    return all_mined ? textrep::DiscretizeMode::fine : textrep::DiscretizeMode::raw;
}

namespace {

struct FoldData {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

double leakage_fraction(const LabeledDataset& ds, const std::vector<std::size_t>& train,
                        const std::vector<std::size_t>& test) {
    std::unordered_set<std::string> train_ids, train_sources;
    for (std::size_t i : train) {
        train_ids.insert(ds.samples[i].id);
        if (!ds.samples[i].source_id.empty()) train_sources.insert(ds.samples[i].source_id);
    }
    std::size_t leaked = 0;
    for (std::size_t i : test) {
        const auto& s = ds.samples[i];
        const bool source_in_train = !s.source_id.empty() && train_ids.count(s.source_id) > 0;
        const bool derivation_in_train = train_sources.count(s.id) > 0;
        if (source_in_train || derivation_in_train) ++leaked;
    }
    return test.empty() ? 0.0 : static_cast<double>(leaked) / static_cast<double>(test.size());
}

std::vector<int> predict_text_model(const ModelSpec& spec,
                                    const std::vector<std::vector<double>>& train_x,
                                    const std::vector<int>& train_y,
                                    const std::vector<std::vector<double>>& test_x,
                                    std::uint64_t fold_seed, unsigned threads) {
    std::vector<int> preds;
    preds.reserve(test_x.size());
    if (spec.family == "svm") {
        const auto model = models::train_svm(train_x, train_y, spec.svm);
        for (const auto& x : test_x) preds.push_back(model.predict(x));
    } else if (spec.family == "rfc") {
        auto cfg = spec.rfc;
        cfg.seed = fold_seed;
        cfg.threads = threads;
        const auto model = models::train_rfc(train_x, train_y, cfg);
        for (const auto& x : test_x) preds.push_back(model.predict(x));
    } else if (spec.family == "mlp") {
        auto cfg = spec.mlp;
        cfg.seed = fold_seed;
        const auto model = models::train_mlp(train_x, train_y, cfg);
        for (const auto& x : test_x) preds.push_back(model.predict(x));
    } else {
        throw ConfigError("model.family",
                          "'" + spec.family + "' is not a text-representation model");
    }
    return preds;
}

FoldResult evaluate_text_fold(const LabeledDataset& ds, const std::vector<int>& labels,
                              int class_count, const FoldData& fold, const ModelSpec& spec,
                              const TextConfig& text_config, textrep::DiscretizeMode mode,
                              std::uint64_t fold_seed, unsigned threads) {
    using namespace textrep;

    std::vector<std::vector<DiscreteValue>> train_values;
    train_values.reserve(fold.train.size());
    for (std::size_t i : fold.train)
        train_values.push_back(discretize(ds.samples[i].profile, mode));

    const Codebook codebook = build_codebook(train_values, text_config.alphabet);
    std::vector<std::string> train_corpus;
    train_corpus.reserve(train_values.size());
    for (const auto& values : train_values)
        train_corpus.push_back(encode_values(values, codebook));

    Vocabulary vocab = build_vocabulary(train_corpus, text_config.ngram_order,
                                        codebook.word_length, text_config.ngram_mode);
    if (text_config.prune_min_frequency > 0)
        vocab = prune_vocabulary(vocab, train_corpus, text_config.prune_min_frequency);

    std::vector<std::vector<double>> train_x;
    std::vector<int> train_y;
    train_x.reserve(train_corpus.size());
    for (std::size_t i = 0; i < train_corpus.size(); ++i) {
        train_x.push_back(bow_features(train_corpus[i], vocab).values);
        train_y.push_back(labels[fold.train[i]]);
    }

    std::vector<std::vector<double>> test_x;
    std::vector<int> test_y;
    FoldResult result;
    for (std::size_t i : fold.test) {
        try {
            const auto encoded = encode_profile(ds.samples[i].profile, codebook, mode);
            test_x.push_back(bow_features(encoded, vocab).values);
            test_y.push_back(labels[i]);
        } catch (const UnknownValue&) {
            ++result.dropped_test; // value never seen in training; drop with a warning
            log::warn("dropping test sample '" + ds.samples[i].id +
                      "': elevation value missing from training codebook");
        }
    }
    if (test_x.empty()) throw DegenerateSplit();

    const auto preds = predict_text_model(spec, train_x, train_y, test_x, fold_seed, threads);
    result.metrics = compute_metrics(preds, test_y, class_count);
    result.test_size = test_y.size();
    result.leakage_fraction = leakage_fraction(ds, fold.train, fold.test);
    return result;
}

std::vector<std::set<int>> auto_finetune_schedule(const std::vector<int>& train_labels,
                                                  int class_count) {
    // Drop the smallest remaining class each round until two are left.
    std::vector<std::pair<std::size_t, int>> sizes; // (count, class)
    std::vector<std::size_t> counts(static_cast<std::size_t>(class_count), 0);
    for (int y : train_labels) ++counts[static_cast<std::size_t>(y)];
    for (int c = 0; c < class_count; ++c)
        sizes.emplace_back(counts[static_cast<std::size_t>(c)], c);
    std::sort(sizes.begin(), sizes.end());

    std::vector<std::set<int>> schedule;
    for (std::size_t i = 0; i + 2 < sizes.size(); ++i) schedule.push_back({sizes[i].second});
    return schedule;
}

FoldResult evaluate_image_fold(const LabeledDataset& ds, const std::vector<int>& labels,
                               int class_count, const std::vector<imagerep::ImageTensor>& images,
                               const FoldData& fold, const ModelSpec& spec,
                               std::uint64_t fold_seed, unsigned threads) {
    if (spec.family != "cnn")
        throw ConfigError("model.family",
                          "'" + spec.family + "' is not an image-representation model");

    std::vector<imagerep::ImageTensor> train_images;
    std::vector<int> train_y;
    train_images.reserve(fold.train.size());
    for (std::size_t i : fold.train) {
        train_images.push_back(images[i]);
        train_y.push_back(labels[i]);
    }

    models::CnnModel model;
    std::vector<int> round_classes; // classes of the final fine-tune round
    if (spec.cnn_method == CnnMethod::finetune) {
        auto schedule = spec.finetune_schedule.empty()
                            ? auto_finetune_schedule(train_y, class_count)
                            : spec.finetune_schedule;
        const auto rounds = models::make_rounds(train_y, class_count, schedule, fold_seed);
        std::vector<models::CnnConfig> configs(rounds.size(), spec.cnn);
        for (std::size_t i = 0; i < configs.size(); ++i) {
            configs[i].seed = Rng(fold_seed).fork(100 + i).seed();
            configs[i].threads = threads;
        }
        auto ft = models::fine_tune(train_images, train_y, rounds, configs);
        model = std::move(ft.final_model);
        round_classes = ft.round_classes.back();
    } else {
        auto cfg = spec.cnn;
        cfg.seed = fold_seed;
        cfg.threads = threads;
        cfg.class_weights.clear();
        if (spec.cnn_method == CnnMethod::weighted)
            cfg.class_weights = models::inverse_size_weights(train_y, class_count);
        // Force a head for every class even if a fold misses one.
        cfg.c1 = spec.cnn.c1;
        cfg.c2 = spec.cnn.c2;
        model = models::make_cnn(class_count, cfg.seed, cfg.c1, cfg.c2);
        models::cnn_train_inplace(model, train_images, train_y, cfg);
    }

    std::vector<int> preds, test_y;
    preds.reserve(fold.test.size());
    for (std::size_t i : fold.test) {
        int p = model.predict(images[i]);
        // Fine-tuned final round carries global classes in ascending order;
        // map the local argmax back if needed.
        if (!round_classes.empty()) p = round_classes[static_cast<std::size_t>(p)];
        preds.push_back(p);
        test_y.push_back(labels[i]);
    }

    FoldResult result;
    result.metrics = compute_metrics(preds, test_y, class_count);
    result.test_size = test_y.size();
    result.leakage_fraction = leakage_fraction(ds, fold.train, fold.test);
    return result;
}

Metrics aggregate_metrics(const std::vector<FoldResult>& folds, int class_count) {
    Metrics agg;
    const std::size_t k = static_cast<std::size_t>(class_count);
    agg.confusion.assign(k, std::vector<std::size_t>(k, 0));
    std::set<int> absent;
    for (const auto& fold : folds) {
        agg.accuracy += fold.metrics.accuracy;
        agg.macro_precision += fold.metrics.macro_precision;
        agg.macro_recall += fold.metrics.macro_recall;
        agg.macro_f1 += fold.metrics.macro_f1;
        agg.macro_specificity += fold.metrics.macro_specificity;
        for (std::size_t a = 0; a < k; ++a)
            for (std::size_t b = 0; b < k; ++b) agg.confusion[a][b] += fold.metrics.confusion[a][b];
        absent.insert(fold.metrics.absent_classes.begin(), fold.metrics.absent_classes.end());
    }
    const double n = static_cast<double>(folds.size());
    agg.accuracy /= n;
    agg.macro_precision /= n;
    agg.macro_recall /= n;
    agg.macro_f1 /= n;
    agg.macro_specificity /= n;
    agg.absent_classes.assign(absent.begin(), absent.end());
    return agg;
};

TmReport run_single(const LabeledDataset& input, LabelLevel level, bool balance,
                    Representation representation, const ModelSpec& spec,
                    const TextConfig& text_config, const ProtocolConfig& protocol,
                    const imagerep::Palette& palette, const std::string& scope) {
    LabeledDataset ds = input;
    if (protocol.overlap_ratio > 0.0)
        ds = simulate_overlap(ds, level, protocol.overlap_ratio, Rng(protocol.seed).fork(7).seed());

    if (balance) {
        std::size_t per_class = SIZE_MAX;
        if (protocol.per_class) {
            per_class = *protocol.per_class;
        } else {
            std::map<std::string, std::size_t> counts;
            for (const auto& s : ds.samples) ++counts[ds.label_of(s, level)];
            for (const auto& [label, count] : counts) per_class = std::min(per_class, count);
        }
        ds = balanced_subsample(ds, level, per_class, Rng(protocol.seed).fork(8).seed());
    }

    TmReport report;
    report.scope = scope;
    report.class_names = ds.label_names(level);
    if (report.class_names.size() < 2) throw SingleClassDataset();
    const auto labels = ds.int_labels(level, report.class_names);
    const int class_count = static_cast<int>(report.class_names.size());

    std::vector<FoldData> folds;
    if (protocol.split == "kfold") {
        auto parts = kfold_split(labels, protocol.k, Rng(protocol.seed).fork(9).seed());
        for (std::size_t f = 0; f < parts.size(); ++f) {
            FoldData fold;
            fold.test = parts[f];
            for (std::size_t o = 0; o < parts.size(); ++o) {
                if (o == f) continue;
                fold.train.insert(fold.train.end(), parts[o].begin(), parts[o].end());
            }
            std::sort(fold.train.begin(), fold.train.end());
            folds.push_back(std::move(fold));
        }
    } else if (protocol.split == "weighted") {
        FoldData fold;
        auto [train, test] =
            weighted_test_split(labels, protocol.test_fraction, Rng(protocol.seed).fork(9).seed());
        fold.train = std::move(train);
        fold.test = std::move(test);
        folds.push_back(std::move(fold));
    } else {
        throw ConfigError("protocol.split", "must be kfold or weighted");
    }

    std::vector<imagerep::ImageTensor> images;
    if (representation == Representation::image) {
        images.reserve(ds.samples.size());
        for (const auto& s : ds.samples) images.push_back(imagerep::rasterize(s.profile, palette));
    }
    const auto mode = resolve_discretization(text_config.discretization, ds);

    for (std::size_t f = 0; f < folds.size(); ++f) {
        const std::uint64_t fold_seed = Rng(protocol.seed).fork(10 + f).seed();
        FoldResult result =
            representation == Representation::text
                ? evaluate_text_fold(ds, labels, class_count, folds[f], spec, text_config, mode,
                                     fold_seed, protocol.threads)
                : evaluate_image_fold(ds, labels, class_count, images, folds[f], spec, fold_seed,
                                      protocol.threads);
        report.folds.push_back(std::move(result));
    }
    report.aggregate = aggregate_metrics(report.folds, class_count);
    return report;
}

} // namespace

ExperimentReport run_threat_model(ThreatModel tm, const LabeledDataset& dataset,
                                  Representation representation, const ModelSpec& model,
                                  const TextConfig& text_config, const ProtocolConfig& protocol,
                                  const imagerep::Palette& palette) {
    const LabelLevel level = label_level(tm);
    if (!dataset.has_level(level)) throw MissingLabelLevel(to_string(level));
    dataset.validate();

    ExperimentReport report;
    report.tm = tm;
    report.representation = representation;
    report.model_family = model.family;

    if (tm == ThreatModel::tm2) {
        // One model per city over its boroughs.
        if (!dataset.has_level(LabelLevel::city)) throw MissingLabelLevel("city");
        for (const auto& city : dataset.label_names(LabelLevel::city)) {
            LabeledDataset sub;
            for (const auto& s : dataset.samples)
                if (s.city_label == city) sub.samples.push_back(s);
            report.reports.push_back(run_single(sub, level, /*balance=*/false, representation,
                                                model, text_config, protocol, palette, city));
        }
    } else {
        report.reports.push_back(run_single(dataset, level, /*balance=*/true, representation,
                                            model, text_config, protocol, palette, ""));
    }
    return report;
}

} // namespace elevleak::eval
