#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "elevleak/errors.hpp"
#include "elevleak/eval.hpp"
#include "elevleak/rng.hpp"
#include "elevleak/synth.hpp"

#include <algorithm>
#include <map>
#include <set>

using namespace elevleak;
using namespace elevleak::eval;

namespace {

std::vector<int> random_labels(Rng& rng, std::size_t n, int classes) {
    std::vector<int> labels(n);
    for (auto& y : labels) y = static_cast<int>(rng.below(static_cast<std::uint64_t>(classes)));
    for (int c = 0; c < classes && static_cast<std::size_t>(c) < n; ++c)
        labels[static_cast<std::size_t>(c)] = c; // every class present
    return labels;
}

LabeledDataset tiny_dataset(const std::vector<std::pair<std::string, std::size_t>>& class_sizes,
                            std::size_t profile_len = 8) {
    LabeledDataset ds;
    std::size_t serial = 0;
    for (const auto& [label, count] : class_sizes) {
        for (std::size_t i = 0; i < count; ++i) {
            Sample s;
            s.id = label + "-" + std::to_string(i);
            s.city_label = label;
            for (std::size_t p = 0; p < profile_len; ++p)
                s.profile.elevations_m.push_back(static_cast<double>(serial + p));
            ds.samples.push_back(std::move(s));
            ++serial;
        }
    }
    return ds;
}

// One-vs-rest confusion-matrix metrics, written independently of the
// implementation: per class, explicit TP/FP/FN/TN tallies.
struct OvrOracle {
    double accuracy = 0, precision = 0, recall = 0, f1 = 0, specificity = 0;
};

OvrOracle ovr_metrics(const std::vector<int>& preds, const std::vector<int>& labels, int k) {
    OvrOracle m;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) hits += preds[i] == labels[i];
    m.accuracy = static_cast<double>(hits) / static_cast<double>(preds.size());
    for (int c = 0; c < k; ++c) {
        double tp = 0, fp = 0, fn = 0, tn = 0;
        for (std::size_t i = 0; i < preds.size(); ++i) {
            const bool truth = labels[i] == c, said = preds[i] == c;
            tp += truth && said;
            fp += !truth && said;
            fn += truth && !said;
            tn += !truth && !said;
        }
        if (tp + fn == 0) continue; // absent class contributes zero
        const double prec = tp + fp > 0 ? tp / (tp + fp) : 0.0;
        const double rec = tp / (tp + fn);
        m.precision += prec;
        m.recall += rec;
        m.f1 += prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
        m.specificity += tn + fp > 0 ? tn / (tn + fp) : 0.0;
    }
    m.precision /= k;
    m.recall /= k;
    m.f1 /= k;
    m.specificity /= k;
    return m;
}

} // namespace

TEST_CASE("kfold_split gives singleton folds when k equals the dataset size") {
    const std::vector<int> labels{0, 1, 0, 1, 0, 1, 0, 1, 0, 1};
    const auto folds = kfold_split(labels, 10, 3);
    REQUIRE(folds.size() == 10);
    for (const auto& fold : folds) CHECK(fold.size() == 1);
}

TEST_CASE("kfold_split partitions: disjoint, covering, sizes within one") {
    Rng rng(12);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 10 + rng.below(200);
        const int classes = 2 + static_cast<int>(rng.below(4));
        const auto labels = random_labels(rng, n, classes);
        for (std::size_t k : {2ul, 5ul, 7ul}) {
            if (n < k) continue;
            const auto folds = kfold_split(labels, k, trial);
            std::set<std::size_t> seen;
            std::size_t min_size = n, max_size = 0;
            for (const auto& fold : folds) {
                for (std::size_t idx : fold) CHECK(seen.insert(idx).second); // disjoint
                min_size = std::min(min_size, fold.size());
                max_size = std::max(max_size, fold.size());
            }
            CHECK(seen.size() == n); // covering
            CHECK(max_size - min_size <= 1);
        }
    }
}

TEST_CASE("kfold_split stratifies a 60/40 dataset within one sample per fold") {
    std::vector<int> labels(100);
    for (std::size_t i = 0; i < 100; ++i) labels[i] = i < 60 ? 0 : 1;
    const auto folds = kfold_split(labels, 5, 7);
    for (const auto& fold : folds) {
        std::size_t zeros = 0;
        for (std::size_t idx : fold) zeros += labels[idx] == 0;
        CHECK(zeros == 12); // exactly 60/5; +-1 would also be legal
        CHECK(fold.size() - zeros == 8);
    }
}

TEST_CASE("kfold_split validates inputs") {
    CHECK_THROWS_AS(kfold_split({0, 1, 0}, 5, 0), TooFewSamples);
    CHECK_THROWS_AS(kfold_split({0, 1, 0}, 1, 0), ValidationError);
}

TEST_CASE("balanced_subsample keeps the full smallest class at S = min size") {
    const auto ds = tiny_dataset({{"wdc", 30}, {"fl", 25}, {"nyc", 20}, {"ca", 18}});
    const auto out = balanced_subsample(ds, LabelLevel::city, 18, 5);
    std::map<std::string, std::size_t> counts;
    std::set<std::string> ca_ids;
    for (const auto& s : out.samples) {
        ++counts[s.city_label];
        if (s.city_label == "ca") ca_ids.insert(s.id);
    }
    CHECK(counts.size() == 4);
    for (const auto& [label, count] : counts) CHECK(count == 18);
    CHECK(ca_ids.size() == 18); // the whole smallest class survives
}

TEST_CASE("balanced_subsample S=1 picks one per class, deterministically") {
    const auto ds = tiny_dataset({{"a", 5}, {"b", 7}});
    const auto once = balanced_subsample(ds, LabelLevel::city, 1, 11);
    REQUIRE(once.samples.size() == 2);
    const auto again = balanced_subsample(ds, LabelLevel::city, 1, 11);
    CHECK(to_jsonl(once) == to_jsonl(again));
    const auto other = balanced_subsample(ds, LabelLevel::city, 1, 12);
    CHECK(other.samples.size() == 2);
}

TEST_CASE("balanced_subsample refuses classes smaller than S") {
    const auto ds = tiny_dataset({{"a", 5}, {"b", 3}});
    try {
        balanced_subsample(ds, LabelLevel::city, 4, 0);
        FAIL("expected ClassTooSmall");
    } catch (const ClassTooSmall& e) {
        CHECK(e.label == "b");
    }
}

TEST_CASE("weighted_test_split reduces to uniform sampling on balanced data") {
    std::vector<int> labels(400);
    for (std::size_t i = 0; i < 400; ++i) labels[i] = static_cast<int>(i % 4);
    double total_test = 0.0;
    const int draws = 300;
    for (int d = 0; d < draws; ++d) {
        const auto [train, test] = weighted_test_split(labels, 0.25, 1000 + d);
        CHECK(train.size() + test.size() == 400);
        total_test += static_cast<double>(test.size());
    }
    // E[test] = 100; sigma per draw = sqrt(400 * 0.25 * 0.75) ~= 8.7
    const double mean_test = total_test / draws;
    CHECK(std::abs(mean_test - 100.0) < 3.0 * 8.66 / std::sqrt(static_cast<double>(draws)));
}

TEST_CASE("weighted_test_split selects inversely to class size") {
    std::vector<int> labels(1000);
    for (std::size_t i = 0; i < 1000; ++i) labels[i] = i < 900 ? 0 : 1;
    double test_majority = 0.0, test_minority = 0.0;
    const int draws = 400;
    for (int d = 0; d < draws; ++d) {
        const auto [train, test] = weighted_test_split(labels, 0.2, 5000 + d);
        for (std::size_t idx : test) (labels[idx] == 0 ? test_majority : test_minority) += 1.0;
    }
    // p(majority) = 0.2*1000/(2*900) = 1/9, p(minority) clamps to 1.
    CHECK(test_minority == doctest::Approx(100.0 * draws)); // certainty
    const double sigma = std::sqrt(900.0 * (1.0 / 9.0) * (8.0 / 9.0) * draws);
    CHECK(std::abs(test_majority - 100.0 * draws) < 4.0 * sigma);
}

TEST_CASE("weighted_test_split rejects degenerate fractions and splits") {
    const std::vector<int> labels{0, 1};
    CHECK_THROWS_AS(weighted_test_split(labels, 0.0, 1), ValidationError);
    CHECK_THROWS_AS(weighted_test_split(labels, 1.0, 1), ValidationError);
    CHECK_THROWS_AS(weighted_test_split(labels, 1e-9, 1), DegenerateSplit); // empty test side
}

TEST_CASE("simulate_overlap at ratio 0 is the identity") {
    const auto ds = tiny_dataset({{"a", 5}, {"b", 4}});
    const auto out = simulate_overlap(ds, LabelLevel::city, 0.0, 3);
    CHECK(to_jsonl(out) == to_jsonl(ds));
}

TEST_CASE("simulate_overlap hits the requested ratio within one sample") {
    const auto ds = tiny_dataset({{"a", 100}}, 40);
    const auto out = simulate_overlap(ds, LabelLevel::city, 0.35, 9);
    const std::size_t derived = out.samples.size() - 100;
    CHECK(derived == 54); // n/(100+n) ~= 0.35 -> n = 54
    for (std::size_t i = 100; i < out.samples.size(); ++i) {
        CHECK(out.samples[i].provenance == "simulated-overlap");
        CHECK(!out.samples[i].source_id.empty());
    }

    Rng rng(31);
    for (int trial = 0; trial < 15; ++trial) {
        const std::size_t n = 5 + rng.below(200);
        const double ratio = 0.05 + rng.next_double() * 0.6;
        const auto base = tiny_dataset({{"x", n}}, 20);
        const auto sim = simulate_overlap(base, LabelLevel::city, ratio, trial);
        const double d = static_cast<double>(sim.samples.size() - n);
        const double achieved = d / static_cast<double>(sim.samples.size());
        // off by at most one derived sample
        const double lo = (d - 1.0) / (static_cast<double>(n) + d - 1.0);
        const double hi = (d + 1.0) / (static_cast<double>(n) + d + 1.0);
        CHECK(lo <= ratio + 1e-9);
        CHECK(hi >= ratio - 1e-9);
        (void)achieved;
    }
}

TEST_CASE("derived samples are sub-windows covering at least 70% of their source") {
    const auto ds = tiny_dataset({{"a", 20}, {"b", 10}}, 30);
    const auto out = simulate_overlap(ds, LabelLevel::city, 0.4, 17);
    std::map<std::string, const Sample*> by_id;
    for (const auto& s : ds.samples) by_id[s.id] = &s;

    std::size_t checked = 0;
    for (const auto& s : out.samples) {
        if (s.provenance != "simulated-overlap") continue;
        REQUIRE(by_id.count(s.source_id) == 1);
        const auto& source = by_id.at(s.source_id)->profile.elevations_m;
        const auto& window = s.profile.elevations_m;
        CHECK(window.size() >=
              static_cast<std::size_t>(std::ceil(0.7 * static_cast<double>(source.size()))));
        // contiguous containment
        const auto it = std::search(source.begin(), source.end(), window.begin(), window.end());
        CHECK(it != source.end());
        CHECK(s.city_label == by_id.at(s.source_id)->city_label);
        ++checked;
    }
    CHECK(checked > 0);
}

TEST_CASE("simulate_overlap validates the ratio") {
    const auto ds = tiny_dataset({{"a", 3}});
    CHECK_THROWS_AS(simulate_overlap(ds, LabelLevel::city, 1.0, 0), ValidationError);
    CHECK_THROWS_AS(simulate_overlap(ds, LabelLevel::city, -0.1, 0), ValidationError);
}

TEST_CASE("compute_metrics is perfect on perfect predictions") {
    const std::vector<int> y{0, 1, 2, 0, 1, 2};
    const auto m = compute_metrics(y, y, 3);
    CHECK(m.accuracy == 1.0);
    CHECK(m.macro_precision == 1.0);
    CHECK(m.macro_recall == 1.0);
    CHECK(m.macro_f1 == 1.0);
    CHECK(m.macro_specificity == 1.0);
    CHECK(m.absent_classes.empty());
}

TEST_CASE("constant predictor on balanced 2-class data: accuracy 1/2, macro-F1 1/3") {
    std::vector<int> labels, preds;
    for (int i = 0; i < 10; ++i) {
        labels.push_back(i % 2);
        preds.push_back(0);
    }
    const auto m = compute_metrics(preds, labels, 2);
    CHECK(m.accuracy == doctest::Approx(0.5));
    CHECK(m.macro_f1 == doctest::Approx(1.0 / 3.0));
    CHECK(m.macro_recall == doctest::Approx(0.5));
    CHECK(m.macro_specificity == doctest::Approx(0.5)); // 0 for class 0, 1 for class 1
}

TEST_CASE("compute_metrics equals the one-vs-rest oracle on random fixtures") {
    Rng rng(71);
    for (int trial = 0; trial < 60; ++trial) {
        const int k = 3;
        const std::size_t n = 10 + rng.below(80);
        const auto labels = random_labels(rng, n, k);
        std::vector<int> preds(n);
        for (auto& p : preds) p = static_cast<int>(rng.below(k));

        const auto m = compute_metrics(preds, labels, k);
        const auto oracle = ovr_metrics(preds, labels, k);
        CHECK(m.accuracy == doctest::Approx(oracle.accuracy).epsilon(1e-12));
        CHECK(m.macro_precision == doctest::Approx(oracle.precision).epsilon(1e-12));
        CHECK(m.macro_recall == doctest::Approx(oracle.recall).epsilon(1e-12));
        CHECK(m.macro_f1 == doctest::Approx(oracle.f1).epsilon(1e-12));
        CHECK(m.macro_specificity == doctest::Approx(oracle.specificity).epsilon(1e-12));

        // row sums of the confusion matrix are the class supports
        for (int c = 0; c < k; ++c) {
            std::size_t row_sum = 0;
            for (int o = 0; o < k; ++o) row_sum += m.confusion[c][o];
            std::size_t support = 0;
            for (int y : labels) support += y == c;
            CHECK(row_sum == support);
        }
    }
}

TEST_CASE("compute_metrics is permutation-invariant over sample order") {
    Rng rng(81);
    const auto labels = random_labels(rng, 50, 3);
    std::vector<int> preds(50);
    for (auto& p : preds) p = static_cast<int>(rng.below(3));

    std::vector<std::size_t> order(50);
    for (std::size_t i = 0; i < 50; ++i) order[i] = i;
    rng.shuffle(order);
    std::vector<int> labels_p, preds_p;
    for (std::size_t idx : order) {
        labels_p.push_back(labels[idx]);
        preds_p.push_back(preds[idx]);
    }
    const auto a = compute_metrics(preds, labels, 3);
    const auto b = compute_metrics(preds_p, labels_p, 3);
    CHECK(a.accuracy == b.accuracy);
    CHECK(a.macro_f1 == b.macro_f1);
    CHECK(a.confusion == b.confusion);
}

TEST_CASE("compute_metrics flags absent classes and validates lengths") {
    const auto m = compute_metrics({0, 0, 1}, {0, 0, 1}, 4);
    CHECK(m.absent_classes == std::vector<int>{2, 3});
    CHECK(m.accuracy == 1.0);
    CHECK(m.macro_recall == doctest::Approx(0.5)); // 2 of 4 classes contribute 1.0
    CHECK_THROWS_AS(compute_metrics({0}, {0, 1}, 2), LengthMismatch);
}

// ---- the driver ------------------------------------------------------------

namespace {

LabeledDataset synthetic_cities(std::size_t cities, std::size_t routes, double gap,
                                std::uint64_t seed, std::size_t boroughs = 0) {
    auto specs = synth::spread_city_specs(cities, 0.0, gap, 80.0, routes, seed);
    if (boroughs > 0)
        for (auto& spec : specs)
            for (std::size_t b = 0; b < boroughs; ++b)
                spec.borough_labels.push_back(spec.label + "-b" + std::to_string(b));
    synth::RouteConfig cfg;
    cfg.n_points = 60;
    return synth::gen_city_dataset(specs, cfg, seed);
}

ProtocolConfig fast_protocol() {
    ProtocolConfig protocol;
    protocol.k = 3;
    protocol.seed = 77;
    return protocol;
}

ModelSpec fast_mlp() {
    ModelSpec spec;
    spec.family = "mlp";
    spec.mlp.epochs = 40;
    spec.mlp.batch_size = 32;
    return spec;
}

} // namespace

TEST_CASE("run_threat_model tm3 on separable synthetic cities beats chance") {
    const auto ds = synthetic_cities(3, 30, 400.0, 5);
    TextConfig text;
    text.ngram_order = 4;
    text.prune_min_frequency = 2;
    const auto report =
        run_threat_model(ThreatModel::tm3, ds, Representation::text, fast_mlp(), text,
                         fast_protocol());
    REQUIRE(report.reports.size() == 1);
    CHECK(report.reports[0].class_names.size() == 3);
    CHECK(report.reports[0].folds.size() == 3);
    CHECK(report.reports[0].aggregate.accuracy > 1.0 / 3.0);
}

TEST_CASE("run_threat_model is deterministic for a fixed config and seed") {
    const auto ds = synthetic_cities(2, 12, 500.0, 6);
    TextConfig text;
    text.ngram_order = 2;
    ModelSpec spec = fast_mlp();
    spec.mlp.epochs = 10;
    ProtocolConfig protocol = fast_protocol();
    protocol.k = 2;

    const auto a = run_threat_model(ThreatModel::tm3, ds, Representation::text, spec, text,
                                    protocol);
    const auto b = run_threat_model(ThreatModel::tm3, ds, Representation::text, spec, text,
                                    protocol);
    REQUIRE(a.reports.size() == b.reports.size());
    for (std::size_t i = 0; i < a.reports.size(); ++i) {
        CHECK(a.reports[i].aggregate.accuracy == b.reports[i].aggregate.accuracy);
        CHECK(a.reports[i].aggregate.confusion == b.reports[i].aggregate.confusion);
    }
}

TEST_CASE("tm2 rejects a city with a single borough") {
    auto ds = synthetic_cities(2, 10, 300.0, 8, /*boroughs=*/1);
    TextConfig text;
    text.ngram_order = 2;
    ProtocolConfig protocol = fast_protocol();
    protocol.k = 2;
    CHECK_THROWS_AS(run_threat_model(ThreatModel::tm2, ds, Representation::text, fast_mlp(),
                                     text, protocol),
                    SingleClassDataset);
}

TEST_CASE("tm1 needs region labels") {
    const auto ds = synthetic_cities(2, 6, 300.0, 9);
    TextConfig text;
    CHECK_THROWS_AS(run_threat_model(ThreatModel::tm1, ds, Representation::text, fast_mlp(),
                                     text, fast_protocol()),
                    MissingLabelLevel);
}

TEST_CASE("overlap leakage across the split is measured and reported") {
    const auto ds = synthetic_cities(2, 20, 500.0, 10);
    TextConfig text;
    text.ngram_order = 2;
    ModelSpec spec = fast_mlp();
    spec.mlp.epochs = 10;
    ProtocolConfig protocol = fast_protocol();
    protocol.k = 2;
    protocol.overlap_ratio = 0.3;

    const auto report =
        run_threat_model(ThreatModel::tm3, ds, Representation::text, spec, text, protocol);
    double max_leakage = 0.0;
    for (const auto& fold : report.reports[0].folds)
        max_leakage = std::max(max_leakage, fold.leakage_fraction);
    CHECK(max_leakage > 0.0); // derived/source pairs do straddle folds
}
