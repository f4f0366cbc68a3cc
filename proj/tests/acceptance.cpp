// Acceptance suite: runs the numbered release criteria and prints one
// pass/fail line each. `acceptance` runs everything, `acceptance
// --criterion N` one check; the exit code is the number of failures.

#include "elevleak/eval.hpp"
#include "elevleak/geodata.hpp"
#include "elevleak/miner.hpp"
#include "elevleak/models/cnn.hpp"
#include "elevleak/models/mlp.hpp"
#include "elevleak/models/rounds.hpp"
#include "elevleak/rng.hpp"
#include "elevleak/synth.hpp"
#include "elevleak/textrep.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace elevleak;

namespace {

struct Outcome {
    bool ok = true;
    std::string detail;

    void expect(bool condition, const std::string& what) {
        if (condition) return;
        ok = false;
        if (!detail.empty()) detail += "; ";
        detail += what;
    }
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Shared synthetic TM-3 configuration: 5 cities, base gaps of 300 m,
// 200 routes per city, 10-fold CV, 8-gram BoW.
// ---------------------------------------------------------------------------

constexpr std::uint64_t kSeed = 20250810;

LabeledDataset tm3_dataset() {
    auto specs = synth::spread_city_specs(/*cities=*/5, /*base0=*/0.0, /*gap=*/300.0,
                                          /*bump_height=*/110.0, /*routes=*/200, kSeed);
    synth::RouteConfig route_cfg;
    route_cfg.n_points = 100;
    route_cfg.step_deg = 0.002;
    return synth::gen_city_dataset(specs, route_cfg, kSeed);
}

eval::TextConfig tm3_text() {
    eval::TextConfig text;
    text.ngram_order = 8;
    text.ngram_mode = textrep::NgramMode::cumulative;
    text.prune_min_frequency = 12;
    text.discretization = "raw";
    return text;
}

eval::ProtocolConfig tm3_protocol(double overlap = 0.0) {
    eval::ProtocolConfig protocol;
    protocol.k = 10;
    protocol.seed = kSeed;
    protocol.overlap_ratio = overlap;
    protocol.threads = 2;
    return protocol;
}

eval::ModelSpec mlp_spec() {
    eval::ModelSpec spec;
    spec.family = "mlp";
    spec.mlp.hidden = 100;
    spec.mlp.epochs = 40;
    spec.mlp.batch_size = 64;
    spec.mlp.adam.lr = 0.001;
    return spec;
}

eval::ModelSpec svm_spec() {
    eval::ModelSpec spec;
    spec.family = "svm";
    spec.svm.epochs = 120;
    spec.svm.lr = 0.01;
    spec.svm.regularization = 1e-4;
    return spec;
}

eval::ModelSpec rfc_spec() {
    eval::ModelSpec spec;
    spec.family = "rfc";
    spec.rfc.trees = 100;
    return spec;
}

eval::ModelSpec cnn_spec() {
    eval::ModelSpec spec;
    spec.family = "cnn";
    spec.cnn.c1 = 16;
    spec.cnn.c2 = 32;
    spec.cnn.epochs = 9;
    spec.cnn.batch_size = 32;
    spec.cnn.adam.lr = 0.0015;
    return spec;
}

double tm3_accuracy(const LabeledDataset& ds, eval::Representation rep,
                    const eval::ModelSpec& spec, double overlap) {
    const auto report = eval::run_threat_model(eval::ThreatModel::tm3, ds, rep, spec, tm3_text(),
                                               tm3_protocol(overlap));
    return report.reports.at(0).aggregate.accuracy;
}

// ---------------------------------------------------------------------------
// 1. CNN shape trace
// ---------------------------------------------------------------------------

void criterion_shape_trace(Outcome& out) {
    const auto model = models::make_cnn(5, 1);
    imagerep::ImageTensor image;
    Rng rng(2);
    for (auto& v : image.values) v = rng.next_double();

    models::CnnTrace trace;
    const auto logits = models::cnn_forward(model, image, &trace);
    out.expect(trace.conv1.size() == 16u * 32 * 32, "conv1 is not 16x32x32");
    out.expect(trace.pool1.size() == 16u * 16 * 16, "pool1 is not 16x16x16");
    out.expect(trace.conv2.size() == 32u * 16 * 16, "conv2 is not 32x16x16");
    out.expect(trace.pool2.size() == 32u * 8 * 8, "pool2 is not 32x8x8");
    out.expect(logits.size() == 5, "logit dimension is not the class count");
    out.detail = "3x32x32 -> 16x32x32 -> 16x16x16 -> 32x16x16 -> 32x8x8 -> 5";
}

// ---------------------------------------------------------------------------
// 2. Gradient correctness (central finite differences)
// ---------------------------------------------------------------------------

template <class LossFn>
double worst_grad_error(std::vector<double>& params, const std::vector<double>& grad,
                        LossFn loss_of, std::size_t checks, double h, Rng& rng) {
    double worst = 0.0;
    for (std::size_t c = 0; c < checks; ++c) {
        const std::size_t i = static_cast<std::size_t>(rng.below(params.size()));
        const double saved = params[i];
        params[i] = saved + h;
        const double up = loss_of();
        params[i] = saved - h;
        const double down = loss_of();
        params[i] = saved;
        const double fd = (up - down) / (2.0 * h);
        if (std::abs(fd) < 1e-12 && std::abs(grad[i]) < 1e-12) continue;
        worst = std::max(worst, std::abs(fd - grad[i]) /
                                    std::max({std::abs(fd), std::abs(grad[i]), 1e-10}));
    }
    return worst;
}

void criterion_gradients(Outcome& out) {
    Rng data(3);
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    for (int i = 0; i < 10; ++i) {
        std::vector<double> row(40);
        for (auto& v : row) v = data.normal();
        x.push_back(std::move(row));
        y.push_back(static_cast<int>(data.below(3)));
    }
    y[0] = 0;
    y[1] = 1;
    y[2] = 2;
    models::MlpModel mlp = models::make_mlp(40, 100, 3, 5);
    std::vector<std::size_t> batch(x.size());
    for (std::size_t i = 0; i < batch.size(); ++i) batch[i] = i;
    std::vector<double> grad, scratch;
    models::mlp_loss_and_grad(mlp, x, y, batch, grad);
    Rng pick(7);
    const double mlp_err = worst_grad_error(
        mlp.params, grad, [&] { return models::mlp_loss_and_grad(mlp, x, y, batch, scratch); },
        500, 1e-6, pick);
    out.expect(mlp_err <= 1e-5, "mlp gradient error " + fmt(mlp_err) + " > 1e-5");

    std::vector<imagerep::ImageTensor> images(2);
    for (auto& img : images)
        for (auto& v : img.values) v = data.next_double();
    const std::vector<int> labels{0, 2};
    models::CnnModel cnn = models::make_cnn(3, 11); // default 16/32 widths
    const std::vector<std::size_t> cnn_batch{0, 1};
    std::vector<double> cnn_grad, cnn_scratch;
    models::cnn_loss_and_grad(cnn, images, labels, cnn_batch, {}, cnn_grad, 2);
    Rng cnn_pick(13);
    const double cnn_err = worst_grad_error(
        cnn.params, cnn_grad,
        [&] {
            return models::cnn_loss_and_grad(cnn, images, labels, cnn_batch, {}, cnn_scratch, 2);
        },
        250, 1e-6, cnn_pick);
    out.expect(cnn_err <= 1e-4, "cnn gradient error " + fmt(cnn_err) + " > 1e-4");
    out.detail = "mlp worst rel err " + fmt(mlp_err) + ", cnn worst rel err " + fmt(cnn_err);
}

// ---------------------------------------------------------------------------
// 3. Text-pipeline oracles
// ---------------------------------------------------------------------------

void criterion_text_oracles(Outcome& out) {
    Rng rng(17);
    // vocabulary == brute force on 100 random corpora, n <= 4
    for (int trial = 0; trial < 100 && out.ok; ++trial) {
        const int w = 1 + static_cast<int>(rng.below(3));
        const int n = 1 + static_cast<int>(rng.below(4));
        const bool cumulative = trial % 2 == 0;
        std::vector<std::string> corpus;
        const std::string alphabet = "abc";
        for (std::size_t line = 0; line < 1 + rng.below(6); ++line) {
            std::string s;
            const std::size_t words = rng.below(24);
            for (std::size_t i = 0; i < words * static_cast<std::size_t>(w); ++i)
                s += alphabet[rng.below(3)];
            corpus.push_back(s);
        }
        const auto vocab = textrep::build_vocabulary(
            corpus, n, w, cumulative ? textrep::NgramMode::cumulative : textrep::NgramMode::exact);

        std::vector<std::string> expected;
        std::set<std::string> seen;
        for (int k = cumulative ? 1 : n; k <= n; ++k) {
            const std::size_t window = static_cast<std::size_t>(k * w);
            for (const auto& line : corpus)
                for (std::size_t pos = 0; pos + window <= line.size();
                     pos += static_cast<std::size_t>(w))
                    if (seen.insert(line.substr(pos, window)).second)
                        expected.push_back(line.substr(pos, window));
        }
        out.expect(vocab.entries == expected,
                   "vocabulary mismatch on corpus trial " + std::to_string(trial));

        for (const auto& line : corpus) {
            const auto fv = textrep::bow_features(line, vocab);
            if (fv.total_hits == 0) continue;
            double sum = 0.0;
            for (double v : fv.values) sum += v;
            out.expect(std::abs(sum - 1.0) <= 1e-9, "bow sum deviates by more than 1e-9");
        }
    }

    // word_size minimality over l in 2..36, c in 1..10^4
    for (int l = 2; l <= 36 && out.ok; ++l) {
        unsigned long long power = static_cast<unsigned long long>(l); // l^w
        int w = 1;
        for (std::size_t c = 1; c <= 10000; ++c) {
            while (power < c) {
                power *= static_cast<unsigned long long>(l);
                ++w;
            }
            if (textrep::word_size(l, c) != w) {
                out.expect(false, "word_size(" + std::to_string(l) + "," + std::to_string(c) +
                                      ") != " + std::to_string(w));
                break;
            }
        }
    }
    if (out.ok) out.detail = "100 corpora, bow sums, word_size over l=2..36 c=1..10000";
}

// ---------------------------------------------------------------------------
// 4. Discretization conformance
// ---------------------------------------------------------------------------

void criterion_discretization(Outcome& out) {
    std::vector<double> grid;
    for (int k = -4000; k <= 4000; ++k) grid.push_back(static_cast<double>(k) * 0.125);
    for (int k = -50; k <= 50; ++k) {
        grid.push_back(static_cast<double>(k)); // exact integers
        grid.push_back(static_cast<double>(k) + 0.0012);
        grid.push_back(static_cast<double>(k) * M_PI);
    }
    for (double e : grid) {
        if (textrep::floor_meters(e) != std::floor(e)) {
            out.expect(false, "floor_meters(" + std::to_string(e) + ") deviates");
            return;
        }
        if (textrep::floor_millis(e) != std::floor(e * 1e3) / 1e3) {
            out.expect(false, "floor_millis(" + std::to_string(e) + ") deviates");
            return;
        }
    }
    ElevationProfile p;
    p.elevations_m = {12.7, -3.2, 5.0, -0.25};
    out.expect(textrep::discretize(p, textrep::DiscretizeMode::raw) ==
                   std::vector<textrep::DiscreteValue>({12000, -4000, 5000, -1000}),
               "raw discretization of the fixed fixture deviates");
    out.detail = std::to_string(grid.size()) + " grid points, exact";
}

// ---------------------------------------------------------------------------
// 5. Synthetic TM-3 trend: BoW+MLP >= 0.85, CNN >= 0.75
// ---------------------------------------------------------------------------

void criterion_tm3_trend(Outcome& out) {
    const auto ds = tm3_dataset();
    const double mlp_acc = tm3_accuracy(ds, eval::Representation::text, mlp_spec(), 0.0);
    out.expect(mlp_acc >= 0.85, "BoW+MLP accuracy " + fmt(mlp_acc) + " < 0.85");
    const double cnn_acc = tm3_accuracy(ds, eval::Representation::image, cnn_spec(), 0.0);
    out.expect(cnn_acc >= 0.75, "CNN accuracy " + fmt(cnn_acc) + " < 0.75");
    out.expect(mlp_acc > 0.2 && cnn_acc > 0.2, "not above 0.2 chance");
    out.detail = "mlp " + fmt(mlp_acc) + " (>= 0.85), cnn " + fmt(cnn_acc) + " (>= 0.75)";
}

// ---------------------------------------------------------------------------
// 6. Overlap trend: accuracy with 35% overlap >= accuracy without
// ---------------------------------------------------------------------------

void criterion_overlap_trend(Outcome& out) {
    const auto ds = tm3_dataset();
    std::ostringstream detail;
    for (const auto& [name, spec] :
         std::vector<std::pair<std::string, eval::ModelSpec>>{
             {"svm", svm_spec()}, {"rfc", rfc_spec()}, {"mlp", mlp_spec()}}) {
        const double base = tm3_accuracy(ds, eval::Representation::text, spec, 0.0);
        const double overlapped = tm3_accuracy(ds, eval::Representation::text, spec, 0.35);
        out.expect(overlapped >= base, name + " fell: " + fmt(base) + " -> " + fmt(overlapped));
        detail << name << " " << fmt(base) << " -> " << fmt(overlapped) << "  ";
    }
    if (out.ok) out.detail = detail.str();
}

// ---------------------------------------------------------------------------
// 7. Weighted-loss effect on a 10:1 two-class image dataset
// ---------------------------------------------------------------------------

void criterion_weighted_loss(Outcome& out) {
    // Two heavily overlapping cities: close bases, wide bumps.
    auto specs = synth::spread_city_specs(2, 0.0, 60.0, 100.0, 220, kSeed + 1);
    synth::RouteConfig route_cfg;
    route_cfg.n_points = 80;
    const auto ds = synth::gen_city_dataset(specs, route_cfg, kSeed + 1);

    const auto palette = imagerep::Palette::defaults();
    std::vector<imagerep::ImageTensor> majority, minority;
    for (const auto& s : ds.samples) {
        auto img = imagerep::rasterize(s.profile, palette);
        (s.city_label == "city-0" ? majority : minority).push_back(std::move(img));
    }

    // train: 200 majority + 20 minority; test: the rest.
    std::vector<imagerep::ImageTensor> train, test;
    std::vector<int> train_y, test_y;
    for (std::size_t i = 0; i < majority.size(); ++i) {
        (i < 200 ? train : test).push_back(majority[i]);
        (i < 200 ? train_y : test_y).push_back(0);
    }
    for (std::size_t i = 0; i < minority.size(); ++i) {
        (i < 20 ? train : test).push_back(minority[i]);
        (i < 20 ? train_y : test_y).push_back(1);
    }

    models::CnnConfig cfg;
    cfg.epochs = 5;
    cfg.batch_size = 32;
    cfg.seed = kSeed;
    cfg.threads = 2;

    auto minority_recall = [&](const models::CnnModel& model) {
        std::size_t hit = 0, total = 0;
        for (std::size_t i = 0; i < test.size(); ++i) {
            if (test_y[i] != 1) continue;
            ++total;
            hit += model.predict(test[i]) == 1;
        }
        return static_cast<double>(hit) / static_cast<double>(total);
    };

    const auto unweighted = models::cnn_train(train, train_y, cfg);
    auto weighted_cfg = cfg;
    weighted_cfg.class_weights = models::inverse_size_weights(train_y, 2);
    const auto weighted = models::cnn_train(train, train_y, weighted_cfg);

    const double recall_unweighted = minority_recall(unweighted);
    const double recall_weighted = minority_recall(weighted);
    out.expect(recall_weighted > recall_unweighted,
               "minority recall " + fmt(recall_unweighted) + " (unweighted) vs " +
                   fmt(recall_weighted) + " (weighted)");

    // Balanced data: inverse-size weights are exactly 1 and the loss
    // sequences must agree bit for bit.
    std::vector<imagerep::ImageTensor> balanced;
    std::vector<int> balanced_y;
    for (std::size_t i = 0; i < 20; ++i) {
        balanced.push_back(majority[i]);
        balanced_y.push_back(0);
        balanced.push_back(minority[i]);
        balanced_y.push_back(1);
    }
    models::CnnConfig fast = cfg;
    fast.epochs = 3;
    models::CnnTrainLog log_plain, log_weighted;
    models::cnn_train(balanced, balanced_y, fast, &log_plain);
    auto fast_weighted = fast;
    fast_weighted.class_weights = models::inverse_size_weights(balanced_y, 2);
    models::cnn_train(balanced, balanced_y, fast_weighted, &log_weighted);
    out.expect(log_plain.epoch_loss == log_weighted.epoch_loss,
               "balanced weighted/unweighted loss sequences are not bit-identical");

    if (out.ok)
        out.detail = "minority recall " + fmt(recall_unweighted) + " -> " + fmt(recall_weighted) +
                     "; balanced losses bit-identical";
}

// ---------------------------------------------------------------------------
// 8. Fine-tuning mechanics
// ---------------------------------------------------------------------------

void criterion_fine_tuning(Outcome& out) {
    Rng rng(29);
    std::vector<imagerep::ImageTensor> images;
    std::vector<int> labels;
    const std::vector<std::size_t> counts{30, 18, 9}; // unbalanced 3 classes
    for (std::size_t cls = 0; cls < counts.size(); ++cls) {
        for (std::size_t i = 0; i < counts[cls]; ++i) {
            imagerep::ImageTensor img;
            for (auto& v : img.values) v = rng.next_double();
            images.push_back(std::move(img));
            labels.push_back(static_cast<int>(cls));
        }
    }

    const auto rounds = models::make_rounds(labels, 3, {{2}, {1}}, kSeed);
    out.expect(rounds.size() == 3, "expected 3 rounds");
    out.expect(rounds[0].classes.size() == 3 && rounds[1].classes.size() == 2 &&
                   rounds[2].classes.size() == 1,
               "rounds are not progressively reduced");
    for (std::size_t r = 0; r < rounds.size(); ++r) {
        std::map<int, std::size_t> per_class;
        for (std::size_t idx : rounds[r].sample_indices) ++per_class[labels[idx]];
        std::size_t first = per_class.begin()->second;
        for (const auto& [cls, count] : per_class)
            out.expect(count == first, "round " + std::to_string(r) + " is unbalanced");
    }

    models::CnnConfig cfg;
    cfg.c1 = 4;
    cfg.c2 = 6;
    cfg.epochs = 2;
    cfg.batch_size = 8;
    cfg.seed = kSeed;
    std::vector<models::CnnConfig> configs(3, cfg);
    configs[2].adam.lr = 0.0; // final all-classes pass must not move parameters

    const auto ft = models::fine_tune(images, labels, rounds, configs);
    out.expect(ft.round_classes.size() == 3, "expected 3 trained passes");
    out.expect(ft.round_classes[0].size() == 1 && ft.round_classes[1].size() == 2 &&
                   ft.round_classes[2].size() == 3,
               "training order is not reversed creation order");

    const auto& prev = ft.round_models[1];
    const auto& fin = ft.final_model;
    bool conv_equal = true;
    for (std::size_t i = 0; i < prev.fc_w_offset(); ++i)
        if (fin.params[i] != prev.params[i]) conv_equal = false;
    out.expect(conv_equal, "conv parameters changed despite lr 0");
    const std::size_t flat = prev.fc_flat_dim();
    bool head_equal = true;
    for (std::size_t row = 0; row < 2; ++row)
        for (std::size_t i = 0; i < flat; ++i)
            if (fin.params[fin.fc_w_offset() + row * flat + i] !=
                prev.params[prev.fc_w_offset() + row * flat + i])
                head_equal = false;
    out.expect(head_equal, "carried head rows changed despite lr 0");
    if (out.ok) out.detail = "rounds 3/2/1 balanced; reversed order; lr-0 checkpoint equality";
}

// ---------------------------------------------------------------------------
// 9. Evaluation-protocol properties
// ---------------------------------------------------------------------------

void criterion_protocol_properties(Outcome& out) {
    Rng rng(37);
    for (int trial = 0; trial < 200 && out.ok; ++trial) {
        const std::size_t n = 20 + rng.below(300);
        const int classes = 2 + static_cast<int>(rng.below(5));
        std::vector<int> labels(n);
        for (auto& y : labels) y = static_cast<int>(rng.below(classes));
        for (int c = 0; c < classes; ++c) labels[static_cast<std::size_t>(c)] = c;

        for (std::size_t k : {5ul, 10ul}) {
            const auto folds = eval::kfold_split(labels, k, trial);
            std::set<std::size_t> seen;
            std::size_t lo = n, hi = 0;
            for (const auto& fold : folds) {
                for (std::size_t idx : fold)
                    if (!seen.insert(idx).second) out.expect(false, "folds overlap");
                lo = std::min(lo, fold.size());
                hi = std::max(hi, fold.size());
            }
            out.expect(seen.size() == n, "folds do not cover the dataset");
            out.expect(hi - lo <= 1, "fold sizes differ by more than one");
        }
    }

    // metrics against a one-vs-rest oracle
    for (int trial = 0; trial < 100 && out.ok; ++trial) {
        const int k = 2 + static_cast<int>(rng.below(4));
        const std::size_t n = 30 + rng.below(100);
        std::vector<int> labels(n), preds(n);
        for (auto& y : labels) y = static_cast<int>(rng.below(k));
        for (auto& p : preds) p = static_cast<int>(rng.below(k));
        const auto m = eval::compute_metrics(preds, labels, k);

        double acc = 0, prec = 0, rec = 0, f1 = 0, spec = 0;
        for (std::size_t i = 0; i < n; ++i) acc += preds[i] == labels[i];
        acc /= static_cast<double>(n);
        for (int c = 0; c < k; ++c) {
            double tp = 0, fp = 0, fn = 0, tn = 0;
            for (std::size_t i = 0; i < n; ++i) {
                const bool truth = labels[i] == c, said = preds[i] == c;
                tp += truth && said;
                fp += !truth && said;
                fn += truth && !said;
                tn += !truth && !said;
            }
            if (tp + fn == 0) continue;
            const double pc = tp + fp > 0 ? tp / (tp + fp) : 0.0;
            const double rc = tp / (tp + fn);
            prec += pc;
            rec += rc;
            f1 += pc + rc > 0 ? 2 * pc * rc / (pc + rc) : 0.0;
            spec += tn + fp > 0 ? tn / (tn + fp) : 0.0;
        }
        const double kk = static_cast<double>(k);
        out.expect(std::abs(m.accuracy - acc) < 1e-12, "accuracy deviates from oracle");
        out.expect(std::abs(m.macro_precision - prec / kk) < 1e-12, "precision deviates");
        out.expect(std::abs(m.macro_recall - rec / kk) < 1e-12, "recall deviates");
        out.expect(std::abs(m.macro_f1 - f1 / kk) < 1e-12, "f1 deviates");
        out.expect(std::abs(m.macro_specificity - spec / kk) < 1e-12, "specificity deviates");
    }

    // weighted split expectation over 1000 seeded draws, +-3 sigma
    std::vector<int> labels(1000);
    for (std::size_t i = 0; i < 1000; ++i) labels[i] = i < 900 ? 0 : 1;
    double majority_total = 0, minority_total = 0;
    for (int draw = 0; draw < 1000; ++draw) {
        const auto [train, test] = eval::weighted_test_split(labels, 0.2, 4000 + draw);
        for (std::size_t idx : test) (labels[idx] == 0 ? majority_total : minority_total) += 1.0;
    }
    // p(majority)=1/9 per sample; expectation 100 per draw; sigma of the
    // 1000-draw total = sqrt(1000 * 900 * p(1-p)) ~= 298.
    const double sigma = std::sqrt(1000.0 * 900.0 * (1.0 / 9.0) * (8.0 / 9.0));
    out.expect(std::abs(majority_total - 100000.0) <= 3.0 * sigma,
               "majority selection total " + fmt(majority_total) + " outside +-3 sigma");
    out.expect(minority_total == 100000.0, "clamped minority probability is not certainty");
    if (out.ok)
        out.detail = "200 datasets partitioned; oracle metrics; split totals within 3 sigma";
}

// ---------------------------------------------------------------------------
// 10. Parsing round-trips
// ---------------------------------------------------------------------------

void criterion_parsing(Outcome& out) {
    Rng rng(41);
    for (int trial = 0; trial < 50 && out.ok; ++trial) {
        geodata::Route route;
        const std::size_t n = 2 + rng.below(80);
        for (std::size_t i = 0; i < n; ++i) {
            geodata::TrackPoint pt;
            pt.lat = rng.next_double() * 170.0 - 85.0;
            pt.lon = rng.next_double() * 350.0 - 175.0;
            pt.elevation_m = rng.next_double() * 3000.0 - 100.0;
            route.points.push_back(pt);
        }
        const auto parsed = geodata::parse_gpx(geodata::write_gpx(route));
        if (parsed.points.size() != route.points.size()) {
            out.expect(false, "gpx round-trip changed the point count");
            break;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (std::abs(parsed.points[i].lat - route.points[i].lat) > 1e-7 ||
                std::abs(parsed.points[i].lon - route.points[i].lon) > 1e-7) {
                out.expect(false, "gpx round-trip exceeded 1e-7 degrees");
                break;
            }
        }
    }

    for (int trial = 0; trial < 1000 && out.ok; ++trial) {
        std::vector<miner::LatLon> path;
        const std::size_t n = 1 + rng.below(15);
        for (std::size_t i = 0; i < n; ++i)
            path.push_back({rng.next_double() * 170.0 - 85.0, rng.next_double() * 350.0 - 175.0});
        const auto decoded = miner::decode_polyline(miner::encode_polyline(path));
        if (decoded.size() != n) {
            out.expect(false, "polyline round-trip changed the point count");
            break;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (std::abs(decoded[i].lat - path[i].lat) > 1e-5 ||
                std::abs(decoded[i].lon - path[i].lon) > 1e-5) {
                out.expect(false, "polyline round-trip exceeded 1e-5");
                break;
            }
        }
    }

    const auto fixture = miner::decode_polyline("_p~iF~ps|U_ulLnnqC_mqNvxq`@");
    out.expect(fixture.size() == 3 && std::abs(fixture[0].lat - 38.5) < 1e-9 &&
                   std::abs(fixture[0].lon + 120.2) < 1e-9 &&
                   std::abs(fixture[1].lat - 40.7) < 1e-9 &&
                   std::abs(fixture[1].lon + 120.95) < 1e-9 &&
                   std::abs(fixture[2].lat - 43.252) < 1e-9 &&
                   std::abs(fixture[2].lon + 126.453) < 1e-9,
               "canonical polyline fixture decoded incorrectly");
    if (out.ok) out.detail = "50 gpx routes within 1e-7; 1000 polylines within 1e-5; fixture ok";
}

struct Criterion {
    int id;
    const char* title;
    std::function<void(Outcome&)> fn;
};

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> all{
        {1, "CNN shape trace 32 -> 16 -> 8", criterion_shape_trace},
        {2, "gradients match finite differences (mlp 1e-5, cnn 1e-4)", criterion_gradients},
        {3, "text pipeline matches brute-force oracles", criterion_text_oracles},
        {4, "discretization conforms to floor definitions", criterion_discretization},
        {5, "synthetic TM-3 trend (mlp >= 0.85, cnn >= 0.75)", criterion_tm3_trend},
        {6, "35% overlap raises accuracy for svm, rfc, mlp", criterion_overlap_trend},
        {7, "weighted loss lifts minority recall; balanced is bit-identical",
         criterion_weighted_loss},
        {8, "fine-tuning rounds, order and parameter carry-over", criterion_fine_tuning},
        {9, "k-fold, metric and weighted-split protocol properties",
         criterion_protocol_properties},
        {10, "gpx and polyline round-trips", criterion_parsing},
    };
    return all;
}

} // namespace

int main(int argc, char** argv) {
    int selected = 0;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc)
            selected = std::atoi(argv[++i]);
    }

    int failures = 0;
    for (const auto& criterion : criteria()) {
        if (selected != 0 && criterion.id != selected) continue;
        Outcome outcome;
        const auto start = std::chrono::steady_clock::now();
        try {
            criterion.fn(outcome);
        } catch (const std::exception& e) {
            outcome.ok = false;
            outcome.detail = std::string("exception: ") + e.what();
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("[%s] criterion %2d: %s (%.1fs)%s%s\n", outcome.ok ? "PASS" : "FAIL",
                    criterion.id, criterion.title, seconds, outcome.detail.empty() ? "" : " -- ",
                    outcome.detail.c_str());
        std::fflush(stdout);
        failures += outcome.ok ? 0 : 1;
    }
    return failures;
}
