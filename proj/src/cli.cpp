#include "elevleak/cli.hpp"

#include "elevleak/errors.hpp"
#include "elevleak/geodata.hpp"
#include "elevleak/log.hpp"
#include "elevleak/miner.hpp"
#include "elevleak/models/checkpoint.hpp"
#include "elevleak/rng.hpp"
#include "elevleak/synth.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace fs = std::filesystem;

namespace elevleak::cli {

namespace {

std::string join_out(const GlobalOptions& global, const std::string& name) {
    fs::path p(name);
    if (p.is_absolute()) return name;
    return (fs::path(global.out_dir) / p).string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::string& path, const std::string& bytes) {
    fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open " + path + " for writing");
    out << bytes;
}

LabelLevel parse_level(const std::string& s, const char* field) {
    if (s == "city") return LabelLevel::city;
    if (s == "borough") return LabelLevel::borough;
    if (s == "region") return LabelLevel::region;
    throw ConfigError(field, "must be city, borough or region");
}

} // namespace

int exit_code_for(const std::exception& e) {
    if (const auto* err = dynamic_cast<const Error*>(&e)) {
        switch (err->kind()) {
        case Error::Kind::validation: return kExitValidation;
        case Error::Kind::data: return kExitData;
        case Error::Kind::internal: return kExitInternal;
        }
    }
    return kExitInternal;
}

// ---- ingest -----------------------------------------------------------------

int cmd_ingest(const IngestOptions& opt, const GlobalOptions& global) {
    std::vector<fs::path> files;
    if (!fs::is_directory(opt.gpx_dir)) throw DataError(opt.gpx_dir + " is not a directory");
    for (const auto& entry : fs::directory_iterator(opt.gpx_dir))
        if (entry.is_regular_file() && entry.path().extension() == ".gpx")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    std::map<int, std::string> region_names;
    if (!opt.region_names_path.empty()) {
        const auto j = nlohmann::json::parse(slurp(opt.region_names_path));
        for (const auto& [key, value] : j.items())
            region_names[std::stoi(key)] = value.get<std::string>();
    }

    LabeledDataset ds;
    std::vector<geodata::Region> regions;
    std::map<std::string, std::size_t> region_counts;
    for (const auto& file : files) {
        geodata::Route route;
        try {
            route = geodata::parse_gpx(slurp(file.string()));
        } catch (const Error& e) {
            log::warn("skipping " + file.string() + ": " + e.what());
            continue;
        }
        route.id = file.stem().string();
        const auto rect = geodata::bounding_rect(route);
        const int region_id = geodata::assign_region(rect, regions, opt.region_threshold_deg);

        Sample s;
        s.id = route.id;
        for (const auto& pt : route.points) s.profile.elevations_m.push_back(pt.elevation_m);
        const auto named = region_names.find(region_id);
        s.region_label =
            named != region_names.end() ? named->second : "region-" + std::to_string(region_id);
        s.provenance = "raw";
        ++region_counts[s.region_label];
        ds.samples.push_back(std::move(s));
    }

    if (ds.samples.empty()) {
        log::error("no samples: no parseable .gpx files under " + opt.gpx_dir);
        return kExitData;
    }
    ds.validate();
    save_jsonl(join_out(global, opt.output), ds);

    std::printf("%-24s %s\n", "region", "samples");
    std::vector<std::pair<std::string, std::size_t>> rows(region_counts.begin(),
                                                          region_counts.end());
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    for (const auto& [label, count] : rows)
        std::printf("%-24s %zu\n", label.c_str(), count);
    std::printf("dataset: %s (%zu samples, %zu regions)\n",
                join_out(global, opt.output).c_str(), ds.samples.size(), rows.size());
    return kExitOk;
}

// ---- mine -------------------------------------------------------------------

int cmd_mine(const MineOptions& opt, const GlobalOptions& global) {
    const geodata::Rect city{{opt.sw_lat, opt.sw_lon}, {opt.ne_lat, opt.ne_lon}};
    auto client = miner::FixtureClient::from_file(opt.fixture_path, city, opt.rows, opt.cols);
    const auto result =
        miner::mine_city(client, city, opt.rows, opt.cols, opt.city_label, global.threads);
    for (std::size_t cell : result.failed_cells)
        log::warn("cell " + std::to_string(cell) + " failed and was skipped");

    LabeledDataset ds;
    for (const auto& mined : result.samples) {
        Sample s;
        s.id = mined.segment_id;
        s.profile = mined.profile;
        s.city_label = mined.city_label;
        if (!opt.borough_label.empty()) s.borough_label = opt.borough_label;
        s.provenance = "mined";
        ds.samples.push_back(std::move(s));
    }
    ds.validate();
    save_jsonl(join_out(global, opt.output), ds);
    std::printf("mined %zu segments (%zu cells failed) -> %s\n", ds.samples.size(),
                result.failed_cells.size(), join_out(global, opt.output).c_str());
    return kExitOk;
}

// ---- synth ------------------------------------------------------------------

int cmd_synth(const SynthOptions& opt, const GlobalOptions& global) {
    auto specs = synth::spread_city_specs(opt.cities, opt.base0_m, opt.gap_m, opt.bump_height_m,
                                          opt.routes_per_city, global.seed);
    if (opt.boroughs > 0) {
        for (auto& spec : specs)
            for (std::size_t b = 0; b < opt.boroughs; ++b)
                spec.borough_labels.push_back(spec.label + "-b" + std::to_string(b));
    }
    synth::RouteConfig route_cfg;
    route_cfg.n_points = opt.n_points;
    route_cfg.step_deg = opt.step_deg;
    const auto ds = synth::gen_city_dataset(specs, route_cfg, global.seed);
    save_jsonl(join_out(global, opt.output), ds);
    std::printf("synthesized %zu routes over %zu cities -> %s\n", ds.samples.size(), opt.cities,
                join_out(global, opt.output).c_str());
    return kExitOk;
}

// ---- preprocess ---------------------------------------------------------------

int cmd_preprocess(const PreprocessOptions& opt, const GlobalOptions& global) {
    const auto ds = load_jsonl(opt.dataset);
    const auto level = parse_level(opt.level, "level");
    if (!ds.has_level(level)) throw MissingLabelLevel(to_string(level));
    const auto mode = eval::resolve_discretization(opt.text.discretization, ds);

    std::vector<std::vector<textrep::DiscreteValue>> values;
    values.reserve(ds.samples.size());
    for (const auto& s : ds.samples) values.push_back(textrep::discretize(s.profile, mode));

    const auto codebook = textrep::build_codebook(values, opt.text.alphabet);
    std::vector<std::string> corpus;
    corpus.reserve(values.size());
    for (const auto& v : values) corpus.push_back(textrep::encode_values(v, codebook));

    auto vocab = textrep::build_vocabulary(corpus, opt.text.ngram_order, codebook.word_length,
                                           opt.text.ngram_mode);
    const std::size_t before_prune = vocab.size();
    if (opt.text.prune_min_frequency > 0)
        vocab = textrep::prune_vocabulary(vocab, corpus, opt.text.prune_min_frequency);

    spit(join_out(global, opt.out_prefix + ".codebook.json"), codebook.to_json().dump(2) + "\n");
    spit(join_out(global, opt.out_prefix + ".vocabulary.json"), vocab.to_json().dump(2) + "\n");

    std::string features;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto fv = textrep::bow_features(corpus[i], vocab);
        nlohmann::ordered_json j;
        j["id"] = ds.samples[i].id;
        j["label"] = ds.label_of(ds.samples[i], level);
        j["total_hits"] = fv.total_hits;
        j["values"] = fv.values;
        features += j.dump();
        features += "\n";
    }
    spit(join_out(global, opt.out_prefix + ".features.jsonl"), features);

    std::printf("discretization=%s word_length=%d vocabulary=%zu (pruned from %zu)\n",
                textrep::to_string(mode), codebook.word_length, vocab.size(), before_prune);
    return kExitOk;
}

// ---- train / eval -------------------------------------------------------------

namespace {

nlohmann::ordered_json palette_json(const imagerep::Palette& palette) {
    nlohmann::ordered_json j;
    j["lo_m"] = palette.lo_m;
    j["hi_m"] = palette.hi_m;
    j["colors"] = palette.colors;
    return j;
}

imagerep::Palette palette_from_json(const nlohmann::json& j) {
    imagerep::Palette p;
    p.lo_m = j.at("lo_m").get<double>();
    p.hi_m = j.at("hi_m").get<double>();
    p.colors = j.at("colors").get<std::vector<imagerep::Rgb>>();
    return p;
}

} // namespace

int cmd_train(const TrainOptions& opt, const GlobalOptions& global) {
    const auto ds = load_jsonl(opt.dataset);
    const auto level = parse_level(opt.level, "level");
    if (!ds.has_level(level)) throw MissingLabelLevel(to_string(level));
    const auto class_names = ds.label_names(level);
    if (class_names.size() < 2) throw SingleClassDataset();
    const auto labels = ds.int_labels(level, class_names);

    nlohmann::ordered_json container;
    container["format_version"] = models::kCheckpointVersion;
    container["level"] = opt.level;
    container["class_names"] = class_names;

    if (opt.representation == "text") {
        const auto mode = eval::resolve_discretization(opt.text.discretization, ds);
        std::vector<std::vector<textrep::DiscreteValue>> values;
        for (const auto& s : ds.samples) values.push_back(textrep::discretize(s.profile, mode));
        const auto codebook = textrep::build_codebook(values, opt.text.alphabet);
        std::vector<std::string> corpus;
        for (const auto& v : values) corpus.push_back(textrep::encode_values(v, codebook));
        auto vocab = textrep::build_vocabulary(corpus, opt.text.ngram_order, codebook.word_length,
                                               opt.text.ngram_mode);
        if (opt.text.prune_min_frequency > 0)
            vocab = textrep::prune_vocabulary(vocab, corpus, opt.text.prune_min_frequency);

        std::vector<std::vector<double>> x;
        for (const auto& line : corpus) x.push_back(textrep::bow_features(line, vocab).values);

        container["kind"] = "text-model";
        container["discretization"] = textrep::to_string(mode);
        container["codebook"] = codebook.to_json();
        container["vocabulary"] = vocab.to_json();

        if (opt.model.family == "svm") {
            container["model"] = models::to_checkpoint(models::train_svm(x, labels, opt.model.svm));
        } else if (opt.model.family == "rfc") {
            auto cfg = opt.model.rfc;
            cfg.seed = global.seed;
            cfg.threads = global.threads;
            container["model"] = models::to_checkpoint(models::train_rfc(x, labels, cfg));
        } else if (opt.model.family == "mlp") {
            auto cfg = opt.model.mlp;
            cfg.seed = global.seed;
            container["model"] = models::to_checkpoint(models::train_mlp(x, labels, cfg));
        } else {
            throw ConfigError("model.family",
                              "'" + opt.model.family + "' cannot train on text features");
        }
    } else if (opt.representation == "image") {
        if (opt.model.family != "cnn")
            throw ConfigError("model.family", "image representation requires the cnn family");
        const auto palette = imagerep::Palette::defaults();
        std::vector<imagerep::ImageTensor> images;
        for (const auto& s : ds.samples) images.push_back(imagerep::rasterize(s.profile, palette));

        container["kind"] = "image-model";
        container["palette"] = palette_json(palette);

        auto cfg = opt.model.cnn;
        cfg.seed = global.seed;
        cfg.threads = global.threads;
        if (opt.model.cnn_method == eval::CnnMethod::finetune) {
            auto schedule = opt.model.finetune_schedule;
            if (schedule.empty()) {
                std::vector<std::pair<std::size_t, int>> sizes;
                std::vector<std::size_t> counts(class_names.size(), 0);
                for (int y : labels) ++counts[static_cast<std::size_t>(y)];
                for (std::size_t c = 0; c < counts.size(); ++c)
                    sizes.emplace_back(counts[c], static_cast<int>(c));
                std::sort(sizes.begin(), sizes.end());
                for (std::size_t i = 0; i + 2 < sizes.size(); ++i)
                    schedule.push_back({sizes[i].second});
            }
            const auto rounds = models::make_rounds(labels, static_cast<int>(class_names.size()),
                                                    schedule, global.seed);
            std::vector<models::CnnConfig> configs(rounds.size(), cfg);
            for (std::size_t i = 0; i < configs.size(); ++i)
                configs[i].seed = Rng(global.seed).fork(100 + i).seed();
            auto ft = models::fine_tune(images, labels, rounds, configs);
            // One checkpoint per round, plus the final container.
            for (std::size_t i = 0; i < ft.round_models.size(); ++i) {
                nlohmann::ordered_json round_container = container;
                round_container["kind"] = "image-model";
                round_container["palette"] = palette_json(palette);
                round_container["round"] = i;
                auto round_names = nlohmann::ordered_json::array();
                for (int c : ft.round_classes[i]) round_names.push_back(class_names[static_cast<std::size_t>(c)]);
                round_container["class_names"] = round_names;
                round_container["model"] = models::to_checkpoint(ft.round_models[i]);
                models::save_checkpoint(join_out(global, opt.output + ".round" +
                                                             std::to_string(i) + ".json"),
                                        round_container);
            }
            container["model"] = models::to_checkpoint(ft.final_model);
        } else {
            if (opt.model.cnn_method == eval::CnnMethod::weighted)
                cfg.class_weights =
                    models::inverse_size_weights(labels, static_cast<int>(class_names.size()));
            auto model = models::make_cnn(static_cast<int>(class_names.size()), cfg.seed, cfg.c1,
                                          cfg.c2);
            models::cnn_train_inplace(model, images, labels, cfg);
            container["model"] = models::to_checkpoint(model);
        }
    } else {
        throw ConfigError("representation", "must be text or image");
    }

    models::save_checkpoint(join_out(global, opt.output), container);
    std::printf("trained %s/%s on %zu samples (%zu classes) -> %s\n", opt.representation.c_str(),
                opt.model.family.c_str(), ds.samples.size(), class_names.size(),
                join_out(global, opt.output).c_str());
    return kExitOk;
}

int cmd_eval(const EvalOptions& opt, const GlobalOptions& global) {
    const auto container = models::load_checkpoint(opt.checkpoint);
    const auto ds = load_jsonl(opt.dataset);
    const auto level = parse_level(container.at("level").get<std::string>(), "checkpoint.level");
    if (!ds.has_level(level)) throw MissingLabelLevel(to_string(level));
    const auto class_names = container.at("class_names").get<std::vector<std::string>>();

    auto label_index = [&](const Sample& s) -> int {
        const auto& label = ds.label_of(s, level);
        const auto it = std::find(class_names.begin(), class_names.end(), label);
        return it == class_names.end() ? -1 : static_cast<int>(it - class_names.begin());
    };

    std::vector<int> preds, truth;
    std::size_t dropped = 0;
    const std::string kind = container.at("kind").get<std::string>();
    if (kind == "text-model") {
        const auto codebook = textrep::Codebook::from_json(container.at("codebook"));
        const auto vocab = textrep::Vocabulary::from_json(container.at("vocabulary"));
        const auto mode = container.at("discretization").get<std::string>() == "raw"
                              ? textrep::DiscretizeMode::raw
                              : textrep::DiscretizeMode::fine;
        const std::string family = models::checkpoint_model_type(container.at("model"));

        models::LinearModel svm;
        models::Forest forest;
        models::MlpModel mlp;
        if (family == "svm") svm = models::linear_from_checkpoint(container.at("model"));
        else if (family == "rfc") forest = models::forest_from_checkpoint(container.at("model"));
        else if (family == "mlp") mlp = models::mlp_from_checkpoint(container.at("model"));
        else throw DataError("unsupported text model family '" + family + "'");

        for (const auto& s : ds.samples) {
            const int y = label_index(s);
            if (y < 0) {
                ++dropped;
                log::warn("sample '" + s.id + "' has a label outside the trained classes");
                continue;
            }
            std::vector<double> x;
            try {
                x = textrep::bow_features(textrep::encode_profile(s.profile, codebook, mode),
                                          vocab)
                        .values;
            } catch (const UnknownValue&) {
                ++dropped;
                log::warn("dropping '" + s.id + "': value missing from training codebook");
                continue;
            }
            truth.push_back(y);
            if (family == "svm") preds.push_back(svm.predict(x));
            else if (family == "rfc") preds.push_back(forest.predict(x));
            else preds.push_back(mlp.predict(x));
        }
    } else if (kind == "image-model") {
        const auto palette = palette_from_json(container.at("palette"));
        const auto model = models::cnn_from_checkpoint(container.at("model"));
        for (const auto& s : ds.samples) {
            const int y = label_index(s);
            if (y < 0) {
                ++dropped;
                continue;
            }
            truth.push_back(y);
            preds.push_back(model.predict(imagerep::rasterize(s.profile, palette)));
        }
    } else {
        throw DataError("unknown checkpoint kind '" + kind + "'");
    }

    if (truth.empty()) throw DataError("no evaluable samples");
    const auto metrics =
        eval::compute_metrics(preds, truth, static_cast<int>(class_names.size()));

    nlohmann::ordered_json j;
    j["checkpoint"] = opt.checkpoint;
    j["dataset_hash"] = dataset_hash(ds);
    j["n_evaluated"] = truth.size();
    j["n_dropped"] = dropped;
    j["accuracy"] = metrics.accuracy;
    j["macro_precision"] = metrics.macro_precision;
    j["macro_recall"] = metrics.macro_recall;
    j["macro_f1"] = metrics.macro_f1;
    j["macro_specificity"] = metrics.macro_specificity;
    j["confusion"] = metrics.confusion;
    j["class_names"] = class_names;
    spit(join_out(global, opt.out_prefix + ".json"), j.dump(2) + "\n");

    std::printf("accuracy %.4f  recall %.4f  f1 %.4f  specificity %.4f  (%zu samples, %zu dropped)\n",
                metrics.accuracy, metrics.macro_recall, metrics.macro_f1,
                metrics.macro_specificity, truth.size(), dropped);
    return kExitOk;
}

// ---- run ---------------------------------------------------------------------

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    ExperimentConfig cfg;
    const std::string tm = j.value("threat_model", "tm3");
    if (tm == "tm1") cfg.tm = eval::ThreatModel::tm1;
    else if (tm == "tm2") cfg.tm = eval::ThreatModel::tm2;
    else if (tm == "tm3") cfg.tm = eval::ThreatModel::tm3;
    else throw ConfigError("threat_model", "'" + tm + "' is not one of tm1, tm2, tm3");

    const std::string rep = j.value("representation", "text");
    if (rep == "text") cfg.representation = eval::Representation::text;
    else if (rep == "image") cfg.representation = eval::Representation::image;
    else throw ConfigError("representation", "'" + rep + "' is not one of text, image");

    if (!j.contains("dataset")) throw ConfigError("dataset", "path is required");
    cfg.dataset_path = j.at("dataset").get<std::string>();

    const auto model = j.value("model", nlohmann::json::object());
    cfg.model.family = model.value("family", rep == "text" ? "mlp" : "cnn");
    const std::set<std::string> families{"svm", "rfc", "mlp", "cnn"};
    if (!families.count(cfg.model.family))
        throw ConfigError("model.family",
                          "unknown model '" + cfg.model.family + "' (svm, rfc, mlp, cnn)");
    if (rep == "text" && cfg.model.family == "cnn")
        throw ConfigError("model.family", "cnn requires representation=image");
    if (rep == "image" && cfg.model.family != "cnn")
        throw ConfigError("model.family",
                          "'" + cfg.model.family + "' requires representation=text");

    cfg.model.svm.epochs = model.value("epochs", cfg.model.svm.epochs);
    cfg.model.svm.lr = model.value("lr", cfg.model.svm.lr);
    cfg.model.svm.regularization = model.value("regularization", cfg.model.svm.regularization);
    cfg.model.rfc.trees = model.value("trees", cfg.model.rfc.trees);
    cfg.model.rfc.min_leaf = model.value("min_leaf", cfg.model.rfc.min_leaf);
    cfg.model.mlp.hidden = model.value("hidden", cfg.model.mlp.hidden);
    cfg.model.mlp.epochs = model.value("epochs", cfg.model.mlp.epochs);
    cfg.model.mlp.batch_size = model.value("batch_size", cfg.model.mlp.batch_size);
    cfg.model.mlp.adam.lr = model.value("lr", cfg.model.mlp.adam.lr);
    cfg.model.cnn.c1 = model.value("c1", cfg.model.cnn.c1);
    cfg.model.cnn.c2 = model.value("c2", cfg.model.cnn.c2);
    cfg.model.cnn.epochs = model.value("epochs", cfg.model.cnn.epochs);
    cfg.model.cnn.batch_size = model.value("batch_size", cfg.model.cnn.batch_size);
    cfg.model.cnn.adam.lr = model.value("lr", cfg.model.cnn.adam.lr);

    const std::string method = model.value("method", "plain");
    if (method == "plain") cfg.model.cnn_method = eval::CnnMethod::plain;
    else if (method == "weighted") cfg.model.cnn_method = eval::CnnMethod::weighted;
    else if (method == "finetune") cfg.model.cnn_method = eval::CnnMethod::finetune;
    else throw ConfigError("model.method", "'" + method + "' is not one of plain, weighted, finetune");
    if (model.contains("finetune_schedule"))
        for (const auto& round : model.at("finetune_schedule"))
            cfg.model.finetune_schedule.push_back(round.get<std::set<int>>());

    const auto text = j.value("text", nlohmann::json::object());
    cfg.text.ngram_order = text.value("ngram_order", 8);
    if (cfg.text.ngram_order < 1) throw ConfigError("text.ngram_order", "must be >= 1");
    const std::string ngram_mode = text.value("ngram_mode", "cumulative");
    if (ngram_mode == "exact") cfg.text.ngram_mode = textrep::NgramMode::exact;
    else if (ngram_mode == "cumulative") cfg.text.ngram_mode = textrep::NgramMode::cumulative;
    else throw ConfigError("text.ngram_mode", "must be exact or cumulative");
    cfg.text.prune_min_frequency = text.value("prune_min_frequency", 2);
    cfg.text.alphabet = text.value("alphabet", textrep::kDefaultAlphabet);
    if (cfg.text.alphabet.size() < 2) throw ConfigError("text.alphabet", "needs >= 2 symbols");
    cfg.text.discretization = text.value("discretization", "auto");
    if (cfg.text.discretization != "auto" && cfg.text.discretization != "raw" &&
        cfg.text.discretization != "fine")
        throw ConfigError("text.discretization", "must be auto, raw or fine");

    const auto protocol = j.value("protocol", nlohmann::json::object());
    cfg.protocol.k = protocol.value("k", 10);
    if (cfg.protocol.k < 2) throw ConfigError("protocol.k", "must be >= 2");
    if (protocol.contains("per_class") && !protocol.at("per_class").is_null())
        cfg.protocol.per_class = protocol.at("per_class").get<std::size_t>();
    cfg.protocol.overlap_ratio = protocol.value("overlap_ratio", 0.0);
    if (cfg.protocol.overlap_ratio < 0.0 || cfg.protocol.overlap_ratio >= 1.0)
        throw ConfigError("protocol.overlap_ratio", "must be in [0, 1)");
    cfg.protocol.split = protocol.value("split", "kfold");
    if (cfg.protocol.split != "kfold" && cfg.protocol.split != "weighted")
        throw ConfigError("protocol.split", "must be kfold or weighted");
    cfg.protocol.test_fraction = protocol.value("test_fraction", 0.2);
    if (cfg.protocol.test_fraction <= 0.0 || cfg.protocol.test_fraction >= 1.0)
        throw ConfigError("protocol.test_fraction", "must be in (0, 1)");

    cfg.protocol.seed = j.value("seed", 0);
    cfg.out_prefix = j.value("out_prefix", "report");
    return cfg;
}

nlohmann::ordered_json ExperimentConfig::to_json() const {
    nlohmann::ordered_json j;
    j["threat_model"] = eval::to_string(tm);
    j["representation"] = eval::to_string(representation);
    j["dataset"] = dataset_path;
    nlohmann::ordered_json model;
    model["family"] = this->model.family;
    if (this->model.family == "svm") {
        model["epochs"] = this->model.svm.epochs;
        model["lr"] = this->model.svm.lr;
        model["regularization"] = this->model.svm.regularization;
    } else if (this->model.family == "rfc") {
        model["trees"] = this->model.rfc.trees;
        model["min_leaf"] = this->model.rfc.min_leaf;
    } else if (this->model.family == "mlp") {
        model["hidden"] = this->model.mlp.hidden;
        model["epochs"] = this->model.mlp.epochs;
        model["batch_size"] = this->model.mlp.batch_size;
        model["lr"] = this->model.mlp.adam.lr;
    } else {
        model["c1"] = this->model.cnn.c1;
        model["c2"] = this->model.cnn.c2;
        model["epochs"] = this->model.cnn.epochs;
        model["batch_size"] = this->model.cnn.batch_size;
        model["lr"] = this->model.cnn.adam.lr;
        model["method"] = this->model.cnn_method == eval::CnnMethod::plain      ? "plain"
                          : this->model.cnn_method == eval::CnnMethod::weighted ? "weighted"
                                                                                : "finetune";
    }
    j["model"] = model;
    nlohmann::ordered_json text;
    text["ngram_order"] = this->text.ngram_order;
    text["ngram_mode"] =
        this->text.ngram_mode == textrep::NgramMode::exact ? "exact" : "cumulative";
    text["prune_min_frequency"] = this->text.prune_min_frequency;
    text["alphabet"] = this->text.alphabet;
    text["discretization"] = this->text.discretization;
    j["text"] = text;
    nlohmann::ordered_json protocol;
    protocol["k"] = this->protocol.k;
    if (this->protocol.per_class) protocol["per_class"] = *this->protocol.per_class;
    protocol["overlap_ratio"] = this->protocol.overlap_ratio;
    protocol["split"] = this->protocol.split;
    protocol["test_fraction"] = this->protocol.test_fraction;
    j["protocol"] = protocol;
    j["seed"] = this->protocol.seed;
    j["out_prefix"] = out_prefix;
    return j;
}

namespace {

nlohmann::ordered_json metrics_json(const eval::Metrics& m) {
    nlohmann::ordered_json j;
    j["accuracy"] = m.accuracy;
    j["macro_precision"] = m.macro_precision;
    j["macro_recall"] = m.macro_recall;
    j["macro_f1"] = m.macro_f1;
    j["macro_specificity"] = m.macro_specificity;
    j["confusion"] = m.confusion;
    if (!m.absent_classes.empty()) j["absent_classes"] = m.absent_classes;
    return j;
}

} // namespace

nlohmann::ordered_json report_to_json(const eval::ExperimentReport& report,
                                      const ExperimentConfig& config,
                                      const std::string& dataset_hash) {
    nlohmann::ordered_json j;
    const auto config_json = config.to_json();
    j["config"] = config_json;
    j["config_hash"] = content_hash(config_json.dump());
    j["dataset_hash"] = dataset_hash;
    auto reports = nlohmann::ordered_json::array();
    for (const auto& tm_report : report.reports) {
        nlohmann::ordered_json r;
        r["scope"] = tm_report.scope;
        r["class_names"] = tm_report.class_names;
        auto folds = nlohmann::ordered_json::array();
        for (std::size_t f = 0; f < tm_report.folds.size(); ++f) {
            nlohmann::ordered_json fold;
            fold["fold"] = f;
            fold["metrics"] = metrics_json(tm_report.folds[f].metrics);
            fold["test_size"] = tm_report.folds[f].test_size;
            fold["dropped_test"] = tm_report.folds[f].dropped_test;
            fold["leakage_fraction"] = tm_report.folds[f].leakage_fraction;
            folds.push_back(std::move(fold));
        }
        r["folds"] = folds;
        r["aggregate"] = metrics_json(tm_report.aggregate);
        reports.push_back(std::move(r));
    }
    j["reports"] = reports;
    return j;
}

std::string report_to_csv(const eval::ExperimentReport& report) {
    std::string csv = "scope,fold,accuracy,macro_precision,macro_recall,macro_f1,"
                      "macro_specificity,test_size,dropped_test,leakage_fraction\n";
    char buf[256];
    auto append_row = [&](const std::string& scope, const std::string& fold,
                          const eval::Metrics& m, std::size_t test_size, std::size_t dropped,
                          double leakage) {
        std::snprintf(buf, sizeof(buf), "%s,%s,%.6f,%.6f,%.6f,%.6f,%.6f,%zu,%zu,%.6f\n",
                      scope.c_str(), fold.c_str(), m.accuracy, m.macro_precision, m.macro_recall,
                      m.macro_f1, m.macro_specificity, test_size, dropped, leakage);
        csv += buf;
    };
    for (const auto& tm_report : report.reports) {
        std::size_t total_test = 0, total_dropped = 0;
        double mean_leakage = 0.0;
        for (std::size_t f = 0; f < tm_report.folds.size(); ++f) {
            const auto& fold = tm_report.folds[f];
            append_row(tm_report.scope, std::to_string(f), fold.metrics, fold.test_size,
                       fold.dropped_test, fold.leakage_fraction);
            total_test += fold.test_size;
            total_dropped += fold.dropped_test;
            mean_leakage += fold.leakage_fraction;
        }
        mean_leakage /= static_cast<double>(tm_report.folds.size());
        append_row(tm_report.scope, "aggregate", tm_report.aggregate, total_test, total_dropped,
                   mean_leakage);
    }
    return csv;
}

std::string accuracy_chart_svg(const eval::ExperimentReport& report) {
    const int width = 480, height = 300, margin = 40;
    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                      std::to_string(width) + "\" height=\"" + std::to_string(height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    // Axes box and 0/0.5/1.0 gridlines.
    char buf[256];
    for (double tick : {0.0, 0.5, 1.0}) {
        const int y = margin + static_cast<int>((1.0 - tick) * (height - 2 * margin));
        std::snprintf(buf, sizeof(buf),
                      "<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" stroke=\"#cccccc\"/>"
                      "<text x=\"4\" y=\"%d\" font-size=\"10\">%.1f</text>\n",
                      margin, y, width - margin, y, y + 3, tick);
        svg += buf;
    }
    static const char* palette[] = {"#e41a1c", "#377eb8", "#4daf4a", "#984ea3",
                                    "#ff7f00", "#a65628", "#f781bf", "#666666"};
    std::size_t color = 0;
    for (const auto& tm_report : report.reports) {
        const std::size_t n = tm_report.folds.size();
        std::string points;
        for (std::size_t f = 0; f < n; ++f) {
            const double x =
                margin + (n == 1 ? 0.5 : static_cast<double>(f) / static_cast<double>(n - 1)) *
                             (width - 2 * margin);
            const double y = margin + (1.0 - tm_report.folds[f].metrics.accuracy) *
                                          (height - 2 * margin);
            std::snprintf(buf, sizeof(buf), "%.1f,%.1f ", x, y);
            points += buf;
        }
        std::snprintf(buf, sizeof(buf),
                      "<polyline fill=\"none\" stroke=\"%s\" stroke-width=\"2\" points=\"%s\"/>\n",
                      palette[color % 8], points.c_str());
        svg += buf;
        const std::string label = tm_report.scope.empty() ? "folds" : tm_report.scope;
        std::snprintf(buf, sizeof(buf),
                      "<text x=\"%d\" y=\"%zu\" font-size=\"11\" fill=\"%s\">%s</text>\n",
                      width - margin + 4, margin + 14 * color, palette[color % 8], label.c_str());
        svg += buf;
        ++color;
    }
    svg += "<text x=\"" + std::to_string(margin) + "\" y=\"16\" font-size=\"12\">per-fold accuracy</text>\n";
    svg += "</svg>\n";
    return svg;
}

int cmd_run(const RunOptions& opt, const GlobalOptions& global) {
    nlohmann::json config_json;
    try {
        config_json = nlohmann::json::parse(slurp(opt.config_path));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("<root>", std::string("config is not valid json: ") + e.what());
    }
    auto config = ExperimentConfig::from_json(config_json);
    if (!config_json.contains("seed")) config.protocol.seed = global.seed;
    config.protocol.threads = global.threads;

    const auto ds = load_jsonl(config.dataset_path);
    const auto report = eval::run_threat_model(config.tm, ds, config.representation, config.model,
                                               config.text, config.protocol);

    const auto json_doc = report_to_json(report, config, dataset_hash(ds));
    spit(join_out(global, config.out_prefix + ".json"), json_doc.dump(2) + "\n");
    spit(join_out(global, config.out_prefix + ".csv"), report_to_csv(report));
    if (opt.svg_chart)
        spit(join_out(global, config.out_prefix + ".svg"), accuracy_chart_svg(report));

    for (const auto& tm_report : report.reports) {
        std::printf("%s%s%s: accuracy %.4f  recall %.4f  f1 %.4f  specificity %.4f (%zu folds)\n",
                    eval::to_string(config.tm), tm_report.scope.empty() ? "" : " ",
                    tm_report.scope.c_str(), tm_report.aggregate.accuracy,
                    tm_report.aggregate.macro_recall, tm_report.aggregate.macro_f1,
                    tm_report.aggregate.macro_specificity, tm_report.folds.size());
    }
    return kExitOk;
}

// ---- render / report ----------------------------------------------------------

int cmd_render(const RenderOptions& opt, const GlobalOptions& global) {
    const auto ds = load_jsonl(opt.dataset);
    const Sample* sample = nullptr;
    for (const auto& s : ds.samples)
        if (s.id == opt.sample_id) sample = &s;
    if (!sample) throw UnknownSample(opt.sample_id);

    const auto image = imagerep::rasterize(sample->profile);
    imagerep::write_png(join_out(global, opt.output), image, opt.scale);
    std::printf("rendered %s -> %s (%dx%d)\n", opt.sample_id.c_str(),
                join_out(global, opt.output).c_str(), 32 * opt.scale, 32 * opt.scale);
    return kExitOk;
}

int cmd_report(const ReportOptions& opt, const GlobalOptions&) {
    const auto j = nlohmann::json::parse(slurp(opt.report_json));
    if (j.contains("reports")) {
        std::printf("%-16s %-10s %9s %9s %9s %9s %9s\n", "scope", "fold", "acc", "prec", "rec",
                    "f1", "spec");
        for (const auto& r : j.at("reports")) {
            const std::string scope = r.value("scope", "");
            for (const auto& fold : r.at("folds")) {
                const auto& m = fold.at("metrics");
                std::printf("%-16s %-10zu %9.4f %9.4f %9.4f %9.4f %9.4f\n",
                            scope.empty() ? "-" : scope.c_str(),
                            fold.at("fold").get<std::size_t>(), m.at("accuracy").get<double>(),
                            m.at("macro_precision").get<double>(),
                            m.at("macro_recall").get<double>(), m.at("macro_f1").get<double>(),
                            m.at("macro_specificity").get<double>());
            }
            const auto& agg = r.at("aggregate");
            std::printf("%-16s %-10s %9.4f %9.4f %9.4f %9.4f %9.4f\n",
                        scope.empty() ? "-" : scope.c_str(), "aggregate",
                        agg.at("accuracy").get<double>(), agg.at("macro_precision").get<double>(),
                        agg.at("macro_recall").get<double>(), agg.at("macro_f1").get<double>(),
                        agg.at("macro_specificity").get<double>());
        }
    } else {
        std::printf("accuracy %.4f  recall %.4f  f1 %.4f  specificity %.4f\n",
                    j.at("accuracy").get<double>(), j.at("macro_recall").get<double>(),
                    j.at("macro_f1").get<double>(), j.at("macro_specificity").get<double>());
    }
    return kExitOk;
}

} // namespace elevleak::cli
