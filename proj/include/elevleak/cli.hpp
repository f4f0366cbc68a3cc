#pragma once

#include "elevleak/eval.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>

namespace elevleak::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitInternal = 3;

struct GlobalOptions {
    std::uint64_t seed = 0;
    std::string out_dir = ".";
    unsigned threads = 1;
};

struct IngestOptions {
    std::string gpx_dir;
    double region_threshold_deg = 0.5;
    std::string region_names_path; // optional JSON {"0": "name", ...}
    std::string output = "dataset.jsonl";
};
int cmd_ingest(const IngestOptions& opt, const GlobalOptions& global);

struct MineOptions {
    std::string fixture_path;
    double sw_lat = 0.0, sw_lon = 0.0, ne_lat = 1.0, ne_lon = 1.0;
    std::size_t rows = 10, cols = 10;
    std::string city_label;
    std::string borough_label; // optional
    std::string output = "mined.jsonl";
};
int cmd_mine(const MineOptions& opt, const GlobalOptions& global);

struct SynthOptions {
    std::size_t cities = 5;
    double base0_m = 0.0;
    double gap_m = 300.0;
    double bump_height_m = 120.0;
    std::size_t routes_per_city = 200;
    std::size_t n_points = 200;
    double step_deg = 0.002;
    std::size_t boroughs = 0; // per city; 0 = none
    std::string output = "synthetic.jsonl";
};
int cmd_synth(const SynthOptions& opt, const GlobalOptions& global);

struct PreprocessOptions {
    std::string dataset;
    std::string level = "city";
    eval::TextConfig text;
    std::string out_prefix = "preprocessed"; // writes <prefix>.codebook.json,
                                             // <prefix>.vocabulary.json,
                                             // <prefix>.features.jsonl
};
int cmd_preprocess(const PreprocessOptions& opt, const GlobalOptions& global);

struct TrainOptions {
    std::string dataset;
    std::string level = "city";
    std::string representation = "text";
    eval::ModelSpec model;
    eval::TextConfig text;
    std::string output = "model.json";
};
int cmd_train(const TrainOptions& opt, const GlobalOptions& global);

struct EvalOptions {
    std::string checkpoint;
    std::string dataset;
    std::string out_prefix = "eval";
};
int cmd_eval(const EvalOptions& opt, const GlobalOptions& global);

struct RunOptions {
    std::string config_path;
    bool svg_chart = true;
};
int cmd_run(const RunOptions& opt, const GlobalOptions& global);

struct RenderOptions {
    std::string dataset;
    std::string sample_id;
    std::string output = "sample.png";
    int scale = 8;
};
int cmd_render(const RenderOptions& opt, const GlobalOptions& global);

struct ReportOptions {
    std::string report_json;
};
int cmd_report(const ReportOptions& opt, const GlobalOptions& global);

// ---- experiment configs ----

// Parses and validates the JSON experiment config for `run`; throws
// ConfigError naming the offending field.
struct ExperimentConfig {
    eval::ThreatModel tm = eval::ThreatModel::tm3;
    eval::Representation representation = eval::Representation::text;
    std::string dataset_path;
    eval::ModelSpec model;
    eval::TextConfig text;
    eval::ProtocolConfig protocol;
    std::string out_prefix = "report";

    static ExperimentConfig from_json(const nlohmann::json& j);
    nlohmann::ordered_json to_json() const;
};

// Report serialization shared by run/eval; stable byte-for-byte for a fixed
// (config, seed, dataset).
nlohmann::ordered_json report_to_json(const eval::ExperimentReport& report,
                                      const ExperimentConfig& config,
                                      const std::string& dataset_hash);
std::string report_to_csv(const eval::ExperimentReport& report);
std::string accuracy_chart_svg(const eval::ExperimentReport& report);

// Maps library errors onto exit codes; used by main() around every command.
int exit_code_for(const std::exception& e);

} // namespace elevleak::cli
