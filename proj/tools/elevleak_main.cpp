#include "elevleak/cli.hpp"
#include "elevleak/errors.hpp"

#include <CLI11.hpp>

#include <cstdio>

using namespace elevleak;

int main(int argc, char** argv) {
    CLI::App app{"elevleak: location inference from elevation profiles"};
    app.require_subcommand(1);

    cli::GlobalOptions global;
    app.add_option("--seed", global.seed, "global random seed")->capture_default_str();
    app.add_option("--out-dir", global.out_dir, "output directory")->capture_default_str();
    app.add_option("--threads", global.threads, "worker threads")->capture_default_str();

    cli::IngestOptions ingest;
    auto* cmd_ingest = app.add_subcommand("ingest", "label a directory of GPX files by region");
    cmd_ingest->add_option("gpx_dir", ingest.gpx_dir, "directory of .gpx files")->required();
    cmd_ingest->add_option("--threshold", ingest.region_threshold_deg,
                           "region clustering threshold in degrees")
        ->capture_default_str();
    cmd_ingest->add_option("--region-names", ingest.region_names_path,
                           "JSON file mapping region ids to names");
    cmd_ingest->add_option("-o,--output", ingest.output, "dataset file")->capture_default_str();

    cli::MineOptions mine;
    auto* cmd_mine = app.add_subcommand("mine", "mine segments from a recorded fixture");
    cmd_mine->add_option("fixture", mine.fixture_path, "fixture JSON")->required();
    cmd_mine->add_option("--label", mine.city_label, "city label")->required();
    cmd_mine->add_option("--borough", mine.borough_label, "borough label for all samples");
    cmd_mine->add_option("--sw-lat", mine.sw_lat)->required();
    cmd_mine->add_option("--sw-lon", mine.sw_lon)->required();
    cmd_mine->add_option("--ne-lat", mine.ne_lat)->required();
    cmd_mine->add_option("--ne-lon", mine.ne_lon)->required();
    cmd_mine->add_option("--rows", mine.rows, "grid rows")->capture_default_str();
    cmd_mine->add_option("--cols", mine.cols, "grid cols")->capture_default_str();
    cmd_mine->add_option("-o,--output", mine.output, "dataset file")->capture_default_str();

    cli::SynthOptions synth;
    auto* cmd_synth = app.add_subcommand("synth", "generate a synthetic city dataset");
    cmd_synth->add_option("--cities", synth.cities)->capture_default_str();
    cmd_synth->add_option("--base0", synth.base0_m, "base elevation of city 0 (m)")
        ->capture_default_str();
    cmd_synth->add_option("--gap", synth.gap_m, "base elevation gap between cities (m)")
        ->capture_default_str();
    cmd_synth->add_option("--bump", synth.bump_height_m, "terrain bump amplitude (m)")
        ->capture_default_str();
    cmd_synth->add_option("--routes", synth.routes_per_city)->capture_default_str();
    cmd_synth->add_option("--points", synth.n_points, "points per route")->capture_default_str();
    cmd_synth->add_option("--step", synth.step_deg, "walk step in degrees")->capture_default_str();
    cmd_synth->add_option("--boroughs", synth.boroughs, "boroughs per city (0 = none)")
        ->capture_default_str();
    cmd_synth->add_option("-o,--output", synth.output, "dataset file")->capture_default_str();

    cli::PreprocessOptions preprocess;
    auto* cmd_preprocess =
        app.add_subcommand("preprocess", "build codebook, vocabulary and BoW features");
    cmd_preprocess->add_option("dataset", preprocess.dataset)->required();
    cmd_preprocess->add_option("--level", preprocess.level)->capture_default_str();
    cmd_preprocess->add_option("--ngram", preprocess.text.ngram_order)->capture_default_str();
    cmd_preprocess
        ->add_option_function<std::string>(
            "--ngram-mode",
            [&](const std::string& m) {
                preprocess.text.ngram_mode =
                    m == "exact" ? textrep::NgramMode::exact : textrep::NgramMode::cumulative;
            },
            "exact | cumulative")
        ->check(CLI::IsMember({"exact", "cumulative"}));
    cmd_preprocess->add_option("--prune", preprocess.text.prune_min_frequency)
        ->capture_default_str();
    cmd_preprocess->add_option("--discretization", preprocess.text.discretization, "auto|raw|fine")
        ->check(CLI::IsMember({"auto", "raw", "fine"}))
        ->capture_default_str();
    cmd_preprocess->add_option("--alphabet", preprocess.text.alphabet)->capture_default_str();
    cmd_preprocess->add_option("-o,--out-prefix", preprocess.out_prefix)->capture_default_str();

    cli::TrainOptions train;
    auto* cmd_train = app.add_subcommand("train", "fit one model on a whole dataset");
    cmd_train->add_option("dataset", train.dataset)->required();
    cmd_train->add_option("--level", train.level)->capture_default_str();
    cmd_train->add_option("--representation", train.representation, "text | image")
        ->check(CLI::IsMember({"text", "image"}))
        ->capture_default_str();
    cmd_train->add_option("--family", train.model.family, "svm | rfc | mlp | cnn");
    cmd_train
        ->add_option_function<std::string>(
            "--method",
            [&](const std::string& m) {
                train.model.cnn_method = m == "weighted"   ? eval::CnnMethod::weighted
                                         : m == "finetune" ? eval::CnnMethod::finetune
                                                           : eval::CnnMethod::plain;
            },
            "cnn loss handling: plain | weighted | finetune")
        ->check(CLI::IsMember({"plain", "weighted", "finetune"}));
    int train_epochs = -1;
    double train_lr = -1.0;
    cmd_train->add_option("--epochs", train_epochs, "training epochs");
    cmd_train->add_option("--lr", train_lr, "learning rate");
    cmd_train->add_option("--ngram", train.text.ngram_order)->capture_default_str();
    cmd_train->add_option("--prune", train.text.prune_min_frequency)->capture_default_str();
    cmd_train->add_option("--discretization", train.text.discretization)
        ->check(CLI::IsMember({"auto", "raw", "fine"}))
        ->capture_default_str();
    cmd_train->add_option("-o,--output", train.output)->capture_default_str();

    cli::EvalOptions eval_opt;
    auto* cmd_eval = app.add_subcommand("eval", "evaluate a checkpoint against a dataset");
    cmd_eval->add_option("checkpoint", eval_opt.checkpoint)->required();
    cmd_eval->add_option("dataset", eval_opt.dataset)->required();
    cmd_eval->add_option("-o,--out-prefix", eval_opt.out_prefix)->capture_default_str();

    cli::RunOptions run;
    auto* cmd_run = app.add_subcommand("run", "run a threat-model experiment from a config");
    cmd_run->add_option("config", run.config_path, "experiment config JSON")->required();
    cmd_run->add_flag("!--no-svg", run.svg_chart, "skip the SVG accuracy chart");

    cli::RenderOptions render;
    auto* cmd_render = app.add_subcommand("render", "render one sample's 32x32 image as PNG");
    cmd_render->add_option("dataset", render.dataset)->required();
    cmd_render->add_option("sample_id", render.sample_id)->required();
    cmd_render->add_option("--scale", render.scale)->capture_default_str();
    cmd_render->add_option("-o,--output", render.output)->capture_default_str();

    cli::ReportOptions report;
    auto* cmd_report = app.add_subcommand("report", "print a report JSON as a table");
    cmd_report->add_option("report_json", report.report_json)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (train_epochs > 0) {
            train.model.svm.epochs = train_epochs;
            train.model.mlp.epochs = train_epochs;
            train.model.cnn.epochs = train_epochs;
        }
        if (train_lr > 0.0) {
            train.model.svm.lr = train_lr;
            train.model.mlp.adam.lr = train_lr;
            train.model.cnn.adam.lr = train_lr;
        }
        if (cmd_ingest->parsed()) return cli::cmd_ingest(ingest, global);
        if (cmd_mine->parsed()) return cli::cmd_mine(mine, global);
        if (cmd_synth->parsed()) return cli::cmd_synth(synth, global);
        if (cmd_preprocess->parsed()) return cli::cmd_preprocess(preprocess, global);
        if (cmd_train->parsed()) return cli::cmd_train(train, global);
        if (cmd_eval->parsed()) return cli::cmd_eval(eval_opt, global);
        if (cmd_run->parsed()) return cli::cmd_run(run, global);
        if (cmd_render->parsed()) return cli::cmd_render(render, global);
        if (cmd_report->parsed()) return cli::cmd_report(report, global);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return cli::exit_code_for(e);
    }
    return cli::kExitValidation;
}
