// Command-line front end. Every run resolves its options into a manifest
// (command, config, seeds, input digests, output paths, version) whose run-id
// is a digest of the resolved config, so re-running the same invocation
// rewrites byte-identical artifacts.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "datamap/analysis.hpp"
#include "datamap/dynlog.hpp"
#include "datamap/error.hpp"
#include "datamap/io_util.hpp"
#include "datamap/metrics.hpp"
#include "datamap/noise.hpp"
#include "datamap/pipelines.hpp"
#include "datamap/regions.hpp"
#include "datamap/render.hpp"
#include "datamap/rng.hpp"
#include "datamap/trainer.hpp"

namespace {

using json = nlohmann::json;
using namespace datamap;

constexpr const char* kVersion = DATAMAP_VERSION;

const std::vector<double> kDefaultFractions = {0.5, 0.33, 0.25, 0.17, 0.10, 0.05, 0.01};
const std::vector<double> kDefaultReplaceFractions = {0.0, 0.25, 0.5};

struct Run {
    std::string command;
    std::string out_dir;
    json config = json::object();
    json inputs = json::object();
    json outputs = json::object();
    json seeds = json::object();
    std::string run_id;

    // call once, after config is fully resolved
    void open() {
        run_id = digest_hex(command + "|" + config.dump());
        std::filesystem::create_directories(out_dir);
        std::cout << command << " run " << run_id << "\n";
    }

    std::string path(const std::string& suffix) const {
        return out_dir + "/" + run_id + "." + suffix;
    }

    void input_file(const std::string& role, const std::string& file) {
        inputs[role] = {{"path", file}, {"digest", digest_hex(read_file(file))}};
    }

    std::string emit(const std::string& role, const std::string& suffix, const std::string& content) {
        const std::string p = path(suffix);
        write_file(p, content);
        outputs[role] = p;
        std::cout << "  " << role << ": " << p << "\n";
        return p;
    }

    void finish() {
        json m;
        m["command"] = command;
        m["config"] = config;
        m["inputs"] = inputs;
        m["outputs"] = outputs;
        m["run_id"] = run_id;
        m["seeds"] = seeds;
        m["version"] = kVersion;
        const std::string p = path("manifest.json");
        write_file(p, m.dump(2) + "\n");
        std::cout << "  manifest: " << p << "\n";
    }
};

// ---------------------------------------------------------------------------
// shared option bundles

struct SynthOpts {
    std::size_t n_per_class = 500;
    int k_classes = 2;
    double overlap = 0.5;
    double ood_shift = 0.0;
    double flip_fraction = 0.0;
    std::size_t annotators = 0;
};

void add_synth_flags(CLI::App* cmd, SynthOpts& o) {
    cmd->add_option("--n-per-class", o.n_per_class, "synthetic train instances per class")
        ->capture_default_str();
    cmd->add_option("--classes", o.k_classes, "synthetic class count (2-8)")->capture_default_str();
    cmd->add_option("--overlap", o.overlap, "cluster std relative to half the centroid distance")
        ->capture_default_str();
    cmd->add_option("--ood-shift", o.ood_shift, "ood split mean shift")->capture_default_str();
    cmd->add_option("--annotators", o.annotators, "synthetic annotators per instance")
        ->capture_default_str();
}

struct TrainOpts {
    std::string model = "linear";
    int epochs = 10;
    double rate = 0.0;
    double learning_rate = 0.01;
};

void add_train_flags(CLI::App* cmd, TrainOpts& o) {
    cmd->add_option("--model", o.model, "model family")
        ->check(CLI::IsMember({"linear", "mlp"}))
        ->capture_default_str();
    cmd->add_option("--epochs", o.epochs, "training epochs")->capture_default_str();
    cmd->add_option("--rate", o.rate, "dropout rate (mlp only)")->capture_default_str();
    cmd->add_option("--lr", o.learning_rate, "learning rate")->capture_default_str();
}

trainer::TrainConfig to_config(const TrainOpts& o, std::uint64_t seed) {
    trainer::TrainConfig c;
    c.family = trainer::family_from_name(o.model);
    c.epochs = o.epochs;
    c.dropout_rate = o.rate;
    c.learning_rate = o.learning_rate;
    c.seed = seed;
    trainer::validate_config(c);
    return c;
}

json synth_json(const SynthOpts& o) {
    return {{"n_per_class", o.n_per_class}, {"classes", o.k_classes},     {"overlap", o.overlap},
            {"ood_shift", o.ood_shift},     {"annotators", o.annotators}, {"flip_fraction", o.flip_fraction}};
}

json train_json(const TrainOpts& o) {
    return {{"model", o.model}, {"epochs", o.epochs}, {"rate", o.rate}, {"lr", o.learning_rate}};
}

/// Loads --dataset when given, otherwise generates the synthetic reference
/// set (and ships it as an output so the run can be reproduced from files).
trainer::Dataset resolve_dataset(Run& run, const std::string& dataset_path, const SynthOpts& synth,
                                 std::uint64_t seed) {
    if (!dataset_path.empty()) {
        run.input_file("dataset", dataset_path);
        auto d = trainer::parse_dataset_file(dataset_path);
        trainer::validate_dataset(d);
        return d;
    }
    trainer::SyntheticSpec spec;
    spec.n_per_class = synth.n_per_class;
    spec.k_classes = synth.k_classes;
    spec.overlap = synth.overlap;
    spec.ood_shift = synth.ood_shift;
    spec.flip_fraction = synth.flip_fraction;
    spec.annotators = synth.annotators;
    spec.seed = seed;
    auto d = trainer::gen_synthetic(spec);
    run.emit("dataset", "dataset.csv", trainer::write_dataset(d));
    return d;
}

std::string accuracy_report(const trainer::TrainResult& result, const trainer::Dataset& data) {
    std::string text;
    text += "train_accuracy=" + format_double(trainer::evaluate(result.model, data, trainer::SplitTag::train)) + "\n";
    if (!data.split_indices(trainer::SplitTag::dev).empty()) {
        text += "dev_accuracy=" + format_double(trainer::evaluate(result.model, data, trainer::SplitTag::dev)) + "\n";
    }
    if (!data.split_indices(trainer::SplitTag::ood).empty()) {
        text += "ood_accuracy=" + format_double(trainer::evaluate(result.model, data, trainer::SplitTag::ood)) + "\n";
    }
    text += "final_loss=" + format_double(result.epoch_mean_loss.back()) + "\n";
    for (std::size_t e = 0; e < result.epoch_mean_loss.size(); ++e) {
        text += "epoch_loss." + std::to_string(e) + "=" + format_double(result.epoch_mean_loss[e]) + "\n";
    }
    return text;
}

// ---------------------------------------------------------------------------
// subcommands

struct ValidateOpts {
    std::string log;
    std::string out_dir = "runs";
};

int cmd_validate(const ValidateOpts& o) {
    Run run{"validate", o.out_dir};
    run.config = {{"log", o.log}, {"out_dir", o.out_dir}};
    run.open();
    run.input_file("log", o.log);

    std::ifstream stream(o.log);
    if (!stream) throw IoError("cannot open log: " + o.log);
    std::vector<dynlog::Violation> violations;
    const auto log = dynlog::parse_log_collect(stream, violations);

    std::string text;
    for (const auto& v : violations) text += v.format() + "\n";
    run.emit("violations", "violations.txt", text);
    run.finish();

    std::cout << "log: " << log.num_instances() << " instances, " << log.num_epochs() << " epochs, "
              << log.num_classes() << " classes\n";
    if (violations.empty()) {
        std::cout << "no violations\n";
        return 0;
    }
    std::cout << violations.size() << " violation(s):\n" << text;
    return 2;
}

struct MapOpts {
    std::string log;
    std::string out_dir = "runs";
    std::size_t max_points = 25000;
    std::uint64_t seed = 0;
};

int cmd_map(const MapOpts& o) {
    Run run{"map", o.out_dir};
    run.config = {{"log", o.log}, {"max_points", o.max_points}, {"out_dir", o.out_dir}, {"seed", o.seed}};
    run.open();
    run.input_file("log", o.log);

    const auto log = dynlog::parse_log_file(o.log);
    const auto table = metrics::compute_table(log);
    run.emit("table", "table.csv", metrics::write_table_csv(table));

    const auto labels = regions::assign_regions(table, regions::RegionConfig{});
    render::MapStyle style;
    style.max_points = o.max_points;
    style.seed = o.seed;
    style.title = std::filesystem::path(o.log).filename().string();
    run.emit("map", "map.svg", render::render_map(table, labels, style));
    run.finish();

    std::cout << "mapped " << table.size() << " instances over " << table.num_epochs << " epochs\n";
    return 0;
}

struct SelectOpts {
    std::string table;
    std::string strategy;
    double fraction = 0.0;  // 0 = batch mode over the default list
    std::uint64_t seed = 0;
    std::string out_dir = "runs";
};

int cmd_select(const SelectOpts& o) {
    Run run{"select", o.out_dir};
    run.config = {{"table", o.table},
                  {"strategy", o.strategy.empty() ? "all" : o.strategy},
                  {"fraction", o.fraction},
                  {"seed", o.seed},
                  {"out_dir", o.out_dir}};
    run.open();
    run.input_file("table", o.table);
    const auto table = metrics::parse_table_file(o.table);

    std::vector<regions::Strategy> strategies;
    if (o.strategy.empty()) {
        strategies = regions::all_strategies();
    } else {
        strategies = {regions::strategy_from_name(o.strategy)};
    }
    const std::vector<double> fractions =
        o.fraction > 0.0 ? std::vector<double>{o.fraction} : kDefaultFractions;

    for (const auto s : strategies) {
        for (const double f : fractions) {
            const auto subset = regions::rank_select(table, {s, f, o.seed});
            const std::string tag = std::string(regions::strategy_name(s)) + "." + format_double(f);
            run.emit(tag, tag + ".subset.txt", regions::write_subset(subset));
        }
    }
    run.finish();
    return 0;
}

struct TrainCmdOpts {
    std::string dataset;
    std::string subset;
    SynthOpts synth;
    TrainOpts train;
    std::uint64_t seed = 0;
    std::string out_dir = "runs";
};

int cmd_train(const TrainCmdOpts& o) {
    Run run{"train", o.out_dir};
    run.config = {{"dataset", o.dataset}, {"subset", o.subset},  {"synthetic", synth_json(o.synth)},
                  {"train", train_json(o.train)}, {"seed", o.seed}, {"out_dir", o.out_dir}};
    run.open();

    auto data = resolve_dataset(run, o.dataset, o.synth, o.seed);
    if (!o.subset.empty()) {
        run.input_file("subset", o.subset);
        const auto subset = regions::parse_subset_file(o.subset);
        data = trainer::restrict_to_ids(data, subset.instance_ids);
    }

    const auto config = to_config(o.train, o.seed);
    run.seeds = {{"master", o.seed},
                 {"init", derive_seed(o.seed, "init")},
                 {"shuffle", derive_seed(o.seed, "shuffle")}};
    const auto result = trainer::train(data, config);

    run.emit("log", "log.jsonl", dynlog::serialize_log(result.log));
    const auto table = metrics::compute_table(result.log);
    run.emit("table", "table.csv", metrics::write_table_csv(table));
    const std::string report = accuracy_report(result, data);
    run.emit("metrics", "metrics.txt", report);
    run.finish();

    std::cout << report.substr(0, report.find("epoch_loss."));
    return 0;
}

struct NoiseOpts {
    std::string dataset;
    SynthOpts synth;
    TrainOpts train;
    double fraction = 0.01;
    std::uint64_t seed = 0;
    std::string out_dir = "runs";
};

int cmd_noise_exp(const NoiseOpts& o) {
    Run run{"noise-exp", o.out_dir};
    run.config = {{"dataset", o.dataset}, {"synthetic", synth_json(o.synth)},
                  {"train", train_json(o.train)}, {"fraction", o.fraction},
                  {"seed", o.seed},       {"out_dir", o.out_dir}};
    run.open();

    const auto data = resolve_dataset(run, o.dataset, o.synth, o.seed);
    const auto config = to_config(o.train, o.seed);
    run.seeds = {{"master", o.seed}, {"retrain", derive_seed(o.seed, "retrain")}};

    const auto xp = pipelines::run_noise_experiment(data, config, o.fraction, o.seed);

    run.emit("clean_table", "clean-table.csv", metrics::write_table_csv(xp.clean_table));
    run.emit("noised_table", "noised-table.csv", metrics::write_table_csv(xp.noised_table));
    run.emit("flip_plan", "flip-plan.csv", noise::write_flip_plan(xp.plan));
    run.emit("audit", "audit.csv", noise::audit_sheet(xp.classifier, xp.noised_table, 10, o.seed));

    std::string report;
    report += "flips=" + std::to_string(xp.plan.entries.size()) + "\n";
    report += "predicted=" + std::to_string(xp.predicted.size()) + "\n";
    report += "precision=" + format_double(xp.report.precision) + "\n";
    report += "recall=" + format_double(xp.report.recall) + "\n";
    report += "f1=" + format_double(xp.report.f1) + "\n";
    report += "degenerate=" + std::string(xp.classifier.degenerate ? "1" : "0") + "\n";
    if (xp.classifier.weight != 0.0) {
        report += "threshold=" + format_double(xp.classifier.threshold()) + "\n";
    }
    report += "clean_mean_flipped_confidence=" + format_double(xp.clean_mean_flipped_confidence) + "\n";
    report += "noised_mean_flipped_confidence=" + format_double(xp.noised_mean_flipped_confidence) + "\n";
    report += "confidence_shift=" +
              format_double(xp.clean_mean_flipped_confidence - xp.noised_mean_flipped_confidence) + "\n";
    report += "fit.rows=" + std::to_string(xp.classifier.summary.rows) + "\n";
    report += "fit.iterations=" + std::to_string(xp.classifier.summary.iterations) + "\n";
    report += "fit.grad_norm=" + format_double(xp.classifier.summary.grad_norm) + "\n";
    run.emit("report", "noise-report.txt", report);
    run.finish();

    std::cout << report;
    return 0;
}

struct BurnoutOpts {
    std::string log;
    SynthOpts synth;
    TrainOpts train{.model = "linear", .epochs = 12};
    int e_early = 6;
    std::uint64_t seed = 0;
    std::string out_dir = "runs";
};

int cmd_burnout(const BurnoutOpts& o) {
    Run run{"burnout", o.out_dir};
    run.config = {{"log", o.log},   {"synthetic", synth_json(o.synth)}, {"train", train_json(o.train)},
                  {"e_early", o.e_early}, {"seed", o.seed},            {"out_dir", o.out_dir}};
    run.open();

    dynlog::TrainingRunLog log = [&] {
        if (!o.log.empty()) {
            run.input_file("log", o.log);
            return dynlog::parse_log_file(o.log);
        }
        const auto data = resolve_dataset(run, "", o.synth, o.seed);
        return trainer::train(data, to_config(o.train, o.seed)).log;
    }();

    const auto mc = analysis::burnout_correlation(log, o.e_early);
    std::string report;
    report += "epochs=" + std::to_string(log.num_epochs()) + "\n";
    report += "e_early=" + std::to_string(o.e_early) + "\n";
    report += analysis::report_lines("burnout", mc);
    run.emit("report", "burnout.txt", report);
    run.finish();

    std::cout << report;
    return 0;
}

struct StabilityOpts {
    std::string dataset;
    SynthOpts synth;
    TrainOpts train;
    int runs = 5;
    std::uint64_t seed = 0;
    std::string out_dir = "runs";
};

int cmd_stability(const StabilityOpts& o) {
    Run run{"stability", o.out_dir};
    run.config = {{"dataset", o.dataset}, {"synthetic", synth_json(o.synth)},
                  {"train", train_json(o.train)}, {"runs", o.runs},
                  {"seed", o.seed},       {"out_dir", o.out_dir}};
    run.open();
    if (o.runs < 2) throw ValidationError("stability needs at least 2 runs");

    const auto data = resolve_dataset(run, o.dataset, o.synth, o.seed);
    std::vector<metrics::CartographyTable> tables;
    for (int r = 0; r < o.runs; ++r) {
        const auto child = derive_seed(o.seed, "run" + std::to_string(r));
        run.seeds["run" + std::to_string(r)] = child;
        tables.push_back(metrics::compute_table(trainer::train(data, to_config(o.train, child)).log));
    }

    const auto mc = analysis::seed_stability(tables);
    std::string report;
    report += "runs=" + std::to_string(o.runs) + "\n";
    report += analysis::report_lines("stability", mc);
    run.emit("report", "stability.txt", report);
    run.finish();

    std::cout << report;
    return 0;
}

struct AgreeOpts {
    std::string dataset;
    SynthOpts synth{.overlap = 0.8, .annotators = 5};
    TrainOpts train;
    std::uint64_t seed = 0;
    std::string out_dir = "runs";
};

int cmd_agree_heatmap(const AgreeOpts& o) {
    Run run{"agree-heatmap", o.out_dir};
    run.config = {{"dataset", o.dataset}, {"synthetic", synth_json(o.synth)},
                  {"train", train_json(o.train)}, {"seed", o.seed},
                  {"out_dir", o.out_dir}};
    run.open();

    const auto data = resolve_dataset(run, o.dataset, o.synth, o.seed);
    const auto result = trainer::train(data, to_config(o.train, o.seed));
    const auto table = metrics::compute_table(result.log);

    const auto scores = analysis::agreement(data, o.seed);
    std::vector<double> aligned(table.size());
    std::string csv = "id,agreement\n";
    for (std::size_t i = 0; i < table.size(); ++i) {
        const auto j = data.index_of(table.rows[i].instance_id);
        aligned[i] = scores.scores[j];
        csv += table.rows[i].instance_id + "," + format_sig(aligned[i], 9) + "\n";
    }
    run.emit("agreement", "agreement.csv", csv);

    const auto grid = analysis::heatmap_bins(table, aligned, 10, 10);
    render::HeatmapStyle style;
    style.title = "annotator agreement";
    run.emit("heatmap", "heatmap.svg", render::render_heatmap(grid, style));
    run.finish();
    return 0;
}

struct DropoutOpts {
    std::string dataset;
    SynthOpts synth;
    TrainOpts train{.model = "mlp", .epochs = 10};
    int samples = 50;
    double sample_rate = 0.3;
    std::uint64_t seed = 0;
    std::string out_dir = "runs";
};

int cmd_dropout_compare(const DropoutOpts& o) {
    Run run{"dropout-compare", o.out_dir};
    run.config = {{"dataset", o.dataset}, {"synthetic", synth_json(o.synth)},
                  {"train", train_json(o.train)}, {"samples", o.samples},
                  {"sample_rate", o.sample_rate},  {"seed", o.seed},
                  {"out_dir", o.out_dir}};
    run.open();
    if (trainer::family_from_name(o.train.model) != trainer::Family::mlp) {
        throw ValidationError("dropout-compare requires --model mlp");
    }

    const auto data = resolve_dataset(run, o.dataset, o.synth, o.seed);
    const auto result = trainer::train(data, to_config(o.train, o.seed));
    const auto table = metrics::compute_table(result.log);
    const auto mc_seed = derive_seed(o.seed, "mc");
    run.seeds = {{"master", o.seed}, {"mc", mc_seed}};
    const auto samples = trainer::dropout_sample(result.model, data, trainer::SplitTag::train,
                                                 o.samples, o.sample_rate, mc_seed);
    const auto mc = analysis::dropout_vs_dynamics(table, samples);

    std::string report;
    report += "samples=" + std::to_string(o.samples) + "\n";
    report += "sample_rate=" + format_double(o.sample_rate) + "\n";
    report += analysis::report_lines("dropout", mc);
    report += "dropout.confidence.large_transformer_reference=0.450-0.452\n";
    report += "dropout.variability.large_transformer_reference=0.390-0.393\n";
    run.emit("report", "dropout.txt", report);
    run.finish();

    std::cout << report;
    return 0;
}

struct EasyMixOpts {
    std::string dataset;
    SynthOpts synth{.n_per_class = 1500, .overlap = 0.8, .ood_shift = 1.0};
    TrainOpts train;
    double fraction = 0.0;  // 0 = sweep the default list
    std::vector<double> replace_fractions = kDefaultReplaceFractions;
    std::uint64_t seed = 0;
    std::string out_dir = "runs";
};

int cmd_easy_mix(const EasyMixOpts& o) {
    Run run{"easy-mix", o.out_dir};
    run.config = {{"dataset", o.dataset},
                  {"synthetic", synth_json(o.synth)},
                  {"train", train_json(o.train)},
                  {"fraction", o.fraction},
                  {"replace_fractions", o.replace_fractions},
                  {"seed", o.seed},
                  {"out_dir", o.out_dir}};
    run.open();

    const auto data = resolve_dataset(run, o.dataset, o.synth, o.seed);
    const auto config = to_config(o.train, o.seed);
    const auto full = trainer::train(data, config);
    const auto table = metrics::compute_table(full.log);

    const std::vector<double> fractions =
        o.fraction > 0.0 ? std::vector<double>{o.fraction} : kDefaultFractions;
    std::vector<pipelines::SweepRow> rows;
    for (const double f : fractions) {
        const auto batch = pipelines::run_easy_mix(data, config, table, f, o.replace_fractions, o.seed);
        rows.insert(rows.end(), batch.begin(), batch.end());
    }
    const auto csv = pipelines::sweep_csv(rows);
    run.emit("sweep", "easymix.csv", csv);
    run.finish();

    std::cout << csv;
    return 0;
}

struct ReportOpts {
    std::string out_dir = "runs";
};

int cmd_report(const ReportOpts& o) {
    Run run{"report", o.out_dir};
    run.config = {{"out_dir", o.out_dir}};
    run.open();

    std::vector<std::string> files;
    if (std::filesystem::exists(o.out_dir)) {
        for (const auto& entry : std::filesystem::directory_iterator(o.out_dir)) {
            const auto name = entry.path().filename().string();
            if (name.size() > 14 && name.substr(name.size() - 14) == ".manifest.json") {
                files.push_back(entry.path().string());
            }
        }
    }
    std::sort(files.begin(), files.end());

    std::string text;
    std::size_t counted = 0;
    for (const auto& file : files) {
        json m;
        try {
            m = json::parse(read_file(file));
        } catch (const json::exception&) {
            continue;
        }
        if (m.value("command", "") == "report") continue;
        run.inputs[m.value("run_id", file)] = {{"path", file}, {"digest", digest_hex(read_file(file))}};
        ++counted;
        text += m.value("run_id", "?") + "  " + m.value("command", "?") + "\n";
        if (m.contains("outputs")) {
            for (const auto& [role, path] : m["outputs"].items()) {
                text += "  " + role + ": " + path.get<std::string>() + "\n";
            }
        }
    }
    text = "runs=" + std::to_string(counted) + "\n" + text;
    run.emit("summary", "report.txt", text);
    run.finish();

    std::cout << text;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"training-dynamics data maps: metrics, selection, diagnosis, rendering"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    ValidateOpts validate_opts;
    auto* validate_cmd = app.add_subcommand("validate", "check a training log against the format contract");
    validate_cmd->add_option("--log", validate_opts.log, "training log (jsonl)")->required();
    validate_cmd->add_option("--out-dir", validate_opts.out_dir, "output directory")->capture_default_str();

    MapOpts map_opts;
    auto* map_cmd = app.add_subcommand("map", "compute the statistics table and render the data map");
    map_cmd->add_option("--log", map_opts.log, "training log (jsonl)")->required();
    map_cmd->add_option("--max-points", map_opts.max_points, "subsample cap for the figure")
        ->capture_default_str();
    map_cmd->add_option("--seed", map_opts.seed, "subsample seed")->capture_default_str();
    map_cmd->add_option("--out-dir", map_opts.out_dir, "output directory")->capture_default_str();

    SelectOpts select_opts;
    auto* select_cmd = app.add_subcommand("select", "rank-select subsets from a statistics table");
    select_cmd->add_option("--table", select_opts.table, "statistics table (csv)")->required();
    select_cmd->add_option("--strategy", select_opts.strategy, "one strategy (default: all)");
    select_cmd->add_option("--fraction", select_opts.fraction, "one fraction (default: 50/33/25/17/10/5/1%)");
    select_cmd->add_option("--seed", select_opts.seed, "seed for the random strategy")->capture_default_str();
    select_cmd->add_option("--out-dir", select_opts.out_dir, "output directory")->capture_default_str();

    TrainCmdOpts train_opts;
    auto* train_cmd = app.add_subcommand("train", "train a reference model and log its dynamics");
    train_cmd->add_option("--dataset", train_opts.dataset, "dataset file (default: synthetic)");
    train_cmd->add_option("--subset", train_opts.subset, "train only on the ids in this subset file");
    add_synth_flags(train_cmd, train_opts.synth);
    add_train_flags(train_cmd, train_opts.train);
    train_cmd->add_option("--seed", train_opts.seed, "master seed")->capture_default_str();
    train_cmd->add_option("--out-dir", train_opts.out_dir, "output directory")->capture_default_str();

    NoiseOpts noise_opts;
    noise_opts.synth.n_per_class = 1000;
    noise_opts.synth.overlap = 0.25;
    noise_opts.train.model = "mlp";
    noise_opts.train.epochs = 12;
    auto* noise_cmd = app.add_subcommand("noise-exp", "flip confident labels, retrain, and detect the flips");
    noise_cmd->add_option("--dataset", noise_opts.dataset, "dataset file (default: synthetic)");
    add_synth_flags(noise_cmd, noise_opts.synth);
    add_train_flags(noise_cmd, noise_opts.train);
    noise_cmd->add_option("--fraction", noise_opts.fraction, "fraction of train labels to flip")
        ->capture_default_str();
    noise_cmd->add_option("--seed", noise_opts.seed, "master seed")->capture_default_str();
    noise_cmd->add_option("--out-dir", noise_opts.out_dir, "output directory")->capture_default_str();

    BurnoutOpts burnout_opts;
    auto* burnout_cmd = app.add_subcommand("burnout", "correlate early-window statistics with the full run");
    burnout_cmd->add_option("--log", burnout_opts.log, "training log (default: train synthetically)");
    add_synth_flags(burnout_cmd, burnout_opts.synth);
    add_train_flags(burnout_cmd, burnout_opts.train);
    burnout_cmd->add_option("--e-early", burnout_opts.e_early, "early window size in epochs")
        ->capture_default_str();
    burnout_cmd->add_option("--seed", burnout_opts.seed, "master seed")->capture_default_str();
    burnout_cmd->add_option("--out-dir", burnout_opts.out_dir, "output directory")->capture_default_str();

    StabilityOpts stability_opts;
    auto* stability_cmd = app.add_subcommand("stability", "correlate statistics across training seeds");
    stability_cmd->add_option("--dataset", stability_opts.dataset, "dataset file (default: synthetic)");
    add_synth_flags(stability_cmd, stability_opts.synth);
    add_train_flags(stability_cmd, stability_opts.train);
    stability_cmd->add_option("--runs", stability_opts.runs, "number of seeded runs")->capture_default_str();
    stability_cmd->add_option("--seed", stability_opts.seed, "master seed")->capture_default_str();
    stability_cmd->add_option("--out-dir", stability_opts.out_dir, "output directory")->capture_default_str();

    AgreeOpts agree_opts;
    auto* agree_cmd = app.add_subcommand("agree-heatmap", "bin annotator agreement over the data map");
    agree_cmd->add_option("--dataset", agree_opts.dataset, "dataset with annotations (default: synthetic)");
    add_synth_flags(agree_cmd, agree_opts.synth);
    add_train_flags(agree_cmd, agree_opts.train);
    agree_cmd->add_option("--seed", agree_opts.seed, "master seed")->capture_default_str();
    agree_cmd->add_option("--out-dir", agree_opts.out_dir, "output directory")->capture_default_str();

    DropoutOpts dropout_opts;
    auto* dropout_cmd = app.add_subcommand("dropout-compare",
                                           "correlate dropout-sample uncertainty with training dynamics");
    dropout_cmd->add_option("--dataset", dropout_opts.dataset, "dataset file (default: synthetic)");
    add_synth_flags(dropout_cmd, dropout_opts.synth);
    add_train_flags(dropout_cmd, dropout_opts.train);
    dropout_cmd->add_option("--samples", dropout_opts.samples, "stochastic forward passes per instance")
        ->capture_default_str();
    dropout_cmd->add_option("--sample-rate", dropout_opts.sample_rate, "dropout rate while sampling")
        ->capture_default_str();
    dropout_cmd->add_option("--seed", dropout_opts.seed, "master seed")->capture_default_str();
    dropout_cmd->add_option("--out-dir", dropout_opts.out_dir, "output directory")->capture_default_str();

    EasyMixOpts easymix_opts;
    auto* easymix_cmd = app.add_subcommand("easy-mix",
                                           "train on ambiguous subsets with easy replacements, report ID/OOD");
    easymix_cmd->add_option("--dataset", easymix_opts.dataset, "dataset file (default: synthetic)");
    add_synth_flags(easymix_cmd, easymix_opts.synth);
    add_train_flags(easymix_cmd, easymix_opts.train);
    easymix_cmd->add_option("--fraction", easymix_opts.fraction,
                            "one subset fraction (default: 50/33/25/17/10/5/1%)");
    easymix_cmd->add_option("--replace-fractions", easymix_opts.replace_fractions,
                            "replacement shares to sweep")
        ->capture_default_str();
    easymix_cmd->add_option("--seed", easymix_opts.seed, "master seed")->capture_default_str();
    easymix_cmd->add_option("--out-dir", easymix_opts.out_dir, "output directory")->capture_default_str();

    ReportOpts report_opts;
    auto* report_cmd = app.add_subcommand("report", "summarize the manifests in an output directory");
    report_cmd->add_option("--out-dir", report_opts.out_dir, "directory to scan")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (validate_cmd->parsed()) return cmd_validate(validate_opts);
        if (map_cmd->parsed()) return cmd_map(map_opts);
        if (select_cmd->parsed()) return cmd_select(select_opts);
        if (train_cmd->parsed()) return cmd_train(train_opts);
        if (noise_cmd->parsed()) return cmd_noise_exp(noise_opts);
        if (burnout_cmd->parsed()) return cmd_burnout(burnout_opts);
        if (stability_cmd->parsed()) return cmd_stability(stability_opts);
        if (agree_cmd->parsed()) return cmd_agree_heatmap(agree_opts);
        if (dropout_cmd->parsed()) return cmd_dropout_compare(dropout_opts);
        if (easymix_cmd->parsed()) return cmd_easy_mix(easymix_opts);
        if (report_cmd->parsed()) return cmd_report(report_opts);
    } catch (const NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const ConstantInputError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
