#include "datamap/pipelines.hpp"

#include "datamap/error.hpp"
#include "datamap/io_util.hpp"
#include "datamap/rng.hpp"

namespace datamap::pipelines {

namespace {

double mean_confidence(const metrics::CartographyTable& table, const std::vector<std::string>& ids) {
    double sum = 0.0;
    for (const auto& id : ids) {
        const auto i = table.index_of(id);
        if (i == metrics::CartographyTable::npos) {
            throw ValidationError("mean confidence: id '" + id + "' not in table");
        }
        sum += table.rows[i].confidence;
    }
    return ids.empty() ? 0.0 : sum / static_cast<double>(ids.size());
}

SweepRow run_one(const trainer::Dataset& data, const trainer::TrainConfig& config, const std::string& label,
                 const std::vector<std::string>* subset_ids) {
    const trainer::Dataset restricted = subset_ids ? trainer::restrict_to_ids(data, *subset_ids) : data;
    const auto result = trainer::train(restricted, config);

    SweepRow row;
    row.label = label;
    row.train_size = restricted.split_indices(trainer::SplitTag::train).size();
    row.train_accuracy = trainer::evaluate(result.model, restricted, trainer::SplitTag::train);
    row.id_accuracy = trainer::evaluate(result.model, restricted, trainer::SplitTag::dev);
    row.ood_accuracy = trainer::evaluate(result.model, restricted, trainer::SplitTag::ood);
    row.final_loss = result.epoch_mean_loss.back();
    row.chance_level = row.id_accuracy < 1.0 / static_cast<double>(data.num_classes) + 0.05;
    return row;
}

}  // namespace

NoiseExperiment run_noise_experiment(const trainer::Dataset& data, const trainer::TrainConfig& config,
                                     double flip_fraction, std::uint64_t seed) {
    NoiseExperiment exp;

    auto clean = trainer::train(data, config);
    exp.clean_log = std::move(clean.log);
    exp.clean_table = metrics::compute_table(exp.clean_log);

    auto [noised_data, plan] = noise::flip_labels(data, exp.clean_table, flip_fraction, seed);
    exp.plan = std::move(plan);

    trainer::TrainConfig retrain_config = config;
    retrain_config.seed = derive_seed(config.seed, "retrain");
    auto noised = trainer::train(noised_data, retrain_config);
    exp.noised_log = std::move(noised.log);
    exp.noised_table = metrics::compute_table(exp.noised_log);

    const auto flipped_ids = exp.plan.flipped_ids();
    exp.classifier = noise::fit_noise_classifier(exp.noised_table, flipped_ids, seed);
    exp.predicted = noise::predict_noise(exp.classifier, exp.noised_table);
    exp.report = noise::noise_report(exp.predicted, flipped_ids);
    exp.clean_mean_flipped_confidence = mean_confidence(exp.clean_table, flipped_ids);
    exp.noised_mean_flipped_confidence = mean_confidence(exp.noised_table, flipped_ids);
    return exp;
}

std::vector<SweepRow> run_selection_sweep(const trainer::Dataset& data, const trainer::TrainConfig& config,
                                          const metrics::CartographyTable& table,
                                          const std::vector<regions::Strategy>& strategies, double fraction,
                                          std::uint64_t seed) {
    std::vector<SweepRow> rows;
    rows.reserve(strategies.size() + 1);
    {
        SweepRow full = run_one(data, config, "full", nullptr);
        full.fraction = 1.0;
        rows.push_back(std::move(full));
    }
    for (auto strategy : strategies) {
        const auto subset = regions::rank_select(table, {strategy, fraction, seed});
        SweepRow row = run_one(data, config, regions::strategy_name(strategy), &subset.instance_ids);
        row.fraction = fraction;
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<SweepRow> run_easy_mix(const trainer::Dataset& data, const trainer::TrainConfig& config,
                                   const metrics::CartographyTable& table, double fraction,
                                   const std::vector<double>& replace_fractions, std::uint64_t seed) {
    const auto base = regions::rank_select(table, {regions::Strategy::ambiguous, fraction, seed});
    std::vector<SweepRow> rows;
    rows.reserve(replace_fractions.size());
    for (double rf : replace_fractions) {
        const auto mixed = regions::replace_with_easy(base, table, rf, seed);
        SweepRow row = run_one(data, config, "ambiguous+easy", &mixed.instance_ids);
        row.fraction = fraction;
        row.replace_fraction = rf;
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out =
        "label,fraction,replace_fraction,train_size,train_accuracy,id_accuracy,ood_accuracy,final_loss,status\n";
    for (const auto& r : rows) {
        out += r.label;
        out += ',';
        out += format_sig(r.fraction, 9);
        out += ',';
        out += format_sig(r.replace_fraction, 9);
        out += ',';
        out += std::to_string(r.train_size);
        out += ',';
        out += format_sig(r.train_accuracy, 9);
        out += ',';
        out += format_sig(r.id_accuracy, 9);
        out += ',';
        out += format_sig(r.ood_accuracy, 9);
        out += ',';
        out += format_sig(r.final_loss, 9);
        out += ',';
        out += r.chance_level ? "chance" : "ok";
        out += '\n';
    }
    return out;
}

}  // namespace datamap::pipelines
