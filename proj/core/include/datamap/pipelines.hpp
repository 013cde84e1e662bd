#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "datamap/metrics.hpp"
#include "datamap/noise.hpp"
#include "datamap/regions.hpp"
#include "datamap/trainer.hpp"

namespace datamap::pipelines {

/// Clean train -> flip from the easy region -> retrain -> fit and evaluate
/// the confidence-threshold noise classifier.
struct NoiseExperiment {
    dynlog::TrainingRunLog clean_log;
    dynlog::TrainingRunLog noised_log;
    metrics::CartographyTable clean_table;
    metrics::CartographyTable noised_table;
    noise::FlipPlan plan;
    noise::NoiseClassifier classifier;
    std::vector<std::string> predicted;
    noise::NoiseReport report;
    double clean_mean_flipped_confidence = 0.0;   // flipped ids, before the flip
    double noised_mean_flipped_confidence = 0.0;  // same ids, after retraining
};

/// The retrain uses a seed derived from config.seed; flip picks, the balanced
/// fit, and prediction all key off `seed`.
NoiseExperiment run_noise_experiment(const trainer::Dataset& data, const trainer::TrainConfig& config,
                                     double flip_fraction, std::uint64_t seed);

struct SweepRow {
    std::string label;  // strategy name, or "full"
    double fraction = 1.0;
    double replace_fraction = 0.0;
    std::size_t train_size = 0;
    double train_accuracy = 0.0;
    double id_accuracy = 0.0;   // dev split
    double ood_accuracy = 0.0;  // ood split
    double final_loss = 0.0;
    bool chance_level = false;  // id accuracy within 5 points of 1/K
};

/// Trains once per strategy on its rank-selected subset (plus a "full"
/// baseline), evaluating on the untouched dev and ood splits. Every run uses
/// the same train config so rows are comparable; `seed` drives the random
/// strategy's draw.
std::vector<SweepRow> run_selection_sweep(const trainer::Dataset& data, const trainer::TrainConfig& config,
                                          const metrics::CartographyTable& table,
                                          const std::vector<regions::Strategy>& strategies, double fraction,
                                          std::uint64_t seed);

/// Ambiguous subset at `fraction`, with each replace fraction swapping that
/// share of the subset for the highest-confidence instances outside it.
std::vector<SweepRow> run_easy_mix(const trainer::Dataset& data, const trainer::TrainConfig& config,
                                   const metrics::CartographyTable& table, double fraction,
                                   const std::vector<double>& replace_fractions, std::uint64_t seed);

std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace datamap::pipelines
