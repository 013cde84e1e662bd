#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "datamap/metrics.hpp"
#include "datamap/regions.hpp"
#include "datamap/trainer.hpp"

namespace datamap::noise {

struct FlipEntry {
    std::string instance_id;
    int original = 0;
    int flipped = 0;

    bool operator==(const FlipEntry&) const = default;
};

struct FlipPlan {
    double fraction = 0.0;
    std::uint64_t seed = 0;
    regions::SelectionSpec source;   // candidate pick: high_confidence rank at the flip fraction
    std::vector<FlipEntry> entries;  // canonical id order

    std::vector<std::string> flipped_ids() const;

    bool operator==(const FlipPlan&) const = default;
};

/// Flips ceil(fraction*N) train labels drawn seeded-uniform from the
/// min(N, 4*ceil(fraction*N)) highest-confidence instances; replacement
/// labels are uniform over the other K-1 classes. The table must cover
/// exactly the dataset's train split. true_labels are kept (and initialized
/// from the current labels when absent).
std::pair<trainer::Dataset, FlipPlan> flip_labels(const trainer::Dataset& data,
                                                  const metrics::CartographyTable& table, double fraction,
                                                  std::uint64_t seed);

enum class Feature { confidence, variability };

const char* feature_name(Feature f);

struct FitSummary {
    std::size_t rows = 0;       // always 2 * |flipped|
    double mean_flipped = 0.0;  // mean feature value over the flipped rows
    double mean_clean = 0.0;    // mean feature value over the sampled clean rows
    long iterations = 0;
    double grad_norm = 0.0;
};

/// Single-feature logistic model: p(noisy | value) = sigmoid(weight*value + bias).
/// The weight is constrained <= 0, so lower values always mean more likely
/// noisy and the decision rule is a threshold.
struct NoiseClassifier {
    Feature feature = Feature::confidence;
    double weight = 0.0;
    double bias = 0.0;
    bool degenerate = false;  // constant training feature; threshold parked at that value
    FitSummary summary;

    double probability(double value) const;
    double threshold() const;  // -bias/weight; requires weight != 0
};

/// Balanced fit: all flipped rows plus an equal-size seeded-uniform clean
/// sample, full-batch gradient descent until the gradient norm drops below
/// 1e-8 or 1e5 iterations pass. A constant feature column cannot be fit; the
/// classifier is then marked degenerate with its threshold at that value.
NoiseClassifier fit_noise_classifier(const metrics::CartographyTable& table,
                                     const std::vector<std::string>& flip_mask, std::uint64_t seed,
                                     Feature feature = Feature::confidence);

/// Ids with p(noisy) > 0.5, canonical order.
std::vector<std::string> predict_noise(const NoiseClassifier& classifier, const metrics::CartographyTable& table);

struct NoiseReport {
    std::size_t true_positives = 0;
    std::size_t false_positives = 0;
    std::size_t false_negatives = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Binary detection metrics with flip_mask as ground truth. Empty inputs
/// yield zeros, never NaN.
NoiseReport noise_report(const std::vector<std::string>& predicted, const std::vector<std::string>& flip_mask);

/// Text form: `# fraction=... seed=...`, then one `id,original,new` line per
/// flip, canonical id order.
std::string write_flip_plan(const FlipPlan& plan);
void write_flip_plan_file(const std::string& path, const FlipPlan& plan);
FlipPlan parse_flip_plan(const std::string& text);
FlipPlan parse_flip_plan_file(const std::string& path);

/// Offline review sample: `id,predicted_class,confidence` header, then up to
/// per_class seeded draws from the predicted-noisy and predicted-clean sides.
std::string audit_sheet(const NoiseClassifier& classifier, const metrics::CartographyTable& table,
                        std::size_t per_class, std::uint64_t seed);

}  // namespace datamap::noise
