#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "datamap/dynlog.hpp"

namespace datamap::trainer {

enum class SplitTag { train, dev, ood };

const char* split_name(SplitTag s);
SplitTag split_from_name(const std::string& name);

/// In-memory tabular dataset: dense real features, integer class labels,
/// optional pre-flip labels and per-annotator label columns, and a split tag
/// per instance.
struct Dataset {
    std::size_t dim = 0;
    int num_classes = 0;
    std::vector<std::string> instance_ids;  // N, unique
    std::vector<double> features;           // N x dim, row-major
    std::vector<int> labels;                // N, each < num_classes
    std::vector<int> true_labels;           // empty, or N pre-flip labels
    std::vector<int> annotations;           // empty, or N x num_annotators
    std::size_t num_annotators = 0;
    std::vector<SplitTag> splits;           // N

    std::size_t size() const { return instance_ids.size(); }
    std::span<const double> row(std::size_t i) const { return {features.data() + i * dim, dim}; }
    std::vector<std::size_t> split_indices(SplitTag tag) const;
    std::size_t index_of(const std::string& id) const;  // linear scan; npos if absent
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

/// Throws ValidationError on any structural defect (sizes, label ranges,
/// duplicate ids, non-finite features).
void validate_dataset(const Dataset& d);

/// Gaussian class clusters on orthogonal axes: centroid of class c is 2*e_c
/// in max(2, k) dimensions, so every centroid pair is 2*sqrt(2) apart and the
/// cluster std is overlap * sqrt(2). The projected class margin is then
/// 1/overlap standard deviations, making `overlap` the direct intrinsic-
/// ambiguity dial.
struct SyntheticSpec {
    std::size_t n_per_class = 100;  // train split; dev and ood each get half
    int k_classes = 2;              // in [2, 8] (cluster axes are orthogonal)
    double overlap = 0.5;           // cluster std relative to half the centroid distance
    double flip_fraction = 0.0;     // in [0,1); train-split labels flipped at random
    double ood_shift = 0.0;         // >= 0; ood split shifted along centroid0 -> centroid1
    std::uint64_t seed = 0;
    std::size_t annotators = 0;     // labels drawn from the exact class posterior at x
};

Dataset gen_synthetic(const SyntheticSpec& spec);

enum class Family { linear, mlp };

const char* family_name(Family f);
Family family_from_name(const std::string& name);

struct TrainConfig {
    Family family = Family::linear;
    int hidden_width = 16;      // mlp only
    int hidden_layers = 1;      // mlp only, 1 or 2
    int epochs = 10;
    double learning_rate = 1e-2;
    int batch_size = 32;
    double dropout_rate = 0.0;  // in [0,1); > 0 requires mlp (masks hidden units)
    std::uint64_t seed = 0;
};

void validate_config(const TrainConfig& config);

struct ModelSnapshot {
    TrainConfig config;
    std::size_t input_dim = 0;
    int num_classes = 0;
    std::vector<double> params;  // per layer: weights (out x in, row-major) then biases
};

std::size_t param_count(const TrainConfig& config, std::size_t input_dim, int num_classes);

/// Seeded initial snapshot: weights uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)],
/// biases zero.
ModelSnapshot init_model(const Dataset& data, const TrainConfig& config);

/// Class distribution for one feature row, evaluation mode (no dropout).
std::vector<double> predict_probs(const ModelSnapshot& model, std::span<const double> x);

/// Mean cross-entropy over the given instances plus its parameter gradient,
/// evaluation mode. `grad` is resized and overwritten. Pure; the basis for
/// finite-difference checks.
double loss_and_grad(const ModelSnapshot& model, const Dataset& data,
                     std::span<const std::size_t> indices, std::vector<double>& grad);

struct TrainResult {
    dynlog::TrainingRunLog log;  // one record per train instance per epoch
    ModelSnapshot model;         // end-of-training parameters
    std::vector<double> epoch_mean_loss;
};

/// Adam (beta1 0.9, beta2 0.999, eps 1e-8) on cross-entropy over the train
/// split, order reshuffled each epoch from the seed. At each epoch end the
/// full softmax for every train instance is recorded in evaluation mode.
/// Throws NumericError (with epoch and batch) if the loss leaves the finite
/// range.
TrainResult train(const Dataset& data, const TrainConfig& config);

/// Fraction of argmax-correct predictions on a split, lowest-index tie-break.
/// Throws on dimension mismatch or an empty split.
double evaluate(const ModelSnapshot& model, const Dataset& data, SplitTag split);

struct DropoutSamples {
    std::vector<std::string> instance_ids;    // canonical (lexicographic) order
    std::vector<std::vector<double>> p_gold;  // [instance][sample]
};

/// n_samples stochastic forward passes per instance, Bernoulli-masking hidden
/// units at `rate` with 1/(1-rate) rescaling. A linear model has no hidden
/// units, so it is rejected whenever rate > 0.
DropoutSamples dropout_sample(const ModelSnapshot& model, const Dataset& data, SplitTag split,
                              int n_samples, double rate, std::uint64_t seed);

/// Copy of the dataset keeping every dev/ood instance and only the train
/// instances named in `train_ids`. Every id must name a train instance.
Dataset restrict_to_ids(const Dataset& data, const std::vector<std::string>& train_ids);

/// Text form: `# D=<dim> K=<classes>` then a CSV header and one row per
/// instance. true_label and annot_* columns appear only when present.
std::string write_dataset(const Dataset& d);
Dataset parse_dataset(const std::string& text);
void write_dataset_file(const std::string& path, const Dataset& d);
Dataset parse_dataset_file(const std::string& path);

}  // namespace datamap::trainer
