#include "datamap/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "datamap/error.hpp"
#include "datamap/io_util.hpp"
#include "datamap/metrics.hpp"
#include "datamap/rng.hpp"

namespace datamap::trainer {

const char* split_name(SplitTag s) {
    switch (s) {
        case SplitTag::train: return "train";
        case SplitTag::dev: return "dev";
        case SplitTag::ood: return "ood";
    }
    return "?";
}

SplitTag split_from_name(const std::string& name) {
    if (name == "train") return SplitTag::train;
    if (name == "dev") return SplitTag::dev;
    if (name == "ood") return SplitTag::ood;
    throw ValidationError("unknown split tag: '" + name + "'");
}

std::vector<std::size_t> Dataset::split_indices(SplitTag tag) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < splits.size(); ++i) {
        if (splits[i] == tag) out.push_back(i);
    }
    return out;
}

std::size_t Dataset::index_of(const std::string& id) const {
    for (std::size_t i = 0; i < instance_ids.size(); ++i) {
        if (instance_ids[i] == id) return i;
    }
    return npos;
}

void validate_dataset(const Dataset& d) {
    const std::size_t n = d.instance_ids.size();
    if (n == 0) throw ValidationError("dataset: empty");
    if (d.dim == 0) throw ValidationError("dataset: zero feature dimension");
    if (d.num_classes < 2) throw ValidationError("dataset: num_classes must be >= 2");
    if (d.features.size() != n * d.dim) throw ValidationError("dataset: feature matrix shape mismatch");
    if (d.labels.size() != n) throw ValidationError("dataset: label count mismatch");
    if (!d.true_labels.empty() && d.true_labels.size() != n) {
        throw ValidationError("dataset: true_label count mismatch");
    }
    if (d.annotations.size() != n * d.num_annotators) {
        throw ValidationError("dataset: annotation matrix shape mismatch");
    }
    if (d.splits.size() != n) throw ValidationError("dataset: split tag count mismatch");
    std::set<std::string> seen;
    for (const auto& id : d.instance_ids) {
        if (id.empty()) throw ValidationError("dataset: empty instance id");
        if (!seen.insert(id).second) throw ValidationError("dataset: duplicate id '" + id + "'");
    }
    auto check_label = [&](int v, const char* what) {
        if (v < 0 || v >= d.num_classes) {
            throw ValidationError(std::string("dataset: ") + what + " out of range: " + std::to_string(v));
        }
    };
    for (int v : d.labels) check_label(v, "label");
    for (int v : d.true_labels) check_label(v, "true_label");
    for (int v : d.annotations) check_label(v, "annotation");
    for (double x : d.features) {
        if (!std::isfinite(x)) throw ValidationError("dataset: non-finite feature value");
    }
}

namespace {

double sq_dist_to_centroid(std::span<const double> x, int c) {
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double d = x[j] - (j == static_cast<std::size_t>(c) ? 2.0 : 0.0);
        s += d * d;
    }
    return s;
}

}  // namespace

Dataset gen_synthetic(const SyntheticSpec& spec) {
    if (spec.k_classes < 2 || spec.k_classes > 8) {
        throw ValidationError("gen_synthetic: k_classes must be in [2, 8]");
    }
    if (spec.n_per_class == 0) throw ValidationError("gen_synthetic: n_per_class must be positive");
    if (spec.overlap < 0.0) throw ValidationError("gen_synthetic: overlap must be >= 0");
    if (!(spec.flip_fraction >= 0.0 && spec.flip_fraction < 1.0)) {
        throw ValidationError("gen_synthetic: flip_fraction must be in [0,1)");
    }
    if (spec.ood_shift < 0.0) throw ValidationError("gen_synthetic: ood_shift must be >= 0");

    const int k = spec.k_classes;
    const std::size_t dim = static_cast<std::size_t>(std::max(k, 2));
    const double sigma = spec.overlap * std::sqrt(2.0);
    // ood clusters move along the class-0 -> class-1 centroid direction
    const double shift0 = spec.ood_shift * (-1.0 / std::sqrt(2.0));
    const double shift1 = spec.ood_shift * (+1.0 / std::sqrt(2.0));

    Dataset d;
    d.dim = dim;
    d.num_classes = k;
    d.num_annotators = spec.annotators;

    const std::size_t held = std::max<std::size_t>(1, spec.n_per_class / 2);
    const struct {
        SplitTag tag;
        const char* prefix;
        std::size_t per_class;
    } blocks[] = {
        {SplitTag::train, "tr", spec.n_per_class},
        {SplitTag::dev, "dv", held},
        {SplitTag::ood, "od", held},
    };

    Rng points(derive_seed(spec.seed, "points"));
    char idbuf[32];
    for (const auto& block : blocks) {
        const std::size_t count = block.per_class * static_cast<std::size_t>(k);
        for (std::size_t i = 0; i < count; ++i) {
            const int c = static_cast<int>(i % static_cast<std::size_t>(k));
            std::snprintf(idbuf, sizeof idbuf, "%s%06zu", block.prefix, i);
            d.instance_ids.emplace_back(idbuf);
            d.labels.push_back(c);
            d.splits.push_back(block.tag);
            for (std::size_t j = 0; j < dim; ++j) {
                double x = (j == static_cast<std::size_t>(c) ? 2.0 : 0.0) + sigma * points.normal();
                if (block.tag == SplitTag::ood) x += (j == 0 ? shift0 : j == 1 ? shift1 : 0.0);
                d.features.push_back(x);
            }
        }
    }

    d.true_labels = d.labels;
    const auto train_idx = d.split_indices(SplitTag::train);
    const std::size_t flips = ceil_count(spec.flip_fraction, train_idx.size());
    if (flips > 0) {
        Rng flip_rng(derive_seed(spec.seed, "flip"));
        for (std::size_t pick : flip_rng.sample_indices(train_idx.size(), flips)) {
            const std::size_t i = train_idx[pick];
            int relabeled = static_cast<int>(flip_rng.uniform_int(static_cast<std::uint64_t>(k - 1)));
            if (relabeled >= d.labels[i]) ++relabeled;
            d.labels[i] = relabeled;
        }
    }

    if (spec.annotators > 0) {
        Rng annot_rng(derive_seed(spec.seed, "annot"));
        d.annotations.reserve(d.size() * spec.annotators);
        std::vector<double> post(static_cast<std::size_t>(k));
        for (std::size_t i = 0; i < d.size(); ++i) {
            const auto x = d.row(i);
            if (sigma == 0.0) {
                // degenerate mixture: the posterior is a point mass on the nearest centroid
                int best = 0;
                double best_d = sq_dist_to_centroid(x, 0);
                for (int c = 1; c < k; ++c) {
                    const double dist = sq_dist_to_centroid(x, c);
                    if (dist < best_d) best = c, best_d = dist;
                }
                std::fill(post.begin(), post.end(), 0.0);
                post[static_cast<std::size_t>(best)] = 1.0;
            } else {
                double top = -1e300;
                for (int c = 0; c < k; ++c) {
                    post[static_cast<std::size_t>(c)] = -sq_dist_to_centroid(x, c) / (2.0 * sigma * sigma);
                    top = std::max(top, post[static_cast<std::size_t>(c)]);
                }
                double total = 0.0;
                for (auto& p : post) total += (p = std::exp(p - top));
                for (auto& p : post) p /= total;
            }
            for (std::size_t a = 0; a < spec.annotators; ++a) {
                const double u = annot_rng.uniform();
                double acc = 0.0;
                int drawn = k - 1;
                for (int c = 0; c < k; ++c) {
                    acc += post[static_cast<std::size_t>(c)];
                    if (u < acc) {
                        drawn = c;
                        break;
                    }
                }
                d.annotations.push_back(drawn);
            }
        }
    }

    validate_dataset(d);
    return d;
}

const char* family_name(Family f) { return f == Family::linear ? "linear" : "mlp"; }

Family family_from_name(const std::string& name) {
    if (name == "linear") return Family::linear;
    if (name == "mlp") return Family::mlp;
    throw ValidationError("unknown model family: '" + name + "'");
}

void validate_config(const TrainConfig& config) {
    if (config.epochs < 1) throw ValidationError("train config: epochs must be >= 1");
    if (!(config.learning_rate > 0.0)) throw ValidationError("train config: learning_rate must be > 0");
    if (config.batch_size < 1) throw ValidationError("train config: batch_size must be >= 1");
    if (!(config.dropout_rate >= 0.0 && config.dropout_rate < 1.0)) {
        throw ValidationError("train config: dropout_rate must be in [0,1)");
    }
    if (config.family == Family::mlp) {
        if (config.hidden_width < 1) throw ValidationError("train config: hidden_width must be >= 1");
        if (config.hidden_layers < 1 || config.hidden_layers > 2) {
            throw ValidationError("train config: hidden_layers must be 1 or 2");
        }
    } else if (config.dropout_rate > 0.0) {
        throw ValidationError("train config: dropout masks hidden units; a linear model has none");
    }
}

namespace {

// Flat parameter layout, per layer: weights (out x in, row-major), then biases.
struct Net {
    std::vector<std::size_t> sizes;  // input width, hidden widths, class count
    std::vector<std::size_t> w_off, b_off;
    std::size_t nparams = 0;

    Net(const TrainConfig& cfg, std::size_t input_dim, int num_classes) {
        sizes.push_back(input_dim);
        if (cfg.family == Family::mlp) {
            for (int l = 0; l < cfg.hidden_layers; ++l) sizes.push_back(static_cast<std::size_t>(cfg.hidden_width));
        }
        sizes.push_back(static_cast<std::size_t>(num_classes));
        for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
            w_off.push_back(nparams);
            nparams += sizes[l] * sizes[l + 1];
            b_off.push_back(nparams);
            nparams += sizes[l + 1];
        }
    }

    std::size_t layer_count() const { return sizes.size() - 1; }
    std::size_t hidden_count() const { return layer_count() - 1; }
};

// Per-instance forward state. masks, when non-null, holds one multiplier per
// hidden unit (0, or 1/(1-rate)).
struct Activations {
    std::vector<std::vector<double>> inputs;  // inputs[l] feeds layer l
    std::vector<std::vector<double>> tanhs;   // hidden pre-mask activations
    std::vector<double> logits;
};

void forward(const Net& net, std::span<const double> params, std::span<const double> x,
             const std::vector<std::vector<double>>* masks, Activations& acts) {
    acts.inputs.assign(net.layer_count(), {});
    acts.tanhs.assign(net.hidden_count(), {});
    acts.inputs[0].assign(x.begin(), x.end());
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        const std::size_t in = net.sizes[l];
        const std::size_t out = net.sizes[l + 1];
        const double* w = params.data() + net.w_off[l];
        const double* b = params.data() + net.b_off[l];
        std::vector<double> z(out);
        for (std::size_t o = 0; o < out; ++o) {
            double acc = b[o];
            const double* row = w + o * in;
            for (std::size_t j = 0; j < in; ++j) acc += row[j] * acts.inputs[l][j];
            z[o] = acc;
        }
        if (l + 1 == net.layer_count()) {
            acts.logits = std::move(z);
        } else {
            for (auto& v : z) v = std::tanh(v);
            acts.tanhs[l] = z;
            if (masks) {
                for (std::size_t o = 0; o < out; ++o) z[o] *= (*masks)[l][o];
            }
            acts.inputs[l + 1] = std::move(z);
        }
    }
}

std::vector<double> softmax(std::span<const double> logits) {
    const double top = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) total += (p[i] = std::exp(logits[i] - top));
    for (auto& v : p) v /= total;
    return p;
}

// Accumulates weight * dCE/dparams into grad; returns the unweighted -log p(gold).
double backprop_one(const Net& net, std::span<const double> params, std::span<const double> x, int gold,
                    const std::vector<std::vector<double>>* masks, double weight, std::span<double> grad,
                    Activations& acts) {
    forward(net, params, x, masks, acts);
    const auto probs = softmax(acts.logits);
    const double loss = -std::log(probs[static_cast<std::size_t>(gold)]);

    std::vector<double> delta(probs);
    delta[static_cast<std::size_t>(gold)] -= 1.0;
    for (auto& v : delta) v *= weight;

    for (std::size_t l = net.layer_count(); l-- > 0;) {
        const std::size_t in = net.sizes[l];
        const std::size_t out = net.sizes[l + 1];
        const double* w = params.data() + net.w_off[l];
        double* gw = grad.data() + net.w_off[l];
        double* gb = grad.data() + net.b_off[l];
        for (std::size_t o = 0; o < out; ++o) {
            gb[o] += delta[o];
            double* grow = gw + o * in;
            for (std::size_t j = 0; j < in; ++j) grow[j] += delta[o] * acts.inputs[l][j];
        }
        if (l == 0) break;
        std::vector<double> prev(in, 0.0);
        for (std::size_t o = 0; o < out; ++o) {
            const double* row = w + o * in;
            for (std::size_t j = 0; j < in; ++j) prev[j] += delta[o] * row[j];
        }
        for (std::size_t j = 0; j < in; ++j) {
            const double t = acts.tanhs[l - 1][j];
            double factor = 1.0 - t * t;
            if (masks) factor *= (*masks)[l - 1][j];
            prev[j] *= factor;
        }
        delta = std::move(prev);
    }
    return loss;
}

std::vector<std::vector<double>> draw_masks(const Net& net, Rng& rng, double rate) {
    std::vector<std::vector<double>> masks(net.hidden_count());
    const double scale = 1.0 / (1.0 - rate);
    for (std::size_t l = 0; l < masks.size(); ++l) {
        masks[l].resize(net.sizes[l + 1]);
        for (auto& m : masks[l]) m = rng.uniform() < rate ? 0.0 : scale;
    }
    return masks;
}

void check_dims(const ModelSnapshot& model, const Dataset& data) {
    if (model.input_dim != data.dim) {
        throw ValidationError("model expects dimension " + std::to_string(model.input_dim) + ", dataset has " +
                              std::to_string(data.dim));
    }
    if (model.num_classes != data.num_classes) {
        throw ValidationError("model expects " + std::to_string(model.num_classes) + " classes, dataset has " +
                              std::to_string(data.num_classes));
    }
}

}  // namespace

std::size_t param_count(const TrainConfig& config, std::size_t input_dim, int num_classes) {
    return Net(config, input_dim, num_classes).nparams;
}

ModelSnapshot init_model(const Dataset& data, const TrainConfig& config) {
    validate_config(config);
    Net net(config, data.dim, data.num_classes);
    ModelSnapshot model;
    model.config = config;
    model.input_dim = data.dim;
    model.num_classes = data.num_classes;
    model.params.assign(net.nparams, 0.0);
    Rng rng(derive_seed(config.seed, "init"));
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(net.sizes[l]));
        double* w = model.params.data() + net.w_off[l];
        const std::size_t count = net.sizes[l] * net.sizes[l + 1];
        for (std::size_t i = 0; i < count; ++i) w[i] = (2.0 * rng.uniform() - 1.0) * bound;
    }
    return model;
}

std::vector<double> predict_probs(const ModelSnapshot& model, std::span<const double> x) {
    if (x.size() != model.input_dim) throw ValidationError("predict_probs: feature dimension mismatch");
    Net net(model.config, model.input_dim, model.num_classes);
    if (model.params.size() != net.nparams) throw ValidationError("predict_probs: parameter vector size mismatch");
    Activations acts;
    forward(net, model.params, x, nullptr, acts);
    return softmax(acts.logits);
}

double loss_and_grad(const ModelSnapshot& model, const Dataset& data, std::span<const std::size_t> indices,
                     std::vector<double>& grad) {
    check_dims(model, data);
    if (indices.empty()) throw ValidationError("loss_and_grad: empty instance set");
    Net net(model.config, model.input_dim, model.num_classes);
    if (model.params.size() != net.nparams) throw ValidationError("loss_and_grad: parameter vector size mismatch");
    grad.assign(net.nparams, 0.0);
    Activations acts;
    const double w = 1.0 / static_cast<double>(indices.size());
    double loss = 0.0;
    for (std::size_t i : indices) {
        loss += w * backprop_one(net, model.params, data.row(i), data.labels[i], nullptr, w, grad, acts);
    }
    return loss;
}

TrainResult train(const Dataset& data, const TrainConfig& config) {
    validate_dataset(data);
    validate_config(config);
    const auto train_idx = data.split_indices(SplitTag::train);
    if (train_idx.empty()) throw ValidationError("train: dataset has no train instances");

    ModelSnapshot model = init_model(data, config);
    Net net(config, data.dim, data.num_classes);

    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    std::vector<double> m(net.nparams, 0.0), v(net.nparams, 0.0), grad(net.nparams, 0.0);
    long step = 0;

    Rng shuffle_rng(derive_seed(config.seed, "shuffle"));
    Rng dropout_rng(derive_seed(config.seed, "dropout"));
    const bool use_dropout = config.dropout_rate > 0.0;

    std::vector<std::size_t> order = train_idx;
    std::vector<dynlog::EpochRecord> records;
    records.reserve(train_idx.size() * static_cast<std::size_t>(config.epochs));
    std::vector<double> epoch_mean_loss;
    Activations acts;

    for (int e = 0; e < config.epochs; ++e) {
        shuffle_rng.shuffle(order);
        double loss_sum = 0.0;
        int batch = 0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size), ++batch) {
            const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
            grad.assign(net.nparams, 0.0);
            const double w = 1.0 / static_cast<double>(stop - start);
            double batch_loss = 0.0;
            for (std::size_t bi = start; bi < stop; ++bi) {
                const std::size_t i = order[bi];
                if (use_dropout) {
                    const auto masks = draw_masks(net, dropout_rng, config.dropout_rate);
                    batch_loss += w * backprop_one(net, model.params, data.row(i), data.labels[i], &masks, w, grad, acts);
                } else {
                    batch_loss += w * backprop_one(net, model.params, data.row(i), data.labels[i], nullptr, w, grad, acts);
                }
            }
            if (!std::isfinite(batch_loss)) {
                throw NumericError("train: non-finite loss at epoch " + std::to_string(e) + ", batch " +
                                   std::to_string(batch));
            }
            loss_sum += batch_loss * static_cast<double>(stop - start);
            ++step;
            const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
            const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
            for (std::size_t p = 0; p < net.nparams; ++p) {
                m[p] = beta1 * m[p] + (1.0 - beta1) * grad[p];
                v[p] = beta2 * v[p] + (1.0 - beta2) * grad[p] * grad[p];
                model.params[p] -= config.learning_rate * (m[p] / c1) / (std::sqrt(v[p] / c2) + eps);
            }
        }
        epoch_mean_loss.push_back(loss_sum / static_cast<double>(order.size()));

        for (std::size_t i : train_idx) {
            forward(net, model.params, data.row(i), nullptr, acts);
            records.push_back({e, data.instance_ids[i], data.labels[i], softmax(acts.logits)});
        }
    }

    TrainResult result;
    result.log = dynlog::TrainingRunLog::from_records(std::move(records));
    result.model = std::move(model);
    result.epoch_mean_loss = std::move(epoch_mean_loss);
    return result;
}

double evaluate(const ModelSnapshot& model, const Dataset& data, SplitTag split) {
    check_dims(model, data);
    const auto idx = data.split_indices(split);
    if (idx.empty()) {
        throw ValidationError(std::string("evaluate: dataset has no ") + split_name(split) + " instances");
    }
    Net net(model.config, model.input_dim, model.num_classes);
    if (model.params.size() != net.nparams) throw ValidationError("evaluate: parameter vector size mismatch");
    Activations acts;
    std::size_t hits = 0;
    for (std::size_t i : idx) {
        forward(net, model.params, data.row(i), nullptr, acts);
        const auto probs = softmax(acts.logits);
        if (metrics::argmax_lowest(probs) == data.labels[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(idx.size());
}

DropoutSamples dropout_sample(const ModelSnapshot& model, const Dataset& data, SplitTag split, int n_samples,
                              double rate, std::uint64_t seed) {
    check_dims(model, data);
    if (n_samples < 1) throw ValidationError("dropout_sample: n_samples must be >= 1");
    if (!(rate >= 0.0 && rate < 1.0)) throw ValidationError("dropout_sample: rate must be in [0,1)");
    if (model.config.family == Family::linear && rate > 0.0) {
        throw ValidationError("dropout_sample: dropout masks hidden units; a linear model has none");
    }
    auto idx = data.split_indices(split);
    if (idx.empty()) {
        throw ValidationError(std::string("dropout_sample: dataset has no ") + split_name(split) + " instances");
    }
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return data.instance_ids[a] < data.instance_ids[b]; });

    Net net(model.config, model.input_dim, model.num_classes);
    if (model.params.size() != net.nparams) throw ValidationError("dropout_sample: parameter vector size mismatch");

    Rng rng(seed);
    Activations acts;
    DropoutSamples out;
    out.instance_ids.reserve(idx.size());
    out.p_gold.reserve(idx.size());
    for (std::size_t i : idx) {
        out.instance_ids.push_back(data.instance_ids[i]);
        std::vector<double> samples(static_cast<std::size_t>(n_samples));
        for (auto& s : samples) {
            if (rate > 0.0) {
                const auto masks = draw_masks(net, rng, rate);
                forward(net, model.params, data.row(i), &masks, acts);
            } else {
                forward(net, model.params, data.row(i), nullptr, acts);
            }
            s = softmax(acts.logits)[static_cast<std::size_t>(data.labels[i])];
        }
        out.p_gold.push_back(std::move(samples));
    }
    return out;
}

Dataset restrict_to_ids(const Dataset& data, const std::vector<std::string>& train_ids) {
    std::set<std::string> wanted(train_ids.begin(), train_ids.end());
    std::vector<bool> keep(data.size(), false);
    std::size_t found = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (data.splits[i] != SplitTag::train) {
            keep[i] = true;
        } else if (wanted.contains(data.instance_ids[i])) {
            keep[i] = true;
            ++found;
        }
    }
    if (found != wanted.size()) {
        for (const auto& id : wanted) {
            const std::size_t i = data.index_of(id);
            if (i == Dataset::npos || data.splits[i] != SplitTag::train) {
                throw ValidationError("restrict_to_ids: '" + id + "' is not a train instance of this dataset");
            }
        }
    }

    Dataset out;
    out.dim = data.dim;
    out.num_classes = data.num_classes;
    out.num_annotators = data.num_annotators;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (!keep[i]) continue;
        out.instance_ids.push_back(data.instance_ids[i]);
        out.labels.push_back(data.labels[i]);
        out.splits.push_back(data.splits[i]);
        if (!data.true_labels.empty()) out.true_labels.push_back(data.true_labels[i]);
        for (std::size_t j = 0; j < data.dim; ++j) out.features.push_back(data.features[i * data.dim + j]);
        for (std::size_t a = 0; a < data.num_annotators; ++a) {
            out.annotations.push_back(data.annotations[i * data.num_annotators + a]);
        }
    }
    return out;
}

std::string write_dataset(const Dataset& d) {
    validate_dataset(d);
    std::string out = "# D=" + std::to_string(d.dim) + " K=" + std::to_string(d.num_classes) + "\n";
    out += "id,label";
    if (!d.true_labels.empty()) out += ",true_label";
    out += ",split";
    for (std::size_t a = 0; a < d.num_annotators; ++a) out += ",annot_" + std::to_string(a);
    for (std::size_t j = 0; j < d.dim; ++j) out += ",x_" + std::to_string(j);
    out += '\n';
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto& id = d.instance_ids[i];
        if (id.find_first_of(",\n\r") != std::string::npos || id.front() == '#') {
            throw ValidationError("dataset id not representable in the text format: '" + id + "'");
        }
        out += id;
        out += ',';
        out += std::to_string(d.labels[i]);
        if (!d.true_labels.empty()) {
            out += ',';
            out += std::to_string(d.true_labels[i]);
        }
        out += ',';
        out += split_name(d.splits[i]);
        for (std::size_t a = 0; a < d.num_annotators; ++a) {
            out += ',';
            out += std::to_string(d.annotations[i * d.num_annotators + a]);
        }
        for (std::size_t j = 0; j < d.dim; ++j) {
            out += ',';
            out += format_double(d.features[i * d.dim + j]);
        }
        out += '\n';
    }
    return out;
}

Dataset parse_dataset(const std::string& text) {
    std::istringstream ss(text);
    std::string line;
    if (!std::getline(ss, line) || line.rfind("# ", 0) != 0) {
        throw ParseError("dataset: missing '# D=... K=...' header");
    }
    std::size_t dim = 0;
    int num_classes = 0;
    for (const auto& token : split(line.substr(2), ' ')) {
        const auto eq = token.find('=');
        if (eq == std::string::npos) continue;
        const auto key = token.substr(0, eq);
        const auto value = token.substr(eq + 1);
        if (key == "D") dim = static_cast<std::size_t>(parse_long(value));
        if (key == "K") num_classes = static_cast<int>(parse_long(value));
    }
    if (dim == 0 || num_classes == 0) throw ParseError("dataset: header must declare D and K");

    if (!std::getline(ss, line)) throw ParseError("dataset: missing column header");
    const auto cols = split(line, ',');
    std::size_t at = 0;
    auto expect = [&](const std::string& name) {
        if (at >= cols.size() || cols[at] != name) {
            throw ParseError("dataset: expected column '" + name + "' at position " + std::to_string(at));
        }
        ++at;
    };
    expect("id");
    expect("label");
    const bool has_true = at < cols.size() && cols[at] == "true_label";
    if (has_true) ++at;
    expect("split");
    std::size_t annotators = 0;
    while (at < cols.size() && cols[at] == "annot_" + std::to_string(annotators)) ++annotators, ++at;
    for (std::size_t j = 0; j < dim; ++j) expect("x_" + std::to_string(j));
    if (at != cols.size()) throw ParseError("dataset: unexpected trailing column '" + cols[at] + "'");

    Dataset d;
    d.dim = dim;
    d.num_classes = num_classes;
    d.num_annotators = annotators;
    std::size_t line_no = 2;
    while (std::getline(ss, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split(line, ',');
        if (fields.size() != cols.size()) {
            throw ParseError("dataset line " + std::to_string(line_no) + ": expected " + std::to_string(cols.size()) +
                             " fields, got " + std::to_string(fields.size()));
        }
        std::size_t f = 0;
        d.instance_ids.push_back(fields[f++]);
        d.labels.push_back(static_cast<int>(parse_long(fields[f++])));
        if (has_true) d.true_labels.push_back(static_cast<int>(parse_long(fields[f++])));
        d.splits.push_back(split_from_name(fields[f++]));
        for (std::size_t a = 0; a < annotators; ++a) d.annotations.push_back(static_cast<int>(parse_long(fields[f++])));
        for (std::size_t j = 0; j < dim; ++j) d.features.push_back(parse_double(fields[f++]));
    }
    validate_dataset(d);
    return d;
}

void write_dataset_file(const std::string& path, const Dataset& d) { write_file(path, write_dataset(d)); }

Dataset parse_dataset_file(const std::string& path) { return parse_dataset(read_file(path)); }

}  // namespace datamap::trainer
