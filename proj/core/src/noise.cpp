#include "datamap/noise.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "datamap/error.hpp"
#include "datamap/io_util.hpp"
#include "datamap/rng.hpp"

namespace datamap::noise {

std::vector<std::string> FlipPlan::flipped_ids() const {
    std::vector<std::string> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.instance_id);
    return out;
}

const char* feature_name(Feature f) { return f == Feature::confidence ? "confidence" : "variability"; }

namespace {

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

std::vector<double> feature_column(const metrics::CartographyTable& table, Feature f) {
    return f == Feature::confidence ? table.confidence_column() : table.variability_column();
}

}  // namespace

std::pair<trainer::Dataset, FlipPlan> flip_labels(const trainer::Dataset& data,
                                                  const metrics::CartographyTable& table, double fraction,
                                                  std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0)) throw ValidationError("flip_labels: fraction must be in (0,1)");

    // the table must describe exactly the train split
    std::set<std::string> train_ids;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (data.splits[i] == trainer::SplitTag::train) train_ids.insert(data.instance_ids[i]);
    }
    if (train_ids.size() != table.size()) {
        throw ValidationError("flip_labels: table covers " + std::to_string(table.size()) + " instances, train split has " +
                              std::to_string(train_ids.size()));
    }
    for (const auto& row : table.rows) {
        if (!train_ids.contains(row.instance_id)) {
            throw ValidationError("flip_labels: table id '" + row.instance_id + "' is not a train instance");
        }
    }

    const std::size_t n = table.size();
    const std::size_t flips = ceil_count(fraction, n);
    if (flips == 0) throw ValidationError("flip_labels: fraction yields zero flips");
    const std::size_t pool_size = std::min(n, 4 * flips);
    if (pool_size < flips) throw ValidationError("flip_labels: candidate pool smaller than the flip count");

    std::vector<std::size_t> by_conf(n);
    for (std::size_t i = 0; i < n; ++i) by_conf[i] = i;
    std::sort(by_conf.begin(), by_conf.end(), [&](std::size_t a, std::size_t b) {
        if (table.rows[a].confidence != table.rows[b].confidence) {
            return table.rows[a].confidence > table.rows[b].confidence;
        }
        return table.rows[a].instance_id < table.rows[b].instance_id;
    });

    trainer::Dataset flipped = data;
    if (flipped.true_labels.empty()) flipped.true_labels = flipped.labels;

    FlipPlan plan;
    plan.fraction = fraction;
    plan.seed = seed;
    plan.source = {regions::Strategy::high_confidence, fraction, seed};

    Rng rng(seed);
    const int k = data.num_classes;
    for (std::size_t pick : rng.sample_indices(pool_size, flips)) {
        const std::string& id = table.rows[by_conf[pick]].instance_id;
        const std::size_t i = flipped.index_of(id);
        int relabeled = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(k - 1)));
        if (relabeled >= flipped.labels[i]) ++relabeled;
        plan.entries.push_back({id, flipped.labels[i], relabeled});
        flipped.labels[i] = relabeled;
    }
    std::sort(plan.entries.begin(), plan.entries.end(),
              [](const FlipEntry& a, const FlipEntry& b) { return a.instance_id < b.instance_id; });
    return {std::move(flipped), std::move(plan)};
}

double NoiseClassifier::probability(double value) const { return sigmoid(weight * value + bias); }

double NoiseClassifier::threshold() const {
    if (weight == 0.0) throw NumericError("noise classifier: threshold undefined with zero weight");
    return -bias / weight;
}

NoiseClassifier fit_noise_classifier(const metrics::CartographyTable& table,
                                     const std::vector<std::string>& flip_mask, std::uint64_t seed, Feature feature) {
    const std::set<std::string> flips(flip_mask.begin(), flip_mask.end());
    if (flips.empty()) throw ValidationError("fit_noise_classifier: empty flip mask");
    if (flips.size() >= table.size()) {
        throw ValidationError("fit_noise_classifier: flip mask must be a proper subset of the table");
    }
    for (const auto& id : flips) {
        if (table.index_of(id) == metrics::CartographyTable::npos) {
            throw ValidationError("fit_noise_classifier: flip id '" + id + "' not in table");
        }
    }
    const std::size_t clean_total = table.size() - flips.size();
    if (clean_total < flips.size()) {
        throw ValidationError("fit_noise_classifier: not enough clean instances for a balanced set");
    }

    const auto values = feature_column(table, feature);
    std::vector<double> x;
    std::vector<int> y;
    std::vector<std::size_t> clean_rows;
    for (std::size_t i = 0; i < table.size(); ++i) {
        if (flips.contains(table.rows[i].instance_id)) {
            x.push_back(values[i]);
            y.push_back(1);
        } else {
            clean_rows.push_back(i);
        }
    }
    double mean_flipped = 0.0;
    for (double v : x) mean_flipped += v;
    mean_flipped /= static_cast<double>(x.size());

    Rng rng(seed);
    double mean_clean = 0.0;
    for (std::size_t pick : rng.sample_indices(clean_rows.size(), flips.size())) {
        x.push_back(values[clean_rows[pick]]);
        y.push_back(0);
        mean_clean += values[clean_rows[pick]];
    }
    mean_clean /= static_cast<double>(flips.size());

    NoiseClassifier out;
    out.feature = feature;
    out.summary.rows = x.size();
    out.summary.mean_flipped = mean_flipped;
    out.summary.mean_clean = mean_clean;

    const bool constant = std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); });
    if (constant) {
        out.degenerate = true;
        out.weight = -1.0;
        out.bias = x.front();  // threshold at the lone value; ties fall on the clean side
        return out;
    }

    const std::size_t n = x.size();
    double w = 0.0, b = 0.0;
    const double lr = 2.0;
    long it = 0;
    double gnorm = 0.0;
    for (; it < 100000; ++it) {
        double gw = 0.0, gb = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = sigmoid(w * x[i] + b) - static_cast<double>(y[i]);
            gw += r * x[i];
            gb += r;
        }
        gw /= static_cast<double>(n);
        gb /= static_cast<double>(n);
        gnorm = std::sqrt(gw * gw + gb * gb);
        if (gnorm < 1e-8) break;
        w -= lr * gw;
        b -= lr * gb;
        if (w > 0.0) w = 0.0;  // keep the rule monotone: lower value, more likely noisy
    }
    out.weight = w;
    out.bias = b;
    out.summary.iterations = it;
    out.summary.grad_norm = gnorm;
    if (!std::isfinite(w) || !std::isfinite(b)) throw NumericError("fit_noise_classifier: non-finite parameters");
    return out;
}

std::vector<std::string> predict_noise(const NoiseClassifier& classifier, const metrics::CartographyTable& table) {
    const auto values = feature_column(table, classifier.feature);
    std::vector<std::string> out;
    for (std::size_t i = 0; i < table.size(); ++i) {
        if (classifier.probability(values[i]) > 0.5) out.push_back(table.rows[i].instance_id);
    }
    return out;
}

NoiseReport noise_report(const std::vector<std::string>& predicted, const std::vector<std::string>& flip_mask) {
    const std::set<std::string> pred(predicted.begin(), predicted.end());
    const std::set<std::string> truth(flip_mask.begin(), flip_mask.end());
    NoiseReport r;
    for (const auto& id : pred) {
        if (truth.contains(id)) {
            ++r.true_positives;
        } else {
            ++r.false_positives;
        }
    }
    for (const auto& id : truth) {
        if (!pred.contains(id)) ++r.false_negatives;
    }
    const std::size_t pdenom = r.true_positives + r.false_positives;
    const std::size_t rdenom = r.true_positives + r.false_negatives;
    r.precision = pdenom == 0 ? 0.0 : static_cast<double>(r.true_positives) / static_cast<double>(pdenom);
    r.recall = rdenom == 0 ? 0.0 : static_cast<double>(r.true_positives) / static_cast<double>(rdenom);
    r.f1 = (r.precision + r.recall) == 0.0 ? 0.0 : 2.0 * r.precision * r.recall / (r.precision + r.recall);
    return r;
}

std::string write_flip_plan(const FlipPlan& plan) {
    std::string out = "# fraction=" + format_double(plan.fraction) + " seed=" + std::to_string(plan.seed) + "\n";
    for (const auto& e : plan.entries) {
        if (e.instance_id.find_first_of(",\n\r") != std::string::npos || e.instance_id.front() == '#') {
            throw ValidationError("flip plan id not representable in the text format: '" + e.instance_id + "'");
        }
        out += e.instance_id;
        out += ',';
        out += std::to_string(e.original);
        out += ',';
        out += std::to_string(e.flipped);
        out += '\n';
    }
    return out;
}

void write_flip_plan_file(const std::string& path, const FlipPlan& plan) { write_file(path, write_flip_plan(plan)); }

FlipPlan parse_flip_plan(const std::string& text) {
    std::istringstream ss(text);
    std::string line;
    if (!std::getline(ss, line) || line.rfind("# ", 0) != 0) {
        throw ParseError("flip plan: missing '# fraction=... seed=...' header");
    }
    FlipPlan plan;
    for (const auto& token : split(line.substr(2), ' ')) {
        const auto eq = token.find('=');
        if (eq == std::string::npos) continue;
        const auto key = token.substr(0, eq);
        const auto value = token.substr(eq + 1);
        if (key == "fraction") plan.fraction = parse_double(value);
        if (key == "seed") plan.seed = static_cast<std::uint64_t>(parse_long(value));
    }
    plan.source = {regions::Strategy::high_confidence, plan.fraction, plan.seed};
    std::size_t line_no = 1;
    while (std::getline(ss, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split(line, ',');
        if (fields.size() != 3) {
            throw ParseError("flip plan line " + std::to_string(line_no) + ": expected id,original,new");
        }
        FlipEntry e;
        e.instance_id = fields[0];
        e.original = static_cast<int>(parse_long(fields[1]));
        e.flipped = static_cast<int>(parse_long(fields[2]));
        if (e.flipped == e.original) {
            throw ParseError("flip plan line " + std::to_string(line_no) + ": new label equals original");
        }
        plan.entries.push_back(std::move(e));
    }
    return plan;
}

FlipPlan parse_flip_plan_file(const std::string& path) { return parse_flip_plan(read_file(path)); }

std::string audit_sheet(const NoiseClassifier& classifier, const metrics::CartographyTable& table,
                        std::size_t per_class, std::uint64_t seed) {
    const auto values = feature_column(table, classifier.feature);
    std::vector<std::size_t> noisy, clean;
    for (std::size_t i = 0; i < table.size(); ++i) {
        (classifier.probability(values[i]) > 0.5 ? noisy : clean).push_back(i);
    }
    Rng rng(seed);
    auto draw = [&](const std::vector<std::size_t>& pool) {
        std::vector<std::size_t> rows;
        for (std::size_t pick : rng.sample_indices(pool.size(), std::min(per_class, pool.size()))) {
            rows.push_back(pool[pick]);
        }
        std::sort(rows.begin(), rows.end());
        return rows;
    };
    std::string out = "id,predicted_class,confidence\n";
    auto emit = [&](const std::vector<std::size_t>& rows, const char* cls) {
        for (std::size_t i : rows) {
            out += table.rows[i].instance_id;
            out += ',';
            out += cls;
            out += ',';
            out += format_sig(table.rows[i].confidence, 9);
            out += '\n';
        }
    };
    emit(draw(noisy), "noisy");
    emit(draw(clean), "clean");
    return out;
}

}  // namespace datamap::noise
