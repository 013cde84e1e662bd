#include "datamap/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "datamap/error.hpp"
#include "datamap/io_util.hpp"
#include "datamap/rng.hpp"

namespace datamap::analysis {

CorrelationResult pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ValidationError("pearson: length mismatch");
    if (x.size() < 2) throw ValidationError("pearson: need at least 2 points");
    const auto constant = [](std::span<const double> v) {
        return std::all_of(v.begin(), v.end(), [&](double e) { return e == v.front(); });
    };
    if (constant(x)) throw ConstantInputError("pearson: first input is constant");
    if (constant(y)) throw ConstantInputError("pearson: second input is constant");

    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double num = 0.0, dx = 0.0, dy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double a = x[i] - mx;
        const double b = y[i] - my;
        num += a * b;
        dx += a * a;
        dy += b * b;
    }
    if (dx == 0.0 || dy == 0.0) throw ConstantInputError("pearson: zero variance after centering");
    double r = num / std::sqrt(dx * dy);
    r = std::clamp(r, -1.0, 1.0);
    return {r, x.size()};
}

std::string report_lines(const std::string& prefix, const MetricCorrelation& mc) {
    std::string out;
    auto emit = [&](const char* metric, const std::optional<CorrelationResult>& cr, const std::string& err) {
        const std::string key = prefix + "." + metric;
        if (cr) {
            out += key + ".r=" + format_double(cr->pearson_r) + "\n";
            out += key + ".n=" + std::to_string(cr->n) + "\n";
        } else {
            out += key + ".error=" + err + "\n";
        }
    };
    emit("confidence", mc.confidence, mc.confidence_error);
    emit("variability", mc.variability, mc.variability_error);
    return out;
}

namespace {

MetricCorrelation correlate_columns(const std::vector<double>& conf_x, const std::vector<double>& conf_y,
                                    const std::vector<double>& var_x, const std::vector<double>& var_y) {
    MetricCorrelation mc;
    try {
        mc.confidence = pearson(conf_x, conf_y);
    } catch (const ConstantInputError& e) {
        mc.confidence_error = e.what();
    }
    try {
        mc.variability = pearson(var_x, var_y);
    } catch (const ConstantInputError& e) {
        mc.variability_error = e.what();
    }
    return mc;
}

}  // namespace

MetricCorrelation burnout_correlation(const dynlog::TrainingRunLog& log, int e_early) {
    const auto early = metrics::compute_table(dynlog::restrict_epochs(log, e_early));
    const auto full = metrics::compute_table(log);
    return correlate_columns(early.confidence_column(), full.confidence_column(), early.variability_column(),
                             full.variability_column());
}

MetricCorrelation seed_stability(const std::vector<metrics::CartographyTable>& tables) {
    if (tables.size() < 2) throw ValidationError("seed_stability: need at least 2 tables");
    for (std::size_t t = 1; t < tables.size(); ++t) {
        if (tables[t].size() != tables[0].size()) throw ValidationError("seed_stability: table sizes differ");
        for (std::size_t i = 0; i < tables[0].size(); ++i) {
            if (tables[t].rows[i].instance_id != tables[0].rows[i].instance_id) {
                throw ValidationError("seed_stability: tables cover different ids ('" + tables[t].rows[i].instance_id +
                                      "' vs '" + tables[0].rows[i].instance_id + "')");
            }
        }
    }

    MetricCorrelation mean;
    double conf_sum = 0.0, var_sum = 0.0;
    std::size_t pairs = 0;
    bool conf_ok = true, var_ok = true;
    for (std::size_t a = 0; a < tables.size() && (conf_ok || var_ok); ++a) {
        for (std::size_t b = a + 1; b < tables.size(); ++b) {
            const auto mc = correlate_columns(tables[a].confidence_column(), tables[b].confidence_column(),
                                              tables[a].variability_column(), tables[b].variability_column());
            if (conf_ok) {
                if (mc.confidence) {
                    conf_sum += mc.confidence->pearson_r;
                } else {
                    conf_ok = false;
                    mean.confidence_error = "pair (" + std::to_string(a) + "," + std::to_string(b) + "): " +
                                            mc.confidence_error;
                }
            }
            if (var_ok) {
                if (mc.variability) {
                    var_sum += mc.variability->pearson_r;
                } else {
                    var_ok = false;
                    mean.variability_error = "pair (" + std::to_string(a) + "," + std::to_string(b) + "): " +
                                             mc.variability_error;
                }
            }
            ++pairs;
        }
    }
    const std::size_t n = tables[0].size();
    if (conf_ok) mean.confidence = CorrelationResult{conf_sum / static_cast<double>(pairs), n};
    if (var_ok) mean.variability = CorrelationResult{var_sum / static_cast<double>(pairs), n};
    return mean;
}

AgreementScores agreement(const std::vector<std::string>& ids, const std::vector<std::vector<int>>& annotations,
                          std::uint64_t seed) {
    if (ids.size() != annotations.size()) throw ValidationError("agreement: id/annotation count mismatch");
    if (ids.empty()) throw ValidationError("agreement: no instances");
    const std::size_t a_count = annotations.front().size();
    if (a_count < 2) throw ValidationError("agreement: need at least 2 annotators");
    {
        std::vector<std::string> sorted_ids(ids);
        std::sort(sorted_ids.begin(), sorted_ids.end());
        if (std::adjacent_find(sorted_ids.begin(), sorted_ids.end()) != sorted_ids.end()) {
            throw ValidationError("agreement: duplicate instance ids");
        }
    }

    AgreementScores out;
    out.instance_ids = ids;
    out.scores.reserve(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (annotations[i].size() != a_count) {
            throw ValidationError("agreement: instance '" + ids[i] + "' has " + std::to_string(annotations[i].size()) +
                                  " annotations, expected " + std::to_string(a_count));
        }
        std::vector<int> sorted(annotations[i]);
        std::sort(sorted.begin(), sorted.end());

        std::size_t agreeing = 0;
        for (std::size_t slot = 0; slot < a_count; ++slot) {
            std::map<int, std::size_t> votes;
            for (std::size_t o = 0; o < a_count; ++o) {
                if (o != slot) ++votes[sorted[o]];
            }
            std::size_t top = 0;
            for (const auto& [label, count] : votes) top = std::max(top, count);
            std::vector<int> tied;
            for (const auto& [label, count] : votes) {
                if (count == top) tied.push_back(label);
            }
            int majority = tied.front();
            if (tied.size() > 1) {
                Rng tie_rng(derive_seed(seed, ids[i] + "#" + std::to_string(slot)));
                majority = tied[tie_rng.uniform_int(tied.size())];
            }
            if (sorted[slot] == majority) ++agreeing;
        }
        out.scores.push_back(static_cast<double>(agreeing) / static_cast<double>(a_count));
    }
    return out;
}

AgreementScores agreement(const trainer::Dataset& data, std::uint64_t seed) {
    if (data.num_annotators < 2) throw ValidationError("agreement: dataset has fewer than 2 annotator columns");
    std::vector<std::vector<int>> annotations(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        annotations[i].assign(data.annotations.begin() + static_cast<std::ptrdiff_t>(i * data.num_annotators),
                              data.annotations.begin() + static_cast<std::ptrdiff_t>((i + 1) * data.num_annotators));
    }
    return agreement(data.instance_ids, annotations, seed);
}

HeatmapGrid heatmap_bins(const metrics::CartographyTable& table, std::span<const double> scalar,
                         std::size_t conf_bins, std::size_t var_bins) {
    if (scalar.size() != table.size()) {
        throw ValidationError("heatmap_bins: scalar values missing (" + std::to_string(scalar.size()) + " for " +
                              std::to_string(table.size()) + " instances)");
    }
    if (conf_bins < 1 || var_bins < 1) throw ValidationError("heatmap_bins: bin counts must be >= 1");

    HeatmapGrid grid;
    grid.conf_edges.resize(conf_bins + 1);
    for (std::size_t i = 0; i <= conf_bins; ++i) {
        grid.conf_edges[i] = static_cast<double>(i) / static_cast<double>(conf_bins);
    }
    grid.var_edges.resize(var_bins + 1);
    for (std::size_t i = 0; i <= var_bins; ++i) {
        grid.var_edges[i] = 0.5 * static_cast<double>(i) / static_cast<double>(var_bins);
    }
    grid.counts.assign(conf_bins * var_bins, 0);
    grid.means.assign(conf_bins * var_bins, 0.0);

    auto bin_of = [](double v, double range, std::size_t bins) {
        const double clamped = std::clamp(v, 0.0, range);
        const auto idx = static_cast<std::size_t>(clamped / range * static_cast<double>(bins));
        return std::min(idx, bins - 1);
    };
    for (std::size_t i = 0; i < table.size(); ++i) {
        const std::size_t ci = bin_of(table.rows[i].confidence, 1.0, conf_bins);
        const std::size_t vi = bin_of(table.rows[i].variability, 0.5, var_bins);
        const std::size_t cell = ci * var_bins + vi;
        ++grid.counts[cell];
        grid.means[cell] += scalar[i];
    }
    for (std::size_t cell = 0; cell < grid.counts.size(); ++cell) {
        if (grid.counts[cell] > 0) grid.means[cell] /= static_cast<double>(grid.counts[cell]);
    }
    return grid;
}

MetricCorrelation dropout_vs_dynamics(const metrics::CartographyTable& td_table,
                                      const trainer::DropoutSamples& samples) {
    if (samples.instance_ids.size() != td_table.size()) {
        throw ValidationError("dropout_vs_dynamics: instance count mismatch");
    }
    for (std::size_t i = 0; i < td_table.size(); ++i) {
        if (samples.instance_ids[i] != td_table.rows[i].instance_id) {
            throw ValidationError("dropout_vs_dynamics: id mismatch at row " + std::to_string(i) + " ('" +
                                  samples.instance_ids[i] + "' vs '" + td_table.rows[i].instance_id + "')");
        }
    }
    std::vector<double> do_conf(td_table.size()), do_var(td_table.size());
    for (std::size_t i = 0; i < td_table.size(); ++i) {
        if (samples.p_gold[i].size() < 2) {
            throw ValidationError("dropout_vs_dynamics: instance '" + samples.instance_ids[i] +
                                  "' has fewer than 2 samples");
        }
        do_conf[i] = metrics::confidence(samples.p_gold[i]);
        do_var[i] = metrics::variability(samples.p_gold[i]);
    }
    return correlate_columns(td_table.confidence_column(), do_conf, td_table.variability_column(), do_var);
}

}  // namespace datamap::analysis
