#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "datamap/dynlog.hpp"
#include "datamap/metrics.hpp"
#include "datamap/trainer.hpp"

namespace datamap::analysis {

struct CorrelationResult {
    double pearson_r = 0.0;  // in [-1, 1]
    std::size_t n = 0;       // >= 2

    bool operator==(const CorrelationResult&) const = default;
};

/// Product-moment correlation. Identical sequences give exactly 1.0 and a
/// sequence against its negation exactly -1.0. A constant input has no
/// defined correlation and raises ConstantInputError (never a silent 0).
CorrelationResult pearson(std::span<const double> x, std::span<const double> y);

/// One correlation per training-dynamics metric. A metric whose correlation
/// is undefined (constant column) carries the error text instead of a value,
/// leaving the other metric usable.
struct MetricCorrelation {
    std::optional<CorrelationResult> confidence;
    std::optional<CorrelationResult> variability;
    std::string confidence_error;
    std::string variability_error;
};

/// Key/value lines (`<prefix>.<metric>.r=`, `.n=`, or `.error=`) for report
/// files.
std::string report_lines(const std::string& prefix, const MetricCorrelation& mc);

/// Correlates per-instance metrics computed from the first e_early epochs
/// against the full-run values.
MetricCorrelation burnout_correlation(const dynlog::TrainingRunLog& log, int e_early);

/// Mean pairwise correlation across runs differing only in seed. All tables
/// must cover the same ids.
MetricCorrelation seed_stability(const std::vector<metrics::CartographyTable>& tables);

struct AgreementScores {
    std::vector<std::string> instance_ids;  // caller order
    std::vector<double> scores;             // in [0, 1]
};

/// Per-instance fraction of annotators matching their leave-one-out majority.
/// Each instance's annotations are sorted before scoring and majority ties
/// are broken by an RNG keyed on (seed, instance id, slot), so the result
/// does not depend on annotator order.
AgreementScores agreement(const std::vector<std::string>& ids, const std::vector<std::vector<int>>& annotations,
                          std::uint64_t seed);
AgreementScores agreement(const trainer::Dataset& data, std::uint64_t seed);

struct HeatmapGrid {
    std::vector<double> conf_edges;    // conf_bins+1 uniform edges over [0,1]
    std::vector<double> var_edges;     // var_bins+1 uniform edges over [0,0.5]
    std::vector<std::size_t> counts;   // [ci * var_bins + vi]
    std::vector<double> means;         // defined where count > 0, else 0

    std::size_t conf_bins() const { return conf_edges.empty() ? 0 : conf_edges.size() - 1; }
    std::size_t var_bins() const { return var_edges.empty() ? 0 : var_edges.size() - 1; }
};

/// Bins instances by (confidence, variability); cells average `scalar`
/// (typically agreement). Bins are left-closed, the last right-closed.
HeatmapGrid heatmap_bins(const metrics::CartographyTable& table, std::span<const double> scalar,
                         std::size_t conf_bins, std::size_t var_bins);

/// Correlates dropout-derived confidence/variability (mean and population
/// std over samples, the same scalar ops the table uses over epochs) against
/// the training-dynamics columns. Ids must match the table exactly.
MetricCorrelation dropout_vs_dynamics(const metrics::CartographyTable& td_table,
                                      const trainer::DropoutSamples& samples);

}  // namespace datamap::analysis
