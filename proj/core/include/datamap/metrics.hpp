#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "datamap/dynlog.hpp"

namespace datamap::metrics {

/// The four per-instance training-dynamics statistics.
struct InstanceStats {
    std::string instance_id;
    double confidence = 0.0;   // mean p(gold) across epochs, in [0,1]
    double variability = 0.0;  // population std of p(gold), in [0,0.5]
    double correctness = 0.0;  // fraction of epochs with argmax == gold; 1+E levels
    int forgetting = 0;        // correct->incorrect transitions, <= E-1

    bool operator==(const InstanceStats&) const = default;
};

/// Per-instance statistics table; rows in canonical (lexicographic) id order.
/// These values are the data-map coordinates.
struct CartographyTable {
    int num_epochs = 0;
    std::vector<InstanceStats> rows;

    std::size_t size() const { return rows.size(); }
    std::vector<double> confidence_column() const;
    std::vector<double> variability_column() const;
    std::vector<double> correctness_column() const;
    std::vector<double> forgetting_column() const;

    /// Row index for an id, or npos.
    std::size_t index_of(const std::string& id) const;
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    bool operator==(const CartographyTable&) const = default;
};

/// Arithmetic mean of p(gold) across epochs. Throws on an empty sequence.
double confidence(std::span<const double> p_gold_by_epoch);

/// Population standard deviation (divides by E, matching the defining
/// formula). Throws on an empty sequence.
double variability(std::span<const double> p_gold_by_epoch);

/// argmax with ties broken toward the lowest class index.
int argmax_lowest(std::span<const double> probs);

/// True when argmax(probs) == gold under the lowest-index tie rule.
bool is_correct(const dynlog::EpochRecord& record);

/// Fraction of epochs predicted correctly.
double correctness(std::span<const dynlog::EpochRecord> records);

/// Number of correct -> incorrect transitions between consecutive epochs.
int forgetting_count(std::span<const dynlog::EpochRecord> records);
int forgetting_count(const std::vector<bool>& correct_by_epoch);

/// All four statistics for every instance of a log, canonical order.
CartographyTable compute_table(const dynlog::TrainingRunLog& log);

/// CSV export: header id,confidence,variability,correctness,forgetting, rows
/// in canonical order, reals with 9 significant digits.
std::string write_table_csv(const CartographyTable& table);
void write_table_file(const std::string& path, const CartographyTable& table);
CartographyTable parse_table_csv(const std::string& text);
CartographyTable parse_table_file(const std::string& path);

}  // namespace datamap::metrics
