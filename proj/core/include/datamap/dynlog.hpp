#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace datamap::dynlog {

/// One observation: the model's class distribution for one instance at the
/// end of one training epoch.
struct EpochRecord {
    int epoch = 0;
    std::string instance_id;
    int gold = 0;
    std::vector<double> probs;

    double gold_prob() const { return probs[static_cast<std::size_t>(gold)]; }

    bool operator==(const EpochRecord&) const = default;
};

struct Violation {
    std::string instance_id;  // empty for log-level violations
    int epoch = -1;           // -1 when not tied to one epoch
    std::string field;
    std::string message;

    std::string format() const;
};

/// Complete per-epoch, per-instance probability grid for one training run.
/// Instances are kept in lexicographic id order; that order is the canonical
/// order for every downstream reduction and file output.
class TrainingRunLog {
public:
    /// Groups records into a complete grid. Throws ValidationError on
    /// duplicates, missing cells, inconsistent class counts, or empty input.
    /// Per-record value invariants are NOT checked here; see validate().
    static TrainingRunLog from_records(std::vector<EpochRecord> records);

    int num_epochs() const { return num_epochs_; }
    int num_classes() const { return num_classes_; }
    std::size_t num_instances() const { return ids_.size(); }
    const std::vector<std::string>& instance_ids() const { return ids_; }

    const EpochRecord& record(std::size_t instance_index, int epoch) const;

    /// p(gold) across epochs 0..E-1 for one instance.
    std::vector<double> gold_prob_sequence(std::size_t instance_index) const;

    /// Records of one instance, epoch order.
    std::vector<EpochRecord> instance_records(std::size_t instance_index) const;

    bool operator==(const TrainingRunLog&) const = default;

private:
    int num_epochs_ = 0;
    int num_classes_ = 0;
    std::vector<std::string> ids_;
    std::vector<EpochRecord> grid_;  // [instance * E + epoch]
};

/// Probability-sum tolerance: logs come from float32 softmax emitters.
inline constexpr double kProbSumTolerance = 1e-6;

/// Checks every type invariant; violations are returned as data, never thrown.
std::vector<Violation> validate(const TrainingRunLog& log);

/// Strict parse of the newline-delimited log format. Records may arrive in
/// any order. Throws ParseError for structural defects (with line numbers for
/// malformed lines) and ValidationError for value-invariant violations.
TrainingRunLog parse_log(std::istream& stream);
TrainingRunLog parse_log_file(const std::string& path);

/// Lenient parse used by the `validate` CLI command: structural defects still
/// throw (no grid can be built), but value violations are collected into
/// `violations` instead of aborting.
TrainingRunLog parse_log_collect(std::istream& stream, std::vector<Violation>& violations);

/// Canonical serialization: full-form records, sorted by (id, epoch), doubles
/// in shortest round-trip form. parse_log(serialize_log(x)) == x.
std::string serialize_log(const TrainingRunLog& log);
void write_log_file(const std::string& path, const TrainingRunLog& log);

/// Log restricted to epochs 0..e_max-1. Throws ValidationError when e_max is
/// outside [1, E].
TrainingRunLog restrict_epochs(const TrainingRunLog& log, int e_max);

}  // namespace datamap::dynlog
