#include "datamap/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "datamap/error.hpp"
#include "datamap/io_util.hpp"

namespace datamap::metrics {

std::vector<double> CartographyTable::confidence_column() const {
    std::vector<double> v(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) v[i] = rows[i].confidence;
    return v;
}

std::vector<double> CartographyTable::variability_column() const {
    std::vector<double> v(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) v[i] = rows[i].variability;
    return v;
}

std::vector<double> CartographyTable::correctness_column() const {
    std::vector<double> v(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) v[i] = rows[i].correctness;
    return v;
}

std::vector<double> CartographyTable::forgetting_column() const {
    std::vector<double> v(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) v[i] = static_cast<double>(rows[i].forgetting);
    return v;
}

std::size_t CartographyTable::index_of(const std::string& id) const {
    auto it = std::lower_bound(rows.begin(), rows.end(), id,
                               [](const InstanceStats& r, const std::string& key) { return r.instance_id < key; });
    if (it == rows.end() || it->instance_id != id) return npos;
    return static_cast<std::size_t>(it - rows.begin());
}

double confidence(std::span<const double> p_gold_by_epoch) {
    if (p_gold_by_epoch.empty()) throw ValidationError("confidence: empty sequence");
    double sum = 0.0;
    for (double p : p_gold_by_epoch) sum += p;
    return sum / static_cast<double>(p_gold_by_epoch.size());
}

double variability(std::span<const double> p_gold_by_epoch) {
    if (p_gold_by_epoch.empty()) throw ValidationError("variability: empty sequence");
    const double mean = confidence(p_gold_by_epoch);
    double ss = 0.0;
    for (double p : p_gold_by_epoch) {
        const double d = p - mean;
        ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(p_gold_by_epoch.size()));
}

int argmax_lowest(std::span<const double> probs) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(probs.size()); ++i) {
        if (probs[static_cast<std::size_t>(i)] > probs[static_cast<std::size_t>(best)]) best = i;
    }
    return best;
}

bool is_correct(const dynlog::EpochRecord& record) { return argmax_lowest(record.probs) == record.gold; }

double correctness(std::span<const dynlog::EpochRecord> records) {
    if (records.empty()) throw ValidationError("correctness: empty sequence");
    int correct = 0;
    for (const auto& r : records) {
        if (is_correct(r)) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(records.size());
}

int forgetting_count(std::span<const dynlog::EpochRecord> records) {
    if (records.empty()) throw ValidationError("forgetting_count: empty sequence");
    std::vector<bool> flags(records.size());
    for (std::size_t e = 0; e < records.size(); ++e) flags[e] = is_correct(records[e]);
    return forgetting_count(flags);
}

int forgetting_count(const std::vector<bool>& correct_by_epoch) {
    int count = 0;
    for (std::size_t e = 0; e + 1 < correct_by_epoch.size(); ++e) {
        if (correct_by_epoch[e] && !correct_by_epoch[e + 1]) ++count;
    }
    return count;
}

CartographyTable compute_table(const dynlog::TrainingRunLog& log) {
    CartographyTable table;
    table.num_epochs = log.num_epochs();
    table.rows.resize(log.num_instances());
    for (std::size_t i = 0; i < log.num_instances(); ++i) {
        const std::vector<dynlog::EpochRecord> recs = log.instance_records(i);
        const std::vector<double> p_gold = log.gold_prob_sequence(i);
        InstanceStats& row = table.rows[i];
        row.instance_id = log.instance_ids()[i];
        row.confidence = confidence(p_gold);
        row.variability = variability(p_gold);
        row.correctness = correctness(recs);
        row.forgetting = forgetting_count(recs);
    }
    return table;
}

std::string write_table_csv(const CartographyTable& table) {
    std::string out = "id,confidence,variability,correctness,forgetting\n";
    for (const auto& row : table.rows) {
        if (row.instance_id.find_first_of(",\n\r") != std::string::npos) {
            throw ValidationError("instance id contains a delimiter: '" + row.instance_id + "'");
        }
        out += row.instance_id;
        out += ',';
        out += format_sig(row.confidence, 9);
        out += ',';
        out += format_sig(row.variability, 9);
        out += ',';
        out += format_sig(row.correctness, 9);
        out += ',';
        out += std::to_string(row.forgetting);
        out += '\n';
    }
    return out;
}

void write_table_file(const std::string& path, const CartographyTable& table) {
    write_file(path, write_table_csv(table));
}

CartographyTable parse_table_csv(const std::string& text) {
    std::istringstream ss(text);
    std::string line;
    if (!std::getline(ss, line) || line != "id,confidence,variability,correctness,forgetting") {
        throw ParseError("table: missing or unexpected header line");
    }
    CartographyTable table;
    std::size_t line_no = 1;
    while (std::getline(ss, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto parts = split(line, ',');
        if (parts.size() != 5) {
            throw ParseError("table line " + std::to_string(line_no) + ": expected 5 fields, got " +
                             std::to_string(parts.size()));
        }
        InstanceStats row;
        row.instance_id = parts[0];
        row.confidence = parse_double(parts[1]);
        row.variability = parse_double(parts[2]);
        row.correctness = parse_double(parts[3]);
        row.forgetting = static_cast<int>(parse_long(parts[4]));
        table.rows.push_back(std::move(row));
    }
    if (table.rows.empty()) throw ParseError("table: no rows");
    for (std::size_t i = 0; i + 1 < table.rows.size(); ++i) {
        if (!(table.rows[i].instance_id < table.rows[i + 1].instance_id)) {
            throw ValidationError("table rows not in canonical id order (or duplicate id) near '" +
                                  table.rows[i + 1].instance_id + "'");
        }
    }
    // The CSV does not carry num_epochs. Recover the smallest E that makes
    // every correctness value k/E integral; only rendering (level count) uses
    // it, so the capped search is enough for any real log.
    int min_e = 1;
    for (const auto& row : table.rows) min_e = std::max(min_e, row.forgetting + 1);
    table.num_epochs = min_e;
    for (int cand = min_e; cand <= 4096; ++cand) {
        bool ok = true;
        for (const auto& row : table.rows) {
            const double scaled = row.correctness * cand;
            if (std::abs(scaled - std::round(scaled)) > 1e-6 * cand) {
                ok = false;
                break;
            }
        }
        if (ok) {
            table.num_epochs = cand;
            break;
        }
    }
    return table;
}

CartographyTable parse_table_file(const std::string& path) { return parse_table_csv(read_file(path)); }

}  // namespace datamap::metrics
