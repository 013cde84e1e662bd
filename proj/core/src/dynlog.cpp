#include "datamap/dynlog.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

#include "datamap/error.hpp"
#include "datamap/io_util.hpp"

namespace datamap::dynlog {

std::string Violation::format() const {
    std::string out;
    if (!instance_id.empty()) out += "instance '" + instance_id + "' ";
    if (epoch >= 0) out += "epoch " + std::to_string(epoch) + " ";
    out += "field '" + field + "': " + message;
    return out;
}

TrainingRunLog TrainingRunLog::from_records(std::vector<EpochRecord> records) {
    if (records.empty()) throw ValidationError("log contains no records");

    int max_epoch = 0;
    for (const auto& r : records) {
        if (r.epoch < 0) throw ValidationError("negative epoch index for instance '" + r.instance_id + "'");
        max_epoch = std::max(max_epoch, r.epoch);
    }
    const int e_count = max_epoch + 1;
    const int k = static_cast<int>(records.front().probs.size());

    std::map<std::string, std::vector<const EpochRecord*>> by_id;
    for (const auto& r : records) {
        if (static_cast<int>(r.probs.size()) != k) {
            throw ValidationError("inconsistent class count: instance '" + r.instance_id + "' epoch " +
                                  std::to_string(r.epoch) + " has " + std::to_string(r.probs.size()) +
                                  " classes, expected " + std::to_string(k));
        }
        auto& slots = by_id[r.instance_id];
        if (slots.empty()) slots.assign(static_cast<std::size_t>(e_count), nullptr);
        auto& slot = slots[static_cast<std::size_t>(r.epoch)];
        if (slot != nullptr) {
            throw ValidationError("duplicate record for instance '" + r.instance_id + "' epoch " +
                                  std::to_string(r.epoch));
        }
        slot = &r;
    }

    TrainingRunLog log;
    log.num_epochs_ = e_count;
    log.num_classes_ = k;
    log.ids_.reserve(by_id.size());
    log.grid_.reserve(by_id.size() * static_cast<std::size_t>(e_count));
    for (const auto& [id, slots] : by_id) {
        for (int e = 0; e < e_count; ++e) {
            if (slots[static_cast<std::size_t>(e)] == nullptr) {
                throw ValidationError("missing cell: instance '" + id + "' epoch " + std::to_string(e));
            }
        }
        log.ids_.push_back(id);
        for (int e = 0; e < e_count; ++e) log.grid_.push_back(*slots[static_cast<std::size_t>(e)]);
    }
    return log;
}

const EpochRecord& TrainingRunLog::record(std::size_t instance_index, int epoch) const {
    return grid_[instance_index * static_cast<std::size_t>(num_epochs_) + static_cast<std::size_t>(epoch)];
}

std::vector<double> TrainingRunLog::gold_prob_sequence(std::size_t instance_index) const {
    std::vector<double> seq(static_cast<std::size_t>(num_epochs_));
    for (int e = 0; e < num_epochs_; ++e) seq[static_cast<std::size_t>(e)] = record(instance_index, e).gold_prob();
    return seq;
}

std::vector<EpochRecord> TrainingRunLog::instance_records(std::size_t instance_index) const {
    std::vector<EpochRecord> recs;
    recs.reserve(static_cast<std::size_t>(num_epochs_));
    for (int e = 0; e < num_epochs_; ++e) recs.push_back(record(instance_index, e));
    return recs;
}

std::vector<Violation> validate(const TrainingRunLog& log) {
    std::vector<Violation> out;
    const int k = log.num_classes();
    if (log.num_epochs() < 1) out.push_back({"", -1, "num_epochs", "must be >= 1"});
    if (k < 2) out.push_back({"", -1, "num_classes", "must be >= 2"});
    if (!std::is_sorted(log.instance_ids().begin(), log.instance_ids().end())) {
        out.push_back({"", -1, "instances", "not in lexicographic order"});
    }

    for (std::size_t i = 0; i < log.num_instances(); ++i) {
        for (int e = 0; e < log.num_epochs(); ++e) {
            const EpochRecord& r = log.record(i, e);
            if (static_cast<int>(r.probs.size()) != k) {
                out.push_back({r.instance_id, e, "probs", "class count " + std::to_string(r.probs.size()) +
                                                              " differs from log num_classes " + std::to_string(k)});
                continue;
            }
            double sum = 0.0;
            bool in_range = true;
            for (double p : r.probs) {
                sum += p;
                if (!(p >= 0.0 && p <= 1.0)) in_range = false;
            }
            if (!in_range) {
                out.push_back({r.instance_id, e, "probs", "entry outside [0,1]"});
            }
            if (std::abs(sum - 1.0) > kProbSumTolerance) {
                out.push_back({r.instance_id, e, "probs",
                               "probability sum " + format_sig(sum, 9) + " outside tolerance"});
            }
            if (r.gold < 0 || r.gold >= k) {
                out.push_back({r.instance_id, e, "gold", "gold out of range: " + std::to_string(r.gold) +
                                                             " with K=" + std::to_string(k)});
            }
        }
    }
    return out;
}

namespace {

// Compact records carry p_gold plus the predicted label; they expand to a
// two-entry distribution, so a num_classes: 2 header must come first.
struct ParseState {
    bool header_seen = false;
    int header_classes = 0;
};

EpochRecord parse_line(const std::string& line, std::size_t line_no, ParseState& state) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("line " + std::to_string(line_no) + ": malformed record: " + e.what());
    }
    if (!j.is_object()) throw ParseError("line " + std::to_string(line_no) + ": record is not an object");

    const auto fail = [&](const std::string& msg) -> ParseError {
        return ParseError("line " + std::to_string(line_no) + ": " + msg);
    };

    if (!j.contains("epoch") && j.contains("num_classes")) {
        // header line
        if (state.header_seen) throw fail("duplicate header line");
        if (!j["num_classes"].is_number_integer()) throw fail("num_classes must be an integer");
        state.header_seen = true;
        state.header_classes = j["num_classes"].get<int>();
        if (state.header_classes != 2) throw fail("compact form header requires num_classes: 2");
        EpochRecord sentinel;
        sentinel.epoch = -1;  // caller drops it
        return sentinel;
    }

    for (const char* field : {"epoch", "id", "gold"}) {
        if (!j.contains(field)) throw fail(std::string("missing field '") + field + "'");
    }
    if (!j["epoch"].is_number_integer()) throw fail("field 'epoch' must be an integer");
    if (!j["id"].is_string()) throw fail("field 'id' must be a string");
    if (!j["gold"].is_number_integer()) throw fail("field 'gold' must be an integer");

    EpochRecord rec;
    rec.epoch = j["epoch"].get<int>();
    rec.instance_id = j["id"].get<std::string>();
    rec.gold = j["gold"].get<int>();
    if (rec.epoch < 0) throw fail("negative epoch");

    if (j.contains("probs")) {
        if (!j["probs"].is_array()) throw fail("field 'probs' must be an array");
        for (const auto& p : j["probs"]) {
            if (!p.is_number()) throw fail("probs entries must be numbers");
            rec.probs.push_back(p.get<double>());
        }
        return rec;
    }

    if (!j.contains("p_gold") || !j.contains("pred")) {
        throw fail("record needs either 'probs' or compact 'p_gold'+'pred'");
    }
    if (!state.header_seen) throw fail("compact record before a num_classes: 2 header");
    if (!j["p_gold"].is_number()) throw fail("field 'p_gold' must be a number");
    if (!j["pred"].is_number_integer()) throw fail("field 'pred' must be an integer");

    const double p_gold = j["p_gold"].get<double>();
    const int pred = j["pred"].get<int>();
    if (rec.gold != 0 && rec.gold != 1) throw fail("compact gold must be 0 or 1");
    if (pred != 0 && pred != 1) throw fail("compact pred must be 0 or 1");
    if (p_gold != 0.5) {
        const int implied = p_gold > 0.5 ? rec.gold : 1 - rec.gold;
        if (pred != implied) throw fail("pred inconsistent with p_gold");
    }
    rec.probs.assign(2, 0.0);
    rec.probs[static_cast<std::size_t>(rec.gold)] = p_gold;
    rec.probs[static_cast<std::size_t>(1 - rec.gold)] = 1.0 - p_gold;
    return rec;
}

TrainingRunLog parse_impl(std::istream& stream, std::vector<Violation>* collect) {
    std::vector<EpochRecord> records;
    ParseState state;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        if (line.empty()) continue;
        EpochRecord rec = parse_line(line, line_no, state);
        if (rec.epoch < 0) continue;  // header sentinel
        records.push_back(std::move(rec));
    }

    TrainingRunLog log = TrainingRunLog::from_records(std::move(records));
    std::vector<Violation> violations = validate(log);
    if (collect != nullptr) {
        *collect = std::move(violations);
    } else if (!violations.empty()) {
        throw ValidationError(violations.front().format());
    }
    return log;
}

}  // namespace

TrainingRunLog parse_log(std::istream& stream) { return parse_impl(stream, nullptr); }

TrainingRunLog parse_log_file(const std::string& path) {
    std::istringstream ss(read_file(path));
    return parse_log(ss);
}

TrainingRunLog parse_log_collect(std::istream& stream, std::vector<Violation>& violations) {
    return parse_impl(stream, &violations);
}

std::string serialize_log(const TrainingRunLog& log) {
    std::string out;
    for (std::size_t i = 0; i < log.num_instances(); ++i) {
        for (int e = 0; e < log.num_epochs(); ++e) {
            const EpochRecord& r = log.record(i, e);
            nlohmann::ordered_json j;
            j["epoch"] = r.epoch;
            j["id"] = r.instance_id;
            j["gold"] = r.gold;
            j["probs"] = r.probs;
            out += j.dump();
            out += '\n';
        }
    }
    return out;
}

void write_log_file(const std::string& path, const TrainingRunLog& log) {
    write_file(path, serialize_log(log));
}

TrainingRunLog restrict_epochs(const TrainingRunLog& log, int e_max) {
    if (e_max < 1 || e_max > log.num_epochs()) {
        throw ValidationError("e_max " + std::to_string(e_max) + " outside [1, " +
                              std::to_string(log.num_epochs()) + "]");
    }
    if (e_max == log.num_epochs()) return log;
    std::vector<EpochRecord> records;
    records.reserve(log.num_instances() * static_cast<std::size_t>(e_max));
    for (std::size_t i = 0; i < log.num_instances(); ++i) {
        for (int e = 0; e < e_max; ++e) records.push_back(log.record(i, e));
    }
    return TrainingRunLog::from_records(std::move(records));
}

}  // namespace datamap::dynlog
