#include "datamap/regions.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "datamap/error.hpp"
#include "datamap/io_util.hpp"
#include "datamap/rng.hpp"

namespace datamap::regions {

const char* strategy_name(Strategy s) {
    switch (s) {
        case Strategy::ambiguous: return "ambiguous";
        case Strategy::hard_to_learn: return "hard_to_learn";
        case Strategy::easy_to_learn: return "easy_to_learn";
        case Strategy::high_confidence: return "high_confidence";
        case Strategy::low_confidence: return "low_confidence";
        case Strategy::high_variability: return "high_variability";
        case Strategy::low_variability: return "low_variability";
        case Strategy::high_correctness: return "high_correctness";
        case Strategy::low_correctness: return "low_correctness";
        case Strategy::most_forgotten: return "most_forgotten";
        case Strategy::random: return "random";
    }
    return "?";
}

Strategy strategy_from_name(const std::string& name) {
    for (Strategy s : all_strategies()) {
        if (name == strategy_name(s)) return s;
    }
    throw ValidationError("unknown strategy: '" + name + "'");
}

const std::vector<Strategy>& all_strategies() {
    static const std::vector<Strategy> all = {
        Strategy::ambiguous,       Strategy::hard_to_learn,  Strategy::easy_to_learn,
        Strategy::high_confidence, Strategy::low_confidence, Strategy::high_variability,
        Strategy::low_variability, Strategy::high_correctness, Strategy::low_correctness,
        Strategy::most_forgotten,  Strategy::random,
    };
    return all;
}

const char* region_name(RegionLabel r) {
    switch (r) {
        case RegionLabel::easy_to_learn: return "easy_to_learn";
        case RegionLabel::ambiguous: return "ambiguous";
        case RegionLabel::hard_to_learn: return "hard_to_learn";
        case RegionLabel::other: return "other";
    }
    return "?";
}

namespace {

// Ranks row indices by key with the requested direction; ascending id breaks ties.
std::vector<std::size_t> ranked_indices(const metrics::CartographyTable& table,
                                        const std::vector<double>& key, bool descending) {
    std::vector<std::size_t> idx(table.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (key[a] != key[b]) return descending ? key[a] > key[b] : key[a] < key[b];
        return table.rows[a].instance_id < table.rows[b].instance_id;
    });
    return idx;
}

// most_forgotten ties (many zero-forgetting instances) fall back to
// descending variability, then id.
std::vector<std::size_t> ranked_by_forgetting(const metrics::CartographyTable& table) {
    std::vector<std::size_t> idx(table.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        const auto& ra = table.rows[a];
        const auto& rb = table.rows[b];
        if (ra.forgetting != rb.forgetting) return ra.forgetting > rb.forgetting;
        if (ra.variability != rb.variability) return ra.variability > rb.variability;
        return ra.instance_id < rb.instance_id;
    });
    return idx;
}

}  // namespace

Subset rank_select(const metrics::CartographyTable& table, const SelectionSpec& spec) {
    if (table.size() == 0) throw ValidationError("rank_select: empty table");
    if (!(spec.fraction > 0.0 && spec.fraction <= 1.0)) {
        throw ValidationError("rank_select: fraction must be in (0,1]");
    }
    const std::size_t n = table.size();
    const std::size_t m = std::min(n, std::max<std::size_t>(1, ceil_count(spec.fraction, n)));

    std::vector<std::size_t> order;
    switch (spec.strategy) {
        case Strategy::ambiguous:
        case Strategy::high_variability:
            order = ranked_indices(table, table.variability_column(), true);
            break;
        case Strategy::low_variability:
            order = ranked_indices(table, table.variability_column(), false);
            break;
        case Strategy::easy_to_learn:
        case Strategy::high_confidence:
            order = ranked_indices(table, table.confidence_column(), true);
            break;
        case Strategy::hard_to_learn:
        case Strategy::low_confidence:
            order = ranked_indices(table, table.confidence_column(), false);
            break;
        case Strategy::high_correctness:
            order = ranked_indices(table, table.correctness_column(), true);
            break;
        case Strategy::low_correctness:
            order = ranked_indices(table, table.correctness_column(), false);
            break;
        case Strategy::most_forgotten:
            order = ranked_by_forgetting(table);
            break;
        case Strategy::random: {
            Rng rng(spec.seed);
            order = rng.sample_indices(n, m);
            break;
        }
    }

    Subset subset;
    subset.spec = spec;
    subset.instance_ids.reserve(m);
    for (std::size_t i = 0; i < m; ++i) subset.instance_ids.push_back(table.rows[order[i]].instance_id);
    return subset;
}

std::vector<RegionLabel> assign_regions(const metrics::CartographyTable& table, const RegionConfig& config) {
    const std::size_t n = table.size();
    if (n == 0) throw ValidationError("assign_regions: empty table");
    for (double q : {config.ambiguous_quantile, config.hard_quantile, config.easy_quantile}) {
        if (!(q >= 0.0 && q <= 1.0)) throw ValidationError("assign_regions: quantile outside [0,1]");
    }
    if (config.hard_quantile + config.easy_quantile > 1.0) {
        throw ValidationError("assign_regions: hard and easy quantiles overlap");
    }

    std::vector<RegionLabel> labels(n, RegionLabel::other);
    if (n == 1) {
        labels[0] = table.rows[0].confidence >= 0.5 ? RegionLabel::easy_to_learn : RegionLabel::hard_to_learn;
        return labels;
    }

    const std::size_t n_amb = floor_count(config.ambiguous_quantile, n);
    const auto by_var = ranked_indices(table, table.variability_column(), true);
    for (std::size_t i = 0; i < n_amb; ++i) labels[by_var[i]] = RegionLabel::ambiguous;

    std::vector<std::size_t> rest;
    rest.reserve(n - n_amb);
    for (std::size_t i = n_amb; i < n; ++i) rest.push_back(by_var[i]);

    std::sort(rest.begin(), rest.end(), [&](std::size_t a, std::size_t b) {
        if (table.rows[a].confidence != table.rows[b].confidence) {
            return table.rows[a].confidence < table.rows[b].confidence;
        }
        return table.rows[a].instance_id < table.rows[b].instance_id;
    });
    const std::size_t n_hard = floor_count(config.hard_quantile, rest.size());
    const std::size_t n_easy = floor_count(config.easy_quantile, rest.size());
    for (std::size_t i = 0; i < n_hard; ++i) labels[rest[i]] = RegionLabel::hard_to_learn;
    for (std::size_t i = 0; i < n_easy; ++i) labels[rest[rest.size() - 1 - i]] = RegionLabel::easy_to_learn;
    return labels;
}

Subset replace_with_easy(const Subset& subset, const metrics::CartographyTable& table, double replace_fraction,
                         std::uint64_t seed) {
    if (!(replace_fraction >= 0.0 && replace_fraction <= 1.0)) {
        throw ValidationError("replace_with_easy: replace_fraction outside [0,1]");
    }
    const std::size_t r = floor_count(replace_fraction, subset.size());
    if (r == 0) return subset;

    const std::set<std::string> members(subset.instance_ids.begin(), subset.instance_ids.end());
    std::vector<std::size_t> pool;  // non-members, row indices
    for (std::size_t i = 0; i < table.size(); ++i) {
        if (!members.contains(table.rows[i].instance_id)) pool.push_back(i);
    }
    if (pool.size() < r) {
        throw ValidationError("replace_with_easy: insufficient replacement pool (" + std::to_string(pool.size()) +
                              " non-members, need " + std::to_string(r) + ")");
    }

    // seeded uniform removal over the members, canonical order
    std::vector<std::string> sorted_members(subset.instance_ids);
    std::sort(sorted_members.begin(), sorted_members.end());
    Rng rng(seed);
    const auto removed_idx = rng.sample_indices(sorted_members.size(), r);
    std::set<std::string> removed;
    for (std::size_t i : removed_idx) removed.insert(sorted_members[i]);

    std::sort(pool.begin(), pool.end(), [&](std::size_t a, std::size_t b) {
        if (table.rows[a].confidence != table.rows[b].confidence) {
            return table.rows[a].confidence > table.rows[b].confidence;
        }
        return table.rows[a].instance_id < table.rows[b].instance_id;
    });

    Subset out;
    out.spec = subset.spec;
    for (const auto& id : subset.instance_ids) {
        if (!removed.contains(id)) out.instance_ids.push_back(id);
    }
    for (std::size_t i = 0; i < r; ++i) out.instance_ids.push_back(table.rows[pool[i]].instance_id);
    return out;
}

std::string write_subset(const Subset& subset) {
    std::string out = "# strategy=";
    out += strategy_name(subset.spec.strategy);
    out += " fraction=";
    out += format_double(subset.spec.fraction);
    out += " seed=";
    out += std::to_string(subset.spec.seed);
    out += '\n';
    for (const auto& id : subset.instance_ids) {
        if (id.empty() || id.front() == '#' || id.find_first_of("\n\r") != std::string::npos) {
            throw ValidationError("subset id not representable in the plain-text format: '" + id + "'");
        }
        out += id;
        out += '\n';
    }
    return out;
}

void write_subset_file(const std::string& path, const Subset& subset) { write_file(path, write_subset(subset)); }

Subset parse_subset(const std::string& text) {
    std::istringstream ss(text);
    std::string line;
    if (!std::getline(ss, line) || line.rfind("# ", 0) != 0) {
        throw ParseError("subset: missing '# strategy=... fraction=... seed=...' header");
    }
    Subset subset;
    bool have_strategy = false;
    for (const auto& token : split(line.substr(2), ' ')) {
        const auto eq = token.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = token.substr(0, eq);
        const std::string value = token.substr(eq + 1);
        if (key == "strategy") {
            subset.spec.strategy = strategy_from_name(value);
            have_strategy = true;
        } else if (key == "fraction") {
            subset.spec.fraction = parse_double(value);
        } else if (key == "seed") {
            subset.spec.seed = static_cast<std::uint64_t>(parse_long(value));
        }
    }
    if (!have_strategy) throw ParseError("subset: header lacks strategy=");
    while (std::getline(ss, line)) {
        if (line.empty()) continue;
        subset.instance_ids.push_back(line);
    }
    return subset;
}

Subset parse_subset_file(const std::string& path) { return parse_subset(read_file(path)); }

}  // namespace datamap::regions
