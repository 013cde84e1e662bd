#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "datamap/metrics.hpp"

namespace datamap::regions {

enum class Strategy {
    ambiguous,  // == high_variability
    hard_to_learn,  // == low_confidence
    easy_to_learn,  // == high_confidence
    high_confidence,
    low_confidence,
    high_variability,
    low_variability,
    high_correctness,
    low_correctness,
    most_forgotten,
    random,
};

const char* strategy_name(Strategy s);
Strategy strategy_from_name(const std::string& name);

/// All strategies, in a fixed reporting order.
const std::vector<Strategy>& all_strategies();

struct SelectionSpec {
    Strategy strategy = Strategy::ambiguous;
    double fraction = 1.0;     // in (0, 1]
    std::uint64_t seed = 0;    // used only by random

    bool operator==(const SelectionSpec&) const = default;
};

struct Subset {
    std::vector<std::string> instance_ids;  // ranked (or draw) order
    SelectionSpec spec;

    std::size_t size() const { return instance_ids.size(); }
};

enum class RegionLabel { easy_to_learn, ambiguous, hard_to_learn, other };

const char* region_name(RegionLabel r);

/// Rank-quantile rules for map coloring. Selection never uses these; it is
/// purely rank-based via rank_select.
struct RegionConfig {
    double ambiguous_quantile = 0.25;  // top fraction by variability
    double hard_quantile = 0.25;       // bottom fraction by confidence, among the rest
    double easy_quantile = 0.25;       // top fraction by confidence, among the rest
};

/// Sorts by the strategy's metric in the strategy's direction (ties by
/// ascending id) and takes the first ceil(fraction*N). The random strategy
/// draws without replacement from the seed.
Subset rank_select(const metrics::CartographyTable& table, const SelectionSpec& spec);

/// Deterministic partition of the table into map regions.
/// Degenerate single-instance tables label by confidence >= 0.5.
std::vector<RegionLabel> assign_regions(const metrics::CartographyTable& table, const RegionConfig& config);

/// Removes floor(replace_fraction*|subset|) members (seeded uniform) and
/// inserts the same number of highest-confidence non-members. Size preserved.
Subset replace_with_easy(const Subset& subset, const metrics::CartographyTable& table, double replace_fraction,
                         std::uint64_t seed);

/// Plain-text export: `# strategy=... fraction=... seed=...` then one id per line.
std::string write_subset(const Subset& subset);
void write_subset_file(const std::string& path, const Subset& subset);
Subset parse_subset(const std::string& text);
Subset parse_subset_file(const std::string& path);

}  // namespace datamap::regions
