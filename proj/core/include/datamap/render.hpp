#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "datamap/analysis.hpp"
#include "datamap/metrics.hpp"
#include "datamap/regions.hpp"

namespace datamap::render {

/// Data-map figure: variability on x in [0,0.5], confidence on y in [0,1],
/// one marker per instance colored by a discrete correctness ramp with
/// exactly 1+E levels, plus marginal histograms for all three statistics.
struct MapStyle {
    double width = 800.0;
    double height = 700.0;
    double point_radius = 2.5;
    std::size_t max_points = 25000;  // larger tables are subsampled
    std::uint64_t seed = 0;          // subsample draw
    bool annotate_regions = true;
    std::string title;
};

/// SVG 1.1 text. `labels` may be empty (no region annotations) or one label
/// per table row. Pure: identical inputs give identical bytes.
std::string render_map(const metrics::CartographyTable& table, std::span<const regions::RegionLabel> labels,
                       const MapStyle& style);

struct HeatmapStyle {
    double width = 640.0;
    double height = 640.0;
    std::string title;
};

/// SVG 1.1 text. Every cell is drawn: empty cells in a flat background tone,
/// occupied cells on a linear white-to-blue scale over the observed mean
/// range. Cells carry data-count and (when occupied) data-mean attributes.
std::string render_heatmap(const analysis::HeatmapGrid& grid, const HeatmapStyle& style);

}  // namespace datamap::render
