#include "datamap/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "datamap/error.hpp"
#include "datamap/io_util.hpp"
#include "datamap/rng.hpp"

namespace datamap::render {

namespace {

std::string f2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string blend(double t, int r0, int g0, int b0, int r1, int g1, int b1) {
    const auto ch = [&](int lo, int hi) {
        return static_cast<int>(std::lround(static_cast<double>(lo) + t * static_cast<double>(hi - lo)));
    };
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", ch(r0, r1), ch(g0, g1), ch(b0, b1));
    return buf;
}

// low correctness deep red, full correctness deep blue
std::string ramp_color(int level, int max_level) {
    const double t = max_level == 0 ? 1.0 : static_cast<double>(level) / static_cast<double>(max_level);
    return blend(t, 0xb2, 0x18, 0x2b, 0x21, 0x66, 0xac);
}

std::string heat_color(double t) { return blend(t, 0xff, 0xff, 0xff, 0x21, 0x66, 0xac); }

void append_rect(std::string& out, double x, double y, double w, double h, const std::string& fill,
                 const std::string& extra = "") {
    out += "<rect x=\"" + f2(x) + "\" y=\"" + f2(y) + "\" width=\"" + f2(w) + "\" height=\"" + f2(h) + "\" fill=\"" +
           fill + "\"" + extra + "/>\n";
}

void append_text(std::string& out, double x, double y, const std::string& anchor, int size, const std::string& text,
                 const std::string& extra = "") {
    out += "<text x=\"" + f2(x) + "\" y=\"" + f2(y) + "\" text-anchor=\"" + anchor +
           "\" font-family=\"sans-serif\" font-size=\"" + std::to_string(size) + "\"" + extra + ">" + text +
           "</text>\n";
}

void append_line(std::string& out, double x1, double y1, double x2, double y2) {
    out += "<line x1=\"" + f2(x1) + "\" y1=\"" + f2(y1) + "\" x2=\"" + f2(x2) + "\" y2=\"" + f2(y2) +
           "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
}

std::vector<std::size_t> histogram(std::span<const double> values, double range, std::size_t bins) {
    std::vector<std::size_t> counts(bins, 0);
    for (double v : values) {
        const double c = std::clamp(v, 0.0, range);
        ++counts[std::min(static_cast<std::size_t>(c / range * static_cast<double>(bins)), bins - 1)];
    }
    return counts;
}

constexpr std::size_t kHistBins = 20;

struct Frame {
    double x0, x1, y0, y1;  // y0 above y1 in canvas coordinates
    double px(double v, double range) const { return x0 + v / range * (x1 - x0); }
    double py(double v, double range) const { return y1 - v / range * (y1 - y0); }
};

void draw_axes(std::string& out, const Frame& plot) {
    append_line(out, plot.x0, plot.y1, plot.x1, plot.y1);
    append_line(out, plot.x0, plot.y0, plot.x0, plot.y1);
    for (int i = 0; i <= 5; ++i) {
        const double v = 0.1 * i;
        const double x = plot.px(v, 0.5);
        append_line(out, x, plot.y1, x, plot.y1 + 4);
        append_text(out, x, plot.y1 + 18, "middle", 11, format_sig(v, 2));
    }
    for (int i = 0; i <= 5; ++i) {
        const double v = 0.2 * i;
        const double y = plot.py(v, 1.0);
        append_line(out, plot.x0 - 4, y, plot.x0, y);
        append_text(out, plot.x0 - 8, y + 4, "end", 11, format_sig(v, 2));
    }
    append_text(out, (plot.x0 + plot.x1) / 2, plot.y1 + 38, "middle", 13, "variability");
    append_text(out, plot.x0 - 40, (plot.y0 + plot.y1) / 2, "middle", 13, "confidence",
                " transform=\"rotate(-90 " + f2(plot.x0 - 40) + " " + f2((plot.y0 + plot.y1) / 2) + ")\"");
}

std::string display_region(regions::RegionLabel label) {
    std::string s = regions::region_name(label);
    std::replace(s.begin(), s.end(), '_', '-');
    return s;
}

}  // namespace

std::string render_map(const metrics::CartographyTable& table, std::span<const regions::RegionLabel> labels,
                       const MapStyle& style) {
    if (table.size() == 0) throw ValidationError("render_map: empty table");
    if (!labels.empty() && labels.size() != table.size()) {
        throw ValidationError("render_map: region label count mismatch");
    }
    if (table.num_epochs < 1) throw ValidationError("render_map: table lacks an epoch count");
    if (style.width < 500.0 || style.height < 400.0) throw ValidationError("render_map: canvas too small");
    if (style.max_points == 0) throw ValidationError("render_map: max_points must be >= 1");

    const Frame plot{60.0, style.width - 250.0, 160.0, style.height - 50.0};
    const Frame top{plot.x0, plot.x1, 30.0, 130.0};
    const Frame conf_panel{plot.x1 + 20.0, plot.x1 + 120.0, plot.y0, plot.y1};
    const Frame corr_panel{plot.x1 + 140.0, plot.x1 + 240.0, plot.y0, plot.y1};

    std::vector<std::size_t> shown(table.size());
    for (std::size_t i = 0; i < shown.size(); ++i) shown[i] = i;
    if (table.size() > style.max_points) {
        shown = Rng(style.seed).sample_indices(table.size(), style.max_points);
        std::sort(shown.begin(), shown.end());
    }

    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + f2(style.width) + "\" height=\"" +
           f2(style.height) + "\" viewBox=\"0 0 " + f2(style.width) + " " + f2(style.height) + "\">\n";
    append_rect(out, 0, 0, style.width, style.height, "#ffffff");
    if (!style.title.empty()) append_text(out, plot.x0, 20, "start", 14, style.title);

    draw_axes(out, plot);

    // marginal histograms: variability on top, confidence and correctness on the right
    const auto var_counts = histogram(table.variability_column(), 0.5, kHistBins);
    const auto conf_counts = histogram(table.confidence_column(), 1.0, kHistBins);
    const auto corr_counts = histogram(table.correctness_column(), 1.0, kHistBins);
    const auto peak = [](const std::vector<std::size_t>& c) {
        return std::max<std::size_t>(*std::max_element(c.begin(), c.end()), 1);
    };

    out += "<g id=\"hist-variability\">\n";
    const double var_peak = static_cast<double>(peak(var_counts));
    for (std::size_t b = 0; b < kHistBins; ++b) {
        if (var_counts[b] == 0) continue;
        const double x = top.px(0.5 * static_cast<double>(b) / kHistBins, 0.5);
        const double w = (top.x1 - top.x0) / kHistBins;
        const double h = (top.y1 - top.y0) * static_cast<double>(var_counts[b]) / var_peak;
        append_rect(out, x, top.y1 - h, w, h, "#9aa5b1");
    }
    out += "</g>\n";

    const auto side_hist = [&](const Frame& panel, const std::vector<std::size_t>& counts, const char* id,
                               const char* caption) {
        std::string g = "<g id=\"" + std::string(id) + "\">\n";
        const double p = static_cast<double>(peak(counts));
        for (std::size_t b = 0; b < kHistBins; ++b) {
            if (counts[b] == 0) continue;
            const double y_hi = panel.py(static_cast<double>(b + 1) / kHistBins, 1.0);
            const double bar_h = (panel.y1 - panel.y0) / kHistBins;
            const double w = (panel.x1 - panel.x0) * static_cast<double>(counts[b]) / p;
            append_rect(g, panel.x0, y_hi, w, bar_h, "#9aa5b1");
        }
        g += "</g>\n";
        append_text(g, (panel.x0 + panel.x1) / 2, panel.y0 - 8, "middle", 12, caption);
        out += g;
    };
    side_hist(conf_panel, conf_counts, "hist-confidence", "confidence");
    side_hist(corr_panel, corr_counts, "hist-correctness", "correctness");

    out += "<g id=\"points\">\n";
    const int max_level = table.num_epochs;
    for (std::size_t i : shown) {
        const auto& row = table.rows[i];
        const int level = static_cast<int>(std::lround(row.correctness * table.num_epochs));
        out += "<circle cx=\"" + f2(plot.px(row.variability, 0.5)) + "\" cy=\"" + f2(plot.py(row.confidence, 1.0)) +
               "\" r=\"" + f2(style.point_radius) + "\" class=\"lvl" + std::to_string(level) + "\" fill=\"" +
               ramp_color(level, max_level) + "\" fill-opacity=\"0.75\"/>\n";
    }
    out += "</g>\n";

    if (style.annotate_regions && !labels.empty()) {
        for (auto region : {regions::RegionLabel::easy_to_learn, regions::RegionLabel::ambiguous,
                            regions::RegionLabel::hard_to_learn}) {
            double vsum = 0.0, csum = 0.0;
            std::size_t n = 0;
            for (std::size_t i = 0; i < table.size(); ++i) {
                if (labels[i] != region) continue;
                vsum += table.rows[i].variability;
                csum += table.rows[i].confidence;
                ++n;
            }
            if (n == 0) continue;
            const double d = static_cast<double>(n);
            append_text(out, plot.px(vsum / d, 0.5), plot.py(csum / d, 1.0), "middle", 14, display_region(region),
                        " font-weight=\"bold\"");
        }
    }

    out += "</svg>\n";
    return out;
}

std::string render_heatmap(const analysis::HeatmapGrid& grid, const HeatmapStyle& style) {
    if (grid.conf_bins() == 0 || grid.var_bins() == 0) throw ValidationError("render_heatmap: empty grid");
    if (style.width < 300.0 || style.height < 300.0) throw ValidationError("render_heatmap: canvas too small");

    const Frame plot{70.0, style.width - 30.0, 40.0, style.height - 60.0};

    double lo = 0.0, hi = 0.0;
    bool any = false;
    for (std::size_t cell = 0; cell < grid.counts.size(); ++cell) {
        if (grid.counts[cell] == 0) continue;
        if (!any) {
            lo = hi = grid.means[cell];
            any = true;
        } else {
            lo = std::min(lo, grid.means[cell]);
            hi = std::max(hi, grid.means[cell]);
        }
    }

    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + f2(style.width) + "\" height=\"" +
           f2(style.height) + "\" viewBox=\"0 0 " + f2(style.width) + " " + f2(style.height) + "\">\n";
    append_rect(out, 0, 0, style.width, style.height, "#ffffff");
    if (!style.title.empty()) append_text(out, plot.x0, 24, "start", 14, style.title);

    out += "<g id=\"cells\">\n";
    for (std::size_t ci = 0; ci < grid.conf_bins(); ++ci) {
        for (std::size_t vi = 0; vi < grid.var_bins(); ++vi) {
            const std::size_t cell = ci * grid.var_bins() + vi;
            const double x = plot.px(grid.var_edges[vi], 0.5);
            const double w = plot.px(grid.var_edges[vi + 1], 0.5) - x;
            const double y = plot.py(grid.conf_edges[ci + 1], 1.0);
            const double h = plot.py(grid.conf_edges[ci], 1.0) - y;
            std::string extra = " data-count=\"" + std::to_string(grid.counts[cell]) + "\"";
            std::string fill = "#eeeeee";
            if (grid.counts[cell] > 0) {
                const double t = hi > lo ? (grid.means[cell] - lo) / (hi - lo) : 1.0;
                fill = heat_color(t);
                extra += " data-mean=\"" + format_double(grid.means[cell]) + "\"";
            }
            append_rect(out, x, y, w, h, fill, extra);
        }
    }
    out += "</g>\n";

    draw_axes(out, plot);
    out += "</svg>\n";
    return out;
}

}  // namespace datamap::render
