#pragma once

// Standalone SVG 1.1 renderings of the training and explainability artifacts:
// trajectory map, reward heatmap, grouped factual/counterfactual bars, and the
// chosen-action histogram. Output is byte-reproducible (fixed-precision numbers).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "jetrl/env_config.hpp"
#include "jetrl/eval.hpp"
#include "jetrl/io/csv.hpp"
#include "jetrl/xai.hpp"

namespace jetrl {

namespace svg {

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    std::string s(buf);
    return s == "-0.00" ? "0.00" : s;
}

class Document {
  public:
    Document(double width, double height) : width_(width), height_(height) {}

    void raw(const std::string& s) { body_ += s; }

    void rect(double x, double y, double w, double h, const std::string& fill, const std::string& extra = {}) {
        body_ += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) + "\" height=\"" + num(h) +
                 "\" fill=\"" + fill + "\"" + (extra.empty() ? "" : " " + extra) + "/>\n";
    }

    void line(double x1, double y1, double x2, double y2, const std::string& stroke, double width = 1.0) {
        body_ += "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" + num(y2) +
                 "\" stroke=\"" + stroke + "\" stroke-width=\"" + num(width) + "\"/>\n";
    }

    void text(double x, double y, const std::string& s, const std::string& anchor = "middle", int size = 12,
              const std::string& fill = "#000000") {
        body_ += "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-family=\"sans-serif\" font-size=\"" +
                 std::to_string(size) + "\" text-anchor=\"" + anchor + "\" fill=\"" + fill + "\">" + s + "</text>\n";
    }

    void circle(double cx, double cy, double r, const std::string& fill, const std::string& extra = {}) {
        body_ += "<circle cx=\"" + num(cx) + "\" cy=\"" + num(cy) + "\" r=\"" + num(r) + "\" fill=\"" + fill + "\"" +
                 (extra.empty() ? "" : " " + extra) + "/>\n";
    }

    void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke, double width,
                  const std::string& extra = {}) {
        body_ += "<polyline fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"" + num(width) + "\"" +
                 (extra.empty() ? "" : " " + extra) + " points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i) {
            body_ += (i ? " " : "") + num(pts[i].first) + "," + num(pts[i].second);
        }
        body_ += "\"/>\n";
    }

    std::string str() const {
        return "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n"
               "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
               num(width_) + "\" height=\"" + num(height_) + "\" viewBox=\"0 0 " + num(width_) + " " + num(height_) +
               "\">\n" + defs_ + "<rect x=\"0\" y=\"0\" width=\"" + num(width_) + "\" height=\"" + num(height_) +
               "\" fill=\"#ffffff\"/>\n" + body_ + "</svg>\n";
    }

    void defs(const std::string& d) { defs_ += "<defs>\n" + d + "</defs>\n"; }

  private:
    double width_;
    double height_;
    std::string defs_;
    std::string body_;
};

/// Light-to-dark blue ramp; t in [0, 1], larger is darker.
inline std::string blue_ramp(double t) {
    t = std::clamp(t, 0.0, 1.0);
    const std::array<double, 3> lo{247, 251, 255};
    const std::array<double, 3> hi{8, 48, 107};
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(std::lround(lo[0] + (hi[0] - lo[0]) * t)),
                  static_cast<int>(std::lround(lo[1] + (hi[1] - lo[1]) * t)),
                  static_cast<int>(std::lround(lo[2] + (hi[2] - lo[2]) * t)));
    return buf;
}

/// Linear value-to-pixel mapping for a vertical axis whose range always includes zero.
struct BarScale {
    double lo = 0.0;
    double hi = 1.0;
    double top = 0.0;    // pixel y of `hi`
    double bottom = 0.0; // pixel y of `lo`

    static BarScale fit(const std::vector<double>& values, double top, double bottom) {
        double lo = 0.0;
        double hi = 0.0;
        for (double v : values) {
            if (std::isfinite(v)) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
        if (hi == lo) {
            hi = lo + 1.0;
        }
        return {lo, hi, top, bottom};
    }

    double y(double v) const { return bottom - (v - lo) / (hi - lo) * (bottom - top); }
    double pixels_per_unit() const { return (bottom - top) / (hi - lo); }
};

} // namespace svg

inline std::string render_heatmap_svg(const HeatmapMatrix& m) {
    constexpr double cell = 80.0;
    constexpr double left = 120.0;
    constexpr double top = 60.0;
    svg::Document doc(left + cell * action_count + 160.0, top + cell * action_count + 90.0);
    doc.defs("<pattern id=\"hatch\" patternUnits=\"userSpaceOnUse\" width=\"8\" height=\"8\">"
             "<path d=\"M0,8 L8,0\" stroke=\"#999999\" stroke-width=\"1\"/></pattern>\n");

    double lo = 0.0;
    double hi = 0.0;
    bool any = false;
    for (std::size_t i = 0; i < action_count; ++i) {
        if (!m.present(i)) continue;
        for (double v : m.mean[i]) {
            lo = any ? std::min(lo, v) : v;
            hi = any ? std::max(hi, v) : v;
            any = true;
        }
    }
    auto shade = [&](double v) { return hi > lo ? (v - lo) / (hi - lo) : 0.5; };

    doc.text(left + cell * action_count / 2.0, 24.0, "Mean one-step reward: chosen (row) vs alternative (column)",
             "middle", 14);
    for (std::size_t j = 0; j < action_count; ++j) {
        doc.text(left + cell * (static_cast<double>(j) + 0.5), top - 8.0, std::string(action_names[j]), "middle", 11);
    }
    for (std::size_t i = 0; i < action_count; ++i) {
        const double y = top + cell * static_cast<double>(i);
        doc.text(left - 8.0, y + cell / 2.0 + 4.0, std::string(action_names[i]) + " (n=" + std::to_string(m.count[i]) + ")",
                 "end", 11);
        for (std::size_t j = 0; j < action_count; ++j) {
            const double x = left + cell * static_cast<double>(j);
            if (!m.present(i)) {
                doc.rect(x, y, cell, cell, "url(#hatch)", "stroke=\"#cccccc\" class=\"absent\"");
                continue;
            }
            const double t = shade(m.mean[i][j]);
            const std::string extra = std::string("stroke=\"") + (i == j ? "#d62728" : "#ffffff") +
                                      "\" stroke-width=\"" + (i == j ? "3" : "1") + "\" class=\"cell\"";
            doc.rect(x, y, cell, cell, svg::blue_ramp(t), extra);
            doc.text(x + cell / 2.0, y + cell / 2.0 + 4.0, svg::num(m.mean[i][j]),
                     "middle", 11, t > 0.55 ? "#ffffff" : "#000000");
        }
    }
    // Legend: vertical colour bar from min (bottom) to max (top).
    const double lx = left + cell * action_count + 40.0;
    constexpr int steps = 20;
    const double lh = cell * action_count;
    for (int s = 0; s < steps; ++s) {
        const double t = 1.0 - (s + 0.5) / steps;
        doc.rect(lx, top + lh * s / steps, 24.0, lh / steps + 0.5, svg::blue_ramp(t));
    }
    doc.text(lx + 30.0, top + 10.0, svg::num(hi), "start", 11);
    doc.text(lx + 30.0, top + lh, svg::num(lo), "start", 11);
    doc.text(left + cell * action_count / 2.0, top + lh + 40.0, "Alternative action", "middle", 12);
    return doc.str();
}

namespace detail {
inline void bar_axes(svg::Document& doc, const svg::BarScale& s, double left, double right, const std::string& ylabel) {
    doc.line(left, s.top, left, s.bottom, "#000000");
    doc.line(left, s.y(0.0), right, s.y(0.0), "#000000");
    for (int k = 0; k <= 4; ++k) {
        const double v = s.lo + (s.hi - s.lo) * k / 4.0;
        doc.line(left - 4.0, s.y(v), left, s.y(v), "#000000");
        doc.text(left - 6.0, s.y(v) + 4.0, svg::num(v), "end", 10);
    }
    doc.raw("<text x=\"16\" y=\"" + svg::num((s.top + s.bottom) / 2.0) +
            "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
            svg::num((s.top + s.bottom) / 2.0) + ")\">" + ylabel + "</text>\n");
}

inline void value_bar(svg::Document& doc, const svg::BarScale& s, double x, double w, double v, const std::string& fill,
                      const std::string& cls) {
    const double y0 = s.y(0.0);
    const double y1 = s.y(v);
    doc.rect(x, std::min(y0, y1), w, std::abs(y1 - y0), fill, "class=\"" + cls + "\" data-value=\"" + fmt6(v) + "\"");
}
} // namespace detail

/// Grouped bars per action: factual mean (blue) beside the mean of the five alternatives (orange).
inline std::string render_contrast_svg(const ContrastTable& t) {
    constexpr double left = 80.0, top = 50.0, group = 110.0, plot_h = 320.0;
    const double right = left + group * action_count;
    svg::Document doc(right + 30.0, top + plot_h + 90.0);
    std::vector<double> values;
    for (const auto& c : t) {
        if (c) {
            values.push_back(c->mean_factual);
            values.push_back(c->mean_counterfactual);
        }
    }
    const auto s = svg::BarScale::fit(values, top, top + plot_h);
    doc.text((left + right) / 2.0, 24.0, "Factual vs average counterfactual one-step reward", "middle", 14);
    detail::bar_axes(doc, s, left, right, "Mean reward");
    for (std::size_t i = 0; i < action_count; ++i) {
        const double gx = left + group * static_cast<double>(i);
        if (t[i]) {
            detail::value_bar(doc, s, gx + 15.0, 38.0, t[i]->mean_factual, "#1f77b4", "factual");
            detail::value_bar(doc, s, gx + 57.0, 38.0, t[i]->mean_counterfactual, "#ff7f0e", "counterfactual");
        }
        doc.text(gx + group / 2.0, top + plot_h + 20.0, std::string(action_names[i]), "middle", 11);
    }
    const double ly = top + plot_h + 50.0;
    doc.rect(left, ly, 14.0, 14.0, "#1f77b4");
    doc.text(left + 20.0, ly + 12.0, "Factual", "start", 11);
    doc.rect(left + 110.0, ly, 14.0, 14.0, "#ff7f0e");
    doc.text(left + 130.0, ly + 12.0, "Average counterfactual", "start", 11);
    return doc.str();
}

inline std::string render_distribution_svg(const ActionCounts& counts) {
    constexpr double left = 80.0, top = 50.0, group = 90.0, plot_h = 320.0;
    const double right = left + group * action_count;
    svg::Document doc(right + 30.0, top + plot_h + 60.0);
    std::vector<double> values(counts.begin(), counts.end());
    const auto s = svg::BarScale::fit(values, top, top + plot_h);
    doc.text((left + right) / 2.0, 24.0, "Distribution of chosen actions", "middle", 14);
    detail::bar_axes(doc, s, left, right, "Count");
    for (std::size_t i = 0; i < action_count; ++i) {
        const double gx = left + group * static_cast<double>(i);
        detail::value_bar(doc, s, gx + 15.0, group - 30.0, static_cast<double>(counts[i]), "#2ca02c", "count");
        doc.text(gx + group / 2.0, top + plot_h + 20.0, std::string(action_names[i]), "middle", 11);
    }
    return doc.str();
}

/// Arena to scale with one agent path (blue polyline) and one target marker (red) per episode.
inline std::string render_trajectories_svg(const std::vector<EpisodeLog>& logs, const EnvConfig& cfg) {
    if (logs.empty()) {
        throw UsageError("render_trajectories_svg needs at least one episode");
    }
    constexpr double margin = 40.0;
    constexpr double legend_h = 50.0;
    const double scale = 700.0 / std::max(cfg.width, cfg.height);
    const double w = cfg.width * scale;
    const double h = cfg.height * scale;
    svg::Document doc(w + 2 * margin, h + 2 * margin + legend_h);
    // World y points up; SVG y points down.
    auto px = [&](Vec2 p) { return std::pair{margin + p.x * scale, margin + (cfg.height - p.y) * scale}; };

    doc.rect(margin, margin, w, h, "none", "stroke=\"#000000\" stroke-width=\"1.5\" class=\"world\"");
    for (const auto& log : logs) {
        std::vector<std::pair<double, double>> pts;
        pts.reserve(log.steps.size() + 1);
        for (const auto& r : log.steps) {
            pts.push_back(px(r.pos));
        }
        if (pts.empty()) {
            pts.push_back(px(agent_spawn(cfg)));
        }
        if (pts.size() == 1) {
            pts.push_back(pts.front());
        }
        doc.polyline(pts, "#1f77b4", 1.2, "stroke-opacity=\"0.7\" class=\"path\"");
    }
    for (const auto& log : logs) {
        const auto [cx, cy] = px(log.target_pos);
        doc.circle(cx, cy, 5.0, "#d62728", "class=\"target\"");
    }
    const double ly = margin + h + 30.0;
    doc.line(margin, ly, margin + 30.0, ly, "#1f77b4", 2.0);
    doc.text(margin + 36.0, ly + 4.0, "Agent path", "start", 12);
    doc.circle(margin + 160.0, ly, 5.0, "#d62728");
    doc.text(margin + 170.0, ly + 4.0, "Target", "start", 12);
    doc.text(margin + w / 2.0, 24.0, "Agent trajectories (" + std::to_string(logs.size()) + " episodes)", "middle", 14);
    return doc.str();
}

inline void render_heatmap_svg(const HeatmapMatrix& m, const std::filesystem::path& path) {
    write_text_file(path, render_heatmap_svg(m));
}

inline void render_trajectories_svg(const std::vector<EpisodeLog>& logs, const EnvConfig& cfg,
                                    const std::filesystem::path& path) {
    write_text_file(path, render_trajectories_svg(logs, cfg));
}

} // namespace jetrl
