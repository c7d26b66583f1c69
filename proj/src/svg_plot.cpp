/*
 * Copyright 2026 The cnrl Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "cnrl/svg_plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace cnrl {

namespace {

// Viridis sampled at nine evenly spaced stops.
constexpr std::array<std::array<int, 3>, 9> kStops = {{
    {0x44, 0x01, 0x54},
    {0x47, 0x2d, 0x7b},
    {0x3b, 0x52, 0x8b},
    {0x2c, 0x72, 0x8e},
    {0x21, 0x91, 0x8c},
    {0x28, 0xae, 0x80},
    {0x5e, 0xc9, 0x62},
    {0xad, 0xdc, 0x30},
    {0xfd, 0xe7, 0x25},
}};

constexpr const char* kTargetFill = "#1f77b4";
constexpr const char* kBackgroundFill = "#ff7f0e";
constexpr const char* kUncolored = "#bbbbbb";

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    std::string s = buf;
    if (s == "-0.00") s = "0.00";
    return s;
}

std::string label(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    std::string s = buf;
    if (s == "-0") s = "0";
    return s;
}

std::string escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

struct Range
{
    double lo;
    double hi;
};

Range padded(double lo, double hi)
{
    if (!(hi > lo)) return {lo - 1.0, hi + 1.0};
    const double pad = 0.05 * (hi - lo);
    return {lo - pad, hi + pad};
}

std::vector<double> ticks(Range r)
{
    const double raw = (r.hi - r.lo) / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        step = m * mag;
        if (step >= raw) break;
    }
    std::vector<double> out;
    for (double t = std::ceil(r.lo / step) * step; t <= r.hi + 1e-12 * step; t += step) {
        out.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
    }
    return out;
}

} // namespace

std::string sequential_color(double t)
{
    t = std::clamp(std::isfinite(t) ? t : 0.0, 0.0, 1.0);
    const double pos = t * static_cast<double>(kStops.size() - 1);
    const auto i = std::min(static_cast<std::size_t>(pos), kStops.size() - 2);
    const double f = pos - static_cast<double>(i);
    char buf[8];
    int rgb[3];
    for (int c = 0; c < 3; ++c) {
        rgb[c] = static_cast<int>(std::lround(kStops[i][c] + f * (kStops[i + 1][c] - kStops[i][c])));
    }
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
    return buf;
}

std::string render_scatter_svg(const std::vector<ScatterPoint>& points, const ScatterOptions& options)
{
    const double width = options.width;
    const double height = options.height;
    const double left = 70, right = 150, top = options.title.empty() ? 20 : 40, bottom = 55;
    const double plot_w = width - left - right;
    const double plot_h = height - top - bottom;

    double xlo = 0, xhi = 0, ylo = 0, yhi = 0;
    bool any_color = false;
    double clo = 0, chi = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        xlo = i ? std::min(xlo, p.x) : p.x;
        xhi = i ? std::max(xhi, p.x) : p.x;
        ylo = i ? std::min(ylo, p.y) : p.y;
        yhi = i ? std::max(yhi, p.y) : p.y;
        if (p.color_value) {
            clo = any_color ? std::min(clo, *p.color_value) : *p.color_value;
            chi = any_color ? std::max(chi, *p.color_value) : *p.color_value;
            any_color = true;
        }
    }
    const Range xr = padded(xlo, xhi);
    const Range yr = padded(ylo, yhi);
    auto px = [&](double x) { return left + (x - xr.lo) / (xr.hi - xr.lo) * plot_w; };
    auto py = [&](double y) { return top + plot_h - (y - yr.lo) / (yr.hi - yr.lo) * plot_h; };
    auto fill_of = [&](const ScatterPoint& p) -> std::string {
        if (!any_color) return p.target ? kTargetFill : kBackgroundFill;
        if (!p.color_value) return kUncolored;
        return sequential_color(chi > clo ? (*p.color_value - clo) / (chi - clo) : 0.0);
    };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << options.width << "\" height=\"" << options.height
        << "\" viewBox=\"0 0 " << options.width << ' ' << options.height << "\" font-family=\"sans-serif\">\n";
    svg << "  <rect x=\"0\" y=\"0\" width=\"" << options.width << "\" height=\"" << options.height
        << "\" fill=\"white\"/>\n";
    if (!options.title.empty()) {
        svg << "  <text x=\"" << num(left + plot_w / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
            << escape(options.title) << "</text>\n";
    }

    svg << "  <g class=\"axes\" stroke=\"black\" stroke-width=\"1\">\n";
    svg << "    <rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(plot_w) << "\" height=\""
        << num(plot_h) << "\" fill=\"none\"/>\n";
    for (double t : ticks(xr)) {
        svg << "    <line x1=\"" << num(px(t)) << "\" y1=\"" << num(top + plot_h) << "\" x2=\"" << num(px(t))
            << "\" y2=\"" << num(top + plot_h + 5) << "\"/>\n";
    }
    for (double t : ticks(yr)) {
        svg << "    <line x1=\"" << num(left - 5) << "\" y1=\"" << num(py(t)) << "\" x2=\"" << num(left) << "\" y2=\""
            << num(py(t)) << "\"/>\n";
    }
    svg << "  </g>\n";
    svg << "  <g class=\"tick-labels\" font-size=\"11\">\n";
    for (double t : ticks(xr)) {
        svg << "    <text x=\"" << num(px(t)) << "\" y=\"" << num(top + plot_h + 18) << "\" text-anchor=\"middle\">"
            << label(t) << "</text>\n";
    }
    for (double t : ticks(yr)) {
        svg << "    <text x=\"" << num(left - 8) << "\" y=\"" << num(py(t) + 4) << "\" text-anchor=\"end\">" << label(t)
            << "</text>\n";
    }
    svg << "  </g>\n";
    svg << "  <text class=\"axis-label\" x=\"" << num(left + plot_w / 2) << "\" y=\"" << num(height - 15)
        << "\" text-anchor=\"middle\" font-size=\"13\">cPC 1</text>\n";
    svg << "  <text class=\"axis-label\" x=\"18\" y=\"" << num(top + plot_h / 2) << "\" text-anchor=\"middle\""
        << " font-size=\"13\" transform=\"rotate(-90 18 " << num(top + plot_h / 2) << ")\">cPC 2</text>\n";

    // Background first so target points stay visible on top.
    svg << "  <g class=\"points\" stroke=\"black\" stroke-width=\"0.6\" fill-opacity=\"0.85\">\n";
    for (bool target : {false, true}) {
        for (const auto& p : points) {
            if (p.target != target) continue;
            if (target) {
                svg << "    <circle class=\"marker\" data-network=\"T\" cx=\"" << num(px(p.x)) << "\" cy=\""
                    << num(py(p.y)) << "\" r=\"4\" fill=\"" << fill_of(p) << "\"/>\n";
            } else {
                svg << "    <rect class=\"marker\" data-network=\"B\" x=\"" << num(px(p.x) - 3.5) << "\" y=\""
                    << num(py(p.y) - 3.5) << "\" width=\"7\" height=\"7\" fill=\"" << fill_of(p) << "\"/>\n";
            }
        }
    }
    svg << "  </g>\n";

    const double lx = left + plot_w + 20;
    svg << "  <g class=\"legend\" font-size=\"12\">\n";
    svg << "    <g class=\"legend-entry\">\n";
    svg << "      <circle cx=\"" << num(lx + 5) << "\" cy=\"" << num(top + 10) << "\" r=\"4\" fill=\""
        << (any_color ? kUncolored : kTargetFill) << "\" stroke=\"black\" stroke-width=\"0.6\"/>\n";
    svg << "      <text x=\"" << num(lx + 16) << "\" y=\"" << num(top + 14) << "\">target</text>\n";
    svg << "    </g>\n";
    svg << "    <g class=\"legend-entry\">\n";
    svg << "      <rect x=\"" << num(lx + 1.5) << "\" y=\"" << num(top + 26.5) << "\" width=\"7\" height=\"7\" fill=\""
        << (any_color ? kUncolored : kBackgroundFill) << "\" stroke=\"black\" stroke-width=\"0.6\"/>\n";
    svg << "      <text x=\"" << num(lx + 16) << "\" y=\"" << num(top + 34) << "\">background</text>\n";
    svg << "    </g>\n";
    svg << "  </g>\n";

    if (any_color) {
        const int steps = 32;
        const double bar_top = top + 60, bar_h = 150, bar_w = 14;
        svg << "  <g class=\"color-scale\" font-size=\"11\">\n";
        if (!options.color_label.empty()) {
            svg << "    <text x=\"" << num(lx) << "\" y=\"" << num(bar_top - 8) << "\">" << escape(options.color_label)
                << "</text>\n";
        }
        for (int s = 0; s < steps; ++s) {
            const double t = chi > clo ? 1.0 - (s + 0.5) / steps : 0.0;
            svg << "    <rect x=\"" << num(lx) << "\" y=\"" << num(bar_top + s * bar_h / steps) << "\" width=\""
                << num(bar_w) << "\" height=\"" << num(bar_h / steps + 0.5) << "\" fill=\"" << sequential_color(t)
                << "\"/>\n";
        }
        svg << "    <text class=\"scale-max\" x=\"" << num(lx + bar_w + 6) << "\" y=\"" << num(bar_top + 9) << "\">"
            << label(chi) << "</text>\n";
        svg << "    <text class=\"scale-min\" x=\"" << num(lx + bar_w + 6) << "\" y=\"" << num(bar_top + bar_h) << "\">"
            << label(clo) << "</text>\n";
        svg << "  </g>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

} // namespace cnrl
