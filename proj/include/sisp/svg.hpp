#pragma once

// Minimal SVG line plots for quick visual inspection of runs.  Output is
// deterministic (fixed palette, %.17g-free rounded coordinates) and needs no
// external renderer beyond a browser.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "sisp/common.hpp"
#include "sisp/io.hpp"

namespace sisp {

struct SvgSeries {
    std::string name;
    Vec x;
    Vec y;
    bool band = false;  // band series carry y = lower, y2 = upper
    Vec y2;
};

class SvgPlot {
public:
    SvgPlot(std::string title, std::string x_label, std::string y_label)
        : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {}

    void add_line(const std::string& name, const Vec& x, const Vec& y) {
        require_dim(x.size() == y.size(), "SvgPlot::add_line: x/y size mismatch");
        require(x.size() >= 1, "SvgPlot::add_line: empty series");
        series_.push_back(SvgSeries{name, x, y, false, {}});
    }

    void add_line(const std::string& name, const Vec& y) {
        Vec x(y.size());
        for (Eigen::Index i = 0; i < y.size(); ++i) x[i] = static_cast<double>(i);
        add_line(name, x, y);
    }

    void add_band(const std::string& name, const Vec& x, const Vec& lower, const Vec& upper) {
        require_dim(x.size() == lower.size() && x.size() == upper.size(),
                    "SvgPlot::add_band: size mismatch");
        require(x.size() >= 1, "SvgPlot::add_band: empty series");
        series_.push_back(SvgSeries{name, x, lower, true, upper});
    }

    std::string render() const {
        require(!series_.empty(), "SvgPlot::render: nothing to draw");
        double xmin = series_[0].x.minCoeff(), xmax = series_[0].x.maxCoeff();
        double ymin = series_[0].y.minCoeff(), ymax = series_[0].y.maxCoeff();
        for (const auto& s : series_) {
            xmin = std::min(xmin, s.x.minCoeff());
            xmax = std::max(xmax, s.x.maxCoeff());
            ymin = std::min(ymin, s.y.minCoeff());
            ymax = std::max(ymax, s.y.maxCoeff());
            if (s.band) {
                ymin = std::min(ymin, s.y2.minCoeff());
                ymax = std::max(ymax, s.y2.maxCoeff());
            }
        }
        if (xmax <= xmin) xmax = xmin + 1.0;
        if (ymax <= ymin) {
            ymin -= 0.5;
            ymax += 0.5;
        }

        const double W = 720, H = 420, ml = 64, mr = 140, mt = 40, mb = 48;
        const double pw = W - ml - mr, ph = H - mt - mb;
        auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
        auto py = [&](double y) { return mt + ph - (y - ymin) / (ymax - ymin) * ph; };
        auto fmt = [](double v) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.2f", v);
            return std::string(buf);
        };
        auto fmt_tick = [](double v) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.4g", v);
            return std::string(buf);
        };

        static const char* palette[] = {"#1f6fb2", "#d2553c", "#3c9c5f", "#8c5bb2",
                                        "#c9a227", "#4cb8c4"};
        std::ostringstream os;
        os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
           << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
        os << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
        os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\""
           << " font-size=\"15\">" << title_ << "</text>\n";
        // Axes box and ticks.
        os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
           << "\" fill=\"none\" stroke=\"#444\"/>\n";
        for (int t = 0; t <= 4; ++t) {
            const double fx = xmin + (xmax - xmin) * t / 4.0;
            const double fy = ymin + (ymax - ymin) * t / 4.0;
            os << "<text x=\"" << fmt(px(fx)) << "\" y=\"" << H - mb + 18
               << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
               << fmt_tick(fx) << "</text>\n";
            os << "<text x=\"" << ml - 8 << "\" y=\"" << fmt(py(fy) + 4)
               << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
               << fmt_tick(fy) << "</text>\n";
        }
        os << "<text x=\"" << ml + pw / 2 << "\" y=\"" << H - 10
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << x_label_
           << "</text>\n";
        os << "<text x=\"16\" y=\"" << mt + ph / 2
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\""
           << " transform=\"rotate(-90 16 " << mt + ph / 2 << ")\">" << y_label_ << "</text>\n";

        int color_idx = 0;
        double legend_y = mt + 12;
        for (const auto& s : series_) {
            const std::string color = palette[color_idx % 6];
            ++color_idx;
            if (s.band) {
                os << "<polygon fill=\"" << color << "\" fill-opacity=\"0.25\" stroke=\"none\" "
                   << "points=\"";
                for (Eigen::Index i = 0; i < s.x.size(); ++i)
                    os << fmt(px(s.x[i])) << ',' << fmt(py(s.y[i])) << ' ';
                for (Eigen::Index i = s.x.size() - 1; i >= 0; --i)
                    os << fmt(px(s.x[i])) << ',' << fmt(py(s.y2[i])) << ' ';
                os << "\"/>\n";
            } else {
                os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" "
                   << "points=\"";
                for (Eigen::Index i = 0; i < s.x.size(); ++i)
                    os << fmt(px(s.x[i])) << ',' << fmt(py(s.y[i])) << ' ';
                os << "\"/>\n";
            }
            os << "<rect x=\"" << W - mr + 10 << "\" y=\"" << legend_y - 9
               << "\" width=\"14\" height=\"10\" fill=\"" << color
               << (s.band ? "\" fill-opacity=\"0.4" : "") << "\"/>\n";
            os << "<text x=\"" << W - mr + 30 << "\" y=\"" << legend_y
               << "\" font-family=\"sans-serif\" font-size=\"11\">" << s.name << "</text>\n";
            legend_y += 16;
        }
        os << "</svg>\n";
        return os.str();
    }

    void save(const std::filesystem::path& path) const { write_text_file(path, render()); }

private:
    std::string title_, x_label_, y_label_;
    std::vector<SvgSeries> series_;
};

}  // namespace sisp
