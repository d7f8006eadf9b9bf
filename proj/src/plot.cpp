#include "confound_ope/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <set>

namespace confound_ope::plot {

using harness::Estimator;
using harness::SweepCell;

namespace {

struct Point {
    double epsilon;
    double mean;
    double half_band; // 2 * standard error across replicates
};

using Series = std::map<Estimator, std::vector<Point>>;

const char* color_of(Estimator e) {
    switch (e) {
    case Estimator::DirectMethod: return "#8c564b";
    case Estimator::IpsIdeal: return "#1f77b4";
    case Estimator::IpsEstimated: return "#d62728";
    case Estimator::Snips: return "#ff7f0e";
    case Estimator::OracleAsymptotic: return "#555555";
    }
    return "#000000";
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", std::fabs(v) < 1e-12 ? 0.0 : v);
    return buf;
}

double nice_step(double range) {
    const double raw = range / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0}) {
        if (raw <= m * mag) return m * mag;
    }
    return 10.0 * mag;
}

std::map<double, Series> aggregate(const std::vector<SweepCell>& cells) {
    // alpha -> estimator -> epsilon -> differences
    std::map<double, std::map<Estimator, std::map<double, std::vector<double>>>> raw;
    for (const auto& c : cells) {
        if (std::isnan(c.difference)) continue;
        raw[c.alpha][c.estimator][c.epsilon].push_back(c.difference);
    }
    std::map<double, Series> out;
    for (const auto& [alpha, by_est] : raw) {
        for (const auto& [est, by_eps] : by_est) {
            auto& pts = out[alpha][est];
            for (const auto& [eps, values] : by_eps) {
                double mean = 0.0;
                for (double v : values) mean += v;
                mean /= static_cast<double>(values.size());
                double half = 0.0;
                if (values.size() > 1) {
                    double ss = 0.0;
                    for (double v : values) ss += (v - mean) * (v - mean);
                    const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
                    half = 2.0 * sd / std::sqrt(static_cast<double>(values.size()));
                }
                pts.push_back({eps, mean, half});
            }
        }
    }
    return out;
}

} // namespace

void render_plot(std::ostream& os, const std::vector<SweepCell>& cells, const PlotOptions& opt) {
    if (cells.empty()) throw ValidationError("cannot plot an empty cell list");
    const auto panels = aggregate(cells);
    if (panels.empty()) throw ValidationError("no finite differences to plot");

    double x_lo = INFINITY, x_hi = -INFINITY, y_lo = 0.0, y_hi = 0.0;
    std::set<Estimator> present;
    for (const auto& [alpha, series] : panels) {
        for (const auto& [est, pts] : series) {
            present.insert(est);
            for (const auto& p : pts) {
                x_lo = std::min(x_lo, p.epsilon);
                x_hi = std::max(x_hi, p.epsilon);
                y_lo = std::min(y_lo, p.mean - p.half_band);
                y_hi = std::max(y_hi, p.mean + p.half_band);
            }
        }
    }
    if (x_hi - x_lo < 1e-12) {
        x_lo -= 0.01;
        x_hi += 0.01;
    }
    const double y_pad = 0.05 * std::max(y_hi - y_lo, 0.1);
    y_lo -= y_pad;
    y_hi += y_pad;

    const double left = 60.0, right = 20.0, top = 40.0, bottom = 50.0;
    const double legend_entry_w = 130.0, legend_row_h = 18.0;
    const double pw = opt.panel_width, ph = opt.panel_height;
    const double width = static_cast<double>(panels.size()) * pw;
    const auto per_row = static_cast<std::size_t>(
        std::max(1.0, std::floor((width - left) / legend_entry_w)));
    const std::size_t legend_rows = (present.size() + per_row - 1) / per_row;
    const double legend_h = static_cast<double>(legend_rows) * legend_row_h + 12.0;
    const double height = ph + legend_h;
    const double plot_w = pw - left - right;
    const double plot_h = ph - top - bottom;

    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\""
       << num(height) << "\" viewBox=\"0 0 " << num(width) << ' ' << num(height)
       << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
       << "<rect x=\"0\" y=\"0\" width=\"" << num(width) << "\" height=\"" << num(height)
       << "\" fill=\"white\"/>\n";

    std::size_t panel_index = 0;
    for (const auto& [alpha, series] : panels) {
        const double ox = static_cast<double>(panel_index++) * pw + left;
        const double oy = top;
        auto sx = [&](double x) { return ox + (x - x_lo) / (x_hi - x_lo) * plot_w; };
        auto sy = [&](double y) { return oy + (y_hi - y) / (y_hi - y_lo) * plot_h; };

        os << "<g class=\"panel\" data-alpha=\"" << tick_label(alpha) << "\">\n";
        os << "<rect class=\"region-positive\" x=\"" << num(ox) << "\" y=\"" << num(sy(y_hi))
           << "\" width=\"" << num(plot_w) << "\" height=\"" << num(sy(0.0) - sy(y_hi))
           << "\" fill=\"#2ca02c\" fill-opacity=\"0.12\"/>\n";
        os << "<rect class=\"region-negative\" x=\"" << num(ox) << "\" y=\"" << num(sy(0.0))
           << "\" width=\"" << num(plot_w) << "\" height=\"" << num(sy(y_lo) - sy(0.0))
           << "\" fill=\"#d62728\" fill-opacity=\"0.12\"/>\n";

        const double xs = nice_step(x_hi - x_lo);
        for (double t = std::ceil(x_lo / xs - 1e-9) * xs; t <= x_hi + 1e-9; t += xs) {
            os << "<line x1=\"" << num(sx(t)) << "\" y1=\"" << num(oy + plot_h) << "\" x2=\""
               << num(sx(t)) << "\" y2=\"" << num(oy + plot_h + 4) << "\" stroke=\"black\"/>"
               << "<text x=\"" << num(sx(t)) << "\" y=\"" << num(oy + plot_h + 16)
               << "\" text-anchor=\"middle\">" << tick_label(t) << "</text>\n";
        }
        const double ys = nice_step(y_hi - y_lo);
        for (double t = std::ceil(y_lo / ys - 1e-9) * ys; t <= y_hi + 1e-9; t += ys) {
            os << "<line x1=\"" << num(ox - 4) << "\" y1=\"" << num(sy(t)) << "\" x2=\""
               << num(ox) << "\" y2=\"" << num(sy(t)) << "\" stroke=\"black\"/>"
               << "<text x=\"" << num(ox - 6) << "\" y=\"" << num(sy(t) + 4)
               << "\" text-anchor=\"end\">" << tick_label(t) << "</text>\n";
        }
        os << "<rect x=\"" << num(ox) << "\" y=\"" << num(oy) << "\" width=\"" << num(plot_w)
           << "\" height=\"" << num(plot_h) << "\" fill=\"none\" stroke=\"black\"/>\n";
        os << "<line class=\"zero\" x1=\"" << num(ox) << "\" y1=\"" << num(sy(0.0)) << "\" x2=\""
           << num(ox + plot_w) << "\" y2=\"" << num(sy(0.0))
           << "\" stroke=\"black\" stroke-dasharray=\"4 3\"/>\n";

        for (const auto& [est, pts] : series) {
            const bool has_band = std::any_of(pts.begin(), pts.end(),
                                              [](const Point& p) { return p.half_band > 0.0; });
            if (has_band) {
                os << "<polygon class=\"band\" data-estimator=\"" << harness::to_string(est)
                   << "\" fill=\"" << color_of(est) << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
                for (const auto& p : pts) os << num(sx(p.epsilon)) << ',' << num(sy(p.mean + p.half_band)) << ' ';
                for (auto it = pts.rbegin(); it != pts.rend(); ++it) {
                    os << num(sx(it->epsilon)) << ',' << num(sy(it->mean - it->half_band)) << ' ';
                }
                os << "\"/>\n";
            }
            os << "<polyline class=\"curve\" data-estimator=\"" << harness::to_string(est)
               << "\" fill=\"none\" stroke=\"" << color_of(est) << "\" stroke-width=\"1.5\""
               << (est == Estimator::OracleAsymptotic ? " stroke-dasharray=\"2 2\"" : "")
               << " points=\"";
            for (const auto& p : pts) os << num(sx(p.epsilon)) << ',' << num(sy(p.mean)) << ' ';
            os << "\"/>\n";
        }

        os << "<text x=\"" << num(ox + plot_w / 2) << "\" y=\"" << num(oy - 12)
           << "\" text-anchor=\"middle\" font-size=\"13\">&#945; = " << tick_label(alpha)
           << "</text>\n";
        os << "<text x=\"" << num(ox + plot_w / 2) << "\" y=\"" << num(oy + plot_h + 34)
           << "\" text-anchor=\"middle\">&#949; (logging policy error rate)</text>\n";
        if (panel_index == 1) {
            os << "<text transform=\"translate(" << num(ox - 44) << ',' << num(oy + plot_h / 2)
               << ") rotate(-90)\" text-anchor=\"middle\">V(&#960;_a1) - V(&#960;_a0)</text>\n";
        }
        os << "</g>\n";
    }

    os << "<g class=\"legend\">\n";
    std::size_t entry = 0;
    for (const Estimator e : present) {
        const double lx = left + static_cast<double>(entry % per_row) * legend_entry_w;
        const double ly = ph + static_cast<double>(entry / per_row) * legend_row_h + 6.0;
        ++entry;
        os << "<line x1=\"" << num(lx) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(lx + 20)
           << "\" y2=\"" << num(ly) << "\" stroke=\"" << color_of(e) << "\" stroke-width=\"2\"/>"
           << "<text x=\"" << num(lx + 24) << "\" y=\"" << num(ly + 4) << "\">"
           << harness::to_string(e) << "</text>\n";
    }
    os << "</g>\n</svg>\n";
}

void render_plot(const std::string& path, const std::vector<SweepCell>& cells,
                 const PlotOptions& options) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    render_plot(out, cells, options);
    if (!out) throw IoError("failed writing '" + path + "'");
}

} // namespace confound_ope::plot
