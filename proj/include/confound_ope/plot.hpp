#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "confound_ope/harness.hpp"

namespace confound_ope::plot {

struct PlotOptions {
    double panel_width = 360.0;
    double panel_height = 300.0;
};

// Standalone SVG: one panel per alpha, epsilon on x, the replicate-mean
// difference value(pi_a1) - value(pi_a0) on y with a +/- 2 SE band, positive and
// negative half-planes shaded, a zero line and an estimator legend. Output is a
// pure function of the cells (no timestamps).
void render_plot(std::ostream& os, const std::vector<harness::SweepCell>& cells,
                 const PlotOptions& options = {});
void render_plot(const std::string& path, const std::vector<harness::SweepCell>& cells,
                 const PlotOptions& options = {});

} // namespace confound_ope::plot
