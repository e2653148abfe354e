#pragma once

#include "loopsoup/curves.hpp"

#include <string>
#include <vector>

namespace loopsoup {

struct PlotOptions {
    double width = 800.0; // pixels; height follows the data's aspect ratio
    bool hull = false;    // shade the filled hull of closed curves
    int hull_cells = 200; // hull grid resolution across the picture
    double stroke = 0.8;
};

// Polylines in data coordinates flipped so that +y points up, with the real
// axis drawn when it is in view. No analysis beyond the optional hull fill.
std::string render_svg(const std::vector<Curve>& curves, const PlotOptions& opt = {});

} // namespace loopsoup
