#pragma once

#include <string>
#include <vector>

#include "exo/pareto.hpp"

namespace exo {

struct ScatterSeries {
  std::string name;
  std::vector<DesignPoint> points;
  bool connect = true;  // draw the front as a polyline
};

/// Scatter of design points, metabolic reduction on x and power on y, each
/// point labelled with its grid code.
std::string render_fronts_svg(const std::vector<ScatterSeries>& series, const std::string& title);

}  // namespace exo
