#pragma once

#include <cstddef>
#include <vector>

namespace ahc {

// Full width at half maximum of a sampled single-peaked curve, with linear
// interpolation at the crossings. NaN when a crossing is missing.
double fwhm(const std::vector<double>& x, const std::vector<double>& y);

// Crossings of the level y[peak]*fraction either side of `peak`.
struct Crossings {
  double left = 0.0;
  double right = 0.0;
  bool found = false;
};
Crossings level_crossings(const std::vector<double>& x, const std::vector<double>& y,
                          std::size_t peak, double level);

// Vertex of the parabola through (-1, ym), (0, y0), (1, yp).
struct Vertex {
  double offset = 0.0;
  double value = 0.0;
};
Vertex parabolic_vertex(double ym, double y0, double yp);

double trapezoid(const std::vector<double>& y, double dx);

std::size_t argmax(const std::vector<double>& y);

}  // namespace ahc
