#include "ahc/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ahc {

std::size_t argmax(const std::vector<double>& y) {
  return static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
}

Crossings level_crossings(const std::vector<double>& x, const std::vector<double>& y,
                          std::size_t peak, double level) {
  Crossings c;
  std::size_t l = peak;
  while (l > 0 && y[l] >= level) --l;
  std::size_t r = peak;
  while (r + 1 < y.size() && y[r] >= level) ++r;
  if (y[l] >= level || y[r] >= level) return c;
  auto interp = [&](std::size_t a, std::size_t b) {
    const double t = (level - y[a]) / (y[b] - y[a]);
    return x[a] + t * (x[b] - x[a]);
  };
  c.left = interp(l, l + 1);
  c.right = interp(r - 1, r);
  c.found = true;
  return c;
}

double fwhm(const std::vector<double>& x, const std::vector<double>& y) {
  if (y.size() < 3) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t k = argmax(y);
  const Crossings c = level_crossings(x, y, k, 0.5 * y[k]);
  if (!c.found) return std::numeric_limits<double>::quiet_NaN();
  return c.right - c.left;
}

Vertex parabolic_vertex(double ym, double y0, double yp) {
  const double denom = ym - 2.0 * y0 + yp;
  if (denom == 0.0) return {0.0, y0};
  const double off = 0.5 * (ym - yp) / denom;
  return {off, y0 - 0.25 * (ym - yp) * off};
}

double trapezoid(const std::vector<double>& y, double dx) {
  if (y.size() < 2) return 0.0;
  double s = 0.5 * (y.front() + y.back());
  for (std::size_t i = 1; i + 1 < y.size(); ++i) s += y[i];
  return s * dx;
}

}  // namespace ahc
