#include "ahc/grid.hpp"

#include <cmath>
#include <cstring>

#include "ahc/errors.hpp"

namespace ahc {

std::vector<double> Axis::points() const {
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = point(k);
  return out;
}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

const char* to_string(Coordinates c) {
  return c == Coordinates::SumDifference ? "sum_difference" : "signal_idler";
}

Coordinates coordinates_from_string(const char* s) {
  if (std::strcmp(s, "sum_difference") == 0) return Coordinates::SumDifference;
  if (std::strcmp(s, "signal_idler") == 0) return Coordinates::SignalIdler;
  throw ConfigError(std::string("unknown coordinate convention '") + s + "'");
}

FrequencyGrid FrequencyGrid::cw(double pump, const Axis& diff) {
  FrequencyGrid g;
  g.coordinates = Coordinates::SumDifference;
  g.first = Axis::single(pump);
  g.second = diff;
  g.cw_collapsed = true;
  g.validate();
  return g;
}

FrequencyGrid FrequencyGrid::sum_difference(const Axis& sum, const Axis& diff) {
  FrequencyGrid g{Coordinates::SumDifference, sum, diff, false};
  g.validate();
  return g;
}

FrequencyGrid FrequencyGrid::signal_idler(const Axis& signal, const Axis& idler) {
  FrequencyGrid g{Coordinates::SignalIdler, signal, idler, false};
  g.validate();
  return g;
}

static void check_axis(const Axis& a, const char* name) {
  if (a.n < 2) throw ConfigError(std::string(name) + " axis needs at least 2 points");
  if (!is_power_of_two(a.n))
    throw ConfigError(std::string(name) + " axis point count must be a power of two");
  if (!(a.span > 0.0) || !std::isfinite(a.span) || !std::isfinite(a.center))
    throw ConfigError(std::string(name) + " axis span must be positive and finite");
}

void FrequencyGrid::validate() const {
  if (cw_collapsed) {
    if (coordinates != Coordinates::SumDifference)
      throw ConfigError("a cw-collapsed grid must use sum/difference coordinates");
    if (first.n != 1) throw ConfigError("a cw-collapsed grid has a single omega+ point");
  } else {
    check_axis(first, coordinates == Coordinates::SumDifference ? "omega+" : "signal");
  }
  check_axis(second, coordinates == Coordinates::SumDifference ? "omega-" : "idler");
}

CorrelationGrid CorrelationGrid::cw(const Axis& diff) {
  CorrelationGrid g{Axis::single(0.0), diff, true};
  g.validate();
  return g;
}

CorrelationGrid CorrelationGrid::pulsed(const Axis& sum, const Axis& diff) {
  CorrelationGrid g{sum, diff, false};
  g.validate();
  return g;
}

void CorrelationGrid::validate() const {
  if (diff.n < 2 || !(diff.span > 0.0)) throw ConfigError("t- axis needs at least 2 points");
  if (std::abs(diff.center) > 1e-9 * diff.step())
    throw ConfigError("t- axis must be centered at zero");
  if (!cw_collapsed && (sum.n < 2 || !(sum.span > 0.0)))
    throw ConfigError("t+ axis needs at least 2 points");
}

}  // namespace ahc
