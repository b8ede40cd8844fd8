#pragma once

#include <cstddef>
#include <vector>

namespace ahc {

// Uniform axis of n points spanning [center - span/2, center + span/2].
// Point k sits at center + (k - (n-1)/2) * step, so the axis is mirror
// symmetric about its center for every n.
struct Axis {
  double center = 0.0;
  double span = 0.0;
  std::size_t n = 1;

  double step() const { return n > 1 ? span / static_cast<double>(n - 1) : 0.0; }
  double point(std::size_t k) const {
    return center + (static_cast<double>(k) - 0.5 * static_cast<double>(n - 1)) * step();
  }
  double front() const { return point(0); }
  double back() const { return point(n - 1); }
  std::vector<double> points() const;

  static Axis with_step(double center, double step, std::size_t n) {
    return Axis{center, step * static_cast<double>(n > 0 ? n - 1 : 0), n};
  }
  static Axis single(double value) { return Axis{value, 0.0, 1}; }
};

bool is_power_of_two(std::size_t n);

enum class Coordinates { SumDifference, SignalIdler };

const char* to_string(Coordinates c);
Coordinates coordinates_from_string(const char* s);

// Rows run along `first` (omega+ or omega_s), columns along `second`
// (omega- or omega_i). A cw-collapsed grid keeps a single omega+ point at the
// pump frequency and stores a vector over omega-.
struct FrequencyGrid {
  Coordinates coordinates = Coordinates::SumDifference;
  Axis first;
  Axis second;
  bool cw_collapsed = false;

  std::size_t size() const { return first.n * second.n; }

  static FrequencyGrid cw(double pump, const Axis& diff);
  static FrequencyGrid sum_difference(const Axis& sum, const Axis& diff);
  static FrequencyGrid signal_idler(const Axis& signal, const Axis& idler);

  // Throws ConfigError when an axis breaks the n >= 2 / power-of-two rules.
  void validate() const;
};

// Time grid for correlation functions. `diff` must be centered at 0.
struct CorrelationGrid {
  Axis sum;
  Axis diff;
  bool cw_collapsed = true;

  static CorrelationGrid cw(const Axis& diff);
  static CorrelationGrid pulsed(const Axis& sum, const Axis& diff);
  void validate() const;
};

}  // namespace ahc
