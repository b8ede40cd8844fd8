#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ahc/correlation_engine.hpp"

namespace ahc {

struct SourceConfig {
  double pair_rate = 2e4;  // pairs per second
  double duration = 1.0;   // seconds
  double visibility = 1.0; // V0, scales the oscillating part of every G2
  std::uint64_t seed = 1;

  void validate() const;
};

struct DetectorModel {
  double efficiency = 1.0;
  double dead_time = 0.0;
  double jitter_sigma = 0.0;
  double clock_tick = 625e-12;
  double dark_rate = 0.0;

  void validate() const;
};

inline constexpr std::uint8_t kChannelC = 0;
inline constexpr std::uint8_t kChannelD = 1;

struct PhotonEvent {
  double time = 0.0;
  std::uint8_t channel = 0;
};

enum class Outcome { CD = 0, CC = 1, DD = 2 };

struct PairSample {
  std::vector<PhotonEvent> events;       // time ordered
  std::array<std::uint64_t, 3> counts{}; // pairs per outcome (CD, CC, DD)
  std::array<double, 3> probabilities{};
};

// Inverse-CDF sampler over a piecewise-linear density tabulated on a uniform grid.
class TabulatedSampler {
 public:
  TabulatedSampler(const Axis& x, std::vector<double> density);
  double sample(double u) const;  // u in [0, 1)
  double total_mass() const { return cdf_.back(); }

 private:
  Axis x_;
  std::vector<double> p_;
  std::vector<double> cdf_;
};

// Emission times are Poisson; each pair picks an outcome with probability
// proportional to the integral of its (visibility-mixed) G2 and a delay from
// that G2. Photon times are T + t+/2 +- t-/2 (t+ = 0 for cw surfaces).
PairSample sample_pairs(const G2Set& g2, const SourceConfig& src);

// Densities after mixing with visibility V0:
//   CD' = AB_even/2 + V0 (CD - AB_even/2),  CC' = AB_even/4 + V0 (CC - AB_even/4)
// where AB_even is AB averaged with its mirror in t-.
G2Set mix_visibility(const G2Set& g2, double visibility);

struct TagRecord {
  std::uint8_t channel = 0;
  std::uint64_t tick = 0;
  bool operator==(const TagRecord&) const = default;
};

inline constexpr int kTagFormatVersion = 1;

struct TagHeader {
  int version = kTagFormatVersion;
  double tick_seconds = 625e-12;
  std::vector<std::string> channel_names{"C", "D"};
  double start_time = 0.0;
  double duration = 0.0;
  std::uint64_t seed = 0;
  std::string config_digest;
};

struct TimeTagStream {
  TagHeader header;
  std::vector<TagRecord> records;

  std::uint8_t channel_id(const std::string& name) const;
  std::uint64_t count(std::uint8_t channel) const;
};

// Efficiency, jitter, dark counts, non-paralyzable dead time and clock floor
// quantization. Events outside [0, duration) after jitter are dropped. Dead
// time is applied on quantized ticks with a gap of ceil(dead_time / tick).
TimeTagStream apply_detector_model(const std::vector<PhotonEvent>& events,
                                   const DetectorModel& det_c, const DetectorModel& det_d,
                                   std::uint64_t seed, double duration);

}  // namespace ahc
