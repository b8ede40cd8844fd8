#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ahc/event_simulator.hpp"
#include "ahc/psd.hpp"

namespace ahc {

enum class PairingRule { AllPairs, Consecutive };

const char* to_string(PairingRule r);
PairingRule pairing_rule_from_string(const std::string& s);

struct HistogramConfig {
  double bin_width = 625e-12;
  double max_delay = 1e-6;
  PairingRule rule = PairingRule::AllPairs;

  void validate() const;
};

// Bins are centered on integer multiples of bin_width, from -J to +J with
// J = floor(max_delay / bin_width). Delay = t_b - t_a.
struct CorrelationHistogram {
  std::string channel_a;
  std::string channel_b;
  std::vector<double> delay_s;
  std::vector<std::uint64_t> counts;
  std::vector<std::uint8_t> flagged;  // 1 where the bin lies inside the dead-time gap
  double bin_width = 0.0;
  double tick_seconds = 0.0;
  double dead_time = 0.0;
  double duration = 0.0;
  PairingRule rule = PairingRule::AllPairs;

  std::uint64_t total() const;
  std::size_t zero_bin() const { return counts.size() / 2; }
  bool operator==(const CorrelationHistogram&) const = default;
};

CorrelationHistogram cross_histogram(const TimeTagStream& tags, std::uint8_t ch_a, std::uint8_t ch_b,
                                     const HistogramConfig& cfg);
CorrelationHistogram cross_histogram(const TimeTagStream& tags, const std::string& ch_a,
                                     const std::string& ch_b, const HistogramConfig& cfg);

// Ordered same-channel pairs (i != j); bins with |delay| - bin_width/2 < dead_time are flagged.
CorrelationHistogram auto_histogram(const TimeTagStream& tags, std::uint8_t ch,
                                    const HistogramConfig& cfg, double dead_time = 0.0);
CorrelationHistogram auto_histogram(const TimeTagStream& tags, const std::string& ch,
                                    const HistogramConfig& cfg, double dead_time = 0.0);

// Splits the start-channel tags into `shards` blocks processed concurrently
// and adds the partial counts; identical to the sequential result.
CorrelationHistogram cross_histogram_sharded(const TimeTagStream& tags, std::uint8_t ch_a,
                                             std::uint8_t ch_b, const HistogramConfig& cfg,
                                             std::size_t shards);

// Adds partial histograms with identical binning.
CorrelationHistogram merge_histograms(const std::vector<CorrelationHistogram>& parts);

// One-sided |FT|^2 of the windowed counts, zero padded to a power of two,
// frequency axis from 0 to 1/(2 bin_width).
PsdSpectrum psd_estimate(const CorrelationHistogram& hist, Window window = Window::Hann);

double alias_frequency(double f_hz, double sample_rate_hz);

struct ResolutionReport {
  double resolution_hz = 0.0;
  double max_frequency_hz = 0.0;
  std::string note;
};

// `span_s` is the histogram half-window or the acquisition span, as configured.
ResolutionReport resolution_report(double span_s, double bin_width_s);

// Power in +-half_width bins around f compared with the local noise floor
// taken from a ring of bins [ring_inner, ring_outer) away on both sides.
struct PeakSignificance {
  double observed_hz = 0.0;
  double power = 0.0;
  double noise_power = 0.0;
  double z = 0.0;
  double snr_db = 0.0;
};
PeakSignificance peak_significance(const PsdSpectrum& psd, double f_hz, std::size_t half_width = 2,
                                   std::size_t ring_inner = 8, std::size_t ring_outer = 64);

// Point-process periodogram of one channel, |sum exp(-2 pi i f t_j)|^2 / N, at
// n_frequencies frequencies spaced 1/T around f. Each value is normalized by
// the local level (median / ln 2), which also absorbs broadband second-order
// structure such as same-detector pair correlations. A coherent rate
// oscillation shows up as a single bin far above that level.
struct LineTestResult {
  double mean_power = 0.0;
  double local_level = 0.0;
  double max_ratio = 0.0;
  double threshold = 0.0;  // 3 sigma family-wise for exponential bins
  std::size_t n_frequencies = 0;
  std::uint64_t events = 0;
  bool line_detected = false;
};
LineTestResult singles_line_test(const TimeTagStream& tags, std::uint8_t ch, double f_hz,
                                 std::size_t n_frequencies = 32);

}  // namespace ahc
