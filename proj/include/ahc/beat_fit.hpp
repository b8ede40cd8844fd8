#pragma once

#include <vector>

#include "ahc/psd.hpp"
#include "ahc/timetag_analysis.hpp"

namespace ahc {

struct ContaminationEntry {
  double probe_hz = 0.0;
  double observed_hz = 0.0;  // after folding into [0, Nyquist]
  double relative_db = 0.0;
};

struct BeatFitResult {
  double beat_frequency_hz = 0.0;  // from the histogram fringe fit
  double psd_centroid_hz = 0.0;
  double psd_peak_hz = 0.0;
  double psd_fwhm_hz = 0.0;
  double envelope_decay_rate = 0.0;  // 1/s
  double visibility = 0.0;
  double fringe_phase = 0.0;  // phi in 1 - V cos(w t + phi), wrapped to (-pi, pi]
  double visibility_stderr = 0.0;
  double amplitude = 0.0;
  double background = 0.0;  // accidental counts per tick difference
  double reduced_chi2 = 0.0;
  std::vector<ContaminationEntry> contamination;
};

struct FitOptions {
  double prominence = 100.0;     // peak over median PSD level
  double min_frequency_hz = 0.0;
  double ambiguity_db = 3.0;
  double fit_decay_lengths = 6.0;
  double visibility_periods = 3.0;
};

// Counts model A exp(-g|t|) (1 - V cos(w t + phi)) + B, integrated against
// the bin response of floor-quantized tick differences. B is the flat
// accidental level per tick difference.
struct FringeParams {
  double amplitude = 0.0;
  double gamma = 0.0;
  double visibility = 0.0;
  double omega = 0.0;
  double phase = 0.0;
  double background = 0.0;
};

struct FringeFit {
  FringeParams params;
  double chi2 = 0.0;
  std::size_t dof = 0;
  double visibility_stderr = 0.0;
};

std::vector<double> fringe_model(const CorrelationHistogram& hist, const FringeParams& p);

// Least-squares fit over bins with |t| <= max_abs_delay that are not flagged.
// Parameters marked fix_* are held at their initial values.
struct FringeFitRequest {
  FringeParams initial;
  double max_abs_delay = 0.0;
  double min_abs_delay = 0.0;
  bool fix_gamma = false;
  bool fix_omega = false;
  bool fix_background = false;
};
FringeFit fit_fringe(const CorrelationHistogram& hist, const FringeFitRequest& req);

BeatFitResult fit_beat(const PsdSpectrum& psd, const CorrelationHistogram& hist,
                       const std::vector<double>& probes_hz, const FitOptions& opts = {});

}  // namespace ahc
