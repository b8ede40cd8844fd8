#pragma once

#include <cstddef>
#include <vector>

#include "json.hpp"

#include "ahc/spectral_model.hpp"

namespace ahc {

// Squared singular values of the grid-normalized JSA matrix, normalized to 1.
struct SchmidtSpectrum {
  std::vector<double> coefficients;  // descending
  double entropy_nat = 0.0;
  double entropy_bits = 0.0;
  double schmidt_number = 1.0;
};

SchmidtSpectrum schmidt_from_singular_values(const std::vector<double>& singular_values);

// Signal/idler grids only. A cw-collapsed JSA is rejected.
SchmidtSpectrum schmidt_decompose(const JointSpectralAmplitude& jsa);

// Pulsed source with one Lorentzian mode per photon (optionally more), used
// for the entropy-versus-pump-bandwidth sweep. Angular units.
struct PulsedSourceModel {
  double linewidth = kTwoPi * 7e6;
  double omega_minus0 = kTwoPi * 250e6;
  double fsr_signal = kTwoPi * 503.5e6;
  double fsr_idler = kTwoPi * 500e6;
  int mode_half_range = 0;
  PhaseMatchingEnvelope phase_matching = FlatPhaseMatching{};
  bool include_filters = false;
  double filter_linewidth = kTwoPi * 97e6;
  double filter_fsr = kTwoPi * 39e9;
  double span_linewidths = 20.0;    // per-axis span beyond the outermost modes
  double points_per_fwhm = 8.0;     // along the narrower of gamma and the pump FWHM
  double resolution_scale = 1.0;    // < 1 refines the grid step
};

FrequencyGrid pulsed_model_grid(const PulsedSourceModel& model, double sigma_p);
JointSpectralAmplitude pulsed_model_jsa(const PulsedSourceModel& model, double sigma_p);

struct SweepRow {
  double sigma_p = 0.0;  // angular
  SchmidtSpectrum spectrum;
  std::size_t grid_points = 0;
};

// Rows sorted by sigma_p. Decompositions run concurrently.
std::vector<SweepRow> entropy_vs_pump_sweep(std::vector<double> sigmas,
                                            const PulsedSourceModel& model);

// Log base whose entropies sit closest (mean relative error) to `reference`.
struct BaseMatch {
  const char* base = "nat";
  std::vector<double> entropies;
  std::vector<double> relative_errors;
  double mean_relative_error = 0.0;
};
BaseMatch best_matching_base(const std::vector<SweepRow>& rows,
                             const std::vector<double>& reference);

nlohmann::json to_json(const SchmidtSpectrum& s, std::size_t max_coefficients = 16);

}  // namespace ahc
