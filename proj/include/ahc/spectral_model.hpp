#pragma once

#include <complex>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

#include "ahc/fourier.hpp"
#include "ahc/grid.hpp"
#include "ahc/units.hpp"

namespace ahc {

// Lorentzian mode comb. All frequencies angular, relative to the reference
// frequency of the model (signal/idler offsets from omega_ref).
struct ModeCombSpec {
  double center = 0.0;
  double linewidth = 0.0;  // FWHM
  double fsr = 0.0;
  int m_min = 0;
  int m_max = 0;

  void validate() const;
  double mode_frequency(int m) const { return center + m * fsr; }
};

struct MonochromaticPump {
  double frequency = 0.0;  // offset of omega_p from 2*omega_ref
};

// alpha(w+) = exp(-(w+ - center)^2 / (2 sigma^2)).
struct GaussianPulsePump {
  double center = 0.0;
  double sigma = 0.0;
};

using PumpSpectrum = std::variant<MonochromaticPump, GaussianPulsePump>;

double pump_center(const PumpSpectrum& pump);

struct FlatPhaseMatching {};

// Gaussian in omega- = omega_s - omega_i. `fwhm` is the intensity FWHM along
// the signal frequency at fixed pump, i.e. 2*fwhm along omega-.
struct GaussianPhaseMatching {
  double center = 0.0;
  double fwhm = angular(150e9);
};

using PhaseMatchingEnvelope = std::variant<FlatPhaseMatching, GaussianPhaseMatching>;

cplx phase_matching(const PhaseMatchingEnvelope& pm, double omega_minus);

struct JsaMetadata {
  std::string sign_convention;
  std::optional<double> transmitted_fraction;
  double truncation_loss_signal = 0.0;
  double truncation_loss_idler = 0.0;
  std::vector<std::string> warnings;
  nlohmann::json provenance = nlohmann::json::object();
};

struct JointSpectralAmplitude {
  FrequencyGrid grid;
  std::vector<cplx> values;  // row-major over (first, second)
  JsaMetadata meta;

  cplx at(std::size_t row, std::size_t col) const { return values[row * grid.second.n + col]; }
  double norm() const;
  void normalize();
};

// With the default convention f = f_S - f_A, f_A is odd in omega-.
struct SymmetryParts {
  JointSpectralAmplitude symmetric;
  JointSpectralAmplitude antisymmetric;
};

// Exact sum over m in [m_min, m_max] of sqrt(g/2pi) / (g/2 + i(w0 + m FSR - w)).
cplx cavity_comb_amplitude(double omega, const ModeCombSpec& spec);

// Same sum, with modes far from omega replaced by Euler-Maclaurin tails.
// Agrees with the direct sum to ~1e-13 relative and costs O(1) per call.
cplx cavity_comb_amplitude_fast(double omega, const ModeCombSpec& spec);

// Comb amplitude scaled so an isolated on-resonance mode transmits 1.
cplx filter_transmission(double omega, const ModeCombSpec& filter);

JointSpectralAmplitude build_cespdc_jsa(const PumpSpectrum& pump, const ModeCombSpec& signal,
                                        const ModeCombSpec& idler,
                                        const PhaseMatchingEnvelope& pm,
                                        const FrequencyGrid& grid);

JointSpectralAmplitude apply_fp_filters(const JointSpectralAmplitude& jsa,
                                        const ModeCombSpec& filter_s,
                                        const ModeCombSpec& filter_i);

// Normalized g(w-) proportional to 1/(g^2 + (w0 - w-)^2) on a cw-collapsed grid.
JointSpectralAmplitude single_mode_lorentzian_g(const Axis& omega_minus_axis, double gamma,
                                                double omega_minus0, double pump = 0.0);

// Superposition of Lorentzian pair lines, each weighted by the square root of
// its peak intensity relative to the others.
struct LorentzianLine {
  double omega_minus0 = 0.0;
  double relative_intensity = 1.0;
};
JointSpectralAmplitude lorentzian_lines(const Axis& omega_minus_axis, double gamma,
                                        const std::vector<LorentzianLine>& lines,
                                        double pump = 0.0);

SymmetryParts decompose_symmetry(const JointSpectralAmplitude& jsa);

// Swaps the two axes (and their roles). Signal/idler coordinates only.
JointSpectralAmplitude transpose(const JointSpectralAmplitude& jsa);

// Joint temporal amplitude. Sum/difference grids use the kernel
// exp(-i(w+ t+ + w- t-)/2), signal/idler grids exp(-i(ws ts + wi ti)).
struct TemporalGrid {
  Coordinates coordinates = Coordinates::SumDifference;
  Axis first;
  Axis second;
  bool cw_collapsed = false;
};

struct JointTemporalAmplitude {
  TemporalGrid grid;
  std::vector<cplx> values;
};

// Time grid on which jta_from_jsa / jsa_from_jta form an exact DFT pair.
TemporalGrid natural_temporal_grid(const FrequencyGrid& grid);
JointTemporalAmplitude jta_from_jsa(const JointSpectralAmplitude& jsa, const TemporalGrid& tgrid);
JointSpectralAmplitude jsa_from_jta(const JointTemporalAmplitude& jta, const FrequencyGrid& grid);

// omega- axis centered at 0 with span max(10|w0|, 100 gamma) and 2^14 points.
Axis default_cw_axis(double omega_minus0, double gamma);

// Mode range covering +-3 phase-matching FWHM around the mode nearest the
// phase-matching peak, always containing m = 0.
std::pair<int, int> default_mode_range(const ModeCombSpec& comb, const PhaseMatchingEnvelope& pm,
                                       double pump_center, bool is_signal);

// Fraction of the phase-matching-weighted comb power outside [m_min, m_max].
double truncation_loss(const ModeCombSpec& comb, const PhaseMatchingEnvelope& pm,
                       double pump_center, bool is_signal);

// Frequency widths of |g|^2 for a single Lorentzian pair line.
double lorentzian_pair_fwhm_difference(double gamma);  // 2 g sqrt(sqrt2 - 1)
double lorentzian_pair_fwhm_signal(double gamma);      // g sqrt(sqrt2 - 1)

// Intensity FWHM of the signal-photon marginal, measured on the grid.
double signal_marginal_fwhm(const JointSpectralAmplitude& jsa);

// One mode pair of a cw-pumped comb source, found by scanning a window of
// omega- around every signal mode.
struct ModePairPeak {
  int signal_mode = 0;
  int idler_mode = 0;
  double omega_minus = 0.0;  // peak position
  double peak_intensity = 0.0;
  double power = 0.0;        // integral of |f|^2 d omega- over the window
};

struct ModePairScanOptions {
  std::size_t points_per_window = 513;
  const ModeCombSpec* filter_s = nullptr;
  const ModeCombSpec* filter_i = nullptr;
};

std::vector<ModePairPeak> scan_mode_pairs(double pump, const ModeCombSpec& signal,
                                          const ModeCombSpec& idler,
                                          const PhaseMatchingEnvelope& pm,
                                          const ModePairScanOptions& opts = {});

// A cluster is seeded by a local maximum within `cluster_db` of the strongest
// pair; neighbouring pairs join while within `mode_db` of the seed.
struct ModeCluster {
  std::vector<ModePairPeak> members;
  double max_intensity = 0.0;
};

std::vector<ModeCluster> cluster_mode_pairs(const std::vector<ModePairPeak>& peaks,
                                            double cluster_db = -7.0, double mode_db = -5.0);

nlohmann::json to_json(const ModeCombSpec& spec);
nlohmann::json to_json(const PumpSpectrum& pump);
nlohmann::json to_json(const PhaseMatchingEnvelope& pm);

}  // namespace ahc
