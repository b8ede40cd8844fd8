#pragma once

#include <string>
#include <vector>

#include "ahc/grid.hpp"
#include "ahc/psd.hpp"
#include "ahc/spectral_model.hpp"

namespace ahc {

// C and D are the beamsplitter outputs; AB is the unmixed signal/idler pair.
enum class ChannelPair { CC, DD, CD, AB };

const char* to_string(ChannelPair p);
ChannelPair channel_pair_from_string(const std::string& s);

// Rows run along t+, columns along t-. A cw surface has a single row.
// Values are |sum_k f_k K(w_k, t) dw|^2 for the unit-norm discrete JSA f.
struct G2Surface {
  ChannelPair pair = ChannelPair::CD;
  CorrelationGrid grid;
  std::vector<double> values;

  double at(std::size_t row, std::size_t col) const { return values[row * grid.diff.n + col]; }
  std::vector<double> row(std::size_t r) const;
};

struct G2Set {
  G2Surface cd, cc, dd, ab;
  const G2Surface& get(ChannelPair p) const;
};

// Throws ConfigError when the t- (or t+) spacing exceeds pi / w_max, with
// w_max the largest |w| where |f|^2 exceeds 1e-6 of its peak.
G2Surface g2_from_jsa(const JointSpectralAmplitude& jsa, ChannelPair pair,
                      const CorrelationGrid& grid);
G2Set g2_set_from_jsa(const JointSpectralAmplitude& jsa, const CorrelationGrid& grid);

// Largest |w-| (and spread of w+ about its mean) carrying 1e-6 of the peak intensity.
struct SpectralSupport {
  double omega_minus_max = 0.0;
  double omega_plus_spread = 0.0;
  double omega_plus_center = 0.0;
};
SpectralSupport spectral_support(const JointSpectralAmplitude& jsa);

// Grid with t- spacing pi/(8 w_max) (dense enough for linear interpolation
// of the delay density), half-span `decay_lengths` / gamma_est
// (gamma_est from the omega- FWHM of |f|^2), and for pulsed states a t+ axis
// centered on the arrival centroid.
CorrelationGrid default_correlation_grid(const JointSpectralAmplitude& jsa,
                                         double decay_lengths = 20.0,
                                         std::size_t n_plus = 129);

// Closed forms for a single Lorentzian pair line, with the constant
// (pi c / gamma)^2 dropped (c is the Lorentzian numerator of g).
double g2_closed_form_cw(double gamma, double omega_minus0, ChannelPair pair, double t_minus);

// First-order intensity at output C or D: the mean of the signal and idler
// intensities. Pulsed traces integrate to one photon over the time period of
// the frequency grid; cw states return a unit constant.
std::vector<double> g1_output(const JointSpectralAmplitude& jsa, char channel, const Axis& times);

// |FT|^2 along t- (both axes for pulsed surfaces), two-sided, in Hz.
PsdSpectrum psd_of_g2(const G2Surface& g2, Window window = Window::Rectangular,
                      std::size_t pad_factor = 1);

}  // namespace ahc
