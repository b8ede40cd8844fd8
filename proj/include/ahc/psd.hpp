#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace ahc {

enum class Window { Rectangular, Hann };

const char* to_string(Window w);
Window window_from_string(const std::string& s);

// Window weights scaled to unit mean, so a constant input keeps its level.
std::vector<double> window_weights(Window w, std::size_t n);

// |FT|^2 spectrum. For two-dimensional spectra `frequency2_hz` holds the
// column axis and values are row-major over (frequency_hz, frequency2_hz).
struct PsdSpectrum {
  std::vector<double> frequency_hz;
  std::vector<double> frequency2_hz;
  std::vector<double> values;
  Window window = Window::Rectangular;
  std::string normalization;
  bool one_sided = false;

  double bin_spacing_hz() const {
    return frequency_hz.size() > 1 ? frequency_hz[1] - frequency_hz[0] : 0.0;
  }
  std::size_t nearest_bin(double f_hz) const;
};

// |dt * sum_n w_n x_n exp(-2 pi i f t_n)|^2 on the FFT grid of length nfft
// (zero padded, nfft >= x.size()). Two-sided output is ordered from the most
// negative frequency upward.
PsdSpectrum sampled_psd(const std::vector<double>& x, double dt, Window window, std::size_t nfft,
                        bool one_sided);

}  // namespace ahc
