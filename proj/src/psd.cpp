#include "ahc/psd.hpp"

#include <algorithm>
#include <cmath>

#include "ahc/errors.hpp"
#include "ahc/fourier.hpp"
#include "ahc/units.hpp"

namespace ahc {

const char* to_string(Window w) { return w == Window::Hann ? "hann" : "rectangular"; }

Window window_from_string(const std::string& s) {
  if (s == "hann") return Window::Hann;
  if (s == "rectangular" || s == "rect") return Window::Rectangular;
  throw ConfigError("unknown window '" + s + "'");
}

std::vector<double> window_weights(Window w, std::size_t n) {
  std::vector<double> out(n, 1.0);
  if (w == Window::Hann && n > 1) {
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      out[k] = 0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(k) / static_cast<double>(n - 1));
      sum += out[k];
    }
    const double mean = sum / static_cast<double>(n);
    for (double& v : out) v /= mean;
  }
  return out;
}

std::size_t PsdSpectrum::nearest_bin(double f_hz) const {
  const auto it = std::lower_bound(frequency_hz.begin(), frequency_hz.end(), f_hz);
  if (it == frequency_hz.begin()) return 0;
  if (it == frequency_hz.end()) return frequency_hz.size() - 1;
  const std::size_t k = static_cast<std::size_t>(it - frequency_hz.begin());
  return (f_hz - frequency_hz[k - 1] <= frequency_hz[k] - f_hz) ? k - 1 : k;
}

PsdSpectrum sampled_psd(const std::vector<double>& x, double dt, Window window, std::size_t nfft,
                        bool one_sided) {
  if (nfft < x.size()) throw ConfigError("FFT length shorter than the input");
  const std::vector<double> w = window_weights(window, x.size());
  std::vector<cplx> buf(nfft, 0.0);
  for (std::size_t k = 0; k < x.size(); ++k) buf[k] = w[k] * x[k];
  fft_inplace(buf, -1);
  PsdSpectrum out;
  out.window = window;
  out.one_sided = one_sided;
  out.normalization = "|dt * sum w x exp(-2 pi i f t)|^2, window scaled to unit mean";
  const double df = 1.0 / (static_cast<double>(nfft) * dt);
  if (one_sided) {
    const std::size_t kmax = nfft / 2;
    for (std::size_t k = 0; k <= kmax; ++k) {
      out.frequency_hz.push_back(static_cast<double>(k) * df);
      out.values.push_back(std::norm(buf[k] * dt));
    }
  } else {
    const long lo = -static_cast<long>(nfft / 2);
    const long hi = static_cast<long>(nfft) + lo - 1;
    for (long k = lo; k <= hi; ++k) {
      const std::size_t idx = static_cast<std::size_t>((k + static_cast<long>(nfft)) % static_cast<long>(nfft));
      out.frequency_hz.push_back(static_cast<double>(k) * df);
      out.values.push_back(std::norm(buf[idx] * dt));
    }
  }
  return out;
}

}  // namespace ahc
