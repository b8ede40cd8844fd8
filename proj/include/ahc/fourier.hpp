#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <vector>

namespace ahc {

using cplx = std::complex<double>;

// Evaluates out[j] = sum_k in[k] * exp(-i * scale * w_k * t_j) with
// w_k = w0 + k*dw and t_j = t0 + j*dt, for arbitrary (dw, dt), using
// Bluestein's convolution over FFTW. A ChirpZ owns scratch memory, so a single
// instance must not be shared between threads.
class ChirpZ {
 public:
  ChirpZ(std::size_t n_in, double dw, std::size_t n_out, double dt, double scale);
  ~ChirpZ();
  ChirpZ(const ChirpZ&) = delete;
  ChirpZ& operator=(const ChirpZ&) = delete;

  void apply(const cplx* in, std::size_t in_stride, double w0, double t0, cplx* out,
             std::size_t out_stride) const;

  std::size_t n_in() const { return n_in_; }
  std::size_t n_out() const { return n_out_; }

 private:
  struct Plans;
  std::size_t n_in_, n_out_, len_;
  double dw_, dt_, scale_;
  std::vector<cplx> chirp_in_;   // exp(-i beta k^2 / 2)
  std::vector<cplx> chirp_out_;  // exp(-i beta j^2 / 2)
  std::vector<cplx> kernel_hat_;
  std::unique_ptr<Plans> plans_;
};

// In-place unnormalized DFT, sign -1 (forward) or +1 (backward).
void fft_inplace(std::vector<cplx>& data, int sign);
// Row-major 2D variant.
void fft2_inplace(std::vector<cplx>& data, std::size_t rows, std::size_t cols, int sign);

std::size_t next_power_of_two(std::size_t n);

}  // namespace ahc
