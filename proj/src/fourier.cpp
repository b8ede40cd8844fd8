#include "ahc/fourier.hpp"

#include <fftw3.h>

#include <cmath>

namespace ahc {

namespace {

fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

struct Buffer {
  explicit Buffer(std::size_t n) : n(n), data(static_cast<cplx*>(fftw_malloc(sizeof(cplx) * n))) {}
  ~Buffer() { fftw_free(data); }
  Buffer(const Buffer&) = delete;
  Buffer& operator=(const Buffer&) = delete;
  std::size_t n;
  cplx* data;
};

cplx unit_phasor(double angle) { return {std::cos(angle), std::sin(angle)}; }

}  // namespace

std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

struct ChirpZ::Plans {
  explicit Plans(std::size_t len) : work(len) {
    forward = fftw_plan_dft_1d(static_cast<int>(len), as_fftw(work.data), as_fftw(work.data),
                               FFTW_FORWARD, FFTW_ESTIMATE);
    backward = fftw_plan_dft_1d(static_cast<int>(len), as_fftw(work.data), as_fftw(work.data),
                                FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ~Plans() {
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
  }
  Buffer work;
  fftw_plan forward;
  fftw_plan backward;
};

ChirpZ::ChirpZ(std::size_t n_in, double dw, std::size_t n_out, double dt, double scale)
    : n_in_(n_in),
      n_out_(n_out),
      len_(next_power_of_two(n_in + n_out - 1)),
      dw_(dw),
      dt_(dt),
      scale_(scale),
      plans_(std::make_unique<Plans>(next_power_of_two(n_in + n_out - 1))) {
  const double beta = scale * dw * dt;
  chirp_in_.resize(n_in);
  for (std::size_t k = 0; k < n_in; ++k) {
    const double kk = static_cast<double>(k);
    chirp_in_[k] = unit_phasor(-0.5 * beta * kk * kk);
  }
  chirp_out_.resize(n_out);
  for (std::size_t j = 0; j < n_out; ++j) {
    const double jj = static_cast<double>(j);
    chirp_out_[j] = unit_phasor(-0.5 * beta * jj * jj);
  }
  cplx* w = plans_->work.data;
  for (std::size_t i = 0; i < len_; ++i) w[i] = 0.0;
  for (std::size_t l = 0; l < n_out; ++l) {
    const double ll = static_cast<double>(l);
    w[l] = unit_phasor(0.5 * beta * ll * ll);
  }
  for (std::size_t l = 1; l < n_in; ++l) {
    const double ll = static_cast<double>(l);
    w[len_ - l] = unit_phasor(0.5 * beta * ll * ll);
  }
  fftw_execute(plans_->forward);
  kernel_hat_.assign(w, w + len_);
}

ChirpZ::~ChirpZ() = default;

void ChirpZ::apply(const cplx* in, std::size_t in_stride, double w0, double t0, cplx* out,
                   std::size_t out_stride) const {
  cplx* w = plans_->work.data;
  for (std::size_t k = 0; k < n_in_; ++k) {
    const double shift = -scale_ * static_cast<double>(k) * dw_ * t0;
    w[k] = in[k * in_stride] * unit_phasor(shift) * chirp_in_[k];
  }
  for (std::size_t k = n_in_; k < len_; ++k) w[k] = 0.0;
  fftw_execute(plans_->forward);
  for (std::size_t i = 0; i < len_; ++i) w[i] *= kernel_hat_[i];
  fftw_execute(plans_->backward);
  const double inv_len = 1.0 / static_cast<double>(len_);
  for (std::size_t j = 0; j < n_out_; ++j) {
    const double t = t0 + static_cast<double>(j) * dt_;
    out[j * out_stride] = w[j] * inv_len * chirp_out_[j] * unit_phasor(-scale_ * w0 * t);
  }
}

void fft_inplace(std::vector<cplx>& data, int sign) {
  if (data.empty()) return;
  Buffer buf(data.size());
  fftw_plan p = fftw_plan_dft_1d(static_cast<int>(data.size()), as_fftw(buf.data),
                                 as_fftw(buf.data), sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                                 FFTW_ESTIMATE);
  std::copy(data.begin(), data.end(), buf.data);
  fftw_execute(p);
  std::copy(buf.data, buf.data + data.size(), data.begin());
  fftw_destroy_plan(p);
}

void fft2_inplace(std::vector<cplx>& data, std::size_t rows, std::size_t cols, int sign) {
  if (data.empty()) return;
  Buffer buf(data.size());
  fftw_plan p = fftw_plan_dft_2d(static_cast<int>(rows), static_cast<int>(cols),
                                 as_fftw(buf.data), as_fftw(buf.data),
                                 sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE);
  std::copy(data.begin(), data.end(), buf.data);
  fftw_execute(p);
  std::copy(buf.data, buf.data + data.size(), data.begin());
  fftw_destroy_plan(p);
}

}  // namespace ahc
