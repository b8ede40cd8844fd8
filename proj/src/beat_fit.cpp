#include "ahc/beat_fit.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/NonLinearOptimization>

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "ahc/errors.hpp"
#include "ahc/numeric.hpp"
#include "ahc/units.hpp"

namespace ahc {

namespace {

constexpr std::array<double, 8> kGaussNodes{-0.9602898564975363, -0.7966664774136267,
                                            -0.5255324099163290, -0.1834346424956498,
                                            0.1834346424956498,  0.5255324099163290,
                                            0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kGaussWeights{0.1012285362903763, 0.2223810344533745,
                                              0.3137066458778873, 0.3626837833783620,
                                              0.3626837833783620, 0.3137066458778873,
                                              0.2223810344533745, 0.1012285362903763};

// Sample delays and weights reproducing the triangular response of
// floor-quantized tick differences, per histogram bin.
struct BinQuadrature {
  std::vector<std::size_t> bins;
  std::vector<std::size_t> offsets;  // into t/w, size bins+1
  std::vector<double> t, w;
  std::vector<double> differences;  // tick differences per bin
};

BinQuadrature bin_quadrature(const CorrelationHistogram& h, double min_abs, double max_abs) {
  BinQuadrature q;
  const double tick = h.tick_seconds;
  const double ratio = tick / h.bin_width;
  const long half = static_cast<long>(h.counts.size() / 2);
  q.offsets.push_back(0);
  for (std::size_t j = 0; j < h.counts.size(); ++j) {
    if (h.flagged[j]) continue;
    const double d = std::abs(h.delay_s[j]);
    if (d > max_abs || d < min_abs) continue;
    const long bin = static_cast<long>(j) - half;
    const long lo = static_cast<long>(std::ceil((static_cast<double>(bin) - 0.5) / ratio - 1e-9));
    const long hi = static_cast<long>(std::floor((static_cast<double>(bin) + 0.5) / ratio + 1e-9));
    double nd = 0.0;
    for (long dk = lo; dk <= hi; ++dk) {
      if (static_cast<long>(std::floor(static_cast<double>(dk) * ratio + 0.5)) != bin) continue;
      nd += 1.0;
      for (int side = 0; side < 2; ++side) {
        for (std::size_t g = 0; g < kGaussNodes.size(); ++g) {
          const double s = side == 0 ? 0.5 * (kGaussNodes[g] - 1.0) : 0.5 * (kGaussNodes[g] + 1.0);
          q.t.push_back((static_cast<double>(dk) + s) * tick);
          q.w.push_back(0.5 * kGaussWeights[g] * (1.0 - std::abs(s)));
        }
      }
    }
    q.bins.push_back(j);
    q.offsets.push_back(q.t.size());
    q.differences.push_back(nd);
  }
  return q;
}

double shape(double t, const FringeParams& p) {
  return std::exp(-p.gamma * std::abs(t)) * (1.0 - p.visibility * std::cos(p.omega * t + p.phase));
}

std::vector<double> evaluate(const BinQuadrature& q, const FringeParams& p) {
  std::vector<double> out(q.bins.size());
  for (std::size_t b = 0; b < q.bins.size(); ++b) {
    double s = 0.0;
    for (std::size_t i = q.offsets[b]; i < q.offsets[b + 1]; ++i) s += q.w[i] * shape(q.t[i], p);
    out[b] = p.amplitude * s + p.background * q.differences[b];
  }
  return out;
}

double wrap_phase(double phi) {
  phi = std::remainder(phi, kTwoPi);
  if (phi <= -std::numbers::pi) phi += kTwoPi;
  return phi;
}

struct Residuals {
  using Scalar = double;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;

  const BinQuadrature* q;
  const std::vector<double>* counts;
  std::vector<double> sigma;
  FringeParams init;   // values of held parameters
  FringeParams scale;  // free parameters are fitted as multiples of these
  std::array<bool, 6> free;

  int inputs() const { return static_cast<int>(std::count(free.begin(), free.end(), true)); }
  int values() const { return static_cast<int>(q->bins.size()); }

  FringeParams unpack(const Eigen::VectorXd& x) const {
    std::array<double, 6> v{init.amplitude / scale.amplitude, init.gamma / scale.gamma,
                            init.visibility, init.omega / scale.omega, init.phase,
                            init.background / scale.background};
    int k = 0;
    for (int i = 0; i < 6; ++i)
      if (free[i]) v[i] = x[k++];
    return {v[0] * scale.amplitude, v[1] * scale.gamma, v[2], v[3] * scale.omega, v[4],
            v[5] * scale.background};
  }
  Eigen::VectorXd pack(const FringeParams& p) const {
    const std::array<double, 6> v{p.amplitude / scale.amplitude, p.gamma / scale.gamma, p.visibility,
                                  p.omega / scale.omega, p.phase, p.background / scale.background};
    Eigen::VectorXd x(inputs());
    int k = 0;
    for (int i = 0; i < 6; ++i)
      if (free[i]) x[k++] = v[i];
    return x;
  }
  int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& f) const {
    const std::vector<double> m = evaluate(*q, unpack(x));
    for (std::size_t b = 0; b < m.size(); ++b) f[static_cast<long>(b)] = ((*counts)[b] - m[b]) / sigma[b];
    return 0;
  }
  // Central differences with a step floor, so parameters near zero keep a
  // usable derivative.
  int df(const Eigen::VectorXd& x, Eigen::MatrixXd& jac) const {
    Eigen::VectorXd xp = x, xm = x, fp(values()), fm(values());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double h = 1e-6 * std::max(std::abs(x[i]), 1.0);
      xp[i] = x[i] + h;
      xm[i] = x[i] - h;
      (*this)(xp, fp);
      (*this)(xm, fm);
      jac.col(i) = (fp - fm) / (2.0 * h);
      xp[i] = xm[i] = x[i];
    }
    return 0;
  }
};

}  // namespace

std::vector<double> fringe_model(const CorrelationHistogram& hist, const FringeParams& p) {
  const BinQuadrature q = bin_quadrature(hist, 0.0, std::numeric_limits<double>::infinity());
  std::vector<double> out(hist.counts.size(), 0.0);
  const std::vector<double> m = evaluate(q, p);
  for (std::size_t b = 0; b < q.bins.size(); ++b) out[q.bins[b]] = m[b];
  return out;
}

FringeFit fit_fringe(const CorrelationHistogram& hist, const FringeFitRequest& req) {
  const BinQuadrature q = bin_quadrature(hist, req.min_abs_delay, req.max_abs_delay);
  const std::size_t nfree =
      6 - (req.fix_gamma ? 1 : 0) - (req.fix_omega ? 1 : 0) - (req.fix_background ? 1 : 0);
  if (q.bins.size() <= nfree + 1) throw FitError("too few usable histogram bins for the fringe fit");
  std::vector<double> counts(q.bins.size());
  for (std::size_t b = 0; b < q.bins.size(); ++b) counts[b] = static_cast<double>(hist.counts[q.bins[b]]);

  Residuals r;
  r.q = &q;
  r.counts = &counts;
  r.init = req.initial;
  r.scale = req.initial;
  if (!(r.scale.amplitude > 0.0)) r.scale.amplitude = 1.0;
  if (!(r.scale.background > 0.0)) r.scale.background = 1.0;
  r.free = {true, !req.fix_gamma, true, !req.fix_omega, true, !req.fix_background};
  r.sigma.resize(counts.size());
  for (std::size_t b = 0; b < counts.size(); ++b) r.sigma[b] = std::sqrt(std::max(counts[b], 1.0));

  FringeParams best = req.initial;
  Eigen::VectorXd x = r.pack(best);
  for (int pass = 0; pass < 2; ++pass) {
    Eigen::LevenbergMarquardt<Residuals> lm(r);
    lm.parameters.maxfev = 4000;
    lm.minimize(x);
    best = r.unpack(x);
    const std::vector<double> m = evaluate(q, best);
    for (std::size_t b = 0; b < counts.size(); ++b) r.sigma[b] = std::sqrt(std::max(m[b], 1.0));
  }
  FringeFit out;
  Eigen::VectorXd f(static_cast<long>(counts.size()));
  r(x, f);
  out.chi2 = f.squaredNorm();
  out.dof = counts.size() - nfree;

  Eigen::MatrixXd J(static_cast<long>(counts.size()), r.inputs());
  r.df(x, J);
  const Eigen::MatrixXd cov = (J.transpose() * J).inverse();
  const int vindex = 1 + (req.fix_gamma ? 0 : 1);
  out.visibility_stderr = std::sqrt(std::max(0.0, cov(vindex, vindex)));

  if (best.omega < 0.0) {
    best.omega = -best.omega;
    best.phase = -best.phase;
  }
  if (best.visibility < 0.0) {
    best.visibility = -best.visibility;
    best.phase += std::numbers::pi;
  }
  best.phase = wrap_phase(best.phase);
  out.params = best;
  return out;
}

namespace {

struct PeakSearch {
  std::size_t peak = 0;
  std::size_t start = 0;
};

PeakSearch locate_dominant_peak(const PsdSpectrum& psd, const FitOptions& opts) {
  const std::vector<double>& p = psd.values;
  const std::size_t n = p.size();
  if (n < 8) throw FitError("spectrum too short");
  std::vector<double> smooth(n);
  for (std::size_t k = 0; k < n; ++k) {
    double s = 0.0;
    int c = 0;
    for (long d = -2; d <= 2; ++d) {
      const long i = static_cast<long>(k) + d;
      if (i >= 0 && i < static_cast<long>(n)) {
        s += p[static_cast<std::size_t>(i)];
        ++c;
      }
    }
    smooth[k] = s / c;
  }
  std::size_t k = std::max<std::size_t>(1, psd.nearest_bin(opts.min_frequency_hz));
  while (k + 1 < n && smooth[k + 1] < smooth[k]) ++k;
  if (k + 1 >= n) throw FitError("no spectral peak beyond the dc lobe");
  PeakSearch s;
  s.start = k;
  s.peak = k + static_cast<std::size_t>(std::max_element(p.begin() + static_cast<long>(k), p.end()) -
                                        (p.begin() + static_cast<long>(k)));
  std::vector<double> rest(p.begin() + static_cast<long>(k), p.end());
  std::nth_element(rest.begin(), rest.begin() + static_cast<long>(rest.size() / 2), rest.end());
  const double floor_level = rest[rest.size() / 2];
  if (!(p[s.peak] > opts.prominence * floor_level))
    throw FitError("no dominant peak above the configured prominence");
  return s;
}

}  // namespace

BeatFitResult fit_beat(const PsdSpectrum& psd, const CorrelationHistogram& hist,
                       const std::vector<double>& probes_hz, const FitOptions& opts) {
  if (!psd.one_sided) throw ConfigError("beat fitting expects a one-sided spectrum");
  const std::vector<double>& f = psd.frequency_hz;
  const std::vector<double>& p = psd.values;
  const PeakSearch s = locate_dominant_peak(psd, opts);
  const std::size_t k = s.peak;
  BeatFitResult out;

  double top = p[k];
  out.psd_peak_hz = f[k];
  if (k > 0 && k + 1 < p.size()) {
    const Vertex v = parabolic_vertex(p[k - 1], p[k], p[k + 1]);
    top = v.value;
    out.psd_peak_hz = f[k] + v.offset * psd.bin_spacing_hz();
  }
  const Crossings c = level_crossings(f, p, k, 0.5 * top);
  if (!c.found) throw FitError("peak half-power crossings not found");
  out.psd_fwhm_hz = c.right - c.left;
  double wsum = 0.0, fsum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (f[i] < c.left || f[i] > c.right) continue;
    wsum += p[i];
    fsum += p[i] * f[i];
  }
  out.psd_centroid_hz = fsum / wsum;

  const double guard_lo = c.left - out.psd_fwhm_hz, guard_hi = c.right + out.psd_fwhm_hz;
  const double rival_level = top * std::pow(10.0, -opts.ambiguity_db / 10.0);
  std::vector<double> candidates{out.psd_peak_hz};
  for (std::size_t i = std::max<std::size_t>(s.start, 1); i + 1 < p.size(); ++i) {
    if (f[i] >= guard_lo && f[i] <= guard_hi) continue;
    if (p[i] >= rival_level && p[i] >= p[i - 1] && p[i] >= p[i + 1]) candidates.push_back(f[i]);
  }
  if (candidates.size() > 1) {
    std::ostringstream msg;
    msg << "spectral peaks within " << opts.ambiguity_db << " dB at";
    for (double x : candidates) msg << ' ' << x << " Hz";
    throw AmbiguityError(msg.str(), candidates);
  }

  const double omega0 = kTwoPi * out.psd_centroid_hz;
  const double gamma0 = kTwoPi * out.psd_fwhm_hz / (2.0 * std::sqrt(std::numbers::sqrt2 - 1.0));
  const double max_delay = hist.delay_s.back();
  double peak_count = 1.0;
  for (std::size_t j = 0; j < hist.counts.size(); ++j)
    if (!hist.flagged[j]) peak_count = std::max(peak_count, static_cast<double>(hist.counts[j]));
  const std::size_t dks = static_cast<std::size_t>(std::max(1.0, std::round(hist.bin_width / hist.tick_seconds)));

  double tail_sum = 0.0, tail_n = 0.0;
  for (std::size_t j = 0; j < hist.counts.size(); ++j) {
    if (hist.flagged[j] || std::abs(hist.delay_s[j]) < 0.8 * max_delay) continue;
    tail_sum += static_cast<double>(hist.counts[j]);
    tail_n += hist.bin_width / hist.tick_seconds;
  }
  const double background0 = tail_n > 0.0 ? tail_sum / tail_n : 0.0;

  FringeFit best;
  bool have = false;
  for (double phi : {0.0, std::numbers::pi}) {
    FringeFitRequest req;
    req.initial = {std::max(1.0, peak_count / static_cast<double>(dks) - background0), gamma0, 0.8,
                   omega0, phi, background0};
    req.max_abs_delay = std::min(max_delay, opts.fit_decay_lengths / gamma0);
    const FringeFit fit = fit_fringe(hist, req);
    if (!have || fit.chi2 < best.chi2) {
      best = fit;
      have = true;
    }
  }
  out.beat_frequency_hz = hertz(best.params.omega);
  out.envelope_decay_rate = best.params.gamma;
  out.fringe_phase = best.params.phase;
  out.amplitude = best.params.amplitude;
  out.background = best.params.background;
  out.reduced_chi2 = best.chi2 / static_cast<double>(std::max<std::size_t>(best.dof, 1));

  double first_usable = 0.0;
  for (std::size_t j = hist.zero_bin(); j < hist.counts.size(); ++j)
    if (!hist.flagged[j]) {
      first_usable = hist.delay_s[j];
      break;
    }
  FringeFitRequest vis;
  vis.initial = best.params;
  vis.fix_gamma = true;
  vis.fix_omega = true;
  vis.fix_background = true;
  vis.min_abs_delay = first_usable;
  vis.max_abs_delay = std::min(max_delay, first_usable + opts.visibility_periods * kTwoPi /
                                                             best.params.omega);
  const FringeFit vfit = fit_fringe(hist, vis);
  out.visibility = vfit.params.visibility;
  out.visibility_stderr = vfit.visibility_stderr;

  auto band_power = [&](std::size_t centre) {
    double sum = 0.0;
    for (long i = static_cast<long>(centre) - 2; i <= static_cast<long>(centre) + 2; ++i)
      if (i >= 0 && i < static_cast<long>(p.size())) sum += p[static_cast<std::size_t>(i)];
    return sum;
  };
  const double main_power = band_power(k);
  const double sample_rate = 1.0 / hist.bin_width;
  for (double probe : probes_hz) {
    ContaminationEntry e;
    e.probe_hz = probe;
    e.observed_hz = probe > 0.5 * sample_rate ? alias_frequency(probe, sample_rate) : probe;
    e.relative_db = 10.0 * std::log10(band_power(psd.nearest_bin(e.observed_hz)) / main_power);
    out.contamination.push_back(e);
  }
  return out;
}

}  // namespace ahc
