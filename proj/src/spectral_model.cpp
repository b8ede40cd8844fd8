#include "ahc/spectral_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ahc/errors.hpp"
#include "ahc/numeric.hpp"

namespace ahc {

namespace {

constexpr long kNearModes = 48;

// Euler-Maclaurin estimate of sum_{m=p}^{q} 1/(g/2 + i(z + m F)).
cplx comb_tail(long p, long q, double z, double half_gamma, double fsr) {
  const cplx c(0.0, -1.0 / fsr);
  const cplx x0(-z / fsr, half_gamma / fsr);
  const cplx up = static_cast<double>(p) - x0;
  const cplx uq = static_cast<double>(q) - x0;
  const cplx integral = c * (std::log(uq) - std::log(up));
  const cplx fp = c / up, fq = c / uq;
  const cplx up2 = up * up, uq2 = uq * uq;
  const cplx d1 = -c / uq2 + c / up2;
  const cplx d3 = -6.0 * c / (uq2 * uq2) + 6.0 * c / (up2 * up2);
  const cplx d5 = -120.0 * c / (uq2 * uq2 * uq2) + 120.0 * c / (up2 * up2 * up2);
  return integral + 0.5 * (fp + fq) + d1 / 12.0 - d3 / 720.0 + d5 / 30240.0;
}

double pump_check_sigma(const PumpSpectrum& pump) {
  if (const auto* g = std::get_if<GaussianPulsePump>(&pump)) {
    if (!(g->sigma > 0.0) || !std::isfinite(g->sigma))
      throw ConfigError("pump sigma must be positive");
    return g->sigma;
  }
  return 0.0;
}

void check_pm(const PhaseMatchingEnvelope& pm) {
  if (const auto* g = std::get_if<GaussianPhaseMatching>(&pm)) {
    if (!(g->fwhm > 0.0) || !std::isfinite(g->fwhm))
      throw ConfigError("phase-matching bandwidth must be positive");
  }
}

cplx pump_amplitude(const PumpSpectrum& pump, double omega_plus) {
  if (const auto* g = std::get_if<GaussianPulsePump>(&pump)) {
    const double d = (omega_plus - g->center) / g->sigma;
    return std::exp(-0.5 * d * d);
  }
  return 1.0;
}

double sum_norm2(const std::vector<cplx>& v) {
  double s = 0.0;
  for (const cplx& x : v) s += std::norm(x);
  return s;
}

void require_finite(const std::vector<cplx>& v) {
  for (const cplx& x : v)
    if (!std::isfinite(x.real()) || !std::isfinite(x.imag()))
      throw Error("non-finite JSA entry");
}

// Maps grid point (row, col) to (omega_s, omega_i).
std::pair<double, double> signal_idler_at(const FrequencyGrid& g, std::size_t row,
                                          std::size_t col) {
  const double a = g.first.point(row);
  const double b = g.second.point(col);
  if (g.coordinates == Coordinates::SignalIdler) return {a, b};
  return {0.5 * (a + b), 0.5 * (a - b)};
}

void check_span(const Axis& a, double gamma, const char* what) {
  if (a.span < 4.0 * gamma)
    throw ConfigError(std::string(what) + " span is narrower than 4 linewidths");
}

}  // namespace

void ModeCombSpec::validate() const {
  if (!(linewidth > 0.0) || !std::isfinite(linewidth))
    throw ConfigError("comb linewidth must be positive");
  if (!(fsr > 0.0) || !std::isfinite(fsr)) throw ConfigError("comb FSR must be positive");
  if (!std::isfinite(center)) throw ConfigError("comb center must be finite");
  if (m_min > 0 || m_max < 0) throw ConfigError("comb mode range must contain m = 0");
}

double pump_center(const PumpSpectrum& pump) {
  if (const auto* m = std::get_if<MonochromaticPump>(&pump)) return m->frequency;
  return std::get<GaussianPulsePump>(pump).center;
}

cplx phase_matching(const PhaseMatchingEnvelope& pm, double omega_minus) {
  if (const auto* g = std::get_if<GaussianPhaseMatching>(&pm)) {
    const double u = (omega_minus - g->center) / g->fwhm;
    return std::exp(-0.5 * std::numbers::ln2 * u * u);
  }
  return 1.0;
}

double JointSpectralAmplitude::norm() const { return std::sqrt(sum_norm2(values)); }

void JointSpectralAmplitude::normalize() {
  const double n = norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw ConfigError("JSA vanishes on the grid");
  for (cplx& v : values) v /= n;
}

cplx cavity_comb_amplitude(double omega, const ModeCombSpec& spec) {
  const double half = 0.5 * spec.linewidth;
  const double z = spec.center - omega;
  cplx sum = 0.0;
  for (long m = spec.m_min; m <= spec.m_max; ++m)
    sum += 1.0 / cplx(half, z + static_cast<double>(m) * spec.fsr);
  return sum * std::sqrt(spec.linewidth / kTwoPi);
}

cplx cavity_comb_amplitude_fast(double omega, const ModeCombSpec& spec) {
  const long a = spec.m_min, b = spec.m_max;
  if (b - a <= 2 * kNearModes + 4) return cavity_comb_amplitude(omega, spec);
  const double half = 0.5 * spec.linewidth;
  const double z = spec.center - omega;
  const double nearest =
      std::clamp(std::round(-z / spec.fsr), static_cast<double>(a), static_cast<double>(b));
  const long ms = static_cast<long>(nearest);
  const long lo = std::max(a, ms - kNearModes);
  const long hi = std::min(b, ms + kNearModes);
  cplx sum = 0.0;
  for (long m = lo; m <= hi; ++m) sum += 1.0 / cplx(half, z + static_cast<double>(m) * spec.fsr);
  if (hi < b) sum += comb_tail(hi + 1, b, z, half, spec.fsr);
  if (lo > a) sum += comb_tail(a, lo - 1, z, half, spec.fsr);
  return sum * std::sqrt(spec.linewidth / kTwoPi);
}

cplx filter_transmission(double omega, const ModeCombSpec& filter) {
  return cavity_comb_amplitude_fast(omega, filter) *
         std::sqrt(0.5 * std::numbers::pi * filter.linewidth);
}

JointSpectralAmplitude build_cespdc_jsa(const PumpSpectrum& pump, const ModeCombSpec& signal,
                                        const ModeCombSpec& idler,
                                        const PhaseMatchingEnvelope& pm,
                                        const FrequencyGrid& grid) {
  signal.validate();
  idler.validate();
  grid.validate();
  pump_check_sigma(pump);
  check_pm(pm);
  const double gamma = std::max(signal.linewidth, idler.linewidth);
  const bool cw = std::holds_alternative<MonochromaticPump>(pump);
  const double p0 = pump_center(pump);
  if (cw) {
    if (!grid.cw_collapsed) throw ConfigError("a monochromatic pump needs a cw-collapsed grid");
    if (std::abs(grid.first.center - p0) > 1e-9 * std::max(1.0, std::abs(p0)))
      throw ConfigError("the cw grid omega+ point must sit at the pump frequency");
  } else if (grid.cw_collapsed) {
    throw ConfigError("a pulsed pump needs a two-dimensional grid");
  }
  if (grid.coordinates == Coordinates::SumDifference) {
    check_span(grid.second, gamma, "omega-");
  } else {
    check_span(grid.first, signal.linewidth, "signal");
    check_span(grid.second, idler.linewidth, "idler");
  }

  JointSpectralAmplitude out;
  out.grid = grid;
  out.values.resize(grid.size());
  const std::size_t rows = grid.first.n, cols = grid.second.n;
  if (grid.coordinates == Coordinates::SignalIdler) {
    std::vector<cplx> as(rows), ai(cols);
    for (std::size_t r = 0; r < rows; ++r)
      as[r] = cavity_comb_amplitude_fast(grid.first.point(r), signal);
    for (std::size_t c = 0; c < cols; ++c)
      ai[c] = cavity_comb_amplitude_fast(grid.second.point(c), idler);
    for (std::size_t r = 0; r < rows; ++r) {
      const double ws = grid.first.point(r);
      for (std::size_t c = 0; c < cols; ++c) {
        const double wi = grid.second.point(c);
        out.values[r * cols + c] =
            pump_amplitude(pump, ws + wi) * phase_matching(pm, ws - wi) * as[r] * ai[c];
      }
    }
  } else {
    for (std::size_t r = 0; r < rows; ++r) {
      const double wp = grid.first.point(r);
      const cplx alpha = cw ? cplx(1.0) : pump_amplitude(pump, wp);
      for (std::size_t c = 0; c < cols; ++c) {
        const double wm = grid.second.point(c);
        out.values[r * cols + c] = alpha * phase_matching(pm, wm) *
                                   cavity_comb_amplitude_fast(0.5 * (wp + wm), signal) *
                                   cavity_comb_amplitude_fast(0.5 * (wp - wm), idler);
      }
    }
  }
  require_finite(out.values);
  out.normalize();

  out.meta.truncation_loss_signal = truncation_loss(signal, pm, p0, true);
  out.meta.truncation_loss_idler = truncation_loss(idler, pm, p0, false);
  if (out.meta.truncation_loss_signal > 0.01)
    out.meta.warnings.push_back("signal mode range truncates more than 1% of the phase-matched power");
  if (out.meta.truncation_loss_idler > 0.01)
    out.meta.warnings.push_back("idler mode range truncates more than 1% of the phase-matched power");
  out.meta.provenance = {{"builder", "cespdc"},
                         {"pump", to_json(pump)},
                         {"signal", to_json(signal)},
                         {"idler", to_json(idler)},
                         {"phase_matching", to_json(pm)}};
  return out;
}

JointSpectralAmplitude apply_fp_filters(const JointSpectralAmplitude& jsa,
                                        const ModeCombSpec& filter_s,
                                        const ModeCombSpec& filter_i) {
  filter_s.validate();
  filter_i.validate();
  JointSpectralAmplitude out = jsa;
  const std::size_t rows = jsa.grid.first.n, cols = jsa.grid.second.n;
  const double before = sum_norm2(jsa.values);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const auto [ws, wi] = signal_idler_at(jsa.grid, r, c);
      out.values[r * cols + c] *= filter_transmission(ws, filter_s) * filter_transmission(wi, filter_i);
    }
  }
  const double fraction = sum_norm2(out.values) / before;
  out.normalize();
  out.meta.transmitted_fraction = fraction * jsa.meta.transmitted_fraction.value_or(1.0);
  out.meta.provenance["filters"] = {{"signal", to_json(filter_s)}, {"idler", to_json(filter_i)}};
  return out;
}

JointSpectralAmplitude lorentzian_lines(const Axis& omega_minus_axis, double gamma,
                                        const std::vector<LorentzianLine>& lines, double pump) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ConfigError("linewidth must be positive");
  if (lines.empty()) throw ConfigError("at least one line is required");
  JointSpectralAmplitude out;
  out.grid = FrequencyGrid::cw(pump, omega_minus_axis);
  check_span(omega_minus_axis, gamma, "omega-");
  out.values.assign(omega_minus_axis.n, 0.0);
  const double g2 = gamma * gamma;
  nlohmann::json jl = nlohmann::json::array();
  for (const LorentzianLine& line : lines) {
    if (!(line.relative_intensity >= 0.0)) throw ConfigError("line intensity must be non-negative");
    const double a = std::sqrt(line.relative_intensity);
    for (std::size_t k = 0; k < omega_minus_axis.n; ++k) {
      const double u = line.omega_minus0 - omega_minus_axis.point(k);
      out.values[k] += a * g2 / (g2 + u * u);
    }
    jl.push_back({{"difference_frequency_hz", hertz(line.omega_minus0)},
                  {"relative_intensity", line.relative_intensity}});
  }
  out.normalize();
  out.meta.provenance = {{"builder", "lorentzian"},
                         {"linewidth_hz", hertz(gamma)},
                         {"pump_hz", hertz(pump)},
                         {"lines", jl}};
  return out;
}

JointSpectralAmplitude single_mode_lorentzian_g(const Axis& omega_minus_axis, double gamma,
                                                double omega_minus0, double pump) {
  return lorentzian_lines(omega_minus_axis, gamma, {{omega_minus0, 1.0}}, pump);
}

SymmetryParts decompose_symmetry(const JointSpectralAmplitude& jsa) {
  const FrequencyGrid& g = jsa.grid;
  const std::size_t rows = g.first.n, cols = g.second.n;
  SymmetryParts parts{jsa, jsa};
  auto mirror = [&](std::size_t r, std::size_t c) -> std::pair<std::size_t, std::size_t> {
    if (g.coordinates == Coordinates::SumDifference) return {r, cols - 1 - c};
    return {c, r};
  };
  if (g.coordinates == Coordinates::SumDifference) {
    if (std::abs(g.second.center) > 1e-9 * g.second.step())
      throw ConfigError("symmetry decomposition needs an omega- axis centered at 0");
  } else if (g.first.n != g.second.n || g.first.center != g.second.center ||
             g.first.span != g.second.span) {
    throw ConfigError("symmetry decomposition needs identical signal and idler axes");
  }
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const auto [mr, mc] = mirror(r, c);
      const cplx f = jsa.values[r * cols + c];
      const cplx fm = jsa.values[mr * cols + mc];
      parts.symmetric.values[r * cols + c] = 0.5 * (fm + f);
      parts.antisymmetric.values[r * cols + c] = 0.5 * (fm - f);
    }
  }
  const char* convention = "f = symmetric - antisymmetric; antisymmetric = [f(mirror) - f]/2";
  parts.symmetric.meta.sign_convention = convention;
  parts.antisymmetric.meta.sign_convention = convention;
  parts.symmetric.meta.provenance["part"] = "symmetric";
  parts.antisymmetric.meta.provenance["part"] = "antisymmetric";
  return parts;
}

JointSpectralAmplitude transpose(const JointSpectralAmplitude& jsa) {
  if (jsa.grid.coordinates != Coordinates::SignalIdler)
    throw ConfigError("transpose needs signal/idler coordinates");
  JointSpectralAmplitude out = jsa;
  std::swap(out.grid.first, out.grid.second);
  const std::size_t rows = jsa.grid.first.n, cols = jsa.grid.second.n;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out.values[c * rows + r] = jsa.values[r * cols + c];
  return out;
}

namespace {

double kernel_scale(Coordinates c) { return c == Coordinates::SumDifference ? 0.5 : 1.0; }

// Transforms along both axes of a row-major matrix with per-axis ChirpZ.
std::vector<cplx> transform_2d(const std::vector<cplx>& in, const Axis& in1, const Axis& in2,
                               const Axis& out1, const Axis& out2, bool collapsed, double scale,
                               double weight) {
  const std::size_t r_in = in1.n, c_in = in2.n, r_out = out1.n, c_out = out2.n;
  std::vector<cplx> mid(r_in * c_out);
  ChirpZ along2(c_in, in2.step(), c_out, out2.step(), scale);
  for (std::size_t r = 0; r < r_in; ++r)
    along2.apply(&in[r * c_in], 1, in2.front(), out2.front(), &mid[r * c_out], 1);
  if (collapsed) {
    for (cplx& v : mid) v *= weight;
    return mid;
  }
  std::vector<cplx> out(r_out * c_out);
  ChirpZ along1(r_in, in1.step(), r_out, out1.step(), scale);
  for (std::size_t c = 0; c < c_out; ++c)
    along1.apply(&mid[c], c_out, in1.front(), out1.front(), &out[c], c_out);
  for (cplx& v : out) v *= weight;
  return out;
}

}  // namespace

TemporalGrid natural_temporal_grid(const FrequencyGrid& grid) {
  const double c = kernel_scale(grid.coordinates);
  auto natural = [c](const Axis& a) {
    return Axis::with_step(0.0, kTwoPi / (c * static_cast<double>(a.n) * a.step()), a.n);
  };
  TemporalGrid t;
  t.coordinates = grid.coordinates;
  t.cw_collapsed = grid.cw_collapsed;
  t.first = grid.cw_collapsed ? Axis::single(0.0) : natural(grid.first);
  t.second = natural(grid.second);
  return t;
}

JointTemporalAmplitude jta_from_jsa(const JointSpectralAmplitude& jsa, const TemporalGrid& tgrid) {
  const FrequencyGrid& g = jsa.grid;
  if (tgrid.cw_collapsed != g.cw_collapsed || tgrid.coordinates != g.coordinates)
    throw ConfigError("time grid does not match the JSA layout");
  const double c = kernel_scale(g.coordinates);
  const double weight = g.second.step() * (g.cw_collapsed ? 1.0 : g.first.step());
  JointTemporalAmplitude out;
  out.grid = tgrid;
  out.values = transform_2d(jsa.values, g.first, g.second, tgrid.first, tgrid.second,
                            g.cw_collapsed, c, weight);
  return out;
}

JointSpectralAmplitude jsa_from_jta(const JointTemporalAmplitude& jta, const FrequencyGrid& grid) {
  const TemporalGrid& t = jta.grid;
  if (t.cw_collapsed != grid.cw_collapsed || t.coordinates != grid.coordinates)
    throw ConfigError("frequency grid does not match the JTA layout");
  const double c = kernel_scale(grid.coordinates);
  double weight = c / kTwoPi * t.second.step();
  if (!grid.cw_collapsed) weight *= c / kTwoPi * t.first.step();
  JointSpectralAmplitude out;
  out.grid = grid;
  out.values = transform_2d(jta.values, t.first, t.second, grid.first, grid.second,
                            grid.cw_collapsed, -c, weight);
  return out;
}

Axis default_cw_axis(double omega_minus0, double gamma) {
  const double span = std::max(10.0 * std::abs(omega_minus0), 100.0 * gamma);
  return Axis{0.0, span, std::size_t{1} << 14};
}

std::pair<int, int> default_mode_range(const ModeCombSpec& comb, const PhaseMatchingEnvelope& pm,
                                       double pump_center, bool is_signal) {
  const auto* g = std::get_if<GaussianPhaseMatching>(&pm);
  if (!g) throw ConfigError("flat phase matching needs an explicit mode range");
  const double peak = is_signal ? 0.5 * (pump_center + g->center) : 0.5 * (pump_center - g->center);
  const int ms = static_cast<int>(std::lround((peak - comb.center) / comb.fsr));
  const int r = static_cast<int>(std::ceil(3.0 * g->fwhm / comb.fsr));
  return {std::min(0, ms - r), std::max(0, ms + r)};
}

double truncation_loss(const ModeCombSpec& comb, const PhaseMatchingEnvelope& pm,
                       double pump_center, bool is_signal) {
  if (std::holds_alternative<FlatPhaseMatching>(pm)) return 0.0;
  auto weight = [&](long m) {
    const double w = comb.center + static_cast<double>(m) * comb.fsr;
    const double wm = is_signal ? 2.0 * w - pump_center : pump_center - 2.0 * w;
    return std::norm(phase_matching(pm, wm));
  };
  const auto& g = std::get<GaussianPhaseMatching>(pm);
  const double peak = is_signal ? 0.5 * (pump_center + g.center) : 0.5 * (pump_center - g.center);
  const long ms = std::lround((peak - comb.center) / comb.fsr);
  const double wmax = weight(ms);
  double total = 0.0, inside = 0.0;
  auto accumulate = [&](long m) {
    const double w = weight(m);
    total += w;
    if (m >= comb.m_min && m <= comb.m_max) inside += w;
    return w;
  };
  accumulate(ms);
  for (long m = ms + 1; accumulate(m) > 1e-22 * wmax || m <= comb.m_max; ++m) {}
  for (long m = ms - 1; accumulate(m) > 1e-22 * wmax || m >= comb.m_min; --m) {}
  if (!(total > 0.0)) return 1.0;
  return std::max(0.0, 1.0 - inside / total);
}

double lorentzian_pair_fwhm_difference(double gamma) {
  return 2.0 * gamma * std::sqrt(std::numbers::sqrt2 - 1.0);
}

double lorentzian_pair_fwhm_signal(double gamma) {
  return gamma * std::sqrt(std::numbers::sqrt2 - 1.0);
}

double signal_marginal_fwhm(const JointSpectralAmplitude& jsa) {
  const FrequencyGrid& g = jsa.grid;
  std::vector<double> x, y;
  if (g.cw_collapsed) {
    for (std::size_t k = 0; k < g.second.n; ++k) {
      x.push_back(0.5 * (g.first.center + g.second.point(k)));
      y.push_back(std::norm(jsa.values[k]));
    }
  } else if (g.coordinates == Coordinates::SignalIdler) {
    x = g.first.points();
    y.assign(g.first.n, 0.0);
    for (std::size_t r = 0; r < g.first.n; ++r)
      for (std::size_t c = 0; c < g.second.n; ++c) y[r] += std::norm(jsa.at(r, c));
  } else {
    const double h = g.first.step();
    if (std::abs(h - g.second.step()) > 1e-12 * h)
      throw ConfigError("marginal on a sum/difference grid needs equal axis steps");
    const std::size_t nl = g.first.n + g.second.n - 1;
    const double origin = 0.5 * (g.first.front() + g.second.front());
    y.assign(nl, 0.0);
    for (std::size_t l = 0; l < nl; ++l) x.push_back(origin + 0.5 * h * static_cast<double>(l));
    for (std::size_t r = 0; r < g.first.n; ++r)
      for (std::size_t c = 0; c < g.second.n; ++c) y[r + c] += std::norm(jsa.at(r, c));
  }
  return fwhm(x, y);
}

std::vector<ModePairPeak> scan_mode_pairs(double pump, const ModeCombSpec& signal,
                                          const ModeCombSpec& idler,
                                          const PhaseMatchingEnvelope& pm,
                                          const ModePairScanOptions& opts) {
  signal.validate();
  idler.validate();
  const std::size_t n = std::max<std::size_t>(opts.points_per_window, 8);
  const double step = 2.0 * signal.fsr / static_cast<double>(n);
  std::vector<ModePairPeak> out;
  std::vector<double> inten(n);
  for (int m = signal.m_min; m <= signal.m_max; ++m) {
    const double wc = 2.0 * signal.mode_frequency(m) - pump;
    const double start = wc - signal.fsr + 0.5 * step;
    for (std::size_t k = 0; k < n; ++k) {
      const double wm = start + static_cast<double>(k) * step;
      const double ws = 0.5 * (pump + wm), wi = 0.5 * (pump - wm);
      cplx f = phase_matching(pm, wm) * cavity_comb_amplitude_fast(ws, signal) *
               cavity_comb_amplitude_fast(wi, idler);
      if (opts.filter_s) f *= filter_transmission(ws, *opts.filter_s);
      if (opts.filter_i) f *= filter_transmission(wi, *opts.filter_i);
      inten[k] = std::norm(f);
    }
    const std::size_t k = argmax(inten);
    ModePairPeak p;
    p.signal_mode = m;
    p.omega_minus = start + static_cast<double>(k) * step;
    p.peak_intensity = inten[k];
    if (k > 0 && k + 1 < n) {
      const Vertex v = parabolic_vertex(inten[k - 1], inten[k], inten[k + 1]);
      p.omega_minus += v.offset * step;
      p.peak_intensity = v.value;
    }
    double power = 0.0;
    for (double v : inten) power += v;
    p.power = power * step;
    const double wi = 0.5 * (pump - p.omega_minus);
    p.idler_mode = static_cast<int>(std::lround((wi - idler.center) / idler.fsr));
    out.push_back(p);
  }
  return out;
}

std::vector<ModeCluster> cluster_mode_pairs(const std::vector<ModePairPeak>& peaks,
                                            double cluster_db, double mode_db) {
  constexpr std::size_t kSeedWindow = 8;
  std::vector<ModeCluster> clusters;
  if (peaks.empty()) return clusters;
  double gmax = 0.0;
  for (const auto& p : peaks) gmax = std::max(gmax, p.peak_intensity);
  const double seed_level = gmax * std::pow(10.0, cluster_db / 10.0);
  const double member_ratio = std::pow(10.0, mode_db / 10.0);
  std::vector<bool> used(peaks.size(), false);
  for (std::size_t i = 0; i < peaks.size(); ++i) {
    const double v = peaks[i].peak_intensity;
    if (v < seed_level || used[i]) continue;
    bool is_seed = true;
    const std::size_t lo = i >= kSeedWindow ? i - kSeedWindow : 0;
    const std::size_t hi = std::min(peaks.size() - 1, i + kSeedWindow);
    for (std::size_t j = lo; j <= hi && is_seed; ++j) {
      if (j < i && peaks[j].peak_intensity >= v) is_seed = false;
      if (j > i && peaks[j].peak_intensity > v) is_seed = false;
    }
    if (!is_seed) continue;
    const double level = v * member_ratio;
    std::size_t a = i, b = i;
    while (a > 0 && !used[a - 1] && peaks[a - 1].peak_intensity >= level) --a;
    while (b + 1 < peaks.size() && !used[b + 1] && peaks[b + 1].peak_intensity >= level) ++b;
    ModeCluster cl;
    cl.max_intensity = v;
    for (std::size_t j = a; j <= b; ++j) {
      used[j] = true;
      cl.members.push_back(peaks[j]);
    }
    clusters.push_back(std::move(cl));
  }
  return clusters;
}

nlohmann::json to_json(const ModeCombSpec& spec) {
  return {{"center_hz", hertz(spec.center)},
          {"linewidth_hz", hertz(spec.linewidth)},
          {"fsr_hz", hertz(spec.fsr)},
          {"mode_range", {spec.m_min, spec.m_max}}};
}

nlohmann::json to_json(const PumpSpectrum& pump) {
  if (const auto* m = std::get_if<MonochromaticPump>(&pump))
    return {{"type", "monochromatic"}, {"frequency_hz", hertz(m->frequency)}};
  const auto& g = std::get<GaussianPulsePump>(pump);
  return {{"type", "gaussian_pulse"}, {"center_hz", hertz(g.center)}, {"sigma_hz", hertz(g.sigma)}};
}

nlohmann::json to_json(const PhaseMatchingEnvelope& pm) {
  if (const auto* g = std::get_if<GaussianPhaseMatching>(&pm))
    return {{"type", "gaussian"}, {"center_hz", hertz(g->center)}, {"fwhm_hz", hertz(g->fwhm)}};
  return {{"type", "flat"}};
}

}  // namespace ahc
