#include "ahc/correlation_engine.hpp"

#include <algorithm>
#include <cmath>

#include "ahc/errors.hpp"
#include "ahc/numeric.hpp"

namespace ahc {

const char* to_string(ChannelPair p) {
  switch (p) {
    case ChannelPair::CC: return "CC";
    case ChannelPair::DD: return "DD";
    case ChannelPair::CD: return "CD";
    case ChannelPair::AB: return "AB";
  }
  return "?";
}

ChannelPair channel_pair_from_string(const std::string& s) {
  if (s == "CC") return ChannelPair::CC;
  if (s == "DD") return ChannelPair::DD;
  if (s == "CD") return ChannelPair::CD;
  if (s == "AB") return ChannelPair::AB;
  throw ConfigError("unknown channel pair '" + s + "'");
}

std::vector<double> G2Surface::row(std::size_t r) const {
  const std::size_t n = grid.diff.n;
  return {values.begin() + static_cast<long>(r * n), values.begin() + static_cast<long>((r + 1) * n)};
}

const G2Surface& G2Set::get(ChannelPair p) const {
  switch (p) {
    case ChannelPair::CC: return cc;
    case ChannelPair::DD: return dd;
    case ChannelPair::CD: return cd;
    case ChannelPair::AB: return ab;
  }
  return ab;
}

SpectralSupport spectral_support(const JointSpectralAmplitude& jsa) {
  const FrequencyGrid& g = jsa.grid;
  double peak = 0.0;
  for (const cplx& v : jsa.values) peak = std::max(peak, std::norm(v));
  const double level = 1e-6 * peak;
  SpectralSupport s;
  double wsum = 0.0, psum = 0.0;
  for (std::size_t r = 0; r < g.first.n; ++r) {
    for (std::size_t c = 0; c < g.second.n; ++c) {
      const double p = std::norm(jsa.at(r, c));
      if (p < level) continue;
      s.omega_minus_max = std::max(s.omega_minus_max, std::abs(g.second.point(c)));
      wsum += p * g.first.point(r);
      psum += p;
    }
  }
  s.omega_plus_center = psum > 0.0 ? wsum / psum : g.first.center;
  for (std::size_t r = 0; r < g.first.n; ++r)
    for (std::size_t c = 0; c < g.second.n; ++c)
      if (std::norm(jsa.at(r, c)) >= level)
        s.omega_plus_spread =
            std::max(s.omega_plus_spread, std::abs(g.first.point(r) - s.omega_plus_center));
  return s;
}

namespace {

void check_layout(const JointSpectralAmplitude& jsa, const CorrelationGrid& grid) {
  grid.validate();
  if (jsa.grid.coordinates != Coordinates::SumDifference)
    throw ConfigError("correlation functions need a JSA in sum/difference coordinates");
  if (jsa.grid.cw_collapsed != grid.cw_collapsed)
    throw ConfigError("correlation grid and JSA disagree on the cw layout");
  const SpectralSupport s = spectral_support(jsa);
  if (s.omega_minus_max > 0.0 && grid.diff.step() > std::numbers::pi / s.omega_minus_max)
    throw ConfigError("t- spacing under-resolves the JSA support");
  if (!grid.cw_collapsed && s.omega_plus_spread > 0.0 &&
      grid.sum.step() > std::numbers::pi / s.omega_plus_spread)
    throw ConfigError("t+ spacing under-resolves the JSA support");
}

// X(t+, t-) = sum f exp(-i(w+ t+ + w- t-)/2) dw+ dw-.
std::vector<cplx> joint_transform(const JointSpectralAmplitude& jsa, const CorrelationGrid& grid) {
  const FrequencyGrid& g = jsa.grid;
  const std::size_t nm = grid.diff.n;
  ChirpZ along_minus(g.second.n, g.second.step(), nm, grid.diff.step(), 0.5);
  std::vector<cplx> mid(g.first.n * nm);
  for (std::size_t r = 0; r < g.first.n; ++r)
    along_minus.apply(&jsa.values[r * g.second.n], 1, g.second.front(), grid.diff.front(),
                      &mid[r * nm], 1);
  if (grid.cw_collapsed) {
    const double h = g.second.step();
    for (cplx& v : mid) v *= h;
    return mid;
  }
  const std::size_t np = grid.sum.n;
  std::vector<cplx> out(np * nm);
  ChirpZ along_plus(g.first.n, g.first.step(), np, grid.sum.step(), 0.5);
  for (std::size_t c = 0; c < nm; ++c)
    along_plus.apply(&mid[c], nm, g.first.front(), grid.sum.front(), &out[c], nm);
  const double h = g.first.step() * g.second.step();
  for (cplx& v : out) v *= h;
  return out;
}

}  // namespace

G2Set g2_set_from_jsa(const JointSpectralAmplitude& jsa, const CorrelationGrid& grid) {
  check_layout(jsa, grid);
  const std::vector<cplx> x = joint_transform(jsa, grid);
  const std::size_t nm = grid.diff.n;
  const std::size_t rows = grid.cw_collapsed ? 1 : grid.sum.n;
  G2Set set;
  for (auto [s, p] : {std::pair{&set.cd, ChannelPair::CD}, std::pair{&set.cc, ChannelPair::CC},
                      std::pair{&set.dd, ChannelPair::DD}, std::pair{&set.ab, ChannelPair::AB}}) {
    s->pair = p;
    s->grid = grid;
    s->values.resize(rows * nm);
  }
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < nm; ++j) {
      const std::size_t k = r * nm + j;
      const cplx xp = x[k];
      const cplx xm = x[r * nm + (nm - 1 - j)];
      const double anti = std::norm(0.5 * (xm - xp));
      const double sym = 0.5 * std::norm(0.5 * (xm + xp));
      set.cd.values[k] = anti;
      set.cc.values[k] = sym;
      set.dd.values[k] = sym;
      set.ab.values[k] = std::norm(xp);
    }
  }
  return set;
}

G2Surface g2_from_jsa(const JointSpectralAmplitude& jsa, ChannelPair pair,
                      const CorrelationGrid& grid) {
  G2Set set = g2_set_from_jsa(jsa, grid);
  switch (pair) {
    case ChannelPair::CC: return std::move(set.cc);
    case ChannelPair::DD: return std::move(set.dd);
    case ChannelPair::CD: return std::move(set.cd);
    case ChannelPair::AB: break;
  }
  return std::move(set.ab);
}

CorrelationGrid default_correlation_grid(const JointSpectralAmplitude& jsa, double decay_lengths,
                                         std::size_t n_plus) {
  const FrequencyGrid& g = jsa.grid;
  if (g.coordinates != Coordinates::SumDifference)
    throw ConfigError("correlation functions need a JSA in sum/difference coordinates");
  std::vector<double> marginal(g.second.n, 0.0);
  for (std::size_t r = 0; r < g.first.n; ++r)
    for (std::size_t c = 0; c < g.second.n; ++c) marginal[c] += std::norm(jsa.at(r, c));
  const double width = fwhm(g.second.points(), marginal);
  const double gamma_est =
      std::isfinite(width) && width > 0.0 ? width / (2.0 * std::sqrt(std::numbers::sqrt2 - 1.0))
                                          : g.second.span;
  const SpectralSupport s = spectral_support(jsa);
  const double half = decay_lengths / gamma_est;
  const double dt = 0.125 * std::numbers::pi / std::max(s.omega_minus_max, 1e-300);
  const std::size_t nm = std::min<std::size_t>(2 * static_cast<std::size_t>(std::ceil(half / dt)) + 1,
                                               (std::size_t{1} << 20) + 1);
  const Axis diff{0.0, 2.0 * half, nm};
  if (g.cw_collapsed) return CorrelationGrid::cw(diff);

  const double plus_half = half + 6.0 / std::max(s.omega_plus_spread, 1e-300);
  const Axis coarse_minus{0.0, 2.0 * half, 65};
  CorrelationGrid probe = CorrelationGrid::pulsed(Axis{0.0, 2.0 * plus_half, n_plus}, coarse_minus);
  const std::vector<cplx> x = joint_transform(jsa, probe);
  double wt = 0.0, w = 0.0;
  for (std::size_t r = 0; r < probe.sum.n; ++r) {
    double p = 0.0;
    for (std::size_t c = 0; c < coarse_minus.n; ++c) p += std::norm(x[r * coarse_minus.n + c]);
    wt += p * probe.sum.point(r);
    w += p;
  }
  const double center = w > 0.0 ? wt / w : 0.0;
  return CorrelationGrid::pulsed(Axis{center, 2.0 * plus_half, n_plus}, diff);
}

double g2_closed_form_cw(double gamma, double omega_minus0, ChannelPair pair, double t_minus) {
  if (!(gamma > 0.0)) throw ConfigError("linewidth must be positive");
  const double env = std::exp(-gamma * std::abs(t_minus));
  const double c = std::cos(omega_minus0 * t_minus);
  switch (pair) {
    case ChannelPair::CD: return env * (1.0 - c) / 2.0;
    case ChannelPair::CC:
    case ChannelPair::DD: return 0.5 * env * (1.0 + c) / 2.0;
    case ChannelPair::AB: break;
  }
  return env;
}

namespace {

// (h/2pi) * sum over lines of |sum_line a_l exp(-i w_l t)|^2, each line being
// an arithmetic progression in frequency with step h.
struct Line {
  double w0 = 0.0;
  std::vector<cplx> a;
};

std::vector<double> line_intensity(const std::vector<Line>& lines, double h, const Axis& times) {
  std::size_t nmax = 0;
  for (const Line& l : lines) nmax = std::max(nmax, l.a.size());
  std::vector<double> out(times.n, 0.0);
  if (nmax == 0) return out;
  ChirpZ cz(nmax, h, times.n, times.n > 1 ? times.step() : 0.0, 1.0);
  std::vector<cplx> in(nmax), res(times.n);
  for (const Line& l : lines) {
    std::fill(in.begin(), in.end(), 0.0);
    std::copy(l.a.begin(), l.a.end(), in.begin());
    cz.apply(in.data(), 1, l.w0, times.front(), res.data(), 1);
    for (std::size_t j = 0; j < times.n; ++j) out[j] += std::norm(res[j]);
  }
  for (double& v : out) v *= h / kTwoPi;
  return out;
}

}  // namespace

std::vector<double> g1_output(const JointSpectralAmplitude& jsa, char channel, const Axis& times) {
  if (channel != 'C' && channel != 'D') throw ConfigError("g1 channel must be C or D");
  const FrequencyGrid& g = jsa.grid;
  if (g.cw_collapsed) return std::vector<double>(times.n, 1.0);
  std::vector<Line> sig, idl;
  double hs = 0.0, hi = 0.0;
  if (g.coordinates == Coordinates::SignalIdler) {
    hs = g.first.step();
    hi = g.second.step();
    for (std::size_t c = 0; c < g.second.n; ++c) {
      Line l{g.first.front(), {}};
      for (std::size_t r = 0; r < g.first.n; ++r) l.a.push_back(jsa.at(r, c));
      sig.push_back(std::move(l));
    }
    for (std::size_t r = 0; r < g.first.n; ++r) {
      Line l{g.second.front(), {}};
      for (std::size_t c = 0; c < g.second.n; ++c) l.a.push_back(jsa.at(r, c));
      idl.push_back(std::move(l));
    }
  } else {
    const double h = g.first.step();
    if (std::abs(h - g.second.step()) > 1e-12 * h)
      throw ConfigError("first-order intensity on a sum/difference grid needs equal axis steps");
    hs = hi = h;
    const long np = static_cast<long>(g.first.n), nm = static_cast<long>(g.second.n);
    // Signal lines: fixed r - c; idler lines: fixed r + c.
    for (long d = -(nm - 1); d <= np - 1; ++d) {
      Line l;
      const long r0 = std::max(0L, d);
      for (long r = r0; r < np && r - d < nm; ++r) {
        if (l.a.empty()) l.w0 = 0.5 * (g.first.point(r) + g.second.point(r - d));
        l.a.push_back(jsa.at(r, r - d));
      }
      sig.push_back(std::move(l));
    }
    for (long s = 0; s <= np + nm - 2; ++s) {
      Line l;
      const long r0 = std::max(0L, s - (nm - 1));
      for (long r = r0; r < np && s - r >= 0; ++r) {
        if (l.a.empty()) l.w0 = 0.5 * (g.first.point(r) - g.second.point(s - r));
        l.a.push_back(jsa.at(r, s - r));
      }
      idl.push_back(std::move(l));
    }
  }
  const std::vector<double> gs = line_intensity(sig, hs, times);
  const std::vector<double> gi = line_intensity(idl, hi, times);
  std::vector<double> out(times.n);
  for (std::size_t j = 0; j < times.n; ++j) out[j] = 0.5 * (gs[j] + gi[j]);
  return out;
}

PsdSpectrum psd_of_g2(const G2Surface& g2, Window window, std::size_t pad_factor) {
  const std::size_t nm = g2.grid.diff.n;
  pad_factor = std::max<std::size_t>(pad_factor, 1);
  if (g2.grid.cw_collapsed)
    return sampled_psd(g2.values, g2.grid.diff.step(), window, nm * pad_factor, false);

  const std::size_t np = g2.grid.sum.n;
  const std::size_t fp = np * pad_factor, fm = nm * pad_factor;
  const std::vector<double> wp = window_weights(window, np), wm = window_weights(window, nm);
  std::vector<cplx> buf(fp * fm, 0.0);
  for (std::size_t r = 0; r < np; ++r)
    for (std::size_t c = 0; c < nm; ++c) buf[r * fm + c] = wp[r] * wm[c] * g2.at(r, c);
  fft2_inplace(buf, fp, fm, -1);
  const double dtp = g2.grid.sum.step(), dtm = g2.grid.diff.step();
  PsdSpectrum out;
  out.window = window;
  out.normalization = "|dt+ dt- sum w x exp(-2 pi i (f+ t+ + f- t-))|^2, window scaled to unit mean";
  auto axis = [](std::size_t n, double dt) {
    std::vector<double> f;
    const long lo = -static_cast<long>(n / 2);
    for (long k = lo; k < lo + static_cast<long>(n); ++k)
      f.push_back(static_cast<double>(k) / (static_cast<double>(n) * dt));
    return f;
  };
  out.frequency_hz = axis(fp, dtp);
  out.frequency2_hz = axis(fm, dtm);
  out.values.resize(fp * fm);
  const long hp = static_cast<long>(fp / 2), hm = static_cast<long>(fm / 2);
  for (std::size_t r = 0; r < fp; ++r) {
    const std::size_t sr = static_cast<std::size_t>((static_cast<long>(r) - hp + static_cast<long>(fp)) % static_cast<long>(fp));
    for (std::size_t c = 0; c < fm; ++c) {
      const std::size_t sc = static_cast<std::size_t>((static_cast<long>(c) - hm + static_cast<long>(fm)) % static_cast<long>(fm));
      out.values[r * fm + c] = std::norm(buf[sr * fm + sc] * (dtp * dtm));
    }
  }
  return out;
}

}  // namespace ahc
