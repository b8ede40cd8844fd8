#include "ahc/event_simulator.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "ahc/errors.hpp"

namespace ahc {

void SourceConfig::validate() const {
  if (!(pair_rate > 0.0) || !std::isfinite(pair_rate)) throw ConfigError("pair rate must be positive");
  if (!(duration > 0.0) || !std::isfinite(duration)) throw ConfigError("duration must be positive");
  if (!(visibility >= 0.0 && visibility <= 1.0)) throw ConfigError("visibility must lie in [0, 1]");
}

void DetectorModel::validate() const {
  if (!(efficiency >= 0.0 && efficiency <= 1.0)) throw ConfigError("efficiency must lie in [0, 1]");
  if (!(dead_time >= 0.0) || !(jitter_sigma >= 0.0) || !(dark_rate >= 0.0))
    throw ConfigError("detector parameters must be non-negative");
  if (!(clock_tick > 0.0)) throw ConfigError("clock tick must be positive");
}

TabulatedSampler::TabulatedSampler(const Axis& x, std::vector<double> density)
    : x_(x), p_(std::move(density)) {
  if (p_.size() != x_.n || x_.n < 2) throw ConfigError("density table does not match its axis");
  const double h = x_.step();
  cdf_.assign(x_.n, 0.0);
  for (std::size_t i = 1; i < x_.n; ++i) {
    if (!(p_[i] >= 0.0) || !std::isfinite(p_[i])) throw ConfigError("density must be finite and non-negative");
    cdf_[i] = cdf_[i - 1] + 0.5 * h * (p_[i - 1] + p_[i]);
  }
  if (!(cdf_.back() > 0.0)) throw ConfigError("density is not normalizable");
}

double TabulatedSampler::sample(double u) const {
  const double target = u * cdf_.back();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), target);
  std::size_t i = static_cast<std::size_t>(it - cdf_.begin());
  i = std::clamp<std::size_t>(i, 1, cdf_.size() - 1) - 1;
  while (i + 1 < cdf_.size() - 1 && cdf_[i + 1] - cdf_[i] <= 0.0) ++i;
  const double h = x_.step();
  const double r = std::max(0.0, target - cdf_[i]);
  const double b = p_[i];
  const double a = (p_[i + 1] - p_[i]) / (2.0 * h);
  const double disc = std::max(0.0, b * b + 4.0 * a * r);
  const double denom = b + std::sqrt(disc);
  double dx = denom > 0.0 ? 2.0 * r / denom : 0.0;
  dx = std::clamp(dx, 0.0, h);
  return x_.point(i) + dx;
}

G2Set mix_visibility(const G2Set& g2, double v) {
  G2Set out = g2;
  const std::size_t nm = g2.ab.grid.diff.n;
  const std::size_t rows = g2.ab.values.size() / nm;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < nm; ++j) {
      const std::size_t k = r * nm + j;
      const double ab = 0.5 * (g2.ab.values[k] + g2.ab.values[r * nm + (nm - 1 - j)]);
      out.cd.values[k] = std::max(0.0, 0.5 * ab + v * (g2.cd.values[k] - 0.5 * ab));
      out.cc.values[k] = std::max(0.0, 0.25 * ab + v * (g2.cc.values[k] - 0.25 * ab));
      out.dd.values[k] = std::max(0.0, 0.25 * ab + v * (g2.dd.values[k] - 0.25 * ab));
    }
  }
  return out;
}

namespace {

double surface_mass(const G2Surface& s) {
  double m = 0.0;
  for (double v : s.values) m += v;
  m *= s.grid.diff.step();
  if (!s.grid.cw_collapsed) m *= s.grid.sum.step();
  return m;
}

// Draws (t+, t-) from a pulsed surface treated as piecewise constant per cell.
class SurfaceSampler {
 public:
  explicit SurfaceSampler(const G2Surface& s) : grid_(s.grid), cdf_(s.values.size()) {
    double acc = 0.0;
    for (std::size_t k = 0; k < s.values.size(); ++k) {
      acc += s.values[k];
      cdf_[k] = acc;
    }
    if (!(acc > 0.0)) throw ConfigError("G2 surface is not normalizable");
  }
  std::pair<double, double> sample(double u, double up, double um) const {
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u * cdf_.back());
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
    const std::size_t r = k / grid_.diff.n, c = k % grid_.diff.n;
    return {grid_.sum.point(r) + (up - 0.5) * grid_.sum.step(),
            grid_.diff.point(c) + (um - 0.5) * grid_.diff.step()};
  }

 private:
  CorrelationGrid grid_;
  std::vector<double> cdf_;
};

}  // namespace

PairSample sample_pairs(const G2Set& g2_in, const SourceConfig& src) {
  src.validate();
  const G2Set g2 = mix_visibility(g2_in, src.visibility);
  const std::array<const G2Surface*, 3> surf{&g2.cd, &g2.cc, &g2.dd};
  std::array<double, 3> mass{};
  for (std::size_t i = 0; i < 3; ++i) mass[i] = surface_mass(*surf[i]);
  const double total = mass[0] + mass[1] + mass[2];
  if (!(total > 0.0) || !std::isfinite(total)) throw ConfigError("G2 set is not normalizable");

  PairSample out;
  for (std::size_t i = 0; i < 3; ++i) out.probabilities[i] = mass[i] / total;
  const bool cw = g2.cd.grid.cw_collapsed;

  std::vector<TabulatedSampler> line;
  std::vector<SurfaceSampler> plane;
  for (std::size_t i = 0; i < 3; ++i) {
    if (mass[i] <= 0.0) {
      line.emplace_back(Axis{0.0, 1.0, 2}, std::vector<double>{1.0, 1.0});
      plane.emplace_back(g2.ab);
      continue;
    }
    if (cw)
      line.emplace_back(surf[i]->grid.diff, surf[i]->values);
    else
      plane.emplace_back(*surf[i]);
  }

  std::mt19937_64 rng(src.seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::exponential_distribution<double> gap(src.pair_rate);
  const double expected = src.pair_rate * src.duration;
  out.events.reserve(static_cast<std::size_t>(2.0 * (expected + 6.0 * std::sqrt(expected)) + 16));
  const std::array<std::pair<std::uint8_t, std::uint8_t>, 3> chans{
      std::pair{kChannelC, kChannelD}, std::pair{kChannelC, kChannelC}, std::pair{kChannelD, kChannelD}};
  double t = 0.0;
  while (true) {
    t += gap(rng);
    if (t >= src.duration) break;
    const double u = uni(rng);
    const std::size_t o = u < out.probabilities[0] ? 0
                          : u < out.probabilities[0] + out.probabilities[1] ? 1 : 2;
    double tp = 0.0, tm = 0.0;
    if (cw) {
      tm = line[o].sample(uni(rng));
    } else {
      const double a = uni(rng), b = uni(rng), c = uni(rng);
      std::tie(tp, tm) = plane[o].sample(a, b, c);
    }
    ++out.counts[o];
    out.events.push_back({t + 0.5 * tp + 0.5 * tm, chans[o].first});
    out.events.push_back({t + 0.5 * tp - 0.5 * tm, chans[o].second});
  }
  std::stable_sort(out.events.begin(), out.events.end(),
                   [](const PhotonEvent& a, const PhotonEvent& b) { return a.time < b.time; });
  return out;
}

std::uint8_t TimeTagStream::channel_id(const std::string& name) const {
  for (std::size_t i = 0; i < header.channel_names.size(); ++i)
    if (header.channel_names[i] == name) return static_cast<std::uint8_t>(i);
  throw ConfigError("unknown channel '" + name + "'");
}

std::uint64_t TimeTagStream::count(std::uint8_t channel) const {
  std::uint64_t n = 0;
  for (const TagRecord& r : records) n += r.channel == channel;
  return n;
}

TimeTagStream apply_detector_model(const std::vector<PhotonEvent>& events,
                                   const DetectorModel& det_c, const DetectorModel& det_d,
                                   std::uint64_t seed, double duration) {
  det_c.validate();
  det_d.validate();
  if (det_c.clock_tick != det_d.clock_tick)
    throw ConfigError("both detectors must share the time-tagger clock");
  if (!(duration > 0.0)) throw ConfigError("duration must be positive");
  const std::array<const DetectorModel*, 2> det{&det_c, &det_d};
  const double tick = det_c.clock_tick;

  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    0x44u, 0x45u, 0x54u};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::array<std::vector<double>, 2> times;
  for (const PhotonEvent& e : events) {
    if (e.channel > 1) throw ConfigError("photon event on an unknown channel");
    const DetectorModel& d = *det[e.channel];
    if (uni(rng) >= d.efficiency) continue;
    double t = e.time;
    if (d.jitter_sigma > 0.0) t += d.jitter_sigma * normal(rng);
    times[e.channel].push_back(t);
  }
  for (std::size_t ch = 0; ch < 2; ++ch) {
    if (det[ch]->dark_rate <= 0.0) continue;
    std::poisson_distribution<std::uint64_t> darks(det[ch]->dark_rate * duration);
    const std::uint64_t n = darks(rng);
    for (std::uint64_t i = 0; i < n; ++i) times[ch].push_back(uni(rng) * duration);
  }

  TimeTagStream out;
  out.header.tick_seconds = tick;
  out.header.seed = seed;
  out.header.duration = duration;
  for (std::size_t ch = 0; ch < 2; ++ch) {
    std::vector<double>& ts = times[ch];
    std::sort(ts.begin(), ts.end());
    const std::uint64_t dead_ticks =
        det[ch]->dead_time > 0.0
            ? static_cast<std::uint64_t>(std::ceil(det[ch]->dead_time / tick - 1e-9))
            : 0;
    bool have_last = false;
    std::uint64_t last = 0;
    for (double t : ts) {
      if (t < 0.0 || t >= duration) continue;
      const std::uint64_t k = static_cast<std::uint64_t>(std::floor(t / tick));
      if (have_last && k - last < dead_ticks) continue;
      out.records.push_back({static_cast<std::uint8_t>(ch), k});
      last = k;
      have_last = true;
    }
  }
  std::sort(out.records.begin(), out.records.end(), [](const TagRecord& a, const TagRecord& b) {
    return a.tick != b.tick ? a.tick < b.tick : a.channel < b.channel;
  });
  return out;
}

}  // namespace ahc
