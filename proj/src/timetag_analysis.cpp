#include "ahc/timetag_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <future>

#include "ahc/errors.hpp"
#include "ahc/fourier.hpp"
#include "ahc/units.hpp"

namespace ahc {

const char* to_string(PairingRule r) { return r == PairingRule::AllPairs ? "all-pairs" : "consecutive"; }

PairingRule pairing_rule_from_string(const std::string& s) {
  if (s == "all-pairs") return PairingRule::AllPairs;
  if (s == "consecutive") return PairingRule::Consecutive;
  throw ConfigError("unknown pairing rule '" + s + "'");
}

void HistogramConfig::validate() const {
  if (!(bin_width > 0.0) || !std::isfinite(bin_width)) throw ConfigError("bin width must be positive");
  if (!(max_delay > bin_width) || !std::isfinite(max_delay))
    throw ConfigError("histogram window must exceed the bin width");
}

std::uint64_t CorrelationHistogram::total() const {
  std::uint64_t n = 0;
  for (auto c : counts) n += c;
  return n;
}

namespace {

struct Binner {
  Binner(const HistogramConfig& cfg, double tick) {
    cfg.validate();
    ratio = tick / cfg.bin_width;
    half_bins = static_cast<long>(std::floor(cfg.max_delay / cfg.bin_width + 1e-9));
    window_ticks = static_cast<std::uint64_t>(std::ceil((static_cast<double>(half_bins) + 0.5) / ratio));
  }
  long bin(long dk) const { return static_cast<long>(std::floor(static_cast<double>(dk) * ratio + 0.5)); }
  void add(std::vector<std::uint64_t>& counts, long dk) const {
    const long j = bin(dk);
    if (j >= -half_bins && j <= half_bins) ++counts[static_cast<std::size_t>(j + half_bins)];
  }
  double ratio;
  long half_bins;
  std::uint64_t window_ticks;
};

std::vector<std::uint64_t> channel_ticks(const TimeTagStream& tags, std::uint8_t ch) {
  if (ch >= tags.header.channel_names.size())
    throw ConfigError("unknown channel index " + std::to_string(ch));
  std::vector<std::uint64_t> out;
  for (const TagRecord& r : tags.records)
    if (r.channel == ch) out.push_back(r.tick);
  return out;
}

CorrelationHistogram empty_histogram(const TimeTagStream& tags, std::uint8_t a, std::uint8_t b,
                                     const HistogramConfig& cfg, const Binner& binner) {
  CorrelationHistogram h;
  h.channel_a = tags.header.channel_names.at(a);
  h.channel_b = tags.header.channel_names.at(b);
  h.bin_width = cfg.bin_width;
  h.tick_seconds = tags.header.tick_seconds;
  h.duration = tags.header.duration;
  h.rule = cfg.rule;
  const std::size_t n = static_cast<std::size_t>(2 * binner.half_bins + 1);
  h.counts.assign(n, 0);
  h.flagged.assign(n, 0);
  for (long j = -binner.half_bins; j <= binner.half_bins; ++j)
    h.delay_s.push_back(static_cast<double>(j) * cfg.bin_width);
  return h;
}

long signed_diff(std::uint64_t b, std::uint64_t a) {
  return b >= a ? static_cast<long>(b - a) : -static_cast<long>(a - b);
}

void cross_block(const std::vector<std::uint64_t>& A, std::size_t begin, std::size_t end,
                 const std::vector<std::uint64_t>& B, const Binner& binner, PairingRule rule,
                 std::vector<std::uint64_t>& counts) {
  if (begin >= end || B.empty()) return;
  const std::uint64_t W = binner.window_ticks;
  if (rule == PairingRule::Consecutive) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto it = std::lower_bound(B.begin(), B.end(), A[i]);
      if (it != B.end() && *it - A[i] <= W) binner.add(counts, signed_diff(*it, A[i]));
      if (it != B.begin() && A[i] - *(it - 1) <= W) binner.add(counts, signed_diff(*(it - 1), A[i]));
    }
    return;
  }
  const std::uint64_t first = A[begin];
  std::size_t lo = static_cast<std::size_t>(
      std::lower_bound(B.begin(), B.end(), first >= W ? first - W : 0) - B.begin());
  for (std::size_t i = begin; i < end; ++i) {
    const std::uint64_t ta = A[i];
    while (lo < B.size() && B[lo] + W < ta) ++lo;
    for (std::size_t k = lo; k < B.size() && B[k] <= ta + W; ++k)
      binner.add(counts, signed_diff(B[k], ta));
  }
}

}  // namespace

CorrelationHistogram cross_histogram(const TimeTagStream& tags, std::uint8_t ch_a, std::uint8_t ch_b,
                                     const HistogramConfig& cfg) {
  if (ch_a == ch_b) return auto_histogram(tags, ch_a, cfg);
  const Binner binner(cfg, tags.header.tick_seconds);
  CorrelationHistogram h = empty_histogram(tags, ch_a, ch_b, cfg, binner);
  const auto A = channel_ticks(tags, ch_a);
  const auto B = channel_ticks(tags, ch_b);
  cross_block(A, 0, A.size(), B, binner, cfg.rule, h.counts);
  return h;
}

CorrelationHistogram cross_histogram(const TimeTagStream& tags, const std::string& ch_a,
                                     const std::string& ch_b, const HistogramConfig& cfg) {
  return cross_histogram(tags, tags.channel_id(ch_a), tags.channel_id(ch_b), cfg);
}

CorrelationHistogram cross_histogram_sharded(const TimeTagStream& tags, std::uint8_t ch_a,
                                             std::uint8_t ch_b, const HistogramConfig& cfg,
                                             std::size_t shards) {
  if (ch_a == ch_b || shards <= 1) return cross_histogram(tags, ch_a, ch_b, cfg);
  const Binner binner(cfg, tags.header.tick_seconds);
  const auto A = channel_ticks(tags, ch_a);
  const auto B = channel_ticks(tags, ch_b);
  std::vector<std::future<CorrelationHistogram>> jobs;
  for (std::size_t s = 0; s < shards; ++s) {
    const std::size_t begin = A.size() * s / shards, end = A.size() * (s + 1) / shards;
    jobs.push_back(std::async(std::launch::async, [&, begin, end] {
      CorrelationHistogram part = empty_histogram(tags, ch_a, ch_b, cfg, binner);
      cross_block(A, begin, end, B, binner, cfg.rule, part.counts);
      return part;
    }));
  }
  std::vector<CorrelationHistogram> parts;
  for (auto& j : jobs) parts.push_back(j.get());
  return merge_histograms(parts);
}

CorrelationHistogram merge_histograms(const std::vector<CorrelationHistogram>& parts) {
  if (parts.empty()) throw ConfigError("nothing to merge");
  CorrelationHistogram out = parts.front();
  for (std::size_t p = 1; p < parts.size(); ++p) {
    const CorrelationHistogram& h = parts[p];
    if (h.counts.size() != out.counts.size() || h.bin_width != out.bin_width ||
        h.tick_seconds != out.tick_seconds)
      throw ConfigError("histograms have different binning");
    for (std::size_t k = 0; k < out.counts.size(); ++k) out.counts[k] += h.counts[k];
  }
  return out;
}

CorrelationHistogram auto_histogram(const TimeTagStream& tags, std::uint8_t ch,
                                    const HistogramConfig& cfg, double dead_time) {
  const Binner binner(cfg, tags.header.tick_seconds);
  CorrelationHistogram h = empty_histogram(tags, ch, ch, cfg, binner);
  h.dead_time = dead_time;
  const auto T = channel_ticks(tags, ch);
  const std::uint64_t W = binner.window_ticks;
  for (std::size_t i = 0; i < T.size(); ++i) {
    for (std::size_t j = i + 1; j < T.size() && T[j] - T[i] <= W; ++j) {
      const long dk = static_cast<long>(T[j] - T[i]);
      binner.add(h.counts, dk);
      binner.add(h.counts, -dk);
      if (cfg.rule == PairingRule::Consecutive) break;
    }
  }
  if (dead_time > 0.0)
    for (std::size_t k = 0; k < h.counts.size(); ++k)
      h.flagged[k] = std::abs(h.delay_s[k]) - 0.5 * cfg.bin_width < dead_time;
  return h;
}

CorrelationHistogram auto_histogram(const TimeTagStream& tags, const std::string& ch,
                                    const HistogramConfig& cfg, double dead_time) {
  return auto_histogram(tags, tags.channel_id(ch), cfg, dead_time);
}

PsdSpectrum psd_estimate(const CorrelationHistogram& hist, Window window) {
  std::vector<double> x(hist.counts.begin(), hist.counts.end());
  return sampled_psd(x, hist.bin_width, window, next_power_of_two(x.size()), true);
}

double alias_frequency(double f_hz, double sample_rate_hz) {
  if (!(f_hz > 0.0) || !(sample_rate_hz > 0.0)) throw ConfigError("frequencies must be positive");
  return std::abs(f_hz - sample_rate_hz * std::round(f_hz / sample_rate_hz));
}

ResolutionReport resolution_report(double span_s, double bin_width_s) {
  if (!(span_s > 0.0) || !(bin_width_s > 0.0)) throw ConfigError("span and bin width must be positive");
  ResolutionReport r;
  r.resolution_hz = 1.0 / (2.0 * span_s);
  r.max_frequency_hz = 1.0 / (2.0 * bin_width_s);
  r.note =
      "difference frequencies above max_frequency_hz alias into the band; timing at the few-ps "
      "level extends the range to about 100 GHz";
  return r;
}

PeakSignificance peak_significance(const PsdSpectrum& psd, double f_hz, std::size_t half_width,
                                   std::size_t ring_inner, std::size_t ring_outer) {
  PeakSignificance out;
  const double nyquist = psd.frequency_hz.back();
  out.observed_hz = f_hz > nyquist ? alias_frequency(f_hz, 2.0 * nyquist) : f_hz;
  const long n = static_cast<long>(psd.values.size());
  const long k = static_cast<long>(psd.nearest_bin(out.observed_hz));
  for (long i = k - static_cast<long>(half_width); i <= k + static_cast<long>(half_width); ++i)
    if (i >= 0 && i < n) out.power += psd.values[static_cast<std::size_t>(i)];
  double ring = 0.0;
  std::size_t count = 0;
  for (long d = static_cast<long>(ring_inner); d < static_cast<long>(ring_outer); ++d) {
    for (long i : {k - d, k + d}) {
      if (i < 1 || i >= n) continue;
      ring += psd.values[static_cast<std::size_t>(i)];
      ++count;
    }
  }
  const double width = static_cast<double>(2 * half_width + 1);
  const double level = count > 0 ? ring / static_cast<double>(count) : 0.0;
  out.noise_power = level * width;
  const double sigma = level * std::sqrt(width);
  out.z = sigma > 0.0 ? (out.power - out.noise_power) / sigma : 0.0;
  out.snr_db = out.noise_power > 0.0 ? 10.0 * std::log10(out.power / out.noise_power) : 0.0;
  return out;
}

LineTestResult singles_line_test(const TimeTagStream& tags, std::uint8_t ch, double f_hz,
                                 std::size_t n_frequencies) {
  const auto T = channel_ticks(tags, ch);
  LineTestResult r;
  r.n_frequencies = std::max<std::size_t>(n_frequencies, 4);
  r.events = T.size();
  if (T.size() < 2) throw ConfigError("too few events for a periodogram");
  const double tick = tags.header.tick_seconds;
  const double span = tags.header.duration > 0.0
                          ? tags.header.duration
                          : static_cast<double>(T.back() - T.front() + 1) * tick;
  const std::size_t K = r.n_frequencies;
  const double df = 1.0 / span;
  const double f0 = f_hz - 0.5 * static_cast<double>(K - 1) * df;
  std::vector<cplx> sums(K, 0.0);
  for (const std::uint64_t k : T) {
    const double kk = static_cast<double>(k);
    const double c0 = f0 * tick * kk, cs = df * tick * kk;
    cplx z = std::polar(1.0, -kTwoPi * (c0 - std::floor(c0)));
    const cplx step = std::polar(1.0, -kTwoPi * (cs - std::floor(cs)));
    for (std::size_t m = 0; m < K; ++m) {
      sums[m] += z;
      z *= step;
    }
  }
  std::vector<double> p(K);
  double mean = 0.0;
  for (std::size_t m = 0; m < K; ++m) {
    p[m] = std::norm(sums[m]) / static_cast<double>(T.size());
    mean += p[m];
  }
  r.mean_power = mean / static_cast<double>(K);
  std::vector<double> sorted = p;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<long>(K / 2), sorted.end());
  r.local_level = sorted[K / 2] / std::numbers::ln2;
  r.max_ratio = *std::max_element(p.begin(), p.end()) / r.local_level;
  r.threshold = std::log(static_cast<double>(K) / 0.0013498980316301);
  r.line_detected = r.max_ratio > r.threshold;
  return r;
}

}  // namespace ahc
