#include "ahc/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "ahc/errors.hpp"
#include "ahc/jsa_io.hpp"
#include "ahc/numeric.hpp"
#include "ahc/tag_io.hpp"

namespace ahc {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void log(const RunOptions& opts, const std::string& msg) {
  if (!opts.quiet) std::cerr << "[ahc] " << msg << '\n';
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

std::ofstream open_csv(const fs::path& path, const json& prov) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << std::setprecision(17);
  out << "# " << prov.dump() << '\n';
  return out;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

TimeTagStream load_tags(const std::string& path) {
  return ends_with(path, ".csv") ? read_tags_csv(path) : read_tags(path);
}

double wrap(double phi) {
  phi = std::remainder(phi, kTwoPi);
  if (phi <= -std::numbers::pi) phi += kTwoPi;
  return phi;
}

double dead_time_of(const PipelineConfig& cfg, const std::string& ch) {
  return ch == "D" ? cfg.simulation.detector_d.dead_time : cfg.simulation.detector_c.dead_time;
}

}  // namespace

JointSpectralAmplitude build_source_jsa(const PipelineConfig& cfg) {
  const SourceSection& s = cfg.source;
  if (s.model == "lorentzian_lines")
    return lorentzian_lines(s.grid.second, s.line_linewidth, s.lines, pump_center(s.pump));
  JointSpectralAmplitude jsa = build_cespdc_jsa(s.pump, s.signal, s.idler, s.phase_matching, s.grid);
  const bool cw = std::holds_alternative<MonochromaticPump>(s.pump);
  if (s.filters && (cw || s.filters->apply_to_pulsed))
    jsa = apply_fp_filters(jsa, s.filters->signal, s.filters->idler);
  return jsa;
}

G2Set compute_g2_set(const JointSpectralAmplitude& jsa, const PipelineConfig& cfg) {
  const CorrelationGrid grid =
      default_correlation_grid(jsa, cfg.correlation.decay_lengths, cfg.correlation.sum_points);
  return g2_set_from_jsa(jsa, grid);
}

SimulationResult simulate_tags(const G2Set& g2, const PipelineConfig& cfg) {
  SimulationResult r;
  r.pairs = sample_pairs(g2, cfg.simulation.source);
  r.tags = apply_detector_model(r.pairs.events, cfg.simulation.detector_c, cfg.simulation.detector_d,
                                cfg.simulation.source.seed, cfg.simulation.source.duration);
  r.tags.header.config_digest = cfg.digest;
  r.pairs.events.clear();
  r.pairs.events.shrink_to_fit();
  return r;
}

HistogramSet correlate_tags(const TimeTagStream& tags, const PipelineConfig& cfg) {
  HistogramSet h;
  h.cross = cross_histogram_sharded(tags, tags.channel_id("C"), tags.channel_id("D"),
                                    cfg.analysis.histogram, 4);
  for (const std::string& ch : cfg.analysis.auto_channels)
    h.autos.push_back(auto_histogram(tags, ch, cfg.analysis.histogram, dead_time_of(cfg, ch)));
  return h;
}

GhoshMandelResult fit_auto_fringe(const CorrelationHistogram& auto_hist, const BeatFitResult& cross,
                                  const FitOptions& opts) {
  double first = -1.0;
  for (std::size_t j = auto_hist.zero_bin(); j < auto_hist.counts.size(); ++j)
    if (!auto_hist.flagged[j]) {
      first = auto_hist.delay_s[j];
      break;
    }
  if (first < 0.0) throw FitError("auto histogram has no usable bins beyond the dead time");
  const double gamma = cross.envelope_decay_rate;
  const double omega = kTwoPi * cross.beat_frequency_hz;
  const double max_delay = auto_hist.delay_s.back();

  double tail = 0.0, n = 0.0;
  for (std::size_t j = 0; j < auto_hist.counts.size(); ++j)
    if (!auto_hist.flagged[j] && std::abs(auto_hist.delay_s[j]) >= 0.8 * max_delay) {
      tail += static_cast<double>(auto_hist.counts[j]);
      n += auto_hist.bin_width / auto_hist.tick_seconds;
    }
  const double background = n > 0.0 ? tail / n : 0.0;
  double near = 0.0;
  const std::size_t k0 = auto_hist.zero_bin() + static_cast<std::size_t>(std::round(first / auto_hist.bin_width));
  if (k0 < auto_hist.counts.size()) near = static_cast<double>(auto_hist.counts[k0]);
  const double amp = std::max(1.0, (near - background) * std::exp(gamma * first));

  FringeFit best;
  bool have = false;
  for (double phi : {cross.fringe_phase + std::numbers::pi, cross.fringe_phase}) {
    FringeFitRequest req;
    req.initial = {amp, gamma, 0.5, omega, phi, background};
    req.fix_gamma = true;
    req.fix_omega = true;
    req.min_abs_delay = first;
    req.max_abs_delay = std::min(max_delay, first + opts.fit_decay_lengths / gamma);
    const FringeFit f = fit_fringe(auto_hist, req);
    if (!have || f.chi2 < best.chi2) {
      best = f;
      have = true;
    }
  }
  GhoshMandelResult r;
  r.channel = auto_hist.channel_a;
  r.phase = best.params.phase;
  r.phase_offset = wrap(best.params.phase - cross.fringe_phase);
  r.visibility = best.params.visibility;
  r.visibility_stderr = best.visibility_stderr;
  r.min_abs_delay = first;
  return r;
}

json provenance(const PipelineConfig& cfg, const RunOptions& opts) {
  json p = {{"config_digest", cfg.digest},
            {"code_version", code_version()},
            {"config_name", cfg.name},
            {"seed", cfg.seed}};
  p["created_utc"] = opts.normalize_timestamps ? json(nullptr) : json(utc_now());
  return p;
}

json to_json(const BeatFitResult& r) {
  json c = json::array();
  for (const ContaminationEntry& e : r.contamination)
    c.push_back({{"probe_hz", e.probe_hz}, {"observed_hz", e.observed_hz}, {"relative_db", e.relative_db}});
  return {{"beat_frequency_hz", r.beat_frequency_hz},
          {"psd_centroid_hz", r.psd_centroid_hz},
          {"psd_peak_hz", r.psd_peak_hz},
          {"psd_fwhm_hz", r.psd_fwhm_hz},
          {"envelope_decay_rate_per_s", r.envelope_decay_rate},
          {"fringe_period_s", r.beat_frequency_hz > 0.0 ? 1.0 / r.beat_frequency_hz : 0.0},
          {"visibility", r.visibility},
          {"visibility_stderr", r.visibility_stderr},
          {"fringe_phase_rad", r.fringe_phase},
          {"amplitude", r.amplitude},
          {"background_per_tick", r.background},
          {"reduced_chi2", r.reduced_chi2},
          {"contamination", c}};
}

json to_json(const CorrelationHistogram& h) {
  return {{"channel_a", h.channel_a},
          {"channel_b", h.channel_b},
          {"bin_width_s", h.bin_width},
          {"tick_seconds", h.tick_seconds},
          {"dead_time_s", h.dead_time},
          {"duration_s", h.duration},
          {"pairing_rule", to_string(h.rule)},
          {"first_delay_s", h.delay_s.empty() ? 0.0 : h.delay_s.front()},
          {"total", h.total()},
          {"counts", h.counts},
          {"flagged", h.flagged}};
}

json to_json(const GhoshMandelResult& r) {
  return {{"channel", r.channel},
          {"fringe_phase_rad", r.phase},
          {"phase_offset_rad", r.phase_offset},
          {"visibility", r.visibility},
          {"visibility_stderr", r.visibility_stderr},
          {"min_abs_delay_s", r.min_abs_delay}};
}

json to_json(const LineTestResult& r) {
  return {{"mean_power", r.mean_power},       {"local_level", r.local_level},
          {"max_ratio", r.max_ratio},         {"threshold", r.threshold},
          {"n_frequencies", r.n_frequencies}, {"events", r.events},
          {"line_detected", r.line_detected}};
}

json to_json(const ResolutionReport& r) {
  return {{"resolution_hz", r.resolution_hz}, {"max_frequency_hz", r.max_frequency_hz}, {"note", r.note}};
}

json jsa_summary(const JointSpectralAmplitude& jsa) {
  json j = jsa_header(jsa);
  j["l2_norm"] = jsa.norm();
  const FrequencyGrid& g = jsa.grid;
  if (g.coordinates == Coordinates::SumDifference) {
    std::vector<double> marginal(g.second.n, 0.0);
    for (std::size_t r = 0; r < g.first.n; ++r)
      for (std::size_t c = 0; c < g.second.n; ++c) marginal[c] += std::norm(jsa.at(r, c));
    const std::vector<double> x = g.second.points();
    j["omega_minus_peak_hz"] = hertz(x[argmax(marginal)]);
    j["omega_minus_fwhm_hz"] = hertz(fwhm(x, marginal));
  }
  if (g.cw_collapsed || g.coordinates == Coordinates::SignalIdler ||
      std::abs(g.first.step() - g.second.step()) <= 1e-12 * g.first.step())
    j["signal_marginal_fwhm_hz"] = hertz(signal_marginal_fwhm(jsa));
  return j;
}

json g2_summary(const G2Set& g2) {
  const CorrelationGrid& grid = g2.cd.grid;
  const std::size_t nm = grid.diff.n;
  double ab_max = 0.0, resid = 0.0, resid_even = 0.0, asym = 0.0, cd_max = 0.0;
  for (std::size_t k = 0; k < g2.ab.values.size(); ++k) {
    const double ab = g2.ab.values[k];
    const double ab_mirror = g2.ab.values[(k / nm) * nm + (nm - 1 - k % nm)];
    const double total = g2.cc.values[k] + g2.dd.values[k] + g2.cd.values[k];
    ab_max = std::max(ab_max, ab);
    cd_max = std::max(cd_max, g2.cd.values[k]);
    resid = std::max(resid, std::abs(total - ab));
    resid_even = std::max(resid_even, std::abs(total - 0.5 * (ab + ab_mirror)));
    asym = std::max(asym, std::abs(ab - ab_mirror));
  }
  const auto rel = [&](double v) { return ab_max > 0.0 ? v / ab_max : 0.0; };
  const std::size_t mid = nm / 2;
  double cd_zero = 0.0;
  for (std::size_t r = 0; r < (grid.cw_collapsed ? 1 : grid.sum.n); ++r)
    cd_zero = std::max(cd_zero, g2.cd.at(r, mid));
  return {{"cw_collapsed", grid.cw_collapsed},
          {"t_minus_axis", {{"center_s", grid.diff.center}, {"span_s", grid.diff.span}, {"n", grid.diff.n}}},
          {"t_plus_axis", {{"center_s", grid.sum.center}, {"span_s", grid.sum.span}, {"n", grid.sum.n}}},
          {"conservation_residual_relative", rel(resid)},
          {"conservation_residual_even_ab_relative", rel(resid_even)},
          {"ab_mirror_asymmetry_relative", rel(asym)},
          {"cd_at_zero_relative", cd_max > 0.0 ? cd_zero / cd_max : 0.0}};
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void write_histogram_csv(const fs::path& path, const CorrelationHistogram& h, const json& prov) {
  std::ofstream out = open_csv(path, prov);
  out << "delay_s,count\n";
  for (std::size_t j = 0; j < h.counts.size(); ++j) out << h.delay_s[j] << ',' << h.counts[j] << '\n';
}

void write_psd_csv(const fs::path& path, const PsdSpectrum& psd, const json& prov) {
  std::ofstream out = open_csv(path, prov);
  if (psd.frequency2_hz.empty()) {
    out << "freq_hz,power\n";
    for (std::size_t k = 0; k < psd.values.size(); ++k)
      out << psd.frequency_hz[k] << ',' << psd.values[k] << '\n';
    return;
  }
  out << "freq_plus_hz,freq_minus_hz,power\n";
  const std::size_t nc = psd.frequency2_hz.size();
  for (std::size_t r = 0; r < psd.frequency_hz.size(); ++r)
    for (std::size_t c = 0; c < nc; ++c)
      out << psd.frequency_hz[r] << ',' << psd.frequency2_hz[c] << ',' << psd.values[r * nc + c] << '\n';
}

void write_g2_csv(const fs::path& path, const G2Set& g2, const json& prov) {
  std::ofstream out = open_csv(path, prov);
  const CorrelationGrid& grid = g2.cd.grid;
  const std::size_t rows = grid.cw_collapsed ? 1 : grid.sum.n;
  out << (grid.cw_collapsed ? "" : "t_plus_s,") << "t_minus_s,cd,cc,dd,ab\n";
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < grid.diff.n; ++c) {
      if (!grid.cw_collapsed) out << grid.sum.point(r) << ',';
      out << grid.diff.point(c) << ',' << g2.cd.at(r, c) << ',' << g2.cc.at(r, c) << ','
          << g2.dd.at(r, c) << ',' << g2.ab.at(r, c) << '\n';
    }
}

void write_sweep_csv(const fs::path& path, const std::vector<SweepRow>& rows, const json& prov) {
  std::ofstream out = open_csv(path, prov);
  out << "sigma_p_hz,entropy_nat,entropy_bits,schmidt_number\n";
  for (const SweepRow& r : rows)
    out << hertz(r.sigma_p) << ',' << r.spectrum.entropy_nat << ',' << r.spectrum.entropy_bits << ','
        << r.spectrum.schmidt_number << '\n';
}

namespace {

JointSpectralAmplitude jsa_for(const PipelineConfig& cfg, const RunOptions& opts) {
  if (opts.input) {
    log(opts, "reading JSA " + *opts.input);
    return read_jsa(*opts.input);
  }
  log(opts, "building JSA");
  return build_source_jsa(cfg);
}

TimeTagStream tags_for(const PipelineConfig& cfg, const RunOptions& opts) {
  if (opts.input) {
    log(opts, "reading tags " + *opts.input);
    return load_tags(*opts.input);
  }
  const JointSpectralAmplitude jsa = jsa_for(cfg, opts);
  log(opts, "computing G2 and simulating detections");
  return simulate_tags(compute_g2_set(jsa, cfg), cfg).tags;
}

json histogram_artifacts(const HistogramSet& h, const json& prov, const RunOptions& opts) {
  write_histogram_csv(opts.out_dir / "histogram_CD.csv", h.cross, prov);
  json j = {{"cross", to_json(h.cross)}, {"autos", json::array()}};
  for (const CorrelationHistogram& a : h.autos) {
    write_histogram_csv(opts.out_dir / ("histogram_" + a.channel_a + a.channel_a + ".csv"), a, prov);
    j["autos"].push_back(to_json(a));
  }
  return j;
}

json resolution_json(const PipelineConfig& cfg, const CorrelationHistogram& h) {
  return {{"histogram_window", to_json(resolution_report(cfg.analysis.histogram.max_delay, h.bin_width))},
          {"acquisition", to_json(resolution_report(h.duration, h.bin_width))}};
}

json significance_json(const PsdSpectrum& psd, const std::vector<double>& probes, double bin_width) {
  json out = json::array();
  for (double f : probes) {
    const double fs = 1.0 / bin_width;
    const double observed = f > 0.5 * fs ? alias_frequency(f, fs) : f;
    const PeakSignificance s = peak_significance(psd, observed);
    out.push_back({{"probe_hz", f}, {"observed_hz", s.observed_hz}, {"z", s.z}, {"snr_db", s.snr_db}});
  }
  return out;
}

}  // namespace

json run_synth_jsa(const PipelineConfig& cfg, const RunOptions& opts) {
  const json prov = provenance(cfg, opts);
  log(opts, "building JSA");
  JointSpectralAmplitude jsa = build_source_jsa(cfg);
  jsa.meta.provenance["run"] = prov;
  write_jsa(jsa, (opts.out_dir / "jsa.ahcjsa").string());
  json j = {{"provenance", prov}, {"jsa", jsa_summary(jsa)}};
  write_json(opts.out_dir / "jsa_summary.json", j);
  return j;
}

json run_compute_g2(const PipelineConfig& cfg, const RunOptions& opts) {
  const json prov = provenance(cfg, opts);
  const JointSpectralAmplitude jsa = jsa_for(cfg, opts);
  log(opts, "computing G2");
  const G2Set g2 = compute_g2_set(jsa, cfg);
  write_g2_csv(opts.out_dir / "g2.csv", g2, prov);
  const PsdSpectrum psd = psd_of_g2(g2.cd, cfg.correlation.window);
  write_psd_csv(opts.out_dir / "g2_psd_CD.csv", psd, prov);
  json j = {{"provenance", prov}, {"g2", g2_summary(g2)}};
  write_json(opts.out_dir / "g2_summary.json", j);
  return j;
}

json run_simulate_tags(const PipelineConfig& cfg, const RunOptions& opts) {
  const json prov = provenance(cfg, opts);
  const JointSpectralAmplitude jsa = jsa_for(cfg, opts);
  log(opts, "computing G2");
  const G2Set g2 = compute_g2_set(jsa, cfg);
  log(opts, "simulating detections");
  const SimulationResult sim = simulate_tags(g2, cfg);
  write_tags(sim.tags, (opts.out_dir / "tags.ahctags").string());
  json j = {{"provenance", prov},
            {"pairs", {{"cd", sim.pairs.counts[0]}, {"cc", sim.pairs.counts[1]}, {"dd", sim.pairs.counts[2]}}},
            {"outcome_probabilities", sim.pairs.probabilities},
            {"detections", {{"C", sim.tags.count(kChannelC)}, {"D", sim.tags.count(kChannelD)}}}};
  write_json(opts.out_dir / "simulation.json", j);
  return j;
}

json run_correlate(const PipelineConfig& cfg, const RunOptions& opts) {
  const json prov = provenance(cfg, opts);
  const TimeTagStream tags = tags_for(cfg, opts);
  log(opts, "histogramming");
  const HistogramSet h = correlate_tags(tags, cfg);
  json j = {{"provenance", prov}, {"histograms", histogram_artifacts(h, prov, opts)}};
  write_json(opts.out_dir / "histograms.json", j);
  return j;
}

json run_spectrum(const PipelineConfig& cfg, const RunOptions& opts) {
  const json prov = provenance(cfg, opts);
  const TimeTagStream tags = tags_for(cfg, opts);
  const HistogramSet h = correlate_tags(tags, cfg);
  log(opts, "estimating spectrum");
  const PsdSpectrum psd = psd_estimate(h.cross, cfg.analysis.window);
  write_psd_csv(opts.out_dir / "psd_CD.csv", psd, prov);
  json j = {{"provenance", prov},
            {"window", to_string(psd.window)},
            {"normalization", psd.normalization},
            {"resolution", resolution_json(cfg, h.cross)},
            {"probes", significance_json(psd, cfg.analysis.probes_hz, h.cross.bin_width)}};
  write_json(opts.out_dir / "spectrum.json", j);
  return j;
}

json run_fit(const PipelineConfig& cfg, const RunOptions& opts) {
  const json prov = provenance(cfg, opts);
  const TimeTagStream tags = tags_for(cfg, opts);
  const HistogramSet h = correlate_tags(tags, cfg);
  const PsdSpectrum psd = psd_estimate(h.cross, cfg.analysis.window);
  log(opts, "fitting beat");
  const BeatFitResult fit = fit_beat(psd, h.cross, cfg.analysis.probes_hz, cfg.analysis.fit);
  json j = {{"provenance", prov}, {"fit", to_json(fit)}};
  write_json(opts.out_dir / "fit.json", j);
  return j;
}

json run_schmidt(const PipelineConfig& cfg, const RunOptions& opts) {
  if (!cfg.entanglement) throw ConfigError("config has no entanglement section", "/entanglement");
  const json prov = provenance(cfg, opts);
  log(opts, "Schmidt decompositions");
  const EntanglementSection& e = *cfg.entanglement;
  const std::vector<SweepRow> rows = entropy_vs_pump_sweep(e.sigmas, e.model);
  write_sweep_csv(opts.out_dir / "schmidt.csv", rows, prov);
  json table = json::array();
  for (const SweepRow& r : rows) {
    json row = to_json(r.spectrum);
    row["sigma_p_hz"] = hertz(r.sigma_p);
    row["grid_points_per_axis"] = r.grid_points;
    table.push_back(row);
  }
  json j = {{"provenance", prov},
            {"model", {{"linewidth_hz", hertz(e.model.linewidth)},
                       {"omega_minus0_hz", hertz(e.model.omega_minus0)},
                       {"include_filters", e.model.include_filters}}},
            {"table", table}};
  if (!e.reference_entropies.empty()) {
    const BaseMatch m = best_matching_base(rows, e.reference_entropies);
    j["reference"] = {{"entropies", e.reference_entropies},
                      {"best_base", m.base},
                      {"relative_errors", m.relative_errors},
                      {"mean_relative_error", m.mean_relative_error}};
  }
  write_json(opts.out_dir / "schmidt.json", j);
  return j;
}

json run_pipeline(const PipelineConfig& cfg, const RunOptions& opts) {
  const json prov = provenance(cfg, opts);
  json report = {{"provenance", prov}};

  log(opts, "building JSA");
  JointSpectralAmplitude jsa = build_source_jsa(cfg);
  jsa.meta.provenance["run"] = prov;
  write_jsa(jsa, (opts.out_dir / "jsa.ahcjsa").string());
  report["jsa"] = jsa_summary(jsa);

  log(opts, "computing G2");
  const G2Set g2 = compute_g2_set(jsa, cfg);
  write_g2_csv(opts.out_dir / "g2.csv", g2, prov);
  write_psd_csv(opts.out_dir / "g2_psd_CD.csv", psd_of_g2(g2.cd, cfg.correlation.window), prov);
  report["g2"] = g2_summary(g2);

  log(opts, "simulating detections");
  const SimulationResult sim = simulate_tags(g2, cfg);
  write_tags(sim.tags, (opts.out_dir / "tags.ahctags").string());
  report["simulation"] = {
      {"pairs", {{"cd", sim.pairs.counts[0]}, {"cc", sim.pairs.counts[1]}, {"dd", sim.pairs.counts[2]}}},
      {"outcome_probabilities", sim.pairs.probabilities},
      {"detections", {{"C", sim.tags.count(kChannelC)}, {"D", sim.tags.count(kChannelD)}}}};

  log(opts, "histogramming");
  const HistogramSet h = correlate_tags(sim.tags, cfg);
  report["histograms"] = histogram_artifacts(h, prov, opts);

  log(opts, "estimating spectrum");
  const PsdSpectrum psd = psd_estimate(h.cross, cfg.analysis.window);
  write_psd_csv(opts.out_dir / "psd_CD.csv", psd, prov);
  report["spectrum"] = {{"window", to_string(psd.window)},
                        {"normalization", psd.normalization},
                        {"resolution", resolution_json(cfg, h.cross)},
                        {"probes", significance_json(psd, cfg.analysis.probes_hz, h.cross.bin_width)}};

  log(opts, "fitting beat");
  const BeatFitResult fit = fit_beat(psd, h.cross, cfg.analysis.probes_hz, cfg.analysis.fit);
  report["fit"] = to_json(fit);

  json gm = json::array();
  for (const CorrelationHistogram& a : h.autos) gm.push_back(to_json(fit_auto_fringe(a, fit, cfg.analysis.fit)));
  report["ghosh_mandel"] = gm;

  if (cfg.analysis.singles_line_test) {
    json lt = json::object();
    for (const char* ch : {"C", "D"})
      lt[ch] = to_json(singles_line_test(sim.tags, sim.tags.channel_id(ch), fit.beat_frequency_hz));
    report["singles_line_test"] = lt;
  }

  if (cfg.entanglement) {
    RunOptions sub = opts;
    report["entanglement"] = run_schmidt(cfg, sub)["table"];
  }
  write_json(opts.out_dir / "report.json", report);
  return report;
}

}  // namespace ahc
