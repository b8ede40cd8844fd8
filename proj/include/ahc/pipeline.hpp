#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ahc/beat_fit.hpp"
#include "ahc/config.hpp"
#include "ahc/correlation_engine.hpp"
#include "ahc/entanglement.hpp"
#include "ahc/event_simulator.hpp"
#include "ahc/timetag_analysis.hpp"

namespace ahc {

JointSpectralAmplitude build_source_jsa(const PipelineConfig& cfg);
G2Set compute_g2_set(const JointSpectralAmplitude& jsa, const PipelineConfig& cfg);

struct SimulationResult {
  PairSample pairs;  // events cleared after detection to save memory
  TimeTagStream tags;
};
SimulationResult simulate_tags(const G2Set& g2, const PipelineConfig& cfg);

struct HistogramSet {
  CorrelationHistogram cross;  // C -> D
  std::vector<CorrelationHistogram> autos;
};
HistogramSet correlate_tags(const TimeTagStream& tags, const PipelineConfig& cfg);

// Fringe of a same-detector histogram beyond the dead time, with decay rate
// and beat frequency held at the cross-histogram values.
struct GhoshMandelResult {
  std::string channel;
  double phase = 0.0;
  double phase_offset = 0.0;  // auto minus cross, wrapped to (-pi, pi]
  double visibility = 0.0;
  double visibility_stderr = 0.0;
  double min_abs_delay = 0.0;
};
GhoshMandelResult fit_auto_fringe(const CorrelationHistogram& auto_hist, const BeatFitResult& cross,
                                  const FitOptions& opts);

struct RunOptions {
  std::filesystem::path out_dir;
  std::optional<std::string> input;
  bool quiet = false;
  bool normalize_timestamps = false;
};

nlohmann::json provenance(const PipelineConfig& cfg, const RunOptions& opts);

nlohmann::json to_json(const BeatFitResult& r);
nlohmann::json to_json(const CorrelationHistogram& h);
nlohmann::json to_json(const GhoshMandelResult& r);
nlohmann::json to_json(const LineTestResult& r);
nlohmann::json to_json(const ResolutionReport& r);
nlohmann::json jsa_summary(const JointSpectralAmplitude& jsa);
nlohmann::json g2_summary(const G2Set& g2);

// CSV writers. The first line is "# " followed by the provenance JSON.
void write_histogram_csv(const std::filesystem::path& path, const CorrelationHistogram& h,
                         const nlohmann::json& prov);
void write_psd_csv(const std::filesystem::path& path, const PsdSpectrum& psd,
                   const nlohmann::json& prov);
void write_g2_csv(const std::filesystem::path& path, const G2Set& g2, const nlohmann::json& prov);
void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows,
                     const nlohmann::json& prov);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

// Subcommand entry points. Each writes its artifacts into opts.out_dir and
// returns the JSON summary it wrote.
nlohmann::json run_synth_jsa(const PipelineConfig& cfg, const RunOptions& opts);
nlohmann::json run_compute_g2(const PipelineConfig& cfg, const RunOptions& opts);
nlohmann::json run_simulate_tags(const PipelineConfig& cfg, const RunOptions& opts);
nlohmann::json run_correlate(const PipelineConfig& cfg, const RunOptions& opts);
nlohmann::json run_spectrum(const PipelineConfig& cfg, const RunOptions& opts);
nlohmann::json run_fit(const PipelineConfig& cfg, const RunOptions& opts);
nlohmann::json run_schmidt(const PipelineConfig& cfg, const RunOptions& opts);
nlohmann::json run_pipeline(const PipelineConfig& cfg, const RunOptions& opts);

}  // namespace ahc
