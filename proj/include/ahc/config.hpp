#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ahc/beat_fit.hpp"
#include "ahc/entanglement.hpp"
#include "ahc/event_simulator.hpp"
#include "ahc/spectral_model.hpp"
#include "ahc/timetag_analysis.hpp"

namespace ahc {

inline constexpr int kSchemaVersion = 1;

struct Diagnostic {
  std::string pointer;  // JSON pointer into the config document
  std::string message;
};

// Bundled JSON schema (subset: type, enum, required, properties,
// additionalProperties, items, minItems, maxItems, minimum, maximum,
// exclusiveMinimum, $ref into $defs).
const nlohmann::json& config_schema();

std::vector<Diagnostic> validate_against_schema(const nlohmann::json& doc,
                                                const nlohmann::json& schema);
std::vector<Diagnostic> validate_config(const nlohmann::json& doc);

struct FilterSettings {
  ModeCombSpec signal;
  ModeCombSpec idler;
  bool apply_to_pulsed = false;
};

struct SourceSection {
  std::string model = "cespdc";
  PumpSpectrum pump = MonochromaticPump{};
  ModeCombSpec signal;
  ModeCombSpec idler;
  PhaseMatchingEnvelope phase_matching = GaussianPhaseMatching{};
  std::optional<FilterSettings> filters;
  std::vector<LorentzianLine> lines;
  double line_linewidth = kTwoPi * 7.6e6;
  FrequencyGrid grid;
};

struct CorrelationSection {
  double decay_lengths = 20.0;
  std::size_t sum_points = 129;
  Window window = Window::Rectangular;
};

struct SimulationSection {
  SourceConfig source;
  DetectorModel detector_c;
  DetectorModel detector_d;
};

struct AnalysisSection {
  HistogramConfig histogram;
  Window window = Window::Hann;
  std::vector<double> probes_hz;
  std::vector<std::string> auto_channels;
  bool singles_line_test = false;
  FitOptions fit;
};

struct EntanglementSection {
  std::vector<double> sigmas;  // angular
  PulsedSourceModel model;
  std::vector<double> reference_entropies;
};

struct PipelineConfig {
  std::string name;
  std::uint64_t seed = 1;
  std::string output_dir;
  SourceSection source;
  CorrelationSection correlation;
  SimulationSection simulation;
  AnalysisSection analysis;
  std::optional<EntanglementSection> entanglement;
  nlohmann::json document;  // validated input, defaults not expanded
  std::string digest;       // sha256 of canonical document + code version
};

// Throws ConfigError carrying the first diagnostic's pointer.
PipelineConfig parse_config(const nlohmann::json& doc);
PipelineConfig load_config(const std::string& path);
nlohmann::json read_json_file(const std::string& path);

std::string sha256_hex(const std::string& data);
std::string config_digest(const nlohmann::json& doc);
std::string code_version();

// Looks up a bundled recipe by name (e.g. "fig3a_250MHz") or returns `ref`.
std::string resolve_config_path(const std::string& ref);

}  // namespace ahc
