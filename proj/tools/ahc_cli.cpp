#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "ahc/config.hpp"
#include "ahc/errors.hpp"
#include "ahc/pipeline.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitAmbiguity = 4;

struct Args {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> input;
  bool quiet = false;
  bool normalize_timestamps = false;
};

int report_error(const std::string& type, const std::string& message, int code,
                 json extra = json::object()) {
  json e = {{"error", {{"type", type}, {"message", message}, {"exit_code", code}}}};
  for (auto it = extra.begin(); it != extra.end(); ++it) e["error"][it.key()] = it.value();
  std::cerr << e.dump() << '\n';
  return code;
}

int run_validate(const Args& a) {
  const json doc = ahc::read_json_file(ahc::resolve_config_path(a.config));
  const std::vector<ahc::Diagnostic> diags = ahc::validate_config(doc);
  json out = {{"valid", diags.empty()}, {"diagnostics", json::array()}};
  for (const ahc::Diagnostic& d : diags)
    out["diagnostics"].push_back({{"pointer", d.pointer}, {"message", d.message}});
  std::cout << out.dump(2) << '\n';
  return diags.empty() ? kExitOk : kExitConfig;
}

int run_stage(const std::string& name, const Args& a) {
  json doc = ahc::read_json_file(ahc::resolve_config_path(a.config));
  if (a.seed && doc.is_object()) doc["seed"] = *a.seed;
  const ahc::PipelineConfig cfg = ahc::parse_config(doc);

  ahc::RunOptions opts;
  std::string out = a.out;
  if (out.empty()) {
    if (const char* env = std::getenv("AHC_OUT_DIR")) out = env;
  }
  if (out.empty()) out = cfg.output_dir.empty() ? "ahc_out" : cfg.output_dir;
  opts.out_dir = out;
  opts.input = a.input;
  opts.quiet = a.quiet;
  opts.normalize_timestamps = a.normalize_timestamps;
  std::filesystem::create_directories(opts.out_dir);

  if (name == "synth-jsa")
    ahc::run_synth_jsa(cfg, opts);
  else if (name == "compute-g2")
    ahc::run_compute_g2(cfg, opts);
  else if (name == "simulate-tags")
    ahc::run_simulate_tags(cfg, opts);
  else if (name == "correlate")
    ahc::run_correlate(cfg, opts);
  else if (name == "spectrum")
    ahc::run_spectrum(cfg, opts);
  else if (name == "fit")
    ahc::run_fit(cfg, opts);
  else if (name == "schmidt")
    ahc::run_schmidt(cfg, opts);
  else
    ahc::run_pipeline(cfg, opts);
  if (!a.quiet) std::cerr << "[ahc] wrote " << opts.out_dir.string() << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Autoheterodyne characterization of narrow-band photon pairs"};
  app.set_version_flag("--version", ahc::code_version());
  app.require_subcommand(1);
  Args args;

  const std::vector<std::pair<std::string, std::string>> commands{
      {"synth-jsa", "Build the joint spectral amplitude"},
      {"compute-g2", "Evaluate the G2 correlation set"},
      {"simulate-tags", "Simulate detector time tags"},
      {"correlate", "Histogram time-tag delays"},
      {"spectrum", "Power spectral density of the cross histogram"},
      {"fit", "Fit the beat note"},
      {"schmidt", "Entropy versus pump bandwidth sweep"},
      {"pipeline", "Run every stage and write report.json"},
      {"validate", "Check a config against the schema"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", args.config, "Config path or bundled recipe name")->required();
    if (name == "validate") continue;
    sub->add_option("--out", args.out, "Output directory (default $AHC_OUT_DIR)");
    sub->add_option("--seed", args.seed, "Override the config seed");
    sub->add_option("--in", args.input, "Input JSA or tag file for the stage");
    sub->add_flag("--quiet", args.quiet, "Suppress progress messages");
    sub->add_flag("--normalize-timestamps", args.normalize_timestamps,
                  "Omit wall-clock timestamps from artifacts");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return report_error("UsageError", e.what(), kExitConfig);
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    if (name == "validate") return run_validate(args);
    return run_stage(name, args);
  } catch (const ahc::ConfigError& e) {
    return report_error("ConfigError", e.what(), kExitConfig, {{"pointer", e.pointer()}});
  } catch (const ahc::AmbiguityError& e) {
    return report_error("AmbiguityError", e.what(), kExitAmbiguity, {{"candidates_hz", e.candidates_hz()}});
  } catch (const ahc::FitError& e) {
    return report_error("FitError", e.what(), kExitRuntime);
  } catch (const ahc::ParseError& e) {
    return report_error("ParseError", e.what(), kExitRuntime,
                        {{"byte_offset", e.byte_offset()}, {"record_index", e.record_index()}});
  } catch (const std::exception& e) {
    return report_error("RuntimeError", e.what(), kExitRuntime);
  }
}
