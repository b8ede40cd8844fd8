#include "ahc/config.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "ahc/errors.hpp"
#include "ahc_schema.hpp"

namespace ahc {

using nlohmann::json;

namespace {

std::string escape_token(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~')
      out += "~0";
    else if (c == '/')
      out += "~1";
    else
      out += c;
  }
  return out;
}

bool type_matches(const json& node, const std::string& type) {
  if (type == "object") return node.is_object();
  if (type == "array") return node.is_array();
  if (type == "string") return node.is_string();
  if (type == "boolean") return node.is_boolean();
  if (type == "integer") return node.is_number_integer();
  if (type == "number") return node.is_number();
  if (type == "null") return node.is_null();
  return false;
}

class SchemaWalker {
 public:
  explicit SchemaWalker(const json& root) : root_(root) {}

  void walk(const json& node, const json& schema_in, const std::string& ptr,
            std::vector<Diagnostic>& out) const {
    const json& schema = resolve(schema_in);
    if (schema.contains("type")) {
      const std::string type = schema["type"];
      if (!type_matches(node, type)) {
        out.push_back({ptr, "expected " + type});
        return;
      }
    }
    if (schema.contains("enum")) {
      bool ok = false;
      for (const json& e : schema["enum"]) ok = ok || e == node;
      if (!ok) out.push_back({ptr, "value " + node.dump() + " is not one of " + schema["enum"].dump()});
    }
    if (node.is_number()) {
      const double v = node.get<double>();
      if (schema.contains("minimum") && v < schema["minimum"].get<double>())
        out.push_back({ptr, "must be >= " + schema["minimum"].dump()});
      if (schema.contains("maximum") && v > schema["maximum"].get<double>())
        out.push_back({ptr, "must be <= " + schema["maximum"].dump()});
      if (schema.contains("exclusiveMinimum") && !(v > schema["exclusiveMinimum"].get<double>()))
        out.push_back({ptr, "must be > " + schema["exclusiveMinimum"].dump()});
    }
    if (node.is_object()) {
      const json props = schema.value("properties", json::object());
      if (schema.contains("required"))
        for (const json& key : schema["required"])
          if (!node.contains(key.get<std::string>()))
            out.push_back({ptr, "missing required key '" + key.get<std::string>() + "'"});
      const bool closed = schema.contains("additionalProperties") &&
                          schema["additionalProperties"] == false;
      for (auto it = node.begin(); it != node.end(); ++it) {
        const std::string child = ptr + "/" + escape_token(it.key());
        if (props.contains(it.key()))
          walk(it.value(), props[it.key()], child, out);
        else if (closed)
          out.push_back({child, "unknown key '" + it.key() + "'"});
      }
    }
    if (node.is_array()) {
      if (schema.contains("minItems") && node.size() < schema["minItems"].get<std::size_t>())
        out.push_back({ptr, "needs at least " + schema["minItems"].dump() + " items"});
      if (schema.contains("maxItems") && node.size() > schema["maxItems"].get<std::size_t>())
        out.push_back({ptr, "allows at most " + schema["maxItems"].dump() + " items"});
      if (schema.contains("items"))
        for (std::size_t i = 0; i < node.size(); ++i)
          walk(node[i], schema["items"], ptr + "/" + std::to_string(i), out);
    }
  }

 private:
  const json& resolve(const json& schema) const {
    if (!schema.contains("$ref")) return schema;
    const std::string ref = schema["$ref"];
    if (ref.rfind("#/", 0) != 0) throw Error("unsupported schema reference " + ref);
    return root_.at(json::json_pointer(ref.substr(1)));
  }

  const json& root_;
};

double hz(const json& j, const char* key, double fallback) {
  return j.contains(key) ? angular(j[key].get<double>()) : fallback;
}

ModeCombSpec parse_comb(const json& j) {
  ModeCombSpec c;
  c.center = angular(j["center_hz"].get<double>());
  c.linewidth = angular(j["linewidth_hz"].get<double>());
  c.fsr = angular(j["fsr_hz"].get<double>());
  if (j.contains("mode_range")) {
    c.m_min = j["mode_range"][0];
    c.m_max = j["mode_range"][1];
  }
  return c;
}

DetectorModel parse_detector(const json& j) {
  DetectorModel d;
  d.efficiency = j.value("efficiency", d.efficiency);
  d.dead_time = j.value("dead_time_s", d.dead_time);
  d.jitter_sigma = j.value("jitter_sigma_s", d.jitter_sigma);
  d.clock_tick = j.value("clock_tick_s", d.clock_tick);
  d.dark_rate = j.value("dark_rate_hz", d.dark_rate);
  return d;
}

void semantic_checks(const json& doc, std::vector<Diagnostic>& out) {
  const json& src = doc["source"];
  const std::string model = src["model"];
  const std::string pump = src["pump"]["type"];
  if (pump == "pulsed" && !src["pump"].contains("sigma_hz"))
    out.push_back({"/source/pump", "missing required key 'sigma_hz' for a pulsed pump"});
  if (model == "cespdc") {
    for (const char* k : {"signal", "idler"})
      if (!src.contains(k))
        out.push_back({"/source", std::string("missing required key '") + k + "' for the cespdc model"});
  } else {
    if (!src.contains("lines"))
      out.push_back({"/source", "missing required key 'lines' for the lorentzian_lines model"});
    if (pump != "cw")
      out.push_back({"/source/pump/type", "the lorentzian_lines model supports cw pumps only"});
  }
  auto check_range = [&](const json& parent, const std::string& ptr) {
    if (!parent.contains("mode_range")) return;
    const json& r = parent["mode_range"];
    if (r.size() == 2 && r[0].is_number_integer() && r[1].is_number_integer() &&
        (r[0].get<long>() > 0 || r[1].get<long>() < 0))
      out.push_back({ptr + "/mode_range", "mode range must contain 0"});
  };
  for (const char* k : {"signal", "idler"})
    if (src.contains(k) && src[k].is_object()) check_range(src[k], std::string("/source/") + k);
  if (src.contains("filters") && src["filters"].is_object()) check_range(src["filters"], "/source/filters");
  const bool flat = src.contains("phase_matching") && src["phase_matching"].value("type", "") == "flat";
  if (model == "cespdc" && flat)
    for (const char* k : {"signal", "idler"})
      if (src.contains(k) && src[k].is_object() && !src[k].contains("mode_range"))
        out.push_back({std::string("/source/") + k, "flat phase matching needs an explicit mode_range"});
  if (src.contains("grid")) {
    for (const char* k : {"diff_points", "sum_points"}) {
      const json& g = src["grid"];
      if (g.contains(k) && g[k].is_number_integer()) {
        const long n = g[k];
        if (n > 0 && !is_power_of_two(static_cast<std::size_t>(n)))
          out.push_back({std::string("/source/grid/") + k, "must be a power of two"});
      }
    }
  }
  if (doc.contains("simulation") && doc["simulation"].contains("detectors")) {
    const json& d = doc["simulation"]["detectors"];
    const double tc = d.value("C", json::object()).value("clock_tick_s", 625e-12);
    const double td = d.value("D", json::object()).value("clock_tick_s", 625e-12);
    if (tc != td) out.push_back({"/simulation/detectors", "detectors C and D must share one clock tick"});
  }
  if (doc.contains("entanglement") && doc["entanglement"].contains("reference_entropies") &&
      doc["entanglement"]["reference_entropies"].size() != doc["entanglement"]["sigma_p_hz"].size())
    out.push_back({"/entanglement/reference_entropies", "must match sigma_p_hz in length"});
}

FrequencyGrid parse_grid(const json& src, const SourceSection& s) {
  const json g = src.value("grid", json::object());
  double gamma = s.line_linewidth, wm0 = 0.0;
  if (s.model == "cespdc") {
    gamma = std::max(s.signal.linewidth, s.idler.linewidth);
    wm0 = s.signal.center - s.idler.center;
  } else {
    for (const LorentzianLine& l : s.lines) wm0 = std::max(wm0, std::abs(l.omega_minus0));
  }
  Axis diff = default_cw_axis(wm0, gamma);
  if (g.contains("diff_span_hz")) diff.span = angular(g["diff_span_hz"].get<double>());
  if (g.contains("diff_points")) diff.n = g["diff_points"];
  const double p0 = pump_center(s.pump);
  if (std::holds_alternative<MonochromaticPump>(s.pump)) return FrequencyGrid::cw(p0, diff);
  const double sigma = std::get<GaussianPulsePump>(s.pump).sigma;
  const std::string coords = g.value("coordinates", "sum_difference");
  if (coords == "signal_idler") {
    Axis a = diff, b = diff;
    a.center = s.signal.center;
    b.center = s.idler.center;
    return FrequencyGrid::signal_idler(a, b);
  }
  Axis sum{p0, g.contains("sum_span_hz") ? angular(g["sum_span_hz"].get<double>()) : 8.0 * sigma,
           g.value("sum_points", std::size_t{128})};
  return FrequencyGrid::sum_difference(sum, diff);
}

std::string format_diagnostics(const std::vector<Diagnostic>& d) {
  std::ostringstream s;
  for (std::size_t i = 0; i < d.size(); ++i) s << (i ? "; " : "") << d[i].pointer << ": " << d[i].message;
  return s.str();
}

}  // namespace

const json& config_schema() {
  static const json schema = json::parse(detail::kConfigSchemaText);
  return schema;
}

std::vector<Diagnostic> validate_against_schema(const json& doc, const json& schema) {
  std::vector<Diagnostic> out;
  SchemaWalker(schema).walk(doc, schema, "", out);
  return out;
}

std::vector<Diagnostic> validate_config(const json& doc) {
  std::vector<Diagnostic> out = validate_against_schema(doc, config_schema());
  if (out.empty()) semantic_checks(doc, out);
  return out;
}

PipelineConfig parse_config(const json& doc) {
  const std::vector<Diagnostic> diags = validate_config(doc);
  if (!diags.empty()) throw ConfigError(format_diagnostics(diags), diags.front().pointer);

  PipelineConfig c;
  c.document = doc;
  c.name = doc.value("name", "");
  c.seed = doc.value("seed", std::uint64_t{1});
  c.output_dir = doc.value("output_dir", "");

  const json& src = doc["source"];
  SourceSection& s = c.source;
  s.model = src["model"];
  const json& pump = src["pump"];
  if (pump["type"] == "cw")
    s.pump = MonochromaticPump{hz(pump, "frequency_hz", 0.0)};
  else
    s.pump = GaussianPulsePump{hz(pump, "center_hz", 0.0), hz(pump, "sigma_hz", 0.0)};
  if (src.contains("phase_matching")) {
    const json& pm = src["phase_matching"];
    if (pm["type"] == "flat") {
      s.phase_matching = FlatPhaseMatching{};
    } else {
      GaussianPhaseMatching g;
      g.center = hz(pm, "center_hz", g.center);
      g.fwhm = hz(pm, "fwhm_hz", g.fwhm);
      s.phase_matching = g;
    }
  }
  s.line_linewidth = hz(src, "linewidth_hz", s.line_linewidth);
  if (s.model == "cespdc") {
    s.signal = parse_comb(src["signal"]);
    s.idler = parse_comb(src["idler"]);
    const double p0 = pump_center(s.pump);
    if (!src["signal"].contains("mode_range"))
      std::tie(s.signal.m_min, s.signal.m_max) = default_mode_range(s.signal, s.phase_matching, p0, true);
    if (!src["idler"].contains("mode_range"))
      std::tie(s.idler.m_min, s.idler.m_max) = default_mode_range(s.idler, s.phase_matching, p0, false);
  } else {
    for (const json& l : src["lines"])
      s.lines.push_back({angular(l["omega_minus_hz"].get<double>()), l.value("relative_intensity", 1.0)});
  }
  if (src.contains("filters") && src["filters"].value("enabled", true)) {
    const json& f = src["filters"];
    FilterSettings fs;
    const double lw = angular(f["linewidth_hz"].get<double>());
    const double fsr = angular(f["fsr_hz"].get<double>());
    int lo = -2, hi = 2;
    if (f.contains("mode_range")) {
      lo = f["mode_range"][0];
      hi = f["mode_range"][1];
    }
    fs.signal = {hz(f, "signal_center_hz", s.signal.center), lw, fsr, lo, hi};
    fs.idler = {hz(f, "idler_center_hz", s.idler.center), lw, fsr, lo, hi};
    fs.apply_to_pulsed = f.value("apply_to_pulsed", false);
    s.filters = fs;
  }
  s.grid = parse_grid(src, s);

  const json corr = doc.value("correlation", json::object());
  c.correlation.decay_lengths = corr.value("decay_lengths", c.correlation.decay_lengths);
  c.correlation.sum_points = corr.value("sum_points", c.correlation.sum_points);
  if (corr.contains("window")) c.correlation.window = window_from_string(corr["window"]);

  const json sim = doc.value("simulation", json::object());
  SimulationSection& m = c.simulation;
  m.source.pair_rate = sim.value("pair_rate_hz", m.source.pair_rate);
  m.source.duration = sim.value("duration_s", m.source.duration);
  m.source.visibility = sim.value("visibility", m.source.visibility);
  m.source.seed = c.seed;
  const json det = sim.value("detectors", json::object());
  m.detector_c = parse_detector(det.value("C", json::object()));
  m.detector_d = parse_detector(det.value("D", json::object()));

  const json an = doc.value("analysis", json::object());
  AnalysisSection& a = c.analysis;
  a.histogram.bin_width = an.value("bin_width_s", a.histogram.bin_width);
  a.histogram.max_delay = an.value("max_delay_s", a.histogram.max_delay);
  if (an.contains("pairing_rule")) a.histogram.rule = pairing_rule_from_string(an["pairing_rule"]);
  if (an.contains("window")) a.window = window_from_string(an["window"]);
  a.probes_hz = an.value("probe_frequencies_hz", std::vector<double>{});
  a.auto_channels = an.value("auto_channels", std::vector<std::string>{});
  a.singles_line_test = an.value("singles_line_test", false);
  const json fit = an.value("fit", json::object());
  a.fit.prominence = fit.value("prominence", a.fit.prominence);
  a.fit.min_frequency_hz = fit.value("min_frequency_hz", a.fit.min_frequency_hz);
  a.fit.ambiguity_db = fit.value("ambiguity_db", a.fit.ambiguity_db);
  a.fit.fit_decay_lengths = fit.value("decay_lengths", a.fit.fit_decay_lengths);
  a.fit.visibility_periods = fit.value("visibility_periods", a.fit.visibility_periods);

  if (doc.contains("entanglement")) {
    const json& e = doc["entanglement"];
    EntanglementSection es;
    for (double v : e["sigma_p_hz"]) es.sigmas.push_back(angular(v));
    es.model.linewidth = hz(e, "linewidth_hz", es.model.linewidth);
    es.model.omega_minus0 = hz(e, "omega_minus0_hz", es.model.omega_minus0);
    es.model.include_filters = e.value("include_filters", false);
    es.model.filter_linewidth = hz(e, "filter_linewidth_hz", es.model.filter_linewidth);
    es.model.filter_fsr = hz(e, "filter_fsr_hz", es.model.filter_fsr);
    es.model.points_per_fwhm = e.value("points_per_fwhm", es.model.points_per_fwhm);
    es.reference_entropies = e.value("reference_entropies", std::vector<double>{});
    c.entanglement = es;
  }
  c.digest = config_digest(doc);
  return c;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what(), "");
  }
}

PipelineConfig load_config(const std::string& path) { return parse_config(read_json_file(path)); }

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 failed");
  std::ostringstream s;
  for (unsigned int i = 0; i < len; ++i) s << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return s.str();
}

std::string code_version() { return AHC_VERSION; }

std::string config_digest(const json& doc) {
  return "sha256:" + sha256_hex(doc.dump() + "\nahc " + code_version());
}

std::string resolve_config_path(const std::string& ref) {
  namespace fs = std::filesystem;
  if (fs::exists(ref)) return ref;
  std::vector<fs::path> dirs;
  if (const char* env = std::getenv("AHC_CONFIG_DIR")) dirs.emplace_back(env);
  dirs.emplace_back(AHC_CONFIG_DIR);
  for (const fs::path& d : dirs) {
    for (const fs::path& p : {d / ref, d / (ref + ".json")})
      if (fs::exists(p)) return p.string();
  }
  return ref;
}

}  // namespace ahc
