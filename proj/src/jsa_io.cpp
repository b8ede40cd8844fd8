#include "ahc/jsa_io.hpp"

#include <fstream>
#include <sstream>

#include "ahc/errors.hpp"
#include "binary_io.hpp"

namespace ahc {

namespace {

constexpr char kMagic[8] = {'A', 'H', 'C', 'J', 'S', 'A', '\0', '\0'};

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

nlohmann::json meta_to_json(const JsaMetadata& m) {
  nlohmann::json j = {{"sign_convention", m.sign_convention},
                      {"truncation_loss_signal", m.truncation_loss_signal},
                      {"truncation_loss_idler", m.truncation_loss_idler},
                      {"warnings", m.warnings},
                      {"provenance", m.provenance}};
  if (m.transmitted_fraction) j["transmitted_fraction"] = *m.transmitted_fraction;
  return j;
}

JsaMetadata meta_from_json(const nlohmann::json& j) {
  JsaMetadata m;
  m.sign_convention = j.value("sign_convention", "");
  m.truncation_loss_signal = j.value("truncation_loss_signal", 0.0);
  m.truncation_loss_idler = j.value("truncation_loss_idler", 0.0);
  m.warnings = j.value("warnings", std::vector<std::string>{});
  m.provenance = j.value("provenance", nlohmann::json::object());
  if (j.contains("transmitted_fraction")) m.transmitted_fraction = j["transmitted_fraction"].get<double>();
  return m;
}

JointSpectralAmplitude from_header(const nlohmann::json& h, std::uint64_t offset) {
  try {
    if (h.at("version").get<int>() != kJsaFormatVersion)
      throw ParseError("unsupported JSA container version " + h.at("version").dump(), offset);
    JointSpectralAmplitude jsa;
    jsa.grid.coordinates = coordinates_from_string(h.at("coordinates").get<std::string>().c_str());
    jsa.grid.cw_collapsed = h.at("cw_collapsed").get<bool>();
    jsa.grid.first = axis_from_json(h.at("axes").at("first"));
    jsa.grid.second = axis_from_json(h.at("axes").at("second"));
    jsa.meta = meta_from_json(h.at("meta"));
    jsa.grid.validate();
    return jsa;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed JSA header: ") + e.what(), offset);
  } catch (const ConfigError& e) {
    throw ParseError(std::string("invalid JSA grid: ") + e.what(), offset);
  }
}

}  // namespace

nlohmann::json axis_to_json(const Axis& a) {
  return {{"center_hz", hertz(a.center)},
          {"span_hz", hertz(a.span)},
          {"n", a.n},
          {"center_rad_s", a.center},
          {"span_rad_s", a.span}};
}

Axis axis_from_json(const nlohmann::json& j) {
  Axis a;
  a.n = j.at("n").get<std::size_t>();
  a.center = j.contains("center_rad_s") ? j["center_rad_s"].get<double>()
                                        : angular(j.at("center_hz").get<double>());
  a.span = j.contains("span_rad_s") ? j["span_rad_s"].get<double>()
                                    : angular(j.at("span_hz").get<double>());
  return a;
}

nlohmann::json jsa_header(const JointSpectralAmplitude& jsa) {
  return {{"format", "ahc-jsa"},
          {"version", kJsaFormatVersion},
          {"coordinates", to_string(jsa.grid.coordinates)},
          {"cw_collapsed", jsa.grid.cw_collapsed},
          {"axes", {{"first", axis_to_json(jsa.grid.first)}, {"second", axis_to_json(jsa.grid.second)}}},
          {"value_count", jsa.values.size()},
          {"value_layout", "row-major over (first, second), interleaved re/im float64"},
          {"meta", meta_to_json(jsa.meta)}};
}

void write_jsa(const JointSpectralAmplitude& jsa, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path + " for writing");
  nlohmann::json h = jsa_header(jsa);
  if (ends_with(path, ".json")) {
    std::vector<double> flat;
    flat.reserve(2 * jsa.values.size());
    for (const cplx& v : jsa.values) {
      flat.push_back(v.real());
      flat.push_back(v.imag());
    }
    h["values"] = flat;
    os << h.dump(1) << '\n';
  } else {
    const std::string text = h.dump();
    os.write(kMagic, sizeof kMagic);
    detail::put_le<std::uint32_t>(os, kJsaFormatVersion);
    detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(text.size()));
    os.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const cplx& v : jsa.values) {
      detail::put_le(os, v.real());
      detail::put_le(os, v.imag());
    }
  }
  if (!os) throw Error("write failed for " + path);
}

JointSpectralAmplitude read_jsa(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path);
  if (ends_with(path, ".json")) {
    nlohmann::json h;
    try {
      h = nlohmann::json::parse(is);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("malformed JSA JSON: ") + e.what(), e.byte);
    }
    JointSpectralAmplitude jsa = from_header(h, 0);
    const auto& flat = h.at("values");
    if (flat.size() != 2 * jsa.grid.size()) throw ParseError("JSA value count does not match the grid", 0);
    jsa.values.resize(jsa.grid.size());
    for (std::size_t k = 0; k < jsa.values.size(); ++k)
      jsa.values[k] = {flat[2 * k].get<double>(), flat[2 * k + 1].get<double>()};
    return jsa;
  }
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) throw ParseError("bad JSA magic", 0);
  std::uint32_t version = 0, len = 0;
  if (!detail::get_le(is, version)) throw ParseError("truncated JSA header", 8);
  if (version != kJsaFormatVersion)
    throw ParseError("unsupported JSA container version " + std::to_string(version), 8);
  if (!detail::get_le(is, len)) throw ParseError("truncated JSA header", 12);
  std::string text(len, '\0');
  if (!is.read(text.data(), len)) throw ParseError("truncated JSA header", 16);
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed JSA header: ") + e.what(), 16 + e.byte);
  }
  JointSpectralAmplitude jsa = from_header(h, 16);
  const std::uint64_t base = 16 + len;
  jsa.values.resize(jsa.grid.size());
  for (std::size_t k = 0; k < jsa.values.size(); ++k) {
    double re = 0.0, im = 0.0;
    if (!detail::get_le(is, re) || !detail::get_le(is, im))
      throw ParseError("truncated JSA values", base + 16 * k, static_cast<std::int64_t>(k));
    jsa.values[k] = {re, im};
  }
  return jsa;
}

}  // namespace ahc
