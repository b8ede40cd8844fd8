#pragma once

#include <string>

#include "json.hpp"

#include "ahc/spectral_model.hpp"

namespace ahc {

inline constexpr int kJsaFormatVersion = 1;

// Header shared by the JSON and binary containers (axes in Hz).
nlohmann::json jsa_header(const JointSpectralAmplitude& jsa);

// ".json" paths get the JSON container, anything else the binary one.
void write_jsa(const JointSpectralAmplitude& jsa, const std::string& path);
JointSpectralAmplitude read_jsa(const std::string& path);

nlohmann::json axis_to_json(const Axis& a);
Axis axis_from_json(const nlohmann::json& j);

}  // namespace ahc
