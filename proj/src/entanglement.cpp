#include "ahc/entanglement.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>

#include "ahc/errors.hpp"
#include "ahc/fourier.hpp"

namespace ahc {

SchmidtSpectrum schmidt_from_singular_values(const std::vector<double>& singular_values) {
  SchmidtSpectrum s;
  double total = 0.0;
  for (double v : singular_values) total += v * v;
  if (!(total > 0.0)) throw ConfigError("JSA vanishes on the grid");
  for (double v : singular_values) s.coefficients.push_back(v * v / total);
  std::sort(s.coefficients.begin(), s.coefficients.end(), std::greater<>());
  const double sum = std::accumulate(s.coefficients.begin(), s.coefficients.end(), 0.0);
  double e = 0.0, p2 = 0.0;
  for (double& l : s.coefficients) {
    l /= sum;
    if (l > 0.0) e -= l * std::log(l);
    p2 += l * l;
  }
  s.entropy_nat = std::max(0.0, e);
  s.entropy_bits = s.entropy_nat / std::numbers::ln2;
  s.schmidt_number = 1.0 / p2;
  return s;
}

SchmidtSpectrum schmidt_decompose(const JointSpectralAmplitude& jsa) {
  const FrequencyGrid& g = jsa.grid;
  if (g.cw_collapsed)
    throw ConfigError(
        "Schmidt decomposition of a cw-pumped JSA is meaningless: the omega+ delta makes the "
        "state formally infinitely entangled; use a pulsed pump of finite width");
  if (g.coordinates != Coordinates::SignalIdler)
    throw ConfigError("Schmidt decomposition needs signal/idler coordinates");
  const auto rows = static_cast<Eigen::Index>(g.first.n);
  const auto cols = static_cast<Eigen::Index>(g.second.n);
  Eigen::MatrixXcd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c)
      m(r, c) = jsa.values[static_cast<std::size_t>(r * cols + c)];
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(m);
  const Eigen::VectorXd sv = svd.singularValues();
  return schmidt_from_singular_values(std::vector<double>(sv.data(), sv.data() + sv.size()));
}

FrequencyGrid pulsed_model_grid(const PulsedSourceModel& model, double sigma_p) {
  if (!(sigma_p > 0.0)) throw ConfigError("pump sigma must be positive");
  const double pump_fwhm = 2.0 * std::sqrt(2.0 * std::numbers::ln2) * sigma_p;
  const double step =
      std::min(pump_fwhm, model.linewidth) / model.points_per_fwhm * model.resolution_scale;
  const double span = model.span_linewidths * model.linewidth +
                      2.0 * model.mode_half_range * std::max(model.fsr_signal, model.fsr_idler);
  const auto n = static_cast<std::size_t>(next_power_of_two(
      static_cast<std::size_t>(std::ceil(span / step)) + 1));
  return FrequencyGrid::signal_idler(Axis::with_step(0.5 * model.omega_minus0, step, n),
                                     Axis::with_step(-0.5 * model.omega_minus0, step, n));
}

JointSpectralAmplitude pulsed_model_jsa(const PulsedSourceModel& model, double sigma_p) {
  const ModeCombSpec signal{0.5 * model.omega_minus0, model.linewidth, model.fsr_signal,
                            -model.mode_half_range, model.mode_half_range};
  const ModeCombSpec idler{-0.5 * model.omega_minus0, model.linewidth, model.fsr_idler,
                           -model.mode_half_range, model.mode_half_range};
  const FrequencyGrid grid = pulsed_model_grid(model, sigma_p);
  JointSpectralAmplitude jsa =
      build_cespdc_jsa(GaussianPulsePump{0.0, sigma_p}, signal, idler, model.phase_matching, grid);
  if (model.include_filters) {
    const ModeCombSpec fs{signal.center, model.filter_linewidth, model.filter_fsr, -2, 2};
    const ModeCombSpec fi{idler.center, model.filter_linewidth, model.filter_fsr, -2, 2};
    jsa = apply_fp_filters(jsa, fs, fi);
  }
  return jsa;
}

std::vector<SweepRow> entropy_vs_pump_sweep(std::vector<double> sigmas,
                                            const PulsedSourceModel& model) {
  std::sort(sigmas.begin(), sigmas.end());
  std::vector<std::future<SweepRow>> jobs;
  for (double s : sigmas) {
    jobs.push_back(std::async(std::launch::async, [s, &model] {
      const JointSpectralAmplitude jsa = pulsed_model_jsa(model, s);
      return SweepRow{s, schmidt_decompose(jsa), jsa.grid.first.n};
    }));
  }
  std::vector<SweepRow> rows;
  for (auto& j : jobs) rows.push_back(j.get());
  return rows;
}

BaseMatch best_matching_base(const std::vector<SweepRow>& rows,
                             const std::vector<double>& reference) {
  if (rows.size() != reference.size()) throw ConfigError("reference size mismatch");
  BaseMatch best;
  best.mean_relative_error = std::numeric_limits<double>::infinity();
  for (const char* base : {"nat", "bits"}) {
    BaseMatch m;
    m.base = base;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const double e = std::string(base) == "nat" ? rows[i].spectrum.entropy_nat
                                                  : rows[i].spectrum.entropy_bits;
      m.entropies.push_back(e);
      m.relative_errors.push_back(std::abs(e - reference[i]) / reference[i]);
    }
    m.mean_relative_error =
        std::accumulate(m.relative_errors.begin(), m.relative_errors.end(), 0.0) /
        static_cast<double>(rows.size());
    if (m.mean_relative_error < best.mean_relative_error) best = m;
  }
  return best;
}

nlohmann::json to_json(const SchmidtSpectrum& s, std::size_t max_coefficients) {
  const std::size_t n = std::min(max_coefficients, s.coefficients.size());
  return {{"entropy_nat", s.entropy_nat},
          {"entropy_bits", s.entropy_bits},
          {"schmidt_number", s.schmidt_number},
          {"leading_coefficients",
           std::vector<double>(s.coefficients.begin(), s.coefficients.begin() + static_cast<long>(n))}};
}

}  // namespace ahc
