#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "ahc/errors.hpp"
#include "ahc/numeric.hpp"
#include "ahc/spectral_model.hpp"

using namespace ahc;

namespace {

const double kMHz = angular(1e6);
const double kGamma = 7.6 * kMHz;

std::complex<double> comb_oracle(double w, double w0, double g, double fsr, int lo, int hi) {
  std::complex<double> s = 0.0;
  for (int m = lo; m <= hi; ++m) s += std::sqrt(g / kTwoPi) / std::complex<double>(g / 2, w0 + m * fsr - w);
  return s;
}

std::vector<double> intensity(const JointSpectralAmplitude& j) {
  std::vector<double> y;
  for (const cplx& v : j.values) y.push_back(std::norm(v));
  return y;
}

}  // namespace

TEST(CavityComb, OnResonanceIsMaximum) {
  const ModeCombSpec spec{0.0, kGamma, 500 * kMHz, 0, 0};
  const double peak = std::norm(cavity_comb_amplitude(0.0, spec));
  for (double w = -50 * kMHz; w <= 50 * kMHz; w += 0.37 * kMHz)
    EXPECT_LE(std::norm(cavity_comb_amplitude(w, spec)), peak);
}

TEST(CavityComb, HalfPowerAtHalfLinewidth) {
  const ModeCombSpec spec{3 * kMHz, kGamma, 500 * kMHz, 0, 0};
  const double peak = std::norm(cavity_comb_amplitude(spec.center, spec));
  EXPECT_NEAR(std::norm(cavity_comb_amplitude(spec.center + kGamma / 2, spec)), peak / 2, 1e-12 * peak);
}

TEST(CavityComb, MatchesDirectSumAndShiftIdentity) {
  const double fsr = 500 * kMHz;
  const ModeCombSpec a{0.0, kGamma, fsr, -5, 5};
  const ModeCombSpec b{0.0, kGamma, fsr, -6, 4};
  const cplx va = cavity_comb_amplitude(fsr, a);
  const cplx vb = cavity_comb_amplitude(0.0, b);
  EXPECT_LE(std::abs(va - comb_oracle(fsr, 0.0, kGamma, fsr, -5, 5)), 1e-14 * std::abs(va));
  EXPECT_LE(std::abs(va - vb), 1e-14 * std::abs(va));
}

TEST(CavityComb, FastSumAgreesWithDirectSum) {
  const ModeCombSpec spec{12 * kMHz, kGamma, 503.5 * kMHz, -900, 700};
  for (double w : {-3e11, -1e9, 0.0, 7e6, 2.2e10, 4e11}) {
    const cplx d = cavity_comb_amplitude(w, spec);
    const cplx f = cavity_comb_amplitude_fast(w, spec);
    EXPECT_LE(std::abs(d - f), 1e-12 * std::abs(d)) << w;
  }
}

TEST(CavityComb, RejectsInvalidSpec) {
  EXPECT_THROW((ModeCombSpec{0, -1.0, 1.0, 0, 0}.validate()), ConfigError);
  EXPECT_THROW((ModeCombSpec{0, 1.0, 0.0, 0, 0}.validate()), ConfigError);
  EXPECT_THROW((ModeCombSpec{0, 1.0, 1.0, 1, 3}.validate()), ConfigError);
}

TEST(CespdcJsa, CwCollapsesAndNormalizes) {
  const ModeCombSpec s{125 * kMHz, kGamma, 503.5 * kMHz, -20, 20};
  const ModeCombSpec i{-125 * kMHz, kGamma, 500 * kMHz, -20, 20};
  const FrequencyGrid grid = FrequencyGrid::cw(0.0, Axis{0.0, 4e9 * kTwoPi, 1 << 14});
  const JointSpectralAmplitude j = build_cespdc_jsa(MonochromaticPump{0.0}, s, i, GaussianPhaseMatching{}, grid);
  EXPECT_TRUE(j.grid.cw_collapsed);
  EXPECT_EQ(j.grid.first.n, 1u);
  EXPECT_EQ(j.values.size(), grid.second.n);
  EXPECT_NEAR(j.norm(), 1.0, 1e-10);
  const std::vector<double> y = intensity(j);
  EXPECT_NEAR(grid.second.point(argmax(y)), 250 * kMHz, grid.second.step());
}

TEST(CespdcJsa, PulsedNormalizes) {
  const ModeCombSpec s{125 * kMHz, kGamma, 503.5 * kMHz, -1, 1};
  const ModeCombSpec i{-125 * kMHz, kGamma, 500 * kMHz, -1, 1};
  const FrequencyGrid grid =
      FrequencyGrid::sum_difference(Axis{0.0, 40 * kMHz, 32}, Axis{0.0, 1200 * kMHz, 1024});
  const JointSpectralAmplitude j =
      build_cespdc_jsa(GaussianPulsePump{0.0, 5 * kMHz}, s, i, FlatPhaseMatching{}, grid);
  EXPECT_NEAR(j.norm(), 1.0, 1e-10);
}

TEST(CespdcJsa, ThreeClustersOfFour) {
  const ModeCombSpec s{0.0, kGamma, 503.5 * kMHz, -400, 400};
  const ModeCombSpec i{0.0, kGamma, 500 * kMHz, -400, 400};
  const auto peaks = scan_mode_pairs(1.75 * kMHz, s, i, GaussianPhaseMatching{0.0, angular(150e9)});
  const auto clusters = cluster_mode_pairs(peaks);
  ASSERT_EQ(clusters.size(), 3u);
  for (const ModeCluster& c : clusters) EXPECT_EQ(c.members.size(), 4u);
}

TEST(CespdcJsa, EqualFsrGivesFiveEqualPeaks) {
  const double fsr = 500 * kMHz;
  const ModeCombSpec s{0.0, kGamma, fsr, -2, 2};
  const ModeCombSpec i{0.0, kGamma, fsr, -2, 2};
  const Axis diff{0.0, 6000 * kMHz, 1 << 15};
  const JointSpectralAmplitude j =
      build_cespdc_jsa(MonochromaticPump{0.0}, s, i, FlatPhaseMatching{}, FrequencyGrid::cw(0.0, diff));
  const std::vector<double> y = intensity(j);
  const double top = *std::max_element(y.begin(), y.end());
  std::vector<double> where, height;
  for (std::size_t k = 1; k + 1 < y.size(); ++k)
    if (y[k] > y[k - 1] && y[k] >= y[k + 1] && y[k] > 0.1 * top) {
      where.push_back(diff.point(k));
      height.push_back(y[k]);
    }
  ASSERT_EQ(where.size(), 5u);
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_NEAR(where[k], (static_cast<double>(k) - 2.0) * 2.0 * fsr, 2 * diff.step());
    EXPECT_NEAR(height[k] / top, 1.0, 0.02);
  }
}

TEST(CespdcJsa, NarrowGridIsConfigError) {
  const ModeCombSpec s{0.0, kGamma, 500 * kMHz, 0, 0};
  const FrequencyGrid grid = FrequencyGrid::cw(0.0, Axis{0.0, 3 * kGamma, 64});
  EXPECT_THROW(build_cespdc_jsa(MonochromaticPump{0.0}, s, s, FlatPhaseMatching{}, grid), ConfigError);
}

TEST(CespdcJsa, TruncationWarning) {
  const ModeCombSpec s{0.0, kGamma, 500 * kMHz, -2, 2};
  const FrequencyGrid grid = FrequencyGrid::cw(0.0, Axis{0.0, 4000 * kMHz, 4096});
  const JointSpectralAmplitude j =
      build_cespdc_jsa(MonochromaticPump{0.0}, s, s, GaussianPhaseMatching{}, grid);
  EXPECT_GT(j.meta.truncation_loss_signal, 0.01);
  EXPECT_FALSE(j.meta.warnings.empty());
}

TEST(FpFilters, NeighbourSuppressionMatchesSingleTerm) {
  const double gf = 97 * kMHz, delta = 500 * kMHz;
  const ModeCombSpec f{0.0, gf, angular(39e9), -2, 2};
  const double oracle = std::pow(gf / 2, 2) / (std::pow(gf / 2, 2) + delta * delta);
  const double t = std::norm(filter_transmission(delta, f)) / std::norm(filter_transmission(0.0, f));
  EXPECT_NEAR(t, oracle, 1e-3 * oracle);
  EXPECT_NEAR(oracle, 9.3e-3, 0.05e-3);
}

TEST(FpFilters, QuasiFlatFilterLeavesJsa) {
  const Axis diff{0.0, 2000 * kMHz, 4096};
  const JointSpectralAmplitude in = single_mode_lorentzian_g(diff, kGamma, 250 * kMHz);
  const ModeCombSpec f{0.0, 1e6 * kGamma, angular(39e12), 0, 0};
  const JointSpectralAmplitude out = apply_fp_filters(in, f, f);
  double d = 0.0;
  for (std::size_t k = 0; k < in.values.size(); ++k) d += std::norm(in.values[k] - out.values[k]);
  EXPECT_LT(std::sqrt(d), 1e-4);
}

TEST(FpFilters, TransmittedFractionGrowsWithLinewidth) {
  const ModeCombSpec s{125 * kMHz, kGamma, 503.5 * kMHz, -10, 10};
  const ModeCombSpec i{-125 * kMHz, kGamma, 500 * kMHz, -10, 10};
  const JointSpectralAmplitude j = build_cespdc_jsa(MonochromaticPump{0.0}, s, i, FlatPhaseMatching{},
                                                    FrequencyGrid::cw(0.0, Axis{0.0, 8000 * kMHz, 1 << 14}));
  double last = 0.0;
  for (double gf : {5.0, 20.0, 97.0, 300.0, 1000.0, 5000.0}) {
    const ModeCombSpec fs{s.center, gf * kMHz, angular(39e9), -2, 2};
    const ModeCombSpec fi{i.center, gf * kMHz, angular(39e9), -2, 2};
    const double t = *apply_fp_filters(j, fs, fi).meta.transmitted_fraction;
    EXPECT_GE(t, last);
    last = t;
  }
}

TEST(FpFilters, LeakageAtLeast25dBBelowCentralPair) {
  const ModeCombSpec s{125 * kMHz, kGamma, 503.5 * kMHz, -400, 400};
  const ModeCombSpec i{-125 * kMHz, kGamma, 500 * kMHz, -400, 400};
  const ModeCombSpec fs{s.center, 97 * kMHz, angular(39e9), -2, 2};
  const ModeCombSpec fi{i.center, 97 * kMHz, angular(39e9), -2, 2};
  ModePairScanOptions opts;
  opts.filter_s = &fs;
  opts.filter_i = &fi;
  const auto peaks = scan_mode_pairs(0.0, s, i, GaussianPhaseMatching{}, opts);
  // A 50 ps jitter erases beats above ~10 GHz; the filter comb also passes a
  // far cluster near 156 GHz, which only adds a flat background.
  const double band = angular(10e9);
  double central = 0.0, rest = 0.0;
  for (const ModePairPeak& p : peaks)
    if (p.signal_mode == 0) central += p.power;
  for (const ModePairPeak& p : peaks) {
    if (p.signal_mode == 0)
      continue;
    else if (std::abs(p.omega_minus) < band)
      rest += p.power;
    else
      EXPECT_TRUE(p.power < 1e-4 * central || std::abs(p.omega_minus) > angular(100e9)) << p.signal_mode;
  }
  EXPECT_LT(10 * std::log10(rest / central), -25.0);
}

TEST(LorentzianG, PeakAndWidths) {
  const Axis diff{0.0, 4000 * kMHz, 1 << 16};
  const JointSpectralAmplitude j = single_mode_lorentzian_g(diff, kGamma, 250 * kMHz);
  const std::vector<double> y = intensity(j);
  EXPECT_NEAR(diff.point(argmax(y)), 250 * kMHz, 0.5 * diff.step());
  const double analytic = 2 * kGamma * std::sqrt(std::sqrt(2.0) - 1);
  EXPECT_NEAR(fwhm(diff.points(), y), analytic, 1e-3 * analytic);
  EXPECT_NEAR(lorentzian_pair_fwhm_difference(kGamma), analytic, 1e-12 * analytic);
  const double marginal = signal_marginal_fwhm(j);
  EXPECT_NEAR(marginal, lorentzian_pair_fwhm_signal(kGamma), 0.02 * lorentzian_pair_fwhm_signal(kGamma));
  EXPECT_NEAR(hertz(lorentzian_pair_fwhm_signal(kGamma)), 4.9e6, 0.05e6);
}

TEST(LorentzianG, NarrowAxisIsConfigError) {
  EXPECT_THROW(single_mode_lorentzian_g(Axis{0.0, 3 * kGamma, 64}, kGamma, 0.0), ConfigError);
}

TEST(Symmetry, SymmetricInputHasNoAntisymmetricPart) {
  const JointSpectralAmplitude j = single_mode_lorentzian_g(Axis{0.0, 400 * kMHz, 1024}, kGamma, 0.0);
  const SymmetryParts p = decompose_symmetry(j);
  for (const cplx& v : p.antisymmetric.values) EXPECT_LT(std::abs(v), 1e-15);
}

TEST(Symmetry, ReconstructionAndOddness) {
  const Axis diff{0.0, 2000 * kMHz, 4096};
  const JointSpectralAmplitude j = single_mode_lorentzian_g(diff, kGamma, 250 * kMHz);
  const SymmetryParts p = decompose_symmetry(j);
  const std::size_t n = diff.n;
  double peak = 0.0;
  for (const cplx& v : j.values) peak = std::max(peak, std::abs(v));
  for (std::size_t k = 0; k < n; ++k) {
    EXPECT_LE(std::abs(p.symmetric.values[k] - p.antisymmetric.values[k] - j.values[k]), 1e-12 * peak);
    EXPECT_EQ(p.antisymmetric.values[k], -p.antisymmetric.values[n - 1 - k]);
  }
  std::vector<double> a = intensity(p.antisymmetric);
  const std::size_t kp = argmax(a);
  EXPECT_NEAR(std::abs(diff.point(kp)), 250 * kMHz, diff.step());
  EXPECT_DOUBLE_EQ(a[kp], a[n - 1 - kp]);
}

TEST(Symmetry, OffCenterGridIsConfigError) {
  const JointSpectralAmplitude j = single_mode_lorentzian_g(Axis{10 * kMHz, 400 * kMHz, 1024}, kGamma, 0.0);
  EXPECT_THROW(decompose_symmetry(j), ConfigError);
}

TEST(Jta, RoundTrip) {
  const ModeCombSpec s{125 * kMHz, kGamma, 503.5 * kMHz, 0, 0};
  const ModeCombSpec i{-125 * kMHz, kGamma, 500 * kMHz, 0, 0};
  const FrequencyGrid grid =
      FrequencyGrid::sum_difference(Axis{0.0, 60 * kMHz, 64}, Axis{0.0, 800 * kMHz, 512});
  const JointSpectralAmplitude j =
      build_cespdc_jsa(GaussianPulsePump{0.0, 5 * kMHz}, s, i, FlatPhaseMatching{}, grid);
  const JointTemporalAmplitude t = jta_from_jsa(j, natural_temporal_grid(j.grid));
  const JointSpectralAmplitude back = jsa_from_jta(t, j.grid);
  double d = 0.0;
  for (std::size_t k = 0; k < j.values.size(); ++k) d += std::norm(back.values[k] - j.values[k]);
  EXPECT_LT(std::sqrt(d), 1e-9);
}

TEST(Jta, CwLorentzianEnvelope) {
  const Axis diff{0.0, 8000 * kMHz, 1 << 16};
  const JointSpectralAmplitude j = single_mode_lorentzian_g(diff, kGamma, 250 * kMHz);
  const TemporalGrid tg = natural_temporal_grid(j.grid);
  const JointTemporalAmplitude t = jta_from_jsa(j, tg);
  std::vector<double> x, ly;
  for (std::size_t k = 0; k < tg.second.n; ++k) {
    const double tm = tg.second.point(k);
    if (tm > 1.0 / kGamma && tm < 8.0 / kGamma) {
      x.push_back(tm);
      ly.push_back(std::log(std::abs(t.values[k])));
    }
  }
  ASSERT_GT(x.size(), 10u);
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < x.size(); ++k) mx += x[k], my += ly[k];
  mx /= x.size();
  my /= x.size();
  double sxy = 0, sxx = 0;
  for (std::size_t k = 0; k < x.size(); ++k) sxy += (x[k] - mx) * (ly[k] - my), sxx += (x[k] - mx) * (x[k] - mx);
  EXPECT_NEAR(-sxy / sxx, kGamma / 2, 0.01 * kGamma / 2);
}

TEST(Jta, SwappingAxesTransposes) {
  const ModeCombSpec s{125 * kMHz, kGamma, 503.5 * kMHz, 0, 0};
  const ModeCombSpec i{-125 * kMHz, 2 * kGamma, 500 * kMHz, 0, 0};
  const FrequencyGrid grid = FrequencyGrid::signal_idler(Axis{125 * kMHz, 200 * kMHz, 64},
                                                         Axis{-125 * kMHz, 200 * kMHz, 64});
  const JointSpectralAmplitude j =
      build_cespdc_jsa(GaussianPulsePump{0.0, 5 * kMHz}, s, i, FlatPhaseMatching{}, grid);
  const JointSpectralAmplitude jt = transpose(j);
  const JointTemporalAmplitude a = jta_from_jsa(j, natural_temporal_grid(j.grid));
  const JointTemporalAmplitude b = jta_from_jsa(jt, natural_temporal_grid(jt.grid));
  double peak = 0.0;
  for (const cplx& v : a.values) peak = std::max(peak, std::abs(v));
  for (std::size_t r = 0; r < 64; ++r)
    for (std::size_t c = 0; c < 64; ++c)
      EXPECT_LT(std::abs(a.values[r * 64 + c] - b.values[c * 64 + r]), 1e-12 * peak);
}
