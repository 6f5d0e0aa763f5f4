#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "twr/core/error.hpp"
#include "twr/core/rng.hpp"
#include "twr/em/simulation.hpp"

namespace twr::dataset {

inline constexpr std::size_t kSeriesLength = 95;
inline constexpr std::size_t kFeatureDim = 3 * kSeriesLength;

using FeatureVector = std::vector<double>;

// Ez || Hx || Hy.
inline FeatureVector extract_features(const em::ProbeRecord& rec, std::size_t series_length = kSeriesLength) {
  if (rec.ez_series.size() != series_length || rec.hx_series.size() != series_length ||
      rec.hy_series.size() != series_length) {
    throw InvalidArgument("extract_features: expected three series of length " + std::to_string(series_length));
  }
  FeatureVector f;
  f.reserve(3 * series_length);
  f.insert(f.end(), rec.ez_series.begin(), rec.ez_series.end());
  f.insert(f.end(), rec.hx_series.begin(), rec.hx_series.end());
  f.insert(f.end(), rec.hy_series.begin(), rec.hy_series.end());
  for (double v : f) {
    if (!std::isfinite(v)) throw InvalidArgument("extract_features: non-finite probe value");
  }
  return f;
}

// H expressed as eta0 * H so all three channels share units of V/m. Without
// this the magnetic series sit ~377x below Ez and any noise at a common SNR
// erases them.
inline em::ProbeRecord impedance_scaled(em::ProbeRecord rec) {
  for (double& v : rec.hx_series) v *= em::kEta0;
  for (double& v : rec.hy_series) v *= em::kEta0;
  return rec;
}

inline constexpr double kLineFloorDb = -240.0;

// Per receiver and channel, the RMS of (scene - background) over the recording
// window, in dB. Removing the empty-wall response leaves the target echo,
// which is what carries position. Layout Ez || Hx || Hy as for probe series.
inline FeatureVector line_features(const em::LineRecord& scene, const em::LineRecord& background) {
  if (scene.count != background.count || scene.window != background.window || scene.ez.size() != background.ez.size()) {
    throw InvalidArgument("line_features: scene and background recordings differ in shape");
  }
  FeatureVector f;
  f.reserve(3 * scene.count);
  const auto channel = [&](const std::vector<double>& a, const std::vector<double>& b, double scale) {
    for (std::size_t k = 0; k < scene.count; ++k) {
      double acc = 0.0;
      for (std::size_t t = 0; t < scene.window; ++t) {
        const double d = scale * (a[t * scene.count + k] - b[t * scene.count + k]);
        acc += d * d;
      }
      const double rms = std::sqrt(acc / static_cast<double>(scene.window));
      if (!std::isfinite(rms)) throw InvalidArgument("line_features: non-finite recording");
      f.push_back(rms > 0.0 ? std::max(20.0 * std::log10(rms), kLineFloorDb) : kLineFloorDb);
    }
  };
  channel(scene.ez, background.ez, 1.0);
  channel(scene.hx, background.hx, em::kEta0);
  channel(scene.hy, background.hy, em::kEta0);
  return f;
}

inline double mean_power(std::span<const double> v) {
  double p = 0.0;
  for (double x : v) p += x * x;
  return v.empty() ? 0.0 : p / static_cast<double>(v.size());
}

// Additive white Gaussian noise at the given SNR, with the signal power taken as
// the mean square over the whole vector.
inline FeatureVector add_awgn(std::span<const double> features, double snr_db, std::uint64_t seed) {
  const double p_signal = mean_power(features);
  if (!(p_signal > 0.0)) throw DegenerateSignal("add_awgn: all-zero features, SNR undefined");
  const double sigma = std::sqrt(p_signal / std::pow(10.0, snr_db / 10.0));
  Rng rng(seed);
  FeatureVector out(features.begin(), features.end());
  for (double& x : out) x += sigma * rng.normal();
  return out;
}

}  // namespace twr::dataset
