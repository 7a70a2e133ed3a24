#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mmrl/types.hpp"

namespace mmrl {

struct IndicatorConfig {
  std::size_t window_n = 20;     // z-score / SMA window
  std::size_t ema_n = 20;        // EMA span
  std::size_t volatility_m = 10; // volatility lookback
  std::size_t history_h = 30;    // raw closes carried in the state

  // First bar index with a complete feature vector.
  std::size_t warmup() const;
  void validate() const;
};

struct FeatureVector {
  double price_level_z = 0.0;
  double price_change_z = 0.0;
  double volume_level_z = 0.0;
  double volume_change_z = 0.0;
  double volatility = 0.0;
  std::vector<double> raw_prices;  // last h closes, oldest first

  static constexpr std::size_t kIndicatorCount = 5;
};

// (x - mean) / population stddev of the window; 0 for a flat window.
double zscore(double x, std::span<const double> window);

// x_t / SMA(x_{t-n} .. x_{t-1}) - 1.
double price_change(std::size_t t, std::size_t n, std::span<const double> closes);
double volume_change(std::size_t t, std::size_t n, std::span<const double> volumes);

// Recursive EMA with alpha = 2 / (n + 1), seeded with the first value.
std::vector<double> ema(std::span<const double> series, std::size_t n);

// (EMA_t - EMA_{t-m}) / EMA_{t-m}.
double volatility(std::span<const double> closes, std::size_t ema_n, std::size_t m, std::size_t t);

FeatureVector featurize(std::span<const TickBar> bars, std::size_t t, const IndicatorConfig& cfg);

// Features for every index in [cfg.warmup(), bars.size()), computed in one
// pass with running sums. Entry i corresponds to bar cfg.warmup() + i.
std::vector<FeatureVector> featurize_all(std::span<const TickBar> bars,
                                         const IndicatorConfig& cfg);

}  // namespace mmrl
