#include "mmrl/indicators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mmrl/errors.hpp"

namespace mmrl {

namespace {

// Relative threshold below which a window is considered flat.
constexpr double kFlatTolerance = 1e-12;

double standardize(double x, double mean, double variance) {
  double sd = std::sqrt(std::max(variance, 0.0));
  if (sd == 0.0 || sd <= kFlatTolerance * std::abs(mean)) return 0.0;
  return (x - mean) / sd;
}

double change_ratio(std::size_t t, std::size_t n, std::span<const double> series) {
  if (n == 0) throw IndexOutOfRange("window must be >= 1");
  if (t < n || t >= series.size()) {
    throw IndexOutOfRange("t=" + std::to_string(t) + " needs n=" + std::to_string(n) +
                          " prior points within a series of " + std::to_string(series.size()));
  }
  double sum = 0.0;
  for (std::size_t k = t - n; k < t; ++k) sum += series[k];
  double sma = sum / static_cast<double>(n);
  if (sma == 0.0) throw DivisionByZero("zero moving average at t=" + std::to_string(t));
  return series[t] / sma - 1.0;
}

// Change ratio with a zero-average window mapped to 0 (empty-volume minutes).
double change_ratio_or_zero(std::size_t t, std::size_t n, std::span<const double> series) {
  try {
    return change_ratio(t, n, series);
  } catch (const DivisionByZero&) {
    return 0.0;
  }
}

struct Series {
  std::vector<double> closes;
  std::vector<double> volumes;
};

Series split(std::span<const TickBar> bars) {
  Series s;
  s.closes.reserve(bars.size());
  s.volumes.reserve(bars.size());
  for (const auto& b : bars) {
    s.closes.push_back(b.close);
    s.volumes.push_back(b.volume);
  }
  return s;
}

}  // namespace

std::size_t IndicatorConfig::warmup() const {
  return std::max({window_n, volatility_m, history_h});
}

void IndicatorConfig::validate() const {
  if (window_n < 2) throw InvalidConfig("window_n must be >= 2 (z-score needs two points)");
  if (ema_n < 1 || volatility_m < 1 || history_h < 1) {
    throw InvalidConfig("indicator windows must be >= 1");
  }
  if (history_h < window_n) throw InvalidConfig("history_h must be >= window_n");
}

double zscore(double x, std::span<const double> window) {
  if (window.size() < 2) throw WindowTooShort("z-score window needs at least 2 values");
  double mean = 0.0;
  for (double v : window) mean += v;
  mean /= static_cast<double>(window.size());
  double ss = 0.0;
  for (double v : window) ss += (v - mean) * (v - mean);
  return standardize(x, mean, ss / static_cast<double>(window.size()));
}

double price_change(std::size_t t, std::size_t n, std::span<const double> closes) {
  return change_ratio(t, n, closes);
}

double volume_change(std::size_t t, std::size_t n, std::span<const double> volumes) {
  return change_ratio(t, n, volumes);
}

std::vector<double> ema(std::span<const double> series, std::size_t n) {
  if (series.empty()) throw EmptySeries("EMA of an empty series");
  if (n == 0) throw IndexOutOfRange("EMA span must be >= 1");
  const double alpha = 2.0 / (static_cast<double>(n) + 1.0);
  std::vector<double> out;
  out.reserve(series.size());
  out.push_back(series[0]);
  for (std::size_t i = 1; i < series.size(); ++i) {
    out.push_back(alpha * series[i] + (1.0 - alpha) * out.back());
  }
  return out;
}

double volatility(std::span<const double> closes, std::size_t ema_n, std::size_t m,
                  std::size_t t) {
  if (t < m || t >= closes.size()) {
    throw IndexOutOfRange("volatility at t=" + std::to_string(t) + " with m=" + std::to_string(m));
  }
  auto e = ema(closes.first(t + 1), ema_n);
  double base = e[t - m];
  if (base == 0.0) throw DivisionByZero("EMA is zero at t-m");
  return (e[t] - base) / base;
}

FeatureVector featurize(std::span<const TickBar> bars, std::size_t t, const IndicatorConfig& cfg) {
  cfg.validate();
  if (t < cfg.warmup() || t >= bars.size()) {
    throw InsufficientHistory("featurize at t=" + std::to_string(t) + " needs warm-up " +
                              std::to_string(cfg.warmup()) + " within " +
                              std::to_string(bars.size()) + " bars");
  }
  const auto s = split(bars.first(t + 1));
  const std::size_t n = cfg.window_n;
  std::span<const double> closes(s.closes);
  std::span<const double> volumes(s.volumes);

  FeatureVector f;
  f.price_level_z = zscore(closes[t], closes.subspan(t - n, n));
  f.volume_level_z = zscore(volumes[t], volumes.subspan(t - n, n));

  std::vector<double> pc;
  std::vector<double> vc;
  for (std::size_t k = n; k <= t; ++k) {
    pc.push_back(change_ratio_or_zero(k, n, closes));
    vc.push_back(change_ratio_or_zero(k, n, volumes));
  }
  f.price_change_z = pc.size() >= 2 ? zscore(pc.back(), pc) : 0.0;
  f.volume_change_z = vc.size() >= 2 ? zscore(vc.back(), vc) : 0.0;
  f.volatility = volatility(closes, cfg.ema_n, cfg.volatility_m, t);
  f.raw_prices.assign(closes.begin() + static_cast<std::ptrdiff_t>(t + 1 - cfg.history_h),
                      closes.begin() + static_cast<std::ptrdiff_t>(t + 1));
  return f;
}

std::vector<FeatureVector> featurize_all(std::span<const TickBar> bars,
                                         const IndicatorConfig& cfg) {
  cfg.validate();
  const std::size_t start = cfg.warmup();
  if (bars.size() <= start) return {};
  const auto s = split(bars);
  const std::size_t n = cfg.window_n;
  std::span<const double> closes(s.closes);
  std::span<const double> volumes(s.volumes);
  const auto e = ema(closes, cfg.ema_n);

  // Expanding mean / M2 of the change series (Welford).
  struct Running {
    double count = 0.0, mean = 0.0, m2 = 0.0;
    void push(double x) {
      count += 1.0;
      double d = x - mean;
      mean += d / count;
      m2 += d * (x - mean);
    }
    double z(double x) const { return count < 2.0 ? 0.0 : standardize(x, mean, m2 / count); }
  };
  Running pc_stats;
  Running vc_stats;

  std::vector<FeatureVector> out;
  out.reserve(bars.size() - start);
  for (std::size_t t = n; t < bars.size(); ++t) {
    double pc = change_ratio_or_zero(t, n, closes);
    double vc = change_ratio_or_zero(t, n, volumes);
    pc_stats.push(pc);
    vc_stats.push(vc);
    if (t < start) continue;

    FeatureVector f;
    f.price_level_z = zscore(closes[t], closes.subspan(t - n, n));
    f.volume_level_z = zscore(volumes[t], volumes.subspan(t - n, n));
    f.price_change_z = pc_stats.z(pc);
    f.volume_change_z = vc_stats.z(vc);
    double base = e[t - cfg.volatility_m];
    if (base == 0.0) throw DivisionByZero("EMA is zero at t-m");
    f.volatility = (e[t] - base) / base;
    f.raw_prices.assign(closes.begin() + static_cast<std::ptrdiff_t>(t + 1 - cfg.history_h),
                        closes.begin() + static_cast<std::ptrdiff_t>(t + 1));
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace mmrl
