#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mmrl/ingest.hpp"
#include "mmrl/types.hpp"

namespace mmrl {

struct SynthConfig {
  std::uint64_t seed = 1;
  std::size_t duration_minutes = 60;
  double base_price = 5500.0;
  double trend_per_minute = 0.0;
  double noise_sigma = 0.05;  // stddev of the per-second fair-value step
  std::size_t book_depth = 25;
  double trade_rate = 1.0;  // expected trades per second
  double level_spacing = 0.10;
  double mean_level_qty = 2.0;
  double mean_trade_qty = 0.3;
  std::size_t refreshes_per_second = 2;
  Timestamp start_ts = 1542240000000;  // 2018-11-15T00:00:00Z

  void validate() const;
};

struct SynthMarket {
  BookSnapshot snapshot;
  std::vector<MarketEvent> events;
  std::vector<double> fair_value;  // per second, index 0 = start

  BookTimeline timeline() const { return BookTimeline(snapshot, events, end()); }
  std::vector<TickBar> bars() const;
  Timestamp end() const;
};

// Random-walk fair value with drift; a symmetric ladder of levels spaced
// `level_spacing` around it; Poisson trades that hit the touch. The aggressor
// side follows the fair-value tick direction.
SynthMarket generate(const SynthConfig& cfg);

}  // namespace mmrl
