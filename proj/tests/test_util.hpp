#pragma once

#include <random>
#include <vector>

#include "mmrl/ingest.hpp"
#include "mmrl/orderbook.hpp"
#include "mmrl/types.hpp"

namespace mmrl::testing {

inline MarketEvent trade(Timestamp ts, double price, double qty, Side side = Side::Buy) {
  return {ts, EventKind::Trade, side, Price::from_double(price), qty};
}

inline MarketEvent bid(Timestamp ts, double price, double qty) {
  return {ts, EventKind::BidDelta, Side::Buy, Price::from_double(price), qty};
}

inline MarketEvent ask(Timestamp ts, double price, double qty) {
  return {ts, EventKind::AskDelta, Side::Sell, Price::from_double(price), qty};
}

inline OrderBook book_of(std::vector<std::pair<double, double>> bids,
                         std::vector<std::pair<double, double>> asks) {
  OrderBook b;
  for (auto [p, q] : bids) b.set_level(Side::Buy, Price::from_double(p), q);
  for (auto [p, q] : asks) b.set_level(Side::Sell, Price::from_double(p), q);
  return b;
}

inline Fill fill(double price, double qty, Timestamp ts = 0) {
  return {Price::from_double(price), qty, ts};
}

inline TickBar bar(Timestamp open_time, double open, double high, double low, double close,
                   double volume) {
  return {open_time, open, high, low, close, volume};
}

// Bars whose OHLC all equal the given closes (volume 1 each).
inline std::vector<TickBar> bars_from_closes(const std::vector<double>& closes,
                                             double volume = 1.0) {
  std::vector<TickBar> out;
  for (std::size_t i = 0; i < closes.size(); ++i) {
    out.push_back({static_cast<Timestamp>(i) * kMinuteMs, closes[i], closes[i], closes[i],
                   closes[i], volume});
  }
  return out;
}

// Random non-crossing delta feed: bids on [lo, mid), asks on (mid, hi] in
// 0.10 steps, with a mix of insertions, updates and deletions.
inline std::vector<MarketEvent> random_deltas(std::mt19937_64& rng, std::size_t count,
                                              Timestamp t0 = 0, double mid = 100.0,
                                              int levels = 40) {
  std::uniform_int_distribution<int> level(1, levels);
  std::uniform_int_distribution<int> coin(0, 3);
  std::uniform_real_distribution<double> qty(0.1, 5.0);
  std::uniform_int_distribution<int> gap(0, 3);
  std::vector<MarketEvent> out;
  Timestamp ts = t0;
  for (std::size_t i = 0; i < count; ++i) {
    ts += gap(rng);
    const bool is_bid = coin(rng) % 2 == 0;
    const double price = is_bid ? mid - 0.1 * level(rng) : mid + 0.1 * level(rng);
    const double q = coin(rng) == 0 ? 0.0 : std::round(qty(rng) * 1000) / 1000;
    if (coin(rng) == 3) {
      out.push_back(trade(ts, price, 0.5, is_bid ? Side::Sell : Side::Buy));
    } else {
      out.push_back(is_bid ? bid(ts, price, q) : ask(ts, price, q));
    }
  }
  return out;
}

}  // namespace mmrl::testing
