#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "mmrl/types.hpp"

namespace mmrl {

struct Level {
  Price price;
  double quantity = 0.0;

  friend bool operator==(const Level&, const Level&) = default;
};

// Fixed-depth projection of the book used as network input. Missing levels
// are padded with quantity 0 at the last real price on that side (or the
// mid-price when the side is empty).
struct LevelView {
  std::size_t depth = 20;
  std::vector<Level> bid_levels;  // descending
  std::vector<Level> ask_levels;  // ascending
  std::size_t real_bids = 0;
  std::size_t real_asks = 0;

  friend bool operator==(const LevelView&, const LevelView&) = default;
};

// Aggregated (level-2) limit order book. Zero-quantity levels are never stored.
class OrderBook {
 public:
  using BidMap = std::map<Price, double, std::greater<>>;
  using AskMap = std::map<Price, double, std::less<>>;

  OrderBook() = default;

  const BidMap& bids() const { return bids_; }
  const AskMap& asks() const { return asks_; }
  const std::optional<LastTrade>& last_trade() const { return last_trade_; }

  std::optional<Price> best_bid() const;
  std::optional<Price> best_ask() const;
  // Mean of best bid and best ask, falling back to whichever side exists.
  std::optional<double> mid() const;

  // Sets the absolute quantity at a level (0 deletes). A level that would cross
  // the opposing side removes the stale opposing levels it crosses.
  void set_level(Side side, Price price, double quantity);

  // Applies one feed event: deltas via set_level, trades update last_trade.
  void apply(const MarketEvent& event);

  // Removes up to `quantity` from a level; returns the amount removed.
  double consume(Side side, Price price, double quantity);

  bool uncrossed() const;

  friend bool operator==(const OrderBook&, const OrderBook&) = default;

 private:
  BidMap bids_;
  AskMap asks_;
  std::optional<LastTrade> last_trade_;
};

// Pure-function form of OrderBook::apply for delta events.
OrderBook apply_delta(OrderBook book, const MarketEvent& event);

// Best price on the side an order of `side` would execute against:
// min ask for a buy, max bid for a sell. Throws EmptySide.
Price market_price(const OrderBook& book, Side side);

LevelView top_levels(const OrderBook& book, std::size_t depth = 20);

// Sum(q * p) / Sum(q). Throws EmptyFills.
double vwap(std::span<const Fill> fills);

double total_quantity(std::span<const Fill> fills);

}  // namespace mmrl
