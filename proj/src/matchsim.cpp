#include "mmrl/matchsim.hpp"

#include <algorithm>

#include "mmrl/errors.hpp"

namespace mmrl {

namespace {

// Quantities below this are treated as fully consumed.
constexpr double kQtyEpsilon = 1e-12;

template <typename Levels, typename Crosses>
double take_liquidity(Levels& levels, double quantity, Timestamp ts, Crosses crosses,
                      std::vector<Fill>& fills) {
  auto it = levels.begin();
  while (quantity > kQtyEpsilon && it != levels.end() && crosses(it->first)) {
    double q = std::min(quantity, it->second);
    fills.push_back({it->first, q, ts});
    quantity -= q;
    it->second -= q;
    if (it->second <= kQtyEpsilon) {
      it = levels.erase(it);
    } else {
      ++it;
    }
  }
  return quantity <= kQtyEpsilon ? 0.0 : quantity;
}

}  // namespace

std::vector<Fill> place_market(OrderBook& book, Side side, double quantity, Timestamp ts) {
  std::vector<Fill> fills;
  if (quantity <= 0.0) return fills;
  const Side resting_side = opposite(side);
  while (quantity > kQtyEpsilon) {
    auto best = side == Side::Buy ? book.best_ask() : book.best_bid();
    if (!best) break;
    double q = book.consume(resting_side, *best, quantity);
    fills.push_back({*best, q, ts});
    quantity -= q;
  }
  if (quantity > kQtyEpsilon) throw InsufficientDepth(std::move(fills), quantity);
  return fills;
}

RestingOrder place_limit(const OrderBook& book, const AgentOrder& order) {
  RestingOrder resting;
  resting.order = order;
  resting.remaining = order.quantity;
  const Price limit = order.limit_price;
  if (order.side == Side::Buy) {
    OrderBook::AskMap asks = book.asks();
    resting.remaining = take_liquidity(
        asks, order.quantity, order.placed_at, [&](Price p) { return p <= limit; },
        resting.fills);
    if (auto it = book.bids().find(limit); it != book.bids().end()) {
      resting.queue_ahead = it->second;
    }
  } else {
    OrderBook::BidMap bids = book.bids();
    resting.remaining = take_liquidity(
        bids, order.quantity, order.placed_at, [&](Price p) { return p >= limit; },
        resting.fills);
    if (auto it = book.asks().find(limit); it != book.asks().end()) {
      resting.queue_ahead = it->second;
    }
  }
  return resting;
}

RestingOrder advance(RestingOrder resting, std::span<const MarketEvent> events) {
  const Price limit = resting.order.limit_price;
  const bool buy = resting.order.side == Side::Buy;
  for (const auto& ev : events) {
    if (!resting.active()) break;
    if (!ev.is_trade() || ev.ts <= resting.order.placed_at) continue;
    bool crosses = buy ? ev.price <= limit : ev.price >= limit;
    if (!crosses) continue;
    double volume = ev.quantity;
    double ahead = std::min(resting.queue_ahead, volume);
    resting.queue_ahead -= ahead;
    volume -= ahead;
    if (volume <= 0.0) continue;
    double q = std::min(resting.remaining, volume);
    resting.fills.push_back({limit, q, ev.ts});
    resting.remaining -= q;
    if (resting.remaining <= kQtyEpsilon) resting.remaining = 0.0;
  }
  return resting;
}

RestingOrder cancel(RestingOrder resting) {
  resting.cancelled = true;
  return resting;
}

}  // namespace mmrl
