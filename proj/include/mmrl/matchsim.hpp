#pragma once

#include <span>
#include <vector>

#include "mmrl/orderbook.hpp"
#include "mmrl/types.hpp"

namespace mmrl {

enum class OrderKind { Limit, Market };

struct AgentOrder {
  Side side = Side::Buy;
  OrderKind kind = OrderKind::Limit;
  Price limit_price;
  double quantity = 0.0;
  Timestamp placed_at = 0;
};

// An agent limit order after placement. Invariant:
// remaining + sum(fills.quantity) == order.quantity.
struct RestingOrder {
  AgentOrder order;
  double remaining = 0.0;
  std::vector<Fill> fills;
  // Displayed quantity queued ahead of the agent at its limit level.
  double queue_ahead = 0.0;
  bool cancelled = false;

  bool active() const { return !cancelled && remaining > 0.0; }
  double filled() const { return order.quantity - remaining; }
};

// Walks the opposing side best-first, removing consumed quantity from `book`.
// Throws InsufficientDepth (carrying the partial fills) when the side runs dry.
std::vector<Fill> place_market(OrderBook& book, Side side, double quantity, Timestamp ts = 0);

// Executes the crossing part of a limit order against the book at the book's
// prices; any remainder rests at the limit price behind the displayed quantity.
// The book is not modified: agent orders have no market impact.
RestingOrder place_limit(const OrderBook& book, const AgentOrder& order);

// Fills a resting order from historical trades that print through its price.
RestingOrder advance(RestingOrder resting, std::span<const MarketEvent> events);

RestingOrder cancel(RestingOrder resting);

}  // namespace mmrl
