#include "mmrl/orderbook.hpp"

#include <algorithm>

#include "mmrl/errors.hpp"

namespace mmrl {

std::optional<Price> OrderBook::best_bid() const {
  if (bids_.empty()) return std::nullopt;
  return bids_.begin()->first;
}

std::optional<Price> OrderBook::best_ask() const {
  if (asks_.empty()) return std::nullopt;
  return asks_.begin()->first;
}

std::optional<double> OrderBook::mid() const {
  auto bid = best_bid();
  auto ask = best_ask();
  if (bid && ask) return 0.5 * (bid->value() + ask->value());
  if (bid) return bid->value();
  if (ask) return ask->value();
  return std::nullopt;
}

void OrderBook::set_level(Side side, Price price, double quantity) {
  if (side == Side::Buy) {
    if (quantity <= 0.0) {
      bids_.erase(price);
      return;
    }
    bids_[price] = quantity;
    // Drop stale asks at or below the new bid.
    asks_.erase(asks_.begin(), asks_.upper_bound(price));
  } else {
    if (quantity <= 0.0) {
      asks_.erase(price);
      return;
    }
    asks_[price] = quantity;
    bids_.erase(bids_.begin(), bids_.upper_bound(price));
  }
}

void OrderBook::apply(const MarketEvent& event) {
  switch (event.kind) {
    case EventKind::Trade:
      last_trade_ = LastTrade{event.price, event.quantity, event.side};
      break;
    case EventKind::BidDelta:
      set_level(Side::Buy, event.price, event.quantity);
      break;
    case EventKind::AskDelta:
      set_level(Side::Sell, event.price, event.quantity);
      break;
  }
}

double OrderBook::consume(Side side, Price price, double quantity) {
  auto take = [&](auto& levels) {
    auto it = levels.find(price);
    if (it == levels.end()) return 0.0;
    double taken = std::min(it->second, quantity);
    it->second -= taken;
    if (it->second <= 0.0) levels.erase(it);
    return taken;
  };
  return side == Side::Buy ? take(bids_) : take(asks_);
}

bool OrderBook::uncrossed() const {
  if (bids_.empty() || asks_.empty()) return true;
  return bids_.begin()->first < asks_.begin()->first;
}

OrderBook apply_delta(OrderBook book, const MarketEvent& event) {
  book.apply(event);
  return book;
}

Price market_price(const OrderBook& book, Side side) {
  if (side == Side::Buy) {
    if (auto ask = book.best_ask()) return *ask;
    throw EmptySide("no asks for a buy order");
  }
  if (auto bid = book.best_bid()) return *bid;
  throw EmptySide("no bids for a sell order");
}

namespace {

template <typename Map>
std::vector<Level> project(const Map& levels, std::size_t depth, Price fallback,
                           std::size_t& real) {
  std::vector<Level> out;
  out.reserve(depth);
  for (auto it = levels.begin(); it != levels.end() && out.size() < depth; ++it) {
    out.push_back({it->first, it->second});
  }
  real = out.size();
  Price pad = out.empty() ? fallback : out.back().price;
  out.resize(depth, Level{pad, 0.0});
  return out;
}

}  // namespace

LevelView top_levels(const OrderBook& book, std::size_t depth) {
  if (depth == 0) depth = 1;
  Price fallback;
  if (auto m = book.mid()) {
    fallback = Price::from_double(*m);
  } else if (book.last_trade()) {
    fallback = book.last_trade()->price;
  }
  LevelView view;
  view.depth = depth;
  view.bid_levels = project(book.bids(), depth, fallback, view.real_bids);
  view.ask_levels = project(book.asks(), depth, fallback, view.real_asks);
  return view;
}

double total_quantity(std::span<const Fill> fills) {
  double q = 0.0;
  for (const auto& f : fills) q += f.quantity;
  return q;
}

double vwap(std::span<const Fill> fills) {
  double qty = 0.0;
  double notional = 0.0;
  for (const auto& f : fills) {
    qty += f.quantity;
    notional += f.quantity * f.price.value();
  }
  if (fills.empty() || qty <= 0.0) throw EmptyFills("no filled quantity");
  return notional / qty;
}

}  // namespace mmrl
