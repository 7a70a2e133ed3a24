#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace mmrl {

// Milliseconds since the Unix epoch.
using Timestamp = std::int64_t;

inline constexpr Timestamp kSecondMs = 1000;
inline constexpr Timestamp kMinuteMs = 60 * kSecondMs;

constexpr Timestamp minute_floor(Timestamp ts) {
  Timestamp r = ts % kMinuteMs;
  if (r < 0) r += kMinuteMs;
  return ts - r;
}

constexpr bool is_minute_aligned(Timestamp ts) { return minute_floor(ts) == ts; }

enum class Side { Buy, Sell };

constexpr Side opposite(Side s) { return s == Side::Buy ? Side::Sell : Side::Buy; }
std::string_view to_string(Side s);
Side side_from_string(std::string_view s);

// Price held as an integer count of 0.01 quote-currency ticks. Every price the
// micro-agent can reach (market price + k * 0.10) is exactly representable.
class Price {
 public:
  static constexpr std::int64_t kTicksPerUnit = 100;

  constexpr Price() = default;
  static constexpr Price from_ticks(std::int64_t ticks) { return Price(ticks); }
  static Price from_double(double value) {
    return Price(static_cast<std::int64_t>(std::llround(value * kTicksPerUnit)));
  }

  constexpr std::int64_t ticks() const { return ticks_; }
  constexpr double value() const { return static_cast<double>(ticks_) / kTicksPerUnit; }

  constexpr Price offset(std::int64_t ticks) const { return Price(ticks_ + ticks); }

  friend constexpr auto operator<=>(Price, Price) = default;

 private:
  constexpr explicit Price(std::int64_t ticks) : ticks_(ticks) {}
  std::int64_t ticks_ = 0;
};

enum class EventKind { Trade, BidDelta, AskDelta };

std::string_view to_string(EventKind k);

struct MarketEvent {
  Timestamp ts = 0;
  EventKind kind = EventKind::Trade;
  Side side = Side::Buy;  // meaningful for trades only
  Price price;
  double quantity = 0.0;

  bool is_trade() const { return kind == EventKind::Trade; }
  friend bool operator==(const MarketEvent&, const MarketEvent&) = default;
};

struct TickBar {
  Timestamp open_time = 0;
  double open = 0.0;
  double high = 0.0;
  double low = 0.0;
  double close = 0.0;
  double volume = 0.0;

  friend bool operator==(const TickBar&, const TickBar&) = default;
};

struct Fill {
  Price price;
  double quantity = 0.0;
  Timestamp ts = 0;

  friend bool operator==(const Fill&, const Fill&) = default;
};

struct LastTrade {
  Price price;
  double quantity = 0.0;
  Side side = Side::Buy;

  friend bool operator==(const LastTrade&, const LastTrade&) = default;
};

}  // namespace mmrl
