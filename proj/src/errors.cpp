#include "mmrl/errors.hpp"

#include <utility>

namespace mmrl {

Error::Error(std::string name, const std::string& message)
    : std::runtime_error(name + ": " + message), name_(std::move(name)) {}

MalformedRecord::MalformedRecord(std::size_t line_no, const std::string& reason)
    : Error("MalformedRecord", "line " + std::to_string(line_no) + ": " + reason),
      line_no_(line_no) {}

InsufficientDepth::InsufficientDepth(std::vector<Fill> filled_so_far, double unfilled)
    : Error("InsufficientDepth",
            "opposing side exhausted with " + std::to_string(unfilled) + " unfilled"),
      filled_(std::move(filled_so_far)),
      unfilled_(unfilled) {}

std::string_view to_string(Side s) { return s == Side::Buy ? "buy" : "sell"; }

Side side_from_string(std::string_view s) {
  if (s == "buy") return Side::Buy;
  if (s == "sell") return Side::Sell;
  throw InvalidConfig("unknown side '" + std::string(s) + "'");
}

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::Trade:
      return "trade";
    case EventKind::BidDelta:
      return "bid";
    case EventKind::AskDelta:
      return "ask";
  }
  return "?";
}

}  // namespace mmrl
