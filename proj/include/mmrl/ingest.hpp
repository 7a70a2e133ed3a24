#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mmrl/orderbook.hpp"
#include "mmrl/types.hpp"

namespace mmrl {

struct RejectedRecord {
  std::size_t line_no = 0;
  std::string reason;
};

struct ParseResult {
  std::vector<MarketEvent> events;  // stable-sorted by timestamp
  std::vector<RejectedRecord> rejected;
  std::size_t records = 0;  // non-blank input lines
};

// Parses the JSON-lines event feed. In strict mode the first bad line throws
// MalformedRecord (or NonPositivePrice); otherwise bad lines are collected in
// `rejected` and skipped.
ParseResult parse_event_stream(std::istream& in, bool strict = true);

// Single-line encoding of one event, the inverse of the parser.
std::string serialize_event(const MarketEvent& event);
void write_event_stream(std::ostream& out, std::span<const MarketEvent> events);

struct BookSnapshot {
  Timestamp ts = 0;
  OrderBook book;
};

BookSnapshot parse_snapshot(std::istream& in);
void write_snapshot(std::ostream& out, const BookSnapshot& snapshot);

// One bar per minute in [t_start, t_end). Minutes without trades repeat the
// previous close with zero volume; leading empty minutes are skipped.
std::vector<TickBar> build_minute_ticks(std::span<const MarketEvent> trades, Timestamp t_start,
                                        Timestamp t_end);

// Convenience overload covering the minutes spanned by the trades.
std::vector<TickBar> build_minute_ticks(std::span<const MarketEvent> trades);

void write_tick_csv(std::ostream& out, std::span<const TickBar> bars);
std::vector<TickBar> read_tick_csv(std::istream& in);

// Historical book: an initial snapshot plus the ordered feed after it.
class BookTimeline {
 public:
  BookTimeline() = default;
  BookTimeline(BookSnapshot snapshot, std::vector<MarketEvent> events);
  // Explicit end (exclusive) for split halves; defaults to last event + 1 ms.
  BookTimeline(BookSnapshot snapshot, std::vector<MarketEvent> events, Timestamp end);

  const OrderBook& initial_snapshot() const { return snapshot_.book; }
  const BookSnapshot& snapshot() const { return snapshot_; }
  const std::vector<MarketEvent>& events() const { return events_; }
  Timestamp start() const { return snapshot_.ts; }
  Timestamp end() const { return end_; }

  // Offset of the first event with timestamp > ts.
  std::size_t offset_after(Timestamp ts) const;
  std::vector<MarketEvent> trades() const;

 private:
  BookSnapshot snapshot_;
  std::vector<MarketEvent> events_;
  Timestamp end_ = 0;
};

// Book after applying every event with timestamp <= until to the snapshot.
OrderBook replay_book(const BookTimeline& timeline, Timestamp until);

// Forward-replaying cursor over a timeline with periodic checkpoints so that
// seeking backwards does not restart from the snapshot.
class BookCursor {
 public:
  explicit BookCursor(std::shared_ptr<const BookTimeline> timeline,
                      std::size_t checkpoint_every = 4096);

  // Applies all events with timestamp <= until; returns the applied slice.
  std::span<const MarketEvent> advance_to(Timestamp until);
  // Positions the cursor at `ts` (forward or backward).
  void seek(Timestamp ts);

  const OrderBook& book() const { return book_; }
  Timestamp position() const { return position_; }
  const BookTimeline& timeline() const { return *timeline_; }

 private:
  std::shared_ptr<const BookTimeline> timeline_;
  std::vector<std::pair<std::size_t, OrderBook>> checkpoints_;  // (offset, book before it)
  std::size_t checkpoint_every_;
  OrderBook book_;
  std::size_t offset_ = 0;
  Timestamp position_ = 0;
};

std::pair<std::vector<TickBar>, std::vector<TickBar>> split_train_test(
    std::span<const TickBar> series, Timestamp boundary);

// The test half starts from the book replayed to just before `boundary`.
std::pair<BookTimeline, BookTimeline> split_train_test(const BookTimeline& timeline,
                                                       Timestamp boundary);

// Loads snapshot.json + events.jsonl from a directory.
BookTimeline load_timeline_dir(const std::string& dir);
void save_timeline_dir(const std::string& dir, const BookTimeline& timeline);

}  // namespace mmrl
