#include "mmrl/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "mmrl/errors.hpp"
#include "mmrl/io.hpp"

namespace mmrl {

using nlohmann::json;

namespace {

std::string price_text(Price p) {
  std::int64_t t = p.ticks();
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s%lld.%02lld", t < 0 ? "-" : "",
                static_cast<long long>((t < 0 ? -t : t) / Price::kTicksPerUnit),
                static_cast<long long>((t < 0 ? -t : t) % Price::kTicksPerUnit));
  return buf;
}

MarketEvent decode_event(const std::string& line, std::size_t line_no) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::exception& e) {
    throw MalformedRecord(line_no, e.what());
  }
  if (!obj.is_object()) throw MalformedRecord(line_no, "record is not an object");
  auto field = [&](const char* key) -> const json& {
    auto it = obj.find(key);
    if (it == obj.end()) throw MalformedRecord(line_no, std::string("missing '") + key + "'");
    return *it;
  };

  MarketEvent ev;
  const json& ts = field("ts");
  if (!ts.is_number_integer()) throw MalformedRecord(line_no, "'ts' must be an integer");
  ev.ts = ts.get<Timestamp>();

  const json& kind = field("kind");
  if (!kind.is_string()) throw MalformedRecord(line_no, "'kind' must be a string");
  const auto k = kind.get<std::string>();
  if (k == "trade") {
    ev.kind = EventKind::Trade;
    const json& side = field("side");
    if (side == "buy") {
      ev.side = Side::Buy;
    } else if (side == "sell") {
      ev.side = Side::Sell;
    } else {
      throw MalformedRecord(line_no, "'side' must be \"buy\" or \"sell\"");
    }
  } else if (k == "bid") {
    ev.kind = EventKind::BidDelta;
    ev.side = Side::Buy;
  } else if (k == "ask") {
    ev.kind = EventKind::AskDelta;
    ev.side = Side::Sell;
  } else {
    throw MalformedRecord(line_no, "unknown kind '" + k + "'");
  }

  const json& price = field("price");
  const json& qty = field("qty");
  if (!price.is_number() || !qty.is_number()) {
    throw MalformedRecord(line_no, "'price' and 'qty' must be numbers");
  }
  double p = price.get<double>();
  double q = qty.get<double>();
  if (!std::isfinite(p) || !std::isfinite(q)) throw MalformedRecord(line_no, "non-finite value");
  if (q < 0.0) throw MalformedRecord(line_no, "negative quantity");
  ev.price = Price::from_double(p);
  if (p <= 0.0 || ev.price.ticks() <= 0) {
    throw NonPositivePrice("line " + std::to_string(line_no) + ": price " + std::to_string(p));
  }
  ev.quantity = q;
  return ev;
}

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

ParseResult parse_event_stream(std::istream& in, bool strict) {
  ParseResult out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    ++out.records;
    try {
      out.events.push_back(decode_event(line, line_no));
    } catch (const Error& e) {
      if (strict) throw;
      out.rejected.push_back({line_no, e.what()});
    }
  }
  std::stable_sort(out.events.begin(), out.events.end(),
                   [](const MarketEvent& a, const MarketEvent& b) { return a.ts < b.ts; });
  return out;
}

std::string serialize_event(const MarketEvent& ev) {
  std::string s = "{\"ts\":" + std::to_string(ev.ts) + ",\"kind\":\"" +
                  std::string(to_string(ev.kind)) + "\"";
  if (ev.is_trade()) s += ",\"side\":\"" + std::string(to_string(ev.side)) + "\"";
  s += ",\"price\":" + price_text(ev.price) + ",\"qty\":" + format_double(ev.quantity) + "}";
  return s;
}

void write_event_stream(std::ostream& out, std::span<const MarketEvent> events) {
  for (const auto& ev : events) out << serialize_event(ev) << '\n';
}

BookSnapshot parse_snapshot(std::istream& in) {
  json obj;
  try {
    obj = json::parse(in);
  } catch (const json::exception& e) {
    throw MalformedRecord(1, e.what());
  }
  BookSnapshot snap;
  try {
    snap.ts = obj.at("ts").get<Timestamp>();
    auto load_side = [&](const char* key, Side side) {
      for (const auto& lvl : obj.at(key)) {
        double p = lvl.at(0).get<double>();
        double q = lvl.at(1).get<double>();
        if (p <= 0.0) throw NonPositivePrice(std::string(key) + " level price " + std::to_string(p));
        if (q < 0.0) throw MalformedRecord(1, "negative level quantity");
        snap.book.set_level(side, Price::from_double(p), q);
      }
    };
    load_side("bids", Side::Buy);
    load_side("asks", Side::Sell);
  } catch (const json::exception& e) {
    throw MalformedRecord(1, e.what());
  }
  return snap;
}

void write_snapshot(std::ostream& out, const BookSnapshot& snap) {
  out << "{\"ts\":" << snap.ts << ",\"bids\":[";
  bool first = true;
  for (const auto& [p, q] : snap.book.bids()) {
    out << (first ? "" : ",") << '[' << price_text(p) << ',' << format_double(q) << ']';
    first = false;
  }
  out << "],\"asks\":[";
  first = true;
  for (const auto& [p, q] : snap.book.asks()) {
    out << (first ? "" : ",") << '[' << price_text(p) << ',' << format_double(q) << ']';
    first = false;
  }
  out << "]}\n";
}

std::vector<TickBar> build_minute_ticks(std::span<const MarketEvent> trades, Timestamp t_start,
                                        Timestamp t_end) {
  for (const auto& ev : trades) {
    if (!ev.is_trade()) throw NonTradeEvent("delta event at ts " + std::to_string(ev.ts));
  }
  std::vector<TickBar> bars;
  std::optional<double> prev_close;
  std::size_t i = 0;
  // Trades may arrive unsorted from callers; bucket in timestamp order.
  std::vector<MarketEvent> sorted(trades.begin(), trades.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const MarketEvent& a, const MarketEvent& b) { return a.ts < b.ts; });
  while (i < sorted.size() && sorted[i].ts < t_start) ++i;

  for (Timestamp minute = t_start; minute < t_end; minute += kMinuteMs) {
    TickBar bar;
    bar.open_time = minute;
    bool any = false;
    for (; i < sorted.size() && sorted[i].ts < minute + kMinuteMs; ++i) {
      double p = sorted[i].price.value();
      if (!any) {
        bar.open = bar.high = bar.low = p;
        any = true;
      }
      bar.high = std::max(bar.high, p);
      bar.low = std::min(bar.low, p);
      bar.close = p;
      bar.volume += sorted[i].quantity;
    }
    if (any) {
      prev_close = bar.close;
      bars.push_back(bar);
    } else if (prev_close) {
      bar.open = bar.high = bar.low = bar.close = *prev_close;
      bars.push_back(bar);
    }
  }
  return bars;
}

std::vector<TickBar> build_minute_ticks(std::span<const MarketEvent> trades) {
  if (trades.empty()) return {};
  auto [lo, hi] = std::minmax_element(
      trades.begin(), trades.end(),
      [](const MarketEvent& a, const MarketEvent& b) { return a.ts < b.ts; });
  return build_minute_ticks(trades, minute_floor(lo->ts), minute_floor(hi->ts) + kMinuteMs);
}

void write_tick_csv(std::ostream& out, std::span<const TickBar> bars) {
  out << "open_time,open,high,low,close,volume\n";
  for (const auto& b : bars) {
    out << b.open_time << ',' << format_double(b.open) << ',' << format_double(b.high) << ','
        << format_double(b.low) << ',' << format_double(b.close) << ','
        << format_double(b.volume) << '\n';
  }
}

std::vector<TickBar> read_tick_csv(std::istream& in) {
  std::vector<TickBar> bars;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    if (line_no == 1 && line.rfind("open_time", 0) == 0) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (cells.size() != 6) throw MalformedRecord(line_no, "expected 6 columns");
    TickBar b;
    try {
      b.open_time = std::stoll(cells[0]);
      b.open = std::stod(cells[1]);
      b.high = std::stod(cells[2]);
      b.low = std::stod(cells[3]);
      b.close = std::stod(cells[4]);
      b.volume = std::stod(cells[5]);
    } catch (const std::exception&) {
      throw MalformedRecord(line_no, "unparseable number");
    }
    if (!(b.low <= b.open && b.open <= b.high && b.low <= b.close && b.close <= b.high) ||
        b.volume < 0.0) {
      throw MalformedRecord(line_no, "inconsistent OHLCV values");
    }
    bars.push_back(b);
  }
  return bars;
}

BookTimeline::BookTimeline(BookSnapshot snapshot, std::vector<MarketEvent> events)
    : snapshot_(std::move(snapshot)), events_(std::move(events)) {
  std::stable_sort(events_.begin(), events_.end(),
                   [](const MarketEvent& a, const MarketEvent& b) { return a.ts < b.ts; });
  end_ = events_.empty() ? snapshot_.ts + 1 : std::max(snapshot_.ts, events_.back().ts) + 1;
}

BookTimeline::BookTimeline(BookSnapshot snapshot, std::vector<MarketEvent> events, Timestamp end)
    : BookTimeline(std::move(snapshot), std::move(events)) {
  end_ = end;
}

std::size_t BookTimeline::offset_after(Timestamp ts) const {
  auto it = std::upper_bound(events_.begin(), events_.end(), ts,
                             [](Timestamp t, const MarketEvent& e) { return t < e.ts; });
  return static_cast<std::size_t>(it - events_.begin());
}

std::vector<MarketEvent> BookTimeline::trades() const {
  std::vector<MarketEvent> out;
  std::copy_if(events_.begin(), events_.end(), std::back_inserter(out),
               [](const MarketEvent& e) { return e.is_trade(); });
  return out;
}

OrderBook replay_book(const BookTimeline& timeline, Timestamp until) {
  OrderBook book = timeline.initial_snapshot();
  const auto& events = timeline.events();
  std::size_t stop = timeline.offset_after(until);
  for (std::size_t i = 0; i < stop; ++i) book.apply(events[i]);
  return book;
}

BookCursor::BookCursor(std::shared_ptr<const BookTimeline> timeline, std::size_t checkpoint_every)
    : timeline_(std::move(timeline)),
      checkpoint_every_(std::max<std::size_t>(1, checkpoint_every)),
      book_(timeline_->initial_snapshot()),
      position_(timeline_->start()) {
  checkpoints_.emplace_back(0, book_);
}

std::span<const MarketEvent> BookCursor::advance_to(Timestamp until) {
  const auto& events = timeline_->events();
  std::size_t begin = offset_;
  while (offset_ < events.size() && events[offset_].ts <= until) {
    if (offset_ % checkpoint_every_ == 0 && offset_ / checkpoint_every_ == checkpoints_.size()) {
      checkpoints_.emplace_back(offset_, book_);
    }
    book_.apply(events[offset_]);
    ++offset_;
  }
  position_ = std::max(position_, until);
  return std::span<const MarketEvent>(events).subspan(begin, offset_ - begin);
}

void BookCursor::seek(Timestamp ts) {
  if (ts < position_) {
    std::size_t target = timeline_->offset_after(ts);
    std::size_t idx = std::min(target / checkpoint_every_, checkpoints_.size() - 1);
    offset_ = checkpoints_[idx].first;
    book_ = checkpoints_[idx].second;
    position_ = timeline_->start();
  }
  advance_to(ts);
  position_ = ts;
}

std::pair<std::vector<TickBar>, std::vector<TickBar>> split_train_test(
    std::span<const TickBar> series, Timestamp boundary) {
  auto it = std::partition_point(series.begin(), series.end(),
                                 [&](const TickBar& b) { return b.open_time < boundary; });
  return {std::vector<TickBar>(series.begin(), it), std::vector<TickBar>(it, series.end())};
}

std::pair<BookTimeline, BookTimeline> split_train_test(const BookTimeline& timeline,
                                                       Timestamp boundary) {
  if (boundary < timeline.start() || boundary > timeline.end()) {
    throw BoundaryOutOfRange("boundary " + std::to_string(boundary) + " outside [" +
                             std::to_string(timeline.start()) + ", " +
                             std::to_string(timeline.end()) + "]");
  }
  const auto& events = timeline.events();
  auto cut = std::partition_point(events.begin(), events.end(),
                                  [&](const MarketEvent& e) { return e.ts < boundary; });
  std::vector<MarketEvent> head(events.begin(), cut);
  std::vector<MarketEvent> tail(cut, events.end());

  BookSnapshot test_start{boundary, replay_book(timeline, boundary - 1)};
  BookTimeline train(timeline.snapshot(), std::move(head), boundary);
  BookTimeline test(std::move(test_start), std::move(tail), timeline.end());
  return {std::move(train), std::move(test)};
}

BookTimeline load_timeline_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  std::ifstream snap_in(fs::path(dir) / "snapshot.json");
  if (!snap_in) throw IoError("cannot open " + (fs::path(dir) / "snapshot.json").string());
  BookSnapshot snap = parse_snapshot(snap_in);
  std::ifstream ev_in(fs::path(dir) / "events.jsonl");
  if (!ev_in) throw IoError("cannot open " + (fs::path(dir) / "events.jsonl").string());
  ParseResult parsed = parse_event_stream(ev_in, true);
  return BookTimeline(std::move(snap), std::move(parsed.events));
}

void save_timeline_dir(const std::string& dir, const BookTimeline& timeline) {
  namespace fs = std::filesystem;
  ensure_directory(dir);
  std::ofstream snap_out(fs::path(dir) / "snapshot.json");
  write_snapshot(snap_out, timeline.snapshot());
  std::ofstream ev_out(fs::path(dir) / "events.jsonl");
  write_event_stream(ev_out, timeline.events());
}

}  // namespace mmrl
