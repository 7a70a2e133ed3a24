#include <doctest.h>

#include <cmath>
#include <sstream>

#include "mmrl/errors.hpp"
#include "mmrl/ingest.hpp"
#include "mmrl/synth.hpp"

using namespace mmrl;

TEST_CASE("flat configuration gives flat bars") {
  SynthConfig cfg;
  cfg.noise_sigma = 0.0;
  cfg.trend_per_minute = 0.0;
  cfg.duration_minutes = 15;
  auto m = generate(cfg);
  for (double f : m.fair_value) CHECK(f == cfg.base_price);
  auto bars = m.bars();
  REQUIRE(bars.size() == 15);
  for (const auto& b : bars) {
    CHECK(b.open == bars[0].open);
    CHECK(b.high == b.open);
    CHECK(b.low == b.open);
    CHECK(b.close == b.open);
  }
}

TEST_CASE("generation is deterministic per seed") {
  SynthConfig cfg;
  cfg.duration_minutes = 5;
  auto a = generate(cfg);
  auto b = generate(cfg);
  CHECK(a.events == b.events);
  CHECK(a.snapshot.book == b.snapshot.book);
  cfg.seed = 2;
  CHECK(generate(cfg).events != a.events);
}

TEST_CASE("drift over 60 minutes") {
  const double sigma = 0.05;
  const double envelope = 3.0 * sigma * std::sqrt(3600.0);
  double total = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    SynthConfig cfg;
    cfg.seed = seed;
    cfg.trend_per_minute = 1.0;
    cfg.noise_sigma = sigma;
    auto bars = generate(cfg).bars();
    REQUIRE(bars.size() == 60);
    double move = bars.back().close - bars.front().open;
    CHECK(std::abs(move - 60.0) <= envelope);
    total += move;
  }
  CHECK(std::abs(total / 20.0 - 60.0) <= envelope / std::sqrt(20.0));
}

TEST_CASE("output satisfies the ingest and book invariants") {
  SynthConfig cfg;
  cfg.seed = 3;
  cfg.duration_minutes = 20;
  cfg.noise_sigma = 0.3;
  cfg.trend_per_minute = -0.5;
  auto m = generate(cfg);

  // Wire format round trip.
  std::ostringstream events_out, snap_out;
  write_event_stream(events_out, m.events);
  write_snapshot(snap_out, m.snapshot);
  std::istringstream events_in(events_out.str()), snap_in(snap_out.str());
  auto parsed = parse_event_stream(events_in, false);
  CHECK(parsed.rejected.empty());
  CHECK(parsed.events == m.events);
  CHECK(parse_snapshot(snap_in).book == m.snapshot.book);

  Timestamp last = m.snapshot.ts;
  OrderBook book = m.snapshot.book;
  CHECK(book.uncrossed());
  const std::int64_t spacing = Price::from_double(cfg.level_spacing).ticks();
  for (const auto& e : m.events) {
    REQUIRE(e.ts >= last);
    last = e.ts;
    CHECK(e.price.ticks() > 0);
    CHECK(e.quantity >= 0.0);
    if (e.is_trade()) {
      CHECK(e.quantity > 0.0);
      // Trades print at the touch on the side the aggressor takes from.
      CHECK(e.price == (e.side == Side::Buy ? *book.best_ask() : *book.best_bid()));
    } else {
      CHECK(e.price.ticks() % spacing == 0);
    }
    book.apply(e);
    REQUIRE(book.uncrossed());
  }
  CHECK(last < m.end());
  CHECK(book.bids().size() >= 20);
  CHECK(book.asks().size() >= 20);

  auto bars = m.bars();
  CHECK(bars.size() == 20);
  for (const auto& b : bars) {
    CHECK(b.low <= std::min(b.open, b.close));
    CHECK(b.high >= std::max(b.open, b.close));
  }
}

TEST_CASE("config validation") {
  SynthConfig cfg;
  cfg.book_depth = 10;
  CHECK_THROWS_AS(generate(cfg), InvalidConfig);
  cfg = {};
  cfg.base_price = 0.0;
  CHECK_THROWS_AS(generate(cfg), InvalidConfig);
  cfg = {};
  cfg.trade_rate = 0.0;
  CHECK_THROWS_AS(generate(cfg), InvalidConfig);
}
