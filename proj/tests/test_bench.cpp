#include <doctest.h>

#include <memory>
#include <random>
#include <sstream>

#include "mmrl/bench.hpp"
#include "mmrl/errors.hpp"
#include "mmrl/synth.hpp"
#include "test_util.hpp"

using namespace mmrl;
using namespace mmrl::testing;

namespace {

using V = std::vector<double>;

std::shared_ptr<const std::vector<TickBar>> shared(std::vector<TickBar> bars) {
  return std::make_shared<const std::vector<TickBar>>(std::move(bars));
}

// Plays back a fixed action script, then holds.
MacroPolicy scripted(std::vector<MacroAction> script) {
  auto i = std::make_shared<std::size_t>(0);
  return [script = std::move(script), i](std::span<const double>) {
    return *i < script.size() ? script[(*i)++] : MacroAction::Hold;
  };
}

MicroPolicy constant_micro(int a) {
  return [a](std::span<const double>) { return a; };
}

struct Desk {
  std::shared_ptr<const std::vector<TickBar>> bars;
  std::shared_ptr<const BookTimeline> timeline;
};

// Static book (bid 99.9 / ask 100, deep) with flat minute bars at 100.
Desk static_desk(std::size_t minutes = 40) {
  const Timestamp start = 100 * kMinuteMs;
  std::vector<TickBar> bars;
  for (std::size_t i = 0; i < minutes; ++i) {
    bars.push_back(bar(start + static_cast<Timestamp>(i) * kMinuteMs, 100, 100, 100, 100, 1));
  }
  auto tl = std::make_shared<const BookTimeline>(
      BookSnapshot{start, book_of({{99.9, 100}, {99.8, 100}}, {{100, 100}, {100.1, 100}})},
      std::vector<MarketEvent>{}, start + static_cast<Timestamp>(minutes + 1) * kMinuteMs);
  return {shared(std::move(bars)), tl};
}

}  // namespace

TEST_CASE("buy_and_hold") {
  auto flat = buy_and_hold(bars_from_closes(V(10, 50.0)), 3);
  for (const auto& p : flat.points) CHECK(p.cum_pnl == 0.0);
  auto down = buy_and_hold(bars_from_closes({100, 95, 92, 90}), 10);
  CHECK(down.stats.final_pnl == -100.0);
  CHECK(down.stats.max_drawdown == 100.0);
  auto none = buy_and_hold(bars_from_closes({100, 95, 92, 90}), 0);
  for (const auto& p : none.points) CHECK(p.cum_pnl == 0.0);

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(1, 100);
  V closes(50);
  for (auto& c : closes) c = u(rng);
  auto curve = buy_and_hold(bars_from_closes(closes), 2.5);
  CHECK(curve.stats.final_pnl == 2.5 * (closes.back() - closes.front()));
  CHECK_THROWS_AS(buy_and_hold(std::vector<TickBar>{}, 1), EmptySeries);
}

TEST_CASE("momentum") {
  SUBCASE("flat series never trades") {
    auto c = momentum(bars_from_closes(V(30, 10.0)), 20);
    for (const auto& p : c.points) CHECK(p.cum_pnl == 0.0);
    CHECK(c.open_units == 0.0);
  }
  SUBCASE("V shape") {
    // n = 2. Buys at 8, 7, 6 on the fall; sells all three at 12.
    auto c = momentum(bars_from_closes({10, 9, 8, 7, 6, 12, 13, 14, 15, 16}), 2);
    CHECK(c.stats.final_pnl == (12 - 8) + (12 - 7) + (12 - 6));
    CHECK(c.points[4].cum_pnl == 0.0);
    CHECK(c.points[5].cum_pnl == 15.0);
    CHECK(c.open_units == 0.0);
  }
  SUBCASE("monotone rise only sells an empty inventory") {
    V up;
    for (int i = 0; i < 40; ++i) up.push_back(100 + i);
    auto c = momentum(bars_from_closes(up), 20);
    CHECK(c.stats.final_pnl == 0.0);
  }
  SUBCASE("too short") {
    CHECK_THROWS_AS(momentum(bars_from_closes(V(20, 1.0)), 20), SeriesTooShort);
  }
}

TEST_CASE("PNL statistics") {
  PnlCurve c;
  for (double v : {0.0, 2.0, 1.0, 4.0, 0.0}) c.points.push_back({0, v});
  c.compute_stats();
  CHECK(c.stats.final_pnl == 0.0);
  CHECK(c.stats.max_drawdown == 4.0);
  // Increments 0, 2, -1, 3, -4 have mean 0 and variance 30/5.
  CHECK(c.stats.step_std == doctest::Approx(std::sqrt(6.0)));
}

TEST_CASE("run_macro_standalone") {
  V closes(31, 1000.0);
  for (int i = 1; i <= 20; ++i) closes.push_back(1000.0 + 3.0 * i);
  auto bars = shared(bars_from_closes(closes));

  SUBCASE("always hold") {
    auto c = run_macro_standalone([](std::span<const double>) { return MacroAction::Hold; },
                                  MacroEnv(bars, MacroConfig{}));
    for (const auto& p : c.points) CHECK(p.cum_pnl == 0.0);
  }
  SUBCASE("alternating buy and sell on a rising series") {
    auto flip = std::make_shared<bool>(false);
    MacroPolicy alternate = [flip](std::span<const double>) {
      *flip = !*flip;
      return *flip ? MacroAction::Buy : MacroAction::Sell;
    };
    std::vector<MacroTrade> blotter;
    auto c = run_macro_standalone(alternate, MacroEnv(bars, MacroConfig{}), &blotter);
    // Oracle: each Buy at bar k is sold at bar k + 1.
    double expected = 0.0;
    for (std::size_t i = 0; i + 1 < blotter.size(); i += 2) {
      expected += (*bars)[blotter[i].bar + 1].open - (*bars)[blotter[i].bar].open;
    }
    CHECK(c.stats.final_pnl == doctest::Approx(expected));
    CHECK(c.stats.final_pnl > 0.0);
    CHECK(blotter.size() == 20);
  }
  SUBCASE("deterministic for a fixed checkpoint") {
    NetSpec s;
    s.input_dim = MacroEnv::state_dim(MacroConfig{});
    s.output_dim = 3;
    s.seed = 4;
    QNetwork net(s);
    auto a = run_macro_standalone(net, MacroEnv(bars, MacroConfig{}));
    auto b = run_macro_standalone(net, MacroEnv(bars, MacroConfig{}));
    CHECK(a.points == b.points);
  }
}

TEST_CASE("run_pipeline") {
  SUBCASE("always hold") {
    auto d = static_desk();
    auto r = run_pipeline(scripted({}), constant_micro(0), MacroEnv(d.bars, MacroConfig{}),
                          d.timeline);
    CHECK(r.stats.episodes == 0);
    CHECK(r.stats.total_orders == 0);
    for (const auto& p : r.curve.points) CHECK(p.cum_pnl == 0.0);
  }
  SUBCASE("single buy then sell at the market") {
    auto d = static_desk();
    auto r = run_pipeline(scripted({MacroAction::Buy, MacroAction::Sell}), constant_micro(0),
                          MacroEnv(d.bars, MacroConfig{}), d.timeline);
    REQUIRE(r.episodes.size() == 2);
    double expected = vwap(r.episodes[1].fills) - vwap(r.episodes[0].fills);
    CHECK(expected == doctest::Approx(99.9 - 100.0));
    CHECK(r.curve.stats.final_pnl == doctest::Approx(expected));
    CHECK(r.stats.limit_fraction == 1.0);
  }
  SUBCASE("stale book forces market orders") {
    auto d = static_desk();
    auto r = run_pipeline(scripted({MacroAction::Buy, MacroAction::Buy, MacroAction::Sell}),
                          constant_micro(-50), MacroEnv(d.bars, MacroConfig{}), d.timeline);
    // Buys at -50 rest far below the ask and run out the clock; the sell at
    // -50 sits below the bid and crosses on placement.
    CHECK(r.stats.forced_market_orders == 2);
    CHECK(r.stats.limit_orders == 6 + 6 + 1);
    CHECK(r.stats.limit_fraction < 1.0);
    CHECK(r.episodes[2].quantity == 2.0);
    CHECK(r.curve.stats.final_pnl == doctest::Approx(2 * (99.9 - 100.0)));
  }
}

TEST_CASE("pipeline accounting identity on a synthetic market") {
  SynthConfig sc;
  sc.seed = 11;
  sc.duration_minutes = 50;
  sc.noise_sigma = 0.2;
  auto market = generate(sc);
  auto bars = shared(market.bars());
  auto tl = std::make_shared<const BookTimeline>(market.timeline());

  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> act(0, 2);
  std::uniform_int_distribution<int> off(-20, 20);
  MacroPolicy macro = [&](std::span<const double>) { return static_cast<MacroAction>(act(rng)); };
  MicroPolicy micro = [&](std::span<const double>) { return off(rng); };
  auto r = run_pipeline(macro, micro, MacroEnv(bars, MacroConfig{}), tl);

  // Independent ledger replay over the executed episodes.
  double pnl = 0.0, basis = 0.0;
  for (const auto& ep : r.episodes) {
    double qty = 0.0, notional = 0.0;
    for (const auto& f : ep.fills) {
      qty += f.quantity;
      notional += f.price.value() * f.quantity;
    }
    CHECK(qty == doctest::Approx(ep.quantity).epsilon(1e-9));
    CHECK(ep.limit_orders <= 6);
    if (ep.side == Side::Buy) {
      basis += notional;
    } else {
      pnl += notional - basis;
      basis = 0.0;
    }
  }
  CHECK(r.episodes.size() > 5);
  CHECK(r.curve.stats.final_pnl == doctest::Approx(pnl).epsilon(1e-9));
}

TEST_CASE("PNL CSV and SVG") {
  PnlCurve c;
  c.strategy = "buyhold";
  c.points = {{60000, 0.0}, {120000, -1.5}};
  std::ostringstream out;
  write_pnl_csv(out, c);
  CHECK(out.str() == "ts,cum_pnl\n60000,0\n120000,-1.5\n");
  auto svg = render_svg(std::vector<PnlCurve>{c}, "test");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("buyhold") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
}
