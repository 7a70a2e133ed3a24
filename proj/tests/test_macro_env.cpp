#include <doctest.h>

#include <memory>
#include <random>
#include <sstream>

#include "mmrl/errors.hpp"
#include "mmrl/macro_env.hpp"
#include "test_util.hpp"

using namespace mmrl;
using namespace mmrl::testing;

namespace {

std::shared_ptr<const std::vector<TickBar>> shared(std::vector<TickBar> bars) {
  return std::make_shared<const std::vector<TickBar>>(std::move(bars));
}

// 31 flat bars at 5000 followed by the given opens (close = open).
std::shared_ptr<const std::vector<TickBar>> flat_then(std::vector<double> opens) {
  std::vector<double> closes(31, 5000.0);
  closes.insert(closes.end(), opens.begin(), opens.end());
  return shared(bars_from_closes(closes));
}

}  // namespace

TEST_CASE("clip_reward") {
  CHECK(clip_reward(5.3) == 1.0);
  CHECK(clip_reward(0.0) == 0.0);
  CHECK(clip_reward(-0.0001) == -1.0);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0, 100);
  for (int i = 0; i < 1000; ++i) {
    double c = clip_reward(g(rng));
    CHECK((c == -1.0 || c == 0.0 || c == 1.0));
  }
}

TEST_CASE("reset") {
  MacroEnv env(flat_then({5000, 5000}), MacroConfig{});
  auto s = env.reset();
  CHECK(s.t == 30);
  CHECK(s.assets.empty());
  auto again = env.reset();
  CHECK(env.encode(again) == env.encode(s));
  CHECK(env.encode(s).size() == MacroEnv::state_dim(MacroConfig{}));
  CHECK(MacroEnv::state_dim(MacroConfig{}) == 5 + 30 + 2);

  MacroEnv short_env(shared(bars_from_closes(std::vector<double>(10, 1.0))), MacroConfig{});
  CHECK_THROWS_AS(short_env.reset(), InsufficientHistory);

  MacroEnv late(flat_then({5000, 5000, 5000, 5000}), MacroConfig{}, 33);
  CHECK(late.reset().t == 32);
}

TEST_CASE("step rewards") {
  SUBCASE("hold") {
    MacroEnv env(flat_then({5000, 5000}), MacroConfig{});
    env.reset();
    auto out = env.step(MacroAction::Hold);
    CHECK(out.reward == 0.0);
    CHECK(out.trade.raw_reward == 0.0);
  }
  SUBCASE("sell with no assets") {
    MacroEnv env(flat_then({5000, 5000}), MacroConfig{});
    env.reset();
    auto out = env.step(MacroAction::Sell);
    CHECK(out.trade.raw_reward == -1.0);
    CHECK(out.reward == -1.0);
  }
  SUBCASE("profit is summed then clipped") {
    MacroEnv env(flat_then({5010, 5020, 5020}), MacroConfig{});
    auto s = env.reset();
    // Execution happens at the open of the bar after the state's last bar.
    auto b1 = env.step(MacroAction::Buy);
    CHECK(b1.trade.price == 5010.0);
    CHECK(b1.reward == 0.0);
    CHECK(b1.next.assets == std::vector<double>{5010.0});
    auto sell = env.step(MacroAction::Sell);
    CHECK(sell.trade.price == 5020.0);
    CHECK(sell.trade.raw_reward == 10.0);
    CHECK(sell.reward == 1.0);
    CHECK(sell.next.assets.empty());
    CHECK(s.t + 2 == sell.next.t);
  }
  SUBCASE("two purchases") {
    std::vector<double> closes(30, 5000.0);
    for (double p : {5000.0, 5000.0, 5010.0, 5020.0, 5020.0}) closes.push_back(p);
    MacroEnv env(shared(bars_from_closes(closes)), MacroConfig{});
    env.reset();
    env.step(MacroAction::Buy);  // bar 31 at 5000
    env.step(MacroAction::Buy);  // bar 32 at 5010
    auto out = env.step(MacroAction::Sell);  // bar 33 at 5020
    CHECK(out.trade.raw_reward == 30.0);
    CHECK(out.trade.clipped_reward == 1.0);
    CHECK(out.trade.quantity == 2.0);
  }
  SUBCASE("episode ends on the last bar") {
    MacroEnv env(flat_then({5000}), MacroConfig{});
    env.reset();
    auto out = env.step(MacroAction::Hold);
    CHECK(out.done);
    CHECK_THROWS_AS(env.step(MacroAction::Hold), EpisodeDone);
  }
}

TEST_CASE("states never depend on later bars") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0, 2);
  std::vector<double> base;
  double p = 5000;
  for (int i = 0; i < 80; ++i) base.push_back(p += g(rng));
  const std::size_t k = 55;
  std::vector<double> altered = base;
  for (std::size_t i = k; i < altered.size(); ++i) altered[i] *= 1.3;

  MacroEnv a(shared(bars_from_closes(base)), MacroConfig{});
  MacroEnv b(shared(bars_from_closes(altered)), MacroConfig{});
  auto sa = a.reset();
  auto sb = b.reset();
  while (sa.t < k) {
    CHECK(a.encode(sa) == b.encode(sb));
    auto oa = a.step(MacroAction::Buy);
    auto ob = b.step(MacroAction::Buy);
    if (oa.trade.bar < k) CHECK(oa.trade.price == ob.trade.price);
    sa = oa.next;
    sb = ob.next;
  }
  CHECK(a.encode(sa) != b.encode(sb));
}

TEST_CASE("encode") {
  MacroEnv env(flat_then({5050, 5000, 5000}), MacroConfig{});
  auto s = env.reset();
  auto x = env.encode(s);
  CHECK(x[5 + 29] == 0.0);  // last close relative to itself
  CHECK(x[35] == 0.0);
  env.step(MacroAction::Buy);  // at 5050
  auto out = env.step(MacroAction::Hold);
  x = env.encode(out.next);
  CHECK(x[35] == 1.0);
  CHECK(x[36] == doctest::Approx(100.0 * (5050.0 / 5000.0 - 1.0)));
  CHECK(x[5 + 28] == doctest::Approx(100.0 * (5050.0 / 5000.0 - 1.0)));
}

TEST_CASE("training adapter and blotter") {
  MacroTrainingEnv env(MacroEnv(flat_then({5010, 5020, 5030}), MacroConfig{}));
  Rng rng(1);
  auto s = env.reset(rng);
  CHECK(s.size() == env.state_dim());
  CHECK(env.step(0).reward == 0.0);
  CHECK(env.step(1).reward == 1.0);
  CHECK_THROWS_AS(env.step(5), DimensionMismatch);

  std::ostringstream out;
  MacroTrade t{31, 60000, MacroAction::Sell, 5020.0, 1.0, 10.0, 1.0};
  write_blotter_csv(out, std::vector<MacroTrade>{t});
  CHECK(out.str() == "t,action,price,qty,raw_reward,clipped_reward\n60000,sell,5020,1,10,1\n");
}
