#pragma once

#include <cstddef>
#include <deque>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "mmrl/agent.hpp"
#include "mmrl/ingest.hpp"
#include "mmrl/matchsim.hpp"
#include "mmrl/orderbook.hpp"

namespace mmrl {

struct MicroConfig {
  int max_offset = 50;               // actions are integers in [-max_offset, max_offset]
  std::int64_t action_step_ticks = 10;  // $0.10 per action unit
  Timestamp horizon_ms = 60 * kSecondMs;
  Timestamp slot_ms = 10 * kSecondMs;
  Timestamp frame_ms = kSecondMs;    // one market frame per second of replay
  std::size_t depth = 20;
  std::size_t window = 30;

  std::size_t action_count() const { return static_cast<std::size_t>(2 * max_offset + 1); }
  int offset_of(std::size_t index) const { return static_cast<int>(index) - max_offset; }
  std::size_t index_of(int offset) const { return static_cast<std::size_t>(offset + max_offset); }
  std::size_t max_placements() const {
    return static_cast<std::size_t>((horizon_ms + slot_ms - 1) / slot_ms);
  }
  void validate() const;
};

struct MarketFrame {
  LevelView levels;
  std::optional<LastTrade> last_trade;
};

struct MicroState {
  double quantity_remaining = 0.0;
  double initial_quantity = 0.0;
  double time_remaining = 0.0;  // seconds
  std::deque<MarketFrame> window;
  Timestamp t0 = 0;
  Timestamp now = 0;
  Side side = Side::Buy;
  Price reference_price;  // market price before the first placement
};

struct MicroEpisode {
  Timestamp t0 = 0;
  Side side = Side::Buy;
  double quantity = 0.0;
  std::vector<int> actions;
  std::vector<Fill> fills;
  double forced_market_qty = 0.0;
  double reward = 0.0;
  std::size_t limit_orders = 0;
  std::size_t market_orders = 0;
  Price reference_price;
  bool finished = false;
};

struct MicroStepResult {
  const MicroState* state = nullptr;
  double reward = 0.0;
  bool done = false;
};

// Market price on the opposing side shifted by `a` action steps.
Price action_price(const OrderBook& book, Side side, int a, std::int64_t step_ticks = 10);

// Buy: p_m - VWAP. Sell: VWAP - p_m. Positive means better than the market
// price seen before the first order. Throws EmptyFills.
double episode_reward(Side side, Price reference_price, std::span<const Fill> fills);

// One-minute execution episode on a replayed historical book. Every slot the
// previous order is cancelled and a fresh limit order for the remainder is
// placed; at the horizon any remainder is sent as a market order.
class MicroEnv {
 public:
  MicroEnv(std::shared_ptr<const BookTimeline> timeline, MicroConfig cfg = {});

  const MicroState& reset(Side side, double quantity, Timestamp t0);
  MicroStepResult step(int a);

  Price action_price(int a) const;
  const OrderBook& book() const { return cursor_.book(); }
  const MicroState& state() const { return state_; }
  const MicroEpisode& episode() const { return episode_; }
  const MicroConfig& config() const { return cfg_; }
  bool done() const { return episode_.finished; }

  // [window x (depth bids, depth asks) x (offset, log1p qty), last trade
  // (offset, log1p qty, side)], then remaining fraction, time fraction, side.
  std::vector<double> encode(const MicroState& s) const;
  static std::size_t state_dim(const MicroConfig& cfg);

  const BookTimeline& timeline() const { return cursor_.timeline(); }

 private:
  MarketFrame frame() const;
  void push_frame();
  void finish();

  MicroConfig cfg_;
  BookCursor cursor_;
  MicroState state_;
  MicroEpisode episode_;
};

// Trainer adapter: each reset draws a random minute in the timeline and a
// random side.
class MicroTrainingEnv : public Environment {
 public:
  MicroTrainingEnv(std::shared_ptr<const BookTimeline> timeline, MicroConfig cfg,
                   double quantity = 1.0);
  std::size_t state_dim() const override { return MicroEnv::state_dim(env_.config()); }
  std::size_t action_count() const override { return env_.config().action_count(); }
  std::vector<double> reset(Rng& rng) override;
  StepResult step(std::size_t action) override;

  const MicroEnv& env() const { return env_; }

 private:
  MicroEnv env_;
  double quantity_;
  Timestamp first_minute_;
  Timestamp last_minute_;
};

void write_episode_json(std::ostream& out, const MicroEpisode& episode);

}  // namespace mmrl
