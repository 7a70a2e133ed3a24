#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "mmrl/agent.hpp"
#include "mmrl/indicators.hpp"
#include "mmrl/types.hpp"

namespace mmrl {

enum class MacroAction : std::size_t { Buy = 0, Sell = 1, Hold = 2 };

inline constexpr std::size_t kMacroActionCount = 3;

std::string_view to_string(MacroAction a);

struct MacroConfig {
  IndicatorConfig indicators;
  double buy_quantity = 1.0;
};

struct MacroState {
  FeatureVector features;
  std::vector<double> assets;  // purchase price of every unit still held
  std::size_t t = 0;           // last completed bar
};

struct MacroTrade {
  std::size_t bar = 0;  // execution bar index
  Timestamp ts = 0;
  MacroAction action = MacroAction::Hold;
  double price = 0.0;
  double quantity = 0.0;
  double raw_reward = 0.0;
  double clipped_reward = 0.0;
};

struct MacroOutcome {
  MacroState next;
  double reward = 0.0;  // clipped
  bool done = false;
  MacroTrade trade;
};

// Sign of x: -1, 0 or +1.
double clip_reward(double x);

// Minute-bar trading environment. The state at index t is built from bars
// 0..t; the chosen action executes at the open of bar t + 1. Decisions are
// restricted to execution bars in [exec_begin, exec_end), so a test run can
// draw indicator history from bars before its first execution bar.
class MacroEnv {
 public:
  MacroEnv(std::shared_ptr<const std::vector<TickBar>> bars, MacroConfig cfg,
           std::size_t exec_begin = 0,
           std::size_t exec_end = std::numeric_limits<std::size_t>::max());

  MacroState reset();
  MacroOutcome step(MacroAction action);

  bool done() const { return done_; }
  const MacroState& state() const { return state_; }
  const MacroConfig& config() const { return cfg_; }
  const std::vector<TickBar>& bars() const { return *bars_; }

  // Fixed-width network input: 5 indicators, h closes relative to the last
  // close (in percent), held-unit count, mean purchase price vs last close.
  std::vector<double> encode(const MacroState& s) const;
  static std::size_t state_dim(const MacroConfig& cfg);

 private:
  std::shared_ptr<const std::vector<TickBar>> bars_;
  MacroConfig cfg_;
  std::size_t exec_begin_;
  std::size_t exec_end_;
  std::vector<FeatureVector> features_;  // indexed by t - warmup
  MacroState state_;
  bool done_ = true;
};

// Adapter exposing MacroEnv to the generic trainer; every reset replays the
// whole execution range.
class MacroTrainingEnv : public Environment {
 public:
  explicit MacroTrainingEnv(MacroEnv env) : env_(std::move(env)) {}
  std::size_t state_dim() const override { return MacroEnv::state_dim(env_.config()); }
  std::size_t action_count() const override { return kMacroActionCount; }
  std::vector<double> reset(Rng& rng) override;
  StepResult step(std::size_t action) override;

 private:
  MacroEnv env_;
};

void write_blotter_csv(std::ostream& out, std::span<const MacroTrade> trades);

}  // namespace mmrl
