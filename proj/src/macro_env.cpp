#include "mmrl/macro_env.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>

#include "mmrl/errors.hpp"
#include "mmrl/io.hpp"

namespace mmrl {

std::string_view to_string(MacroAction a) {
  switch (a) {
    case MacroAction::Buy:
      return "buy";
    case MacroAction::Sell:
      return "sell";
    case MacroAction::Hold:
      return "hold";
  }
  return "?";
}

double clip_reward(double x) {
  if (x > 0.0) return 1.0;
  if (x < 0.0) return -1.0;
  return 0.0;
}

MacroEnv::MacroEnv(std::shared_ptr<const std::vector<TickBar>> bars, MacroConfig cfg,
                   std::size_t exec_begin, std::size_t exec_end)
    : bars_(std::move(bars)),
      cfg_(cfg),
      exec_begin_(exec_begin),
      exec_end_(std::min(exec_end, bars_->size())) {
  cfg_.indicators.validate();
  if (!(cfg_.buy_quantity > 0.0)) throw InvalidConfig("buy_quantity must be positive");
  features_ = featurize_all(*bars_, cfg_.indicators);
}

MacroState MacroEnv::reset() {
  const std::size_t warmup = cfg_.indicators.warmup();
  const std::size_t t = std::max(warmup, exec_begin_ == 0 ? 0 : exec_begin_ - 1);
  if (t + 1 >= exec_end_) {
    throw InsufficientHistory("need more than " + std::to_string(t + 1) + " bars, have " +
                              std::to_string(exec_end_));
  }
  state_ = MacroState{features_[t - warmup], {}, t};
  done_ = false;
  return state_;
}

MacroOutcome MacroEnv::step(MacroAction action) {
  if (done_) throw EpisodeDone("macro episode finished; call reset()");
  const std::size_t exec = state_.t + 1;
  const TickBar& bar = (*bars_)[exec];

  MacroOutcome out;
  MacroTrade& trade = out.trade;
  trade.bar = exec;
  trade.ts = bar.open_time;
  trade.action = action;
  trade.price = bar.open;

  std::vector<double> assets = state_.assets;
  switch (action) {
    case MacroAction::Hold:
      break;
    case MacroAction::Buy:
      assets.push_back(bar.open);
      trade.quantity = cfg_.buy_quantity;
      break;
    case MacroAction::Sell:
      if (assets.empty()) {
        trade.raw_reward = -1.0;
      } else {
        for (double p : assets) trade.raw_reward += cfg_.buy_quantity * (bar.open - p);
        trade.quantity = cfg_.buy_quantity * static_cast<double>(assets.size());
        assets.clear();
      }
      break;
  }
  trade.clipped_reward = clip_reward(trade.raw_reward);

  const std::size_t warmup = cfg_.indicators.warmup();
  state_ = MacroState{features_[exec - warmup], std::move(assets), exec};
  done_ = exec + 1 >= exec_end_;
  out.next = state_;
  out.reward = trade.clipped_reward;
  out.done = done_;
  return out;
}

std::size_t MacroEnv::state_dim(const MacroConfig& cfg) {
  return FeatureVector::kIndicatorCount + cfg.indicators.history_h + 2;
}

std::vector<double> MacroEnv::encode(const MacroState& s) const {
  std::vector<double> x;
  x.reserve(state_dim(cfg_));
  const auto& f = s.features;
  x.insert(x.end(), {f.price_level_z, f.price_change_z, f.volume_level_z, f.volume_change_z,
                     f.volatility});
  const double ref = f.raw_prices.back();
  for (double p : f.raw_prices) x.push_back(100.0 * (p / ref - 1.0));
  x.push_back(static_cast<double>(s.assets.size()));
  if (s.assets.empty()) {
    x.push_back(0.0);
  } else {
    double mean = std::accumulate(s.assets.begin(), s.assets.end(), 0.0) /
                  static_cast<double>(s.assets.size());
    x.push_back(100.0 * (mean / ref - 1.0));
  }
  return x;
}

std::vector<double> MacroTrainingEnv::reset(Rng&) { return env_.encode(env_.reset()); }

StepResult MacroTrainingEnv::step(std::size_t action) {
  if (action >= kMacroActionCount) throw DimensionMismatch("macro action out of range");
  auto out = env_.step(static_cast<MacroAction>(action));
  return {env_.encode(out.next), out.reward, out.done};
}

void write_blotter_csv(std::ostream& out, std::span<const MacroTrade> trades) {
  out << "t,action,price,qty,raw_reward,clipped_reward\n";
  for (const auto& t : trades) {
    out << t.ts << ',' << to_string(t.action) << ',' << format_double(t.price) << ','
        << format_double(t.quantity) << ',' << format_double(t.raw_reward) << ','
        << format_double(t.clipped_reward) << '\n';
  }
}

}  // namespace mmrl
