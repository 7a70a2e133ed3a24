#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mmrl/ingest.hpp"
#include "mmrl/macro_env.hpp"
#include "mmrl/micro_env.hpp"
#include "mmrl/neural.hpp"

namespace mmrl {

struct PnlPoint {
  Timestamp ts = 0;
  double cum_pnl = 0.0;

  friend bool operator==(const PnlPoint&, const PnlPoint&) = default;
};

struct PnlStats {
  double final_pnl = 0.0;
  double max_drawdown = 0.0;  // largest peak-to-trough drop, >= 0
  double step_std = 0.0;      // population stddev of per-step PNL increments
};

struct PnlCurve {
  std::string strategy;
  std::vector<PnlPoint> points;
  PnlStats stats;
  // Units still held at the end and their mark-to-market value at the last
  // price; informational, not part of the realized curve.
  double open_units = 0.0;
  double unrealized_pnl = 0.0;

  void compute_stats();
};

struct PipelineStats {
  std::size_t total_orders = 0;
  std::size_t limit_orders = 0;
  std::size_t forced_market_orders = 0;
  double limit_fraction = 0.0;
  std::size_t episodes = 0;

  void add(const MicroEpisode& episode);
};

// Mark-to-market of `quantity` units bought at the first open.
PnlCurve buy_and_hold(std::span<const TickBar> bars, double quantity);

// Buy one unit when the open is below the SMA of the previous n closes,
// liquidate everything when above; realized PNL at open prices.
PnlCurve momentum(std::span<const TickBar> bars, std::size_t n);

// Any policy mapping an encoded macro state to an action.
using MacroPolicy = std::function<MacroAction(std::span<const double>)>;

MacroPolicy greedy_policy(const QNetwork& net);

// Replays MacroEnv over the execution range with open-price executions and
// accumulates realized profit on sells.
PnlCurve run_macro_standalone(const MacroPolicy& policy, MacroEnv env,
                              std::vector<MacroTrade>* blotter = nullptr);
PnlCurve run_macro_standalone(const QNetwork& net, MacroEnv env,
                              std::vector<MacroTrade>* blotter = nullptr);

using MicroPolicy = std::function<int(std::span<const double>)>;

MicroPolicy greedy_micro_policy(const QNetwork& net, const MicroConfig& cfg);

// Runs one execution episode to completion with the given policy.
MicroEpisode run_micro_episode(MicroEnv& env, const MicroPolicy& policy, Side side,
                               double quantity, Timestamp t0);

struct PipelineResult {
  PnlCurve curve;
  PipelineStats stats;
  std::vector<MicroEpisode> episodes;
};

// Macro decides every minute; each Buy/Sell is executed by a micro episode
// starting at that minute. Realized PNL uses the episodes' fill VWAPs.
PipelineResult run_pipeline(const MacroPolicy& macro, const MicroPolicy& micro, MacroEnv env,
                            std::shared_ptr<const BookTimeline> timeline,
                            MicroConfig micro_cfg = {});

void write_pnl_csv(std::ostream& out, const PnlCurve& curve);

// Line chart of one or more curves as a standalone SVG document.
std::string render_svg(std::span<const PnlCurve> curves, const std::string& title);

}  // namespace mmrl
