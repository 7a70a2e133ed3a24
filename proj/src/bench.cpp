#include "mmrl/bench.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "mmrl/errors.hpp"
#include "mmrl/io.hpp"

namespace mmrl {

void PnlCurve::compute_stats() {
  stats = {};
  if (points.empty()) return;
  stats.final_pnl = points.back().cum_pnl;
  double peak = 0.0;
  double prev = 0.0;
  double sum = 0.0, sum_sq = 0.0;
  for (const auto& p : points) {
    peak = std::max(peak, p.cum_pnl);
    stats.max_drawdown = std::max(stats.max_drawdown, peak - p.cum_pnl);
    const double inc = p.cum_pnl - prev;
    sum += inc;
    sum_sq += inc * inc;
    prev = p.cum_pnl;
  }
  const double n = static_cast<double>(points.size());
  const double mean = sum / n;
  stats.step_std = std::sqrt(std::max(0.0, sum_sq / n - mean * mean));
}

void PipelineStats::add(const MicroEpisode& ep) {
  ++episodes;
  limit_orders += ep.limit_orders;
  forced_market_orders += ep.market_orders;
  total_orders = limit_orders + forced_market_orders;
  limit_fraction =
      total_orders ? static_cast<double>(limit_orders) / static_cast<double>(total_orders) : 0.0;
}

PnlCurve buy_and_hold(std::span<const TickBar> bars, double quantity) {
  if (bars.empty()) throw EmptySeries("buy-and-hold needs at least one bar");
  PnlCurve curve;
  curve.strategy = "buyhold";
  const double p0 = bars.front().open;
  for (const auto& b : bars) curve.points.push_back({b.open_time, quantity * (b.open - p0)});
  curve.compute_stats();
  return curve;
}

PnlCurve momentum(std::span<const TickBar> bars, std::size_t n) {
  if (n == 0 || bars.size() <= n) {
    throw SeriesTooShort("momentum needs more than " + std::to_string(n) + " bars");
  }
  PnlCurve curve;
  curve.strategy = "momentum";
  double realized = 0.0;
  std::vector<double> held;
  for (std::size_t t = 0; t < bars.size(); ++t) {
    const double open = bars[t].open;
    if (t >= n) {
      double sma = 0.0;
      for (std::size_t k = t - n; k < t; ++k) sma += bars[k].close;
      sma /= static_cast<double>(n);
      if (open < sma) {
        held.push_back(open);
      } else if (open > sma) {
        for (double cost : held) realized += open - cost;
        held.clear();
      }
    }
    curve.points.push_back({bars[t].open_time, realized});
  }
  curve.open_units = static_cast<double>(held.size());
  for (double cost : held) curve.unrealized_pnl += bars.back().close - cost;
  curve.compute_stats();
  return curve;
}

MacroPolicy greedy_policy(const QNetwork& net) {
  return [&net](std::span<const double> state) {
    return static_cast<MacroAction>(argmax(net.forward(state)));
  };
}

PnlCurve run_macro_standalone(const MacroPolicy& policy, MacroEnv env,
                              std::vector<MacroTrade>* blotter) {
  PnlCurve curve;
  curve.strategy = "macro";
  double realized = 0.0;
  std::size_t held = 0;
  double cost = 0.0;
  MacroState state = env.reset();
  while (!env.done()) {
    const MacroAction action = policy(env.encode(state));
    MacroOutcome out = env.step(action);
    const MacroTrade& tr = out.trade;
    if (action == MacroAction::Buy) {
      ++held;
      cost += tr.price * tr.quantity;
    } else if (action == MacroAction::Sell && tr.quantity > 0.0) {
      realized += tr.price * tr.quantity - cost;
      held = 0;
      cost = 0.0;
    }
    if (blotter) blotter->push_back(tr);
    curve.points.push_back({tr.ts, realized});
    state = std::move(out.next);
  }
  const double qty = env.config().buy_quantity;
  curve.open_units = static_cast<double>(held) * qty;
  if (held) curve.unrealized_pnl = env.bars()[state.t].close * curve.open_units - cost;
  curve.compute_stats();
  return curve;
}

PnlCurve run_macro_standalone(const QNetwork& net, MacroEnv env, std::vector<MacroTrade>* blotter) {
  return run_macro_standalone(greedy_policy(net), std::move(env), blotter);
}

MicroPolicy greedy_micro_policy(const QNetwork& net, const MicroConfig& cfg) {
  return [&net, cfg](std::span<const double> state) {
    return cfg.offset_of(argmax(net.forward(state)));
  };
}

MicroEpisode run_micro_episode(MicroEnv& env, const MicroPolicy& policy, Side side,
                               double quantity, Timestamp t0) {
  const MicroState* state = &env.reset(side, quantity, t0);
  while (!env.done()) {
    state = env.step(policy(env.encode(*state))).state;
  }
  return env.episode();
}

PipelineResult run_pipeline(const MacroPolicy& macro, const MicroPolicy& micro, MacroEnv env,
                            std::shared_ptr<const BookTimeline> timeline, MicroConfig micro_cfg) {
  PipelineResult result;
  result.curve.strategy = "pipeline";
  MicroEnv executor(std::move(timeline), micro_cfg);

  double realized = 0.0;
  double units = 0.0;
  double cost_basis = 0.0;  // sum of fill notional for units held
  const double lot = env.config().buy_quantity;
  MacroState state = env.reset();
  while (!env.done()) {
    const MacroAction action = macro(env.encode(state));
    MacroOutcome out = env.step(action);
    const Timestamp t0 = out.trade.ts;
    if (action == MacroAction::Buy) {
      MicroEpisode ep = run_micro_episode(executor, micro, Side::Buy, lot, t0);
      cost_basis += vwap(ep.fills) * total_quantity(ep.fills);
      units += total_quantity(ep.fills);
      result.stats.add(ep);
      result.episodes.push_back(std::move(ep));
    } else if (action == MacroAction::Sell && units > 0.0) {
      MicroEpisode ep = run_micro_episode(executor, micro, Side::Sell, units, t0);
      realized += vwap(ep.fills) * total_quantity(ep.fills) - cost_basis;
      units = 0.0;
      cost_basis = 0.0;
      result.stats.add(ep);
      result.episodes.push_back(std::move(ep));
    }
    result.curve.points.push_back({t0, realized});
    state = std::move(out.next);
  }
  result.curve.open_units = units;
  if (units > 0.0) result.curve.unrealized_pnl = env.bars()[state.t].close * units - cost_basis;
  result.curve.compute_stats();
  return result;
}

void write_pnl_csv(std::ostream& out, const PnlCurve& curve) {
  out << "ts,cum_pnl\n";
  for (const auto& p : curve.points) out << p.ts << ',' << format_double(p.cum_pnl) << '\n';
}

std::string render_svg(std::span<const PnlCurve> curves, const std::string& title) {
  constexpr double kWidth = 900, kHeight = 420, kMargin = 50;
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

  Timestamp t_min = std::numeric_limits<Timestamp>::max();
  Timestamp t_max = std::numeric_limits<Timestamp>::min();
  double v_min = 0.0, v_max = 0.0;
  for (const auto& c : curves) {
    for (const auto& p : c.points) {
      t_min = std::min(t_min, p.ts);
      t_max = std::max(t_max, p.ts);
      v_min = std::min(v_min, p.cum_pnl);
      v_max = std::max(v_max, p.cum_pnl);
    }
  }
  if (t_min >= t_max) t_max = t_min + 1;
  if (v_max - v_min < 1e-9) v_max = v_min + 1.0;
  auto sx = [&](Timestamp t) {
    return kMargin + (kWidth - 2 * kMargin) * static_cast<double>(t - t_min) /
                         static_cast<double>(t_max - t_min);
  };
  auto sy = [&](double v) {
    return kHeight - kMargin - (kHeight - 2 * kMargin) * (v - v_min) / (v_max - v_min);
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kMargin << "\" y=\"25\" font-family=\"sans-serif\" font-size=\"16\">"
      << title << "</text>\n"
      << "<line x1=\"" << kMargin << "\" y1=\"" << sy(0.0) << "\" x2=\"" << kWidth - kMargin
      << "\" y2=\"" << sy(0.0) << "\" stroke=\"#999\" stroke-dasharray=\"4\"/>\n"
      << "<text x=\"5\" y=\"" << sy(v_max) + 4 << "\" font-size=\"11\">" << format_double(v_max)
      << "</text>\n<text x=\"5\" y=\"" << sy(v_min) + 4 << "\" font-size=\"11\">"
      << format_double(v_min) << "</text>\n";
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const char* color = kColors[i % std::size(kColors)];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& p : curves[i].points) svg << sx(p.ts) << ',' << sy(p.cum_pnl) << ' ';
    svg << "\"/>\n<text x=\"" << kWidth - kMargin - 120 << "\" y=\"" << 45 + 15 * i
        << "\" font-size=\"12\" fill=\"" << color << "\">" << curves[i].strategy << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace mmrl
