#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mmrl/agent.hpp"
#include "mmrl/bench.hpp"
#include "mmrl/config.hpp"
#include "mmrl/errors.hpp"
#include "mmrl/ingest.hpp"
#include "mmrl/io.hpp"
#include "mmrl/macro_env.hpp"
#include "mmrl/micro_env.hpp"
#include "mmrl/neural.hpp"
#include "mmrl/synth.hpp"

namespace mmrl {

namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string config_path;
  std::optional<std::int64_t> seed;
  std::string out = "out";
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config_path, "key = value settings file");
  sub->add_option("--seed", c.seed, "seed for every random draw");
  sub->add_option("--out", c.out, "output directory");
}

// Config file first, then flags on top.
Config load_config(const Common& c, const std::map<std::string, std::string>& flags) {
  Config cfg;
  if (!c.config_path.empty()) cfg = Config::load(c.config_path);
  if (c.seed) cfg.set("seed", std::to_string(*c.seed));
  for (const auto& [k, v] : flags) cfg.set(k, v);
  return cfg;
}

std::string path_in(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void finish_run(const std::string& dir, const Config& cfg) {
  write_text_file(path_in(dir, "config.resolved"), cfg.resolved());
}

// ---- settings ----

IndicatorConfig indicator_config(Config& cfg) {
  IndicatorConfig ic;
  ic.window_n = cfg.get_size("indicators.window_n", ic.window_n);
  ic.ema_n = cfg.get_size("indicators.ema_n", ic.ema_n);
  ic.volatility_m = cfg.get_size("indicators.volatility_m", ic.volatility_m);
  ic.history_h = cfg.get_size("indicators.history_h", ic.history_h);
  ic.validate();
  return ic;
}

MacroConfig macro_config(Config& cfg) {
  MacroConfig mc;
  mc.indicators = indicator_config(cfg);
  mc.buy_quantity = cfg.get_double("macro.buy_quantity", mc.buy_quantity);
  return mc;
}

MicroConfig micro_config(Config& cfg) {
  MicroConfig mc;
  mc.max_offset = static_cast<int>(cfg.get_int("micro.max_offset", mc.max_offset));
  mc.action_step_ticks = cfg.get_int("micro.action_step_ticks", mc.action_step_ticks);
  mc.depth = cfg.get_size("micro.depth", mc.depth);
  mc.window = cfg.get_size("micro.window", mc.window);
  mc.validate();
  return mc;
}

TrainConfig train_config(Config& cfg, const std::string& prefix) {
  TrainConfig tc;
  tc.gamma = cfg.get_double(prefix + "gamma", tc.gamma);
  tc.batch_size = cfg.get_size(prefix + "batch_size", tc.batch_size);
  tc.epochs = cfg.get_size(prefix + "epochs", tc.epochs);
  tc.memory_capacity = cfg.get_size(prefix + "memory_capacity", tc.memory_capacity);
  tc.eps_start = cfg.get_double(prefix + "eps_start", tc.eps_start);
  tc.eps_end = cfg.get_double(prefix + "eps_end", tc.eps_end);
  tc.eps_decay = cfg.get_double(prefix + "eps_decay", tc.eps_decay);
  tc.lr = cfg.get_double(prefix + "lr", tc.lr);
  tc.validate();
  return tc;
}

NetSpec net_spec(Config& cfg, const std::string& prefix, std::size_t input, std::size_t output,
                 std::size_t h1, std::size_t h2, bool dueling, std::uint64_t seed) {
  NetSpec s;
  s.input_dim = input;
  s.output_dim = output;
  s.hidden_dims = {cfg.get_size(prefix + "hidden1", h1), cfg.get_size(prefix + "hidden2", h2)};
  s.dueling = cfg.get_bool(prefix + "dueling", dueling);
  s.seed = seed;
  s.validate();
  return s;
}

SynthConfig synth_config(Config& cfg) {
  SynthConfig sc;
  sc.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 1));
  sc.duration_minutes = cfg.get_size("synth.minutes", sc.duration_minutes);
  sc.base_price = cfg.get_double("synth.base_price", sc.base_price);
  sc.trend_per_minute = cfg.get_double("synth.trend", sc.trend_per_minute);
  sc.noise_sigma = cfg.get_double("synth.noise", sc.noise_sigma);
  sc.book_depth = cfg.get_size("synth.book_depth", sc.book_depth);
  sc.trade_rate = cfg.get_double("synth.trade_rate", sc.trade_rate);
  sc.level_spacing = cfg.get_double("synth.level_spacing", sc.level_spacing);
  sc.mean_level_qty = cfg.get_double("synth.mean_level_qty", sc.mean_level_qty);
  sc.mean_trade_qty = cfg.get_double("synth.mean_trade_qty", sc.mean_trade_qty);
  sc.start_ts = cfg.get_int("synth.start_ts", sc.start_ts);
  sc.validate();
  return sc;
}

// ---- data access ----

std::vector<TickBar> load_ticks(const std::string& path) {
  std::istringstream in(read_text_file(path));
  return read_tick_csv(in);
}

std::vector<TickBar> timeline_bars(const BookTimeline& tl) {
  return build_minute_ticks(tl.trades(), minute_floor(tl.start()),
                            minute_floor(tl.end() - 1) + kMinuteMs);
}

std::size_t first_at_or_after(const std::vector<TickBar>& bars, std::optional<Timestamp> split) {
  if (!split) return 0;
  auto it = std::lower_bound(bars.begin(), bars.end(), *split,
                             [](const TickBar& b, Timestamp t) { return b.open_time < t; });
  return static_cast<std::size_t>(it - bars.begin());
}

QNetwork load_net(const std::string& path) { return QNetwork::load(read_text_file(path)); }

std::string training_log_text(const std::vector<EpochLog>& log) {
  std::ostringstream out;
  write_training_log(out, log);
  return out.str();
}

ojson stats_json(const PnlCurve& curve) {
  ojson j;
  j["strategy"] = curve.strategy;
  j["final_pnl"] = curve.stats.final_pnl;
  j["max_drawdown"] = curve.stats.max_drawdown;
  j["step_std"] = curve.stats.step_std;
  j["points"] = curve.points.size();
  j["open_units"] = curve.open_units;
  j["unrealized_pnl"] = curve.unrealized_pnl;
  return j;
}

void write_curve_outputs(const std::string& dir, const PnlCurve& curve, const ojson& stats) {
  std::ostringstream csv;
  write_pnl_csv(csv, curve);
  write_text_file(path_in(dir, "pnl.csv"), csv.str());
  write_text_file(path_in(dir, "stats.json"), stats.dump(2) + "\n");
  write_text_file(path_in(dir, "chart.svg"),
                  render_svg(std::vector<PnlCurve>{curve}, curve.strategy + " cumulative PNL"));
}

// ---- subcommands ----

int cmd_ingest(const Common& c, const std::string& events_path, const std::string& snap_path,
               std::ostream& out) {
  Config cfg = load_config(c, {});
  std::istringstream ev_in(read_text_file(events_path));
  ParseResult parsed = parse_event_stream(ev_in, false);
  std::istringstream snap_in(read_text_file(snap_path));
  BookSnapshot snap = parse_snapshot(snap_in);
  // Events before the snapshot are already reflected in it.
  std::vector<MarketEvent> events;
  std::size_t stale = 0;
  for (auto& e : parsed.events) {
    if (e.ts < snap.ts) {
      ++stale;
    } else {
      events.push_back(e);
    }
  }
  BookTimeline tl(snap, std::move(events));
  auto bars = timeline_bars(tl);

  ensure_directory(c.out);
  save_timeline_dir(c.out, tl);
  std::ostringstream ticks;
  write_tick_csv(ticks, bars);
  write_text_file(path_in(c.out, "ticks.csv"), ticks.str());
  ojson report;
  report["records"] = parsed.records;
  report["accepted"] = tl.events().size();
  report["rejected"] = parsed.rejected.size();
  report["before_snapshot"] = stale;
  report["bars"] = bars.size();
  auto rejects = ojson::array();
  for (const auto& r : parsed.rejected) rejects.push_back({{"line", r.line_no}, {"reason", r.reason}});
  report["rejects"] = rejects;
  write_text_file(path_in(c.out, "ingest.json"), report.dump(2) + "\n");
  finish_run(c.out, cfg);
  out << "ingested " << tl.events().size() << " events (" << parsed.rejected.size()
      << " rejected), " << bars.size() << " minute bars -> " << c.out << '\n';
  return 0;
}

int cmd_synth(const Common& c, const std::map<std::string, std::string>& flags, std::ostream& out) {
  Config cfg = load_config(c, flags);
  SynthConfig sc = synth_config(cfg);
  SynthMarket m = generate(sc);
  ensure_directory(c.out);
  save_timeline_dir(c.out, m.timeline());
  std::ostringstream ticks;
  write_tick_csv(ticks, m.bars());
  write_text_file(path_in(c.out, "ticks.csv"), ticks.str());
  finish_run(c.out, cfg);
  out << "synthesized " << m.events.size() << " events over " << sc.duration_minutes
      << " minutes -> " << c.out << '\n';
  return 0;
}

int cmd_train_macro(const Common& c, const std::string& ticks_path, std::optional<Timestamp> split,
                    std::ostream& out) {
  Config cfg = load_config(c, {});
  const auto seed = static_cast<std::uint64_t>(cfg.get_int("seed", 1));
  MacroConfig mc = macro_config(cfg);
  TrainConfig tc = train_config(cfg, "macro.");
  auto bars = load_ticks(ticks_path);
  if (split) bars = split_train_test(bars, *split).first;
  auto shared = std::make_shared<const std::vector<TickBar>>(std::move(bars));
  MacroTrainingEnv env(MacroEnv(shared, mc));
  QNetwork net(net_spec(cfg, "macro.", env.state_dim(), env.action_count(), 128, 64, false, seed));
  Rng rng(seed);
  auto log = train(env, net, tc, rng);

  ensure_directory(c.out);
  write_text_file(path_in(c.out, "macro.json"), net.save());
  write_text_file(path_in(c.out, "training_log.jsonl"), training_log_text(log));
  finish_run(c.out, cfg);
  out << "trained macro agent for " << log.size() << " epochs on " << shared->size()
      << " bars -> " << path_in(c.out, "macro.json") << '\n';
  return 0;
}

int cmd_train_micro(const Common& c, const std::string& timeline_dir,
                    std::optional<Timestamp> split, std::ostream& out) {
  Config cfg = load_config(c, {});
  const auto seed = static_cast<std::uint64_t>(cfg.get_int("seed", 1));
  MicroConfig mc = micro_config(cfg);
  TrainConfig tc = train_config(cfg, "micro.");
  const double qty = cfg.get_double("micro.quantity", 1.0);
  BookTimeline tl = load_timeline_dir(timeline_dir);
  if (split) tl = split_train_test(tl, *split).first;
  MicroTrainingEnv env(std::make_shared<const BookTimeline>(std::move(tl)), mc, qty);
  QNetwork net(net_spec(cfg, "micro.", env.state_dim(), env.action_count(), 256, 128, true, seed));
  Rng rng(seed);
  auto log = train(env, net, tc, rng);

  ensure_directory(c.out);
  write_text_file(path_in(c.out, "micro.json"), net.save());
  write_text_file(path_in(c.out, "training_log.jsonl"), training_log_text(log));
  finish_run(c.out, cfg);
  out << "trained micro agent for " << log.size() << " epochs -> " << path_in(c.out, "micro.json")
      << '\n';
  return 0;
}

struct BacktestArgs {
  std::string strategy;
  std::string ticks;
  std::string timeline;
  std::string macro;
  std::string micro;
  std::optional<Timestamp> split;
};

void check_input(const QNetwork& net, std::size_t dim, std::size_t actions, const char* what) {
  if (net.spec().input_dim != dim || net.spec().output_dim != actions) {
    throw DimensionMismatch(std::string(what) + " checkpoint expects " +
                            std::to_string(net.spec().input_dim) + " inputs and " +
                            std::to_string(net.spec().output_dim) + " actions, run needs " +
                            std::to_string(dim) + " and " + std::to_string(actions));
  }
}

int cmd_backtest(const Common& c, const BacktestArgs& a, std::ostream& out) {
  const bool needs_timeline = a.strategy == "pipeline";
  if (needs_timeline && a.timeline.empty()) throw UsageError("pipeline needs --timeline");
  if (!needs_timeline && a.ticks.empty() && a.timeline.empty()) {
    throw UsageError(a.strategy + " needs --ticks or --timeline");
  }
  if ((a.strategy == "macro" || a.strategy == "pipeline") && a.macro.empty()) {
    throw UsageError(a.strategy + " needs --macro");
  }
  if (a.strategy == "pipeline" && a.micro.empty()) throw UsageError("pipeline needs --micro");

  Config cfg = load_config(c, {});
  std::shared_ptr<const BookTimeline> tl;
  std::vector<TickBar> bars;
  if (!a.ticks.empty()) {
    bars = load_ticks(a.ticks);
  }
  if (!a.timeline.empty()) {
    tl = std::make_shared<const BookTimeline>(load_timeline_dir(a.timeline));
    if (a.ticks.empty()) bars = timeline_bars(*tl);
  }
  const std::size_t begin = first_at_or_after(bars, a.split);
  if (begin >= bars.size()) throw SeriesTooShort("no bars at or after the split");
  std::span<const TickBar> test(bars.begin() + static_cast<std::ptrdiff_t>(begin), bars.end());
  auto shared = std::make_shared<const std::vector<TickBar>>(bars);

  PnlCurve curve;
  ojson stats;
  ensure_directory(c.out);
  if (a.strategy == "buyhold") {
    curve = buy_and_hold(test, cfg.get_double("buyhold.quantity", 1.0));
    stats = stats_json(curve);
  } else if (a.strategy == "momentum") {
    const std::size_t n = cfg.get_size("momentum.n", 20);
    const std::size_t from = begin >= n ? begin - n : 0;
    curve = momentum(std::span<const TickBar>(bars).subspan(from), n);
    curve.points.erase(curve.points.begin(),
                       curve.points.begin() + static_cast<std::ptrdiff_t>(begin - from));
    curve.compute_stats();
    stats = stats_json(curve);
  } else if (a.strategy == "macro") {
    MacroConfig mc = macro_config(cfg);
    QNetwork net = load_net(a.macro);
    check_input(net, MacroEnv::state_dim(mc), kMacroActionCount, "macro");
    std::vector<MacroTrade> blotter;
    curve = run_macro_standalone(net, MacroEnv(shared, mc, begin), &blotter);
    stats = stats_json(curve);
    std::ostringstream csv;
    write_blotter_csv(csv, blotter);
    write_text_file(path_in(c.out, "blotter.csv"), csv.str());
  } else {
    MacroConfig mc = macro_config(cfg);
    MicroConfig uc = micro_config(cfg);
    QNetwork macro = load_net(a.macro);
    QNetwork micro = load_net(a.micro);
    check_input(macro, MacroEnv::state_dim(mc), kMacroActionCount, "macro");
    check_input(micro, MicroEnv::state_dim(uc), uc.action_count(), "micro");
    // Every execution minute needs a full horizon of book data after it.
    std::size_t end = bars.size();
    while (end > 0 && bars[end - 1].open_time + uc.horizon_ms > tl->end()) --end;
    auto result = run_pipeline(greedy_policy(macro), greedy_micro_policy(micro, uc),
                               MacroEnv(shared, mc, begin, end), tl, uc);
    curve = std::move(result.curve);
    stats = stats_json(curve);
    stats["total_orders"] = result.stats.total_orders;
    stats["limit_orders"] = result.stats.limit_orders;
    stats["forced_market_orders"] = result.stats.forced_market_orders;
    stats["limit_fraction"] = result.stats.limit_fraction;
    stats["episodes"] = result.stats.episodes;
    std::ostringstream eps;
    for (const auto& ep : result.episodes) write_episode_json(eps, ep);
    write_text_file(path_in(c.out, "episodes.jsonl"), eps.str());
  }
  write_curve_outputs(c.out, curve, stats);
  finish_run(c.out, cfg);
  out << a.strategy << ": final PNL " << format_double(curve.stats.final_pnl) << " over "
      << curve.points.size() << " steps -> " << c.out << '\n';
  return 0;
}

PnlCurve read_curve(const std::string& path, const std::string& name) {
  std::istringstream in(read_text_file(path));
  PnlCurve curve;
  curve.strategy = name;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 || line.empty()) continue;
    auto comma = line.find(',');
    if (comma == std::string::npos) throw MalformedRecord(line_no, "expected ts,cum_pnl");
    try {
      curve.points.push_back({std::stoll(line.substr(0, comma)), std::stod(line.substr(comma + 1))});
    } catch (const std::exception&) {
      throw MalformedRecord(line_no, "bad number in " + path);
    }
  }
  curve.compute_stats();
  return curve;
}

int cmd_report(const Common& c, const std::string& runs, std::ostream& out) {
  Config cfg = load_config(c, {});
  if (!fs::is_directory(runs)) throw IoError("not a directory: " + runs);
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(runs)) {
    if (entry.is_directory() && fs::exists(entry.path() / "stats.json") &&
        fs::exists(entry.path() / "pnl.csv")) {
      dirs.push_back(entry.path());
    }
  }
  std::sort(dirs.begin(), dirs.end());
  if (dirs.empty()) throw IoError("no runs with stats.json under " + runs);

  std::vector<PnlCurve> curves;
  std::ostringstream md;
  md << "| run | strategy | final PNL | max drawdown | step std | limit fraction |\n"
     << "|---|---|---|---|---|---|\n";
  for (const auto& d : dirs) {
    ojson stats;
    try {
      stats = ojson::parse(read_text_file((d / "stats.json").string()));
    } catch (const ojson::exception& e) {
      throw MalformedRecord(0, (d / "stats.json").string() + ": " + e.what());
    }
    const std::string run = d.filename().string();
    curves.push_back(read_curve((d / "pnl.csv").string(), run));
    auto num = [&](const char* key) {
      if (!stats.contains(key)) return std::string("-");
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.4f", stats[key].get<double>());
      return std::string(buf);
    };
    md << "| " << run << " | " << stats.value("strategy", std::string("?")) << " | "
       << num("final_pnl") << " | " << num("max_drawdown") << " | " << num("step_std") << " | "
       << num("limit_fraction") << " |\n";
  }
  const std::string dir = c.out == "out" ? runs : c.out;
  ensure_directory(dir);
  write_text_file(path_in(dir, "report.md"), md.str());
  write_text_file(path_in(dir, "report.svg"), render_svg(curves, "Cumulative PNL by run"));
  finish_run(dir, cfg);
  out << md.str();
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Market-making RL workbench"};
  app.require_subcommand(1);

  Common common;
  std::string events_path, snap_path, ticks_path, timeline_dir, runs_dir;
  std::optional<Timestamp> split;
  std::optional<std::size_t> minutes;
  std::optional<double> trend, noise;
  BacktestArgs bt;

  auto* ingest = app.add_subcommand("ingest", "validate an event feed and build minute bars");
  add_common(ingest, common);
  ingest->add_option("--events", events_path, "JSON-lines event feed")->required();
  ingest->add_option("--snapshot", snap_path, "initial book snapshot")->required();

  auto* synth = app.add_subcommand("synth", "generate a synthetic market");
  add_common(synth, common);
  synth->add_option("--minutes", minutes, "duration in minutes");
  synth->add_option("--trend", trend, "fair-value drift per minute");
  synth->add_option("--noise", noise, "per-second fair-value stddev");

  auto* train_macro = app.add_subcommand("train-macro", "train the minute-level trading agent");
  add_common(train_macro, common);
  train_macro->add_option("--ticks", ticks_path, "minute bar CSV")->required();
  train_macro->add_option("--split", split, "train on bars before this timestamp (ms)");

  auto* train_micro = app.add_subcommand("train-micro", "train the order-placement agent");
  add_common(train_micro, common);
  train_micro->add_option("--timeline", timeline_dir, "directory with snapshot.json and events.jsonl")
      ->required();
  train_micro->add_option("--split", split, "train on the timeline before this timestamp (ms)");

  auto* backtest = app.add_subcommand("backtest", "evaluate a strategy on the test range");
  add_common(backtest, common);
  backtest->add_option("--strategy", bt.strategy, "buyhold | momentum | macro | pipeline")
      ->required()
      ->check(CLI::IsMember({"buyhold", "momentum", "macro", "pipeline"}));
  backtest->add_option("--ticks", bt.ticks, "minute bar CSV");
  backtest->add_option("--timeline", bt.timeline, "timeline directory");
  backtest->add_option("--macro", bt.macro, "macro checkpoint");
  backtest->add_option("--micro", bt.micro, "micro checkpoint");
  backtest->add_option("--split", bt.split, "first test timestamp (ms)");

  auto* report = app.add_subcommand("report", "compare backtest runs");
  add_common(report, common);
  report->add_option("--runs", runs_dir, "directory of backtest run directories")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (ingest->parsed()) return cmd_ingest(common, events_path, snap_path, out);
    if (synth->parsed()) {
      std::map<std::string, std::string> flags;
      if (minutes) flags["synth.minutes"] = std::to_string(*minutes);
      if (trend) flags["synth.trend"] = format_double(*trend);
      if (noise) flags["synth.noise"] = format_double(*noise);
      return cmd_synth(common, flags, out);
    }
    if (train_macro->parsed()) return cmd_train_macro(common, ticks_path, split, out);
    if (train_micro->parsed()) return cmd_train_micro(common, timeline_dir, split, out);
    if (backtest->parsed()) return cmd_backtest(common, bt, out);
    if (report->parsed()) return cmd_report(common, runs_dir, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace mmrl
