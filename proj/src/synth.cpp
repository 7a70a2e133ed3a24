#include "mmrl/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "mmrl/errors.hpp"

namespace mmrl {

void SynthConfig::validate() const {
  if (!(base_price > 0.0)) throw InvalidConfig("base_price must be positive");
  if (book_depth < 20) throw InvalidConfig("book_depth must be >= 20");
  if (!(trade_rate > 0.0)) throw InvalidConfig("trade_rate must be positive");
  if (!(noise_sigma >= 0.0)) throw InvalidConfig("noise_sigma must be >= 0");
  if (duration_minutes == 0) throw InvalidConfig("duration_minutes must be >= 1");
  if (Price::from_double(level_spacing).ticks() <= 0) {
    throw InvalidConfig("level_spacing must be at least one tick");
  }
  if (!(mean_level_qty > 0.0) || !(mean_trade_qty > 0.0)) {
    throw InvalidConfig("mean quantities must be positive");
  }
  if (!is_minute_aligned(start_ts)) throw InvalidConfig("start_ts must be minute-aligned");
}

Timestamp SynthMarket::end() const {
  return snapshot.ts + static_cast<Timestamp>(fair_value.size()) * kSecondMs;
}

std::vector<TickBar> SynthMarket::bars() const {
  std::vector<MarketEvent> trades;
  for (const auto& e : events) {
    if (e.is_trade()) trades.push_back(e);
  }
  return build_minute_ticks(trades, snapshot.ts, end());
}

namespace {

class Generator {
 public:
  explicit Generator(const SynthConfig& cfg)
      : cfg_(cfg),
        rng_(cfg.seed),
        spacing_(Price::from_double(cfg.level_spacing).ticks()),
        level_qty_(1.0 / cfg.mean_level_qty),
        trade_qty_(1.0 / cfg.mean_trade_qty),
        arrivals_(cfg.trade_rate) {}

  SynthMarket run() {
    SynthMarket out;
    const std::size_t seconds = cfg_.duration_minutes * 60;
    double fair = cfg_.base_price;
    const double drift = cfg_.trend_per_minute / 60.0;
    const double floor = 2.0 * cfg_.level_spacing;

    out.snapshot.ts = cfg_.start_ts;
    for (const auto& [key, qty] : desired(fair, {})) {
      out.snapshot.book.set_level(key.first, Price::from_ticks(key.second), qty);
      book_[key] = qty;
    }
    out.fair_value.push_back(fair);
    double last_trade_fair = fair;
    Side aggressor = Side::Buy;

    for (std::size_t s = 1; s < seconds; ++s) {
      const Timestamp ts = cfg_.start_ts + static_cast<Timestamp>(s) * kSecondMs;
      fair += drift + (cfg_.noise_sigma > 0.0 ? cfg_.noise_sigma * normal_(rng_) : 0.0);
      fair = std::max(fair, floor);
      out.fair_value.push_back(fair);

      relist(fair, ts, out.events);
      refresh(ts, out.events);

      const int n_trades = arrivals_(rng_);
      if (n_trades == 0) continue;
      if (fair > last_trade_fair) {
        aggressor = Side::Buy;
      } else if (fair < last_trade_fair) {
        aggressor = Side::Sell;
      }
      last_trade_fair = fair;
      std::uniform_int_distribution<Timestamp> offset(1, kSecondMs - 1);
      std::vector<Timestamp> times(static_cast<std::size_t>(n_trades));
      for (auto& t : times) t = ts + offset(rng_);
      std::sort(times.begin(), times.end());
      for (Timestamp t : times) trade(aggressor, t, out.events);
    }
    return out;
  }

 private:
  using Key = std::pair<Side, std::int64_t>;  // (side, price ticks)

  double draw_level_qty() { return std::round((0.1 + level_qty_(rng_)) * 1e4) / 1e4; }

  // Target ladder around the fair value, keeping quantities of surviving levels.
  std::map<Key, double> desired(double fair, const std::map<Key, double>& current) {
    const std::int64_t fair_ticks = Price::from_double(fair).ticks();
    const std::int64_t center =
        static_cast<std::int64_t>(std::llround(static_cast<double>(fair_ticks) / spacing_)) *
        spacing_;
    std::map<Key, double> want;
    for (std::size_t k = 1; k <= cfg_.book_depth; ++k) {
      const std::int64_t d = static_cast<std::int64_t>(k) * spacing_;
      for (Key key : {Key{Side::Buy, center - d}, Key{Side::Sell, center + d}}) {
        if (key.second <= 0) continue;
        auto it = current.find(key);
        want[key] = it != current.end() ? it->second : draw_level_qty();
      }
    }
    return want;
  }

  void emit(Side side, std::int64_t ticks, double qty, Timestamp ts,
            std::vector<MarketEvent>& events) {
    events.push_back({ts, side == Side::Buy ? EventKind::BidDelta : EventKind::AskDelta, side,
                      Price::from_ticks(ticks), qty});
  }

  void relist(double fair, Timestamp ts, std::vector<MarketEvent>& events) {
    auto want = desired(fair, book_);
    // Deletions first so the book never crosses mid-update.
    for (auto it = book_.begin(); it != book_.end();) {
      if (!want.count(it->first)) {
        emit(it->first.first, it->first.second, 0.0, ts, events);
        it = book_.erase(it);
      } else {
        ++it;
      }
    }
    for (const auto& [key, qty] : want) {
      if (!book_.count(key)) {
        emit(key.first, key.second, qty, ts, events);
        book_[key] = qty;
      }
    }
  }

  void refresh(Timestamp ts, std::vector<MarketEvent>& events) {
    if (book_.empty()) return;
    std::uniform_int_distribution<std::size_t> pick(0, book_.size() - 1);
    for (std::size_t i = 0; i < cfg_.refreshes_per_second; ++i) {
      auto it = std::next(book_.begin(), static_cast<std::ptrdiff_t>(pick(rng_)));
      it->second = draw_level_qty();
      emit(it->first.first, it->first.second, it->second, ts, events);
    }
  }

  void trade(Side aggressor, Timestamp ts, std::vector<MarketEvent>& events) {
    // A buyer lifts the best ask, a seller hits the best bid.
    const Side resting = opposite(aggressor);
    std::map<Key, double>::iterator best = book_.end();
    for (auto it = book_.begin(); it != book_.end(); ++it) {
      if (it->first.first != resting) continue;
      if (best == book_.end() ||
          (resting == Side::Sell ? it->first.second < best->first.second
                                 : it->first.second > best->first.second)) {
        best = it;
      }
    }
    if (best == book_.end()) return;
    // Never more than half the touch, so the touch survives until relisting.
    double qty = std::min(0.01 + trade_qty_(rng_), 0.5 * best->second);
    qty = std::floor(qty * 1e4) / 1e4;
    if (qty <= 0.0) return;
    events.push_back({ts, EventKind::Trade, aggressor, Price::from_ticks(best->first.second), qty});
    best->second = std::round((best->second - qty) * 1e4) / 1e4;
    emit(resting, best->first.second, best->second, ts, events);
    if (best->second <= 0.0) book_.erase(best);
  }

  const SynthConfig& cfg_;
  std::mt19937_64 rng_;
  std::int64_t spacing_;
  std::exponential_distribution<double> level_qty_;
  std::exponential_distribution<double> trade_qty_;
  std::poisson_distribution<int> arrivals_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::map<Key, double> book_;
};

}  // namespace

SynthMarket generate(const SynthConfig& cfg) {
  cfg.validate();
  return Generator(cfg).run();
}

}  // namespace mmrl
