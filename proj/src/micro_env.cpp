#include "mmrl/micro_env.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <json.hpp>

#include "mmrl/errors.hpp"

namespace mmrl {

void MicroConfig::validate() const {
  if (max_offset < 0 || action_step_ticks <= 0) throw InvalidConfig("bad micro action grid");
  if (slot_ms <= 0 || horizon_ms < slot_ms || frame_ms <= 0 || slot_ms % frame_ms != 0) {
    throw InvalidConfig("slot must divide into frames and fit in the horizon");
  }
  if (depth == 0 || window == 0) throw InvalidConfig("depth and window must be >= 1");
}

Price action_price(const OrderBook& book, Side side, int a, std::int64_t step_ticks) {
  Price p = market_price(book, side).offset(static_cast<std::int64_t>(a) * step_ticks);
  return p.ticks() > 0 ? p : Price::from_ticks(1);
}

double episode_reward(Side side, Price reference_price, std::span<const Fill> fills) {
  const double avg = vwap(fills);
  return side == Side::Buy ? reference_price.value() - avg : avg - reference_price.value();
}

MicroEnv::MicroEnv(std::shared_ptr<const BookTimeline> timeline, MicroConfig cfg)
    : cfg_(cfg), cursor_(std::move(timeline)) {
  cfg_.validate();
  episode_.finished = true;
}

MarketFrame MicroEnv::frame() const {
  return {top_levels(cursor_.book(), cfg_.depth), cursor_.book().last_trade()};
}

void MicroEnv::push_frame() {
  state_.window.push_back(frame());
  while (state_.window.size() > cfg_.window) state_.window.pop_front();
}

const MicroState& MicroEnv::reset(Side side, double quantity, Timestamp t0) {
  const auto& tl = cursor_.timeline();
  if (!is_minute_aligned(t0) || t0 < tl.start() || t0 + cfg_.horizon_ms > tl.end()) {
    throw OutOfRange("episode start " + std::to_string(t0) + " not a minute inside [" +
                     std::to_string(tl.start()) + ", " +
                     std::to_string(tl.end() - cfg_.horizon_ms) + "]");
  }
  if (!(quantity > 0.0)) throw InvalidConfig("episode quantity must be positive");

  state_ = MicroState{};
  state_.quantity_remaining = quantity;
  state_.initial_quantity = quantity;
  state_.time_remaining = static_cast<double>(cfg_.horizon_ms) / 1000.0;
  state_.t0 = t0;
  state_.now = t0;
  state_.side = side;

  const auto frames = static_cast<Timestamp>(cfg_.window);
  for (Timestamp k = frames - 1; k >= 0; --k) {
    const Timestamp ts = t0 - k * cfg_.frame_ms;
    if (ts < tl.start()) continue;
    cursor_.seek(ts);
    push_frame();
  }
  // Pad the front with the oldest available frame.
  while (state_.window.size() < cfg_.window) state_.window.push_front(state_.window.front());

  state_.reference_price = market_price(cursor_.book(), side);
  episode_ = MicroEpisode{};
  episode_.t0 = t0;
  episode_.side = side;
  episode_.quantity = quantity;
  episode_.reference_price = state_.reference_price;
  return state_;
}

Price MicroEnv::action_price(int a) const {
  return mmrl::action_price(cursor_.book(), state_.side, a, cfg_.action_step_ticks);
}

void MicroEnv::finish() {
  episode_.reward = episode_reward(episode_.side, episode_.reference_price, episode_.fills);
  episode_.finished = true;
}

MicroStepResult MicroEnv::step(int a) {
  if (episode_.finished) throw EpisodeDone("micro episode finished; call reset()");
  if (a < -cfg_.max_offset || a > cfg_.max_offset) throw OutOfRange("micro action out of range");

  const Timestamp now = state_.now;
  AgentOrder order{state_.side, OrderKind::Limit, action_price(a), state_.quantity_remaining, now};
  RestingOrder resting = place_limit(cursor_.book(), order);
  episode_.actions.push_back(a);
  ++episode_.limit_orders;

  const Timestamp slot_end = std::min(now + cfg_.slot_ms, state_.t0 + cfg_.horizon_ms);
  for (Timestamp ts = now + cfg_.frame_ms; ts <= slot_end; ts += cfg_.frame_ms) {
    if (!resting.active()) break;
    resting = advance(std::move(resting), cursor_.advance_to(ts));
    push_frame();
  }
  // The slot's order is cancelled before the next placement.
  resting = cancel(std::move(resting));
  episode_.fills.insert(episode_.fills.end(), resting.fills.begin(), resting.fills.end());
  state_.quantity_remaining = resting.remaining;
  state_.now = slot_end;
  state_.time_remaining = static_cast<double>(state_.t0 + cfg_.horizon_ms - slot_end) / 1000.0;

  if (state_.quantity_remaining > 0.0 && state_.time_remaining <= 0.0) {
    cursor_.seek(slot_end);
    OrderBook book = cursor_.book();
    auto fills = place_market(book, state_.side, state_.quantity_remaining, slot_end);
    episode_.forced_market_qty = state_.quantity_remaining;
    ++episode_.market_orders;
    episode_.fills.insert(episode_.fills.end(), fills.begin(), fills.end());
    state_.quantity_remaining = 0.0;
  }

  MicroStepResult out;
  out.state = &state_;
  if (state_.quantity_remaining <= 0.0) {
    finish();
    out.reward = episode_.reward;
    out.done = true;
  }
  return out;
}

std::size_t MicroEnv::state_dim(const MicroConfig& cfg) {
  return cfg.window * (4 * cfg.depth + 3) + 3;
}

std::vector<double> MicroEnv::encode(const MicroState& s) const {
  std::vector<double> x;
  x.reserve(state_dim(cfg_));
  const std::int64_t ref = s.reference_price.ticks();
  auto offset = [&](Price p) {
    return static_cast<double>(p.ticks() - ref) / static_cast<double>(Price::kTicksPerUnit);
  };
  for (const auto& f : s.window) {
    for (const auto& lvl : f.levels.bid_levels) {
      x.push_back(offset(lvl.price));
      x.push_back(std::log1p(lvl.quantity));
    }
    for (const auto& lvl : f.levels.ask_levels) {
      x.push_back(offset(lvl.price));
      x.push_back(std::log1p(lvl.quantity));
    }
    if (f.last_trade) {
      x.push_back(offset(f.last_trade->price));
      x.push_back(std::log1p(f.last_trade->quantity));
      x.push_back(f.last_trade->side == Side::Buy ? 1.0 : -1.0);
    } else {
      x.insert(x.end(), {0.0, 0.0, 0.0});
    }
  }
  x.push_back(s.initial_quantity > 0.0 ? s.quantity_remaining / s.initial_quantity : 0.0);
  x.push_back(s.time_remaining / (static_cast<double>(cfg_.horizon_ms) / 1000.0));
  x.push_back(s.side == Side::Buy ? 1.0 : -1.0);
  return x;
}

MicroTrainingEnv::MicroTrainingEnv(std::shared_ptr<const BookTimeline> timeline, MicroConfig cfg,
                                   double quantity)
    : env_(timeline, cfg), quantity_(quantity) {
  first_minute_ = minute_floor(timeline->start() + kMinuteMs - 1);
  last_minute_ = minute_floor(timeline->end() - cfg.horizon_ms);
  if (last_minute_ < first_minute_) throw OutOfRange("timeline shorter than one episode");
}

std::vector<double> MicroTrainingEnv::reset(Rng& rng) {
  const auto minutes = static_cast<std::int64_t>((last_minute_ - first_minute_) / kMinuteMs);
  std::uniform_int_distribution<std::int64_t> pick_minute(0, minutes);
  std::uniform_int_distribution<int> pick_side(0, 1);
  const Timestamp t0 = first_minute_ + pick_minute(rng) * kMinuteMs;
  const Side side = pick_side(rng) == 0 ? Side::Buy : Side::Sell;
  return env_.encode(env_.reset(side, quantity_, t0));
}

StepResult MicroTrainingEnv::step(std::size_t action) {
  if (action >= env_.config().action_count()) throw OutOfRange("micro action index out of range");
  auto r = env_.step(env_.config().offset_of(action));
  return {env_.encode(*r.state), r.reward, r.done};
}

void write_episode_json(std::ostream& out, const MicroEpisode& ep) {
  nlohmann::ordered_json j;
  j["t0"] = ep.t0;
  j["side"] = std::string(to_string(ep.side));
  j["qty"] = ep.quantity;
  j["actions"] = ep.actions;
  auto fills = nlohmann::ordered_json::array();
  for (const auto& f : ep.fills) fills.push_back({f.price.value(), f.quantity});
  j["fills"] = fills;
  j["forced_market_qty"] = ep.forced_market_qty;
  j["reward"] = ep.reward;
  out << j.dump() << '\n';
}

}  // namespace mmrl
