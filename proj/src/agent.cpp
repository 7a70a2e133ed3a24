#include "mmrl/agent.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>

#include <json.hpp>

#include "mmrl/errors.hpp"

namespace mmrl {

ReplayMemory::ReplayMemory(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw InvalidConfig("replay memory capacity must be >= 1");
}

void ReplayMemory::push(Transition t) {
  if (buffer_.size() == capacity_) buffer_.pop_front();
  buffer_.push_back(std::move(t));
}

std::vector<std::size_t> ReplayMemory::sample_indices(std::size_t batch_size, Rng& rng) const {
  if (buffer_.empty()) throw EmptyMemory("cannot sample from an empty replay memory");
  std::vector<std::size_t> out;
  out.reserve(batch_size);
  if (buffer_.size() < batch_size) {
    std::uniform_int_distribution<std::size_t> pick(0, buffer_.size() - 1);
    for (std::size_t i = 0; i < batch_size; ++i) out.push_back(pick(rng));
    return out;
  }
  // Partial Fisher-Yates over the index range.
  std::vector<std::size_t> idx(buffer_.size());
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < batch_size; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
    out.push_back(idx[i]);
  }
  return out;
}

std::vector<Transition> ReplayMemory::sample(std::size_t batch_size, Rng& rng) const {
  std::vector<Transition> out;
  for (std::size_t i : sample_indices(batch_size, rng)) out.push_back(buffer_[i]);
  return out;
}

EpsilonSchedule decay(EpsilonSchedule s) {
  s.current = std::max(s.eps_end, s.current * s.decay);
  return s;
}

void TrainConfig::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw InvalidConfig("gamma must lie in (0, 1)");
  if (batch_size == 0) throw InvalidConfig("batch_size must be >= 1");
  if (memory_capacity == 0) throw InvalidConfig("memory_capacity must be >= 1");
  if (!(eps_end >= 0.0 && eps_end <= eps_start && eps_start <= 1.0)) {
    throw InvalidConfig("need 0 <= eps_end <= eps_start <= 1");
  }
  if (!(eps_decay > 0.0 && eps_decay < 1.0)) throw InvalidConfig("eps_decay must lie in (0, 1)");
  if (!(lr > 0.0)) throw InvalidConfig("lr must be positive");
}

std::size_t select_action(const QNetwork& net, std::span<const double> state,
                          const EpsilonSchedule& schedule, Rng& rng) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng) < schedule.current) {
    std::uniform_int_distribution<std::size_t> pick(0, net.spec().output_dim - 1);
    return pick(rng);
  }
  auto q = net.forward(state);
  return argmax(q);
}

std::vector<double> bellman_targets(std::span<const Transition> batch, const QNetwork& net,
                                    double gamma) {
  std::vector<double> targets;
  targets.reserve(batch.size());
  for (const auto& t : batch) {
    if (t.done) {
      targets.push_back(t.reward);
    } else {
      auto q = net.forward(t.next_state);
      targets.push_back(t.reward + gamma * *std::max_element(q.begin(), q.end()));
    }
  }
  return targets;
}

std::vector<EpochLog> train(Environment& env, QNetwork& net, const TrainConfig& cfg, Rng& rng) {
  cfg.validate();
  if (env.state_dim() != net.spec().input_dim || env.action_count() != net.spec().output_dim) {
    throw DimensionMismatch("environment and network shapes differ");
  }
  ReplayMemory memory(cfg.memory_capacity);
  auto schedule = EpsilonSchedule::make(cfg.eps_start, cfg.eps_end, cfg.eps_decay);
  std::vector<EpochLog> log;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    EpochLog entry;
    entry.epoch = epoch;
    double loss_sum = 0.0;
    auto state = env.reset(rng);
    bool done = false;
    while (!done) {
      const std::size_t action = select_action(net, state, schedule, rng);
      StepResult r = env.step(action);
      entry.cum_reward += r.reward;
      done = r.done;
      memory.push({std::move(state), action, r.reward, r.next_state, r.done});
      state = std::move(r.next_state);

      std::vector<Transition> batch = memory.sample(cfg.batch_size, rng);
      QBatch qb;
      qb.targets = bellman_targets(batch, net, cfg.gamma);
      for (auto& t : batch) {
        qb.states.push_back(std::move(t.state));
        qb.actions.push_back(t.action);
      }
      loss_sum += net.train_step(qb, cfg.lr);
      schedule = decay(schedule);
      ++entry.steps;
    }
    entry.mean_loss = entry.steps ? loss_sum / static_cast<double>(entry.steps) : 0.0;
    entry.epsilon = schedule.current;
    log.push_back(entry);
  }
  return log;
}

void write_training_log(std::ostream& out, std::span<const EpochLog> log) {
  for (const auto& e : log) {
    nlohmann::ordered_json j;
    j["epoch"] = e.epoch;
    j["cum_reward"] = e.cum_reward;
    j["mean_loss"] = e.mean_loss;
    j["epsilon"] = e.epsilon;
    out << j.dump() << '\n';
  }
}

}  // namespace mmrl
