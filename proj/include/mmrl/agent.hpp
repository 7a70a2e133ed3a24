#pragma once

#include <cstddef>
#include <deque>
#include <iosfwd>
#include <random>
#include <span>
#include <vector>

#include "mmrl/neural.hpp"

namespace mmrl {

using Rng = std::mt19937_64;

struct Transition {
  std::vector<double> state;
  std::size_t action = 0;
  double reward = 0.0;
  std::vector<double> next_state;
  bool done = false;
};

// Fixed-capacity FIFO of transitions; the oldest entry is evicted first.
class ReplayMemory {
 public:
  explicit ReplayMemory(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return buffer_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& operator[](std::size_t i) const { return buffer_[i]; }

  // Uniform indices: without replacement when size >= batch_size, with
  // replacement otherwise. Throws EmptyMemory.
  std::vector<std::size_t> sample_indices(std::size_t batch_size, Rng& rng) const;
  std::vector<Transition> sample(std::size_t batch_size, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::deque<Transition> buffer_;
};

struct EpsilonSchedule {
  double eps_start = 1.0;
  double eps_end = 0.05;
  double decay = 0.995;
  double current = 1.0;

  static EpsilonSchedule make(double start, double end, double decay) {
    return {start, end, decay, start};
  }
};

// current <- max(eps_end, current * decay)
EpsilonSchedule decay(EpsilonSchedule schedule);

struct TrainConfig {
  double gamma = 0.97;
  std::size_t batch_size = 32;
  std::size_t epochs = 500;
  std::size_t memory_capacity = 10'000;
  double eps_start = 1.0;
  double eps_end = 0.05;
  double eps_decay = 0.995;
  double lr = 1e-3;

  void validate() const;
};

// Uniform random action with probability schedule.current, otherwise the
// greedy action (lowest index on ties).
std::size_t select_action(const QNetwork& net, std::span<const double> state,
                          const EpsilonSchedule& schedule, Rng& rng);

// q_i = r_i for terminal transitions, r_i + gamma * max_a Q(s'_i, a) otherwise.
std::vector<double> bellman_targets(std::span<const Transition> batch, const QNetwork& net,
                                    double gamma);

struct StepResult {
  std::vector<double> next_state;
  double reward = 0.0;
  bool done = false;
};

// Episodic environment driven by the trainer.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual std::size_t state_dim() const = 0;
  virtual std::size_t action_count() const = 0;
  virtual std::vector<double> reset(Rng& rng) = 0;
  virtual StepResult step(std::size_t action) = 0;
};

struct EpochLog {
  std::size_t epoch = 0;
  double cum_reward = 0.0;
  double mean_loss = 0.0;
  double epsilon = 0.0;
  std::size_t steps = 0;

  friend bool operator==(const EpochLog&, const EpochLog&) = default;
};

// Deep Q-learning: one replay push, one sampled mini-batch and one gradient
// step per environment step; epsilon decays every step.
std::vector<EpochLog> train(Environment& env, QNetwork& net, const TrainConfig& cfg, Rng& rng);

void write_training_log(std::ostream& out, std::span<const EpochLog> log);

}  // namespace mmrl
