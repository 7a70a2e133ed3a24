#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mmrl {

struct NetSpec {
  std::size_t input_dim = 1;
  std::array<std::size_t, 2> hidden_dims{128, 64};
  std::size_t output_dim = 1;
  bool dueling = false;
  std::uint64_t seed = 0;

  void validate() const;
  std::size_t parameter_count() const;

  friend bool operator==(const NetSpec&, const NetSpec&) = default;
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Value / advantage streams of a dueling network before aggregation.
struct DuelingHeads {
  double value = 0.0;
  std::vector<double> advantages;
};

// A mini-batch for supervised Q regression: one target per (state, action).
struct QBatch {
  std::vector<std::vector<double>> states;
  std::vector<std::size_t> actions;
  std::vector<double> targets;
};

// Two-hidden-layer ReLU MLP producing one Q-value per action, optionally
// split into value and advantage heads aggregated as
//   Q(s,a) = V(s) + A(s,a) - mean_a' A(s,a').
// All parameters live in one flat buffer, layer by layer, each layer stored
// as a row-major [out x in] weight matrix followed by its bias vector.
class QNetwork {
 public:
  explicit QNetwork(const NetSpec& spec, AdamConfig adam = {});

  const NetSpec& spec() const { return spec_; }

  std::vector<double> forward(std::span<const double> state) const;
  // Only valid for dueling networks.
  DuelingHeads heads(std::span<const double> state) const;

  // Mean squared error between targets and Q(s_i, a_i) for the batch.
  double loss(const QBatch& batch) const;
  // d loss / d parameters, same layout as parameters().
  std::vector<double> gradient(const QBatch& batch) const;

  // One Adam update; returns the loss before the update.
  double train_step(const QBatch& batch, double lr);

  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }
  std::uint64_t adam_steps() const { return step_; }

  std::string save() const;
  static QNetwork load(std::string_view bytes);

 private:
  struct Layer {
    std::size_t in = 0;
    std::size_t out = 0;
    std::size_t offset = 0;  // weights at offset, biases at offset + in * out
  };
  struct Trace {
    std::vector<double> z1, h1, z2, h2, head;
    double value = 0.0;
  };

  void build_layout();
  void check_state(std::span<const double> state) const;
  void check_batch(const QBatch& batch) const;
  void run(std::span<const double> state, Trace& trace) const;
  std::vector<double> aggregate(const Trace& trace) const;
  double accumulate_gradient(const QBatch& batch, std::vector<double>& grad) const;

  NetSpec spec_;
  AdamConfig adam_;
  std::vector<Layer> layers_;  // hidden1, hidden2, head (q or advantage), [value]
  std::vector<double> params_;
  std::vector<double> moment1_;
  std::vector<double> moment2_;
  std::uint64_t step_ = 0;
};

std::size_t argmax(std::span<const double> values);

}  // namespace mmrl
