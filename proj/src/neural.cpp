#include "mmrl/neural.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <json.hpp>

#include "mmrl/errors.hpp"

namespace mmrl {

using nlohmann::json;

namespace {

double dot(const double* a, const double* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

constexpr int kCheckpointVersion = 1;

}  // namespace

void NetSpec::validate() const {
  if (input_dim < 1 || output_dim < 1 || hidden_dims[0] < 1 || hidden_dims[1] < 1) {
    throw InvalidSpec("all network dimensions must be >= 1");
  }
}

std::size_t NetSpec::parameter_count() const {
  auto dense = [](std::size_t in, std::size_t out) { return in * out + out; };
  std::size_t n = dense(input_dim, hidden_dims[0]) + dense(hidden_dims[0], hidden_dims[1]) +
                  dense(hidden_dims[1], output_dim);
  if (dueling) n += dense(hidden_dims[1], 1);
  return n;
}

QNetwork::QNetwork(const NetSpec& spec, AdamConfig adam) : spec_(spec), adam_(adam) {
  spec_.validate();
  build_layout();
  std::mt19937_64 rng(spec_.seed);
  for (const auto& layer : layers_) {
    double limit = std::sqrt(6.0 / static_cast<double>(layer.in + layer.out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (std::size_t i = 0; i < layer.in * layer.out; ++i) params_[layer.offset + i] = dist(rng);
  }
}

void QNetwork::build_layout() {
  const auto [h1, h2] = spec_.hidden_dims;
  std::size_t offset = 0;
  auto add = [&](std::size_t in, std::size_t out) {
    layers_.push_back({in, out, offset});
    offset += in * out + out;
  };
  add(spec_.input_dim, h1);
  add(h1, h2);
  add(h2, spec_.output_dim);
  if (spec_.dueling) add(h2, 1);
  params_.assign(offset, 0.0);
  moment1_.assign(offset, 0.0);
  moment2_.assign(offset, 0.0);
}

void QNetwork::check_state(std::span<const double> state) const {
  if (state.size() != spec_.input_dim) {
    throw DimensionMismatch("state has " + std::to_string(state.size()) + " values, expected " +
                            std::to_string(spec_.input_dim));
  }
  for (double v : state) {
    if (!std::isfinite(v)) throw NonFiniteInput("state contains a non-finite value");
  }
}

void QNetwork::check_batch(const QBatch& batch) const {
  if (batch.states.empty() || batch.states.size() != batch.actions.size() ||
      batch.states.size() != batch.targets.size()) {
    throw ShapeMismatch("batch states/actions/targets differ in length or are empty");
  }
  for (std::size_t i = 0; i < batch.states.size(); ++i) {
    if (batch.states[i].size() != spec_.input_dim) throw ShapeMismatch("state width mismatch");
    if (batch.actions[i] >= spec_.output_dim) throw ShapeMismatch("action index out of range");
    if (!std::isfinite(batch.targets[i])) throw ShapeMismatch("non-finite target");
  }
}

void QNetwork::run(std::span<const double> x, Trace& tr) const {
  auto dense = [&](const Layer& L, const double* in, std::vector<double>& out) {
    out.resize(L.out);
    const double* w = params_.data() + L.offset;
    const double* b = w + L.in * L.out;
    for (std::size_t j = 0; j < L.out; ++j) out[j] = dot(w + j * L.in, in, L.in) + b[j];
  };
  auto relu = [](const std::vector<double>& z, std::vector<double>& h) {
    h.resize(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) h[i] = z[i] > 0.0 ? z[i] : 0.0;
  };
  dense(layers_[0], x.data(), tr.z1);
  relu(tr.z1, tr.h1);
  dense(layers_[1], tr.h1.data(), tr.z2);
  relu(tr.z2, tr.h2);
  dense(layers_[2], tr.h2.data(), tr.head);
  if (spec_.dueling) {
    std::vector<double> v;
    dense(layers_[3], tr.h2.data(), v);
    tr.value = v[0];
  }
}

std::vector<double> QNetwork::aggregate(const Trace& tr) const {
  if (!spec_.dueling) return tr.head;
  double mean = 0.0;
  for (double a : tr.head) mean += a;
  mean /= static_cast<double>(tr.head.size());
  std::vector<double> q(tr.head.size());
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = tr.value + (tr.head[i] - mean);
  return q;
}

std::vector<double> QNetwork::forward(std::span<const double> state) const {
  check_state(state);
  Trace tr;
  run(state, tr);
  return aggregate(tr);
}

DuelingHeads QNetwork::heads(std::span<const double> state) const {
  if (!spec_.dueling) throw InvalidSpec("network has no dueling heads");
  check_state(state);
  Trace tr;
  run(state, tr);
  return {tr.value, tr.head};
}

double QNetwork::loss(const QBatch& batch) const {
  check_batch(batch);
  double total = 0.0;
  Trace tr;
  for (std::size_t i = 0; i < batch.states.size(); ++i) {
    run(batch.states[i], tr);
    double err = aggregate(tr)[batch.actions[i]] - batch.targets[i];
    total += err * err;
  }
  return total / static_cast<double>(batch.states.size());
}

double QNetwork::accumulate_gradient(const QBatch& batch, std::vector<double>& grad) const {
  check_batch(batch);
  grad.assign(params_.size(), 0.0);
  const double scale = 2.0 / static_cast<double>(batch.states.size());
  const Layer& L1 = layers_[0];
  const Layer& L2 = layers_[1];
  const Layer& L3 = layers_[2];
  const std::size_t n_out = spec_.output_dim;

  Trace tr;
  std::vector<double> d_head(n_out), d_h2(L2.out), d_h1(L1.out);
  double total = 0.0;
  for (std::size_t i = 0; i < batch.states.size(); ++i) {
    const auto& x = batch.states[i];
    const std::size_t a = batch.actions[i];
    run(x, tr);
    const double err = aggregate(tr)[a] - batch.targets[i];
    total += err * err;
    const double dq = scale * err;

    // Only the taken action's output carries loss gradient.
    std::fill(d_head.begin(), d_head.end(), 0.0);
    if (spec_.dueling) {
      const double share = dq / static_cast<double>(n_out);
      for (std::size_t j = 0; j < n_out; ++j) d_head[j] = -share;
      d_head[a] += dq;
    } else {
      d_head[a] = dq;
    }

    std::fill(d_h2.begin(), d_h2.end(), 0.0);
    auto back_dense = [&](const Layer& L, const double* in, const double* d_out, double* d_in) {
      double* gw = grad.data() + L.offset;
      double* gb = gw + L.in * L.out;
      const double* w = params_.data() + L.offset;
      for (std::size_t j = 0; j < L.out; ++j) {
        if (d_out[j] == 0.0) continue;
        axpy(d_out[j], in, gw + j * L.in, L.in);
        gb[j] += d_out[j];
        if (d_in) axpy(d_out[j], w + j * L.in, d_in, L.in);
      }
    };
    back_dense(L3, tr.h2.data(), d_head.data(), d_h2.data());
    if (spec_.dueling) back_dense(layers_[3], tr.h2.data(), &dq, d_h2.data());

    for (std::size_t k = 0; k < L2.out; ++k) {
      if (tr.z2[k] <= 0.0) d_h2[k] = 0.0;
    }
    std::fill(d_h1.begin(), d_h1.end(), 0.0);
    back_dense(L2, tr.h1.data(), d_h2.data(), d_h1.data());
    for (std::size_t k = 0; k < L1.out; ++k) {
      if (tr.z1[k] <= 0.0) d_h1[k] = 0.0;
    }
    back_dense(L1, x.data(), d_h1.data(), nullptr);
  }
  return total / static_cast<double>(batch.states.size());
}

std::vector<double> QNetwork::gradient(const QBatch& batch) const {
  std::vector<double> grad;
  accumulate_gradient(batch, grad);
  return grad;
}

double QNetwork::train_step(const QBatch& batch, double lr) {
  std::vector<double> grad;
  const double before = accumulate_gradient(batch, grad);
  ++step_;
  const double t = static_cast<double>(step_);
  const double c1 = 1.0 - std::pow(adam_.beta1, t);
  const double c2 = 1.0 - std::pow(adam_.beta2, t);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const double g = grad[i];
    moment1_[i] = adam_.beta1 * moment1_[i] + (1.0 - adam_.beta1) * g;
    moment2_[i] = adam_.beta2 * moment2_[i] + (1.0 - adam_.beta2) * g * g;
    const double m_hat = moment1_[i] / c1;
    const double v_hat = moment2_[i] / c2;
    params_[i] -= lr * m_hat / (std::sqrt(v_hat) + adam_.epsilon);
  }
  return before;
}

std::string QNetwork::save() const {
  auto dump_layer = [&](const Layer& L) {
    auto w = params_.begin() + static_cast<std::ptrdiff_t>(L.offset);
    auto b = w + static_cast<std::ptrdiff_t>(L.in * L.out);
    return json{{"in", L.in},
                {"out", L.out},
                {"w", std::vector<double>(w, b)},
                {"b", std::vector<double>(b, b + static_cast<std::ptrdiff_t>(L.out))}};
  };
  json doc;
  doc["version"] = kCheckpointVersion;
  doc["spec"] = {{"input_dim", spec_.input_dim},
                 {"hidden_dims", {spec_.hidden_dims[0], spec_.hidden_dims[1]}},
                 {"output_dim", spec_.output_dim},
                 {"dueling", spec_.dueling},
                 {"seed", spec_.seed}};
  doc["layers"] = json::array({dump_layer(layers_[0]), dump_layer(layers_[1])});
  if (spec_.dueling) {
    doc["heads"] = {{"advantage", dump_layer(layers_[2])}, {"value", dump_layer(layers_[3])}};
  } else {
    doc["layers"].push_back(dump_layer(layers_[2]));
    doc["heads"] = json::object();
  }
  doc["adam"] = {{"beta1", adam_.beta1},
                 {"beta2", adam_.beta2},
                 {"epsilon", adam_.epsilon},
                 {"step", step_},
                 {"m", moment1_},
                 {"v", moment2_}};
  return doc.dump();
}

QNetwork QNetwork::load(std::string_view bytes) {
  json doc;
  try {
    doc = json::parse(bytes);
  } catch (const json::exception& e) {
    throw CorruptCheckpoint(e.what());
  }
  try {
    if (doc.at("version").get<int>() != kCheckpointVersion) {
      throw CorruptCheckpoint("unsupported checkpoint version");
    }
    const json& js = doc.at("spec");
    NetSpec spec;
    spec.input_dim = js.at("input_dim").get<std::size_t>();
    spec.hidden_dims = {js.at("hidden_dims").at(0).get<std::size_t>(),
                        js.at("hidden_dims").at(1).get<std::size_t>()};
    spec.output_dim = js.at("output_dim").get<std::size_t>();
    spec.dueling = js.at("dueling").get<bool>();
    spec.seed = js.at("seed").get<std::uint64_t>();

    AdamConfig adam;
    const json& ja = doc.at("adam");
    adam.beta1 = ja.at("beta1").get<double>();
    adam.beta2 = ja.at("beta2").get<double>();
    adam.epsilon = ja.at("epsilon").get<double>();

    QNetwork net(spec, adam);
    std::vector<const json*> stored = {&doc.at("layers").at(0), &doc.at("layers").at(1)};
    if (spec.dueling) {
      stored.push_back(&doc.at("heads").at("advantage"));
      stored.push_back(&doc.at("heads").at("value"));
    } else {
      stored.push_back(&doc.at("layers").at(2));
    }
    for (std::size_t i = 0; i < net.layers_.size(); ++i) {
      const Layer& L = net.layers_[i];
      auto w = stored[i]->at("w").get<std::vector<double>>();
      auto b = stored[i]->at("b").get<std::vector<double>>();
      if (w.size() != L.in * L.out || b.size() != L.out) {
        throw CorruptCheckpoint("layer " + std::to_string(i) + " has the wrong shape");
      }
      std::copy(w.begin(), w.end(), net.params_.begin() + static_cast<std::ptrdiff_t>(L.offset));
      std::copy(b.begin(), b.end(),
                net.params_.begin() + static_cast<std::ptrdiff_t>(L.offset + L.in * L.out));
    }
    net.step_ = ja.at("step").get<std::uint64_t>();
    auto m = ja.at("m").get<std::vector<double>>();
    auto v = ja.at("v").get<std::vector<double>>();
    if (m.size() != net.params_.size() || v.size() != net.params_.size()) {
      throw CorruptCheckpoint("optimizer state has the wrong shape");
    }
    net.moment1_ = std::move(m);
    net.moment2_ = std::move(v);
    for (double p : net.params_) {
      if (!std::isfinite(p)) throw CorruptCheckpoint("non-finite parameter");
    }
    return net;
  } catch (const json::exception& e) {
    throw CorruptCheckpoint(e.what());
  } catch (const InvalidSpec& e) {
    throw CorruptCheckpoint(e.what());
  }
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

}  // namespace mmrl
