#include <doctest.h>

#include <cmath>
#include <deque>
#include <set>
#include <sstream>

#include "mmrl/agent.hpp"
#include "mmrl/errors.hpp"

using namespace mmrl;

namespace {

Transition tr(double reward, bool done = false, std::size_t action = 0) {
  return {{reward, 0.0}, action, reward, {reward + 1.0, 1.0}, done};
}

NetSpec tiny(std::size_t in, std::size_t out, std::uint64_t seed = 1) {
  NetSpec s;
  s.input_dim = in;
  s.hidden_dims = {8, 8};
  s.output_dim = out;
  s.seed = seed;
  return s;
}

// One-step episodes: action 0 pays +1, action 1 pays -1.
class Bandit : public Environment {
 public:
  std::size_t state_dim() const override { return 1; }
  std::size_t action_count() const override { return 2; }
  std::vector<double> reset(Rng&) override { return {1.0}; }
  StepResult step(std::size_t a) override { return {{0.0}, a == 0 ? 1.0 : -1.0, true}; }
};

// Exposes a "future" value only through the state it hands out; any read of
// data beyond the current step is recorded.
class PoisonedFuture : public Environment {
 public:
  std::size_t state_dim() const override { return 2; }
  std::size_t action_count() const override { return 2; }
  std::vector<double> reset(Rng&) override {
    t_ = 0;
    return state();
  }
  StepResult step(std::size_t a) override {
    ++t_;
    bool done = t_ >= 5;
    return {state(), a == 0 ? 0.1 : -0.1, done};
  }
  std::vector<double> state() const { return {static_cast<double>(t_), series_.at(t_)}; }
  std::size_t max_index_read() const { return t_; }

 private:
  std::size_t t_ = 0;
  // Indices past 5 are poison: NaN would make the network throw.
  std::vector<double> series_ = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, NAN, NAN};
};

}  // namespace

TEST_CASE("replay memory FIFO") {
  ReplayMemory m(2);
  m.push(tr(1));
  CHECK(m.size() == 1);
  m.push(tr(2));
  m.push(tr(3));
  REQUIRE(m.size() == 2);
  CHECK(m[0].reward == 2);
  CHECK(m[1].reward == 3);
}

TEST_CASE("replay memory matches a reference deque") {
  Rng rng(1);
  for (std::size_t cap : {1u, 7u, 100u}) {
    ReplayMemory m(cap);
    std::deque<double> ref;
    for (int i = 0; i < 1000; ++i) {
      m.push(tr(i));
      ref.push_back(i);
      if (ref.size() > cap) ref.pop_front();
      REQUIRE(m.size() == std::min<std::size_t>(i + 1, cap));
    }
    for (std::size_t i = 0; i < ref.size(); ++i) CHECK(m[i].reward == ref[i]);
  }
  CHECK_THROWS_AS(ReplayMemory(0), InvalidConfig);
}

TEST_CASE("replay sampling") {
  Rng rng(2);
  SUBCASE("single entry is repeated") {
    ReplayMemory m(10);
    m.push(tr(5));
    auto s = m.sample(4, rng);
    REQUIRE(s.size() == 4);
    for (const auto& t : s) CHECK(t.reward == 5);
  }
  SUBCASE("distinct indices without replacement") {
    ReplayMemory m(100);
    for (int i = 0; i < 100; ++i) m.push(tr(i));
    for (int round = 0; round < 50; ++round) {
      auto idx = m.sample_indices(32, rng);
      CHECK(std::set<std::size_t>(idx.begin(), idx.end()).size() == 32);
    }
  }
  SUBCASE("uniform coverage") {
    ReplayMemory m(10);
    for (int i = 0; i < 10; ++i) m.push(tr(i));
    std::vector<double> counts(10, 0.0);
    const int rounds = 20000;
    for (int r = 0; r < rounds; ++r) {
      for (auto i : m.sample_indices(3, rng)) counts[i] += 1;
    }
    double expected = rounds * 3 / 10.0, chi2 = 0.0;
    for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
    CHECK(chi2 < 21.666);  // 99th percentile, 9 degrees of freedom
  }
  SUBCASE("empty memory") {
    ReplayMemory m(3);
    CHECK_THROWS_AS(m.sample(1, rng), EmptyMemory);
  }
}

TEST_CASE("select_action") {
  QNetwork net(tiny(2, 3));
  std::vector<double> s{0.2, -0.4};
  Rng rng(3);
  SUBCASE("epsilon 1 is uniform") {
    auto sched = EpsilonSchedule::make(1.0, 1.0, 0.5);
    std::vector<double> counts(3, 0.0);
    const int n = 30000;
    for (int i = 0; i < n; ++i) counts[select_action(net, s, sched, rng)] += 1;
    double chi2 = 0.0;
    for (double c : counts) chi2 += (c - n / 3.0) * (c - n / 3.0) / (n / 3.0);
    CHECK(chi2 < 9.21);  // 99th percentile, 2 degrees of freedom
  }
  SUBCASE("epsilon 0 is greedy") {
    auto sched = EpsilonSchedule::make(0.0, 0.0, 0.5);
    auto q = net.forward(s);
    for (int i = 0; i < 20; ++i) CHECK(select_action(net, s, sched, rng) == argmax(q));
  }
}

TEST_CASE("epsilon decay") {
  auto s = decay(EpsilonSchedule::make(1.0, 0.05, 0.5));
  CHECK(s.current == 0.5);
  auto floor = EpsilonSchedule::make(1.0, 0.05, 0.5);
  floor.current = 0.05;
  CHECK(decay(floor).current == 0.05);

  for (double d : {0.5, 0.9, 0.995}) {
    auto sched = EpsilonSchedule::make(1.0, 0.05, d);
    double prev = sched.current;
    for (int k = 1; k <= 2000; ++k) {
      sched = decay(sched);
      CHECK(sched.current <= prev);
      CHECK(sched.current >= 0.05);
      CHECK(sched.current == doctest::Approx(std::max(0.05, std::pow(d, k))).epsilon(1e-9));
      prev = sched.current;
    }
  }
}

TEST_CASE("bellman_targets") {
  QNetwork net(tiny(2, 3));
  SUBCASE("terminal") {
    std::vector<Transition> b = {tr(1, true)};
    CHECK(bellman_targets(b, net, 0.9) == std::vector<double>{1.0});
  }
  SUBCASE("bootstrap with a known max") {
    QNetwork zero(tiny(2, 3));
    for (auto& w : zero.parameters()) w = 0.0;
    // Output biases sit at the end of the buffer.
    auto p = zero.parameters();
    p[p.size() - 3] = 1.0;
    p[p.size() - 2] = 2.0;
    p[p.size() - 1] = -4.0;
    std::vector<Transition> b = {tr(0, false)};
    b[0].reward = 0.0;
    CHECK(bellman_targets(b, zero, 0.9)[0] == doctest::Approx(1.8));
  }
  SUBCASE("loop oracle on mixed batches") {
    Rng rng(4);
    std::normal_distribution<double> g(0, 1);
    std::bernoulli_distribution done(0.3);
    std::vector<Transition> b;
    for (int i = 0; i < 64; ++i) {
      b.push_back({{g(rng), g(rng)}, 0, g(rng), {g(rng), g(rng)}, done(rng)});
    }
    auto got = bellman_targets(b, net, 0.97);
    for (std::size_t i = 0; i < b.size(); ++i) {
      double expect = b[i].reward;
      if (!b[i].done) {
        auto q = net.forward(b[i].next_state);
        double best = q[0];
        for (double v : q) best = v > best ? v : best;
        expect = b[i].reward + 0.97 * best;
      }
      CHECK(got[i] == expect);
    }
    auto zero_gamma = bellman_targets(b, net, 0.0);
    for (std::size_t i = 0; i < b.size(); ++i) CHECK(zero_gamma[i] == b[i].reward);
  }
}

TEST_CASE("train") {
  SUBCASE("zero epochs leave the net unchanged") {
    Bandit env;
    QNetwork net(tiny(1, 2));
    std::vector<double> before(net.parameters().begin(), net.parameters().end());
    TrainConfig cfg;
    cfg.epochs = 0;
    Rng rng(1);
    CHECK(train(env, net, cfg, rng).empty());
    CHECK(std::equal(before.begin(), before.end(), net.parameters().begin()));
  }
  SUBCASE("bandit converges to the paying action") {
    int wins = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      Bandit env;
      QNetwork net(tiny(1, 2, seed));
      TrainConfig cfg;
      cfg.epochs = 500;
      Rng rng(seed);
      train(env, net, cfg, rng);
      if (argmax(net.forward(std::vector<double>{1.0})) == 0) ++wins;
    }
    CHECK(wins >= 9);
  }
  SUBCASE("fixed seeds give identical logs") {
    auto run = [] {
      Bandit env;
      QNetwork net(tiny(1, 2, 5));
      TrainConfig cfg;
      cfg.epochs = 50;
      Rng rng(9);
      auto log = train(env, net, cfg, rng);
      std::ostringstream out;
      write_training_log(out, log);
      return out.str();
    };
    auto a = run();
    CHECK(a == run());
    CHECK(a.find("\"epoch\":1,\"cum_reward\"") != std::string::npos);
  }
  SUBCASE("epsilon in the log is non-increasing") {
    Bandit env;
    QNetwork net(tiny(1, 2));
    TrainConfig cfg;
    cfg.epochs = 100;
    Rng rng(2);
    auto log = train(env, net, cfg, rng);
    for (std::size_t i = 1; i < log.size(); ++i) CHECK(log[i].epsilon <= log[i - 1].epsilon);
    CHECK(log.back().epsilon >= cfg.eps_end);
  }
  SUBCASE("training never reads past the current step") {
    PoisonedFuture env;
    QNetwork net(tiny(2, 2));
    TrainConfig cfg;
    cfg.epochs = 20;
    cfg.batch_size = 4;
    Rng rng(3);
    CHECK_NOTHROW(train(env, net, cfg, rng));
    CHECK(env.max_index_read() <= 5);
  }
  SUBCASE("shape mismatch") {
    Bandit env;
    QNetwork net(tiny(2, 2));
    TrainConfig cfg;
    Rng rng(1);
    CHECK_THROWS_AS(train(env, net, cfg, rng), DimensionMismatch);
  }
}
