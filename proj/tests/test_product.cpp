#include "cosyn/bmw.hpp"
#include "cosyn/product.hpp"
#include "cosyn/quantize.hpp"
#include "cosyn/scltl.hpp"
#include "cosyn/system.hpp"

#include <doctest.h>

#include <fstream>
#include <random>

using namespace cosyn;
using doctest::Approx;

namespace {

Vector scalar(double v) { return Vector::Constant(1, v); }

// Forwards to another environment and keeps the label word it produced.
class Recorder : public Environment {
 public:
  explicit Recorder(Environment& inner) : inner_(&inner) {}
  std::size_t num_cells() const override { return inner_->num_cells(); }
  std::size_t num_inputs() const override { return inner_->num_inputs(); }
  Observation reset(std::mt19937_64& rng) override {
    word.clear();
    cells.clear();
    return record(inner_->reset(rng));
  }
  Observation step(std::size_t input, std::mt19937_64& rng) override { return record(inner_->step(input, rng)); }
  std::unique_ptr<Environment> clone() const override { return std::make_unique<Recorder>(*this); }

  std::vector<Letter> word;
  std::vector<std::size_t> cells;

 private:
  Observation record(Observation o) {
    word.push_back(o.label);
    cells.push_back(o.cell);
    return o;
  }
  Environment* inner_;
};

// Unit interval with label `high` on the upper half.
SystemModel half_labelled() {
  SystemModel m;
  m.name = "half";
  m.domain = {scalar(0.0), scalar(2.0)};
  m.inputs = {scalar(0.0), scalar(0.5)};
  m.noise_scale = scalar(0.2);
  m.ap = {"high"};
  m.drift = [](const Vector& x, const Vector& u) { return Vector(x + u); };
  m.labeler = [](const Vector& x) { return Letter{x(0) >= 0.5}; };
  m.validate();
  return m;
}

}  // namespace

TEST_CASE("potential values") {
  const Dfa dfa = compile(parse("G[0,1] safe", {"safe"}));
  REQUIRE(dfa.distance(dfa.initial()) == 2);
  REQUIRE(dfa.max_distance() == 3);
  CHECK(potential(dfa, 2, 0.1) == Approx(0.0));
  CHECK(potential(dfa, 0, 0.1) == 1.0);
  CHECK(potential(dfa, 1, 0.1) == Approx(0.05));
  CHECK(potential(dfa, 3, 0.1) == Approx(-0.05));
  CHECK(potential(dfa, 1, 0.1) - potential(dfa, 3, 0.1) == Approx(0.1));

  const Dfa trivial = compile(parse("true", {"safe"}));
  CHECK(potential(trivial, 1, 0.1) == 0.0);
}

TEST_CASE("sparse and shaped rewards") {
  const Dfa dfa = compile(parse("G[0,1] !b", {"b"}));
  const RewardConfig sparse{RewardMode::Sparse, 0.1};
  const RewardConfig shaped{RewardMode::Shaped, 0.1};
  CHECK(reward(dfa, 1, 2, sparse) == 1.0);
  CHECK(reward(dfa, 2, 2, sparse) == 0.0);
  CHECK(reward(dfa, 0, 1, sparse) == 0.0);
  CHECK(reward(dfa, 1, 2, shaped) == Approx(0.95));
  CHECK(reward(dfa, 2, 2, shaped) == 0.0);
}

TEST_CASE("reward configuration") {
  CHECK(parse_reward_mode("sparse") == RewardMode::Sparse);
  CHECK(parse_reward_mode("shaped") == RewardMode::Shaped);
  CHECK_THROWS_AS(parse_reward_mode("dense"), ConfigError);
  CHECK(to_string(RewardMode::Shaped) == "shaped");
  CHECK_THROWS_AS((RewardConfig{RewardMode::Shaped, 0.0}.validate()), ConfigError);
  CHECK_NOTHROW((RewardConfig{RewardMode::Sparse, 0.0}.validate()));
}

TEST_CASE("reset consumes the label of the quantised initial state") {
  const SystemModel room = make_room();
  const Grid grid = build_grid(room.domain, 0.01);
  const Dfa dfa = compile(parse("G[0,10] safe", room.ap));
  ContinuousEnvironment env(room, grid, scalar(20.0));
  Interpreter interp(env, dfa, 10, {});
  std::mt19937_64 rng(1);
  const ResetResult r = interp.reset(rng);
  CHECK(r.state.q == dfa.step(dfa.initial(), 1));
  CHECK(r.state.k == 0);
  CHECK(r.state.cell == quantize(grid, scalar(20.0)).cell);
  CHECK_FALSE(r.terminal);
  CHECK(r.reward == 0.0);

  // The label is taken at the cell centre, not at x0.
  const SystemModel half = half_labelled();
  const Grid coarse = build_grid(half.domain, 1.0);
  const Dfa high = compile(parse("high", half.ap));
  ContinuousEnvironment env2(half, coarse, scalar(0.4));
  Interpreter interp2(env2, high, 5, {});
  CHECK(half.label(scalar(0.4)) == 0u);
  const ResetResult r2 = interp2.reset(rng);
  CHECK(r2.terminal);
  CHECK(r2.reward == 1.0);
}

TEST_CASE("starting inside the goal accepts at reset") {
  const SystemModel bmw = make_bmw();
  const Grid grid = build_grid(bmw.domain, 2.0);
  const Dfa dfa = compile(parse("(!hit) U goal", bmw.ap));
  Vector x0(7);
  x0 << 47.0, 4.5, 0.0, 16.0, 0.0, 0.0, 0.0;
  ContinuousEnvironment env(bmw, grid, x0);
  std::mt19937_64 rng(1);
  Interpreter interp(env, dfa, 10, {});
  const ResetResult r = interp.reset(rng);
  CHECK(r.terminal);
  CHECK(dfa.is_accepting(r.state.q));
  CHECK(r.reward == 1.0);
  CHECK_THROWS_AS(interp.step(0, rng), ConfigError);

  Interpreter shaped(env, dfa, 10, {RewardMode::Shaped, 0.1});
  CHECK(shaped.reset(rng).reward == Approx(1.0 - potential(dfa, dfa.distance(dfa.initial()), 0.1)));
}

TEST_CASE("a full-horizon episode reads T+1 labels") {
  const SystemModel room = make_room();
  const Grid grid = build_grid(room.domain, 0.1);
  const Dfa dfa = compile(parse("X^20 safe", room.ap));  // undecided for 20 letters
  ContinuousEnvironment env(room, grid, scalar(20.0));
  Recorder rec(env);
  Interpreter interp(rec, dfa, 10, {});
  std::mt19937_64 rng(4);
  interp.reset(rng);
  std::size_t steps = 0;
  while (!interp.terminal()) {
    const EpisodeStep s = interp.step(steps % 10, rng);
    CHECK(s.next.k == s.prior.k + 1);
    ++steps;
  }
  CHECK(steps == 10);
  CHECK(rec.word.size() == 11);
  CHECK(interp.state().k == 10);
}

TEST_CASE("sparse return is the acceptance indicator of the label word") {
  const SystemModel half = half_labelled();
  const Grid grid = build_grid(half.domain, 0.1);
  const Dfa dfa = compile(parse("(!high) U (high & X high)", half.ap));
  ContinuousEnvironment env(half, grid, scalar(0.1));
  Recorder rec(env);
  Interpreter interp(rec, dfa, 6, {});
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> pick(0, 1);
  int accepted = 0;
  for (int e = 0; e < 2000; ++e) {
    double total = interp.reset(rng).reward;
    while (!interp.terminal()) total += interp.step(pick(rng), rng).reward;
    CHECK((total == 0.0 || total == 1.0));
    CHECK((total == 1.0) == dfa.accepts(rec.word));
    accepted += total == 1.0;
  }
  CHECK(accepted > 0);
  CHECK(accepted < 2000);
}

TEST_CASE("shaped returns telescope") {
  const SystemModel half = half_labelled();
  const Grid grid = build_grid(half.domain, 0.1);
  const Dfa dfa = compile(parse("(!high) U (high & X high & X X high)", half.ap));
  ContinuousEnvironment env(half, grid, scalar(0.1));
  const RewardConfig cfg{RewardMode::Shaped, 0.3};
  Interpreter interp(env, dfa, 8, cfg);
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<std::size_t> pick(0, 1);
  auto pot = [&](Dfa::State q) { return potential(dfa, dfa.distance(q), cfg.kappa); };
  int reached = 0;
  for (int e = 0; e < 3000; ++e) {
    const ResetResult r = interp.reset(rng);
    double steps = 0.0;
    while (!interp.terminal()) steps += interp.step(pick(rng), rng).reward;
    const Dfa::State end = interp.state().q;
    CHECK(steps == Approx(pot(end) - pot(r.state.q)).epsilon(1e-12));
    CHECK(r.reward + steps == Approx(pot(end) - pot(dfa.initial())).epsilon(1e-12));
    if (dfa.is_accepting(end)) {
      ++reached;
      CHECK(r.reward + steps == Approx(1.0 - pot(dfa.initial())).epsilon(1e-12));
    }
  }
  CHECK(reached > 0);
}

TEST_CASE("episodes end at the rejecting sink and leaving the domain is absorbing") {
  const SystemModel room = make_room();
  const Grid grid = build_grid(room.domain, 0.1);
  const Dfa dfa = compile(parse("G[0,10] safe", room.ap));
  ContinuousEnvironment env(room, grid, scalar(21.0));
  Interpreter interp(env, dfa, 10, {});
  std::mt19937_64 rng(9);
  int rejected = 0;
  for (int e = 0; e < 200; ++e) {
    interp.reset(rng);
    while (!interp.terminal()) {
      const EpisodeStep s = interp.step(9, rng);  // strongest heating drives the room out
      if (grid.is_out(s.next.cell)) {
        CHECK(dfa.is_rejecting(s.next.q));
        CHECK(s.terminal);
        CHECK(env.out());
        CHECK(env.step(0, rng).cell == grid.out_cell());
        ++rejected;
      }
    }
  }
  CHECK(rejected > 0);
  CHECK_THROWS_AS(interp.step(0, rng), ConfigError);
  interp.reset(rng);
  CHECK_THROWS_AS(interp.step(10, rng), ConfigError);
  CHECK_THROWS_AS(ContinuousEnvironment(room, grid, scalar(25.0)), ConfigError);
}

TEST_CASE("observation sequences replay under the same seed") {
  const SystemModel traffic = make_traffic();
  const Grid grid = build_grid(traffic.domain, 0.2);
  const Dfa dfa = compile(parse("G[0,10] safe", traffic.ap));
  auto run = [&](std::uint64_t seed) {
    ContinuousEnvironment env(traffic, grid, scalar(10.0));
    Recorder rec(env);
    Interpreter interp(rec, dfa, 10, {});
    std::mt19937_64 rng = stream_rng(seed, 3);
    std::vector<std::size_t> cells;
    for (int e = 0; e < 20; ++e) {
      interp.reset(rng);
      while (!interp.terminal()) interp.step(interp.state().k % 2, rng);
      cells.insert(cells.end(), rec.cells.begin(), rec.cells.end());
    }
    return cells;
  };
  CHECK(run(12) == run(12));
  CHECK(run(12) != run(13));
}

TEST_CASE("random streams are independent per stream index") {
  auto a = stream_rng(1, 1), b = stream_rng(1, 2), c = stream_rng(1, 1);
  const auto x = a(), y = b(), z = c();
  CHECK(x == z);
  CHECK(x != y);
}

TEST_CASE("uniform restarts cover the domain") {
  const SystemModel room = make_room();
  const Grid grid = build_grid(room.domain, 0.5);
  ContinuousEnvironment env(room, grid, scalar(20.0));
  env.set_uniform_restarts(true);
  std::mt19937_64 rng(3);
  std::vector<int> seen(grid.num_cells(), 0);
  for (int i = 0; i < 400; ++i) ++seen[env.reset(rng).cell];
  for (int s : seen) CHECK(s > 0);
}

TEST_CASE("finite MDP environment") {
  FiniteMdp mdp;
  mdp.labels = {0, 1};
  Matrix t(2, 2);
  t << 0.0, 1.0, 0.0, 1.0;
  mdp.transitions = {t};
  FiniteMdpEnvironment env(mdp, 0);
  std::mt19937_64 rng(1);
  CHECK(env.reset(rng).cell == 0);
  const Observation o = env.step(0, rng);
  CHECK(o.cell == 1);
  CHECK(o.label == 1u);
  CHECK_THROWS_AS(FiniteMdpEnvironment(mdp, 2), ConfigError);
}

TEST_CASE("trace CSV") {
  {
    TraceWriter trace("trace.csv");
    EpisodeStep s{{3, 1, 0}, 2, {4, 2, 1}, 0.5, true};
    trace.write(7, s);
  }
  std::ifstream in("trace.csv");
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(header == "episode,k,cell,q,input,reward,terminal");
  CHECK(row == "7,0,3,1,2,0.5,1");
}
