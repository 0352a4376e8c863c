#include "cosyn/product.hpp"

namespace cosyn {

std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq ss{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                   static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(ss);
}

ContinuousEnvironment::ContinuousEnvironment(const SystemModel& model, const Grid& grid, Vector x0)
    : model_(&model), grid_(&grid), x0_(std::move(x0)) {
  if (!model.domain.contains(x0_)) throw ConfigError(model.name + ": initial state outside the domain");
  if (grid.box.dim() != model.dim()) throw ConfigError(model.name + ": grid dimension mismatch");
  x_ = x0_;
}

Observation ContinuousEnvironment::observe() {
  const Quantized q = quantize(*grid_, x_);
  out_ = q.out();
  return {q.cell, out_ ? model_->out_label : model_->label(q.point)};
}

Observation ContinuousEnvironment::reset(std::mt19937_64& rng) {
  if (uniform_restarts_) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    x_.resize(model_->dim());
    for (Eigen::Index d = 0; d < x_.size(); ++d) {
      x_(d) = model_->domain.lo(d) + unit(rng) * (model_->domain.hi(d) - model_->domain.lo(d));
    }
  } else {
    x_ = x0_;
  }
  return observe();
}

Observation ContinuousEnvironment::step(std::size_t input, std::mt19937_64& rng) {
  if (out_) return {grid_->out_cell(), model_->out_label};
  const Vector w = sample_noise(*model_, rng);
  x_ = cosyn::step(*model_, x_, model_->inputs.at(input), w);
  return observe();
}

FiniteMdpEnvironment::FiniteMdpEnvironment(const FiniteMdp& mdp, std::size_t initial)
    : mdp_(&mdp), initial_(initial), state_(initial) {
  if (initial >= mdp.num_states()) throw ConfigError("mdp: initial state out of range");
}

Observation FiniteMdpEnvironment::reset(std::mt19937_64&) {
  state_ = initial_;
  return {state_, mdp_->labels[state_]};
}

Observation FiniteMdpEnvironment::step(std::size_t input, std::mt19937_64& rng) {
  state_ = mdp_->sample(state_, input, rng);
  return {state_, mdp_->labels[state_]};
}

void RewardConfig::validate() const {
  if (mode == RewardMode::Shaped && !(kappa > 0.0)) throw ConfigError("reward: kappa must be positive");
}

RewardMode parse_reward_mode(const std::string& text) {
  if (text == "sparse") return RewardMode::Sparse;
  if (text == "shaped") return RewardMode::Shaped;
  throw ConfigError("unknown reward mode '" + text + "' (expected sparse or shaped)");
}

std::string to_string(RewardMode mode) { return mode == RewardMode::Sparse ? "sparse" : "shaped"; }

double potential(const Dfa& dfa, unsigned d, double kappa) {
  if (d == 0) return 1.0;
  const unsigned d_max = dfa.max_distance();
  if (d_max <= 1) return 0.0;
  const double d0 = dfa.distance(dfa.initial());
  return kappa * (static_cast<double>(d) - d0) / (1.0 - static_cast<double>(d_max));
}

double reward(const Dfa& dfa, Dfa::State q, Dfa::State next, const RewardConfig& config) {
  if (config.mode == RewardMode::Sparse) return !dfa.is_accepting(q) && dfa.is_accepting(next) ? 1.0 : 0.0;
  return potential(dfa, dfa.distance(next), config.kappa) - potential(dfa, dfa.distance(q), config.kappa);
}

Interpreter::Interpreter(Environment& env, const Dfa& dfa, std::size_t horizon, RewardConfig config)
    : env_(&env), dfa_(&dfa), horizon_(horizon), config_(config) {
  config_.validate();
}

bool Interpreter::is_terminal(const ProductState& s) const {
  return dfa_->is_accepting(s.q) || dfa_->is_rejecting(s.q) || s.k >= horizon_;
}

ResetResult Interpreter::reset(std::mt19937_64& rng) {
  const Observation obs = env_->reset(rng);
  const Dfa::State q0 = dfa_->initial();
  state_ = {obs.cell, dfa_->step(q0, obs.label), 0};
  terminal_ = is_terminal(state_);
  double r;
  if (config_.mode == RewardMode::Sparse) {
    // Entering acceptance at reset counts even when q0 itself accepts, so the
    // total reward is the acceptance indicator of the label word.
    r = dfa_->is_accepting(state_.q) ? 1.0 : 0.0;
  } else {
    r = reward(*dfa_, q0, state_.q, config_);
  }
  return {state_, r, terminal_};
}

EpisodeStep Interpreter::step(std::size_t input, std::mt19937_64& rng) {
  if (terminal_) throw ConfigError("interpreter: episode already terminated");
  if (input >= env_->num_inputs()) throw ConfigError("interpreter: input index out of range");
  const Observation obs = env_->step(input, rng);
  EpisodeStep s;
  s.prior = state_;
  s.input = input;
  s.next = {obs.cell, dfa_->step(state_.q, obs.label), state_.k + 1};
  s.reward = reward(*dfa_, state_.q, s.next.q, config_);
  s.terminal = is_terminal(s.next);
  state_ = s.next;
  terminal_ = s.terminal;
  return s;
}

TraceWriter::TraceWriter(const std::string& path) : out_(path) {
  out_.header({"episode", "k", "cell", "q", "input", "reward", "terminal"});
}

void TraceWriter::write(std::size_t episode, const EpisodeStep& step) {
  out_.row(episode, step.prior.k, step.prior.cell, step.prior.q, step.input, step.reward, step.terminal ? 1 : 0);
}

}  // namespace cosyn
