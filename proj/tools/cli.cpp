#include "cli.hpp"

#include "cosyn/bmw.hpp"
#include "cosyn/csv.hpp"
#include "cosyn/dp.hpp"
#include "cosyn/qlearn.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace cosyn::cli {

namespace {

constexpr const char* kVersion = "1.0.0";

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  for (const auto& cell : csv::split(text, ',')) out.push_back(csv::to_double(trim(cell)));
  return out;
}

std::vector<std::string> parse_names(const std::string& text) {
  std::vector<std::string> out;
  for (const auto& cell : csv::split(text, ',')) {
    if (!trim(cell).empty()) out.push_back(trim(cell));
  }
  return out;
}

double parse_positive(const std::string& key, const std::string& value) {
  const double v = csv::to_double(trim(value));
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(key + " must be positive");
  return v;
}

std::uint64_t parse_count(const std::string& key, const std::string& value) {
  const long long v = csv::to_int(trim(value));
  if (v < 0) throw ConfigError(key + " must be non-negative");
  return static_cast<std::uint64_t>(v);
}

bool parse_bool(const std::string& value) {
  const std::string v = trim(value);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("not a boolean: '" + v + "'");
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

const std::string& param(const RunConfig& c, const std::string& key, const std::string& fallback) {
  const auto it = c.params.find(key);
  return it == c.params.end() ? fallback : it->second;
}

void check_params(const RunConfig& c, const std::string& prefix, const std::vector<std::string>& known) {
  for (const auto& [key, value] : c.params) {
    if (!key.starts_with(prefix + ".")) continue;
    const std::string name = key.substr(prefix.size() + 1);
    if (std::find(known.begin(), known.end(), name) == known.end()) {
      throw ConfigError("unknown parameter '" + key + "'");
    }
  }
}

void override_double(const RunConfig& c, const std::string& key, double& target) {
  const auto it = c.params.find(key);
  if (it != c.params.end()) target = csv::to_double(trim(it->second));
}

Rect parse_rect(const std::string& key, const std::string& text) {
  const auto v = parse_list(text);
  if (v.size() != 4) throw ConfigError(key + " needs x_lo,x_hi,y_lo,y_hi");
  return {v[0], v[1], v[2], v[3]};
}

SystemModel make_custom(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("unknown system '" + path + "' (expected room, traffic, bmw or a system file)");
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(path + ": expected key=value, got '" + line + "'");
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  auto get = [&](const std::string& key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw ConfigError(path + ": missing '" + key + "'");
    return it->second;
  };
  for (const auto& [key, value] : kv) {
    static const std::vector<std::string> known{"name", "a", "b", "c", "sigma", "lo", "hi", "inputs"};
    if (std::find(known.begin(), known.end(), key) == known.end()) throw ConfigError(path + ": unknown key '" + key + "'");
  }
  const double a = csv::to_double(get("a"));
  const double b = kv.count("b") ? csv::to_double(kv["b"]) : 0.0;
  const double c = kv.count("c") ? csv::to_double(kv["c"]) : 0.0;
  const double sigma = csv::to_double(get("sigma"));

  SystemModel m;
  m.name = kv.count("name") ? kv["name"] : std::filesystem::path(path).stem().string();
  m.domain = {Vector::Constant(1, csv::to_double(get("lo"))), Vector::Constant(1, csv::to_double(get("hi")))};
  for (double u : parse_list(get("inputs"))) m.inputs.push_back(Vector::Constant(1, u));
  m.noise_scale = Vector::Constant(1, sigma);
  m.ap = {"safe"};
  m.drift = [a, b, c](const Vector& x, const Vector& u) { return Vector::Constant(1, a * x(0) + b * u(0) + c); };
  m.labeler = [](const Vector&) { return Letter{1}; };
  m.linear_gaussian = LinearGaussian{Matrix::Constant(1, 1, std::abs(a)), Vector::Constant(1, sigma)};
  m.validate();
  return m;
}

std::string default_formula(const RunConfig& c) {
  if (c.system == "bmw") return "(!hit) U goal";
  return "G[0," + std::to_string(c.horizon) + "] safe";
}

Vector default_x0(const SystemModel& m) {
  if (m.name == "room") return Vector::Constant(1, 20.0);
  if (m.name == "traffic") return Vector::Constant(1, 10.0);
  if (m.name == "bmw") {
    Vector x(7);
    x << 5.0, 1.5, 0.0, 16.0, 0.0, 0.0, 0.0;
    return x;
  }
  return 0.5 * (m.domain.lo + m.domain.hi);
}

double default_delta(const SystemModel& m) { return m.name == "bmw" ? 5.0 : 0.01; }

std::filesystem::path output_dir(const RunConfig& c) {
  std::filesystem::path dir(c.out);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + c.out + ": " + ec.message());
  return dir;
}

nlohmann::json config_json(const RunConfig& c) {
  nlohmann::json j;
  j["system"] = c.system;
  j["formula"] = c.formula;
  j["ap"] = c.ap;
  j["horizon"] = c.horizon;
  j["delta"] = c.delta ? nlohmann::json(*c.delta) : nlohmann::json();
  j["epsilon"] = c.epsilon ? nlohmann::json(*c.epsilon) : nlohmann::json();
  j["lipschitz"] = c.lipschitz ? nlohmann::json(*c.lipschitz) : nlohmann::json();
  j["lebesgue"] = c.lebesgue;
  j["episodes"] = c.episodes ? nlohmann::json(*c.episodes) : nlohmann::json();
  j["seed"] = c.seed;
  j["kappa"] = c.kappa;
  j["reward"] = to_string(c.reward);
  j["out"] = c.out;
  j["x0"] = c.x0;
  j["policy"] = c.policy;
  j["deltas"] = c.deltas;
  j["rollouts"] = c.rollouts;
  j["minimize"] = c.minimize;
  j["restarts"] = c.uniform_restarts;
  j["params"] = c.params;
  return j;
}

nlohmann::json grid_json(const Grid& g) {
  nlohmann::json j;
  j["delta_target"] = g.delta_target;
  j["delta"] = g.delta;
  std::vector<double> width(g.width.data(), g.width.data() + g.width.size());
  j["width"] = width;
  j["counts"] = g.counts;
  j["cells"] = g.num_cells();
  return j;
}

/// Manifest shared by every command; `results` carries command-specific output.
void write_manifest(const std::filesystem::path& dir, const std::string& command, const RunConfig& c,
                    const Setup* setup, const nlohmann::json& results, const std::vector<std::string>& outputs) {
  nlohmann::json j;
  j["command"] = command;
  j["version"] = kVersion;
  j["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
               std::to_string(EIGEN_MINOR_VERSION);
  j["timestamp"] = utc_timestamp();
  j["config"] = config_json(c);
  if (setup) {
    j["system"] = {{"name", setup->model.name}, {"dim", setup->model.dim()}, {"inputs", setup->model.num_inputs()}};
    j["formula"] = to_string(setup->formula);
    j["automaton"] = {{"states", setup->dfa.num_states()},
                      {"d_q0", setup->dfa.distance(setup->dfa.initial())},
                      {"d_max", setup->dfa.max_distance()}};
    j["x0"] = std::vector<double>(setup->x0.data(), setup->x0.data() + setup->x0.size());
    if (setup->grid) j["grid"] = grid_json(*setup->grid);
    j["lipschitz"] = setup->lipschitz ? nlohmann::json(*setup->lipschitz) : nlohmann::json();
    j["lipschitz_source"] = setup->lipschitz_source;
    j["epsilon"] = setup->epsilon ? nlohmann::json(*setup->epsilon) : nlohmann::json();
  }
  j["results"] = results;
  j["outputs"] = outputs;
  std::ofstream f(dir / ("manifest_" + command + ".json"), std::ios::binary);
  if (!f) throw ConfigError("cannot write manifest in " + dir.string());
  f << j.dump(2) << '\n';
}

void require_episodes(const RunConfig& c, std::ostream& out) {
  if (c.system != "bmw") return;
  if (!c.episodes) throw ConfigError("bmw: --episodes must be given explicitly");
  out << "warning: tabular learning on the coarse 7-D bmw grid is experimental; no convergence guarantee applies\n";
}

std::uint64_t episodes_or_default(const RunConfig& c) { return c.episodes.value_or(1'000'000); }

void write_strategy_csv(const std::filesystem::path& path, const Setup& s, const Policy& policy) {
  csv::Writer w(path.string());
  w.header({"k", "cell_center", "q", "action_value"});
  const Grid& g = *s.grid;
  for (std::size_t k = 0; k < policy.horizon(); ++k) {
    for (std::size_t cell = 0; cell < g.num_cells(); ++cell) {
      const double center = g.center(cell)(0);
      for (std::size_t q = 0; q < s.dfa.num_states(); ++q) {
        w.row(k, center, q, s.model.inputs[policy(k, cell, q)](0));
      }
    }
  }
}

qlearn::TrainConfig train_config(const RunConfig& c) {
  qlearn::TrainConfig t;
  t.episodes = episodes_or_default(c);
  t.seed = c.seed;
  t.reward = {c.reward, c.kappa};
  return t;
}

Policy load_policy(const RunConfig& c, const Setup& s, std::size_t cells) {
  if (c.policy.empty()) throw ConfigError("--policy is required");
  const qlearn::QTable table = qlearn::read_qtable_csv(c.policy);
  if (table.num_cells() != cells || table.num_states() != s.dfa.num_states() ||
      table.num_inputs() != s.model.num_inputs()) {
    throw ConfigError(c.policy + ": Q-table shape does not match the configured system, grid and formula");
  }
  if (table.horizon() < c.horizon) throw ConfigError(c.policy + ": Q-table horizon shorter than --horizon");
  return qlearn::extract_policy(table);
}

}  // namespace

void RunConfig::validate() const {
  if (delta && epsilon) throw ConfigError("give exactly one of --delta and --epsilon");
  if (horizon == 0) throw ConfigError("--horizon must be >= 1");
  if (!(lebesgue > 0.0)) throw ConfigError("--lebesgue must be positive");
  if (!(kappa > 0.0)) throw ConfigError("--kappa must be positive");
  if (episodes && *episodes == 0) throw ConfigError("--episodes must be >= 1");
  for (double d : deltas) {
    if (!(d > 0.0)) throw ConfigError("--deltas entries must be positive");
  }
}

void apply_setting(const std::string& key, const std::string& value, RunConfig& c) {
  if (key.find('.') != std::string::npos) c.params[key] = trim(value);
  else if (key == "system") c.system = trim(value);
  else if (key == "formula") c.formula = trim(value);
  else if (key == "ap") c.ap = parse_names(value);
  else if (key == "horizon") c.horizon = parse_count(key, value);
  else if (key == "delta") c.delta = parse_positive(key, value), c.epsilon.reset();
  else if (key == "epsilon") c.epsilon = parse_positive(key, value), c.delta.reset();
  else if (key == "lipschitz") c.lipschitz = parse_positive(key, value);
  else if (key == "lebesgue") c.lebesgue = parse_positive(key, value);
  else if (key == "episodes") c.episodes = parse_count(key, value);
  else if (key == "seed") c.seed = parse_count(key, value);
  else if (key == "kappa") c.kappa = parse_positive(key, value);
  else if (key == "reward") c.reward = parse_reward_mode(trim(value));
  else if (key == "out") c.out = trim(value);
  else if (key == "x0") c.x0 = parse_list(value);
  else if (key == "policy") c.policy = trim(value);
  else if (key == "deltas") c.deltas = parse_list(value);
  else if (key == "rollouts") c.rollouts = parse_count(key, value);
  else if (key == "threads") c.threads = static_cast<unsigned>(parse_count(key, value));
  else if (key == "minimize") c.minimize = parse_bool(value);
  else if (key == "restarts") c.uniform_restarts = parse_bool(value);
  else throw ConfigError("unknown setting '" + key + "'");
}

void apply_config_file(const std::string& path, RunConfig& config) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(path + ":" + std::to_string(number) + ": expected key=value");
    apply_setting(trim(line.substr(0, eq)), line.substr(eq + 1), config);
  }
}

SystemModel make_system(const RunConfig& c) {
  static const std::string none;
  if (c.system == "room") {
    check_params(c, "room", {"eta", "beta", "gamma", "t_e", "t_h", "sigma", "lo", "hi", "inputs"});
    RoomParams p;
    override_double(c, "room.eta", p.eta);
    override_double(c, "room.beta", p.beta);
    override_double(c, "room.gamma", p.gamma);
    override_double(c, "room.t_e", p.t_e);
    override_double(c, "room.t_h", p.t_h);
    override_double(c, "room.sigma", p.sigma);
    override_double(c, "room.lo", p.lo);
    override_double(c, "room.hi", p.hi);
    if (c.params.count("room.inputs")) p.inputs = parse_list(c.params.at("room.inputs"));
    return make_room(p);
  }
  if (c.system == "traffic") {
    check_params(c, "traffic",
                 {"tau_hours", "speed", "length", "exit_ratio", "light_flow", "entry_flow", "sigma", "lo", "hi"});
    TrafficParams p;
    override_double(c, "traffic.tau_hours", p.tau_hours);
    override_double(c, "traffic.speed", p.speed);
    override_double(c, "traffic.length", p.length);
    override_double(c, "traffic.exit_ratio", p.exit_ratio);
    override_double(c, "traffic.light_flow", p.light_flow);
    override_double(c, "traffic.entry_flow", p.entry_flow);
    override_double(c, "traffic.sigma", p.sigma);
    override_double(c, "traffic.lo", p.lo);
    override_double(c, "traffic.hi", p.hi);
    return make_traffic(p);
  }
  if (c.system == "bmw") {
    check_params(c, "bmw", {"obstacle", "goal", "noise", "steer_levels", "accel_levels", "car_length", "car_width"});
    BmwScenario s;
    if (c.params.count("bmw.obstacle")) s.obstacle = parse_rect("bmw.obstacle", c.params.at("bmw.obstacle"));
    if (c.params.count("bmw.goal")) s.goal = parse_rect("bmw.goal", c.params.at("bmw.goal"));
    override_double(c, "bmw.noise", s.noise);
    override_double(c, "bmw.car_length", s.car_length);
    override_double(c, "bmw.car_width", s.car_width);
    if (c.params.count("bmw.steer_levels")) s.steer_levels = static_cast<int>(csv::to_int(param(c, "bmw.steer_levels", none)));
    if (c.params.count("bmw.accel_levels")) s.accel_levels = static_cast<int>(csv::to_int(param(c, "bmw.accel_levels", none)));
    return make_bmw(s);
  }
  return make_custom(c.system);
}

Setup make_setup(const RunConfig& c, bool need_grid) {
  c.validate();
  SystemModel model = make_system(c);
  const std::vector<std::string> ap = c.ap.empty() ? model.ap : c.ap;
  Formula formula = parse(c.formula.empty() ? default_formula(c) : c.formula, ap);
  if (formula.ap != model.ap) throw ConfigError("--ap must match the system's propositions (" + model.name + ")");
  Dfa dfa = compile(formula, {c.minimize});

  Vector x0 = c.x0.empty() ? default_x0(model) : Eigen::Map<const Vector>(c.x0.data(), static_cast<Eigen::Index>(c.x0.size()));
  if (x0.size() != model.dim()) throw ConfigError("--x0 needs " + std::to_string(model.dim()) + " coordinates");
  if (!model.domain.contains(x0)) throw ConfigError("--x0 lies outside the state domain");

  Setup s{std::move(model), std::move(formula), std::move(dfa), std::move(x0), std::nullopt, std::nullopt, "", std::nullopt};
  if (c.lipschitz) {
    s.lipschitz = *c.lipschitz;
    s.lipschitz_source = "flag";
  } else if (s.model.linear_gaussian) {
    s.lipschitz = lipschitz_linear_gaussian(*s.model.linear_gaussian);
    s.lipschitz_source = "linear-gaussian closed form";
  }
  if (!need_grid) return s;

  const auto horizon = static_cast<double>(c.horizon);
  double delta;
  if (c.epsilon) {
    if (!s.lipschitz) throw ConfigError("--epsilon needs a Lipschitz constant (--lipschitz) for " + s.model.name);
    delta = delta_for_epsilon(*c.epsilon, horizon, *s.lipschitz, c.lebesgue);
  } else {
    delta = c.delta.value_or(default_delta(s.model));
  }
  s.grid = build_grid(s.model.domain, delta);
  if (s.lipschitz) s.epsilon = epsilon_bound(horizon, s.grid->delta, *s.lipschitz, c.lebesgue);
  return s;
}

int cmd_compile(const RunConfig& c, std::ostream& out) {
  c.validate();
  std::vector<std::string> ap = c.ap;
  if (ap.empty()) ap = make_system(c).ap;
  const std::string text = c.formula.empty() ? default_formula(c) : c.formula;
  const Formula f = parse(text, ap);
  const Dfa dfa = compile(f, {c.minimize});

  const auto dir = output_dir(c);
  const auto dot = dir / "automaton.dot";
  {
    std::ofstream f_out(dot, std::ios::binary);
    if (!f_out) throw ConfigError("cannot write " + dot.string());
    f_out << to_dot(dfa);
  }
  const std::size_t without_sink = dfa.num_states() - (dfa.rejecting() ? 1 : 0);
  out << "formula: " << to_string(f) << '\n';
  out << "states: " << dfa.num_states() << " (" << without_sink << " excluding the rejecting sink)\n";
  out << "initial: q" << dfa.initial() << "  accepting: q" << dfa.accepting();
  if (dfa.rejecting()) out << "  rejecting: q" << *dfa.rejecting();
  out << '\n';
  out << "d(q0): " << dfa.distance(dfa.initial()) << "  d_max: " << dfa.max_distance() << '\n';
  out << "wrote " << dot.string() << '\n';

  nlohmann::json r{{"states", dfa.num_states()},
                   {"states_without_sink", without_sink},
                   {"d_q0", dfa.distance(dfa.initial())},
                   {"d_max", dfa.max_distance()}};
  write_manifest(dir, "compile", c, nullptr, r, {dot.filename().string()});
  return kExitOk;
}

int cmd_dp(const RunConfig& c, std::ostream& out) {
  const Setup s = make_setup(c);
  const FiniteMdp mdp = build_finite_mdp(s.model, *s.grid);
  const std::size_t initial = quantize(*s.grid, s.x0).cell;
  const dp::Result r = dp::value_iteration(mdp, s.dfa, c.horizon, initial);

  const auto dir = output_dir(c);
  dp::write_value_csv(r, (dir / "values.csv").string());
  out << "p_star: " << csv::format(r.p_star) << '\n';
  nlohmann::json res{{"p_star", r.p_star}, {"initial_cell", initial}};
  if (s.epsilon) {
    const Interval iv = policy_interval(r.p_star, *s.epsilon);
    out << "epsilon: " << csv::format(*s.epsilon) << "  [p_l, p_h]: [" << csv::format(iv.lo) << ", "
        << csv::format(iv.hi) << "]\n";
    res["p_l"] = iv.lo;
    res["p_h"] = iv.hi;
  }
  write_manifest(dir, "dp", c, &s, res, {"values.csv"});
  return kExitOk;
}

int cmd_train(const RunConfig& c, std::ostream& out) {
  require_episodes(c, out);
  const Setup s = make_setup(c);
  ContinuousEnvironment env(s.model, *s.grid, s.x0);
  env.set_uniform_restarts(c.uniform_restarts);
  const qlearn::TrainConfig tc = train_config(c);
  qlearn::QTable table = qlearn::train(env, s.dfa, c.horizon, tc);
  table.metadata["system"] = s.model.name;
  table.metadata["delta"] = csv::format(s.grid->delta);

  ContinuousEnvironment fixed(s.model, *s.grid, s.x0);
  const double p_r = qlearn::reported_value(table, fixed, s.dfa, tc.reward);

  const auto dir = output_dir(c);
  qlearn::write_qtable_csv(table, (dir / "qtable.csv").string());
  std::vector<std::string> outputs{"qtable.csv"};
  if (s.model.dim() == 1) {
    write_strategy_csv(dir / "strategy.csv", s, qlearn::extract_policy(table));
    outputs.push_back("strategy.csv");
  } else {
    out << "note: strategy heatmap CSV is only written for one-dimensional systems\n";
  }
  out << "p_r: " << csv::format(p_r) << '\n';
  write_manifest(dir, "train", c, &s, {{"p_r", p_r}, {"episodes", tc.episodes}}, outputs);
  return kExitOk;
}

int cmd_eval(const RunConfig& c, std::ostream& out) {
  const Setup s = make_setup(c);
  ContinuousEnvironment env(s.model, *s.grid, s.x0);
  const Policy policy = load_policy(c, s, env.num_cells());
  const std::uint64_t n = c.rollouts ? c.rollouts : 10'000;
  const qlearn::Evaluation ev = qlearn::evaluate(env, s.dfa, c.horizon, policy, n, c.seed, c.threads);

  const auto dir = output_dir(c);
  {
    csv::Writer w((dir / "evaluation.csv").string());
    w.header({"rollouts", "accepted", "p_hat", "half_width"});
    w.row(ev.rollouts, ev.accepted, ev.p_hat, ev.half_width);
  }
  out << "p_hat: " << csv::format(ev.p_hat) << " +/- " << csv::format(ev.half_width) << " (99%, " << n
      << " rollouts)\n";
  write_manifest(dir, "eval", c, &s,
                 {{"p_hat", ev.p_hat}, {"half_width", ev.half_width}, {"rollouts", ev.rollouts}, {"accepted", ev.accepted}},
                 {"evaluation.csv"});
  return kExitOk;
}

int cmd_sweep(const RunConfig& c, std::ostream& out) {
  require_episodes(c, out);
  const Setup base = make_setup(c, false);
  if (!base.model.linear_gaussian || base.model.dim() != 1) {
    throw UnsupportedError(base.model.name + ": sweep needs the explicit oracle (1-D linear-Gaussian systems)");
  }
  if (!base.lipschitz) throw ConfigError("sweep needs a Lipschitz constant");

  const auto dir = output_dir(c);
  csv::Writer w((dir / "sweep.csv").string());
  w.header({"delta", "p_r", "p_star", "epsilon", "p_l", "p_h"});
  nlohmann::json rows = nlohmann::json::array();
  const qlearn::TrainConfig tc = train_config(c);
  for (double delta : c.deltas) {
    const Grid grid = build_grid(base.model.domain, delta);
    const FiniteMdp mdp = build_finite_mdp(base.model, grid);
    const std::size_t initial = quantize(grid, base.x0).cell;
    const double p_star = dp::value_iteration(mdp, base.dfa, c.horizon, initial).p_star;

    ContinuousEnvironment env(base.model, grid, base.x0);
    env.set_uniform_restarts(c.uniform_restarts);
    const qlearn::QTable table = qlearn::train(env, base.dfa, c.horizon, tc);
    ContinuousEnvironment fixed(base.model, grid, base.x0);
    const double p_r = qlearn::reported_value(table, fixed, base.dfa, tc.reward);

    const double eps = epsilon_bound(static_cast<double>(c.horizon), grid.delta, *base.lipschitz, c.lebesgue);
    const Interval iv = policy_interval(p_star, eps);
    w.row(delta, p_r, p_star, eps, iv.lo, iv.hi);
    out << "delta " << csv::format(delta) << ": p_r " << csv::format(p_r) << "  p_star " << csv::format(p_star)
        << "  epsilon " << csv::format(eps) << '\n';
    rows.push_back({{"delta", delta}, {"realized_delta", grid.delta}, {"cells", grid.num_cells()}, {"p_r", p_r},
                    {"p_star", p_star}, {"epsilon", eps}, {"p_l", iv.lo}, {"p_h", iv.hi}});
  }
  write_manifest(dir, "sweep", c, &base, {{"rows", rows}, {"episodes", tc.episodes}}, {"sweep.csv"});
  return kExitOk;
}

int cmd_simulate(const RunConfig& c, std::ostream& out) {
  const Setup s = make_setup(c);
  ContinuousEnvironment env(s.model, *s.grid, s.x0);
  const Policy policy = load_policy(c, s, env.num_cells());
  const std::uint64_t n = c.rollouts ? c.rollouts : 100;

  const auto dir = output_dir(c);
  csv::Writer w((dir / "trajectories.csv").string());
  std::vector<std::string> head{"sim_id", "k"};
  for (Eigen::Index d = 0; d < s.model.dim(); ++d) head.push_back("x" + std::to_string(d + 1));
  w.header(head);

  Interpreter interp(env, s.dfa, c.horizon, {RewardMode::Sparse, c.kappa});
  std::uint64_t accepted = 0;
  auto emit = [&](std::uint64_t id, std::size_t k) {
    std::vector<std::string> cells{std::to_string(id), std::to_string(k)};
    for (Eigen::Index d = 0; d < env.state().size(); ++d) cells.push_back(csv::format(env.state()(d)));
    w.fields(cells);
  };
  for (std::uint64_t i = 0; i < n; ++i) {
    std::mt19937_64 rng = stream_rng(c.seed, i);
    double total = interp.reset(rng).reward;
    emit(i, 0);
    while (!interp.terminal()) {
      const ProductState& st = interp.state();
      const EpisodeStep step = interp.step(policy(st.k, st.cell, st.q), rng);
      total += step.reward;
      emit(i, step.next.k);
      if (env.out()) break;  // leaving the domain is absorbing
    }
    if (total > 0.5) ++accepted;
  }
  out << "simulated " << n << " rollouts, " << accepted << " accepted\n";
  write_manifest(dir, "simulate", c, &s, {{"rollouts", n}, {"accepted", accepted}}, {"trajectories.csv"});
  return kExitOk;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Controller synthesis for stochastic systems against bounded scLTL specifications"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  struct Flag {
    const char* name;
    const char* help;
    bool is_switch;
  };
  static const Flag flags[] = {
      {"system", "room, traffic, bmw, or a key=value system file", false},
      {"formula", "scLTL specification (defaults per system)", false},
      {"ap", "comma-separated proposition names", false},
      {"horizon", "episode horizon T", false},
      {"delta", "state discretisation parameter", false},
      {"epsilon", "target closeness; delta = epsilon / (T H L)", false},
      {"lipschitz", "Lipschitz constant H of the transition density", false},
      {"lebesgue", "Lebesgue measure factor L (default 1)", false},
      {"episodes", "training episodes", false},
      {"seed", "random seed", false},
      {"kappa", "reward-shaping constant", false},
      {"reward", "sparse or shaped", false},
      {"out", "output directory", false},
      {"x0", "comma-separated initial state", false},
      {"policy", "Q-table CSV written by train", false},
      {"deltas", "comma-separated delta list for sweep", false},
      {"rollouts", "rollouts for eval and simulate", false},
      {"threads", "evaluation threads (0 = all cores)", false},
      {"minimize", "minimise the automaton", true},
      {"restarts", "uniform random initial states while training", true},
  };

  std::string config_path;
  std::vector<std::string> params;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
  std::map<std::string, bool> switches;
  std::string command;

  for (const char* name : {"compile", "dp", "train", "eval", "sweep", "simulate"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->callback([&command, name] { command = name; });
    sub->add_option("--config", config_path, "key=value configuration file");
    sub->add_option("--param", params, "system parameter override, e.g. room.beta=0.03");
    for (const Flag& f : flags) {
      const std::string opt = std::string("--") + f.name;
      if (f.is_switch) {
        sub->add_flag(opt, switches[f.name], f.help);
      } else {
        sub->add_option(opt, values[f.name], f.help);
      }
    }
  }
  app.get_subcommand("compile")->description("compile a formula to an automaton (DOT) and report distances");
  app.get_subcommand("dp")->description("optimal satisfaction probability on the explicit abstraction");
  app.get_subcommand("train")->description("Q-learning over quantised observations");
  app.get_subcommand("eval")->description("Monte-Carlo evaluation of a learned policy");
  app.get_subcommand("sweep")->description("learning vs. optimum sweep over discretisation parameters");
  app.get_subcommand("simulate")->description("trajectories of the continuous system under a learned policy");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    RunConfig c;
    if (!config_path.empty()) apply_config_file(config_path, c);
    CLI::App* sub = app.get_subcommand(command);
    if (sub->count("--delta") && sub->count("--epsilon")) throw ConfigError("give exactly one of --delta and --epsilon");
    for (const Flag& f : flags) {
      const std::string opt = std::string("--") + f.name;
      if (!sub->count(opt)) continue;
      apply_setting(f.name, f.is_switch ? "true" : values[f.name], c);
    }
    for (const auto& p : params) {
      const auto eq = p.find('=');
      if (eq == std::string::npos || p.substr(0, eq).find('.') == std::string::npos) {
        throw ConfigError("--param expects <system>.<name>=<value>");
      }
      apply_setting(p.substr(0, eq), p.substr(eq + 1), c);
    }
    if (command == "compile") return cmd_compile(c, out);
    if (command == "dp") return cmd_dp(c, out);
    if (command == "train") return cmd_train(c, out);
    if (command == "eval") return cmd_eval(c, out);
    if (command == "sweep") return cmd_sweep(c, out);
    return cmd_simulate(c, out);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UnsupportedError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const EstimationError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  }
}

}  // namespace cosyn::cli
