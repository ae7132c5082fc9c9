#include "sctl/harness/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "sctl/errors.hpp"
#include "sctl/text.hpp"

namespace sctl {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_real(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double out = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw InputError("config: '" + key + "' expects a number, got '" + v + "'");
  }
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw InputError("config: '" + key + "' expects a non-negative integer, got '" + v + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw InputError("config: '" + key + "' expects true/false, got '" + v + "'");
}

std::string join_sizes(const std::vector<Eigen::Index>& sizes) {
  std::string out;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(sizes[i]);
  }
  return out;
}

std::vector<Eigen::Index> parse_sizes(const std::string& key, const std::string& v) {
  std::vector<Eigen::Index> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    out.push_back(static_cast<Eigen::Index>(parse_uint(key, trim(item))));
  }
  if (out.empty()) throw InputError("config: '" + key + "' needs at least one width");
  return out;
}

std::string b2s(bool b) { return b ? "true" : "false"; }

}  // namespace

std::string to_string(Precision p) { return p == Precision::Float32 ? "float32" : "float64"; }

std::size_t RunConfig::steps_per_episode() const {
  return static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
}

KanaiTajimiParams RunConfig::excitation() const {
  KanaiTajimiParams p;
  p.omega_g = kt_omega_g;
  p.zeta_g = kt_zeta_g;
  p.intensity = kt_intensity;
  p.dt = dt;
  p.duration = horizon;
  p.substeps = substeps;
  return p;
}

Integrator RunConfig::integrator() const { return {dt, substeps, divergence_bound}; }

void RunConfig::validate() const {
  assumed.validate();
  plant.validate();
  if (assumed.k3 != 0.0) throw InputError("assumed model must be linear (k3 = 0)");
  excitation().validate();
  lac.validate();
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InputError("alpha must lie in [0, 1]");
  if (history < 1) throw InputError("history length must be >= 1");
  if (episodes < 1) throw InputError("episodes must be >= 1");
  if (!(u_max >= 0.0) || !std::isfinite(u_max)) throw InputError("u_max must be >= 0");
  if (!(u_clamp >= 0.0)) throw InputError("u_clamp must be >= 0");
  for (double w : reward_weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InputError("reward weights must be >= 0");
  }
  if (!(lqr_r > 0.0)) throw InputError("lqr.r must be positive");
  if (!(divergence_bound > 0.0)) throw InputError("divergence_bound must be positive");
  if (eval_episodes < 1) throw InputError("eval.episodes must be >= 1");
  if (static_cast<double>(steps_per_episode()) * dt < horizon - 1e-9) {
    throw InputError("dt * steps does not cover the horizon");
  }
}

const std::map<std::string, std::string>& RunConfig::schema() {
  static const std::map<std::string, std::string> s{
      {"seed", "master seed (integer)"},
      {"episodes", "training simulations"},
      {"horizon", "episode length T in seconds"},
      {"dt", "control interval in seconds"},
      {"substeps", "RK4 sub-steps per control interval"},
      {"alpha", "LQR guidance weight in [0, 1]"},
      {"history", "response history length l"},
      {"u_max", "force per unit of actor output"},
      {"u_clamp", "symmetric clamp on the applied force (0 = off)"},
      {"divergence_bound", "|x| that aborts an episode"},
      {"reward.w1", "displacement weight"},
      {"reward.w2", "acceleration weight"},
      {"reward.w3", "control-force weight"},
      {"init.x", "initial displacement"},
      {"init.v", "initial velocity"},
      {"assumed.m", "assumed-model mass"},
      {"assumed.c", "assumed-model damping"},
      {"assumed.k", "assumed-model stiffness"},
      {"plant.m", "true-plant mass"},
      {"plant.c", "true-plant damping"},
      {"plant.k", "true-plant stiffness"},
      {"plant.k3", "true-plant cubic stiffness"},
      {"kt.omega_g", "Kanai-Tajimi natural frequency (rad/s)"},
      {"kt.zeta_g", "Kanai-Tajimi damping ratio"},
      {"kt.intensity", "white-noise spectral intensity S0"},
      {"lqr.q11", "LQR state weight Q(0,0)"},
      {"lqr.q12", "LQR state weight Q(0,1) = Q(1,0)"},
      {"lqr.q22", "LQR state weight Q(1,1)"},
      {"lqr.r", "LQR input weight"},
      {"lac.gamma", "discount factor"},
      {"lac.tau", "Polyak rate"},
      {"lac.alpha3", "Lyapunov decrease margin"},
      {"lac.target_entropy", "target entropy H_t"},
      {"lac.lr_actor", "actor learning rate"},
      {"lac.lr_critic", "critic learning rate"},
      {"lac.lr_dual", "beta/lambda learning rate"},
      {"lac.init_beta", "initial entropy multiplier"},
      {"lac.init_lambda", "initial Lyapunov multiplier"},
      {"lac.lambda_max", "upper bound on the Lyapunov multiplier"},
      {"lac.hidden", "comma-separated hidden widths"},
      {"lac.critic_features", "critic output width"},
      {"lac.leak", "leaky-ReLU slope"},
      {"lac.batch_size", "minibatch size"},
      {"lac.warmup", "transitions stored before learning starts"},
      {"lac.replay_capacity", "replay buffer capacity"},
      {"lac.literal_critic_target", "undiscounted target with the online critic"},
      {"lac.stored_next_action", "use the stored next action for the critic target"},
      {"precision", "network arithmetic: float32 or float64"},
      {"eval.episodes", "held-out evaluation seeds"},
      {"out", "output directory"},
  };
  return s;
}

void RunConfig::set(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  auto real = [&] { return parse_real(key, v); };
  auto uint = [&] { return parse_uint(key, v); };
  if (key == "seed") seed = uint();
  else if (key == "episodes") episodes = uint();
  else if (key == "horizon") horizon = real();
  else if (key == "dt") dt = real();
  else if (key == "substeps") substeps = static_cast<int>(uint());
  else if (key == "alpha") alpha = real();
  else if (key == "history") history = uint();
  else if (key == "u_max") u_max = real();
  else if (key == "u_clamp") u_clamp = real();
  else if (key == "divergence_bound") divergence_bound = real();
  else if (key == "reward.w1") reward_weights[0] = real();
  else if (key == "reward.w2") reward_weights[1] = real();
  else if (key == "reward.w3") reward_weights[2] = real();
  else if (key == "init.x") initial_state.x = real();
  else if (key == "init.v") initial_state.v = real();
  else if (key == "assumed.m") assumed.m = real();
  else if (key == "assumed.c") assumed.c = real();
  else if (key == "assumed.k") assumed.k = real();
  else if (key == "plant.m") plant.m = real();
  else if (key == "plant.c") plant.c = real();
  else if (key == "plant.k") plant.k = real();
  else if (key == "plant.k3") plant.k3 = real();
  else if (key == "kt.omega_g") kt_omega_g = real();
  else if (key == "kt.zeta_g") kt_zeta_g = real();
  else if (key == "kt.intensity") kt_intensity = real();
  else if (key == "lqr.q11") lqr_q(0, 0) = real();
  else if (key == "lqr.q12") lqr_q(0, 1) = lqr_q(1, 0) = real();
  else if (key == "lqr.q22") lqr_q(1, 1) = real();
  else if (key == "lqr.r") lqr_r = real();
  else if (key == "lac.gamma") lac.gamma = real();
  else if (key == "lac.tau") lac.tau = real();
  else if (key == "lac.alpha3") lac.alpha3 = real();
  else if (key == "lac.target_entropy") lac.target_entropy = real();
  else if (key == "lac.lr_actor") lac.lr_actor = real();
  else if (key == "lac.lr_critic") lac.lr_critic = real();
  else if (key == "lac.lr_dual") lac.lr_dual = real();
  else if (key == "lac.init_beta") lac.init_beta = real();
  else if (key == "lac.init_lambda") lac.init_lambda = real();
  else if (key == "lac.lambda_max") lac.lambda_max = real();
  else if (key == "lac.hidden") lac.hidden = parse_sizes(key, v);
  else if (key == "lac.critic_features") lac.critic_features = static_cast<Eigen::Index>(uint());
  else if (key == "lac.leak") lac.leak = real();
  else if (key == "lac.batch_size") lac.batch_size = uint();
  else if (key == "lac.warmup") lac.warmup = uint();
  else if (key == "lac.replay_capacity") lac.replay_capacity = uint();
  else if (key == "lac.literal_critic_target") lac.literal_critic_target = parse_bool(key, v);
  else if (key == "lac.stored_next_action") lac.stored_next_action = parse_bool(key, v);
  else if (key == "precision") {
    if (v == "float32") precision = Precision::Float32;
    else if (v == "float64") precision = Precision::Float64;
    else throw InputError("config: precision must be float32 or float64");
  } else if (key == "eval.episodes") eval_episodes = uint();
  else if (key == "out") out_dir = v;
  else throw InputError("config: unknown key '" + key + "'");
}

std::map<std::string, std::string> RunConfig::to_map() const {
  auto r = [](double x) { return format_exact(x); };
  return {
      {"seed", std::to_string(seed)},
      {"episodes", std::to_string(episodes)},
      {"horizon", r(horizon)},
      {"dt", r(dt)},
      {"substeps", std::to_string(substeps)},
      {"alpha", r(alpha)},
      {"history", std::to_string(history)},
      {"u_max", r(u_max)},
      {"u_clamp", r(u_clamp)},
      {"divergence_bound", r(divergence_bound)},
      {"reward.w1", r(reward_weights[0])},
      {"reward.w2", r(reward_weights[1])},
      {"reward.w3", r(reward_weights[2])},
      {"init.x", r(initial_state.x)},
      {"init.v", r(initial_state.v)},
      {"assumed.m", r(assumed.m)},
      {"assumed.c", r(assumed.c)},
      {"assumed.k", r(assumed.k)},
      {"plant.m", r(plant.m)},
      {"plant.c", r(plant.c)},
      {"plant.k", r(plant.k)},
      {"plant.k3", r(plant.k3)},
      {"kt.omega_g", r(kt_omega_g)},
      {"kt.zeta_g", r(kt_zeta_g)},
      {"kt.intensity", r(kt_intensity)},
      {"lqr.q11", r(lqr_q(0, 0))},
      {"lqr.q12", r(lqr_q(0, 1))},
      {"lqr.q22", r(lqr_q(1, 1))},
      {"lqr.r", r(lqr_r)},
      {"lac.gamma", r(lac.gamma)},
      {"lac.tau", r(lac.tau)},
      {"lac.alpha3", r(lac.alpha3)},
      {"lac.target_entropy", r(lac.target_entropy)},
      {"lac.lr_actor", r(lac.lr_actor)},
      {"lac.lr_critic", r(lac.lr_critic)},
      {"lac.lr_dual", r(lac.lr_dual)},
      {"lac.init_beta", r(lac.init_beta)},
      {"lac.init_lambda", r(lac.init_lambda)},
      {"lac.lambda_max", r(lac.lambda_max)},
      {"lac.hidden", join_sizes(lac.hidden)},
      {"lac.critic_features", std::to_string(lac.critic_features)},
      {"lac.leak", r(lac.leak)},
      {"lac.batch_size", std::to_string(lac.batch_size)},
      {"lac.warmup", std::to_string(lac.warmup)},
      {"lac.replay_capacity", std::to_string(lac.replay_capacity)},
      {"lac.literal_critic_target", b2s(lac.literal_critic_target)},
      {"lac.stored_next_action", b2s(lac.stored_next_action)},
      {"precision", to_string(precision)},
      {"eval.episodes", std::to_string(eval_episodes)},
      {"out", out_dir},
  };
}

std::string RunConfig::to_text() const {
  std::string out;
  for (const auto& [k, v] : to_map()) out += k + " = " + v + "\n";
  return out;
}

RunConfig RunConfig::from_text(const std::string& text) {
  RunConfig cfg;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line.erase(hash_pos);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InputError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    cfg.set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str());
}

std::string RunConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : to_text()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace sctl
