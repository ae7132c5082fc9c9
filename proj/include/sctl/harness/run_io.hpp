#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <string>

#include "sctl/errors.hpp"
#include "sctl/harness/config.hpp"
#include "sctl/harness/evaluate.hpp"
#include "sctl/harness/train.hpp"
#include "sctl/lac/agent.hpp"
#include "sctl/neural/checkpoint.hpp"

namespace sctl {

namespace fs = std::filesystem;

// File names inside a run directory.
namespace run_files {
inline constexpr const char* kConfig = "config.txt";
inline constexpr const char* kLqr = "lqr.txt";
inline constexpr const char* kActor = "actor.ckpt";
inline constexpr const char* kCritic = "critic.ckpt";
inline constexpr const char* kTargetCritic = "target_critic.ckpt";
inline constexpr const char* kAgent = "agent.txt";
inline constexpr const char* kTraining = "training.csv";
}  // namespace run_files

void ensure_directory(const fs::path& dir);
void write_text_file(const fs::path& path, const std::string& text);
std::ofstream open_output(const fs::path& path, bool binary = false);
std::ifstream open_input(const fs::path& path, bool binary = false);

/// `key = value` lines (the agent sidecar and config formats).
std::map<std::string, std::string> read_key_values(const fs::path& path);

struct AgentSidecar {
  std::string config_hash;
  std::string precision;
  std::int64_t updates = 0;
  double log_beta = 0.0;
  double log_lambda = 0.0;
  AdamState<double> beta_opt{1, 3e-4};
  AdamState<double> lambda_opt{1, 3e-4};
};

void write_agent_sidecar(const fs::path& path, const AgentSidecar& side);
AgentSidecar read_agent_sidecar(const fs::path& path);

/// Actor, critic and target critic checkpoints (with optimizer state) plus
/// the text sidecar.
template <typename Scalar>
void save_agent(const fs::path& dir, const LacAgent<Scalar>& agent, const RunConfig& cfg) {
  ensure_directory(dir);
  {
    auto os = open_output(dir / run_files::kActor, true);
    write_checkpoint(os, agent.actor().trunk(), &agent.actor_optimizer());
  }
  {
    auto os = open_output(dir / run_files::kCritic, true);
    write_checkpoint(os, agent.critic(), &agent.critic_optimizer());
  }
  {
    auto os = open_output(dir / run_files::kTargetCritic, true);
    write_checkpoint(os, agent.target_critic());
  }
  AgentSidecar side;
  side.config_hash = cfg.hash();
  side.precision = to_string(cfg.precision);
  side.updates = agent.update_count();
  side.log_beta = agent.beta().log_value;
  side.log_lambda = agent.lambda().log_value;
  side.beta_opt = agent.beta().opt;
  side.lambda_opt = agent.lambda().opt;
  write_agent_sidecar(dir / run_files::kAgent, side);
}

template <typename Scalar>
GaussianActor<Scalar> load_actor(const fs::path& dir) {
  auto is = open_input(dir / run_files::kActor, true);
  return GaussianActor<Scalar>(read_checkpoint<Scalar>(is));
}

template <typename Scalar>
LacAgent<Scalar> load_agent(const fs::path& dir, const RunConfig& cfg) {
  Rng unused(0);
  LacAgent<Scalar> agent(static_cast<Eigen::Index>(cfg.state_dim()), cfg.lac, unused);
  {
    auto is = open_input(dir / run_files::kActor, true);
    agent.actor() = GaussianActor<Scalar>(read_checkpoint<Scalar>(is, &agent.actor_optimizer()));
  }
  {
    auto is = open_input(dir / run_files::kCritic, true);
    agent.critic() = read_checkpoint<Scalar>(is, &agent.critic_optimizer());
  }
  {
    auto is = open_input(dir / run_files::kTargetCritic, true);
    agent.target_critic() = read_checkpoint<Scalar>(is);
  }
  const AgentSidecar side = read_agent_sidecar(dir / run_files::kAgent);
  agent.beta().log_value = side.log_beta;
  agent.beta().opt = side.beta_opt;
  agent.lambda().log_value = side.log_lambda;
  agent.lambda().opt = side.lambda_opt;
  agent.set_update_count(side.updates);
  return agent;
}

/// Mean-action policy from a run directory, evaluated in the run's precision.
RawPolicy load_policy(const fs::path& dir);

/// Precision-erased result of a training run.
struct TrainedRun {
  LqrPolicy lqr;
  std::vector<EpisodeLog> episodes;
  RawPolicy policy;
  std::size_t stored = 0;
  std::size_t failed = 0;
};

/// Trains in cfg.precision. With `save_dir`, writes the agent checkpoints,
/// config snapshot, LQR record and training log there.
TrainedRun train_run(const RunConfig& cfg, const TrainOptions& options, const fs::path* save_dir = nullptr);

}  // namespace sctl
