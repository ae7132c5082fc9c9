#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "sctl/harness/config.hpp"
#include "sctl/harness/metrics.hpp"
#include "sctl/lac/agent.hpp"
#include "sctl/lqr.hpp"

namespace sctl {

// Stream tags for seeds derived from the master seed.
namespace streams {
inline constexpr std::uint64_t kTrainExcitation = 1;
inline constexpr std::uint64_t kEvalExcitation = 2;
inline constexpr std::uint64_t kInit = 3;
inline constexpr std::uint64_t kActing = 4;
inline constexpr std::uint64_t kLearning = 5;
}  // namespace streams

std::uint64_t training_excitation_seed(const RunConfig& cfg, std::size_t episode);
/// eval.episodes seeds from a stream disjoint from the training stream.
std::vector<std::uint64_t> evaluation_seeds(const RunConfig& cfg);

LqrPolicy design_guidance(const RunConfig& cfg);

struct EpisodeLog {
  std::size_t episode = 0;
  std::uint64_t excitation_seed = 0;
  RunMetrics metrics;
  double episode_return = 0.0;
  std::size_t updates = 0;
  double critic_loss = 0.0;  // mean over the episode's updates
  double actor_loss = 0.0;
  double beta = 0.0;         // at episode end
  double lambda = 0.0;
};

struct LoggedTransition {
  std::size_t episode = 0;
  std::size_t step = 0;
  Eigen::VectorXd s;
  double u_tilde = 0.0;
  double r = 0.0;
  Eigen::VectorXd s_next;
  double a_next_hint = 0.0;
};

struct TrainOptions {
  bool guided = true;  // false: naive RL, alpha forced to 0
  bool keep_transitions = false;
  std::function<void(const EpisodeLog&)> on_episode;
};

template <typename Scalar>
struct TrainOutcome {
  LacAgent<Scalar> agent;
  LqrPolicy lqr;
  std::vector<EpisodeLog> episodes;
  std::vector<LoggedTransition> transitions;
  std::size_t stored = 0;
  std::size_t failed = 0;
};

/// LQR-guided (or naive) LAC training on the true plant. Deterministic in
/// (cfg, options.guided).
template <typename Scalar>
TrainOutcome<Scalar> train(const RunConfig& cfg, const TrainOptions& options);

extern template TrainOutcome<float> train<float>(const RunConfig&, const TrainOptions&);
extern template TrainOutcome<double> train<double>(const RunConfig&, const TrainOptions&);

/// Raises glibc's mmap threshold so per-update temporaries reuse heap memory
/// instead of fresh pages. No-op elsewhere.
void tune_allocator();

void write_training_csv(std::ostream& os, const std::vector<EpisodeLog>& episodes);

}  // namespace sctl
