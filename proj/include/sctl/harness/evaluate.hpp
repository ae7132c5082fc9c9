#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sctl/harness/config.hpp"
#include "sctl/harness/metrics.hpp"
#include "sctl/lqr.hpp"
#include "sctl/neural/gaussian_actor.hpp"

namespace sctl {

enum class PolicyKind { Uncontrolled, Lqr, Rl, LqrGuidedRl };

std::string to_string(PolicyKind kind);
PolicyKind parse_policy(const std::string& name);
bool is_learned(PolicyKind kind);

/// Observation -> raw action in [-1, 1].
using RawPolicy = std::function<double(const Eigen::VectorXd&)>;

/// Deterministic (mean-action) policy from a copy of `actor`.
template <typename Scalar>
RawPolicy deterministic_policy(const GaussianActor<Scalar>& actor) {
  return [actor](const Eigen::VectorXd& s) {
    const Vector<Scalar> in = s.template cast<Scalar>();
    return static_cast<double>(actor.deterministic(in)(0));
  };
}

struct EvalRun {
  std::uint64_t seed = 0;
  RunMetrics metrics;
  std::vector<TrajectoryRow> trajectory;
};

/// One closed-loop rollout on the true plant over `record`.
///   uncontrolled: u = 0            lqr: u = u*
///   rl: u = u_max tanh(mean)       lqr-guided-rl: u = u_max tanh(mean) + alpha u*
EvalRun rollout(PolicyKind kind, const RunConfig& cfg, const LqrPolicy& lqr, const RawPolicy& actor,
                std::span<const double> record, bool keep_trajectory);

/// Rollouts over Kanai-Tajimi records generated from `seeds`.
std::vector<EvalRun> evaluate(PolicyKind kind, const RunConfig& cfg, const LqrPolicy& lqr,
                              const RawPolicy& actor, std::span<const std::uint64_t> seeds,
                              bool keep_trajectory = false);

std::vector<RunMetrics> metrics_of(const std::vector<EvalRun>& runs);

}  // namespace sctl
