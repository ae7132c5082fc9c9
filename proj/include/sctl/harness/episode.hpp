#pragma once

#include <Eigen/Dense>
#include <array>
#include <deque>
#include <span>
#include <vector>

#include "sctl/dynamics.hpp"
#include "sctl/harness/config.hpp"
#include "sctl/lqr.hpp"

namespace sctl {

/// r = -(w1 |x| + w2 |x''| + w3 |u|)
double compute_reward(double x, double xddot, double u, const std::array<double, 3>& w);

/// u = u_max * raw + alpha * lqr_u, clamped to +-clamp when clamp > 0.
double hybrid_action(double raw, double u_max, double alpha, double lqr_u, double clamp = 0.0);

/// Rolling length-l windows of x'', xg'', u_tilde and u*, zero-filled at
/// episode start.
class HistoryWindow {
 public:
  explicit HistoryWindow(std::size_t length);

  void reset();
  void push(double accel, double ground_accel, double u_tilde, double u_star);

  std::size_t length() const { return length_; }
  const std::deque<double>& accel() const { return accel_; }
  const std::deque<double>& ground_accel() const { return ground_; }
  const std::deque<double>& u_tilde() const { return u_tilde_; }
  const std::deque<double>& u_star() const { return u_star_; }

 private:
  std::size_t length_;
  std::deque<double> accel_, ground_, u_tilde_, u_star_;
};

/// [x'' history, xg'' history, u_tilde history, u* history], each oldest to
/// newest; length 4 l.
Eigen::VectorXd build_state(const HistoryWindow& h);

/// The closed loop seen by a learner: true plant, one excitation record,
/// the LQR guidance and the observation window.
///
/// Step k (0-based) holds the applied force and excitation sample k over
/// [t_k, t_k+1]. After the step the window receives x''_{k+1}, xg''_{k+1},
/// the raw action u_tilde_k and u*_{k+1}, so the u_tilde history trails
/// the response histories by one sample.
class ControlEnv {
 public:
  struct Step {
    double u = 0.0;         // applied force u_k
    double u_star = 0.0;    // guidance at the new state
    double accel = 0.0;     // x'' at the new state
    double ground = 0.0;    // excitation sample applied over the step
    double reward = 0.0;
    PlantState plant;
  };

  ControlEnv(const RunConfig& cfg, const LqrPolicy& lqr);

  /// Starts a new episode on `record` (one sample per step).
  void reset(std::span<const double> record);

  const Eigen::VectorXd& observation() const { return observation_; }
  const PlantState& plant_state() const { return plant_; }
  /// u* at the current plant state.
  double guidance() const;
  std::size_t step_index() const { return k_; }
  std::size_t horizon_steps() const { return record_.size(); }
  bool done() const { return k_ >= record_.size(); }

  /// Applies u = hybrid_action(u_tilde, u_max, alpha, u*) and advances the
  /// plant. Throws DivergenceError on blow-up.
  Step step(double u_tilde, double alpha);

 private:
  const RunConfig* cfg_;
  const LqrPolicy* lqr_;
  Integrator integ_;
  std::vector<double> record_;
  PlantState plant_{};
  HistoryWindow window_;
  Eigen::VectorXd observation_;
  std::size_t k_ = 0;
};

}  // namespace sctl
