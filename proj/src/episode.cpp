#include "sctl/harness/episode.hpp"

#include <algorithm>
#include <cmath>

#include "sctl/errors.hpp"

namespace sctl {

double compute_reward(double x, double xddot, double u, const std::array<double, 3>& w) {
  return -(w[0] * std::abs(x) + w[1] * std::abs(xddot) + w[2] * std::abs(u));
}

double hybrid_action(double raw, double u_max, double alpha, double lqr_u, double clamp) {
  const double u = u_max * raw + alpha * lqr_u;
  return clamp > 0.0 ? std::clamp(u, -clamp, clamp) : u;
}

HistoryWindow::HistoryWindow(std::size_t length) : length_(length) {
  if (length == 0) throw InputError("history length must be >= 1");
  reset();
}

void HistoryWindow::reset() {
  accel_.assign(length_, 0.0);
  ground_.assign(length_, 0.0);
  u_tilde_.assign(length_, 0.0);
  u_star_.assign(length_, 0.0);
}

void HistoryWindow::push(double accel, double ground_accel, double u_tilde, double u_star) {
  auto roll = [](std::deque<double>& d, double v) {
    d.pop_front();
    d.push_back(v);
  };
  roll(accel_, accel);
  roll(ground_, ground_accel);
  roll(u_tilde_, u_tilde);
  roll(u_star_, u_star);
}

Eigen::VectorXd build_state(const HistoryWindow& h) {
  const auto l = static_cast<Eigen::Index>(h.length());
  Eigen::VectorXd s(4 * l);
  const std::deque<double>* parts[4] = {&h.accel(), &h.ground_accel(), &h.u_tilde(), &h.u_star()};
  for (Eigen::Index p = 0; p < 4; ++p) {
    for (Eigen::Index i = 0; i < l; ++i) s(p * l + i) = (*parts[p])[static_cast<std::size_t>(i)];
  }
  return s;
}

ControlEnv::ControlEnv(const RunConfig& cfg, const LqrPolicy& lqr)
    : cfg_(&cfg), lqr_(&lqr), integ_(cfg.integrator()), window_(cfg.history) {
  observation_ = build_state(window_);
}

void ControlEnv::reset(std::span<const double> record) {
  record_.assign(record.begin(), record.end());
  plant_ = cfg_->initial_state;
  window_.reset();
  // Episode start: response/action histories are zero, the guidance entry
  // reflects the initial state.
  window_.push(0.0, 0.0, 0.0, guidance());
  observation_ = build_state(window_);
  k_ = 0;
}

double ControlEnv::guidance() const { return lqr_force(*lqr_, plant_.x, plant_.v); }

ControlEnv::Step ControlEnv::step(double u_tilde, double alpha) {
  if (done()) throw InputError("ControlEnv::step past the end of the episode");
  Step out;
  out.ground = record_[k_];
  out.u = hybrid_action(u_tilde, cfg_->u_max, alpha, guidance(), cfg_->u_clamp);
  const StepResult r = advance(plant_, out.u, out.ground, cfg_->plant, integ_, k_);
  plant_ = r.state;
  out.plant = plant_;
  out.accel = r.acceleration;
  out.u_star = guidance();
  out.reward = compute_reward(plant_.x, out.accel, out.u, cfg_->reward_weights);
  window_.push(out.accel, out.ground, u_tilde, out.u_star);
  observation_ = build_state(window_);
  ++k_;
  return out;
}

}  // namespace sctl
