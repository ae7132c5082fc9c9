#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "sctl/lac/replay.hpp"
#include "sctl/neural/adam.hpp"
#include "sctl/neural/gaussian_actor.hpp"
#include "sctl/neural/mlp.hpp"
#include "sctl/rng.hpp"

namespace sctl {

struct LacConfig {
  double gamma = 0.998;
  double tau = 0.005;
  double alpha3 = 0.5;
  double target_entropy = -1.0;
  double lr_actor = 1e-4;
  double lr_critic = 3e-4;
  double lr_dual = 3e-4;
  double init_beta = 1.0;
  double init_lambda = 1.0;
  double lambda_max = 1.0;
  std::vector<Eigen::Index> hidden{256, 256, 256};
  Eigen::Index critic_features = 16;
  double leak = 0.01;
  std::size_t batch_size = 256;
  std::size_t warmup = 1000;
  std::size_t replay_capacity = 100000;
  // -r + L_phi(s', a') without discount or target network.
  bool literal_critic_target = false;
  // Use the stored next action instead of a fresh actor sample for a'.
  bool stored_next_action = false;

  void validate() const;
};

inline void LacConfig::validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw InputError("gamma must lie in [0, 1]");
  if (!(tau >= 0.0 && tau <= 1.0)) throw InputError("tau must lie in [0, 1]");
  if (!(lr_actor > 0.0 && lr_critic > 0.0 && lr_dual > 0.0)) throw InputError("learning rates must be positive");
  if (!(init_beta >= 0.0 && init_lambda >= 0.0)) throw InputError("initial beta/lambda must be >= 0");
  if (!(lambda_max > 0.0)) throw InputError("lambda_max must be positive");
  if (hidden.empty()) throw InputError("at least one hidden layer required");
  for (auto h : hidden) {
    if (h < 1) throw InputError("hidden layer widths must be positive");
  }
  if (critic_features < 1) throw InputError("critic_features must be positive");
  if (!(leak > 0.0 && leak < 1.0)) throw InputError("leak must lie in (0, 1)");
  if (batch_size < 1 || replay_capacity < 1) throw InputError("batch size and replay capacity must be positive");
}

/// Nonnegative multiplier adapted by Adam on its logarithm, capped at
/// max_value. A value of exactly zero (log = -inf) is absorbing.
struct DualVariable {
  double log_value = 0.0;
  AdamState<double> opt{1, 3e-4};
  double max_value = std::numeric_limits<double>::infinity();

  DualVariable() = default;
  DualVariable(double value, double lr, double cap = std::numeric_limits<double>::infinity())
      : log_value(to_log(std::min(value, cap))), opt(1, lr), max_value(cap) {}

  double value() const { return std::exp(log_value); }
  void set(double value) { log_value = to_log(value); }

  /// Gradient ascent on log(value) along `signal`.
  void ascend(double signal) {
    if (std::isinf(log_value) && log_value < 0) return;
    Eigen::Matrix<double, 1, 1> p(log_value), g(-signal);
    adam_step<double>(p, g, opt);
    log_value = std::min(p(0), std::log(max_value));
  }

 private:
  static double to_log(double v) {
    if (v < 0.0) throw InputError("dual variable must be >= 0");
    return v == 0.0 ? -std::numeric_limits<double>::infinity() : std::log(v);
  }
};

/// Lyapunov actor-critic learner. The critic f_phi(s, a) is a feature
/// network and the Lyapunov value is its squared norm.
template <typename Scalar>
class LacAgent {
 public:
  using MatrixT = Matrix<Scalar>;
  using VectorT = Vector<Scalar>;
  using RowT = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;
  using Sample = typename GaussianActor<Scalar>::Sample;

  struct CriticPass {
    typename Mlp<Scalar>::Tape tape;
    MatrixT features;
    RowT value;
  };

  struct ActorObjective {
    Scalar loss = 0;
    VectorT grad;
    double mean_entropy_term = 0;   // mean(log pi + H_t)
    double mean_decrease_term = 0;  // mean(L(s', a') - L(s, u) + alpha3 c)
  };

  struct UpdateStats {
    double critic_loss = 0;
    double actor_loss = 0;
    double beta = 0;
    double lambda = 0;
    double entropy_term = 0;
    double decrease_term = 0;
  };

  LacAgent() = default;

  LacAgent(Eigen::Index state_dim, const LacConfig& cfg, Rng& init_rng)
      : cfg_(cfg),
        actor_(state_dim, cfg.hidden, static_cast<Scalar>(cfg.leak)),
        critic_(critic_sizes(state_dim, cfg), static_cast<Scalar>(cfg.leak)),
        beta_(cfg.init_beta, cfg.lr_dual),
        lambda_(cfg.init_lambda, cfg.lr_dual, cfg.lambda_max) {
    cfg_.validate();
    actor_.trunk().initialize(init_rng);
    critic_.initialize(init_rng);
    target_critic_ = critic_;
    actor_opt_ = AdamState<Scalar>(actor_.trunk().param_count(), cfg.lr_actor);
    critic_opt_ = AdamState<Scalar>(critic_.param_count(), cfg.lr_critic);
  }

  const LacConfig& config() const { return cfg_; }
  LacConfig& config() { return cfg_; }
  Eigen::Index state_dim() const { return actor_.state_size(); }

  GaussianActor<Scalar>& actor() { return actor_; }
  const GaussianActor<Scalar>& actor() const { return actor_; }
  Mlp<Scalar>& critic() { return critic_; }
  const Mlp<Scalar>& critic() const { return critic_; }
  Mlp<Scalar>& target_critic() { return target_critic_; }
  const Mlp<Scalar>& target_critic() const { return target_critic_; }
  AdamState<Scalar>& actor_optimizer() { return actor_opt_; }
  const AdamState<Scalar>& actor_optimizer() const { return actor_opt_; }
  AdamState<Scalar>& critic_optimizer() { return critic_opt_; }
  const AdamState<Scalar>& critic_optimizer() const { return critic_opt_; }
  DualVariable& beta() { return beta_; }
  const DualVariable& beta() const { return beta_; }
  DualVariable& lambda() { return lambda_; }
  const DualVariable& lambda() const { return lambda_; }
  std::int64_t update_count() const { return updates_; }
  void set_update_count(std::int64_t n) { updates_ = n; }

  // ---- Lyapunov critic ----

  static MatrixT critic_input(const Eigen::Ref<const MatrixT>& states, const Eigen::Ref<const RowT>& actions) {
    if (states.cols() != actions.cols()) throw ShapeError("critic input: one action per state required");
    MatrixT in(states.rows() + 1, states.cols());
    in.topRows(states.rows()) = states;
    in.bottomRows(1) = actions;
    return in;
  }

  /// L(s, a) = |f(s, a)|^2 per column.
  static RowT lyapunov(const Mlp<Scalar>& net, const Eigen::Ref<const MatrixT>& states,
                       const Eigen::Ref<const RowT>& actions) {
    return net.forward(critic_input(states, actions)).colwise().squaredNorm();
  }

  static CriticPass critic_forward(const Mlp<Scalar>& net, const Eigen::Ref<const MatrixT>& states,
                                   const Eigen::Ref<const RowT>& actions) {
    CriticPass pass;
    pass.features = net.forward(critic_input(states, actions), pass.tape);
    pass.value = pass.features.colwise().squaredNorm();
    return pass;
  }

  Scalar lyapunov_value(const Eigen::Ref<const VectorT>& state, Scalar action) const {
    RowT a(1);
    a(0) = action;
    return lyapunov(critic_, state, a)(0);
  }

  /// -r + gamma L_target(s', a'), or -r + L_phi(s', a') in literal mode.
  RowT critic_target(const Batch<Scalar>& batch, const Eigen::Ref<const RowT>& next_actions) const {
    if (cfg_.literal_critic_target) {
      return (-batch.r.array() + lyapunov(critic_, batch.s_next, next_actions).array()).matrix();
    }
    const Scalar g = static_cast<Scalar>(cfg_.gamma);
    return (-batch.r.array() + g * lyapunov(target_critic_, batch.s_next, next_actions).array()).matrix();
  }

  /// mean 1/2 (L - y)^2 over the columns of a critic pass and dJ/df = 2 f (L - y) / n.
  static std::pair<Scalar, MatrixT> critic_upstream(const Eigen::Ref<const MatrixT>& features,
                                                    const Eigen::Ref<const RowT>& value,
                                                    const Eigen::Ref<const RowT>& targets) {
    const auto n = value.cols();
    if (n == 0) throw InputError("critic_update: empty batch");
    const RowT diff = value - targets;
    const Scalar loss = Scalar(0.5) * diff.squaredNorm() / static_cast<Scalar>(n);
    MatrixT upstream = features * (Scalar(2) / static_cast<Scalar>(n));
    upstream.array().rowwise() *= diff.array();
    return {loss, std::move(upstream)};
  }

  /// mean 1/2 (L_phi(s, u) - y)^2 and its gradient in phi, targets held fixed.
  std::pair<Scalar, VectorT> critic_objective(const CriticPass& su, const Eigen::Ref<const RowT>& targets) const {
    auto [loss, upstream] = critic_upstream(su.features, su.value, targets);
    VectorT grad = VectorT::Zero(critic_.param_count());
    critic_.backward(su.tape, upstream, &grad, false);
    return {loss, std::move(grad)};
  }

  std::pair<Scalar, VectorT> critic_objective(const Batch<Scalar>& batch, const Eigen::Ref<const RowT>& targets) const {
    if (batch.size() == 0) throw InputError("critic_update: empty batch");
    return critic_objective(critic_forward(critic_, batch.s, batch.u_tilde), targets);
  }

  /// One Adam step on phi. Returns the loss before the step.
  Scalar critic_update(const Batch<Scalar>& batch, const Eigen::Ref<const RowT>& next_actions) {
    if (batch.size() == 0) throw InputError("critic_update: empty batch");
    const RowT targets = critic_target(batch, next_actions);
    auto [loss, grad] = critic_objective(batch, targets);
    adam_step<Scalar>(critic_.params(), grad, critic_opt_);
    return loss;
  }

  // ---- actor ----

  /// Forward passes shared by one learning step, n = batch size: the actor
  /// at [s | s'] and the critic at [(s, u) | (s', a')], with a' the actor's
  /// sample at s'.
  struct JointPass {
    Sample actor;
    CriticPass critic;
    Eigen::Index n = 0;
  };

  JointPass joint_forward(const Batch<Scalar>& batch, const Eigen::Ref<const RowT>& noise_s,
                          const Eigen::Ref<const RowT>& noise_next) const {
    const auto n = batch.size();
    if (n == 0) throw InputError("actor_update: empty batch");
    if (noise_s.cols() != n || noise_next.cols() != n) throw ShapeError("actor_update: one noise draw per state");
    MatrixT states(batch.s.rows(), 2 * n);
    states << batch.s, batch.s_next;
    RowT noise(2 * n);
    noise << noise_s, noise_next;
    JointPass jp;
    jp.n = n;
    jp.actor = actor_.sample(states, noise);
    RowT actions(2 * n);
    actions << batch.u_tilde, jp.actor.action.rightCols(n);
    jp.critic = critic_forward(critic_, states, actions);
    return jp;
  }

  /// Batch mean of beta (log pi(a|s) + H_t) + lambda (L(s', a') - L(s, u) + alpha3 c),
  /// with a ~ pi(.|s) and a' ~ pi(.|s') reparameterized and c = -r. The
  /// gradient is with respect to the actor only. When `critic_up` (dJ/df at
  /// (s, u)) is given, the same reverse pass through the critic accumulates
  /// the critic-loss gradient into `critic_grad`.
  ActorObjective actor_objective(const Batch<Scalar>& batch, const JointPass& jp,
                                 const MatrixT* critic_up = nullptr, VectorT* critic_grad = nullptr) const {
    const auto n = jp.n;
    const Scalar inv_n = Scalar(1) / static_cast<Scalar>(n);
    const Scalar b = static_cast<Scalar>(beta_.value());
    const Scalar l = static_cast<Scalar>(lambda_.value());
    const Scalar h_t = static_cast<Scalar>(cfg_.target_entropy);
    const Scalar a3 = static_cast<Scalar>(cfg_.alpha3);

    const RowT entropy_term = (jp.actor.log_prob.leftCols(n).array() + h_t).matrix();
    const RowT decrease = (jp.critic.value.rightCols(n).array() - jp.critic.value.leftCols(n).array() -
                           a3 * batch.r.array())
                              .matrix();

    ActorObjective out;
    out.loss = (b * entropy_term.sum() + l * decrease.sum()) * inv_n;
    out.mean_entropy_term = static_cast<double>(entropy_term.mean());
    out.mean_decrease_term = static_cast<double>(decrease.mean());
    out.grad = VectorT::Zero(actor_.trunk().param_count());

    RowT d_action = RowT::Zero(2 * n);
    RowT d_logp = RowT::Zero(2 * n);
    if (b != Scalar(0)) d_logp.leftCols(n).setConstant(b * inv_n);
    const bool through_critic = l != Scalar(0);
    if (through_critic || critic_up != nullptr) {
      MatrixT up = MatrixT::Zero(jp.critic.features.rows(), 2 * n);
      if (critic_up != nullptr) up.leftCols(n) = *critic_up;
      if (through_critic) up.rightCols(n) = jp.critic.features.rightCols(n) * (Scalar(2) * l * inv_n);
      const MatrixT d_input = critic_.backward(jp.critic.tape, up, critic_up != nullptr ? critic_grad : nullptr,
                                               through_critic, n);
      if (through_critic) d_action.rightCols(n) = d_input.bottomRows(1).rightCols(n);
    }
    if (b != Scalar(0) || through_critic) actor_.backward(jp.actor, d_action, d_logp, out.grad);
    return out;
  }

  ActorObjective actor_objective(const Batch<Scalar>& batch, const Eigen::Ref<const RowT>& noise_s,
                                 const Eigen::Ref<const RowT>& noise_next) const {
    return actor_objective(batch, joint_forward(batch, noise_s, noise_next));
  }

  /// Adam step on theta, then dual ascent on beta and lambda.
  Scalar actor_update(const Batch<Scalar>& batch, const Eigen::Ref<const RowT>& noise_s,
                      const Eigen::Ref<const RowT>& noise_next) {
    const ActorObjective obj = actor_objective(batch, noise_s, noise_next);
    apply_actor(obj);
    return obj.loss;
  }

  /// phi' <- tau phi + (1 - tau) phi'
  void polyak_update() {
    const Scalar t = static_cast<Scalar>(cfg_.tau);
    target_critic_.params() = t * critic_.params() + (Scalar(1) - t) * target_critic_.params();
  }

  /// One full learning step on a sampled batch: actor (theta, beta, lambda),
  /// critic (phi), then target (phi'). All gradients come from the same
  /// pre-update parameters; the actor's sample at s' also supplies a' for the
  /// critic target.
  UpdateStats update(const Batch<Scalar>& batch, Rng& rng) {
    const auto n = batch.size();
    if (n == 0) throw InputError("update: empty batch");
    const RowT noise_s = normals(n, rng);
    const RowT noise_next = normals(n, rng);
    const JointPass jp = joint_forward(batch, noise_s, noise_next);

    const RowT next_actions = cfg_.stored_next_action ? batch.a_next_hint : RowT(jp.actor.action.rightCols(n));
    const RowT targets = critic_target(batch, next_actions);
    const auto [critic_loss, critic_up] =
        critic_upstream(jp.critic.features.leftCols(n), jp.critic.value.leftCols(n), targets);
    VectorT critic_grad = VectorT::Zero(critic_.param_count());
    const ActorObjective actor_obj = actor_objective(batch, jp, &critic_up, &critic_grad);

    apply_actor(actor_obj);
    adam_step<Scalar>(critic_.params(), critic_grad, critic_opt_);
    polyak_update();
    ++updates_;

    UpdateStats st;
    st.critic_loss = static_cast<double>(critic_loss);
    st.actor_loss = static_cast<double>(actor_obj.loss);
    st.beta = beta_.value();
    st.lambda = lambda_.value();
    st.entropy_term = actor_obj.mean_entropy_term;
    st.decrease_term = actor_obj.mean_decrease_term;
    return st;
  }

  /// Stochastic action for one state (training rollouts).
  Scalar act(const Eigen::Ref<const VectorT>& state, Rng& rng) const {
    RowT noise(1);
    noise(0) = static_cast<Scalar>(rng.normal());
    return actor_.sample(state, noise).action(0);
  }

  /// tanh(mean) for one state (evaluation).
  Scalar act_deterministic(const Eigen::Ref<const VectorT>& state) const {
    return actor_.deterministic(state)(0);
  }

  static RowT normals(Eigen::Index n, Rng& rng) {
    RowT out(n);
    for (Eigen::Index i = 0; i < n; ++i) out(i) = static_cast<Scalar>(rng.normal());
    return out;
  }

 private:
  void apply_actor(const ActorObjective& obj) {
    adam_step<Scalar>(actor_.trunk().params(), obj.grad, actor_opt_);
    beta_.ascend(obj.mean_entropy_term);
    lambda_.ascend(obj.mean_decrease_term);
  }

  static std::vector<Eigen::Index> critic_sizes(Eigen::Index state_dim, const LacConfig& cfg) {
    std::vector<Eigen::Index> sizes{state_dim + 1};
    sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
    sizes.push_back(cfg.critic_features);
    return sizes;
  }

  LacConfig cfg_;
  GaussianActor<Scalar> actor_;
  Mlp<Scalar> critic_;
  Mlp<Scalar> target_critic_;
  AdamState<Scalar> actor_opt_;
  AdamState<Scalar> critic_opt_;
  DualVariable beta_;
  DualVariable lambda_;
  std::int64_t updates_ = 0;
};

}  // namespace sctl
