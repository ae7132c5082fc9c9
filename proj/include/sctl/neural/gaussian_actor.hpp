#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <vector>

#include "sctl/neural/mlp.hpp"

namespace sctl {

/// Tanh-squashed Gaussian policy over a one-dimensional action.
///
/// The trunk emits two rows per sample: the pre-squash mean and the raw
/// log-std, which is clamped to [kLogStdMin, kLogStdMax]. Sampling is
/// reparameterized: a = tanh(mean + exp(log_std) * noise).
template <typename Scalar>
class GaussianActor {
 public:
  using MatrixT = Matrix<Scalar>;
  using VectorT = Vector<Scalar>;
  using RowT = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

  static constexpr double kLogStdMin = -20.0;
  static constexpr double kLogStdMax = 2.0;
  static constexpr double kSquashEps = 1e-6;

  struct Sample {
    RowT action;
    RowT log_prob;
    RowT mean;
    RowT log_std;  // after clamping
    RowT noise;
    Eigen::Array<bool, 1, Eigen::Dynamic> clamped;
    typename Mlp<Scalar>::Tape tape;
  };

  GaussianActor() = default;
  GaussianActor(Eigen::Index state_dim, const std::vector<Eigen::Index>& hidden,
                Scalar leak = Scalar(0.01))
      : trunk_(layer_sizes(state_dim, hidden), leak) {}
  explicit GaussianActor(Mlp<Scalar> trunk) : trunk_(std::move(trunk)) {
    if (trunk_.output_size() != 2) throw ShapeError("GaussianActor trunk must have 2 outputs");
  }

  Mlp<Scalar>& trunk() { return trunk_; }
  const Mlp<Scalar>& trunk() const { return trunk_; }
  Eigen::Index state_size() const { return trunk_.input_size(); }

  /// One sample per column of `states`, driven by standard-normal `noise`.
  Sample sample(const Eigen::Ref<const MatrixT>& states, const Eigen::Ref<const RowT>& noise) const {
    if (noise.cols() != states.cols()) throw ShapeError("actor_sample: one noise draw per state required");
    Sample out;
    const MatrixT head = trunk_.forward(states, out.tape);
    const auto lo = static_cast<Scalar>(kLogStdMin);
    const auto hi = static_cast<Scalar>(kLogStdMax);
    out.mean = head.row(0);
    out.clamped = (head.row(1).array() < lo) || (head.row(1).array() > hi);
    out.log_std = head.row(1).cwiseMax(lo).cwiseMin(hi);
    out.noise = noise;
    const auto pre = out.mean.array() + out.log_std.array().exp() * noise.array();
    out.action = pre.tanh().matrix();
    const Scalar half_log_2pi = static_cast<Scalar>(0.5 * std::log(2.0 * std::numbers::pi));
    const auto one_minus_a2 = Scalar(1) - out.action.array().square();
    out.log_prob = (Scalar(-0.5) * noise.array().square() - out.log_std.array() - half_log_2pi -
                    (one_minus_a2 + static_cast<Scalar>(kSquashEps)).log())
                       .matrix();
    return out;
  }

  /// tanh(mean), the action used for evaluation.
  RowT deterministic(const Eigen::Ref<const MatrixT>& states) const {
    return trunk_.forward(states).row(0).array().tanh().matrix();
  }

  /// Accumulates into `grad` the trunk-parameter gradient of
  ///   sum_j d_action(j) * action(j) + d_log_prob(j) * log_prob(j).
  void backward(const Sample& s, const Eigen::Ref<const RowT>& d_action,
                const Eigen::Ref<const RowT>& d_log_prob, VectorT& grad) const {
    const auto a = s.action.array();
    const auto one_minus_a2 = Scalar(1) - a.square();
    const auto squash_grad = Scalar(2) * a * one_minus_a2 / (one_minus_a2 + static_cast<Scalar>(kSquashEps));
    const RowT d_pre =
        (d_action.array() * one_minus_a2 + d_log_prob.array() * squash_grad).matrix();
    const RowT sigma_noise = (s.log_std.array().exp() * s.noise.array()).matrix();
    MatrixT upstream(2, s.action.cols());
    upstream.row(0) = d_pre;
    upstream.row(1) = (s.clamped).select(RowT::Zero(s.action.cols()),
                                         (d_pre.array() * sigma_noise.array() - d_log_prob.array()).matrix());
    trunk_.backward(s.tape, upstream, &grad, false);
  }

 private:
  static std::vector<Eigen::Index> layer_sizes(Eigen::Index state_dim, const std::vector<Eigen::Index>& hidden) {
    std::vector<Eigen::Index> sizes{state_dim};
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(2);
    return sizes;
  }

  Mlp<Scalar> trunk_;
};

}  // namespace sctl
