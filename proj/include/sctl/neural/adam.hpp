#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>

#include "sctl/errors.hpp"

namespace sctl {

/// Bias-corrected Adam over a flat parameter vector.
template <typename Scalar>
struct AdamState {
  using VectorT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  VectorT m;
  VectorT v;
  std::int64_t step = 0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  AdamState() = default;
  AdamState(Eigen::Index size, double learning_rate)
      : m(VectorT::Zero(size)), v(VectorT::Zero(size)), lr(learning_rate) {}
};

/// params <- params - lr * m_hat / (sqrt(v_hat) + eps)
template <typename Scalar>
void adam_step(Eigen::Ref<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> params,
               const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>& grads,
               AdamState<Scalar>& st) {
  if (params.size() != grads.size() || st.m.size() != params.size() || st.v.size() != params.size()) {
    throw ShapeError("adam_step: parameter, gradient and moment sizes differ");
  }
  ++st.step;
  const Scalar b1 = static_cast<Scalar>(st.beta1);
  const Scalar b2 = static_cast<Scalar>(st.beta2);
  st.m = b1 * st.m + (Scalar(1) - b1) * grads;
  st.v = b2 * st.v + (Scalar(1) - b2) * grads.cwiseProduct(grads);
  const double c1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.step));
  const double c2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.step));
  // lr * (m / c1) / (sqrt(v / c2) + eps) == step_size * m / (sqrt(v) + eps_hat)
  const Scalar step_size = static_cast<Scalar>(st.lr * std::sqrt(c2) / c1);
  const Scalar eps_hat = static_cast<Scalar>(st.eps * std::sqrt(c2));
  params.array() -= step_size * st.m.array() / (st.v.array().sqrt() + eps_hat);
}

}  // namespace sctl
