#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "sctl/errors.hpp"
#include "sctl/neural/mlp.hpp"
#include "sctl/rng.hpp"

namespace sctl {

template <typename Scalar>
struct Transition {
  Vector<Scalar> s;
  Scalar u_tilde = 0;      // raw actor output in [-1, 1]
  Scalar r = 0;            // reward, <= 0
  Vector<Scalar> s_next;
  Scalar a_next_hint = 0;  // raw actor output actually taken at s_next
};

/// Column-per-sample view of a set of transitions.
template <typename Scalar>
struct Batch {
  using RowT = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;
  Matrix<Scalar> s;
  RowT u_tilde;
  RowT r;
  Matrix<Scalar> s_next;
  RowT a_next_hint;

  Eigen::Index size() const { return s.cols(); }
};

/// Fixed-capacity FIFO experience replay.
template <typename Scalar>
class ReplayBuffer {
 public:
  ReplayBuffer(Eigen::Index state_dim, std::size_t capacity)
      : state_dim_(state_dim), capacity_(capacity),
        s_(state_dim, static_cast<Eigen::Index>(capacity)),
        s_next_(state_dim, static_cast<Eigen::Index>(capacity)),
        u_(capacity), r_(capacity), hint_(capacity) {
    if (capacity == 0) throw InputError("replay capacity must be positive");
    if (state_dim < 1) throw InputError("replay state dimension must be positive");
  }

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  Eigen::Index state_dim() const { return state_dim_; }
  bool empty() const { return size_ == 0; }

  void push(const Transition<Scalar>& t) {
    if (t.s.size() != state_dim_ || t.s_next.size() != state_dim_) {
      throw ShapeError("replay_push: state length does not match buffer");
    }
    if (!std::isfinite(static_cast<double>(t.r)) || t.r > Scalar(0)) {
      throw InputError("replay_push: reward must be finite and <= 0");
    }
    const auto c = static_cast<Eigen::Index>(cursor_);
    s_.col(c) = t.s;
    s_next_.col(c) = t.s_next;
    u_[cursor_] = t.u_tilde;
    r_[cursor_] = t.r;
    hint_[cursor_] = t.a_next_hint;
    cursor_ = (cursor_ + 1) % capacity_;
    if (size_ < capacity_) ++size_;
  }

  /// i-th stored transition, 0 = oldest.
  Transition<Scalar> at(std::size_t i) const {
    if (i >= size_) throw InputError("replay index out of range");
    const std::size_t slot = physical(i);
    const auto c = static_cast<Eigen::Index>(slot);
    return {s_.col(c), u_[slot], r_[slot], s_next_.col(c), hint_[slot]};
  }

  /// n indices drawn uniformly with replacement from [0, size()).
  std::vector<std::size_t> sample_indices(std::size_t n, Rng& rng) const {
    if (empty()) throw InputError("replay_sample: buffer is empty");
    std::vector<std::size_t> idx(n);
    for (auto& i : idx) i = rng.index(size_);
    return idx;
  }

  /// Gathers transitions by logical index (0 = oldest).
  Batch<Scalar> gather(std::span<const std::size_t> indices) const {
    const auto n = static_cast<Eigen::Index>(indices.size());
    Batch<Scalar> b;
    b.s.resize(state_dim_, n);
    b.s_next.resize(state_dim_, n);
    b.u_tilde.resize(n);
    b.r.resize(n);
    b.a_next_hint.resize(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const std::size_t logical = indices[static_cast<std::size_t>(j)];
      if (logical >= size_) throw InputError("replay index out of range");
      const std::size_t slot = physical(logical);
      const auto c = static_cast<Eigen::Index>(slot);
      b.s.col(j) = s_.col(c);
      b.s_next.col(j) = s_next_.col(c);
      b.u_tilde(j) = u_[slot];
      b.r(j) = r_[slot];
      b.a_next_hint(j) = hint_[slot];
    }
    return b;
  }

  Batch<Scalar> sample(std::size_t n, Rng& rng) const {
    const auto idx = sample_indices(n, rng);
    return gather(idx);
  }

 private:
  std::size_t physical(std::size_t logical) const {
    const std::size_t oldest = size_ < capacity_ ? 0 : cursor_;
    return (oldest + logical) % capacity_;
  }

  Eigen::Index state_dim_;
  std::size_t capacity_;
  std::size_t size_ = 0;
  std::size_t cursor_ = 0;
  Matrix<Scalar> s_;
  Matrix<Scalar> s_next_;
  std::vector<Scalar> u_;
  std::vector<Scalar> r_;
  std::vector<Scalar> hint_;
};

/// Builds a batch directly from transitions (tests, small fixtures).
template <typename Scalar>
Batch<Scalar> make_batch(std::span<const Transition<Scalar>> ts) {
  if (ts.empty()) throw InputError("make_batch: no transitions");
  const Eigen::Index dim = ts.front().s.size();
  const auto n = static_cast<Eigen::Index>(ts.size());
  Batch<Scalar> b;
  b.s.resize(dim, n);
  b.s_next.resize(dim, n);
  b.u_tilde.resize(n);
  b.r.resize(n);
  b.a_next_hint.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& t = ts[static_cast<std::size_t>(j)];
    if (t.s.size() != dim || t.s_next.size() != dim) throw ShapeError("make_batch: ragged states");
    b.s.col(j) = t.s;
    b.s_next.col(j) = t.s_next;
    b.u_tilde(j) = t.u_tilde;
    b.r(j) = t.r;
    b.a_next_hint(j) = t.a_next_hint;
  }
  return b;
}

}  // namespace sctl
