#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "sctl/errors.hpp"
#include "sctl/rng.hpp"

namespace sctl {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Dense feed-forward network with leaky-ReLU hidden layers and a linear
/// output layer.
///
/// All parameters live in one flat vector, layer by layer: the weight matrix
/// (out x in, column-major) followed by the bias. Optimizers, target copies,
/// and checkpoints operate on that vector directly. Batches are matrices
/// whose columns are samples.
template <typename Scalar>
class Mlp {
 public:
  using MatrixT = Matrix<Scalar>;
  using VectorT = Vector<Scalar>;
  using WeightMap = Eigen::Map<MatrixT>;
  using ConstWeightMap = Eigen::Map<const MatrixT>;
  using BiasMap = Eigen::Map<VectorT>;
  using ConstBiasMap = Eigen::Map<const VectorT>;

  /// Intermediate values from a forward pass, consumed by backward().
  struct Tape {
    std::vector<MatrixT> inputs;  // input to each layer
  };

  Mlp() = default;

  /// `sizes` = {input, hidden..., output}; parameters zero-initialised.
  explicit Mlp(std::vector<Eigen::Index> sizes, Scalar leak = Scalar(0.01))
      : sizes_(std::move(sizes)), leak_(leak) {
    if (sizes_.size() < 2) throw InputError("Mlp needs at least input and output sizes");
    Eigen::Index total = 0;
    for (std::size_t i = 0; i + 1 < sizes_.size(); ++i) {
      if (sizes_[i] < 1 || sizes_[i + 1] < 1) throw InputError("Mlp layer sizes must be positive");
      offsets_.push_back(total);
      total += sizes_[i + 1] * sizes_[i] + sizes_[i + 1];
    }
    params_ = VectorT::Zero(total);
  }

  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases.
  void initialize(Rng& rng) {
    for (std::size_t l = 0; l < layer_count(); ++l) {
      const Scalar bound = Scalar(1) / std::sqrt(Scalar(sizes_[l]));
      const Eigen::Index begin = offsets_[l];
      const Eigen::Index end = begin + sizes_[l + 1] * sizes_[l] + sizes_[l + 1];
      for (Eigen::Index i = begin; i < end; ++i) {
        params_(i) = static_cast<Scalar>((2.0 * rng.uniform() - 1.0)) * bound;
      }
    }
  }

  const std::vector<Eigen::Index>& sizes() const { return sizes_; }
  std::size_t layer_count() const { return sizes_.size() - 1; }
  Eigen::Index input_size() const { return sizes_.front(); }
  Eigen::Index output_size() const { return sizes_.back(); }
  Scalar leak() const { return leak_; }

  VectorT& params() { return params_; }
  const VectorT& params() const { return params_; }
  Eigen::Index param_count() const { return params_.size(); }

  WeightMap weight(std::size_t l) {
    return WeightMap(params_.data() + offsets_[l], sizes_[l + 1], sizes_[l]);
  }
  ConstWeightMap weight(std::size_t l) const {
    return ConstWeightMap(params_.data() + offsets_[l], sizes_[l + 1], sizes_[l]);
  }
  BiasMap bias(std::size_t l) {
    return BiasMap(params_.data() + offsets_[l] + sizes_[l + 1] * sizes_[l], sizes_[l + 1]);
  }
  ConstBiasMap bias(std::size_t l) const {
    return ConstBiasMap(params_.data() + offsets_[l] + sizes_[l + 1] * sizes_[l], sizes_[l + 1]);
  }

  /// Views into a gradient vector laid out like params().
  WeightMap weight_of(VectorT& flat, std::size_t l) const {
    return WeightMap(flat.data() + offsets_[l], sizes_[l + 1], sizes_[l]);
  }
  BiasMap bias_of(VectorT& flat, std::size_t l) const {
    return BiasMap(flat.data() + offsets_[l] + sizes_[l + 1] * sizes_[l], sizes_[l + 1]);
  }

  MatrixT forward(const Eigen::Ref<const MatrixT>& input) const {
    check_input(input);
    MatrixT act = input;
    for (std::size_t l = 0; l < layer_count(); ++l) {
      MatrixT z = weight(l) * act;
      z.colwise() += bias(l);
      if (l + 1 < layer_count()) activate(z);
      act = std::move(z);
    }
    return act;
  }

  MatrixT forward(const Eigen::Ref<const MatrixT>& input, Tape& tape) const {
    check_input(input);
    tape.inputs.resize(layer_count());
    tape.inputs[0] = input;
    for (std::size_t l = 0; l < layer_count(); ++l) {
      MatrixT z = weight(l) * tape.inputs[l];
      z.colwise() += bias(l);
      if (l + 1 < layer_count()) {
        activate(z);
        tape.inputs[l + 1] = std::move(z);
      } else {
        return z;
      }
    }
    return {};
  }

  /// Reverse pass. `upstream` is dLoss/dOutput (output x batch). Parameter
  /// gradients are accumulated into `grad` (sized like params()) unless it is
  /// null; with grad_cols >= 0 only the leading grad_cols columns contribute
  /// to them. Returns dLoss/dInput when `want_input_grad`, else an empty matrix.
  MatrixT backward(const Tape& tape, const Eigen::Ref<const MatrixT>& upstream, VectorT* grad,
                   bool want_input_grad = true, Eigen::Index grad_cols = -1) const {
    if (upstream.rows() != output_size() || upstream.cols() != tape.inputs[0].cols()) {
      throw ShapeError("Mlp::backward: upstream shape mismatch");
    }
    if (grad != nullptr && grad->size() != param_count()) {
      throw ShapeError("Mlp::backward: gradient buffer size mismatch");
    }
    const Eigen::Index gc = grad_cols < 0 ? upstream.cols() : std::min(grad_cols, upstream.cols());
    MatrixT delta = upstream;
    for (std::size_t l = layer_count(); l-- > 0;) {
      if (grad != nullptr) {
        weight_of(*grad, l).noalias() += delta.leftCols(gc) * tape.inputs[l].leftCols(gc).transpose();
        bias_of(*grad, l) += delta.leftCols(gc).rowwise().sum();
      }
      if (l == 0 && !want_input_grad) return {};
      MatrixT next = weight(l).transpose() * delta;
      if (l > 0) {
        // the activation preserves sign, so its output gives the slope
        const auto& h = tape.inputs[l];
        next.array() *= (h.array() > Scalar(0)).template cast<Scalar>() * (Scalar(1) - leak_) + leak_;
      }
      delta = std::move(next);
    }
    return delta;
  }

  /// Convenience single-sample gradient: returns parameter gradient of
  /// upstream . f(input), and writes the input gradient if requested.
  VectorT grad(const Eigen::Ref<const MatrixT>& input, const Eigen::Ref<const MatrixT>& upstream,
               MatrixT* input_grad = nullptr) const {
    Tape tape;
    forward(input, tape);
    VectorT g = VectorT::Zero(param_count());
    MatrixT dx = backward(tape, upstream, &g, input_grad != nullptr);
    if (input_grad != nullptr) *input_grad = std::move(dx);
    return g;
  }

  template <typename Other>
  Mlp<Other> cast() const {
    Mlp<Other> out(sizes_, static_cast<Other>(leak_));
    out.params() = params_.template cast<Other>();
    return out;
  }

 private:
  void check_input(const Eigen::Ref<const MatrixT>& input) const {
    if (input.rows() != input_size()) {
      throw ShapeError("Mlp::forward: expected input size " + std::to_string(input_size()) +
                       ", got " + std::to_string(input.rows()));
    }
  }

  void activate(MatrixT& z) const {
    z = z.cwiseMax(leak_ * z);  // leaky ReLU for 0 < leak < 1
  }

  std::vector<Eigen::Index> sizes_;
  std::vector<Eigen::Index> offsets_;
  VectorT params_;
  Scalar leak_ = Scalar(0.01);
};

}  // namespace sctl
