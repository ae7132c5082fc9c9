#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "sctl/neural/adam.hpp"
#include "sctl/neural/mlp.hpp"

namespace sctl {

/// Network checkpoint layout (all integers and reals little-endian):
///
///   "SCTL1"                      5-byte magic
///   u32  n                       number of layer sizes
///   u64  sizes[n]                input, hidden..., output
///   f64  leak                    leaky-ReLU slope
///   u64  count                   parameter count
///   f64  params[count]           flat parameter vector (see Mlp)
///   u8   has_adam
///   [u64 step, f64 lr, f64 beta1, f64 beta2, f64 eps,
///    f64 m[count], f64 v[count]] when has_adam == 1
///
/// Parameters are always stored as 64-bit reals; narrower networks are
/// widened on write and narrowed on read, which round-trips exactly.
struct CheckpointRecord {
  struct Adam {
    std::int64_t step = 0;
    double lr = 0.0, beta1 = 0.0, beta2 = 0.0, eps = 0.0;
    std::vector<double> m, v;
  };

  std::vector<std::int64_t> sizes;
  double leak = 0.01;
  std::vector<double> params;
  std::optional<Adam> adam;
};

void write_checkpoint_record(std::ostream& os, const CheckpointRecord& rec);
CheckpointRecord read_checkpoint_record(std::istream& is);

template <typename Scalar>
void write_checkpoint(std::ostream& os, const Mlp<Scalar>& net, const AdamState<Scalar>* adam = nullptr) {
  CheckpointRecord rec;
  rec.sizes.assign(net.sizes().begin(), net.sizes().end());
  rec.leak = static_cast<double>(net.leak());
  const Vector<double> wide = net.params().template cast<double>();
  rec.params.assign(wide.data(), wide.data() + wide.size());
  if (adam != nullptr) {
    CheckpointRecord::Adam a;
    a.step = adam->step;
    a.lr = adam->lr;
    a.beta1 = adam->beta1;
    a.beta2 = adam->beta2;
    a.eps = adam->eps;
    const Vector<double> m = adam->m.template cast<double>();
    const Vector<double> v = adam->v.template cast<double>();
    a.m.assign(m.data(), m.data() + m.size());
    a.v.assign(v.data(), v.data() + v.size());
    rec.adam = std::move(a);
  }
  write_checkpoint_record(os, rec);
}

template <typename Scalar>
Mlp<Scalar> read_checkpoint(std::istream& is, AdamState<Scalar>* adam = nullptr) {
  const CheckpointRecord rec = read_checkpoint_record(is);
  Mlp<Scalar> net(std::vector<Eigen::Index>(rec.sizes.begin(), rec.sizes.end()), static_cast<Scalar>(rec.leak));
  if (static_cast<Eigen::Index>(rec.params.size()) != net.param_count()) {
    throw InputError("checkpoint: parameter count does not match layer sizes");
  }
  net.params() = Eigen::Map<const Vector<double>>(rec.params.data(), net.param_count()).template cast<Scalar>();
  if (adam != nullptr) {
    if (!rec.adam) throw InputError("checkpoint: no optimizer state stored");
    const auto& a = *rec.adam;
    adam->step = a.step;
    adam->lr = a.lr;
    adam->beta1 = a.beta1;
    adam->beta2 = a.beta2;
    adam->eps = a.eps;
    adam->m = Eigen::Map<const Vector<double>>(a.m.data(), net.param_count()).template cast<Scalar>();
    adam->v = Eigen::Map<const Vector<double>>(a.v.data(), net.param_count()).template cast<Scalar>();
  }
  return net;
}

}  // namespace sctl
