#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

namespace sctl {

/// Kanai-Tajimi ground filter: white bedrock noise w drives
///   xf'' + 2 zeta_g omega_g xf' + omega_g^2 xf = -w
/// and the ground acceleration is -(2 zeta_g omega_g xf' + omega_g^2 xf).
struct KanaiTajimiParams {
  double omega_g = 15.56;
  double zeta_g = 0.64;
  double intensity = unit_rms_intensity(15.56, 0.64);
  double dt = 0.02;
  double duration = 20.0;
  int substeps = 10;

  /// Two-sided spectral intensity S0 giving a unit stationary RMS output
  /// for the continuous filter: sigma^2 = pi S0 omega_g (1 + 4 zeta_g^2) / (2 zeta_g).
  static double unit_rms_intensity(double omega_g, double zeta_g);

  std::size_t sample_count() const;
  /// Standard deviation of one held white-noise draw, sqrt(2 pi S0 / dt).
  double noise_std() const;
  void validate() const;
};

struct FilterState {
  double xf = 0.0;
  double vf = 0.0;
};

/// Advance the filter one interval dt with w held constant. Returns the new
/// state and the ground acceleration at it.
std::pair<FilterState, double> kanai_tajimi_step(const FilterState& state, double w,
                                                 const KanaiTajimiParams& p);

/// One record of sample_count() ground-acceleration samples. Identical
/// (seed, params) produce bitwise-identical output.
std::vector<double> generate_record(std::uint64_t seed, const KanaiTajimiParams& p);

/// CSV with header `t,xg_ddot`; row i has t = (i + 1) dt.
void write_record_csv(std::ostream& os, std::span<const double> record, double dt);

}  // namespace sctl
