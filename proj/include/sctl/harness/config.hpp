#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>

#include "sctl/dynamics.hpp"
#include "sctl/excitation.hpp"
#include "sctl/lac/agent.hpp"

namespace sctl {

enum class Precision { Float32, Float64 };

/// Everything that determines a run. Text form is `key = value` lines with
/// `#` comments; see RunConfig::schema() for the key list.
struct RunConfig {
  PlantParams assumed = PlantParams::assumed_plant();
  PlantParams plant = PlantParams::true_plant();
  PlantState initial_state{};

  double kt_omega_g = 15.56;
  double kt_zeta_g = 0.64;
  double kt_intensity = KanaiTajimiParams::unit_rms_intensity(15.56, 0.64);

  Eigen::Matrix2d lqr_q = Eigen::Matrix2d::Identity();
  double lqr_r = 1e-3;

  LacConfig lac{};

  double alpha = 0.5;
  double horizon = 20.0;
  double dt = 0.02;
  int substeps = 10;
  std::size_t episodes = 100;
  std::size_t history = 4;
  std::array<double, 3> reward_weights{1.0, 1e-2, 1e-3};
  double u_max = 5.0;
  double u_clamp = 0.0;  // 0 disables the force clamp
  double divergence_bound = 1e6;

  std::uint64_t seed = 1;
  std::size_t eval_episodes = 10;
  Precision precision = Precision::Float32;
  std::string out_dir = "runs/default";

  std::size_t steps_per_episode() const;
  std::size_t state_dim() const { return 4 * history; }
  KanaiTajimiParams excitation() const;
  Integrator integrator() const;

  void validate() const;

  /// Applies one `key = value` setting; unknown keys are an InputError.
  void set(const std::string& key, const std::string& value);
  std::map<std::string, std::string> to_map() const;
  std::string to_text() const;
  static RunConfig from_text(const std::string& text);
  static RunConfig from_file(const std::string& path);
  /// FNV-1a of to_text(), hex.
  std::string hash() const;
  static const std::map<std::string, std::string>& schema();
};

std::string to_string(Precision p);

}  // namespace sctl
