#pragma once

#include <cstddef>

namespace sctl {

/// Single-degree-of-freedom plant
///   m x'' + c x' + k x + k3 x^3 = u - m xg''
/// k3 = 0 gives the linear (assumed) model.
struct PlantParams {
  double m = 1.0;
  double c = 0.4;
  double k = 100.0;
  double k3 = 1.0;

  /// Nonlinear plant the controller acts on.
  static constexpr PlantParams true_plant() { return {1.0, 0.4, 100.0, 1.0}; }
  /// Arbitrary linear model the LQR guidance is designed from. Note c < 0.
  static constexpr PlantParams assumed_plant() { return {1.6, -0.5, 181.0, 0.0}; }

  void validate() const;
};

struct PlantState {
  double x = 0.0;
  double v = 0.0;
};

struct StepResult {
  PlantState state;
  double acceleration = 0.0;  // x'' at the returned state, inputs held
};

/// Control interval integration settings.
struct Integrator {
  double dt = 0.02;
  int substeps = 10;            // RK4 sub-steps per interval
  double divergence_bound = 1e6;  // |x| beyond this aborts
};

double acceleration(const PlantState& s, double u, double xg_ddot, const PlantParams& p);

/// Classical RK4 over one interval of length dt (may be negative), split into
/// `substeps` equal sub-steps, with u and xg_ddot held (zero-order hold).
/// No divergence checking.
StepResult rk4_step(const PlantState& s, double u, double xg_ddot, double dt, const PlantParams& p,
                    int substeps = 1);

/// rk4_step under `integ`, throwing DivergenceError(step_index) when the new
/// state is non-finite or |x| exceeds the divergence bound.
StepResult advance(const PlantState& s, double u, double xg_ddot, const PlantParams& p,
                   const Integrator& integ, std::size_t step_index);

/// 1/2 m v^2 + 1/2 k x^2 + 1/4 k3 x^4
double mechanical_energy(const PlantState& s, const PlantParams& p);

}  // namespace sctl
