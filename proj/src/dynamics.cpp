#include "sctl/dynamics.hpp"

#include <cmath>
#include <string>

#include "sctl/errors.hpp"

namespace sctl {

void PlantParams::validate() const {
  if (!(m > 0.0) || !std::isfinite(m)) throw InputError("plant mass must be positive");
  if (!(k3 >= 0.0) || !std::isfinite(k3)) throw InputError("cubic stiffness must be >= 0");
  if (!std::isfinite(c) || !std::isfinite(k)) throw InputError("plant damping/stiffness must be finite");
}

double acceleration(const PlantState& s, double u, double xg_ddot, const PlantParams& p) {
  const double restoring = p.c * s.v + p.k * s.x + p.k3 * s.x * s.x * s.x;
  return (u - restoring) / p.m - xg_ddot;
}

StepResult rk4_step(const PlantState& s, double u, double xg_ddot, double dt, const PlantParams& p,
                    int substeps) {
  const double h = dt / substeps;
  PlantState y = s;
  for (int i = 0; i < substeps; ++i) {
    const double k1x = y.v;
    const double k1v = acceleration(y, u, xg_ddot, p);
    const PlantState y2{y.x + 0.5 * h * k1x, y.v + 0.5 * h * k1v};
    const double k2x = y2.v;
    const double k2v = acceleration(y2, u, xg_ddot, p);
    const PlantState y3{y.x + 0.5 * h * k2x, y.v + 0.5 * h * k2v};
    const double k3x = y3.v;
    const double k3v = acceleration(y3, u, xg_ddot, p);
    const PlantState y4{y.x + h * k3x, y.v + h * k3v};
    const double k4x = y4.v;
    const double k4v = acceleration(y4, u, xg_ddot, p);
    y.x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
    y.v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
  }
  return {y, acceleration(y, u, xg_ddot, p)};
}

StepResult advance(const PlantState& s, double u, double xg_ddot, const PlantParams& p,
                   const Integrator& integ, std::size_t step_index) {
  const StepResult r = rk4_step(s, u, xg_ddot, integ.dt, p, integ.substeps);
  if (!std::isfinite(r.state.x) || !std::isfinite(r.state.v) || !std::isfinite(r.acceleration) ||
      std::abs(r.state.x) > integ.divergence_bound) {
    throw DivergenceError("plant diverged", step_index);
  }
  return r;
}

double mechanical_energy(const PlantState& s, const PlantParams& p) {
  const double x2 = s.x * s.x;
  return 0.5 * p.m * s.v * s.v + 0.5 * p.k * x2 + 0.25 * p.k3 * x2 * x2;
}

}  // namespace sctl
