#include "sctl/excitation.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

#include "sctl/errors.hpp"
#include "sctl/rng.hpp"
#include "sctl/text.hpp"

namespace sctl {

double KanaiTajimiParams::unit_rms_intensity(double omega_g, double zeta_g) {
  return 2.0 * zeta_g / (std::numbers::pi * omega_g * (1.0 + 4.0 * zeta_g * zeta_g));
}

std::size_t KanaiTajimiParams::sample_count() const {
  // Guard against duration/dt landing a hair above an integer.
  return static_cast<std::size_t>(std::ceil(duration / dt - 1e-9));
}

double KanaiTajimiParams::noise_std() const {
  return std::sqrt(intensity * 2.0 * std::numbers::pi / dt);
}

void KanaiTajimiParams::validate() const {
  if (!(omega_g > 0.0) || !std::isfinite(omega_g)) throw InputError("omega_g must be positive");
  if (!(zeta_g > 0.0 && zeta_g < 1.0)) throw InputError("zeta_g must lie in (0, 1)");
  if (!(intensity >= 0.0) || !std::isfinite(intensity)) throw InputError("intensity must be >= 0");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InputError("dt must be positive");
  if (!(duration > 0.0) || !std::isfinite(duration)) throw InputError("duration must be positive");
  if (substeps < 1) throw InputError("substeps must be >= 1");
}

namespace {

struct Derivative {
  double dx;
  double dv;
};

inline Derivative filter_rhs(double xf, double vf, double w, double two_zw, double w2) {
  return {vf, -w - two_zw * vf - w2 * xf};
}

}  // namespace

std::pair<FilterState, double> kanai_tajimi_step(const FilterState& state, double w,
                                                 const KanaiTajimiParams& p) {
  if (!std::isfinite(state.xf) || !std::isfinite(state.vf) || !std::isfinite(w)) {
    throw InputError("kanai_tajimi_step: non-finite state or noise sample");
  }
  const double two_zw = 2.0 * p.zeta_g * p.omega_g;
  const double w2 = p.omega_g * p.omega_g;
  const double h = p.dt / p.substeps;

  double x = state.xf;
  double v = state.vf;
  for (int i = 0; i < p.substeps; ++i) {
    const Derivative k1 = filter_rhs(x, v, w, two_zw, w2);
    const Derivative k2 = filter_rhs(x + 0.5 * h * k1.dx, v + 0.5 * h * k1.dv, w, two_zw, w2);
    const Derivative k3 = filter_rhs(x + 0.5 * h * k2.dx, v + 0.5 * h * k2.dv, w, two_zw, w2);
    const Derivative k4 = filter_rhs(x + h * k3.dx, v + h * k3.dv, w, two_zw, w2);
    x += h / 6.0 * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx);
    v += h / 6.0 * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv);
  }
  return {FilterState{x, v}, -(two_zw * v + w2 * x)};
}

std::vector<double> generate_record(std::uint64_t seed, const KanaiTajimiParams& p) {
  p.validate();
  Rng rng(seed);
  const double sigma = p.noise_std();
  std::vector<double> out(p.sample_count());
  FilterState state;
  for (double& sample : out) {
    const double w = sigma * rng.normal();
    auto [next, xg] = kanai_tajimi_step(state, w, p);
    state = next;
    sample = xg;
  }
  return out;
}

void write_record_csv(std::ostream& os, std::span<const double> record, double dt) {
  os << "t,xg_ddot\n";
  for (std::size_t i = 0; i < record.size(); ++i) {
    os << format_real(static_cast<double>(i + 1) * dt) << ',' << format_real(record[i]) << '\n';
  }
}

}  // namespace sctl
