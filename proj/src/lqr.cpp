#include "sctl/lqr.hpp"

#include <ostream>

#include "sctl/text.hpp"

namespace sctl {

StateSpace StateSpace::from_plant(const PlantParams& p) {
  StateSpace ss;
  ss.A << 0.0, 1.0, -p.k / p.m, -p.c / p.m;
  ss.B << 0.0, 1.0 / p.m;
  return ss;
}

bool StateSpace::controllable() const { return detail::controllable<double, 2>(A, B); }

LqrPolicy design_lqr(const PlantParams& assumed, const Eigen::Matrix2d& Q, double R) {
  assumed.validate();
  const StateSpace ss = StateSpace::from_plant(assumed);
  LqrPolicy policy;
  policy.assumed = assumed;
  policy.Q = Q;
  policy.R = R;
  policy.P = solve_care<double, 2>(ss.A, ss.B, Q, R);
  policy.K = lqr_gain<double, 2>(policy.P, ss.B, R);
  if (!is_hurwitz<double, 2>(ss.A - ss.B * policy.K)) {
    throw NumericError("design_lqr: closed loop is not Hurwitz");
  }
  return policy;
}

void write_lqr_record(std::ostream& os, const LqrPolicy& policy) {
  const auto& a = policy.assumed;
  os << "# LQR guidance design (assumed linear model)\n";
  os << "assumed.m = " << format_real(a.m) << '\n';
  os << "assumed.c = " << format_real(a.c) << '\n';
  os << "assumed.k = " << format_real(a.k) << '\n';
  os << "Q = " << format_real(policy.Q(0, 0)) << ' ' << format_real(policy.Q(0, 1)) << ' '
     << format_real(policy.Q(1, 0)) << ' ' << format_real(policy.Q(1, 1)) << '\n';
  os << "R = " << format_real(policy.R) << '\n';
  os << "P = " << format_real(policy.P(0, 0)) << ' ' << format_real(policy.P(0, 1)) << ' '
     << format_real(policy.P(1, 0)) << ' ' << format_real(policy.P(1, 1)) << '\n';
  os << "K = " << format_real(policy.K(0)) << ' ' << format_real(policy.K(1)) << '\n';
}

}  // namespace sctl
