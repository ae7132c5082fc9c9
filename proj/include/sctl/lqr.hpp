#pragma once

#include <Eigen/Dense>
#include <complex>
#include <iosfwd>
#include <vector>

#include "sctl/dynamics.hpp"
#include "sctl/errors.hpp"

namespace sctl {

template <typename Scalar, int N>
using SquareMatrix = Eigen::Matrix<Scalar, N, N>;
template <typename Scalar, int N>
using ColumnVector = Eigen::Matrix<Scalar, N, 1>;
template <typename Scalar, int N>
using RowVector = Eigen::Matrix<Scalar, 1, N>;

/// Companion form of the linear plant: state (x, v), input u.
struct StateSpace {
  Eigen::Matrix2d A;
  Eigen::Vector2d B;

  static StateSpace from_plant(const PlantParams& p);
  bool controllable() const;
};

/// max |A^T P + P A - P B R^-1 B^T P + Q|
template <typename Scalar, int N>
Scalar care_residual(const SquareMatrix<Scalar, N>& A, const ColumnVector<Scalar, N>& B,
                     const SquareMatrix<Scalar, N>& Q, Scalar R, const SquareMatrix<Scalar, N>& P) {
  const ColumnVector<Scalar, N> PB = P * B;
  const SquareMatrix<Scalar, N> res = A.transpose() * P + P * A - PB * PB.transpose() / R + Q;
  return res.cwiseAbs().maxCoeff();
}

template <typename Scalar, int N>
bool is_hurwitz(const SquareMatrix<Scalar, N>& M) {
  Eigen::EigenSolver<SquareMatrix<Scalar, N>> es(M, false);
  if (es.info() != Eigen::Success) return false;
  return (es.eigenvalues().real().array() < Scalar(0)).all();
}

namespace detail {

// Solves Ac^T X + X Ac + W = 0 through the Kronecker form. Fine for the tiny
// N this library uses.
template <typename Scalar, int N>
SquareMatrix<Scalar, N> solve_lyapunov(const SquareMatrix<Scalar, N>& Ac,
                                       const SquareMatrix<Scalar, N>& W) {
  constexpr int NN = N * N;
  using Big = Eigen::Matrix<Scalar, NN, NN>;
  const SquareMatrix<Scalar, N> I = SquareMatrix<Scalar, N>::Identity();
  Big L = Big::Zero();
  // vec(Ac^T X) = (I kron Ac^T) vec X ; vec(X Ac) = (Ac^T kron I) vec X
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      L.template block<N, N>(i * N, j * N) += I(i, j) * Ac.transpose();
      L.template block<N, N>(i * N, j * N) += Ac(j, i) * I;
    }
  }
  Eigen::Matrix<Scalar, NN, 1> rhs = -Eigen::Map<const Eigen::Matrix<Scalar, NN, 1>>(W.data());
  Eigen::FullPivLU<Big> lu(L);
  if (!lu.isInvertible()) throw NumericError("singular Lyapunov operator");
  Eigen::Matrix<Scalar, NN, 1> x = lu.solve(rhs);
  SquareMatrix<Scalar, N> X = Eigen::Map<SquareMatrix<Scalar, N>>(x.data());
  return Scalar(0.5) * (X + X.transpose());
}

template <typename Scalar, int N>
bool controllable(const SquareMatrix<Scalar, N>& A, const ColumnVector<Scalar, N>& B) {
  SquareMatrix<Scalar, N> C;
  ColumnVector<Scalar, N> col = B;
  for (int i = 0; i < N; ++i) {
    C.col(i) = col;
    col = A * col;
  }
  Eigen::JacobiSVD<SquareMatrix<Scalar, N>> svd(C);
  const auto& sv = svd.singularValues();
  return sv(N - 1) > Scalar(1e-12) * std::max(Scalar(1), sv(0));
}

}  // namespace detail

/// Stabilizing solution of A^T P + P A - P B R^-1 B^T P + Q = 0.
///
/// Eigen-decomposes the Hamiltonian [[A, -B B^T / R], [-Q, -A^T]], keeps the
/// N eigenvectors with the smallest real parts (sorted ascending), and forms
/// P = X2 X1^-1. The result is then polished by Kleinman-Newton steps until
/// the residual stops improving, which keeps the residual near machine
/// precision even when X1 is poorly conditioned.
template <typename Scalar, int N>
SquareMatrix<Scalar, N> solve_care(const SquareMatrix<Scalar, N>& A,
                                   const ColumnVector<Scalar, N>& B,
                                   const SquareMatrix<Scalar, N>& Q, Scalar R) {
  if (!(R > Scalar(0))) throw InputError("solve_care: R must be positive");
  if (!A.allFinite() || !B.allFinite() || !Q.allFinite()) throw InputError("solve_care: non-finite input");
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-12) * std::max(Scalar(1), Q.cwiseAbs().maxCoeff())) {
    throw InputError("solve_care: Q must be symmetric");
  }
  if (!detail::controllable<Scalar, N>(A, B)) {
    throw DesignError("solve_care: (A, B) is not controllable");
  }

  constexpr int M = 2 * N;
  using Hamiltonian = Eigen::Matrix<Scalar, M, M>;
  Hamiltonian H;
  H.template topLeftCorner<N, N>() = A;
  H.template topRightCorner<N, N>() = -(B * B.transpose()) / R;
  H.template bottomLeftCorner<N, N>() = -Q;
  H.template bottomRightCorner<N, N>() = -A.transpose();

  Eigen::EigenSolver<Hamiltonian> es(H);
  if (es.info() != Eigen::Success) throw NumericError("solve_care: Hamiltonian eigensolver failed");

  using Complex = std::complex<Scalar>;
  std::vector<int> order(M);
  for (int i = 0; i < M; ++i) order[i] = i;
  const auto eigenvalues = es.eigenvalues();
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return eigenvalues(a).real() < eigenvalues(b).real(); });
  if (!(eigenvalues(order[N - 1]).real() < Scalar(0))) {
    throw NumericError("solve_care: Hamiltonian has eigenvalues on the imaginary axis");
  }

  Eigen::Matrix<Complex, M, N> basis;
  for (int j = 0; j < N; ++j) basis.col(j) = es.eigenvectors().col(order[j]);
  const Eigen::Matrix<Complex, N, N> X1 = basis.template topRows<N>();
  const Eigen::Matrix<Complex, N, N> X2 = basis.template bottomRows<N>();
  Eigen::FullPivLU<Eigen::Matrix<Complex, N, N>> lu(X1);
  if (!lu.isInvertible()) throw NumericError("solve_care: stable subspace is not a graph");
  SquareMatrix<Scalar, N> P = (X2 * lu.inverse()).real();
  P = Scalar(0.5) * (P + P.transpose());

  Scalar residual = care_residual<Scalar, N>(A, B, Q, R, P);
  for (int iter = 0; iter < 8; ++iter) {
    const RowVector<Scalar, N> K = B.transpose() * P / R;
    const SquareMatrix<Scalar, N> Ac = A - B * K;
    if (!is_hurwitz<Scalar, N>(Ac)) break;
    const SquareMatrix<Scalar, N> W = Q + K.transpose() * R * K;
    const SquareMatrix<Scalar, N> next = detail::solve_lyapunov<Scalar, N>(Ac, W);
    const Scalar next_residual = care_residual<Scalar, N>(A, B, Q, R, next);
    if (!(next_residual < residual)) break;
    P = next;
    residual = next_residual;
  }

  const Scalar scale = std::max({Scalar(1), Q.cwiseAbs().maxCoeff(), P.cwiseAbs().maxCoeff()});
  if (!P.allFinite() || residual > Scalar(1e-6) * scale) {
    throw NumericError("solve_care: residual too large", static_cast<double>(residual));
  }
  return P;
}

/// K = R^-1 B^T P
template <typename Scalar, int N>
RowVector<Scalar, N> lqr_gain(const SquareMatrix<Scalar, N>& P, const ColumnVector<Scalar, N>& B,
                              Scalar R) {
  return B.transpose() * P / R;
}

/// Guidance controller designed once from the assumed model.
struct LqrPolicy {
  Eigen::RowVector2d K = Eigen::RowVector2d::Zero();
  Eigen::Matrix2d P = Eigen::Matrix2d::Zero();
  Eigen::Matrix2d Q = Eigen::Matrix2d::Identity();
  double R = 1e-3;
  PlantParams assumed = PlantParams::assumed_plant();
};

LqrPolicy design_lqr(const PlantParams& assumed, const Eigen::Matrix2d& Q, double R);

/// u* = -K [x, v]^T
inline double lqr_force(const LqrPolicy& policy, double x, double v) {
  return -(policy.K(0) * x + policy.K(1) * v);
}

/// Plain-text provenance record: assumed parameters, Q, R, P, K.
void write_lqr_record(std::ostream& os, const LqrPolicy& policy);

}  // namespace sctl
