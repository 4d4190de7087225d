#ifndef QREADOUT_TESTS_ORACLES_HPP
#define QREADOUT_TESTS_ORACLES_HPP

// Independent reference implementations used only by tests. They use plain
// Kronecker products and index arithmetic and share no code path with the
// library's split/gather machinery.

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline Matrix identity(Eigen::Index d) { return Matrix::Identity(d, d); }

//! Tr_B of an operator on A (dim da) tensor B (dim db).
inline Matrix trace_second(const Matrix& rho, Eigen::Index da, Eigen::Index db) {
  Matrix out = Matrix::Zero(da, da);
  for (Eigen::Index i = 0; i < da; ++i)
    for (Eigen::Index j = 0; j < da; ++j)
      for (Eigen::Index k = 0; k < db; ++k) out(i, j) += rho(i * db + k, j * db + k);
  return out;
}

//! Tr_A of an operator on A (dim da) tensor B (dim db).
inline Matrix trace_first(const Matrix& rho, Eigen::Index da, Eigen::Index db) {
  Matrix out = Matrix::Zero(db, db);
  for (Eigen::Index i = 0; i < db; ++i)
    for (Eigen::Index j = 0; j < db; ++j)
      for (Eigen::Index k = 0; k < da; ++k) out(i, j) += rho(k * db + i, k * db + j);
  return out;
}

inline Matrix apply_kraus(const std::vector<Matrix>& ops, const Matrix& rho) {
  Matrix out = Matrix::Zero(rho.rows(), rho.cols());
  for (const auto& a : ops) out += a * rho * a.adjoint();
  return out;
}

inline double trace_distance(const Matrix& a, const Matrix& b) {
  Eigen::SelfAdjointEigenSolver<Matrix> s(a - b);
  return 0.5 * s.eigenvalues().cwiseAbs().sum();
}

//! Statevector of the search protocol after the oracle, Hadamards on the
//! first n qubits and projection onto |0...0>: returns the unnormalised
//! amplitudes of the last qubit.
inline Vector post_selected_last_qubit(const std::vector<int>& f, int n) {
  const Eigen::Index dim = Eigen::Index(1) << (n + 1);
  Vector psi = Vector::Zero(dim);
  for (Eigen::Index i = 0; i < (Eigen::Index(1) << n); ++i) psi(2 * i + f[static_cast<std::size_t>(i)]) = 1.0;
  psi /= std::sqrt(static_cast<double>(Eigen::Index(1) << n));
  Matrix h(2, 2);
  h << 1, 1, 1, -1;
  h /= std::sqrt(2.0);
  Matrix full = identity(1);
  for (int k = 0; k < n; ++k) full = kron(full, h);
  full = kron(full, identity(2));
  const Vector out = full * psi;
  Vector last(2);
  last << out(0), out(1);
  return last;
}

}  // namespace oracle

#endif  // QREADOUT_TESTS_ORACLES_HPP
