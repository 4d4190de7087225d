#ifndef QREADOUT_QLINALG_HPP
#define QREADOUT_QLINALG_HPP

// Dense finite-dimensional quantum linear algebra: labelled tensor-product
// spaces, density matrices, observables, Kraus channels and the handful of
// operations every other module is built on.
//
// Basis convention: the first subsystem of a HilbertSpace is the most
// significant digit of the flat index (Kronecker order).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include "qreadout/error.hpp"

namespace qreadout {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

namespace tol {
inline constexpr double hermitian = 1e-12;
inline constexpr double trace = 1e-12;
inline constexpr double positivity = 1e-12;
inline constexpr double completeness = 1e-10;
inline constexpr double unitarity = 1e-10;
inline constexpr double degeneracy = 1e-9;
inline constexpr double born_negativity = 1e-12;
inline constexpr double conditioning = 1e-15;
}  // namespace tol

//! Largest absolute entry; the entrywise max-norm used by every tolerance check.
inline double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const Matrix& m, double tolerance = tol::hermitian) {
  return m.rows() == m.cols() && max_abs(m - m.adjoint()) <= tolerance;
}

inline bool is_unitary(const Matrix& m, double tolerance = tol::unitarity) {
  return m.rows() == m.cols() &&
         max_abs(m.adjoint() * m - Matrix::Identity(m.rows(), m.cols())) <= tolerance;
}

inline Matrix hermitian_part(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

struct Subsystem {
  std::string label;
  std::size_t dimension = 2;

  bool operator==(const Subsystem&) const = default;
};

//! Ordered tensor product of labelled finite-dimensional factors.
class HilbertSpace {
 public:
  HilbertSpace() = default;

  explicit HilbertSpace(std::vector<Subsystem> subsystems) : subsystems_(std::move(subsystems)) {
    for (std::size_t i = 0; i < subsystems_.size(); ++i) {
      if (subsystems_[i].dimension < 1)
        throw ValidationError("subsystem '" + subsystems_[i].label + "' has dimension 0");
      for (std::size_t j = 0; j < i; ++j)
        if (subsystems_[j].label == subsystems_[i].label)
          throw LabelError("duplicate subsystem label '" + subsystems_[i].label + "'");
    }
  }

  static HilbertSpace qubits(const std::vector<std::string>& labels) {
    std::vector<Subsystem> subs;
    subs.reserve(labels.size());
    for (const auto& l : labels) subs.push_back({l, 2});
    return HilbertSpace(std::move(subs));
  }

  const std::vector<Subsystem>& subsystems() const { return subsystems_; }
  std::size_t size() const { return subsystems_.size(); }

  std::size_t dimension() const {
    std::size_t d = 1;
    for (const auto& s : subsystems_) d *= s.dimension;
    return d;
  }

  bool contains(std::string_view label) const {
    return std::any_of(subsystems_.begin(), subsystems_.end(),
                       [&](const Subsystem& s) { return s.label == label; });
  }

  std::size_t index_of(std::string_view label) const {
    for (std::size_t i = 0; i < subsystems_.size(); ++i)
      if (subsystems_[i].label == label) return i;
    throw LabelError("unknown subsystem label '" + std::string(label) + "'");
  }

  std::size_t dimension_of(std::string_view label) const {
    return subsystems_[index_of(label)].dimension;
  }

  std::vector<std::string> labels() const {
    std::vector<std::string> out;
    for (const auto& s : subsystems_) out.push_back(s.label);
    return out;
  }

  //! Flat-index stride of subsystem i.
  std::size_t stride(std::size_t i) const {
    std::size_t s = 1;
    for (std::size_t j = i + 1; j < subsystems_.size(); ++j) s *= subsystems_[j].dimension;
    return s;
  }

  //! Subspace spanned by `labels`, kept in canonical (this space's) order.
  HilbertSpace restricted_to(std::span<const std::string> labels) const {
    std::vector<bool> keep(subsystems_.size(), false);
    for (const auto& l : labels) keep[index_of(l)] = true;
    std::vector<Subsystem> subs;
    for (std::size_t i = 0; i < subsystems_.size(); ++i)
      if (keep[i]) subs.push_back(subsystems_[i]);
    return HilbertSpace(std::move(subs));
  }

  //! Subspace in exactly the order given.
  HilbertSpace ordered(std::span<const std::string> labels) const {
    std::vector<Subsystem> subs;
    for (const auto& l : labels) subs.push_back(subsystems_[index_of(l)]);
    return HilbertSpace(std::move(subs));
  }

  HilbertSpace concat(const HilbertSpace& other) const {
    auto subs = subsystems_;
    subs.insert(subs.end(), other.subsystems_.begin(), other.subsystems_.end());
    return HilbertSpace(std::move(subs));
  }

  bool operator==(const HilbertSpace&) const = default;

 private:
  std::vector<Subsystem> subsystems_;
};

//! Index bookkeeping for acting on a subset of subsystems.
//!
//! Every flat index decomposes as inner[a] + outer[r], where `a` enumerates
//! the target factors (in the order requested) and `r` the remaining factors
//! (in canonical order).
class SubsystemSplit {
 public:
  SubsystemSplit(const HilbertSpace& space, std::span<const std::string> targets) {
    std::vector<bool> is_target(space.size(), false);
    std::vector<std::size_t> target_idx;
    for (const auto& label : targets) {
      const std::size_t i = space.index_of(label);
      if (is_target[i]) throw LabelError("subsystem '" + label + "' targeted twice");
      is_target[i] = true;
      target_idx.push_back(i);
    }
    std::vector<std::size_t> rest_idx;
    for (std::size_t i = 0; i < space.size(); ++i)
      if (!is_target[i]) rest_idx.push_back(i);
    inner_ = offsets(space, target_idx);
    outer_ = offsets(space, rest_idx);
  }

  const std::vector<std::size_t>& inner() const { return inner_; }
  const std::vector<std::size_t>& outer() const { return outer_; }
  std::size_t inner_dimension() const { return inner_.size(); }

 private:
  static std::vector<std::size_t> offsets(const HilbertSpace& space,
                                          const std::vector<std::size_t>& which) {
    std::vector<std::size_t> out{0};
    for (std::size_t i : which) {
      const std::size_t dim = space.subsystems()[i].dimension;
      const std::size_t stride = space.stride(i);
      std::vector<std::size_t> next;
      next.reserve(out.size() * dim);
      for (std::size_t base : out)
        for (std::size_t k = 0; k < dim; ++k) next.push_back(base + k * stride);
      out = std::move(next);
    }
    return out;
  }

  std::vector<std::size_t> inner_;
  std::vector<std::size_t> outer_;
};

namespace detail {

//! (op ⊗ I) * m, with op acting on the split's target factors.
inline Matrix apply_left(const Matrix& op, const Matrix& m, const SubsystemSplit& split) {
  const auto& in = split.inner();
  const auto& out = split.outer();
  const auto n = static_cast<Eigen::Index>(in.size());
  Matrix result(m.rows(), m.cols());
  Vector v(n), w(n);
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (std::size_t r : out) {
      for (Eigen::Index a = 0; a < n; ++a) v(a) = m(static_cast<Eigen::Index>(in[a] + r), c);
      w.noalias() = op * v;
      for (Eigen::Index a = 0; a < n; ++a) result(static_cast<Eigen::Index>(in[a] + r), c) = w(a);
    }
  }
  return result;
}

//! (op ⊗ I) rho (op ⊗ I)†.
inline Matrix conjugate(const Matrix& op, const Matrix& rho, const SubsystemSplit& split) {
  const Matrix left = apply_left(op, rho, split);
  const Matrix adj = left.adjoint();
  return apply_left(op, adj, split).adjoint();
}

//! Partial trace onto the split's target factors, in the split's target order.
inline Matrix reduce(const Matrix& rho, const SubsystemSplit& split) {
  const auto& in = split.inner();
  const auto& out = split.outer();
  const auto n = static_cast<Eigen::Index>(in.size());
  Matrix result = Matrix::Zero(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b) {
      Complex acc{0.0, 0.0};
      for (std::size_t r : out)
        acc += rho(static_cast<Eigen::Index>(in[a] + r), static_cast<Eigen::Index>(in[b] + r));
      result(a, b) = acc;
    }
  return result;
}

inline std::size_t product_dimension(const HilbertSpace& space, std::span<const std::string> targets) {
  std::size_t d = 1;
  for (const auto& t : targets) d *= space.dimension_of(t);
  return d;
}

}  // namespace detail

//! Trace-one positive Hermitian operator on a labelled space.
class DensityMatrix {
 public:
  //! Validating constructor: Hermitian, unit trace and PSD to 1e-12.
  DensityMatrix(HilbertSpace space, Matrix entries)
      : space_(std::move(space)), entries_(std::move(entries)) {
    validate();
  }

  //! Construct without validation; the caller guarantees the invariants.
  static DensityMatrix unchecked(HilbertSpace space, Matrix entries) {
    return DensityMatrix(std::move(space), std::move(entries), Trusted{});
  }

  //! Rank-one state |psi><psi|; psi must have unit norm to 1e-10.
  static DensityMatrix pure(HilbertSpace space, const Vector& psi) {
    if (static_cast<std::size_t>(psi.size()) != space.dimension())
      throw DimensionError("state vector length does not match space dimension");
    const double norm = psi.norm();
    if (std::abs(norm - 1.0) > 1e-10) throw ValidationError("state vector is not normalised");
    const Vector unit = psi / norm;
    return unchecked(std::move(space), unit * unit.adjoint());
  }

  static DensityMatrix basis_state(HilbertSpace space, std::size_t index) {
    const auto d = static_cast<Eigen::Index>(space.dimension());
    if (static_cast<Eigen::Index>(index) >= d) throw DimensionError("basis index out of range");
    Matrix m = Matrix::Zero(d, d);
    m(static_cast<Eigen::Index>(index), static_cast<Eigen::Index>(index)) = 1.0;
    return unchecked(std::move(space), std::move(m));
  }

  static DensityMatrix maximally_mixed(HilbertSpace space) {
    const auto d = static_cast<Eigen::Index>(space.dimension());
    Matrix m = Matrix::Identity(d, d) / static_cast<double>(d);
    return unchecked(std::move(space), std::move(m));
  }

  const HilbertSpace& space() const { return space_; }
  const Matrix& matrix() const { return entries_; }
  std::size_t dimension() const { return static_cast<std::size_t>(entries_.rows()); }
  Complex operator()(Eigen::Index r, Eigen::Index c) const { return entries_(r, c); }

  double purity() const { return (entries_ * entries_).trace().real(); }

  RealVector eigenvalues() const {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(entries_, Eigen::EigenvaluesOnly);
    return solver.eigenvalues();
  }

 private:
  struct Trusted {};
  DensityMatrix(HilbertSpace space, Matrix entries, Trusted)
      : space_(std::move(space)), entries_(std::move(entries)) {}

  void validate() const {
    const auto d = static_cast<Eigen::Index>(space_.dimension());
    if (entries_.rows() != d || entries_.cols() != d)
      throw DimensionError("density matrix shape does not match its space");
    if (!is_hermitian(entries_, tol::hermitian)) throw ValidationError("density matrix is not Hermitian");
    if (std::abs(entries_.trace() - Complex{1.0, 0.0}) > tol::trace)
      throw ValidationError("density matrix trace differs from 1");
    if (eigenvalues().minCoeff() < -tol::positivity)
      throw ValidationError("density matrix has a negative eigenvalue");
  }

  HilbertSpace space_;
  Matrix entries_;
};

//! Hermitian operator; the space is implicit in the matrix dimension.
class Observable {
 public:
  explicit Observable(Matrix entries) : entries_(std::move(entries)) {
    if (!is_hermitian(entries_, tol::hermitian)) throw ValidationError("observable is not Hermitian");
  }

  //! a0 |0><0| + a1 |1><1| + ... in the computational basis.
  static Observable diagonal(const std::vector<double>& values) {
    const auto d = static_cast<Eigen::Index>(values.size());
    Matrix m = Matrix::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) m(i, i) = values[static_cast<std::size_t>(i)];
    return Observable(std::move(m));
  }

  const Matrix& matrix() const { return entries_; }
  std::size_t dimension() const { return static_cast<std::size_t>(entries_.rows()); }

 private:
  Matrix entries_;
};

//! Quantum operation E(rho) = sum_k A_k rho A_k^dagger.
class KrausChannel {
 public:
  explicit KrausChannel(std::vector<Matrix> operators, std::vector<std::string> labels = {})
      : operators_(std::move(operators)), labels_(std::move(labels)) {
    if (operators_.empty()) throw ValidationError("channel needs at least one Kraus operator");
    const auto d = operators_.front().rows();
    Matrix sum = Matrix::Zero(d, d);
    for (const auto& a : operators_) {
      if (a.rows() != d || a.cols() != d) throw DimensionError("Kraus operators differ in shape");
      sum += a.adjoint() * a;
    }
    if (max_abs(sum - Matrix::Identity(d, d)) > tol::completeness)
      throw ValidationError("Kraus operators violate completeness sum A^dag A = I");
    if (labels_.empty())
      for (std::size_t k = 0; k < operators_.size(); ++k) labels_.push_back(std::to_string(k));
    if (labels_.size() != operators_.size())
      throw ValidationError("one outcome label per Kraus operator required");
  }

  static KrausChannel identity(std::size_t dim) {
    const auto d = static_cast<Eigen::Index>(dim);
    return KrausChannel({Matrix::Identity(d, d)});
  }

  const std::vector<Matrix>& operators() const { return operators_; }
  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t dimension() const { return static_cast<std::size_t>(operators_.front().rows()); }

 private:
  std::vector<Matrix> operators_;
  std::vector<std::string> labels_;
};

struct Eigenspace {
  double eigenvalue = 0.0;
  Matrix projector;
};

//! Spectral decomposition with near-equal eigenvalues merged into one space.
//!
//! Consecutive eigenvalues closer than `degeneracy_tol * scale` share an
//! eigenspace, where scale is the larger of the spectral range and the
//! spectral radius (so a numerically-split multiple eigenvalue still merges).
inline std::vector<Eigenspace> eigendecompose(const Observable& a, double degeneracy_tol = tol::degeneracy) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian_part(a.matrix()));
  const RealVector& values = solver.eigenvalues();
  const Matrix& vectors = solver.eigenvectors();
  const Eigen::Index n = values.size();
  const double range = values(n - 1) - values(0);
  const double radius = values.cwiseAbs().maxCoeff();
  const double scale = std::max({range, radius, std::numeric_limits<double>::min()});

  std::vector<Eigenspace> out;
  Eigen::Index start = 0;
  for (Eigen::Index i = 1; i <= n; ++i) {
    if (i < n && values(i) - values(i - 1) <= degeneracy_tol * scale) continue;
    const Eigen::Index count = i - start;
    const Matrix block = vectors.middleCols(start, count);
    out.push_back({values.segment(start, count).mean(), block * block.adjoint()});
    start = i;
  }
  return out;
}

inline std::vector<Eigenspace> eigendecompose(const Matrix& a, double degeneracy_tol = tol::degeneracy) {
  return eigendecompose(Observable(a), degeneracy_tol);
}

inline DensityMatrix tensor_product(const DensityMatrix& a, const DensityMatrix& b) {
  for (const auto& s : b.space().subsystems())
    if (a.space().contains(s.label)) throw LabelError("tensor product label clash on '" + s.label + "'");
  Matrix m = Eigen::kroneckerProduct(a.matrix(), b.matrix()).eval();
  return DensityMatrix::unchecked(a.space().concat(b.space()), std::move(m));
}

//! Reduced state on `keep`, expressed in canonical subsystem order.
inline DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const std::string> keep) {
  const HilbertSpace reduced_space = rho.space().restricted_to(keep);
  const auto labels = reduced_space.labels();
  const SubsystemSplit split(rho.space(), labels);
  return DensityMatrix::unchecked(reduced_space, hermitian_part(detail::reduce(rho.matrix(), split)));
}

inline DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<std::string>& keep) {
  return partial_trace(rho, std::span<const std::string>(keep));
}

inline DensityMatrix partial_trace(const DensityMatrix& rho, const std::string& keep) {
  return partial_trace(rho, std::span<const std::string>(&keep, 1));
}

//! Reorders subsystems; `order` must be a permutation of the labels.
inline DensityMatrix permute(const DensityMatrix& rho, std::span<const std::string> order) {
  if (order.size() != rho.space().size()) throw LabelError("permutation must list every subsystem once");
  const SubsystemSplit split(rho.space(), order);
  const auto& in = split.inner();
  const auto d = static_cast<Eigen::Index>(in.size());
  Matrix m(d, d);
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = 0; b < d; ++b)
      m(a, b) = rho(static_cast<Eigen::Index>(in[a]), static_cast<Eigen::Index>(in[b]));
  return DensityMatrix::unchecked(rho.space().ordered(order), std::move(m));
}

inline DensityMatrix apply_channel(const KrausChannel& ch, const DensityMatrix& rho,
                                   std::span<const std::string> targets) {
  if (detail::product_dimension(rho.space(), targets) != ch.dimension())
    throw DimensionError("channel dimension does not match target subsystems");
  const SubsystemSplit split(rho.space(), targets);
  Matrix out = Matrix::Zero(rho.matrix().rows(), rho.matrix().cols());
  for (const auto& a : ch.operators()) out += detail::conjugate(a, rho.matrix(), split);
  return DensityMatrix::unchecked(rho.space(), hermitian_part(out));
}

inline DensityMatrix apply_channel(const KrausChannel& ch, const DensityMatrix& rho,
                                   const std::vector<std::string>& targets) {
  return apply_channel(ch, rho, std::span<const std::string>(targets));
}

inline DensityMatrix apply_unitary(const Matrix& u, const DensityMatrix& rho,
                                   std::span<const std::string> targets) {
  if (detail::product_dimension(rho.space(), targets) != static_cast<std::size_t>(u.rows()))
    throw DimensionError("unitary dimension does not match target subsystems");
  if (!is_unitary(u)) throw ValidationError("operator is not unitary");
  const SubsystemSplit split(rho.space(), targets);
  return DensityMatrix::unchecked(rho.space(), hermitian_part(detail::conjugate(u, rho.matrix(), split)));
}

//! Checks that `projectors` is a complete orthogonal family of projectors.
inline void require_projective_family(const std::vector<Matrix>& projectors, double tolerance = tol::completeness) {
  if (projectors.empty()) throw ValidationError("empty projector set");
  const auto d = projectors.front().rows();
  Matrix sum = Matrix::Zero(d, d);
  for (std::size_t i = 0; i < projectors.size(); ++i) {
    const Matrix& p = projectors[i];
    if (p.rows() != d || p.cols() != d) throw DimensionError("projectors differ in shape");
    if (max_abs(p * p - p) > tolerance || !is_hermitian(p, tolerance))
      throw ValidationError("operator in projector set is not an orthogonal projector");
    for (std::size_t j = 0; j < i; ++j)
      if (max_abs(p * projectors[j]) > tolerance) throw ValidationError("projectors are not mutually orthogonal");
    sum += p;
  }
  if (max_abs(sum - Matrix::Identity(d, d)) > tolerance) throw ValidationError("incomplete projector set");
}

namespace detail {
inline std::vector<double> born_from_reduced(const Matrix& rho, const std::vector<Matrix>& projectors) {
  std::vector<double> p;
  p.reserve(projectors.size());
  double total = 0.0;
  for (const auto& proj : projectors) {
    double pi = (proj * rho).trace().real();
    if (pi < -tol::born_negativity) throw NumericalDegeneracy("Born probability is negative beyond tolerance");
    pi = std::clamp(pi, 0.0, 1.0);
    p.push_back(pi);
    total += pi;
  }
  if (total <= 0.0) throw NumericalDegeneracy("Born probabilities sum to zero");
  for (auto& pi : p) pi /= total;
  return p;
}
}  // namespace detail

//! p_i = Tr(P_i rho) for projectors on the full space of rho.
inline std::vector<double> born_probabilities(const DensityMatrix& rho, const std::vector<Matrix>& projectors) {
  require_projective_family(projectors);
  if (static_cast<std::size_t>(projectors.front().rows()) != rho.dimension())
    throw DimensionError("projector dimension does not match state");
  return detail::born_from_reduced(rho.matrix(), projectors);
}

//! Born probabilities for projectors acting on `targets` (in the order given).
inline std::vector<double> born_probabilities(const DensityMatrix& rho, const std::vector<Matrix>& projectors,
                                              std::span<const std::string> targets) {
  require_projective_family(projectors);
  if (static_cast<std::size_t>(projectors.front().rows()) != detail::product_dimension(rho.space(), targets))
    throw DimensionError("projector dimension does not match target subsystems");
  const SubsystemSplit split(rho.space(), targets);
  return detail::born_from_reduced(detail::reduce(rho.matrix(), split), projectors);
}

inline std::vector<double> born_probabilities(const DensityMatrix& rho, const std::vector<Matrix>& projectors,
                                              const std::vector<std::string>& targets) {
  return born_probabilities(rho, projectors, std::span<const std::string>(targets));
}

//! Half the trace norm of a - b, clamped to [0, 1].
inline double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  if (!(a.space() == b.space())) throw DimensionError("trace distance between states on different spaces");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian_part(a.matrix() - b.matrix()), Eigen::EigenvaluesOnly);
  return std::clamp(0.5 * solver.eigenvalues().cwiseAbs().sum(), 0.0, 1.0);
}

//! Projectors |k><k| of the computational basis in dimension `dim`.
inline std::vector<Matrix> computational_projectors(std::size_t dim) {
  std::vector<Matrix> out;
  const auto d = static_cast<Eigen::Index>(dim);
  for (Eigen::Index k = 0; k < d; ++k) {
    Matrix p = Matrix::Zero(d, d);
    p(k, k) = 1.0;
    out.push_back(std::move(p));
  }
  return out;
}

//! Projectors onto the columns of a unitary (a rotated orthonormal basis).
inline std::vector<Matrix> basis_projectors(const Matrix& basis) {
  if (!is_unitary(basis)) throw ValidationError("basis matrix is not unitary");
  std::vector<Matrix> out;
  for (Eigen::Index k = 0; k < basis.cols(); ++k) out.push_back(basis.col(k) * basis.col(k).adjoint());
  return out;
}

namespace gates {
inline Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}
inline Matrix pauli_y() {
  Matrix m(2, 2);
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return m;
}
inline Matrix pauli_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}
inline Matrix hadamard() {
  Matrix m(2, 2);
  m << 1, 1, 1, -1;
  return m / std::sqrt(2.0);
}
inline Matrix phase(double phi) {
  Matrix m = Matrix::Identity(2, 2);
  m(1, 1) = std::polar(1.0, phi);
  return m;
}
}  // namespace gates

}  // namespace qreadout

#endif  // QREADOUT_QLINALG_HPP
