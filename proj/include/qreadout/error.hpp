#ifndef QREADOUT_ERROR_HPP
#define QREADOUT_ERROR_HPP

#include <stdexcept>
#include <string>

namespace qreadout {

//! Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

//! Unknown, duplicate or clashing subsystem label.
class LabelError : public Error {
 public:
  using Error::Error;
};

//! Operands live on incompatible spaces or have mismatched shapes.
class DimensionError : public Error {
 public:
  using Error::Error;
};

//! A value violates its type invariant (non-Hermitian observable,
//! incomplete channel, non-unitary gate, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

//! Conditioning on an event whose probability is numerically zero.
class NumericalDegeneracy : public Error {
 public:
  using Error::Error;
};

//! Query outside the domain of a function (e.g. a worldline time range).
class DomainError : public Error {
 public:
  using Error::Error;
};

//! Evaluation point too close to a mass branch for the point-mass formula.
class FarFieldViolation : public Error {
 public:
  using Error::Error;
};

//! Sample geometry cannot identify the branch weights.
class DegenerateGeometry : public Error {
 public:
  using Error::Error;
};

//! Nonlinear evolution drifted out of its norm budget.
class StepSizeError : public Error {
 public:
  using Error::Error;
};

//! Scenario parameter with an unknown name, the wrong type or an
//! out-of-range value.
class ParameterError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

}  // namespace qreadout

#endif  // QREADOUT_ERROR_HPP
