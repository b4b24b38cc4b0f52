#ifndef CDMRG_TYPES_HPP
#define CDMRG_TYPES_HPP

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace cdmrg {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;
using Index = Eigen::Index;

inline constexpr Complex kI{0.0, 1.0};

// Input that violates a documented precondition (shape, hermiticity, range).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A finite-difference stencil was requested where neighbours are missing.
class BoundaryError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Numerical breakdown that is not the caller's fault (empty spectrum, solver failure).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// max_ij |m_ij - conj(m_ji)|
inline double hermiticity_residual(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

inline double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline Matrix commutator(const Matrix& a, const Matrix& b) { return a * b - b * a; }

inline Matrix hermitian_part(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

inline Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

inline Matrix pauli_y() {
  Matrix m(2, 2);
  m << 0.0, -kI, kI, 0.0;
  return m;
}

inline Matrix pauli_z() {
  Matrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}

}  // namespace cdmrg

#endif  // CDMRG_TYPES_HPP
