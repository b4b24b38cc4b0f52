#include "cdmrg/uhlmann_gauge.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cdmrg {

namespace {

void require_uniform(std::span<const double> grid, const char* who) {
  const double h = grid[1] - grid[0];
  for (std::size_t k = 1; k + 1 < grid.size(); ++k) {
    if (std::abs((grid[k + 1] - grid[k]) - h) > 1e-9 * std::abs(h)) {
      throw InvalidInput(std::string(who) + ": grid spacing must be uniform");
    }
  }
  if (!(h > 0.0)) throw InvalidInput(std::string(who) + ": grid must be increasing");
}

// d/dt at k. Central inside, second-order one-sided at the ends.
template <typename Get>
Matrix grid_derivative(Get&& value, std::span<const double> grid, std::size_t k) {
  const std::size_t n = grid.size();
  if (k > 0 && k + 1 < n) {
    return (value(k + 1) - value(k - 1)) / (grid[k + 1] - grid[k - 1]);
  }
  if (n < 3) throw BoundaryError("grid derivative needs at least three points");
  // Written in differences so constant values give exactly zero.
  if (k == 0) {
    const double h = grid[1] - grid[0];
    return (4.0 * (value(1) - value(0)) - (value(2) - value(0))) / (2.0 * h);
  }
  const double h = grid[n - 1] - grid[n - 2];
  return (4.0 * (value(n - 1) - value(n - 2)) - (value(n - 1) - value(n - 3))) / (2.0 * h);
}

void check_interior(std::size_t k, std::size_t n, const char* who) {
  if (k == 0 || k + 1 >= n) throw BoundaryError(std::string(who) + ": needs an interior index");
}

Matrix potential_from_derivative(const Matrix& du, const Matrix& u) {
  const Matrix x = du * u.adjoint();
  return (x - x.adjoint()) / (2.0 * kI);
}

Matrix covariant_derivative_at(std::span<const DensityMatrix> rhos, const GaugePotential& potential,
                               std::size_t k) {
  const Matrix drho = grid_derivative([&](std::size_t j) -> const Matrix& { return rhos[j].matrix(); },
                                      potential.grid, k);
  return kI * drho - commutator(potential.values[k], rhos[k].matrix());
}

void check_family(std::span<const DensityMatrix> rhos, const GaugePotential& potential,
                  const char* who) {
  if (rhos.size() != potential.grid.size() || potential.values.size() != potential.grid.size()) {
    throw InvalidInput(std::string(who) + ": density and potential grids differ in length");
  }
  for (std::size_t k = 0; k < rhos.size(); ++k) {
    if (potential.values[k].rows() != rhos[k].dim() || potential.values[k].cols() != rhos[k].dim()) {
      throw InvalidInput(std::string(who) + ": potential and density shapes differ");
    }
  }
}

double trapezoid(std::span<const double> grid, const std::vector<double>& f) {
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    s += 0.5 * (grid[k + 1] - grid[k]) * (f[k] + f[k + 1]);
  }
  return s;
}

Complex commutator_coefficient(CurvatureConvention convention) {
  return convention == CurvatureConvention::literal ? Complex{1.0, 0.0} : kI;
}

void check_field_index(const GaugeField2D& f, Index i, Index j, const char* who) {
  if (i <= 0 || j <= 0 || i + 1 >= f.size1() || j + 1 >= f.size2()) {
    throw BoundaryError(std::string(who) + ": plaquette must be interior on both axes");
  }
}

Matrix partial(const GaugeField2D& f, int mu, int axis, Index i, Index j) {
  if (axis == 0) {
    return (f.component(mu, i + 1, j) - f.component(mu, i - 1, j)) / (f.axis1[i + 1] - f.axis1[i - 1]);
  }
  return (f.component(mu, i, j + 1) - f.component(mu, i, j - 1)) / (f.axis2[j + 1] - f.axis2[j - 1]);
}

void check_same_grid(const GaugeField2D& a, const GaugeField2D& b) {
  if (a.axis1 != b.axis1 || a.axis2 != b.axis2) {
    throw InvalidInput("higher_field_strength: A and B grids differ");
  }
}

template <typename Fn>
CurvatureField plaquette_field(const GaugeField2D& f, Fn&& at) {
  if (f.size1() < 3 || f.size2() < 3) {
    throw InvalidInput("curvature field needs at least three points per axis");
  }
  CurvatureField out{f.axis1, f.axis2, {}, {}};
  for (Index i = 1; i + 1 < f.size1(); ++i) {
    for (Index j = 1; j + 1 < f.size2(); ++j) {
      out.values.push_back(at(i, j));
      out.weights.push_back(0.25 * (f.axis1[i + 1] - f.axis1[i - 1]) *
                            (f.axis2[j + 1] - f.axis2[j - 1]));
    }
  }
  return out;
}

}  // namespace

DensityMatrix::DensityMatrix(Matrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols() || entries_.rows() == 0) {
    throw InvalidInput("DensityMatrix: must be square and non-empty");
  }
  const double asym = hermiticity_residual(entries_);
  if (asym > 1e-12 * std::max(1.0, max_abs(entries_))) {
    std::ostringstream os;
    os << "DensityMatrix: not hermitian, asymmetry " << asym;
    throw InvalidInput(os.str());
  }
  const double tr = entries_.trace().real();
  if (std::abs(tr - 1.0) > 1e-10) {
    std::ostringstream os;
    os << "DensityMatrix: trace " << tr << " differs from 1";
    throw InvalidInput(os.str());
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(entries_, Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < -1e-12) {
    std::ostringstream os;
    os << "DensityMatrix: negative eigenvalue " << solver.eigenvalues().minCoeff();
    throw InvalidInput(os.str());
  }
}

CoherenceMatrix::CoherenceMatrix(const Matrix& op)
    : coefficients_(hermitian_part(op)), op_(hermitian_part(op)) {}

CoherenceMatrix::CoherenceMatrix(const Matrix& coefficients, const Matrix& eigenbasis)
    : coefficients_(hermitian_part(coefficients)) {
  if (eigenbasis.cols() != coefficients.rows() || coefficients.rows() != coefficients.cols()) {
    throw InvalidInput("CoherenceMatrix: coefficient and basis shapes differ");
  }
  op_ = hermitian_part(eigenbasis * coefficients_ * eigenbasis.adjoint());
}

CoherenceCube::CoherenceCube(Index dim)
    : dim_(dim), entries_(static_cast<std::size_t>(dim * dim * dim), 0.0) {
  if (dim <= 0) throw InvalidInput("CoherenceCube: dimension must be positive");
}

Matrix CoherenceCube::operator_form(const Matrix& basis) const {
  if (basis.cols() != dim_) throw InvalidInput("CoherenceCube: basis has wrong column count");
  const Matrix gram = basis.adjoint() * basis;
  Vector diag = Vector::Zero(dim_);
  for (Index a = 0; a < dim_; ++a) {
    for (Index b = 0; b < dim_; ++b) {
      for (Index c = 0; c < dim_; ++c) diag(a) += at(a, b, c) * gram(b, c);
    }
  }
  Matrix op = basis * diag.asDiagonal() * basis.adjoint();
  if (hermiticity_residual(op) > 1e-10) {
    throw InvalidInput("CoherenceCube: contracted operator is not hermitian");
  }
  return hermitian_part(op);
}

Amplitude purify(const DensityMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(rho.matrix());
  RealVector p = solver.eigenvalues();
  for (Index i = 0; i < p.size(); ++i) {
    if (p(i) < -1e-12) throw InvalidInput("purify: density has a negative eigenvalue");
    p(i) = std::sqrt(std::max(p(i), 0.0));
  }
  const Matrix& v = solver.eigenvectors();
  return {v * p.cast<Complex>().asDiagonal() * v.adjoint()};
}

Matrix gauge_potential(std::span<const Matrix> amplitudes, std::span<const double> grid,
                       std::size_t k) {
  if (amplitudes.size() != grid.size()) {
    throw InvalidInput("gauge_potential: amplitude and grid lengths differ");
  }
  check_interior(k, grid.size(), "gauge_potential");
  const Matrix du = (amplitudes[k + 1] - amplitudes[k - 1]) / (grid[k + 1] - grid[k - 1]);
  return potential_from_derivative(du, amplitudes[k]);
}

GaugePotential gauge_potential_family(std::span<const Matrix> amplitudes,
                                      std::span<const double> grid) {
  if (amplitudes.size() != grid.size()) {
    throw InvalidInput("gauge_potential_family: amplitude and grid lengths differ");
  }
  GaugePotential out{std::vector<double>(grid.begin(), grid.end()), {}, PotentialLevel::base};
  out.values.reserve(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Matrix du =
        grid_derivative([&](std::size_t j) -> const Matrix& { return amplitudes[j]; }, grid, k);
    out.values.push_back(potential_from_derivative(du, amplitudes[k]));
  }
  return out;
}

Matrix covariant_derivative(std::span<const DensityMatrix> rhos, const GaugePotential& potential,
                            std::size_t k) {
  check_family(rhos, potential, "covariant_derivative");
  check_interior(k, rhos.size(), "covariant_derivative");
  return covariant_derivative_at(rhos, potential, k);
}

GaugeTransformResult gauge_transform(const DensityMatrix& rho, const Matrix& potential,
                                     const Matrix& unitary, const Matrix& unitary_derivative) {
  const Index n = rho.dim();
  if (unitary.rows() != n || unitary.cols() != n || potential.rows() != n ||
      potential.cols() != n || unitary_derivative.rows() != n || unitary_derivative.cols() != n) {
    throw InvalidInput("gauge_transform: shape mismatch");
  }
  const double unitarity = max_abs(unitary.adjoint() * unitary - Matrix::Identity(n, n));
  if (unitarity > 1e-10) {
    std::ostringstream os;
    os << "gauge_transform: transformation is not unitary, |V^dagger V - I|_max = " << unitarity;
    throw InvalidInput(os.str());
  }
  const Matrix rotated = unitary * rho.matrix() * unitary.adjoint();
  const Matrix raw =
      unitary * potential * unitary.adjoint() + kI * unitary_derivative * unitary.adjoint();
  return {DensityMatrix(hermitian_part(rotated)), hermitian_part(raw),
          0.5 * hermiticity_residual(raw)};
}

Matrix categorical_potential_1(const Matrix& potential, const CoherenceMatrix& coherence,
                               const DensityMatrix& rho) {
  if (potential.rows() != rho.dim() || coherence.op().rows() != rho.dim()) {
    throw InvalidInput("categorical_potential_1: shape mismatch");
  }
  return potential + commutator(coherence.op(), rho.matrix()) / kI;
}

Matrix categorical_potential_2(const Matrix& potential_1, const Matrix& cube_operator,
                               const CoherenceMatrix& coherence) {
  if (potential_1.rows() != cube_operator.rows() || cube_operator.rows() != coherence.op().rows() ||
      cube_operator.cols() != cube_operator.rows()) {
    throw InvalidInput("categorical_potential_2: shape mismatch");
  }
  return potential_1 + commutator(cube_operator, coherence.op()) / kI;
}

CoherenceMatrix default_coherence_matrix(const SpectralTrack& track, std::size_t k) {
  const Matrix d = derivative_overlaps(track, k, FiniteDifference::central);
  const Matrix c = 0.5 * (d + d.adjoint()) + (d - d.adjoint()) / (2.0 * kI);
  return CoherenceMatrix(c, track.point(k).eigenvectors);
}

CoherenceCube default_coherence_cube(const SpectralTrack& track, std::size_t k) {
  const Matrix d2 = second_derivative_overlaps(track, k);
  CoherenceCube cube(d2.rows());
  for (Index a = 0; a < d2.rows(); ++a) {
    for (Index c = 0; c < d2.cols(); ++c) cube.at(a, c, c) = d2(a, c).real();
  }
  return cube;
}

double action_functional(std::span<const DensityMatrix> rhos, const GaugePotential& potential,
                         const ActionParams& params) {
  check_family(rhos, potential, "action_functional");
  if (rhos.size() < 3) throw InvalidInput("action_functional: needs at least three grid points");
  require_uniform(potential.grid, "action_functional");
  const std::size_t n = rhos.size();
  std::vector<double> integrand(n);

  if (params.mode == ActionMode::covariant) {
    for (std::size_t k = 0; k < n; ++k) {
      const Matrix d = covariant_derivative_at(rhos, potential, k);
      integrand[k] = (rhos[k].matrix() * d.adjoint() * d).trace().real();
    }
    return trapezoid(potential.grid, integrand);
  }

  // (i d/dt - A) acting on rho from the left, applied twice.
  std::vector<Matrix> first(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Matrix drho = grid_derivative(
        [&](std::size_t j) -> const Matrix& { return rhos[j].matrix(); }, potential.grid, k);
    first[k] = kI * drho - potential.values[k] * rhos[k].matrix();
  }
  for (std::size_t k = 0; k < n; ++k) {
    const Matrix dfirst =
        grid_derivative([&](std::size_t j) -> const Matrix& { return first[j]; }, potential.grid, k);
    const Matrix second = kI * dfirst - potential.values[k] * first[k];
    integrand[k] = (rhos[k].matrix() * second).trace().real();
  }
  return trapezoid(potential.grid, integrand);
}

Matrix curvature(const GaugeField2D& field, Index i, Index j, CurvatureConvention convention) {
  check_field_index(field, i, j, "curvature");
  const Matrix& a1 = field.component(0, i, j);
  const Matrix& a2 = field.component(1, i, j);
  return partial(field, 1, 0, i, j) - partial(field, 0, 1, i, j) +
         commutator_coefficient(convention) * commutator(a1, a2);
}

Matrix higher_field_strength(const GaugeField2D& a, const GaugeField2D& b, Index i, Index j,
                             CurvatureConvention convention) {
  check_same_grid(a, b);
  check_field_index(b, i, j, "higher_field_strength");
  const Complex c = commutator_coefficient(convention);
  return partial(b, 1, 0, i, j) - partial(b, 0, 1, i, j) +
         c * (commutator(a.component(0, i, j), b.component(1, i, j)) -
              commutator(a.component(1, i, j), b.component(0, i, j)));
}

CurvatureField curvature_field(const GaugeField2D& field, CurvatureConvention convention) {
  return plaquette_field(field, [&](Index i, Index j) { return curvature(field, i, j, convention); });
}

CurvatureField higher_field_strength_field(const GaugeField2D& a, const GaugeField2D& b,
                                           CurvatureConvention convention) {
  check_same_grid(a, b);
  return plaquette_field(
      b, [&](Index i, Index j) { return higher_field_strength(a, b, i, j, convention); });
}

double curvature_action(const CurvatureField& field, const ActionParams& params) {
  if (field.values.empty()) throw InvalidInput("curvature_action: empty field");
  if (field.weights.size() != field.values.size()) {
    throw InvalidInput("curvature_action: weight count differs from plaquette count");
  }
  if (!(params.g1 > 0.0) || !(params.g2 > 0.0)) {
    throw InvalidInput("curvature_action: couplings must be positive");
  }
  const double inv_g1_sq = 1.0 / (params.g1 * params.g1);
  const double inv_g2_4 = 1.0 / std::pow(params.g2, 4);
  double total = 0.0;
  for (std::size_t p = 0; p < field.values.size(); ++p) {
    const Matrix ff = field.values[p].adjoint() * field.values[p];
    total += field.weights[p] *
             (inv_g1_sq * ff.trace().real() + inv_g2_4 * (ff * ff).trace().real());
  }
  return total;
}

Matrix hermitian_basis_element(Index dim, Index a, Index b) {
  Matrix e = Matrix::Zero(dim, dim);
  if (a == b) {
    e(a, a) = 1.0;
  } else if (a < b) {
    e(a, b) = 1.0;
    e(b, a) = 1.0;
  } else {
    e(a, b) = kI;
    e(b, a) = -kI;
  }
  return e;
}

RealMatrix gauge_charge_residual(std::span<const DensityMatrix> rhos,
                                 const GaugePotential& potential, std::size_t k, double eps,
                                 const ActionParams& params) {
  if (!(eps >= 1e-7 && eps <= 1e-3)) {
    throw InvalidInput("gauge_charge_residual: eps must lie in [1e-7, 1e-3]");
  }
  if (params.mode != ActionMode::covariant) {
    throw InvalidInput("gauge_charge_residual: requires the covariant action");
  }
  check_family(rhos, potential, "gauge_charge_residual");
  if (k >= rhos.size()) throw BoundaryError("gauge_charge_residual: index out of range");
  const Index n = rhos[k].dim();
  RealMatrix g(n, n);
  GaugePotential shifted = potential;
  for (Index a = 0; a < n; ++a) {
    for (Index b = 0; b < n; ++b) {
      const Matrix e = hermitian_basis_element(n, a, b);
      shifted.values[k] = potential.values[k] + eps * e;
      const double plus = action_functional(rhos, shifted, params);
      shifted.values[k] = potential.values[k] - eps * e;
      const double minus = action_functional(rhos, shifted, params);
      g(a, b) = (plus - minus) / (2.0 * eps);
    }
  }
  return g;
}

RealMatrix higher_charge_residual(const GaugeField2D& a, const GaugeField2D& b, int mu, Index i,
                                  Index j, double eps, const ActionParams& params,
                                  CurvatureConvention convention) {
  if (!(eps >= 1e-7 && eps <= 1e-3)) {
    throw InvalidInput("higher_charge_residual: eps must lie in [1e-7, 1e-3]");
  }
  if (mu != 0 && mu != 1) throw InvalidInput("higher_charge_residual: component must be 0 or 1");
  if (i < 0 || j < 0 || i >= b.size1() || j >= b.size2()) {
    throw BoundaryError("higher_charge_residual: node out of range");
  }
  const Index n = b.component(mu, i, j).rows();
  RealMatrix g(n, n);
  GaugeField2D shifted = b;
  for (Index r = 0; r < n; ++r) {
    for (Index c = 0; c < n; ++c) {
      const Matrix e = hermitian_basis_element(n, r, c);
      shifted.component(mu, i, j) = b.component(mu, i, j) + eps * e;
      const double plus =
          curvature_action(higher_field_strength_field(a, shifted, convention), params);
      shifted.component(mu, i, j) = b.component(mu, i, j) - eps * e;
      const double minus =
          curvature_action(higher_field_strength_field(a, shifted, convention), params);
      g(r, c) = (plus - minus) / (2.0 * eps);
    }
  }
  return g;
}

double categorified_action(std::span<const DensityMatrix> rhos, const GaugePotential& potential,
                           const CurvatureField& f, const CurvatureField& b,
                           const ActionParams& params) {
  ActionParams covariant = params;
  covariant.mode = ActionMode::covariant;
  return action_functional(rhos, potential, covariant) + curvature_action(f, params) +
         curvature_action(b, params);
}

}  // namespace cdmrg
