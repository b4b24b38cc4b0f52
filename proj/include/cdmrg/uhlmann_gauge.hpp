#ifndef CDMRG_UHLMANN_GAUGE_HPP
#define CDMRG_UHLMANN_GAUGE_HPP

#include <span>
#include <vector>

#include "cdmrg/spectral.hpp"
#include "cdmrg/types.hpp"

namespace cdmrg {

// Hermitian, positive semi-definite, unit trace.
class DensityMatrix {
 public:
  explicit DensityMatrix(Matrix entries);

  const Matrix& matrix() const { return entries_; }
  Index dim() const { return entries_.rows(); }

 private:
  Matrix entries_;
};

// Purification amplitude U with rho = U U^dagger.
struct Amplitude {
  Matrix u;
};

enum class PotentialLevel { base, cat1, cat2 };

// Hermitian connection sampled on a one-dimensional parameter grid.
struct GaugePotential {
  std::vector<double> grid;
  std::vector<Matrix> values;
  PotentialLevel level = PotentialLevel::base;
};

// C = sum_ab C_ab |a><b|. Holds both the eigenbasis coefficients and the
// operator in the ambient basis; construction symmetrizes both.
class CoherenceMatrix {
 public:
  // `op` is already expressed in the same basis as rho.
  explicit CoherenceMatrix(const Matrix& op);
  CoherenceMatrix(const Matrix& coefficients, const Matrix& eigenbasis);

  const Matrix& op() const { return op_; }
  const Matrix& coefficients() const { return coefficients_; }

 private:
  Matrix coefficients_;
  Matrix op_;
};

// Real rank-3 coefficients H_abc of sum_abc H_abc |a><b|c><a|.
class CoherenceCube {
 public:
  explicit CoherenceCube(Index dim);

  Index dim() const { return dim_; }
  double& at(Index a, Index b, Index c) { return entries_[(a * dim_ + b) * dim_ + c]; }
  double at(Index a, Index b, Index c) const { return entries_[(a * dim_ + b) * dim_ + c]; }

  // Literal contraction sum_abc H_abc <b|c> |a><a| with <b|c> taken from the
  // supplied basis columns. For an orthonormal basis <b|c> = delta_bc and the
  // result is diagonal in that basis.
  Matrix operator_form(const Matrix& basis) const;

 private:
  Index dim_;
  std::vector<double> entries_;
};

// A connection with two components sampled on a tensor-product grid.
// component(mu, i, j) with mu in {0, 1}.
struct GaugeField2D {
  std::vector<double> axis1;
  std::vector<double> axis2;
  std::vector<Matrix> components[2];

  Index size1() const { return static_cast<Index>(axis1.size()); }
  Index size2() const { return static_cast<Index>(axis2.size()); }
  const Matrix& component(int mu, Index i, Index j) const {
    return components[mu][static_cast<std::size_t>(i * size2() + j)];
  }
  Matrix& component(int mu, Index i, Index j) {
    return components[mu][static_cast<std::size_t>(i * size2() + j)];
  }
};

// One stored component F_12 per plaquette (F_21 = -F_12) and the quadrature
// weight of that plaquette.
struct CurvatureField {
  std::vector<double> axis1;
  std::vector<double> axis2;
  std::vector<Matrix> values;
  std::vector<double> weights;
};

// `literal`: dA + [A, A] exactly as written, which is flat for anti-hermitian
// pure gauges A = -(dV) V^dagger. `hermitian`: dA + i[A, A], flat for the
// hermitian pure gauges A = i (dV) V^dagger produced by gauge_transform.
enum class CurvatureConvention { literal, hermitian };

enum class ActionMode { scalar_like, covariant };

struct ActionParams {
  double g1 = 1.0;
  double g2 = 1.0;
  ActionMode mode = ActionMode::covariant;
};

struct GaugeTransformResult {
  DensityMatrix rho;
  Matrix potential;
  double symmetrization_residual = 0.0;
};

Amplitude purify(const DensityMatrix& rho);

// A_t = (1/2i)[dU U^dagger - U dU^dagger], dU by central difference.
Matrix gauge_potential(std::span<const Matrix> amplitudes, std::span<const double> grid,
                       std::size_t k);

// Same as gauge_potential at every grid point; the endpoints use second-order
// one-sided differences.
GaugePotential gauge_potential_family(std::span<const Matrix> amplitudes,
                                      std::span<const double> grid);

// D_t rho = i d(rho)/dt - [A_t, rho]. Anti-hermitian for hermitian A and rho.
Matrix covariant_derivative(std::span<const DensityMatrix> rhos, const GaugePotential& potential,
                            std::size_t k);

// (V rho V^dagger, V A V^dagger + i dV V^dagger), the latter symmetrized.
GaugeTransformResult gauge_transform(const DensityMatrix& rho, const Matrix& potential,
                                     const Matrix& unitary, const Matrix& unitary_derivative);

Matrix categorical_potential_1(const Matrix& potential, const CoherenceMatrix& coherence,
                               const DensityMatrix& rho);

Matrix categorical_potential_2(const Matrix& potential_1, const Matrix& cube_operator,
                               const CoherenceMatrix& coherence);

// C_ab = (D + D^dagger)/2 + (D - D^dagger)/(2i) from the central derivative
// overlaps of the track at k.
CoherenceMatrix default_coherence_matrix(const SpectralTrack& track, std::size_t k);

// H_abc = Re(D2[a][c]) delta_bc from the second derivative overlaps at k.
CoherenceCube default_coherence_cube(const SpectralTrack& track, std::size_t k);

// Trapezoid-rule integral of Tr[rho (D rho)^dagger (D rho)] (covariant) or of
// Re Tr[rho (i d/dt - A)^2 rho] (scalar_like). Uniform grid of >= 3 points.
double action_functional(std::span<const DensityMatrix> rhos, const GaugePotential& potential,
                         const ActionParams& params);

Matrix curvature(const GaugeField2D& field, Index i, Index j,
                 CurvatureConvention convention = CurvatureConvention::literal);

// B_12 = d_1 B_2 - d_2 B_1 + [A_1, B_2] - [A_2, B_1]
Matrix higher_field_strength(const GaugeField2D& a, const GaugeField2D& b, Index i, Index j,
                             CurvatureConvention convention = CurvatureConvention::literal);

// F (or B when `b` is given) on every interior plaquette, weights h1 * h2.
CurvatureField curvature_field(const GaugeField2D& field,
                               CurvatureConvention convention = CurvatureConvention::literal);
CurvatureField higher_field_strength_field(
    const GaugeField2D& a, const GaugeField2D& b,
    CurvatureConvention convention = CurvatureConvention::literal);

// sum_p w_p [Tr(F^dagger F)/g1^2 + Tr((F^dagger F)^2)/g2^4]
double curvature_action(const CurvatureField& field, const ActionParams& params);

// Hermitian basis element used for variational derivatives: diagonal
// projectors for a == b, |a><b| + |b><a| for a < b, i(|a><b| - |b><a|) for a > b.
Matrix hermitian_basis_element(Index dim, Index a, Index b);

// G(a, b) = [S(A_k + eps E_ab) - S(A_k - eps E_ab)] / (2 eps) with the
// covariant action. eps must lie in [1e-7, 1e-3].
RealMatrix gauge_charge_residual(std::span<const DensityMatrix> rhos,
                                 const GaugePotential& potential, std::size_t k, double eps,
                                 const ActionParams& params = {});

// Same stencil for dS/dB_mu at node (i, j), with S the curvature action of the
// higher field strength.
RealMatrix higher_charge_residual(const GaugeField2D& a, const GaugeField2D& b, int mu, Index i,
                                  Index j, double eps, const ActionParams& params = {},
                                  CurvatureConvention convention = CurvatureConvention::literal);

// Covariant action plus curvature actions of F and B; diagnostic only.
double categorified_action(std::span<const DensityMatrix> rhos, const GaugePotential& potential,
                           const CurvatureField& f, const CurvatureField& b,
                           const ActionParams& params);

}  // namespace cdmrg

#endif  // CDMRG_UHLMANN_GAUGE_HPP
