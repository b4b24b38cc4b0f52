#ifndef CDMRG_SPECTRAL_HPP
#define CDMRG_SPECTRAL_HPP

#include <functional>
#include <span>
#include <vector>

#include "cdmrg/types.hpp"

namespace cdmrg {

// Eigen-decomposition of a hermitian matrix. Columns of `eigenvectors` are
// orthonormal; eigenvalues ascend unless the point was reordered by tracking.
struct SpectralPoint {
  RealVector eigenvalues;
  Matrix eigenvectors;

  Index dim() const { return eigenvalues.size(); }
};

// Reordering and per-column phases that make the current basis continuous
// with a reference basis. Position j of the aligned basis holds current
// column order[j] multiplied by phases[j].
struct Alignment {
  std::vector<Index> order;
  std::vector<Complex> phases;
  bool degenerate = false;  // some adjacent overlap fell below the threshold
  double min_overlap = 1.0;
};

inline constexpr double kTrackingOverlapThreshold = 0.1;

// Rejects matrices whose asymmetry exceeds rel_tol * max(1, max|m|); the
// error message reports the asymmetry.
SpectralPoint eigh_sorted(const Matrix& m, double rel_tol = 1e-12);

// Alignment computed from the overlap matrix O = V_prev^dagger V_cur.
// Identity order is kept unless some |O_jj| < threshold, in which case
// columns are reassigned greedily row by row to their largest-overlap partner
// (ties to the lower column index). Phases make the aligned diagonal real and
// non-negative.
Alignment align_overlap(const Matrix& overlap,
                        double threshold = kTrackingOverlapThreshold);

// Applies an alignment to a basis/overlap: permutes and rephases columns.
Matrix apply_alignment(const Matrix& columns, const Alignment& alignment);
RealVector apply_alignment(const RealVector& values, const Alignment& alignment);

struct AlignedPoint {
  SpectralPoint point;
  bool degenerate = false;
  double min_overlap = 1.0;
};

AlignedPoint align_phases(const SpectralPoint& prev, const SpectralPoint& cur);

enum class FiniteDifference { central, forward };

// A family of spectral points over a strictly increasing grid, each aligned to
// its predecessor.
class SpectralTrack {
 public:
  SpectralTrack(std::vector<double> grid, std::vector<SpectralPoint> raw_points);

  static SpectralTrack from_family(std::span<const double> grid,
                                   const std::function<Matrix(double)>& family);

  const std::vector<double>& grid() const { return grid_; }
  const std::vector<SpectralPoint>& points() const { return points_; }
  const SpectralPoint& point(std::size_t k) const { return points_.at(k); }
  // degenerate_[k] refers to the alignment of point k against point k-1.
  const std::vector<bool>& degeneracy_flags() const { return degenerate_; }
  bool any_degenerate() const;
  std::size_t size() const { return points_.size(); }
  Index dim() const { return points_.empty() ? 0 : points_.front().dim(); }

 private:
  std::vector<double> grid_;
  std::vector<SpectralPoint> points_;
  std::vector<bool> degenerate_;
};

// D[a][b] = <a(k)| d/dgrid |b(k)> by finite differences on the track, using
// the true local spacing.
Matrix derivative_overlaps(const SpectralTrack& track, std::size_t k,
                           FiniteDifference scheme = FiniteDifference::central);

// D2[a][c] = <a(k)| d^2/dgrid^2 |c(k)> by the three-point second difference.
// Requires uniform spacing around k.
Matrix second_derivative_overlaps(const SpectralTrack& track, std::size_t k);

// Variants that only need overlaps with earlier points, for causal scans.
// `prev_overlap` is V_{k-1}^dagger V_k and `prev2_overlap` is
// V_{k-2}^dagger V_k, both already aligned.
Matrix backward_derivative_overlaps(const Matrix& prev_overlap, double h);
Matrix backward_second_derivative_overlaps(const Matrix& prev_overlap,
                                           const Matrix& prev2_overlap, double h);

}  // namespace cdmrg

#endif  // CDMRG_SPECTRAL_HPP
