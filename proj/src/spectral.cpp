#include "cdmrg/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace cdmrg {

SpectralPoint eigh_sorted(const Matrix& m, double rel_tol) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw InvalidInput("eigh_sorted: matrix must be square and non-empty");
  }
  const double scale = std::max(1.0, max_abs(m));
  const double asym = hermiticity_residual(m);
  if (asym > rel_tol * scale) {
    std::ostringstream os;
    os << "eigh_sorted: matrix is not hermitian, max asymmetry " << asym
       << " exceeds " << rel_tol * scale;
    throw InvalidInput(os.str());
  }
  // Eigen returns ascending eigenvalues; the hermitian part removes the
  // tolerated asymmetry before the solve.
  Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian_part(m));
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eigh_sorted: eigensolver did not converge");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

Alignment align_overlap(const Matrix& overlap, double threshold) {
  const Index n = overlap.rows();
  if (overlap.cols() != n) {
    throw InvalidInput("align_overlap: overlap matrix must be square");
  }
  Alignment out;
  out.order.resize(n);
  out.phases.assign(n, Complex{1.0, 0.0});
  for (Index j = 0; j < n; ++j) out.order[j] = j;

  double diag_min = n == 0 ? 1.0 : overlap.diagonal().cwiseAbs().minCoeff();
  if (diag_min < threshold) {
    out.degenerate = true;
    std::vector<bool> taken(n, false);
    for (Index row = 0; row < n; ++row) {
      Index best = -1;
      double best_mag = -1.0;
      for (Index c = 0; c < n; ++c) {
        if (taken[c]) continue;
        const double mag = std::abs(overlap(row, c));
        if (mag > best_mag) {
          best_mag = mag;
          best = c;
        }
      }
      taken[best] = true;
      out.order[row] = best;
    }
  }

  out.min_overlap = n == 0 ? 1.0 : std::numeric_limits<double>::infinity();
  for (Index j = 0; j < n; ++j) {
    const Complex o = overlap(j, out.order[j]);
    const double mag = std::abs(o);
    out.min_overlap = std::min(out.min_overlap, mag);
    if (mag > 0.0) out.phases[j] = std::conj(o) / mag;
  }
  return out;
}

Matrix apply_alignment(const Matrix& columns, const Alignment& alignment) {
  const auto n = static_cast<Index>(alignment.order.size());
  if (columns.cols() != n) {
    throw InvalidInput("apply_alignment: column count does not match alignment");
  }
  Matrix out(columns.rows(), n);
  for (Index j = 0; j < n; ++j) {
    out.col(j) = columns.col(alignment.order[j]) * alignment.phases[j];
  }
  return out;
}

RealVector apply_alignment(const RealVector& values, const Alignment& alignment) {
  const auto n = static_cast<Index>(alignment.order.size());
  if (values.size() != n) {
    throw InvalidInput("apply_alignment: value count does not match alignment");
  }
  RealVector out(n);
  for (Index j = 0; j < n; ++j) out(j) = values(alignment.order[j]);
  return out;
}

AlignedPoint align_phases(const SpectralPoint& prev, const SpectralPoint& cur) {
  if (prev.dim() != cur.dim() || prev.eigenvectors.rows() != cur.eigenvectors.rows()) {
    throw InvalidInput("align_phases: dimension mismatch");
  }
  const Matrix overlap = prev.eigenvectors.adjoint() * cur.eigenvectors;
  const Alignment a = align_overlap(overlap);
  return {{apply_alignment(cur.eigenvalues, a), apply_alignment(cur.eigenvectors, a)},
          a.degenerate,
          a.min_overlap};
}

SpectralTrack::SpectralTrack(std::vector<double> grid, std::vector<SpectralPoint> raw_points)
    : grid_(std::move(grid)) {
  if (grid_.size() != raw_points.size()) {
    throw InvalidInput("SpectralTrack: grid and point counts differ");
  }
  for (std::size_t k = 1; k < grid_.size(); ++k) {
    if (!(grid_[k] > grid_[k - 1])) {
      throw InvalidInput("SpectralTrack: grid must be strictly increasing");
    }
  }
  points_.reserve(raw_points.size());
  degenerate_.reserve(raw_points.size());
  for (std::size_t k = 0; k < raw_points.size(); ++k) {
    if (k == 0) {
      points_.push_back(std::move(raw_points[0]));
      degenerate_.push_back(false);
      continue;
    }
    AlignedPoint aligned = align_phases(points_.back(), raw_points[k]);
    points_.push_back(std::move(aligned.point));
    degenerate_.push_back(aligned.degenerate);
  }
}

SpectralTrack SpectralTrack::from_family(std::span<const double> grid,
                                         const std::function<Matrix(double)>& family) {
  std::vector<SpectralPoint> pts;
  pts.reserve(grid.size());
  for (double x : grid) pts.push_back(eigh_sorted(family(x)));
  return SpectralTrack(std::vector<double>(grid.begin(), grid.end()), std::move(pts));
}

bool SpectralTrack::any_degenerate() const {
  return std::any_of(degenerate_.begin(), degenerate_.end(), [](bool b) { return b; });
}

Matrix derivative_overlaps(const SpectralTrack& track, std::size_t k, FiniteDifference scheme) {
  const std::size_t n = track.size();
  const auto& g = track.grid();
  if (k >= n) throw BoundaryError("derivative_overlaps: index out of range");
  const Matrix& vk = track.point(k).eigenvectors;
  if (scheme == FiniteDifference::central) {
    if (k == 0 || k + 1 >= n) {
      throw BoundaryError("derivative_overlaps: central scheme needs an interior index");
    }
    const Matrix diff = track.point(k + 1).eigenvectors - track.point(k - 1).eigenvectors;
    return vk.adjoint() * diff / (g[k + 1] - g[k - 1]);
  }
  if (k + 1 >= n) {
    throw BoundaryError("derivative_overlaps: forward scheme needs a successor");
  }
  const Matrix diff = track.point(k + 1).eigenvectors - vk;
  return vk.adjoint() * diff / (g[k + 1] - g[k]);
}

Matrix second_derivative_overlaps(const SpectralTrack& track, std::size_t k) {
  const std::size_t n = track.size();
  if (k == 0 || k + 1 >= n) {
    throw BoundaryError("second_derivative_overlaps: needs an interior index");
  }
  const auto& g = track.grid();
  const double h_minus = g[k] - g[k - 1];
  const double h_plus = g[k + 1] - g[k];
  if (std::abs(h_plus - h_minus) > 1e-9 * std::max(h_plus, h_minus)) {
    throw InvalidInput("second_derivative_overlaps: requires uniform spacing around the index");
  }
  const double h = 0.5 * (h_plus + h_minus);
  const Matrix& vk = track.point(k).eigenvectors;
  const Matrix stencil =
      track.point(k + 1).eigenvectors - 2.0 * vk + track.point(k - 1).eigenvectors;
  return vk.adjoint() * stencil / (h * h);
}

Matrix backward_derivative_overlaps(const Matrix& prev_overlap, double h) {
  if (prev_overlap.rows() != prev_overlap.cols()) {
    throw InvalidInput("backward_derivative_overlaps: overlap must be square");
  }
  if (!(h > 0.0)) throw InvalidInput("backward_derivative_overlaps: spacing must be positive");
  const Index n = prev_overlap.rows();
  // <a_k|b_k> - <a_k|b_{k-1}> with <a_k|b_{k-1}> = conj(<b_{k-1}|a_k>)
  return (Matrix::Identity(n, n) - prev_overlap.adjoint()) / h;
}

Matrix backward_second_derivative_overlaps(const Matrix& prev_overlap,
                                           const Matrix& prev2_overlap, double h) {
  if (prev_overlap.rows() != prev_overlap.cols() || prev2_overlap.rows() != prev_overlap.rows() ||
      prev2_overlap.cols() != prev_overlap.cols()) {
    throw InvalidInput("backward_second_derivative_overlaps: overlaps must be square and equal size");
  }
  if (!(h > 0.0)) {
    throw InvalidInput("backward_second_derivative_overlaps: spacing must be positive");
  }
  const Index n = prev_overlap.rows();
  return (Matrix::Identity(n, n) - 2.0 * prev_overlap.adjoint() + prev2_overlap.adjoint()) /
         (h * h);
}

}  // namespace cdmrg
