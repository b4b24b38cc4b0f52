#include <cmath>
#include <random>
#include <vector>

#include <doctest.h>

#include "cdmrg/spectral.hpp"
#include "oracles.hpp"

using namespace cdmrg;

namespace {

// Ground state (-sin, cos) and excited state (cos, sin) of angle theta = omega * lambda.
Matrix rotating_family(double omega, double lambda) {
  const double th = omega * lambda;
  return std::cos(2 * th) * pauli_z() + std::sin(2 * th) * pauli_x();
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = a + (b - a) * i / (n - 1);
  return g;
}

}  // namespace

TEST_CASE("eigh_sorted: diagonal input") {
  Matrix h = Matrix::Zero(2, 2);
  h(0, 0) = 0.7;
  h(1, 1) = 0.3;
  const SpectralPoint p = eigh_sorted(h);
  CHECK(p.eigenvalues(0) == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(p.eigenvalues(1) == doctest::Approx(0.7).epsilon(1e-14));
  CHECK(std::abs(p.eigenvectors(1, 0)) == doctest::Approx(1.0));
  CHECK(std::abs(p.eigenvectors(0, 1)) == doctest::Approx(1.0));
}

TEST_CASE("eigh_sorted: two-level avoided crossing") {
  Matrix h(2, 2);
  h << -0.5, 0.1, 0.1, 0.5;
  const SpectralPoint p = eigh_sorted(h);
  CHECK(std::abs(p.eigenvalues(0) + std::sqrt(0.26)) < 1e-14);
  CHECK(std::abs(p.eigenvalues(1) - std::sqrt(0.26)) < 1e-14);
}

TEST_CASE("eigh_sorted: reconstruction and orthonormality of random hermitian matrices") {
  std::mt19937_64 rng(3);
  for (int n : {1, 3, 6}) {
    const Matrix h = oracle::random_hermitian(n, rng);
    const SpectralPoint p = eigh_sorted(h);
    const Matrix& v = p.eigenvectors;
    const Matrix back = v * p.eigenvalues.cast<Complex>().asDiagonal() * v.adjoint();
    CHECK(max_abs(back - h) < 1e-10);
    CHECK(max_abs(v.adjoint() * v - Matrix::Identity(n, n)) < 1e-12);
    for (Index a = 1; a < n; ++a) CHECK(p.eigenvalues(a) >= p.eigenvalues(a - 1));
  }
}

TEST_CASE("eigh_sorted: rejects non-hermitian and non-square input") {
  Matrix h(2, 2);
  h << 0.0, 1.0, 0.0, 0.0;
  CHECK_THROWS_AS(eigh_sorted(h), InvalidInput);
  CHECK_THROWS_AS(eigh_sorted(Matrix::Zero(2, 3)), InvalidInput);
}

TEST_CASE("align_phases: identical points are unchanged") {
  Matrix h(2, 2);
  h << 0.2, 0.3, 0.3, -0.4;
  const SpectralPoint p = eigh_sorted(h);
  const AlignedPoint a = align_phases(p, p);
  CHECK(max_abs(a.point.eigenvectors - p.eigenvectors) < 1e-14);
  CHECK_FALSE(a.degenerate);
}

TEST_CASE("align_phases: a sign flip of one column is undone") {
  Matrix h(2, 2);
  h << 0.2, 0.3, 0.3, -0.4;
  const SpectralPoint p = eigh_sorted(h);
  SpectralPoint flipped = p;
  flipped.eigenvectors.col(0) *= -1.0;
  const AlignedPoint a = align_phases(p, flipped);
  CHECK(max_abs(a.point.eigenvectors - p.eigenvectors) < 1e-14);
  const Complex overlap = p.eigenvectors.col(0).dot(a.point.eigenvectors.col(0));
  CHECK(overlap.real() == doctest::Approx(1.0));
  CHECK(std::abs(overlap.imag()) < 1e-14);
}

TEST_CASE("align_phases: complex phases are removed") {
  Matrix h(3, 3);
  std::mt19937_64 rng(5);
  h = oracle::random_hermitian(3, rng);
  const SpectralPoint p = eigh_sorted(h);
  SpectralPoint rotated = p;
  for (Index a = 0; a < 3; ++a) rotated.eigenvectors.col(a) *= std::polar(1.0, 0.7 * (a + 1));
  const AlignedPoint a = align_phases(p, rotated);
  CHECK(max_abs(a.point.eigenvectors - p.eigenvectors) < 1e-13);
}

TEST_CASE("SpectralTrack: smooth avoided crossing keeps consecutive overlaps near one") {
  const auto grid = linspace(-1.0, 1.0, 100);
  const auto track = SpectralTrack::from_family(
      grid, [](double l) -> Matrix { return l * pauli_z() + 0.1 * pauli_x(); });
  CHECK_FALSE(track.any_degenerate());
  for (std::size_t k = 1; k < track.size(); ++k) {
    const Matrix o = track.point(k - 1).eigenvectors.adjoint() * track.point(k).eigenvectors;
    for (Index a = 0; a < 2; ++a) {
      CHECK(o(a, a).real() >= 0.99);
      CHECK(std::abs(o(a, a).imag()) < 1e-12);
    }
  }
}

TEST_CASE("SpectralTrack: a true crossing is flagged") {
  const auto grid = linspace(-1.0, 1.0, 5);
  const auto track =
      SpectralTrack::from_family(grid, [](double l) -> Matrix { return l * pauli_z(); });
  CHECK(track.any_degenerate());
}

TEST_CASE("derivative_overlaps: constant track gives zero") {
  const auto grid = linspace(0.0, 1.0, 7);
  Matrix h(2, 2);
  h << 0.3, 0.1, 0.1, -0.2;
  const auto track = SpectralTrack::from_family(grid, [&](double) { return h; });
  for (std::size_t k = 0; k < track.size(); ++k) {
    if (k > 0 && k + 1 < track.size()) {
      CHECK(max_abs(derivative_overlaps(track, k)) < 1e-14);
      CHECK(max_abs(second_derivative_overlaps(track, k)) < 1e-14);
    }
  }
  CHECK(max_abs(derivative_overlaps(track, 0, FiniteDifference::forward)) < 1e-14);
}

TEST_CASE("derivative_overlaps: rotating basis has |D01| = omega to second order") {
  const double omega = 2.0;
  for (double h : {0.02, 0.01}) {
    const auto grid = linspace(0.0, 4 * h, 5);
    const auto track =
        SpectralTrack::from_family(grid, [&](double l) { return rotating_family(omega, l); });
    const Matrix d = derivative_overlaps(track, 2);
    const double expected = omega * std::sin(omega * h) / (omega * h);
    CHECK(std::abs(std::abs(d(0, 1)) - expected) < 1e-12);
    CHECK(std::abs(std::abs(d(0, 1)) - omega) < omega * omega * omega * h * h);
    CHECK(std::abs(d(0, 0)) < 1e-12);
    const Matrix d2 = second_derivative_overlaps(track, 2);
    const double expected2 = (2 * std::cos(omega * h) - 2) / (h * h);
    CHECK(std::abs(d2(0, 0).real() - expected2) < 1e-8);
  }
}

TEST_CASE("derivative_overlaps: boundary points without a stencil throw") {
  const auto grid = linspace(0.0, 1.0, 4);
  const auto track =
      SpectralTrack::from_family(grid, [](double l) { return rotating_family(1.0, l); });
  CHECK_THROWS_AS(derivative_overlaps(track, 0), BoundaryError);
  CHECK_THROWS_AS(derivative_overlaps(track, 3), BoundaryError);
  CHECK_THROWS_AS(derivative_overlaps(track, 3, FiniteDifference::forward), BoundaryError);
  CHECK_THROWS_AS(second_derivative_overlaps(track, 0), BoundaryError);
  CHECK_THROWS(derivative_overlaps(track, 10));
}

TEST_CASE("derivative_overlaps: anti-hermitian part dominates and D + D^dagger is O(h^2)") {
  std::vector<double> norms;
  for (double h : {0.04, 0.02, 0.01}) {
    const auto grid = linspace(0.3 - h, 0.3 + h, 3);
    const auto track = SpectralTrack::from_family(grid, [](double l) -> Matrix {
      Matrix m(3, 3);
      m << 1.0 + l, 0.3 * l, 0.1, 0.3 * l, -l * l, 0.2 * l, 0.1, 0.2 * l, 0.5 - l;
      return m;
    });
    const Matrix d = derivative_overlaps(track, 1);
    norms.push_back(max_abs(d + d.adjoint()));
  }
  CHECK(norms[0] / norms[1] == doctest::Approx(4.0).epsilon(0.2));
  CHECK(norms[1] / norms[2] == doctest::Approx(4.0).epsilon(0.2));
}

TEST_CASE("backward differences agree with the central stencil on a rotating basis") {
  const double omega = 1.5;
  const double h = 0.01;
  const auto grid = linspace(0.0, 2 * h, 3);
  const auto track =
      SpectralTrack::from_family(grid, [&](double l) { return rotating_family(omega, l); });
  const Matrix o1 = track.point(1).eigenvectors.adjoint() * track.point(2).eigenvectors;
  const Matrix o0 = track.point(0).eigenvectors.adjoint() * track.point(2).eigenvectors;
  const Matrix d = backward_derivative_overlaps(o1, h);
  CHECK(std::abs(std::abs(d(0, 1)) - omega) < 1e-3);
  const Matrix d2 = backward_second_derivative_overlaps(o1, o0, h);
  CHECK(std::abs(d2(0, 0).real() + omega * omega) < 1e-3);
}
