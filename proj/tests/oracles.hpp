// Reference computations written directly from definitions, sharing no code
// with the library besides its data types.
#ifndef CDMRG_TESTS_ORACLES_HPP
#define CDMRG_TESTS_ORACLES_HPP

#include <random>
#include <vector>

#include "cdmrg/tensor_network.hpp"

namespace oracle {

using cdmrg::Complex;
using cdmrg::Index;
using cdmrg::Matrix;
using cdmrg::Vector;

// Mixed-radix digits of a basis index, site 0 most significant.
inline std::vector<Index> digits(Index index, const std::vector<Index>& dims) {
  std::vector<Index> out(dims.size());
  for (std::size_t i = dims.size(); i-- > 0;) {
    out[i] = index % dims[i];
    index /= dims[i];
  }
  return out;
}

inline Vector dense_state(const cdmrg::MatrixProductState& psi) {
  std::vector<Index> dims;
  Index total = 1;
  for (const auto& site : psi.sites) {
    dims.push_back(static_cast<Index>(site.size()));
    total *= dims.back();
  }
  Vector out(total);
  for (Index k = 0; k < total; ++k) {
    const auto s = digits(k, dims);
    Matrix acc = Matrix::Identity(1, 1);
    for (std::size_t i = 0; i < dims.size(); ++i) acc = (acc * psi.sites[i][s[i]]).eval();
    out(k) = acc(0, 0);
  }
  return out;
}

inline Matrix dense_operator(const cdmrg::MatrixProductOperator& op) {
  std::vector<Index> out_dims;
  std::vector<Index> in_dims;
  Index rows = 1;
  Index cols = 1;
  for (const auto& w : op.sites) {
    out_dims.push_back(w.d_out);
    in_dims.push_back(w.d_in);
    rows *= w.d_out;
    cols *= w.d_in;
  }
  Matrix out(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const auto so = digits(r, out_dims);
    for (Index c = 0; c < cols; ++c) {
      const auto si = digits(c, in_dims);
      Matrix acc = Matrix::Identity(1, 1);
      for (std::size_t i = 0; i < op.sites.size(); ++i) {
        acc = (acc * op.sites[i].blocks[so[i] * op.sites[i].d_in + si[i]]).eval();
      }
      out(r, c) = acc(0, 0);
    }
  }
  return out;
}

inline Matrix random_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = Complex(g(rng), g(rng));
  return m;
}

inline Matrix random_hermitian(Index n, std::mt19937_64& rng) {
  const Matrix m = random_matrix(n, n, rng);
  return 0.5 * (m + m.adjoint());
}

// Random MPS with open boundaries and arbitrary (unnormalized) tensors.
inline cdmrg::MatrixProductState random_state(const std::vector<Index>& bonds, Index d,
                                             std::mt19937_64& rng) {
  cdmrg::MatrixProductState psi;
  for (std::size_t i = 0; i + 1 < bonds.size(); ++i) {
    cdmrg::SiteTensor t;
    for (Index s = 0; s < d; ++s) t.push_back(random_matrix(bonds[i], bonds[i + 1], rng));
    psi.sites.push_back(t);
  }
  return psi;
}

inline cdmrg::MatrixProductOperator random_operator(const std::vector<Index>& bonds, Index d,
                                                   std::mt19937_64& rng) {
  cdmrg::MatrixProductOperator op;
  for (std::size_t i = 0; i + 1 < bonds.size(); ++i) {
    cdmrg::MpoTensor w;
    w.d_out = d;
    w.d_in = d;
    for (Index k = 0; k < d * d; ++k) w.blocks.push_back(random_matrix(bonds[i], bonds[i + 1], rng));
    op.sites.push_back(w);
  }
  return op;
}

// Open-chain spin Hamiltonians, site 0 most significant.
inline Matrix site_op(const Matrix& op, int site, int n) {
  Matrix out = Matrix::Identity(1, 1);
  for (int i = 0; i < n; ++i) {
    const Matrix f = i == site ? op : Matrix::Identity(2, 2);
    Matrix next(out.rows() * 2, out.cols() * 2);
    for (Index a = 0; a < out.rows(); ++a)
      for (Index b = 0; b < out.cols(); ++b) next.block(2 * a, 2 * b, 2, 2) = out(a, b) * f;
    out = next;
  }
  return out;
}

inline Matrix tfim(int n, double j, double h) {
  const Index dim = Index{1} << n;
  Matrix out = Matrix::Zero(dim, dim);
  for (int i = 0; i + 1 < n; ++i)
    out -= j * site_op(cdmrg::pauli_z(), i, n) * site_op(cdmrg::pauli_z(), i + 1, n);
  for (int i = 0; i < n; ++i) out -= h * site_op(cdmrg::pauli_x(), i, n);
  return out;
}

inline Matrix heisenberg(int n, double j) {
  const Index dim = Index{1} << n;
  Matrix out = Matrix::Zero(dim, dim);
  for (int i = 0; i + 1 < n; ++i) {
    for (const Matrix& p : {cdmrg::pauli_x(), cdmrg::pauli_y(), cdmrg::pauli_z()}) {
      out += 0.25 * j * site_op(p, i, n) * site_op(p, i + 1, n);
    }
  }
  return out;
}

}  // namespace oracle

#endif  // CDMRG_TESTS_ORACLES_HPP
