#include "cdmrg/tensor_network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cdmrg {

// (d * dl) x dr, rows s * dl + a
Matrix group_left(const SiteTensor& t) {
  const Index dl = t.front().rows();
  const Index dr = t.front().cols();
  Matrix m(static_cast<Index>(t.size()) * dl, dr);
  for (std::size_t s = 0; s < t.size(); ++s) m.middleRows(static_cast<Index>(s) * dl, dl) = t[s];
  return m;
}

SiteTensor ungroup_left(const Matrix& m, Index d) {
  const Index dl = m.rows() / d;
  SiteTensor t(static_cast<std::size_t>(d));
  for (Index s = 0; s < d; ++s) t[s] = m.middleRows(s * dl, dl);
  return t;
}

// dl x (d * dr), columns s * dr + c
Matrix group_right(const SiteTensor& t) {
  const Index dl = t.front().rows();
  const Index dr = t.front().cols();
  Matrix m(dl, static_cast<Index>(t.size()) * dr);
  for (std::size_t s = 0; s < t.size(); ++s) m.middleCols(static_cast<Index>(s) * dr, dr) = t[s];
  return m;
}

SiteTensor ungroup_right(const Matrix& m, Index d) {
  const Index dr = m.cols() / d;
  SiteTensor t(static_cast<std::size_t>(d));
  for (Index s = 0; s < d; ++s) t[s] = m.middleCols(s * dr, dr);
  return t;
}

namespace {

void left_orthonormalize(MatrixProductState& psi, std::size_t i) {
  const Matrix m = group_left(psi.sites[i]);
  const Index k = std::min(m.rows(), m.cols());
  Eigen::HouseholderQR<Matrix> qr(m);
  const Matrix q = qr.householderQ() * Matrix::Identity(m.rows(), k);
  const Matrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  psi.sites[i] = ungroup_left(q, psi.physical_dim(i));
  for (auto& slice : psi.sites[i + 1]) slice = (r * slice).eval();
}

void right_orthonormalize(MatrixProductState& psi, std::size_t i) {
  const Matrix m = group_right(psi.sites[i]);
  const Matrix mh = m.adjoint();
  const Index k = std::min(mh.rows(), mh.cols());
  Eigen::HouseholderQR<Matrix> qr(mh);
  const Matrix q = qr.householderQ() * Matrix::Identity(mh.rows(), k);
  const Matrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  psi.sites[i] = ungroup_right(q.adjoint(), psi.physical_dim(i));
  const Matrix rh = r.adjoint();
  for (auto& slice : psi.sites[i - 1]) slice = (slice * rh).eval();
}

void check_same_physical(const MatrixProductState& a, const MatrixProductState& b, const char* who) {
  if (a.size() != b.size()) throw InvalidInput(std::string(who) + ": site counts differ");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.physical_dim(i) != b.physical_dim(i)) {
      throw InvalidInput(std::string(who) + ": physical dimensions differ");
    }
  }
}

}  // namespace

Index MatrixProductState::max_bond_dim() const {
  Index m = 1;
  for (std::size_t i = 0; i + 1 < sites.size(); ++i) m = std::max(m, bond_dim(i));
  return m;
}

void MatrixProductState::check_consistency() const {
  if (sites.empty()) throw InvalidInput("MatrixProductState: no sites");
  for (std::size_t i = 0; i < sites.size(); ++i) {
    if (sites[i].empty()) throw InvalidInput("MatrixProductState: site without physical index");
    for (const auto& slice : sites[i]) {
      if (slice.rows() != left_dim(i) || slice.cols() != right_dim(i)) {
        throw InvalidInput("MatrixProductState: ragged site tensor");
      }
    }
    if (i + 1 < sites.size() && right_dim(i) != left_dim(i + 1)) {
      throw InvalidInput("MatrixProductState: inconsistent bond dimension");
    }
  }
  if (left_dim(0) != 1 || right_dim(sites.size() - 1) != 1) {
    throw InvalidInput("MatrixProductState: boundary bonds must have dimension 1");
  }
}

Matrix MpoTensor::local_operator(Index w, Index w_next) const {
  Matrix op(d_out, d_in);
  for (Index s = 0; s < d_out; ++s) {
    for (Index t = 0; t < d_in; ++t) op(s, t) = block(s, t)(w, w_next);
  }
  return op;
}

void MatrixProductOperator::check_consistency() const {
  if (sites.empty()) throw InvalidInput("MatrixProductOperator: no sites");
  for (std::size_t i = 0; i < sites.size(); ++i) {
    const auto& w = sites[i];
    if (static_cast<Index>(w.blocks.size()) != w.d_out * w.d_in) {
      throw InvalidInput("MatrixProductOperator: block count does not match physical dims");
    }
    if (i + 1 < sites.size() && w.right_dim() != sites[i + 1].left_dim()) {
      throw InvalidInput("MatrixProductOperator: inconsistent bond dimension");
    }
  }
  if (sites.front().left_dim() != 1 || sites.back().right_dim() != 1) {
    throw InvalidInput("MatrixProductOperator: boundary bonds must have dimension 1");
  }
}

SelectionRule policy_rule(const TruncationPolicy& policy) {
  return [policy](const BondCandidates& c) {
    const std::size_t n = c.singular_values.size();
    RuleOutcome out;
    out.weights = weights_from_charges(c.singular_values, std::vector<double>(n, 0.0),
                                       std::vector<double>(n, 0.0), policy);
    out.selection = select_states(out.weights, policy);
    out.weights.kept = out.selection.kept;
    return out;
  };
}

Matrix two_site_theta(const SiteTensor& a, const SiteTensor& b) {
  const Index dl = a.front().rows();
  const Index dr = b.front().cols();
  const auto d1 = static_cast<Index>(a.size());
  const auto d2 = static_cast<Index>(b.size());
  Matrix theta(d1 * dl, d2 * dr);
  for (Index s1 = 0; s1 < d1; ++s1) {
    for (Index s2 = 0; s2 < d2; ++s2) {
      theta.block(s1 * dl, s2 * dr, dl, dr) = a[s1] * b[s2];
    }
  }
  return theta;
}

SplitResult split_two_site(const Matrix& theta, Index dl, Index d1, Index d2, Index dr,
                           std::size_t bond, const SelectionRule& rule, SweepDirection absorb,
                           std::span<const SiteTensor> left_block) {
  if (theta.rows() != d1 * dl || theta.cols() != d2 * dr) {
    throw InvalidInput("split_two_site: theta shape does not match dimensions");
  }
  Eigen::BDCSVD<Matrix> svd(theta, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RealVector& sv = svd.singularValues();
  if (sv.size() == 0 || !(sv(0) > 0.0)) {
    throw NumericalError("svd_truncate: zero matrix at bond");
  }
  SplitResult out;
  out.all_singular_values.assign(sv.data(), sv.data() + sv.size());
  // Below the numerical rank: exact zeros, never kept.
  const double rank_floor = sv(0) * std::numeric_limits<double>::epsilon() *
                            static_cast<double>(std::max(theta.rows(), theta.cols()));
  for (double& s : out.all_singular_values) {
    if (s <= rank_floor) s = 0.0;
  }

  const Matrix& u = svd.matrixU();
  const SiteTensor candidates = ungroup_left(u, d1);
  BondCandidates view{bond, out.all_singular_values, &candidates, left_block};
  out.outcome = rule(view);
  const auto& kept = out.outcome.selection.kept;
  const auto& amps = out.outcome.selection.amplitudes;
  const auto r = static_cast<Index>(kept.size());

  double kept_sq = 0.0;
  double total_sq = 0.0;
  for (double s : out.all_singular_values) total_sq += s * s;
  Matrix u_kept(u.rows(), r);
  Matrix vh_kept(r, theta.cols());
  for (Index j = 0; j < r; ++j) {
    u_kept.col(j) = u.col(kept[j]);
    vh_kept.row(j) = svd.matrixV().col(kept[j]).adjoint();
    kept_sq += out.all_singular_values[kept[j]] * out.all_singular_values[kept[j]];
  }
  out.spectrum.singular_values = amps;
  out.spectrum.discarded_weight = std::max(0.0, total_sq - kept_sq);

  const RealVector amp_vec = Eigen::Map<const RealVector>(amps.data(), r);
  if (absorb == SweepDirection::right) {
    out.left = ungroup_left(u_kept, d1);
    out.right = ungroup_right(amp_vec.cast<Complex>().asDiagonal() * vh_kept, d2);
  } else {
    out.left = ungroup_left(u_kept * amp_vec.cast<Complex>().asDiagonal(), d1);
    out.right = ungroup_right(vh_kept, d2);
  }
  return out;
}

MatrixProductState from_product_state(std::span<const Vector> local_states) {
  if (local_states.empty()) throw InvalidInput("from_product_state: no sites");
  MatrixProductState psi;
  for (const auto& v : local_states) {
    if (std::abs(v.norm() - 1.0) > 1e-12) {
      throw InvalidInput("from_product_state: local state is not normalized");
    }
    SiteTensor t(static_cast<std::size_t>(v.size()));
    for (Index s = 0; s < v.size(); ++s) t[s] = Matrix::Constant(1, 1, v(s));
    psi.sites.push_back(std::move(t));
  }
  psi.canonical_center = 0;
  return psi;
}

MatrixProductState random_mps(std::size_t sites, Index physical_dim, Index chi,
                              std::mt19937_64& rng) {
  if (sites == 0 || physical_dim < 1 || chi < 1) {
    throw InvalidInput("random_mps: sizes must be positive");
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  auto bond = [&](std::size_t i) -> Index {
    // bond to the right of site i
    if (i + 1 >= sites) return 1;
    double left = std::pow(static_cast<double>(physical_dim), static_cast<double>(i + 1));
    double right = std::pow(static_cast<double>(physical_dim), static_cast<double>(sites - i - 1));
    return static_cast<Index>(std::min({static_cast<double>(chi), left, right}));
  };
  MatrixProductState psi;
  for (std::size_t i = 0; i < sites; ++i) {
    const Index dl = i == 0 ? 1 : bond(i - 1);
    const Index dr = bond(i);
    SiteTensor t(static_cast<std::size_t>(physical_dim));
    for (auto& slice : t) {
      slice.resize(dl, dr);
      for (Index r = 0; r < dl; ++r) {
        for (Index c = 0; c < dr; ++c) slice(r, c) = Complex(normal(rng), normal(rng));
      }
    }
    psi.sites.push_back(std::move(t));
  }
  psi = canonicalize(psi, 0);
  const double nrm = norm(psi);
  for (auto& slice : psi.sites[0]) slice /= nrm;
  return psi;
}

MatrixProductState canonicalize(const MatrixProductState& psi, std::size_t center) {
  psi.check_consistency();
  if (center >= psi.size()) throw InvalidInput("canonicalize: center out of range");
  MatrixProductState out = psi;
  for (std::size_t i = 0; i < center; ++i) left_orthonormalize(out, i);
  for (std::size_t i = out.size() - 1; i > center; --i) right_orthonormalize(out, i);
  out.canonical_center = center;
  return out;
}

double left_isometry_residual(const SiteTensor& t) {
  const Index dr = t.front().cols();
  Matrix acc = Matrix::Zero(dr, dr);
  for (const auto& slice : t) acc += slice.adjoint() * slice;
  return max_abs(acc - Matrix::Identity(dr, dr));
}

double right_isometry_residual(const SiteTensor& t) {
  const Index dl = t.front().rows();
  Matrix acc = Matrix::Zero(dl, dl);
  for (const auto& slice : t) acc += slice * slice.adjoint();
  return max_abs(acc - Matrix::Identity(dl, dl));
}

Matrix transfer_step(const Matrix& t, const SiteTensor& a, const SiteTensor& b) {
  Matrix out = Matrix::Zero(a.front().cols(), b.front().cols());
  for (std::size_t s = 0; s < a.size(); ++s) out.noalias() += a[s].adjoint() * (t * b[s]);
  return out;
}

Matrix left_block_transfer(std::span<const SiteTensor> a, std::span<const SiteTensor> b) {
  if (a.size() != b.size()) throw InvalidInput("left_block_transfer: block lengths differ");
  Matrix t = Matrix::Ones(1, 1);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].size() != b[i].size()) {
      throw InvalidInput("left_block_transfer: physical dimensions differ");
    }
    t = transfer_step(t, a[i], b[i]);
  }
  return t;
}

Complex inner_product(const MatrixProductState& a, const MatrixProductState& b) {
  a.check_consistency();
  b.check_consistency();
  check_same_physical(a, b, "inner_product");
  return left_block_transfer(a.sites, b.sites)(0, 0);
}

double norm(const MatrixProductState& psi) { return std::sqrt(inner_product(psi, psi).real()); }

Environment trivial_environment() { return {Matrix::Ones(1, 1)}; }

Environment extend_left(const Environment& left, const SiteTensor& a, const MpoTensor& w) {
  const Index wl = w.left_dim();
  const Index wr = w.right_dim();
  const Index d = static_cast<Index>(a.size());
  const Index dr = a.front().cols();
  Environment out(static_cast<std::size_t>(wr), Matrix::Zero(dr, dr));
  for (Index wi = 0; wi < wl; ++wi) {
    for (Index t = 0; t < d; ++t) {
      const Matrix lt = left[wi] * a[t];
      for (Index s = 0; s < d; ++s) {
        const Matrix& blk = w.block(s, t);
        Matrix proj;
        bool computed = false;
        for (Index wo = 0; wo < wr; ++wo) {
          const Complex c = blk(wi, wo);
          if (c == Complex{}) continue;
          if (!computed) {
            proj = a[s].adjoint() * lt;
            computed = true;
          }
          out[wo] += c * proj;
        }
      }
    }
  }
  return out;
}

Environment extend_right(const Environment& right, const SiteTensor& b, const MpoTensor& w) {
  const Index wl = w.left_dim();
  const Index wr = w.right_dim();
  const Index d = static_cast<Index>(b.size());
  const Index dl = b.front().rows();
  Environment out(static_cast<std::size_t>(wl), Matrix::Zero(dl, dl));
  for (Index wo = 0; wo < wr; ++wo) {
    for (Index t = 0; t < d; ++t) {
      const Matrix rt = right[wo] * b[t].transpose();
      for (Index s = 0; s < d; ++s) {
        const Matrix& blk = w.block(s, t);
        Matrix proj;
        bool computed = false;
        for (Index wi = 0; wi < wl; ++wi) {
          const Complex c = blk(wi, wo);
          if (c == Complex{}) continue;
          if (!computed) {
            proj = b[s].conjugate() * rt;
            computed = true;
          }
          out[wi] += c * proj;
        }
      }
    }
  }
  return out;
}

Complex expectation(const MatrixProductState& psi, const MatrixProductOperator& op) {
  psi.check_consistency();
  op.check_consistency();
  if (psi.size() != op.size()) throw InvalidInput("expectation: site counts differ");
  Environment env = trivial_environment();
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const auto& w = op.sites[i];
    if (w.d_out != psi.physical_dim(i) || w.d_in != psi.physical_dim(i)) {
      throw InvalidInput("expectation: physical dimension mismatch");
    }
    env = extend_left(env, psi.sites[i], w);
  }
  const Complex nrm = inner_product(psi, psi);
  return env[0](0, 0) / nrm;
}

TruncationResult svd_truncate(const MatrixProductState& psi, std::size_t bond,
                              const SelectionRule& rule, SweepDirection absorb) {
  psi.check_consistency();
  if (bond + 1 >= psi.size()) throw InvalidInput("svd_truncate: bond out of range");
  if (!psi.canonical_center ||
      (*psi.canonical_center != bond && *psi.canonical_center != bond + 1)) {
    throw InvalidInput("svd_truncate: canonical center must be adjacent to the bond");
  }
  const SiteTensor& a = psi.sites[bond];
  const SiteTensor& b = psi.sites[bond + 1];
  const Matrix theta = two_site_theta(a, b);
  SplitResult split = split_two_site(theta, a.front().rows(), static_cast<Index>(a.size()),
                                     static_cast<Index>(b.size()), b.front().cols(), bond, rule,
                                     absorb, std::span(psi.sites).first(bond));
  TruncationResult out{psi, std::move(split.spectrum), std::move(split.outcome)};
  out.state.sites[bond] = std::move(split.left);
  out.state.sites[bond + 1] = std::move(split.right);
  out.state.canonical_center = absorb == SweepDirection::right ? bond + 1 : bond;
  return out;
}

std::vector<double> entanglement_spectrum(const MatrixProductState& psi, std::size_t bond) {
  if (bond + 1 >= psi.size()) throw InvalidInput("entanglement_spectrum: invalid bond");
  const MatrixProductState c = canonicalize(psi, bond + 1);
  Eigen::BDCSVD<Matrix> svd(group_right(c.sites[bond + 1]));
  const RealVector sv = svd.singularValues();
  const double total = sv.squaredNorm();
  std::vector<double> p(static_cast<std::size_t>(sv.size()));
  for (Index i = 0; i < sv.size(); ++i) p[i] = sv(i) * sv(i) / total;
  return p;
}

Vector to_dense(const MatrixProductState& psi) {
  psi.check_consistency();
  Matrix acc = Matrix::Ones(1, 1);
  for (const auto& site : psi.sites) {
    const auto d = static_cast<Index>(site.size());
    Matrix next(acc.rows() * d, site.front().cols());
    for (Index r = 0; r < acc.rows(); ++r) {
      for (Index s = 0; s < d; ++s) next.row(r * d + s) = acc.row(r) * site[s];
    }
    acc = std::move(next);
  }
  return acc.col(0);
}

Matrix to_dense(const MatrixProductOperator& op) {
  op.check_consistency();
  std::vector<Matrix> acc{Matrix::Ones(1, 1)};
  for (const auto& w : op.sites) {
    std::vector<Matrix> next(static_cast<std::size_t>(w.right_dim()),
                             Matrix::Zero(acc[0].rows() * w.d_out, acc[0].cols() * w.d_in));
    for (Index wi = 0; wi < w.left_dim(); ++wi) {
      for (Index wo = 0; wo < w.right_dim(); ++wo) {
        const Matrix local = w.local_operator(wi, wo);
        if (local.isZero(0.0)) continue;
        const Matrix& a = acc[wi];
        for (Index r = 0; r < a.rows(); ++r) {
          for (Index c = 0; c < a.cols(); ++c) {
            if (a(r, c) == Complex{}) continue;
            next[wo].block(r * w.d_out, c * w.d_in, w.d_out, w.d_in) += a(r, c) * local;
          }
        }
      }
    }
    acc = std::move(next);
  }
  return acc[0];
}

}  // namespace cdmrg
