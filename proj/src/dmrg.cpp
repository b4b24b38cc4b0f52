#include "cdmrg/dmrg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cdmrg/dense_eigen.hpp"
#include "cdmrg/spectral.hpp"

namespace cdmrg {

void SweepConfig::validate() const {
  if (max_bond < 1) throw InvalidInput("SweepConfig: max_bond must be positive");
  if (num_sweeps < 1) throw InvalidInput("SweepConfig: num_sweeps must be positive");
  if (!(energy_tol > 0.0) || !std::isfinite(energy_tol)) {
    throw InvalidInput("SweepConfig: energy_tol must be positive");
  }
  if (dense_limit < 1) throw InvalidInput("SweepConfig: dense_limit must be positive");
  policy.validate();
}

bool ContinuationScan::all_converged() const {
  return std::all_of(points.begin(), points.end(),
                     [](const ScanPoint& p) { return p.result.converged; });
}

Matrix effective_hamiltonian(const Environment& left, const Environment& right,
                             const MpoTensor& w1, const MpoTensor& w2, Index dense_limit) {
  if (static_cast<Index>(left.size()) != w1.left_dim() ||
      static_cast<Index>(right.size()) != w2.right_dim() || w1.right_dim() != w2.left_dim()) {
    throw InvalidInput("effective_hamiltonian: environment and MPO bonds do not match");
  }
  const Index dl = left.front().rows();
  const Index dr = right.front().rows();
  const Index d1 = w1.d_out;
  const Index d2 = w2.d_out;
  const Index na = d1 * dl;
  const Index nb = d2 * dr;
  if (na * nb > dense_limit) {
    throw InvalidInput("effective_hamiltonian: dimension " + std::to_string(na * nb) +
                       " exceeds the dense limit " + std::to_string(dense_limit) +
                       "; lower max_bond");
  }
  Matrix h = Matrix::Zero(na * nb, na * nb);
  for (Index mid = 0; mid < w1.right_dim(); ++mid) {
    Matrix a = Matrix::Zero(na, na);
    for (Index w = 0; w < w1.left_dim(); ++w) {
      for (Index s = 0; s < d1; ++s) {
        for (Index t = 0; t < d1; ++t) {
          const Complex c = w1.block(s, t)(w, mid);
          if (c != Complex{}) a.block(s * dl, t * dl, dl, dl) += c * left[w];
        }
      }
    }
    if (a.isZero(0.0)) continue;
    Matrix b = Matrix::Zero(nb, nb);
    for (Index w = 0; w < w2.right_dim(); ++w) {
      for (Index s = 0; s < d2; ++s) {
        for (Index t = 0; t < d2; ++t) {
          const Complex c = w2.block(s, t)(mid, w);
          if (c != Complex{}) b.block(s * dr, t * dr, dr, dr) += c * right[w];
        }
      }
    }
    for (Index j = 0; j < nb; ++j) {
      for (Index i = 0; i < nb; ++i) {
        if (b(i, j) != Complex{}) h.block(i * na, j * na, na, na) += b(i, j) * a;
      }
    }
  }
  return h;
}

namespace {

SweepConfig capped(SweepConfig cfg) {
  cfg.policy.max_kept = cfg.max_bond;
  return cfg;
}

BondRecord make_record(std::size_t bond, const SplitResult& split) {
  BondRecord r;
  r.bond = bond;
  r.singular_values = split.all_singular_values;
  r.charges1 = split.outcome.weights.charges1;
  r.charges2 = split.outcome.weights.charges2;
  r.effective = split.outcome.weights.effective;
  r.kept = split.outcome.selection.kept;
  r.discarded_weight = split.spectrum.discarded_weight;
  r.degenerate = split.outcome.degenerate;
  return r;
}

void check_operator_matches(const MatrixProductOperator& h, const MatrixProductState& psi) {
  h.check_consistency();
  psi.check_consistency();
  if (h.size() != psi.size()) throw InvalidInput("ground_state: MPO and state lengths differ");
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (h.sites[i].d_out != psi.physical_dim(i) || h.sites[i].d_in != psi.physical_dim(i)) {
      throw InvalidInput("ground_state: physical dimension mismatch at site " + std::to_string(i));
    }
  }
}

DmrgResult single_site_solve(const MatrixProductOperator& h, const MatrixProductState& init,
                             double initial_energy) {
  const MpoTensor& w = h.sites[0];
  const Eigenpairs eig = lowest_eigenpairs(w.local_operator(0, 0), 1);
  DmrgResult res;
  res.initial_energy = initial_energy;
  res.state = init;
  for (Index s = 0; s < w.d_out; ++s) res.state.sites[0][s](0, 0) = eig.vectors(s, 0);
  res.state.canonical_center = 0;
  res.energy = eig.values(0);
  res.sweep_energies = {res.energy};
  res.converged = true;
  return res;
}

}  // namespace

DmrgResult ground_state(const MatrixProductOperator& h, const MatrixProductState& init,
                        const SweepConfig& cfg, const SelectionRule& rule) {
  cfg.validate();
  check_operator_matches(h, init);
  if (std::abs(norm(init) - 1.0) > 1e-8) throw InvalidInput("ground_state: init must be normalized");

  const double initial = expectation(init, h).real();
  const std::size_t n = h.size();
  if (n == 1) return single_site_solve(h, init, initial);

  const SweepConfig cc = capped(cfg);
  const SelectionRule policy = policy_rule(cc.policy);
  const SelectionRule& select = rule ? rule : policy;

  DmrgResult res;
  res.initial_energy = initial;
  res.truncation_log.resize(n - 1);
  MatrixProductState psi = canonicalize(init, 0);

  std::vector<Environment> left(n);
  std::vector<Environment> right(n);
  left[0] = trivial_environment();
  right[n - 1] = trivial_environment();
  for (std::size_t i = n - 1; i > 0; --i) {
    right[i - 1] = extend_right(right[i], psi.sites[i], h.sites[i]);
  }

  auto optimize = [&](std::size_t b, SweepDirection dir) {
    const Matrix heff =
        effective_hamiltonian(left[b], right[b + 1], h.sites[b], h.sites[b + 1], cfg.dense_limit);
    const Eigenpairs eig = lowest_eigenpairs(heff, 1);
    const Index dl = psi.left_dim(b);
    const Index dr = psi.right_dim(b + 1);
    const Index d1 = psi.physical_dim(b);
    const Index d2 = psi.physical_dim(b + 1);
    const Matrix theta = Eigen::Map<const Matrix>(eig.vectors.data(), d1 * dl, d2 * dr);
    SplitResult split = split_two_site(theta, dl, d1, d2, dr, b, select, dir,
                                       std::span<const SiteTensor>(psi.sites).first(b));
    if (static_cast<int>(split.outcome.selection.kept.size()) > cfg.max_bond) {
      throw InvalidInput("ground_state: selection rule kept more than max_bond states");
    }
    res.truncation_log[b] = make_record(b, split);
    psi.sites[b] = std::move(split.left);
    psi.sites[b + 1] = std::move(split.right);
    psi.canonical_center = dir == SweepDirection::right ? b + 1 : b;
  };

  double previous = initial;
  for (int sweep = 0; sweep < cfg.num_sweeps; ++sweep) {
    for (std::size_t b = 0; b + 1 < n; ++b) {
      optimize(b, SweepDirection::right);
      left[b + 1] = extend_left(left[b], psi.sites[b], h.sites[b]);
    }
    for (std::size_t b = n - 1; b-- > 0;) {
      optimize(b, SweepDirection::left);
      right[b] = extend_right(right[b + 1], psi.sites[b + 1], h.sites[b + 1]);
    }
    const double energy = expectation(psi, h).real();
    res.sweep_energies.push_back(energy);
    if (std::abs(energy - previous) < cfg.energy_tol) {
      res.converged = true;
      break;
    }
    previous = energy;
  }
  res.energy = res.sweep_energies.back();
  res.state = std::move(psi);
  return res;
}

namespace {

// Schmidt basis of the left block at one bond, aligned with the previous
// grid point. sites[bond] carries the basis vectors as columns.
struct BondReference {
  std::vector<SiteTensor> sites;
  std::vector<double> p;

  Index dim() const { return static_cast<Index>(p.size()); }
};

// Embeds an overlap block into n x n. Positions without a partner on one
// side get a unit diagonal (treated as stationary).
Matrix pad_overlap(const Matrix& o, Index n) {
  Matrix out = Matrix::Zero(n, n);
  out.topLeftCorner(o.rows(), o.cols()) = o;
  for (Index j = std::min(o.rows(), o.cols()); j < n; ++j) out(j, j) = 1.0;
  return out;
}

Matrix reference_overlap(const BondReference& ref, std::span<const SiteTensor> left_block,
                         const SiteTensor& candidates) {
  const std::size_t b = left_block.size();
  const Matrix t = left_block_transfer(std::span<const SiteTensor>(ref.sites).first(b), left_block);
  return transfer_step(t, ref.sites[b], candidates);
}

std::vector<double> probabilities(std::span<const double> sigma) {
  double total = 0.0;
  for (double s : sigma) total += s * s;
  std::vector<double> p(sigma.size(), 0.0);
  for (std::size_t i = 0; i < sigma.size(); ++i) p[i] = sigma[i] * sigma[i] / total;
  return p;
}

struct ScanContext {
  const std::vector<BondReference>* prev = nullptr;   // point k-1, per bond
  const std::vector<BondReference>* prev2 = nullptr;  // point k-2, per bond
  double h = 0.0;
  TruncationPolicy policy;
};

RuleOutcome tracked_selection(const ScanContext& ctx, const BondCandidates& c) {
  const auto n_cur = static_cast<Index>(c.singular_values.size());
  const std::vector<double> p = probabilities(c.singular_values);
  std::vector<double> q1(c.singular_values.size(), 0.0);
  std::vector<double> q2(c.singular_values.size(), 0.0);
  bool degenerate = false;

  if (ctx.prev != nullptr) {
    const BondReference& r1 = (*ctx.prev)[c.bond];
    const Matrix o1 = reference_overlap(r1, c.left_block, *c.left_vectors);
    Index n = std::max(n_cur, r1.dim());
    Matrix o2;
    if (ctx.prev2 != nullptr) {
      const BondReference& r2 = (*ctx.prev2)[c.bond];
      o2 = reference_overlap(r2, c.left_block, *c.left_vectors);
      n = std::max(n, r2.dim());
    }
    const Alignment al = align_overlap(pad_overlap(o1, n));
    degenerate = al.degenerate;
    const Matrix o1a = apply_alignment(pad_overlap(o1, n), al);

    std::vector<double> pa(static_cast<std::size_t>(n), 0.0);
    for (Index j = 0; j < n; ++j) {
      if (al.order[j] < n_cur) pa[j] = p[al.order[j]];
    }
    const std::vector<double> q1a = charge_first_order(pa, backward_derivative_overlaps(o1a, ctx.h));
    std::vector<double> q2a(static_cast<std::size_t>(n), 0.0);
    if (ctx.prev2 != nullptr) {
      const Matrix o2a = apply_alignment(pad_overlap(o2, n), al);
      q2a = charge_second_order(backward_second_derivative_overlaps(o1a, o2a, ctx.h),
                                ctx.policy.second_order_multiplicity);
    }
    for (Index j = 0; j < n; ++j) {
      if (al.order[j] < n_cur) {
        q1[al.order[j]] = q1a[j];
        q2[al.order[j]] = q2a[j];
      }
    }
  }

  RuleOutcome out;
  out.weights = weights_from_charges(c.singular_values, std::move(q1), std::move(q2), ctx.policy);
  out.selection = select_states(out.weights, ctx.policy);
  out.weights.kept = out.selection.kept;
  out.degenerate = degenerate;
  return out;
}

std::vector<BondReference> build_references(const MatrixProductState& state,
                                             const std::vector<BondReference>* prev,
                                             std::vector<bool>& degenerate) {
  const std::size_t n = state.size();
  std::vector<BondReference> refs;
  degenerate.assign(n > 0 ? n - 1 : 0, false);
  MatrixProductState c = canonicalize(state, 0);
  for (std::size_t b = 0; b + 1 < n; ++b) {
    c = canonicalize(c, b + 1);
    Eigen::BDCSVD<Matrix> svd(group_right(c.sites[b + 1]), Eigen::ComputeThinU);
    const Matrix& x = svd.matrixU();
    const RealVector& s = svd.singularValues();

    BondReference ref;
    ref.sites.assign(c.sites.begin(), c.sites.begin() + static_cast<std::ptrdiff_t>(b));
    SiteTensor basis = c.sites[b];
    for (auto& slice : basis) slice = (slice * x).eval();
    ref.sites.push_back(std::move(basis));
    ref.p = probabilities(std::vector<double>(s.data(), s.data() + s.size()));

    if (prev != nullptr) {
      const BondReference& before = (*prev)[b];
      const Matrix o = left_block_transfer(before.sites, ref.sites);
      const Index dim = std::max(before.dim(), ref.dim());
      const Alignment al = align_overlap(pad_overlap(o, dim));
      degenerate[b] = al.degenerate;
      SiteTensor& site = ref.sites.back();
      for (auto& slice : site) {
        Matrix padded = Matrix::Zero(slice.rows(), dim);
        padded.leftCols(slice.cols()) = slice;
        slice = apply_alignment(padded, al);
      }
      RealVector pv = RealVector::Zero(dim);
      for (std::size_t i = 0; i < ref.p.size(); ++i) pv(static_cast<Index>(i)) = ref.p[i];
      pv = apply_alignment(pv, al);
      ref.p.assign(pv.data(), pv.data() + pv.size());
    }
    refs.push_back(std::move(ref));
  }
  return refs;
}

Matrix psd_sqrt(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(m));
  const RealVector roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * roots.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
}

// Tr[(D rho)^dagger (D rho)] with D rho = i d(rho) - [A, rho], all in the
// Schmidt basis of the current point, backward differences.
double coherence_penalty(const std::vector<BondReference>& prev,
                         const std::vector<BondReference>& cur, double h) {
  double total = 0.0;
  for (std::size_t b = 0; b < cur.size(); ++b) {
    const Matrix o = left_block_transfer(prev[b].sites, cur[b].sites);
    const RealVector p_prev = Eigen::Map<const RealVector>(prev[b].p.data(), prev[b].dim());
    const RealVector p_cur = Eigen::Map<const RealVector>(cur[b].p.data(), cur[b].dim());
    const Matrix rho_prev = o.adjoint() * p_prev.cast<Complex>().asDiagonal() * o;
    const Matrix rho = p_cur.cast<Complex>().asDiagonal();
    const Matrix u = psd_sqrt(rho);
    const Matrix du = (u - psd_sqrt(rho_prev)) / h;
    const Matrix a = (du * u.adjoint() - u * du.adjoint()) / (2.0 * kI);
    const Matrix d = kI * (rho - rho_prev) / h - commutator(a, rho);
    total += (d.adjoint() * d).trace().real();
  }
  return total;
}

double fidelity_with(const Vector& exact, const MatrixProductState& state) {
  const Vector v = to_dense(state);
  if (v.size() != exact.size()) throw InvalidInput("continuation_scan: oracle dimension mismatch");
  return std::norm(exact.dot(v)) / (exact.squaredNorm() * v.squaredNorm());
}

}  // namespace

ContinuationScan continuation_scan(const MpoFamily& family, std::span<const double> grid,
                                   const SweepConfig& cfg, const MatrixProductState& init,
                                   const OracleFamily& oracle) {
  if (grid.empty()) throw InvalidInput("continuation_scan: empty grid");
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (!(grid[k] > grid[k - 1])) throw InvalidInput("continuation_scan: grid must be increasing");
  }
  cfg.validate();
  const SweepConfig cc = capped(cfg);
  if (cfg.policy.uses_second_order()) {
    for (std::size_t k = 2; k < grid.size(); ++k) {
      const double h1 = grid[k] - grid[k - 1];
      const double h2 = grid[k - 1] - grid[k - 2];
      if (std::abs(h1 - h2) > 1e-9 * std::max(std::abs(h1), std::abs(h2))) {
        throw InvalidInput("continuation_scan: second-order charges need a uniform grid");
      }
    }
  }

  ContinuationScan scan;
  scan.grid.assign(grid.begin(), grid.end());
  std::vector<std::vector<BondReference>> refs;
  refs.reserve(grid.size());
  MatrixProductState start = init;

  for (std::size_t k = 0; k < grid.size(); ++k) {
    const MatrixProductOperator h = family(grid[k]);
    ScanContext ctx;
    ctx.policy = cc.policy;
    if (k >= 1) {
      ctx.prev = &refs[k - 1];
      ctx.h = grid[k] - grid[k - 1];
    }
    if (k >= 2) {
      const double h2 = grid[k - 1] - grid[k - 2];
      if (std::abs(ctx.h - h2) <= 1e-9 * std::max(ctx.h, h2)) ctx.prev2 = &refs[k - 2];
    }
    const SelectionRule rule = [&ctx](const BondCandidates& c) { return tracked_selection(ctx, c); };

    ScanPoint point;
    point.parameter = grid[k];
    point.result = ground_state(h, start, cfg, rule);

    refs.push_back(build_references(point.result.state, k >= 1 ? &refs[k - 1] : nullptr,
                                    point.bond_degenerate));
    for (const auto& r : refs.back()) point.bond_probabilities.push_back(r.p);
    if (k >= 1) point.coherence_penalty = coherence_penalty(refs[k - 1], refs[k], ctx.h);
    point.objective = augmented_local_objective(point.result.energy, point.coherence_penalty,
                                                point.curvature_penalty, cfg.policy.lambda1,
                                                cfg.policy.lambda2);
    if (oracle) point.fidelity = fidelity_with(oracle(grid[k]), point.result.state);

    start = point.result.state;
    const double nrm = norm(start);
    for (auto& slice : start.sites[*start.canonical_center]) slice /= nrm;
    scan.points.push_back(std::move(point));
  }
  return scan;
}

}  // namespace cdmrg
