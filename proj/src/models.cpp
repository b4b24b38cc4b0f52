#include "cdmrg/models.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace cdmrg {

void TwoLevelModel::validate() const {
  if (!std::isfinite(coupling)) throw InvalidInput("TwoLevelModel: coupling must be finite");
  if (lambda_grid.empty()) throw InvalidInput("TwoLevelModel: lambda grid is empty");
}

DiabaticPair diabatic_energies(double lambda) {
  return {lambda * lambda - 0.5, -lambda * lambda + 0.5};
}

Matrix two_level_hamiltonian(const TwoLevelModel& model, double lambda) {
  const DiabaticPair e = diabatic_energies(lambda);
  Matrix h(2, 2);
  h << e.e1, model.coupling, model.coupling, e.e2;
  return h;
}

double gaussian_transition_probability(const TwoLevelModel& model, double lambda) {
  if (model.coupling == 0.0) {
    throw InvalidInput("gaussian_transition_probability: coupling V = 0 makes the formula singular");
  }
  const DiabaticPair e = diabatic_energies(lambda);
  const double gap = e.e1 - e.e2;
  return std::exp(-gap * gap / (2.0 * model.coupling * model.coupling));
}

void TimeGrid::validate() const {
  if (!(t1 > t0)) throw InvalidInput("TimeGrid: t1 must exceed t0");
  if (steps < 1) throw InvalidInput("TimeGrid: steps must be positive");
}

Trajectory tdse_propagate(const TimeDependentHamiltonian& h, const Vector& psi0,
                          const TimeGrid& grid) {
  grid.validate();
  if (std::abs(psi0.norm() - 1.0) > 1e-12) {
    throw InvalidInput("tdse_propagate: initial state is not normalized");
  }
  const double dt = grid.dt();
  Trajectory out;
  out.times.reserve(static_cast<std::size_t>(grid.steps) + 1);
  out.states.reserve(static_cast<std::size_t>(grid.steps) + 1);
  out.times.push_back(grid.t0);
  out.states.push_back(psi0);
  Vector psi = psi0;
  Eigen::SelfAdjointEigenSolver<Matrix> es;
  for (int n = 0; n < grid.steps; ++n) {
    const double t = grid.time(n);
    const Matrix hm = h(t + 0.5 * dt);
    if (hm.rows() != psi.size() || hm.cols() != psi.size()) {
      throw InvalidInput("tdse_propagate: Hamiltonian dimension does not match the state");
    }
    es.compute(hermitian_part(hm));
    Vector phases(psi.size());
    for (Index i = 0; i < psi.size(); ++i) phases(i) = std::exp(-kI * es.eigenvalues()(i) * dt);
    psi = es.eigenvectors() * phases.asDiagonal() * (es.eigenvectors().adjoint() * psi);
    out.max_norm_drift = std::max(out.max_norm_drift, std::abs(psi.norm() - 1.0));
    out.times.push_back(grid.time(n + 1));
    out.states.push_back(psi);
  }
  return out;
}

Matrix linear_sweep_hamiltonian(double rate, double coupling, double t) {
  Matrix h(2, 2);
  h << 0.5 * rate * t, coupling, coupling, -0.5 * rate * t;
  return h;
}

double landau_zener_reference(double rate, double coupling) {
  if (!(rate > 0.0) || !(coupling > 0.0)) {
    throw InvalidInput("landau_zener_reference: rate and coupling must be positive");
  }
  return std::exp(-2.0 * std::numbers::pi * coupling * coupling / rate);
}

std::string_view to_string(ChainKind kind) {
  return kind == ChainKind::tfim ? "tfim" : "heisenberg";
}

ChainKind chain_kind_from_string(std::string_view name) {
  if (name == "tfim") return ChainKind::tfim;
  if (name == "heisenberg") return ChainKind::heisenberg;
  throw InvalidInput("unsupported spin chain kind '" + std::string(name) + "'");
}

void SpinChainSpec::validate() const {
  if (sites < 2) throw InvalidInput("SpinChainSpec: at least 2 sites required");
  if (!std::isfinite(field) || !std::isfinite(coupling)) {
    throw InvalidInput("SpinChainSpec: field and coupling must be finite");
  }
}

namespace {

struct BulkTerm {
  Index row;
  Index col;
  Matrix op;
};

// Upper-triangular bulk MPO: start in row 0, finish in the last column.
struct BulkMpo {
  Index dim;
  std::vector<BulkTerm> terms;
};

BulkMpo bulk_mpo(const SpinChainSpec& spec) {
  const Matrix id = Matrix::Identity(2, 2);
  if (spec.kind == ChainKind::tfim) {
    return {3,
            {{0, 0, id},
             {0, 1, -spec.coupling * pauli_z()},
             {0, 2, -spec.field * pauli_x()},
             {1, 2, pauli_z()},
             {2, 2, id}}};
  }
  const Matrix sx = 0.5 * pauli_x();
  const Matrix sy = 0.5 * pauli_y();
  const Matrix sz = 0.5 * pauli_z();
  return {5,
          {{0, 0, id},
           {0, 1, spec.coupling * sx},
           {0, 2, spec.coupling * sy},
           {0, 3, spec.coupling * sz},
           {1, 4, sx},
           {2, 4, sy},
           {3, 4, sz},
           {4, 4, id}}};
}

MpoTensor mpo_site(const BulkMpo& bulk, bool first, bool last) {
  const Index rows = first ? 1 : bulk.dim;
  const Index cols = last ? 1 : bulk.dim;
  MpoTensor w;
  w.d_out = 2;
  w.d_in = 2;
  w.blocks.assign(4, Matrix::Zero(rows, cols));
  for (const auto& term : bulk.terms) {
    if (first && term.row != 0) continue;
    if (last && term.col != bulk.dim - 1) continue;
    const Index r = first ? 0 : term.row;
    const Index c = last ? 0 : term.col;
    for (Index s = 0; s < 2; ++s) {
      for (Index t = 0; t < 2; ++t) w.block(s, t)(r, c) += term.op(s, t);
    }
  }
  return w;
}

}  // namespace

MatrixProductOperator build_spin_chain_mpo(const SpinChainSpec& spec) {
  spec.validate();
  const BulkMpo bulk = bulk_mpo(spec);
  MatrixProductOperator mpo;
  for (int i = 0; i < spec.sites; ++i) {
    mpo.sites.push_back(mpo_site(bulk, i == 0, i == spec.sites - 1));
  }
  return mpo;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  }
  return out;
}

Matrix embed_site_operator(const Matrix& op, int site, int sites) {
  const Index d = op.rows();
  int span = 0;
  while ((Index{1} << span) < d) ++span;
  if ((Index{1} << span) != d || op.cols() != d || site < 0 || site + span > sites) {
    throw InvalidInput("embed_site_operator: operator does not fit the register");
  }
  const Index left = Index{1} << site;
  const Index right = Index{1} << (sites - site - span);
  Matrix out = Matrix::Zero(left * d * right, left * d * right);
  for (Index l = 0; l < left; ++l) {
    for (Index s = 0; s < d; ++s) {
      for (Index t = 0; t < d; ++t) {
        if (op(s, t) == Complex{}) continue;
        for (Index r = 0; r < right; ++r) {
          out((l * d + s) * right + r, (l * d + t) * right + r) = op(s, t);
        }
      }
    }
  }
  return out;
}

Matrix dense_spin_chain_hamiltonian(const SpinChainSpec& spec) {
  spec.validate();
  const int n = spec.sites;
  const Index dim = Index{1} << n;
  Matrix h = Matrix::Zero(dim, dim);
  if (spec.kind == ChainKind::tfim) {
    for (int i = 0; i + 1 < n; ++i) {
      h -= spec.coupling * embed_site_operator(kron(pauli_z(), pauli_z()), i, n);
    }
    for (int i = 0; i < n; ++i) h -= spec.field * embed_site_operator(pauli_x(), i, n);
    return h;
  }
  for (int i = 0; i + 1 < n; ++i) {
    for (const Matrix& p : {pauli_x(), pauli_y(), pauli_z()}) {
      h += spec.coupling * 0.25 * embed_site_operator(kron(p, p), i, n);
    }
  }
  return h;
}

MatrixProductOperator single_site_mpo(const Matrix& op) {
  if (op.rows() != op.cols()) throw InvalidInput("single_site_mpo: operator must be square");
  MpoTensor w;
  w.d_out = op.rows();
  w.d_in = op.cols();
  for (Index s = 0; s < w.d_out; ++s) {
    for (Index t = 0; t < w.d_in; ++t) w.blocks.push_back(Matrix::Constant(1, 1, op(s, t)));
  }
  MatrixProductOperator mpo;
  mpo.sites.push_back(std::move(w));
  return mpo;
}

Eigenpairs exact_diagonalization(const Matrix& h, Index count, Index dense_limit) {
  if (h.rows() > dense_limit) {
    throw InvalidInput("exact_diagonalization: dimension " + std::to_string(h.rows()) +
                       " exceeds the dense limit " + std::to_string(dense_limit) +
                       "; use fewer sites");
  }
  Eigenpairs eig = lowest_eigenpairs(h, count);
  const double scale = std::max(1.0, max_abs(h));
  for (Index k = 0; k < count; ++k) {
    const double residual = (h * eig.vectors.col(k) - eig.values(k) * eig.vectors.col(k)).norm();
    if (residual > 1e-10 * scale) {
      throw NumericalError("exact_diagonalization: eigenpair residual " + std::to_string(residual));
    }
  }
  return eig;
}

}  // namespace cdmrg
