#ifndef CDMRG_MODELS_HPP
#define CDMRG_MODELS_HPP

#include <functional>
#include <string_view>
#include <vector>

#include "cdmrg/dense_eigen.hpp"
#include "cdmrg/dmrg.hpp"
#include "cdmrg/tensor_network.hpp"

namespace cdmrg {

// H(lambda) = [[e1, V], [V, e2]] with e1 = lambda^2 - 0.5, e2 = -lambda^2 + 0.5.
struct TwoLevelModel {
  double coupling = 0.1;
  std::vector<double> lambda_grid;

  void validate() const;
};

struct DiabaticPair {
  double e1 = 0.0;
  double e2 = 0.0;
};

DiabaticPair diabatic_energies(double lambda);
Matrix two_level_hamiltonian(const TwoLevelModel& model, double lambda);

// exp(-(e1 - e2)^2 / (2 V^2)); requires V != 0.
double gaussian_transition_probability(const TwoLevelModel& model, double lambda);

struct TimeGrid {
  double t0 = 0.0;
  double t1 = 1.0;
  int steps = 1;

  void validate() const;
  double dt() const { return (t1 - t0) / steps; }
  double time(int n) const { return t0 + (t1 - t0) * n / steps; }
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> states;
  double max_norm_drift = 0.0;
};

using TimeDependentHamiltonian = std::function<Matrix(double)>;

// hbar = 1. Each step applies exp(-i H(t + dt/2) dt) exactly.
Trajectory tdse_propagate(const TimeDependentHamiltonian& h, const Vector& psi0,
                          const TimeGrid& grid);

// diag(v t / 2, -v t / 2) + V sigma_x
Matrix linear_sweep_hamiltonian(double rate, double coupling, double t);

// exp(-2 pi V^2 / v)
double landau_zener_reference(double rate, double coupling);

enum class ChainKind { tfim, heisenberg };

std::string_view to_string(ChainKind kind);
ChainKind chain_kind_from_string(std::string_view name);

// tfim:        H = -J sum Z_i Z_{i+1} - h sum X_i   (Pauli matrices)
// heisenberg:  H =  J sum S_i . S_{i+1}             (spin-1/2, S = sigma / 2)
// Open boundaries.
struct SpinChainSpec {
  ChainKind kind = ChainKind::tfim;
  int sites = 2;
  double field = 1.0;
  double coupling = 1.0;

  void validate() const;
};

MatrixProductOperator build_spin_chain_mpo(const SpinChainSpec& spec);
Matrix dense_spin_chain_hamiltonian(const SpinChainSpec& spec);

// One-site MPO carrying a dense operator.
MatrixProductOperator single_site_mpo(const Matrix& op);

// `op` (dimension 2^k) acting on sites site .. site+k-1 of an n-site qubit
// register (site 0 most significant).
Matrix embed_site_operator(const Matrix& op, int site, int sites);

Matrix kron(const Matrix& a, const Matrix& b);

// Lowest `count` eigenpairs with residual check ||Hv - Ev|| <= 1e-10 (scaled
// by max(1, ||H||)).
Eigenpairs exact_diagonalization(const Matrix& h, Index count,
                                 Index dense_limit = kDefaultDenseLimit);

}  // namespace cdmrg

#endif  // CDMRG_MODELS_HPP
