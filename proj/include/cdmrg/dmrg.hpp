#ifndef CDMRG_DMRG_HPP
#define CDMRG_DMRG_HPP

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "cdmrg/coherence_truncation.hpp"
#include "cdmrg/tensor_network.hpp"

namespace cdmrg {

inline constexpr Index kDefaultDenseLimit = 4096;

struct SweepConfig {
  int max_bond = 32;
  int num_sweeps = 20;
  double energy_tol = 1e-10;
  TruncationPolicy policy;
  Index dense_limit = kDefaultDenseLimit;

  void validate() const;
};

// Last split of one bond during a run.
struct BondRecord {
  std::size_t bond = 0;
  std::vector<double> singular_values;  // every candidate, descending
  std::vector<double> charges1;
  std::vector<double> charges2;
  std::vector<double> effective;
  std::vector<Index> kept;
  double discarded_weight = 0.0;
  bool degenerate = false;
};

struct DmrgResult {
  double energy = 0.0;
  double initial_energy = 0.0;
  MatrixProductState state;
  std::vector<double> sweep_energies;
  std::vector<BondRecord> truncation_log;  // indexed by bond
  bool converged = false;
};

// Two-site effective Hamiltonian on theta flattened column-major, i.e. index
// (s1 * dl + a) + d1 * dl * (s2 * dr + c).
Matrix effective_hamiltonian(const Environment& left, const Environment& right,
                             const MpoTensor& w1, const MpoTensor& w2,
                             Index dense_limit = kDefaultDenseLimit);

// Two-site sweeps, left to right and back. `rule` overrides the selection
// derived from cfg.policy; kept sets are capped at cfg.max_bond either way.
DmrgResult ground_state(const MatrixProductOperator& h, const MatrixProductState& init,
                        const SweepConfig& cfg, const SelectionRule& rule = {});

using MpoFamily = std::function<MatrixProductOperator(double)>;
// Dense ground vector for a parameter value.
using OracleFamily = std::function<Vector(double)>;

struct ScanPoint {
  double parameter = 0.0;
  DmrgResult result;
  // Schmidt probabilities per bond after alignment with the previous point;
  // padded entries are 0.
  std::vector<std::vector<double>> bond_probabilities;
  std::vector<bool> bond_degenerate;
  double coherence_penalty = 0.0;
  double curvature_penalty = 0.0;
  double objective = 0.0;
  std::optional<double> fidelity;
};

struct ContinuationScan {
  std::vector<double> grid;
  std::vector<ScanPoint> points;

  bool all_converged() const;
};

// Solves the grid in order with warm starts. From the second point on, each
// bond split sees charges built from overlaps with the Schmidt bases of the
// previous one or two points (backward differences in the grid parameter).
ContinuationScan continuation_scan(const MpoFamily& family, std::span<const double> grid,
                                   const SweepConfig& cfg, const MatrixProductState& init,
                                   const OracleFamily& oracle = {});

}  // namespace cdmrg

#endif  // CDMRG_DMRG_HPP
