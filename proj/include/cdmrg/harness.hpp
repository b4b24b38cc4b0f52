#ifndef CDMRG_HARNESS_HPP
#define CDMRG_HARNESS_HPP

#include <cstdint>
#include <functional>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "cdmrg/coherence_truncation.hpp"
#include "cdmrg/dmrg.hpp"
#include "cdmrg/models.hpp"
#include "cdmrg/report.hpp"

namespace cdmrg {

enum class ExperimentKind { crossing_scan, pec_comparison, dmrg_benchmark, gauge_diagnostics };

std::string_view to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(std::string_view name);

// Uniform grid [min, max] with `points` values.
struct UniformGrid {
  double min = 0.0;
  double max = 1.0;
  int points = 2;

  std::vector<double> values() const;
};

struct TwoLevelSection {
  double coupling = 0.1;
  // Steps of sqrt(2)/200: 0 and +-1/sqrt(2) lie on the grid.
  UniformGrid lambda{-std::numbers::sqrt2, std::numbers::sqrt2, 401};
};

struct CrossingSection {
  double beta = 5.0;          // thermal weight exp(-beta H) behind p_alpha
  double sweep_time = 200.0;  // duration of the TDSE traversal of the lambda grid
  int substeps = 20;          // TDSE steps per lambda interval
};

struct ChainSection {
  ChainKind kind = ChainKind::tfim;
  int sites = 8;
  double coupling = 1.0;
  UniformGrid field{0.5, 1.5, 21};
};

enum class PecFamily { tfim, two_level };
enum class SearchObjective { energy_error, fidelity };

struct PecSection {
  PecFamily family = PecFamily::tfim;
  double window_half_width = 0.1;
  // Empty: 1.0 for the chain, +-1/sqrt(2) for the two-level model.
  std::vector<double> window_centers;
  SearchObjective objective = SearchObjective::energy_error;
};

struct BenchmarkSection {
  std::vector<int> sites{6, 8, 10};
  std::vector<double> fields{0.5, 1.0, 1.5};
};

struct GaugeSection {
  int points = 41;             // thermal two-level family samples
  double beta = 5.0;
  int base_points = 9;         // coarsest grid of the refinement studies
  int refinements = 3;         // number of grid halvings
  double charge_eps = 1e-5;
  int random_families = 100;
};

// Every grid must contain 0.
struct CoefficientGrids {
  std::vector<double> gamma1{0.0};
  std::vector<double> gamma2{0.0};
  std::vector<double> lambda1{0.0};
  std::vector<double> lambda2{0.0};
};

struct NamedPolicy {
  std::string name;
  TruncationPolicy policy;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::crossing_scan;
  std::uint64_t seed = 0;
  std::string output_dir;
  TwoLevelSection two_level;
  CrossingSection crossing;
  ChainSection chain;
  PecSection pec;
  BenchmarkSection benchmark;
  GaugeSection gauge;
  std::vector<NamedPolicy> policies;
  CoefficientGrids grids;
  SweepConfig sweep;

  // Throws InvalidInput listing every problem found.
  void validate() const;
};

// One of the four comparison rows.
enum class Method { standard, uhlmann, categorified, higher_categorical };

std::string_view to_string(Method method);
// The policy kind behind a row, with the row's coefficients.
TruncationPolicy method_policy(Method method, double c1, double c2);

struct GridSearchRow {
  double c1 = 0.0;
  double c2 = 0.0;
  double objective = 0.0;  // lower is better
};

struct GridSearchResult {
  GridSearchRow best;
  std::vector<GridSearchRow> table;
};

// Exhaustive search over grid1 x grid2 (grid2 ignored when `second` is
// false). Lower objective wins; ties keep the earlier row, and the all-zero
// tuple is evaluated first.
GridSearchResult grid_search_coefficients(const std::vector<double>& grid1,
                                          const std::vector<double>& grid2, bool second,
                                          const std::function<double(double, double)>& objective);

Report run_crossing_scan(const ExperimentConfig& cfg);
Report run_pec_comparison(const ExperimentConfig& cfg);
Report run_dmrg_benchmark(const ExperimentConfig& cfg);
Report run_gauge_diagnostics(const ExperimentConfig& cfg);
Report run_experiment(const ExperimentConfig& cfg);

// Randomized gauge-algebra checks shared by the diagnostics report and tests.
struct GaugeSuiteResult {
  int families = 0;
  double max_hermiticity_a = 0.0;
  double max_hermiticity_a1 = 0.0;
  double max_hermiticity_a2 = 0.0;
  double max_covariance_residual = 0.0;
  double min_covariant_action = 0.0;
  double max_constant_family_action = 0.0;
  double max_parallel_transport_action = 0.0;
};

GaugeSuiteResult gauge_algebra_suite(std::uint64_t seed, int families);

// Refinement studies: each list holds one norm per level, coarse to fine.
struct RefinementStudy {
  std::vector<double> spacing;
  std::vector<double> antihermiticity;  // ||D + D^dagger||_max of derivative overlaps
  std::vector<double> pure_gauge_curvature;  // max_plaquette ||F||_max
};

RefinementStudy finite_difference_refinement(int base_points, int refinements);

}  // namespace cdmrg

#endif  // CDMRG_HARNESS_HPP
