#ifndef CDMRG_COHERENCE_TRUNCATION_HPP
#define CDMRG_COHERENCE_TRUNCATION_HPP

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cdmrg/types.hpp"

namespace cdmrg {

enum class PolicyKind { standard, uhlmann, categorified, coherence_eigenvalue, coherence_eigenvalue_2 };

std::string_view to_string(PolicyKind kind);
PolicyKind policy_kind_from_string(std::string_view name);

// Truncation rule. Kinds act on different weight scales:
//   standard, uhlmann, categorified   -> singular values sigma (amplitude scale)
//   coherence_eigenvalue(_2)          -> probabilities p = sigma^2 / sum sigma^2
// The relative cutoff is always applied on the probability scale so that a
// zero-coefficient policy of any kind keeps the same states as `standard`.
struct TruncationPolicy {
  PolicyKind kind = PolicyKind::standard;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  int max_kept = 1;
  double cutoff = 0.0;
  // Multiplies the second-order charge by the basis size (the beta sum of a
  // beta-independent summand). Off gives the bare gamma sum.
  bool second_order_multiplicity = true;

  // Throws InvalidInput when coefficients are negative/non-finite or
  // max_kept/cutoff are out of range.
  void validate() const;
  bool uses_second_order() const;
  bool all_coefficients_zero() const;
  bool probability_scale() const;
};

enum class WeightScale { amplitude, probability };

struct TruncationWeights {
  WeightScale scale = WeightScale::amplitude;
  std::vector<double> raw;        // descending
  std::vector<double> sigma;      // singular values behind `raw`, used for amplitudes
  std::vector<double> charges1;   // Q_alpha
  std::vector<double> charges2;   // Q^(2)_alpha
  std::vector<double> effective;  // sigma_eff or p-tilde
  std::vector<Index> kept;
};

struct Selection {
  std::vector<Index> kept;         // in selection order (effective descending)
  std::vector<double> amplitudes;  // retained raw amplitudes, unit vector norm
};

// Q_a = sum_{b != a} (p_a - p_b)^2 p_a p_b / (p_a + p_b)^2 |D[a][b]|^2
std::vector<double> charge_first_order(std::span<const double> p, const Matrix& derivative);

// Q2_a = m * sum_c |D2[a][c]|^2 with m = dim (multiplicity) or 1.
std::vector<double> charge_second_order(const Matrix& second_derivative, bool multiplicity = true);

// sigma * exp(-gamma1 Q1 - gamma2 Q2); the uhlmann kind ignores gamma2.
std::vector<double> effective_singular_values(std::span<const double> sigma,
                                              std::span<const double> charges1,
                                              std::span<const double> charges2,
                                              const TruncationPolicy& policy);

std::vector<double> coherence_eigenvalues(std::span<const double> p, const Matrix& derivative,
                                          double lambda);

std::vector<double> coherence_eigenvalues_2(std::span<const double> p, const Matrix& derivative,
                                            const Matrix& second_derivative, double lambda1,
                                            double lambda2, bool multiplicity = true);

// Builds the full weight record for a descending singular-value list. Charges
// are evaluated on normalized probabilities. Empty derivative matrices mean
// "no stencil available" and give zero charges.
TruncationWeights compute_weights(std::span<const double> sigma, const Matrix& derivative,
                                  const Matrix& second_derivative, const TruncationPolicy& policy);

// Same, from charges that were already evaluated (e.g. in a tracked basis).
TruncationWeights weights_from_charges(std::span<const double> sigma, std::vector<double> charges1,
                                       std::vector<double> charges2,
                                       const TruncationPolicy& policy);

Selection select_states(const TruncationWeights& weights, const TruncationPolicy& policy);

// Effective weights on the probability scale. Amplitude weights give
// p * (eff / raw)^2, and exactly p where eff == raw.
std::vector<double> probability_weights(const TruncationWeights& weights);

double augmented_local_objective(double energy, double coherence_penalty, double curvature_penalty,
                                 double lambda1, double lambda2);

}  // namespace cdmrg

#endif  // CDMRG_COHERENCE_TRUNCATION_HPP
