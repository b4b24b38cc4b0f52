#ifndef CDMRG_TENSOR_NETWORK_HPP
#define CDMRG_TENSOR_NETWORK_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "cdmrg/coherence_truncation.hpp"
#include "cdmrg/types.hpp"

namespace cdmrg {

// Rank-3 site tensor stored as one (left x right) matrix per physical index.
using SiteTensor = std::vector<Matrix>;

struct MatrixProductState {
  std::vector<SiteTensor> sites;
  std::optional<std::size_t> canonical_center;

  std::size_t size() const { return sites.size(); }
  Index physical_dim(std::size_t site) const { return static_cast<Index>(sites[site].size()); }
  Index left_dim(std::size_t site) const { return sites[site].front().rows(); }
  Index right_dim(std::size_t site) const { return sites[site].front().cols(); }
  // Dimension of the bond between `bond` and `bond + 1`.
  Index bond_dim(std::size_t bond) const { return right_dim(bond); }
  Index max_bond_dim() const;

  // Throws InvalidInput on inconsistent or non-unit boundary bonds.
  void check_consistency() const;
};

// Rank-4 MPO tensor: blocks[out * d_in + in] is a (left x right) matrix.
struct MpoTensor {
  Index d_out = 0;
  Index d_in = 0;
  std::vector<Matrix> blocks;

  Index left_dim() const { return blocks.front().rows(); }
  Index right_dim() const { return blocks.front().cols(); }
  const Matrix& block(Index out, Index in) const { return blocks[out * d_in + in]; }
  Matrix& block(Index out, Index in) { return blocks[out * d_in + in]; }
  // d_out x d_in operator carried by the bond pair (w, w').
  Matrix local_operator(Index w, Index w_next) const;
};

struct MatrixProductOperator {
  std::vector<MpoTensor> sites;

  std::size_t size() const { return sites.size(); }
  void check_consistency() const;
};

struct BondSpectrum {
  std::vector<double> singular_values;  // kept, renormalized, descending by selection
  double discarded_weight = 0.0;        // sum of squares of dropped values, before renormalization
};

// What a selection rule sees when a bond is split.
struct BondCandidates {
  std::size_t bond = 0;
  std::span<const double> singular_values;  // descending, all candidates
  // Left Schmidt vectors as a site tensor for site `bond`: slice s is
  // (left_dim x candidates). Together with the left-isometric sites to the
  // left of `bond` they are orthonormal states of the left block.
  const SiteTensor* left_vectors = nullptr;
  // Sites 0 .. bond-1, left-isometric. May be empty when unknown.
  std::span<const SiteTensor> left_block;
};

// Chooses the kept set for a bond; also reports the weight record it used.
struct RuleOutcome {
  Selection selection;
  TruncationWeights weights;
  bool degenerate = false;
};
using SelectionRule = std::function<RuleOutcome(const BondCandidates&)>;

// Rule that applies `policy` with zero charges (no time axis available).
SelectionRule policy_rule(const TruncationPolicy& policy);

enum class SweepDirection { right, left };

// SVD-split of a two-site block theta whose rows are (s1, left) = s1 * dl + a
// and columns (s2, right) = s2 * dr + c.
struct SplitResult {
  SiteTensor left;
  SiteTensor right;
  BondSpectrum spectrum;
  RuleOutcome outcome;
  std::vector<double> all_singular_values;
};
SplitResult split_two_site(const Matrix& theta, Index dl, Index d1, Index d2, Index dr,
                           std::size_t bond, const SelectionRule& rule, SweepDirection absorb,
                           std::span<const SiteTensor> left_block = {});

Matrix two_site_theta(const SiteTensor& a, const SiteTensor& b);

// Reshapes between a site tensor and a matrix. group_left stacks slices
// vertically (row s * dl + a); group_right side by side (column s * dr + c).
Matrix group_left(const SiteTensor& t);
Matrix group_right(const SiteTensor& t);
SiteTensor ungroup_left(const Matrix& m, Index d);
SiteTensor ungroup_right(const Matrix& m, Index d);

MatrixProductState from_product_state(std::span<const Vector> local_states);

// Random complex MPS with bond dimensions min(chi, d^i, d^(n-i)), normalized.
MatrixProductState random_mps(std::size_t sites, Index physical_dim, Index chi,
                              std::mt19937_64& rng);

MatrixProductState canonicalize(const MatrixProductState& psi, std::size_t center);

double left_isometry_residual(const SiteTensor& t);
double right_isometry_residual(const SiteTensor& t);

Complex inner_product(const MatrixProductState& a, const MatrixProductState& b);
double norm(const MatrixProductState& psi);

// <psi|O|psi> / <psi|psi>
Complex expectation(const MatrixProductState& psi, const MatrixProductOperator& op);

struct TruncationResult {
  MatrixProductState state;
  BondSpectrum spectrum;
  RuleOutcome outcome;
};

// Splits bond (bond, bond + 1). The canonical center must sit on one of the
// two sites.
TruncationResult svd_truncate(const MatrixProductState& psi, std::size_t bond,
                              const SelectionRule& rule,
                              SweepDirection absorb = SweepDirection::right);

// Schmidt probabilities p = sigma^2 across `bond`, descending, sum 1.
std::vector<double> entanglement_spectrum(const MatrixProductState& psi, std::size_t bond);

// <a|b> restricted to the first `count` sites: a (left_dim of a at count) x
// (left_dim of b at count) matrix.
Matrix left_block_transfer(std::span<const SiteTensor> a, std::span<const SiteTensor> b);

// One transfer step: sum_s A_s^dagger T B_s.
Matrix transfer_step(const Matrix& t, const SiteTensor& a, const SiteTensor& b);

// Dense state vector; site 0 is the most significant digit.
Vector to_dense(const MatrixProductState& psi);
Matrix to_dense(const MatrixProductOperator& op);

// Left/right environments of an MPO sandwiched by the same state. One matrix
// per MPO bond index, (bra x ket).
using Environment = std::vector<Matrix>;
Environment trivial_environment();
Environment extend_left(const Environment& left, const SiteTensor& a, const MpoTensor& w);
Environment extend_right(const Environment& right, const SiteTensor& b, const MpoTensor& w);

}  // namespace cdmrg

#endif  // CDMRG_TENSOR_NETWORK_HPP
