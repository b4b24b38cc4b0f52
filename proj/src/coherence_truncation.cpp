#include "cdmrg/coherence_truncation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cdmrg {

namespace {

constexpr double kPairFloor = 1e-14;

bool finite_non_negative(double x) { return std::isfinite(x) && x >= 0.0; }

void check_square(const Matrix& m, std::size_t n, const char* who) {
  if (m.rows() != m.cols() || static_cast<std::size_t>(m.rows()) != n) {
    throw InvalidInput(std::string(who) + ": overlap matrix shape does not match the spectrum");
  }
}

}  // namespace

std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::standard: return "standard";
    case PolicyKind::uhlmann: return "uhlmann";
    case PolicyKind::categorified: return "categorified";
    case PolicyKind::coherence_eigenvalue: return "coherence_eigenvalue";
    case PolicyKind::coherence_eigenvalue_2: return "coherence_eigenvalue_2";
  }
  return "standard";
}

PolicyKind policy_kind_from_string(std::string_view name) {
  for (auto k : {PolicyKind::standard, PolicyKind::uhlmann, PolicyKind::categorified,
                 PolicyKind::coherence_eigenvalue, PolicyKind::coherence_eigenvalue_2}) {
    if (to_string(k) == name) return k;
  }
  throw InvalidInput("unknown policy kind '" + std::string(name) + "'");
}

void TruncationPolicy::validate() const {
  for (double c : {gamma1, gamma2, lambda1, lambda2}) {
    if (!finite_non_negative(c)) {
      throw InvalidInput("TruncationPolicy: coefficients must be finite and non-negative");
    }
  }
  if (max_kept < 1) throw InvalidInput("TruncationPolicy: max_kept must be positive");
  if (!(cutoff >= 0.0 && cutoff < 1.0)) {
    throw InvalidInput("TruncationPolicy: cutoff must lie in [0, 1)");
  }
}

bool TruncationPolicy::uses_second_order() const {
  return (kind == PolicyKind::categorified && gamma2 != 0.0) ||
         (kind == PolicyKind::coherence_eigenvalue_2 && lambda2 != 0.0);
}

bool TruncationPolicy::all_coefficients_zero() const {
  switch (kind) {
    case PolicyKind::standard: return true;
    case PolicyKind::uhlmann: return gamma1 == 0.0;
    case PolicyKind::categorified: return gamma1 == 0.0 && gamma2 == 0.0;
    case PolicyKind::coherence_eigenvalue: return lambda1 == 0.0;
    case PolicyKind::coherence_eigenvalue_2: return lambda1 == 0.0 && lambda2 == 0.0;
  }
  return true;
}

bool TruncationPolicy::probability_scale() const {
  return kind == PolicyKind::coherence_eigenvalue || kind == PolicyKind::coherence_eigenvalue_2;
}

std::vector<double> charge_first_order(std::span<const double> p, const Matrix& derivative) {
  check_square(derivative, p.size(), "charge_first_order");
  double total = 0.0;
  for (double x : p) {
    if (x < 0.0) throw InvalidInput("charge_first_order: probabilities must be non-negative");
    total += x;
  }
  if (total > 1.0 + 1e-8) throw InvalidInput("charge_first_order: probabilities sum above 1");
  const std::size_t n = p.size();
  std::vector<double> q(n, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (a == b) continue;
      const double sum = p[a] + p[b];
      if (sum < kPairFloor) continue;
      const double diff = p[a] - p[b];
      const double weight = diff * diff * p[a] * p[b] / (sum * sum);
      q[a] += weight * std::norm(derivative(static_cast<Index>(a), static_cast<Index>(b)));
    }
  }
  return q;
}

std::vector<double> charge_second_order(const Matrix& second_derivative, bool multiplicity) {
  if (second_derivative.rows() != second_derivative.cols()) {
    throw InvalidInput("charge_second_order: matrix must be square");
  }
  const Index n = second_derivative.rows();
  const double m = multiplicity ? static_cast<double>(n) : 1.0;
  std::vector<double> q(static_cast<std::size_t>(n));
  for (Index a = 0; a < n; ++a) q[a] = m * second_derivative.row(a).squaredNorm();
  return q;
}

std::vector<double> effective_singular_values(std::span<const double> sigma,
                                              std::span<const double> charges1,
                                              std::span<const double> charges2,
                                              const TruncationPolicy& policy) {
  if (charges1.size() != sigma.size() || charges2.size() != sigma.size()) {
    throw InvalidInput("effective_singular_values: length mismatch");
  }
  const double g2 = policy.kind == PolicyKind::uhlmann ? 0.0 : policy.gamma2;
  std::vector<double> out(sigma.size());
  for (std::size_t a = 0; a < sigma.size(); ++a) {
    if (sigma[a] < 0.0) throw InvalidInput("effective_singular_values: negative singular value");
    out[a] = sigma[a] * std::exp(-policy.gamma1 * charges1[a] - g2 * charges2[a]);
  }
  return out;
}

std::vector<double> coherence_eigenvalues(std::span<const double> p, const Matrix& derivative,
                                          double lambda) {
  const auto q = charge_first_order(p, derivative);
  std::vector<double> out(p.size());
  for (std::size_t a = 0; a < p.size(); ++a) out[a] = p[a] + lambda * q[a];
  return out;
}

std::vector<double> coherence_eigenvalues_2(std::span<const double> p, const Matrix& derivative,
                                            const Matrix& second_derivative, double lambda1,
                                            double lambda2, bool multiplicity) {
  check_square(second_derivative, p.size(), "coherence_eigenvalues_2");
  const auto q1 = charge_first_order(p, derivative);
  const auto q2 = charge_second_order(second_derivative, multiplicity);
  std::vector<double> out(p.size());
  for (std::size_t a = 0; a < p.size(); ++a) out[a] = p[a] + lambda1 * q1[a] + lambda2 * q2[a];
  return out;
}

namespace {

std::vector<double> normalized_probabilities(std::span<const double> sigma) {
  double norm_sq = 0.0;
  for (double s : sigma) {
    if (s < 0.0) throw InvalidInput("compute_weights: negative singular value");
    norm_sq += s * s;
  }
  std::vector<double> p(sigma.size(), 0.0);
  if (norm_sq > 0.0) {
    for (std::size_t a = 0; a < sigma.size(); ++a) p[a] = sigma[a] * sigma[a] / norm_sq;
  }
  return p;
}

}  // namespace

TruncationWeights weights_from_charges(std::span<const double> sigma, std::vector<double> charges1,
                                       std::vector<double> charges2,
                                       const TruncationPolicy& policy) {
  const std::size_t n = sigma.size();
  if (charges1.size() != n || charges2.size() != n) {
    throw InvalidInput("weights_from_charges: charge and spectrum lengths differ");
  }
  const std::vector<double> p = normalized_probabilities(sigma);

  TruncationWeights w;
  w.sigma.assign(sigma.begin(), sigma.end());
  w.charges1 = std::move(charges1);
  w.charges2 = std::move(charges2);
  if (policy.probability_scale()) {
    w.scale = WeightScale::probability;
    w.raw = p;
    const double l2 = policy.kind == PolicyKind::coherence_eigenvalue_2 ? policy.lambda2 : 0.0;
    w.effective.resize(n);
    for (std::size_t a = 0; a < n; ++a) {
      w.effective[a] = p[a] + policy.lambda1 * w.charges1[a] + l2 * w.charges2[a];
    }
  } else {
    w.scale = WeightScale::amplitude;
    w.raw = w.sigma;
    w.effective = policy.kind == PolicyKind::standard
                      ? w.raw
                      : effective_singular_values(sigma, w.charges1, w.charges2, policy);
  }
  return w;
}

TruncationWeights compute_weights(std::span<const double> sigma, const Matrix& derivative,
                                  const Matrix& second_derivative,
                                  const TruncationPolicy& policy) {
  const std::size_t n = sigma.size();
  const std::vector<double> p = normalized_probabilities(sigma);
  std::vector<double> q1 =
      derivative.size() == 0 ? std::vector<double>(n, 0.0) : charge_first_order(p, derivative);
  std::vector<double> q2(n, 0.0);
  if (second_derivative.size() != 0) {
    check_square(second_derivative, n, "compute_weights");
    q2 = charge_second_order(second_derivative, policy.second_order_multiplicity);
  }
  return weights_from_charges(sigma, std::move(q1), std::move(q2), policy);
}

std::vector<double> probability_weights(const TruncationWeights& weights) {
  if (weights.scale == WeightScale::probability) return weights.effective;
  const std::vector<double> p = normalized_probabilities(weights.sigma);
  std::vector<double> out(p.size());
  for (std::size_t a = 0; a < p.size(); ++a) {
    const double eff = weights.effective[a];
    const double raw = weights.raw[a];
    out[a] = eff == raw ? p[a] : (raw > 0.0 ? p[a] * (eff / raw) * (eff / raw) : 0.0);
  }
  return out;
}

Selection select_states(const TruncationWeights& weights, const TruncationPolicy& policy) {
  const std::size_t n = weights.raw.size();
  if (weights.effective.size() != n) {
    throw InvalidInput("select_states: effective and raw weights differ in length");
  }
  // live = positive singular value
  const std::vector<double>& live = weights.sigma.empty() ? weights.raw : weights.sigma;
  if (live.size() != n) throw InvalidInput("select_states: sigma and raw weights differ in length");
  const bool any_positive =
      std::any_of(live.begin(), live.end(), [](double x) { return x > 0.0; });
  if (!any_positive) throw NumericalError("select_states: empty spectrum (all weights zero)");

  // Cutoff compares probabilities: squared effective amplitudes or the
  // effective probabilities themselves.
  auto as_probability = [&](double e) {
    return weights.scale == WeightScale::amplitude ? e * e : e;
  };

  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return weights.effective[a] > weights.effective[b];
  });

  double max_eff = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    if (live[a] > 0.0) max_eff = std::max(max_eff, as_probability(weights.effective[a]));
  }
  const double threshold = policy.cutoff * max_eff;

  Selection sel;
  for (Index a : order) {
    if (static_cast<int>(sel.kept.size()) >= policy.max_kept) break;
    if (!(live[a] > 0.0)) continue;
    if (as_probability(weights.effective[a]) < threshold) continue;
    sel.kept.push_back(a);
  }
  double norm_sq = 0.0;
  for (Index a : sel.kept) {
    double amp = 0.0;
    if (!weights.sigma.empty()) {
      amp = weights.sigma[a];
    } else {
      amp = weights.scale == WeightScale::amplitude ? weights.raw[a] : std::sqrt(weights.raw[a]);
    }
    sel.amplitudes.push_back(amp);
    norm_sq += amp * amp;
  }
  const double norm = std::sqrt(norm_sq);
  for (double& x : sel.amplitudes) x /= norm;
  return sel;
}

double augmented_local_objective(double energy, double coherence_penalty, double curvature_penalty,
                                 double lambda1, double lambda2) {
  if (coherence_penalty < 0.0 || curvature_penalty < 0.0) {
    throw InvalidInput("augmented_local_objective: penalties must be non-negative");
  }
  return energy + lambda1 * coherence_penalty + lambda2 * curvature_penalty;
}

}  // namespace cdmrg
