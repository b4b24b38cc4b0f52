#include "cdmrg/harness.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "cdmrg/spectral.hpp"
#include "cdmrg/uhlmann_gauge.hpp"

namespace cdmrg {

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::crossing_scan: return "crossing_scan";
    case ExperimentKind::pec_comparison: return "pec_comparison";
    case ExperimentKind::dmrg_benchmark: return "dmrg_benchmark";
    case ExperimentKind::gauge_diagnostics: return "gauge_diagnostics";
  }
  return "crossing_scan";
}

ExperimentKind experiment_kind_from_string(std::string_view name) {
  for (auto k : {ExperimentKind::crossing_scan, ExperimentKind::pec_comparison,
                 ExperimentKind::dmrg_benchmark, ExperimentKind::gauge_diagnostics}) {
    if (to_string(k) == name) return k;
  }
  throw InvalidInput("unknown experiment kind '" + std::string(name) + "'");
}

std::vector<double> UniformGrid::values() const {
  std::vector<double> v(static_cast<std::size_t>(std::max(points, 0)));
  for (int i = 0; i < points; ++i) {
    v[i] = i == 0 ? min : i + 1 == points ? max : min + (max - min) * i / (points - 1);
  }
  return v;
}

namespace {

bool contains_zero(const std::vector<double>& g) {
  return std::find(g.begin(), g.end(), 0.0) != g.end();
}

void check_grid(const UniformGrid& g, const std::string& name, std::vector<std::string>& errors) {
  if (g.points < 2) errors.push_back(name + ".points must be at least 2");
  if (!(g.max > g.min) || !std::isfinite(g.min) || !std::isfinite(g.max)) {
    errors.push_back(name + ": max must exceed min");
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  std::vector<std::string> errors;
  auto positive = [&](double x, const std::string& name) {
    if (!(x > 0.0) || !std::isfinite(x)) errors.push_back(name + " must be positive");
  };

  const std::pair<const char*, const std::vector<double>*> coefficient_grids[] = {
      {"gamma1", &grids.gamma1},
      {"gamma2", &grids.gamma2},
      {"lambda1", &grids.lambda1},
      {"lambda2", &grids.lambda2}};
  for (const auto& [name, g] : coefficient_grids) {
    if (g->empty()) {
      errors.push_back(std::string("coefficient_grids.") + name + " is empty");
    } else if (!contains_zero(*g)) {
      errors.push_back(std::string("coefficient_grids.") + name +
                       " must contain 0 (non-inferiority against the standard policy)");
    }
    for (double c : *g) {
      if (!(c >= 0.0) || !std::isfinite(c)) {
        errors.push_back(std::string("coefficient_grids.") + name + " values must be >= 0");
        break;
      }
    }
  }

  std::set<std::string> names;
  for (std::size_t i = 0; i < policies.size(); ++i) {
    const auto& p = policies[i];
    if (p.name.empty()) errors.push_back("policies[" + std::to_string(i) + "].name is empty");
    if (!names.insert(p.name).second) errors.push_back("duplicate policy name '" + p.name + "'");
    try {
      p.policy.validate();
    } catch (const InvalidInput& e) {
      errors.push_back("policies[" + std::to_string(i) + "]: " + e.what());
    }
  }
  try {
    sweep.validate();
  } catch (const InvalidInput& e) {
    errors.push_back(std::string("sweep: ") + e.what());
  }

  switch (kind) {
    case ExperimentKind::crossing_scan:
      check_grid(two_level.lambda, "two_level.lambda", errors);
      if (two_level.coupling == 0.0) errors.push_back("two_level.coupling must be non-zero");
      positive(crossing.beta, "crossing.beta");
      positive(crossing.sweep_time, "crossing.sweep_time");
      if (crossing.substeps < 1) errors.push_back("crossing.substeps must be positive");
      if (policies.empty()) errors.push_back("policies must list at least one policy");
      break;
    case ExperimentKind::pec_comparison:
      if (pec.family == PecFamily::tfim) {
        if (chain.sites < 2) errors.push_back("chain.sites must be at least 2");
        check_grid(chain.field, "chain.field", errors);
      } else {
        check_grid(two_level.lambda, "two_level.lambda", errors);
      }
      positive(pec.window_half_width, "pec.window_half_width");
      break;
    case ExperimentKind::dmrg_benchmark:
      if (benchmark.sites.empty() || benchmark.fields.empty()) {
        errors.push_back("benchmark.sites and benchmark.fields must be non-empty");
      }
      for (int n : benchmark.sites) {
        if (n < 2) errors.push_back("benchmark.sites entries must be at least 2");
      }
      break;
    case ExperimentKind::gauge_diagnostics:
      check_grid(two_level.lambda, "two_level.lambda", errors);
      if (gauge.points < 5) errors.push_back("gauge.points must be at least 5");
      positive(gauge.beta, "gauge.beta");
      if (gauge.base_points < 5 || gauge.base_points % 2 == 0) {
        errors.push_back("gauge.base_points must be odd and at least 5");
      }
      if (gauge.refinements < 1) errors.push_back("gauge.refinements must be positive");
      if (!(gauge.charge_eps >= 1e-7 && gauge.charge_eps <= 1e-3)) {
        errors.push_back("gauge.charge_eps must lie in [1e-7, 1e-3]");
      }
      if (gauge.random_families < 1) errors.push_back("gauge.random_families must be positive");
      break;
  }

  if (!errors.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& e : errors) msg += "\n  - " + e;
    throw InvalidInput(msg);
  }
}

std::string_view to_string(Method method) {
  switch (method) {
    case Method::standard: return "standard";
    case Method::uhlmann: return "uhlmann";
    case Method::categorified: return "categorified";
    case Method::higher_categorical: return "higher_categorical";
  }
  return "standard";
}

TruncationPolicy method_policy(Method method, double c1, double c2) {
  TruncationPolicy p;
  switch (method) {
    case Method::standard:
      p.kind = PolicyKind::standard;
      break;
    case Method::uhlmann:
      p.kind = PolicyKind::uhlmann;
      p.gamma1 = c1;
      break;
    case Method::categorified:
      p.kind = PolicyKind::categorified;
      p.gamma1 = c1;
      p.gamma2 = c2;
      break;
    case Method::higher_categorical:
      p.kind = PolicyKind::coherence_eigenvalue_2;
      p.lambda1 = c1;
      p.lambda2 = c2;
      break;
  }
  return p;
}

GridSearchResult grid_search_coefficients(const std::vector<double>& grid1,
                                          const std::vector<double>& grid2, bool second,
                                          const std::function<double(double, double)>& objective) {
  if (grid1.empty() || (second && grid2.empty())) {
    throw InvalidInput("grid_search_coefficients: empty coefficient grid");
  }
  if (!contains_zero(grid1) || (second && !contains_zero(grid2))) {
    throw InvalidInput("grid_search_coefficients: grids must contain 0");
  }
  const std::vector<double> g2 = second ? grid2 : std::vector<double>{0.0};
  GridSearchResult out;
  out.best = {0.0, 0.0, objective(0.0, 0.0)};
  for (double c1 : grid1) {
    for (double c2 : g2) {
      GridSearchRow row{c1, c2, 0.0};
      row.objective = (c1 == 0.0 && c2 == 0.0) ? out.best.objective : objective(c1, c2);
      if (row.objective < out.best.objective) out.best = row;
      out.table.push_back(row);
    }
  }
  return out;
}

namespace {

Matrix thermal_state(const Matrix& h, double beta) {
  const SpectralPoint sp = eigh_sorted(h);
  RealVector w(sp.dim());
  for (Index i = 0; i < sp.dim(); ++i) w(i) = std::exp(-beta * (sp.eigenvalues(i) - sp.eigenvalues(0)));
  w /= w.sum();
  const Matrix rho = sp.eigenvectors * w.cast<Complex>().asDiagonal() * sp.eigenvectors.adjoint();
  const Matrix sym = hermitian_part(rho);
  return sym / sym.trace().real();
}

std::vector<double> thermal_probabilities(const RealVector& energies, double beta) {
  const double e0 = energies.minCoeff();
  std::vector<double> p(static_cast<std::size_t>(energies.size()));
  double z = 0.0;
  for (Index i = 0; i < energies.size(); ++i) {
    p[i] = std::exp(-beta * (energies(i) - e0));
    z += p[i];
  }
  for (double& x : p) x /= z;
  return p;
}

nlohmann::json policy_json(const NamedPolicy& np) {
  const auto& p = np.policy;
  return {{"name", np.name},
          {"kind", std::string(to_string(p.kind))},
          {"gamma1", p.gamma1},
          {"gamma2", p.gamma2},
          {"lambda1", p.lambda1},
          {"lambda2", p.lambda2},
          {"max_kept", p.max_kept},
          {"cutoff", p.cutoff}};
}

}  // namespace

Report run_crossing_scan(const ExperimentConfig& cfg) {
  cfg.validate();
  TwoLevelModel model{cfg.two_level.coupling, cfg.two_level.lambda.values()};
  const std::vector<double>& grid = model.lambda_grid;
  const std::size_t n = grid.size();
  auto hamiltonian = [&](double l) { return two_level_hamiltonian(model, l); };
  const SpectralTrack track = SpectralTrack::from_family(grid, hamiltonian);

  // TDSE traversal: lambda runs linearly over the grid in sweep_time.
  const int substeps = cfg.crossing.substeps;
  const double lmin = grid.front();
  const double lspan = grid.back() - grid.front();
  const double duration = cfg.crossing.sweep_time;
  const TimeGrid tgrid{0.0, duration, static_cast<int>(n - 1) * substeps};
  const Vector psi0 = eigh_sorted(hamiltonian(lmin)).eigenvectors.col(0);
  const Trajectory traj = tdse_propagate(
      [&](double t) { return hamiltonian(lmin + lspan * t / duration); }, psi0, tgrid);

  Report report;
  report.kind = "crossing_scan";
  Table points;
  points.columns = {"lambda",        "diabatic_e1",  "diabatic_e2", "energy_ground",
                    "energy_excited", "gap",         "p_gaussian",  "tdse_excited_population",
                    "p_0",           "p_1",          "d01_abs",     "q1_0",
                    "q1_1",          "q2_0",         "q2_1",        "stencil",
                    "tracking_degenerate"};
  Table per_policy;
  per_policy.columns = {"policy", "lambda", "weight_0", "weight_1", "kept", "retained_energy",
                        "retained_ground"};
  std::vector<int> excited_count(cfg.policies.size(), 0);
  double p_max = -1.0;

  for (std::size_t k = 0; k < n; ++k) {
    const double lambda = grid[k];
    const DiabaticPair dia = diabatic_energies(lambda);
    const SpectralPoint exact = eigh_sorted(hamiltonian(lambda));
    const double pg = gaussian_transition_probability(model, lambda);
    p_max = std::max(p_max, pg);
    const Vector& psi = traj.states[k * static_cast<std::size_t>(substeps)];
    const double excited = std::norm(exact.eigenvectors.col(1).dot(psi));

    const SpectralPoint& tp = track.point(k);
    const std::vector<double> p = thermal_probabilities(tp.eigenvalues, cfg.crossing.beta);
    Matrix d = Matrix::Zero(2, 2);
    Matrix d2 = Matrix::Zero(2, 2);
    std::string stencil = "none";
    if (k > 0 && k + 1 < n) {
      d = derivative_overlaps(track, k, FiniteDifference::central);
      d2 = second_derivative_overlaps(track, k);
      stencil = "central";
    } else if (k == 0 && n > 1) {
      d = derivative_overlaps(track, k, FiniteDifference::forward);
      stencil = "forward";
    }
    const std::vector<double> q1 = charge_first_order(p, d);
    const std::vector<double> q2 = charge_second_order(d2);
    const std::vector<double> q2_bare = charge_second_order(d2, false);
    const bool degenerate = track.degeneracy_flags()[k];

    points.add_row({lambda, dia.e1, dia.e2, exact.eigenvalues(0), exact.eigenvalues(1),
                    exact.eigenvalues(1) - exact.eigenvalues(0), pg, excited, p[0], p[1],
                    std::abs(d(0, 1)), q1[0], q1[1], q2[0], q2[1], stencil, degenerate});

    const std::vector<double> sigma{std::sqrt(p[0]), std::sqrt(p[1])};
    const double e_ground = tp.eigenvalues.minCoeff();
    for (std::size_t i = 0; i < cfg.policies.size(); ++i) {
      const NamedPolicy& np = cfg.policies[i];
      const TruncationWeights w = weights_from_charges(
          sigma, q1, np.policy.second_order_multiplicity ? q2 : q2_bare, np.policy);
      const Selection sel = select_states(w, np.policy);
      const std::vector<double> pw = probability_weights(w);
      std::string kept;
      for (std::size_t j = 0; j < sel.kept.size(); ++j) {
        if (j > 0) kept += ';';
        kept += std::to_string(sel.kept[j]);
      }
      const double retained = tp.eigenvalues(sel.kept.front());
      const bool ground = retained == e_ground;
      if (!ground) ++excited_count[i];
      per_policy.add_row({np.name, lambda, pw[0], pw[1], kept, retained, ground});
    }
  }

  const double root = 1.0 / std::numbers::sqrt2;
  nlohmann::json policies = nlohmann::json::array();
  for (std::size_t i = 0; i < cfg.policies.size(); ++i) {
    nlohmann::json j = policy_json(cfg.policies[i]);
    j["points_retaining_excited"] = excited_count[i];
    policies.push_back(j);
  }
  std::vector<double> argmax;
  for (std::size_t k = 0; k < n; ++k) {
    if (gaussian_transition_probability(model, grid[k]) == p_max) argmax.push_back(grid[k]);
  }
  const Vector& last = traj.states.back();
  const SpectralPoint final_basis = eigh_sorted(hamiltonian(grid.back()));
  report.summary = {
      {"experiment", "crossing_scan"},
      {"points", n},
      {"coupling", model.coupling},
      {"beta", cfg.crossing.beta},
      {"p_gaussian_grid_max", p_max},
      {"p_gaussian_grid_argmax", argmax},
      {"diabatic_crossings", {-root, root}},
      {"p_gaussian_at_crossings",
       {gaussian_transition_probability(model, -root), gaussian_transition_probability(model, root)}},
      {"tdse",
       {{"sweep_time", duration},
        {"steps", tgrid.steps},
        {"max_norm_drift", traj.max_norm_drift},
        {"final_excited_population", std::norm(final_basis.eigenvectors.col(1).dot(last))}}},
      {"tracking_degenerate_points",
       std::count(track.degeneracy_flags().begin(), track.degeneracy_flags().end(), true)},
      {"policies", policies}};
  report.tables.emplace_back("points", std::move(points));
  report.tables.emplace_back("policies", std::move(per_policy));
  return report;
}

namespace {

struct PecProblem {
  std::vector<double> grid;
  MpoFamily family;
  std::vector<double> exact_energy;
  std::vector<Vector> exact_vector;
  MatrixProductState init;
  std::vector<double> centers;
  double half_width = 0.1;
};

PecProblem make_pec_problem(const ExperimentConfig& cfg) {
  PecProblem prob;
  prob.half_width = cfg.pec.window_half_width;
  std::function<Matrix(double)> dense;
  if (cfg.pec.family == PecFamily::tfim) {
    prob.grid = cfg.chain.field.values();
    const ChainSection chain = cfg.chain;
    auto spec_at = [chain](double h) {
      return SpinChainSpec{chain.kind, chain.sites, h, chain.coupling};
    };
    prob.family = [spec_at](double h) { return build_spin_chain_mpo(spec_at(h)); };
    dense = [spec_at](double h) { return dense_spin_chain_hamiltonian(spec_at(h)); };
    if ((Index{1} << chain.sites) > cfg.sweep.dense_limit) {
      throw InvalidInput("pec_comparison: exact-diagonalization oracle needs 2^" +
                         std::to_string(chain.sites) + " states, above the dense limit " +
                         std::to_string(cfg.sweep.dense_limit) + "; use fewer sites");
    }
    std::mt19937_64 rng(cfg.seed);
    prob.init = random_mps(static_cast<std::size_t>(chain.sites), 2, cfg.sweep.max_bond, rng);
    prob.centers = cfg.pec.window_centers.empty() ? std::vector<double>{1.0} : cfg.pec.window_centers;
  } else {
    prob.grid = cfg.two_level.lambda.values();
    const TwoLevelModel model{cfg.two_level.coupling, prob.grid};
    prob.family = [model](double l) { return single_site_mpo(two_level_hamiltonian(model, l)); };
    dense = [model](double l) { return two_level_hamiltonian(model, l); };
    const Vector up = Vector::Unit(2, 0);
    prob.init = from_product_state(std::span<const Vector>(&up, 1));
    const double root = 1.0 / std::numbers::sqrt2;
    prob.centers =
        cfg.pec.window_centers.empty() ? std::vector<double>{-root, root} : cfg.pec.window_centers;
  }
  for (double x : prob.grid) {
    const Eigenpairs eig = exact_diagonalization(dense(x), 1, cfg.sweep.dense_limit);
    prob.exact_energy.push_back(eig.values(0));
    prob.exact_vector.push_back(eig.vectors.col(0));
  }
  return prob;
}

bool in_window(const PecProblem& prob, double x) {
  return std::any_of(prob.centers.begin(), prob.centers.end(),
                     [&](double c) { return std::abs(x - c) <= prob.half_width + 1e-12; });
}

double window_error(const PecProblem& prob, const ContinuationScan& scan) {
  double err = 0.0;
  for (std::size_t k = 0; k < prob.grid.size(); ++k) {
    if (!in_window(prob, prob.grid[k])) continue;
    err = std::max(err, std::abs(scan.points[k].result.energy - prob.exact_energy[k]));
  }
  return err;
}

double window_infidelity(const PecProblem& prob, const ContinuationScan& scan) {
  double worst = 0.0;
  for (std::size_t k = 0; k < prob.grid.size(); ++k) {
    if (!in_window(prob, prob.grid[k])) continue;
    worst = std::max(worst, 1.0 - scan.points[k].fidelity.value_or(0.0));
  }
  return worst;
}

double max_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
}

}  // namespace

Report run_pec_comparison(const ExperimentConfig& cfg) {
  cfg.validate();
  const PecProblem prob = make_pec_problem(cfg);
  const std::size_t n = prob.grid.size();
  if (std::none_of(prob.grid.begin(), prob.grid.end(), [&](double x) { return in_window(prob, x); })) {
    throw InvalidInput("pec_comparison: no grid point lies inside the crossing window");
  }
  const OracleFamily oracle = [&](double x) {
    const auto it = std::find(prob.grid.begin(), prob.grid.end(), x);
    return prob.exact_vector[static_cast<std::size_t>(it - prob.grid.begin())];
  };

  auto run_scan = [&](Method m, double c1, double c2) {
    SweepConfig sc = cfg.sweep;
    TruncationPolicy p = method_policy(m, c1, c2);
    p.cutoff = cfg.sweep.policy.cutoff;
    p.second_order_multiplicity = cfg.sweep.policy.second_order_multiplicity;
    sc.policy = p;
    return continuation_scan(prob.family, prob.grid, sc, prob.init, oracle);
  };
  auto objective_of = [&](const ContinuationScan& s) {
    return cfg.pec.objective == SearchObjective::energy_error ? window_error(prob, s)
                                                              : window_infidelity(prob, s);
  };

  struct Row {
    Method method;
    const char* c1_name;
    const char* c2_name;
    const std::vector<double>* g1;
    const std::vector<double>* g2;
    bool second;
  };
  const std::vector<double> zero{0.0};
  const Row rows[] = {
      {Method::standard, "", "", &zero, &zero, false},
      {Method::uhlmann, "gamma1", "", &cfg.grids.gamma1, &zero, false},
      {Method::categorified, "gamma1", "gamma2", &cfg.grids.gamma1, &cfg.grids.gamma2, true},
      {Method::higher_categorical, "lambda1", "lambda2", &cfg.grids.lambda1, &cfg.grids.lambda2,
       true}};

  Table methods;
  methods.columns = {"method", "policy_kind", "coefficient1_name", "coefficient1",
                     "coefficient2_name", "coefficient2", "window_error",
                     "improvement_percent", "all_converged"};
  Table points;
  points.columns = {"method", "parameter", "energy", "exact_energy", "abs_error", "fidelity",
                    "in_window", "converged", "sweeps", "coherence_penalty", "objective"};
  Table bonds;
  bonds.columns = {"method", "parameter", "bond", "kept", "discarded_weight", "q1_max",
                   "q2_max", "q1_leading", "q2_leading", "degenerate"};
  Table search;
  search.columns = {"method", "coefficient1", "coefficient2", "objective"};

  double standard_error = 0.0;
  nlohmann::json summary_rows = nlohmann::json::array();
  for (const Row& row : rows) {
    std::map<std::pair<double, double>, ContinuationScan> scans;
    const GridSearchResult gs = grid_search_coefficients(
        *row.g1, *row.g2, row.second, [&](double c1, double c2) {
          ContinuationScan s = run_scan(row.method, c1, c2);
          const double obj = objective_of(s);
          scans.emplace(std::make_pair(c1, c2), std::move(s));
          return obj;
        });
    const ContinuationScan& best = scans.at({gs.best.c1, gs.best.c2});
    for (const auto& r : gs.table) {
      search.add_row({std::string(to_string(row.method)), r.c1, r.c2, r.objective});
    }
    const double err = window_error(prob, best);
    if (row.method == Method::standard) standard_error = err;
    const double improvement =
        standard_error > 0.0 ? 100.0 * (standard_error - err) / standard_error : 0.0;
    const bool converged = best.all_converged();
    const std::string mname(to_string(row.method));
    const TruncationPolicy pol = method_policy(row.method, gs.best.c1, gs.best.c2);
    methods.add_row({mname, std::string(to_string(pol.kind)), std::string(row.c1_name),
                     gs.best.c1, std::string(row.c2_name), gs.best.c2, err, improvement,
                     converged});
    summary_rows.push_back({{"method", mname},
                            {"policy_kind", std::string(to_string(pol.kind))},
                            {"coefficients", {{"c1", gs.best.c1}, {"c2", gs.best.c2}}},
                            {"window_error", err},
                            {"improvement_percent", improvement},
                            {"all_converged", converged}});

    for (std::size_t k = 0; k < n; ++k) {
      const ScanPoint& pt = best.points[k];
      const double e = pt.result.energy;
      points.add_row({mname, prob.grid[k], e, prob.exact_energy[k],
                      std::abs(e - prob.exact_energy[k]), pt.fidelity.value_or(0.0),
                      in_window(prob, prob.grid[k]), pt.result.converged,
                      static_cast<std::int64_t>(pt.result.sweep_energies.size()),
                      pt.coherence_penalty, pt.objective});
      for (const BondRecord& b : pt.result.truncation_log) {
        const Index lead = b.kept.empty() ? 0 : b.kept.front();
        bonds.add_row({mname, prob.grid[k], static_cast<std::int64_t>(b.bond),
                       static_cast<std::int64_t>(b.kept.size()), b.discarded_weight,
                       max_of(b.charges1), max_of(b.charges2), b.charges1.at(lead),
                       b.charges2.at(lead), b.degenerate});
      }
    }
  }

  Report report;
  report.kind = "pec_comparison";
  for (const auto& r : methods.rows) {
    if (!std::get<bool>(r.back())) report.numerical_failure = true;
  }
  report.summary = {
      {"experiment", "pec_comparison"},
      {"family", cfg.pec.family == PecFamily::tfim ? "tfim" : "two_level"},
      {"points", n},
      {"max_bond", cfg.sweep.max_bond},
      {"window_centers", prob.centers},
      {"window_half_width", prob.half_width},
      {"objective", cfg.pec.objective == SearchObjective::energy_error ? "energy_error" : "fidelity"},
      {"methods", summary_rows}};
  if (cfg.pec.family == PecFamily::tfim) {
    report.summary["sites"] = cfg.chain.sites;
    report.summary["chain_kind"] = std::string(to_string(cfg.chain.kind));
  }
  report.tables.emplace_back("methods", std::move(methods));
  report.tables.emplace_back("points", std::move(points));
  report.tables.emplace_back("bonds", std::move(bonds));
  report.tables.emplace_back("grid_search", std::move(search));
  return report;
}

Report run_dmrg_benchmark(const ExperimentConfig& cfg) {
  cfg.validate();
  Report report;
  report.kind = "dmrg_benchmark";
  Table t;
  t.columns = {"sites", "field", "dmrg_energy", "exact_energy", "abs_error", "sweeps",
               "converged", "max_bond_dim"};
  std::mt19937_64 rng(cfg.seed);
  double worst = 0.0;
  bool all_converged = true;
  for (int sites : cfg.benchmark.sites) {
    for (double field : cfg.benchmark.fields) {
      const SpinChainSpec spec{cfg.chain.kind, sites, field, cfg.chain.coupling};
      const Eigenpairs ed =
          exact_diagonalization(dense_spin_chain_hamiltonian(spec), 1, cfg.sweep.dense_limit);
      const MatrixProductState init =
          random_mps(static_cast<std::size_t>(sites), 2, cfg.sweep.max_bond, rng);
      const DmrgResult res = ground_state(build_spin_chain_mpo(spec), init, cfg.sweep);
      const double err = std::abs(res.energy - ed.values(0));
      worst = std::max(worst, err);
      all_converged = all_converged && res.converged;
      t.add_row({static_cast<std::int64_t>(sites), field, res.energy, ed.values(0), err,
                 static_cast<std::int64_t>(res.sweep_energies.size()), res.converged,
                 static_cast<std::int64_t>(res.state.max_bond_dim())});
    }
  }
  report.numerical_failure = !all_converged;
  report.summary = {{"experiment", "dmrg_benchmark"},
                    {"chain_kind", std::string(to_string(cfg.chain.kind))},
                    {"max_bond", cfg.sweep.max_bond},
                    {"cases", t.rows.size()},
                    {"max_abs_error", worst},
                    {"all_converged", all_converged}};
  report.tables.emplace_back("cases", std::move(t));
  return report;
}

namespace {

Matrix random_hermitian(Index dim, double scale, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(dim, dim);
  for (Index i = 0; i < dim; ++i) {
    for (Index j = 0; j < dim; ++j) m(i, j) = Complex(normal(rng), normal(rng));
  }
  return scale * hermitian_part(m);
}

// exp(i t K) for hermitian K.
struct UnitaryFlow {
  Matrix basis;
  RealVector rates;

  explicit UnitaryFlow(const Matrix& k) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(k);
    basis = es.eigenvectors();
    rates = es.eigenvalues();
  }
  Matrix at(double t) const {
    Vector ph(rates.size());
    for (Index i = 0; i < rates.size(); ++i) ph(i) = std::exp(kI * rates(i) * t);
    return basis * ph.asDiagonal() * basis.adjoint();
  }
  Matrix generator() const { return basis * rates.cast<Complex>().asDiagonal() * basis.adjoint(); }
};

std::vector<double> centered_grid(double t0, double h, int half) {
  std::vector<double> g;
  for (int i = -half; i <= half; ++i) g.push_back(t0 + h * i);
  return g;
}

DensityMatrix make_density(const Matrix& m) {
  const Matrix s = hermitian_part(m);
  return DensityMatrix(s / s.trace().real());
}

}  // namespace

GaugeSuiteResult gauge_algebra_suite(std::uint64_t seed, int families) {
  if (families < 1) throw InvalidInput("gauge_algebra_suite: families must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  constexpr Index dim = 3;

  GaugeSuiteResult res;
  res.families = families;
  res.min_covariant_action = std::numeric_limits<double>::infinity();
  for (int f = 0; f < families; ++f) {
    const UnitaryFlow flow(random_hermitian(dim, 0.7, rng));
    RealVector a(dim);
    RealVector b(dim);
    for (Index i = 0; i < dim; ++i) {
      a(i) = normal(rng);
      b(i) = 0.5 * normal(rng);
    }
    auto weights = [&](double t) {
      RealVector w(dim);
      for (Index i = 0; i < dim; ++i) w(i) = std::exp(a(i) + b(i) * t);
      return RealVector(w / w.sum());
    };
    auto rho_at = [&](double t) {
      const Matrix v = flow.at(t);
      return Matrix(v * weights(t).cast<Complex>().asDiagonal() * v.adjoint());
    };
    const double t0 = uniform(rng);

    // Potentials from the purified family.
    {
      const std::vector<double> grid = centered_grid(t0, 1e-3, 3);
      std::vector<DensityMatrix> rhos;
      std::vector<Matrix> amps;
      for (double t : grid) {
        rhos.push_back(make_density(rho_at(t)));
        amps.push_back(purify(rhos.back()).u);
      }
      const GaugePotential pot = gauge_potential_family(amps, grid);
      for (const auto& v : pot.values) {
        res.max_hermiticity_a = std::max(res.max_hermiticity_a, hermiticity_residual(v));
      }
      const SpectralTrack track = SpectralTrack::from_family(grid, rho_at);
      const std::size_t k = grid.size() / 2;
      const CoherenceMatrix c = default_coherence_matrix(track, k);
      const Matrix a1 = categorical_potential_1(pot.values[k], c, rhos[k]);
      const Matrix cube = default_coherence_cube(track, k).operator_form(track.point(k).eigenvectors);
      const Matrix a2 = categorical_potential_2(a1, cube, c);
      res.max_hermiticity_a1 = std::max(res.max_hermiticity_a1, hermiticity_residual(a1));
      res.max_hermiticity_a2 = std::max(res.max_hermiticity_a2, hermiticity_residual(a2));
      const double action = action_functional(rhos, pot, {});
      res.min_covariant_action = std::min(res.min_covariant_action, action);

      std::vector<DensityMatrix> constant(grid.size(), rhos[k]);
      GaugePotential zero{grid, std::vector<Matrix>(grid.size(), Matrix::Zero(dim, dim)),
                          PotentialLevel::base};
      res.max_constant_family_action =
          std::max(res.max_constant_family_action, std::abs(action_functional(constant, zero, {})));
    }

    // Covariance under a random smooth gauge transformation.
    {
      const std::vector<double> grid = centered_grid(t0, 1e-5, 1);
      const UnitaryFlow gauge(random_hermitian(dim, 0.7, rng));
      const Matrix a0 = random_hermitian(dim, 0.5, rng);
      std::vector<DensityMatrix> rhos;
      std::vector<DensityMatrix> moved;
      for (double t : grid) {
        rhos.push_back(make_density(rho_at(t)));
        const Matrix w = gauge.at(t);
        moved.push_back(make_density(w * rhos.back().matrix() * w.adjoint()));
      }
      const Matrix w = gauge.at(t0);
      const Matrix dw = kI * gauge.generator() * w;
      const GaugeTransformResult tr = gauge_transform(rhos[1], a0, w, dw);
      const GaugePotential pot{grid, {a0, a0, a0}, PotentialLevel::base};
      const GaugePotential pot_moved{grid, {tr.potential, tr.potential, tr.potential},
                                     PotentialLevel::base};
      const Matrix d = covariant_derivative(rhos, pot, 1);
      const Matrix d_moved = covariant_derivative(moved, pot_moved, 1);
      res.max_covariance_residual =
          std::max(res.max_covariance_residual, max_abs(d_moved - w * d * w.adjoint()));
    }

    // Parallel transport: rho(t) = V rho0 V^dagger with A = i (dV) V^dagger = -K.
    {
      const std::vector<double> grid = UniformGrid{0.0, 1.0, 401}.values();
      const Matrix rho0 = rho_at(t0);
      std::vector<DensityMatrix> rhos;
      for (double t : grid) {
        const Matrix v = flow.at(t);
        rhos.push_back(make_density(v * rho0 * v.adjoint()));
      }
      const Matrix a_pt = -flow.generator();
      const GaugePotential pot{grid, std::vector<Matrix>(grid.size(), a_pt), PotentialLevel::base};
      const double action = action_functional(rhos, pot, {});
      res.max_parallel_transport_action = std::max(res.max_parallel_transport_action, action);
      res.min_covariant_action = std::min(res.min_covariant_action, action);
    }
  }
  return res;
}

namespace {

Matrix fixed_matrix(std::initializer_list<Complex> entries, Index dim) {
  Matrix m(dim, dim);
  auto it = entries.begin();
  for (Index i = 0; i < dim; ++i) {
    for (Index j = 0; j < dim; ++j) m(i, j) = *it++;
  }
  return m;
}

}  // namespace

RefinementStudy finite_difference_refinement(int base_points, int refinements) {
  if (base_points < 5 || base_points % 2 == 0 || refinements < 1) {
    throw InvalidInput("finite_difference_refinement: need odd base_points >= 5 and refinements >= 1");
  }
  const Matrix x = fixed_matrix({0.0, 0.4, Complex(0.1, 0.3), 0.4, 0.0, Complex(0.2, -0.1),
                                 Complex(0.1, -0.3), Complex(0.2, 0.1), 0.0},
                                3);
  const Matrix y = fixed_matrix({0.3, Complex(0.0, 0.2), 0.1, Complex(0.0, -0.2), -0.1, 0.25, 0.1,
                                 0.25, 0.2},
                                3);
  const Matrix h0 = fixed_matrix({0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.5}, 3);
  auto family = [&](double l) { return Matrix(h0 + l * x + l * l * y); };

  const Matrix k1 = pauli_x() + 0.3 * pauli_z();
  const Matrix k2 = 0.8 * pauli_y() + 0.2 * pauli_z();
  const UnitaryFlow v1(k1);

  RefinementStudy out;
  for (int level = 0; level <= refinements; ++level) {
    const int n = (base_points - 1) * (1 << level) + 1;
    const std::vector<double> grid = UniformGrid{0.0, 1.0, n}.values();
    out.spacing.push_back(grid[1] - grid[0]);

    const SpectralTrack track = SpectralTrack::from_family(grid, family);
    const Matrix d = derivative_overlaps(track, static_cast<std::size_t>(n / 2));
    out.antihermiticity.push_back(max_abs(d + d.adjoint()));

    GaugeField2D field;
    field.axis1 = grid;
    field.axis2 = grid;
    for (double xv : grid) {
      const Matrix u1 = v1.at(xv);
      for (std::size_t j = 0; j < grid.size(); ++j) {
        field.components[0].push_back(-k1);
        field.components[1].push_back(-u1 * k2 * u1.adjoint());
      }
    }
    const CurvatureField f = curvature_field(field, CurvatureConvention::hermitian);
    double worst = 0.0;
    for (const auto& m : f.values) worst = std::max(worst, max_abs(m));
    out.pure_gauge_curvature.push_back(worst);
  }
  return out;
}

Report run_gauge_diagnostics(const ExperimentConfig& cfg) {
  cfg.validate();
  const GaugeSection& g = cfg.gauge;
  const TwoLevelModel model{cfg.two_level.coupling, cfg.two_level.lambda.values()};
  const std::vector<double> grid =
      UniformGrid{cfg.two_level.lambda.min, cfg.two_level.lambda.max, g.points}.values();
  auto rho_at = [&](double l) { return thermal_state(two_level_hamiltonian(model, l), g.beta); };

  std::vector<DensityMatrix> rhos;
  std::vector<Matrix> amps;
  for (double l : grid) {
    rhos.push_back(make_density(rho_at(l)));
    amps.push_back(purify(rhos.back()).u);
  }
  const GaugePotential pot = gauge_potential_family(amps, grid);
  const SpectralTrack track = SpectralTrack::from_family(grid, rho_at);

  Table family;
  family.columns = {"lambda", "hermiticity_a", "hermiticity_a1", "hermiticity_a2",
                    "covariant_derivative_max", "charge_residual_max"};
  double worst_a = 0.0;
  double worst_a1 = 0.0;
  double worst_a2 = 0.0;
  for (std::size_t k = 1; k + 1 < grid.size(); ++k) {
    const CoherenceMatrix c = default_coherence_matrix(track, k);
    const Matrix a1 = categorical_potential_1(pot.values[k], c, rhos[k]);
    const Matrix cube = default_coherence_cube(track, k).operator_form(track.point(k).eigenvectors);
    const Matrix a2 = categorical_potential_2(a1, cube, c);
    const Matrix d = covariant_derivative(rhos, pot, k);
    const RealMatrix charge = gauge_charge_residual(rhos, pot, k, g.charge_eps);
    const double ha = hermiticity_residual(pot.values[k]);
    const double ha1 = hermiticity_residual(a1);
    const double ha2 = hermiticity_residual(a2);
    worst_a = std::max(worst_a, ha);
    worst_a1 = std::max(worst_a1, ha1);
    worst_a2 = std::max(worst_a2, ha2);
    family.add_row({grid[k], ha, ha1, ha2, max_abs(d), charge.cwiseAbs().maxCoeff()});
  }

  ActionParams covariant;
  ActionParams scalar;
  scalar.mode = ActionMode::scalar_like;
  const double action_cov = action_functional(rhos, pot, covariant);
  const double action_scalar = action_functional(rhos, pot, scalar);
  std::vector<DensityMatrix> constant(grid.size(), rhos[grid.size() / 2]);
  const GaugePotential zero{grid, std::vector<Matrix>(grid.size(), Matrix::Zero(2, 2)),
                            PotentialLevel::base};
  const double action_constant = action_functional(constant, zero, covariant);

  const RefinementStudy study = finite_difference_refinement(g.base_points, g.refinements);
  Table refinement;
  refinement.columns = {"level", "spacing", "antihermiticity", "antihermiticity_ratio",
                        "pure_gauge_curvature", "curvature_ratio"};
  for (std::size_t l = 0; l < study.spacing.size(); ++l) {
    const double r1 = l == 0 ? 0.0 : study.antihermiticity[l - 1] / study.antihermiticity[l];
    const double r2 = l == 0 ? 0.0 : study.pure_gauge_curvature[l - 1] / study.pure_gauge_curvature[l];
    refinement.add_row({static_cast<std::int64_t>(l), study.spacing[l], study.antihermiticity[l], r1,
                        study.pure_gauge_curvature[l], r2});
  }

  const GaugeSuiteResult suite = gauge_algebra_suite(cfg.seed, g.random_families);

  Report report;
  report.kind = "gauge_diagnostics";
  report.summary = {
      {"experiment", "gauge_diagnostics"},
      {"thermal_family",
       {{"points", grid.size()},
        {"beta", g.beta},
        {"coupling", model.coupling},
        {"max_hermiticity_a", worst_a},
        {"max_hermiticity_a1", worst_a1},
        {"max_hermiticity_a2", worst_a2},
        {"action_covariant", action_cov},
        {"action_scalar_like", action_scalar}}},
      {"constant_family_action", action_constant},
      {"random_suite",
       {{"families", suite.families},
        {"max_hermiticity_a", suite.max_hermiticity_a},
        {"max_hermiticity_a1", suite.max_hermiticity_a1},
        {"max_hermiticity_a2", suite.max_hermiticity_a2},
        {"max_covariance_residual", suite.max_covariance_residual},
        {"min_covariant_action", suite.min_covariant_action},
        {"max_constant_family_action", suite.max_constant_family_action},
        {"max_parallel_transport_action", suite.max_parallel_transport_action}}}};
  report.tables.emplace_back("thermal_family", std::move(family));
  report.tables.emplace_back("refinement", std::move(refinement));
  return report;
}

Report run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.kind) {
    case ExperimentKind::crossing_scan: return run_crossing_scan(cfg);
    case ExperimentKind::pec_comparison: return run_pec_comparison(cfg);
    case ExperimentKind::dmrg_benchmark: return run_dmrg_benchmark(cfg);
    case ExperimentKind::gauge_diagnostics: return run_gauge_diagnostics(cfg);
  }
  throw InvalidInput("run_experiment: unknown experiment kind");
}

}  // namespace cdmrg
