#include "cdmrg/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace cdmrg {

namespace {

using nlohmann::json;

class Reader {
 public:
  std::vector<std::string> errors;

  // Reports keys of `obj` outside `allowed`; returns false if obj is not an object.
  bool object(const json& obj, const std::string& path, std::set<std::string> allowed) {
    if (!obj.is_object()) {
      errors.push_back(path + ": expected an object");
      return false;
    }
    for (const auto& [key, value] : obj.items()) {
      if (!allowed.count(key)) errors.push_back(path + "." + key + ": unknown key");
    }
    return true;
  }

  void number(const json& obj, const std::string& path, const char* key, double& out) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_number()) {
      errors.push_back(path + "." + key + ": expected a number");
      return;
    }
    out = v.get<double>();
  }

  template <class Int>
  void integer(const json& obj, const std::string& path, const char* key, Int& out) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) {
      errors.push_back(path + "." + key + ": expected an integer");
      return;
    }
    if constexpr (std::is_unsigned_v<Int>) {
      if (v.is_number_unsigned() || v.get<std::int64_t>() >= 0) {
        out = v.get<Int>();
      } else {
        errors.push_back(path + "." + key + ": expected a non-negative integer");
      }
    } else {
      out = v.get<Int>();
    }
  }

  void boolean(const json& obj, const std::string& path, const char* key, bool& out) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_boolean()) {
      errors.push_back(path + "." + key + ": expected true or false");
      return;
    }
    out = v.get<bool>();
  }

  void string(const json& obj, const std::string& path, const char* key, std::string& out) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_string()) {
      errors.push_back(path + "." + key + ": expected a string");
      return;
    }
    out = v.get<std::string>();
  }

  template <class T>
  void list(const json& obj, const std::string& path, const char* key, std::vector<T>& out) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    const std::string where = path + "." + key;
    if (!v.is_array()) {
      errors.push_back(where + ": expected an array");
      return;
    }
    std::vector<T> values;
    for (const json& x : v) {
      const bool ok = std::is_integral_v<T> ? x.is_number_integer() : x.is_number();
      if (!ok) {
        errors.push_back(where + ": expected an array of " +
                         (std::is_integral_v<T> ? "integers" : "numbers"));
        return;
      }
      values.push_back(x.get<T>());
    }
    out = std::move(values);
  }

  // Runs `convert` on a string field, recording InvalidInput as an error.
  template <class T, class F>
  void enumeration(const json& obj, const std::string& path, const char* key, T& out, F convert) {
    std::string name;
    const std::size_t before = errors.size();
    string(obj, path, key, name);
    if (errors.size() != before || !obj.contains(key)) return;
    try {
      out = convert(name);
    } catch (const InvalidInput& e) {
      errors.push_back(path + "." + key + ": " + e.what());
    }
  }

  void grid(const json& obj, const std::string& path, const char* key, UniformGrid& out) {
    if (!obj.contains(key)) return;
    const std::string where = path + "." + key;
    if (!object(obj.at(key), where, {"min", "max", "points"})) return;
    number(obj.at(key), where, "min", out.min);
    number(obj.at(key), where, "max", out.max);
    integer(obj.at(key), where, "points", out.points);
  }

  void policy_fields(const json& obj, const std::string& path, TruncationPolicy& p) {
    number(obj, path, "gamma1", p.gamma1);
    number(obj, path, "gamma2", p.gamma2);
    number(obj, path, "lambda1", p.lambda1);
    number(obj, path, "lambda2", p.lambda2);
    number(obj, path, "cutoff", p.cutoff);
    boolean(obj, path, "second_order_multiplicity", p.second_order_multiplicity);
  }
};

PecFamily pec_family_from_string(const std::string& s) {
  if (s == "tfim") return PecFamily::tfim;
  if (s == "two_level") return PecFamily::two_level;
  throw InvalidInput("unknown family '" + s + "' (expected tfim or two_level)");
}

SearchObjective objective_from_string(const std::string& s) {
  if (s == "energy_error") return SearchObjective::energy_error;
  if (s == "fidelity") return SearchObjective::fidelity;
  throw InvalidInput("unknown objective '" + s + "' (expected energy_error or fidelity)");
}

json grid_json(const UniformGrid& g) { return {{"min", g.min}, {"max", g.max}, {"points", g.points}}; }

}  // namespace

ExperimentConfig parse_config(const json& doc) {
  ExperimentConfig cfg;
  Reader r;
  if (!r.object(doc, "config",
                {"kind", "seed", "output_dir", "two_level", "crossing", "chain", "pec", "benchmark",
                 "gauge", "policies", "coefficient_grids", "sweep"})) {
    throw InvalidInput("invalid configuration:\n  - config: expected an object");
  }
  if (!doc.contains("kind")) {
    r.errors.push_back("config.kind: required");
  } else {
    r.enumeration(doc, "config", "kind", cfg.kind,
                  [](const std::string& s) { return experiment_kind_from_string(s); });
  }
  r.integer(doc, "config", "seed", cfg.seed);
  r.string(doc, "config", "output_dir", cfg.output_dir);

  if (doc.contains("two_level") && r.object(doc["two_level"], "two_level", {"coupling", "lambda"})) {
    const json& s = doc["two_level"];
    r.number(s, "two_level", "coupling", cfg.two_level.coupling);
    r.grid(s, "two_level", "lambda", cfg.two_level.lambda);
  }
  if (doc.contains("crossing") &&
      r.object(doc["crossing"], "crossing", {"beta", "sweep_time", "substeps"})) {
    const json& s = doc["crossing"];
    r.number(s, "crossing", "beta", cfg.crossing.beta);
    r.number(s, "crossing", "sweep_time", cfg.crossing.sweep_time);
    r.integer(s, "crossing", "substeps", cfg.crossing.substeps);
  }
  if (doc.contains("chain") &&
      r.object(doc["chain"], "chain", {"kind", "sites", "coupling", "field"})) {
    const json& s = doc["chain"];
    r.enumeration(s, "chain", "kind", cfg.chain.kind,
                  [](const std::string& k) { return chain_kind_from_string(k); });
    r.integer(s, "chain", "sites", cfg.chain.sites);
    r.number(s, "chain", "coupling", cfg.chain.coupling);
    r.grid(s, "chain", "field", cfg.chain.field);
  }
  if (doc.contains("pec") &&
      r.object(doc["pec"], "pec", {"family", "window_half_width", "window_centers", "objective"})) {
    const json& s = doc["pec"];
    r.enumeration(s, "pec", "family", cfg.pec.family, pec_family_from_string);
    r.number(s, "pec", "window_half_width", cfg.pec.window_half_width);
    r.list(s, "pec", "window_centers", cfg.pec.window_centers);
    r.enumeration(s, "pec", "objective", cfg.pec.objective, objective_from_string);
  }
  if (doc.contains("benchmark") && r.object(doc["benchmark"], "benchmark", {"sites", "fields"})) {
    r.list(doc["benchmark"], "benchmark", "sites", cfg.benchmark.sites);
    r.list(doc["benchmark"], "benchmark", "fields", cfg.benchmark.fields);
  }
  if (doc.contains("gauge") &&
      r.object(doc["gauge"], "gauge",
               {"points", "beta", "base_points", "refinements", "charge_eps", "random_families"})) {
    const json& s = doc["gauge"];
    r.integer(s, "gauge", "points", cfg.gauge.points);
    r.number(s, "gauge", "beta", cfg.gauge.beta);
    r.integer(s, "gauge", "base_points", cfg.gauge.base_points);
    r.integer(s, "gauge", "refinements", cfg.gauge.refinements);
    r.number(s, "gauge", "charge_eps", cfg.gauge.charge_eps);
    r.integer(s, "gauge", "random_families", cfg.gauge.random_families);
  }
  if (doc.contains("coefficient_grids") &&
      r.object(doc["coefficient_grids"], "coefficient_grids",
               {"gamma1", "gamma2", "lambda1", "lambda2"})) {
    const json& s = doc["coefficient_grids"];
    r.list(s, "coefficient_grids", "gamma1", cfg.grids.gamma1);
    r.list(s, "coefficient_grids", "gamma2", cfg.grids.gamma2);
    r.list(s, "coefficient_grids", "lambda1", cfg.grids.lambda1);
    r.list(s, "coefficient_grids", "lambda2", cfg.grids.lambda2);
  }
  if (doc.contains("sweep") &&
      r.object(doc["sweep"], "sweep",
               {"max_bond", "num_sweeps", "energy_tol", "dense_limit", "cutoff",
                "second_order_multiplicity"})) {
    const json& s = doc["sweep"];
    r.integer(s, "sweep", "max_bond", cfg.sweep.max_bond);
    r.integer(s, "sweep", "num_sweeps", cfg.sweep.num_sweeps);
    r.number(s, "sweep", "energy_tol", cfg.sweep.energy_tol);
    r.integer(s, "sweep", "dense_limit", cfg.sweep.dense_limit);
    r.number(s, "sweep", "cutoff", cfg.sweep.policy.cutoff);
    r.boolean(s, "sweep", "second_order_multiplicity", cfg.sweep.policy.second_order_multiplicity);
  }
  cfg.sweep.policy.max_kept = cfg.sweep.max_bond;

  if (doc.contains("policies")) {
    const json& list = doc["policies"];
    if (!list.is_array()) {
      r.errors.push_back("config.policies: expected an array");
    } else {
      for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string path = "policies[" + std::to_string(i) + "]";
        if (!r.object(list[i], path,
                      {"name", "kind", "gamma1", "gamma2", "lambda1", "lambda2", "max_kept",
                       "cutoff", "second_order_multiplicity"})) {
          continue;
        }
        NamedPolicy np;
        if (!list[i].contains("kind")) r.errors.push_back(path + ".kind: required");
        r.enumeration(list[i], path, "kind", np.policy.kind,
                      [](const std::string& k) { return policy_kind_from_string(k); });
        np.name = std::string(to_string(np.policy.kind));
        r.string(list[i], path, "name", np.name);
        r.integer(list[i], path, "max_kept", np.policy.max_kept);
        r.policy_fields(list[i], path, np.policy);
        cfg.policies.push_back(np);
      }
    }
  } else {
    cfg.policies.push_back({"standard", TruncationPolicy{}});
  }

  if (!r.errors.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& e : r.errors) msg += "\n  - " + e;
    throw InvalidInput(msg);
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read config file '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidInput("config file '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

json config_to_json(const ExperimentConfig& cfg) {
  json policies = json::array();
  for (const auto& np : cfg.policies) {
    const auto& p = np.policy;
    policies.push_back({{"name", np.name},
                        {"kind", std::string(to_string(p.kind))},
                        {"gamma1", p.gamma1},
                        {"gamma2", p.gamma2},
                        {"lambda1", p.lambda1},
                        {"lambda2", p.lambda2},
                        {"max_kept", p.max_kept},
                        {"cutoff", p.cutoff},
                        {"second_order_multiplicity", p.second_order_multiplicity}});
  }
  return {
      {"kind", std::string(to_string(cfg.kind))},
      {"seed", cfg.seed},
      {"two_level", {{"coupling", cfg.two_level.coupling}, {"lambda", grid_json(cfg.two_level.lambda)}}},
      {"crossing",
       {{"beta", cfg.crossing.beta},
        {"sweep_time", cfg.crossing.sweep_time},
        {"substeps", cfg.crossing.substeps}}},
      {"chain",
       {{"kind", std::string(to_string(cfg.chain.kind))},
        {"sites", cfg.chain.sites},
        {"coupling", cfg.chain.coupling},
        {"field", grid_json(cfg.chain.field)}}},
      {"pec",
       {{"family", cfg.pec.family == PecFamily::tfim ? "tfim" : "two_level"},
        {"window_half_width", cfg.pec.window_half_width},
        {"window_centers", cfg.pec.window_centers},
        {"objective",
         cfg.pec.objective == SearchObjective::energy_error ? "energy_error" : "fidelity"}}},
      {"benchmark", {{"sites", cfg.benchmark.sites}, {"fields", cfg.benchmark.fields}}},
      {"gauge",
       {{"points", cfg.gauge.points},
        {"beta", cfg.gauge.beta},
        {"base_points", cfg.gauge.base_points},
        {"refinements", cfg.gauge.refinements},
        {"charge_eps", cfg.gauge.charge_eps},
        {"random_families", cfg.gauge.random_families}}},
      {"policies", policies},
      {"coefficient_grids",
       {{"gamma1", cfg.grids.gamma1},
        {"gamma2", cfg.grids.gamma2},
        {"lambda1", cfg.grids.lambda1},
        {"lambda2", cfg.grids.lambda2}}},
      {"sweep",
       {{"max_bond", cfg.sweep.max_bond},
        {"num_sweeps", cfg.sweep.num_sweeps},
        {"energy_tol", cfg.sweep.energy_tol},
        {"dense_limit", cfg.sweep.dense_limit},
        {"cutoff", cfg.sweep.policy.cutoff},
        {"second_order_multiplicity", cfg.sweep.policy.second_order_multiplicity}}}};
}

}  // namespace cdmrg
