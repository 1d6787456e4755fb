#ifndef RVAS_CLI_CONFIG_HPP
#define RVAS_CLI_CONFIG_HPP

// Experiment configuration: a single self-describing JSON file with named
// hyperparameter fields (mass/concentration/discount), never positional
// tuples. Parsing distinguishes malformed JSON (config_parse_error, exit 2)
// from missing/invalid fields (domain_error naming the field, exit 3).

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rvas/cli/sha256.hpp"
#include "rvas/error.hpp"
#include "rvas/power.hpp"
#include "rvas/predictive.hpp"
#include "rvas/seqmodel.hpp"
#include "rvas/simulate.hpp"

namespace rvas::cli {

using nlohmann::json;

class config_parse_error : public std::runtime_error {
 public:
  explicit config_parse_error(const std::string& msg) : std::runtime_error(msg) {}
};

enum class Mode { phi, predict, simulate, fixed_design, fixed_budget, optimize };
enum class Model { analytic_bernoulli, mc_hierarchical };

struct ExperimentConfig {
  Mode mode = Mode::phi;
  Model model = Model::analytic_bernoulli;
  std::optional<predict::PriorParams> affected;
  std::optional<predict::PriorParams> unaffected;
  std::optional<sim::HierParams> hier;
  std::vector<double> depths;
  long call_threshold = 30;
  double err_rate = 0.05;
  seq::CostModel cost;
  std::vector<double> budgets;
  std::vector<long> sizes;
  std::vector<long> ks{1};
  sim::KtonMode kton_mode = sim::KtonMode::exact;
  bool exclusive = false;
  double significance = 1e-4;
  long replicates = 200;
  power::VarianceMode variance_mode = power::VarianceMode::replicate;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;  // 0: decide at run time
  std::string output_path = "out";
  bool emit_gnuplot = false;
  bool dump_matrices = false;
  long n_pilot = 0;
  double phi_pilot = 1.0;
};

namespace detail_cfg {

inline const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object()) throw domain_error("config: " + where + " must be an object");
  auto it = j.find(key);
  if (it == j.end()) throw domain_error("config: missing field " + where + "." + key);
  return *it;
}

template <typename T>
inline T number(const json& j, const char* key, const std::string& where) {
  const json& v = field(j, key, where);
  if (!v.is_number()) throw domain_error("config: field " + where + "." + key + " must be a number");
  return v.get<T>();
}

template <typename T>
inline T number_or(const json& j, const char* key, const std::string& where, T fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return number<T>(j, key, where);
}

inline predict::PriorParams prior(const json& j, const std::string& where) {
  predict::PriorParams p;
  p.mass = number<double>(j, "mass", where);
  p.concentration = number<double>(j, "concentration", where);
  p.discount = number<double>(j, "discount", where);
  p.validate();
  return p;
}

inline std::vector<double> depth_list(const json& seq, const std::string& where) {
  std::vector<double> depths;
  if (seq.contains("depth")) depths.push_back(number<double>(seq, "depth", where));
  if (seq.contains("depths")) {
    const json& d = seq.at("depths");
    if (!d.is_array() || d.empty())
      throw domain_error("config: " + where + ".depths must be a nonempty array");
    for (const auto& v : d) depths.push_back(v.get<double>());
  }
  if (seq.contains("depth_grid")) {
    const json& g = seq.at("depth_grid");
    const double lo = number<double>(g, "min", where + ".depth_grid");
    const double hi = number<double>(g, "max", where + ".depth_grid");
    const int points = number<int>(g, "points", where + ".depth_grid");
    auto grid = power::default_depth_grid(lo, hi, points);
    depths.insert(depths.end(), grid.begin(), grid.end());
  }
  return depths;
}

}  // namespace detail_cfg

inline Mode parse_mode(const std::string& s) {
  if (s == "phi") return Mode::phi;
  if (s == "predict") return Mode::predict;
  if (s == "simulate") return Mode::simulate;
  if (s == "fixed_design") return Mode::fixed_design;
  if (s == "fixed_budget") return Mode::fixed_budget;
  if (s == "optimize") return Mode::optimize;
  throw domain_error("config: unknown mode '" + s + "'");
}

inline std::string mode_name(Mode m) {
  switch (m) {
    case Mode::phi: return "phi";
    case Mode::predict: return "predict";
    case Mode::simulate: return "simulate";
    case Mode::fixed_design: return "fixed_design";
    case Mode::fixed_budget: return "fixed_budget";
    default: return "optimize";
  }
}

inline ExperimentConfig parse_config_json(const json& j) {
  ExperimentConfig cfg;
  if (!j.is_object()) throw domain_error("config: top level must be an object");
  cfg.mode = parse_mode(detail_cfg::field(j, "mode", "config").get<std::string>());
  if (j.contains("model")) {
    const std::string m = j.at("model").get<std::string>();
    if (m == "analytic_bernoulli")
      cfg.model = Model::analytic_bernoulli;
    else if (m == "mc_hierarchical")
      cfg.model = Model::mc_hierarchical;
    else
      throw domain_error("config: unknown model '" + m + "'");
  }
  if (cfg.mode == Mode::simulate) cfg.model = Model::mc_hierarchical;

  if (j.contains("priors")) {
    const json& p = j.at("priors");
    if (p.contains("affected")) cfg.affected = detail_cfg::prior(p.at("affected"), "priors.affected");
    if (p.contains("unaffected"))
      cfg.unaffected = detail_cfg::prior(p.at("unaffected"), "priors.unaffected");
  }
  if (j.contains("hier")) {
    const json& h = j.at("hier");
    sim::HierParams hp;
    hp.shared = detail_cfg::prior(detail_cfg::field(h, "shared", "hier"), "hier.shared");
    const json& pops = detail_cfg::field(h, "populations", "hier");
    if (!pops.is_array() || pops.empty())
      throw domain_error("config: hier.populations must be a nonempty array");
    for (std::size_t i = 0; i < pops.size(); ++i) {
      const std::string where = "hier.populations[" + std::to_string(i) + "]";
      hp.populations.push_back({detail_cfg::number<double>(pops[i], "a", where),
                                detail_cfg::number<double>(pops[i], "b", where)});
    }
    hp.validate();
    cfg.hier = std::move(hp);
  }

  const json& sq = detail_cfg::field(j, "seq", "config");
  cfg.depths = detail_cfg::depth_list(sq, "seq");
  cfg.call_threshold = detail_cfg::number<long>(sq, "call_threshold", "seq");
  cfg.err_rate = detail_cfg::number<double>(sq, "err_rate", "seq");
  seq::SeqConfig{cfg.depths.empty() ? 0.0 : cfg.depths.front(), cfg.call_threshold, cfg.err_rate}
      .validate();
  if (cfg.depths.empty() && cfg.mode != Mode::fixed_budget && cfg.mode != Mode::optimize)
    throw domain_error("config: seq must provide depth, depths or depth_grid");
  if (cfg.depths.empty()) cfg.depths = power::default_depth_grid();

  if (j.contains("cost")) {
    const json& c = j.at("cost");
    cfg.cost.fixed_cost = detail_cfg::number_or<double>(c, "fixed_cost", "cost", 0.0);
    cfg.cost.per_sample_rate = detail_cfg::number_or<double>(c, "per_sample_rate", "cost", 1.0);
    cfg.cost.validate();
  }
  if (j.contains("budgets")) {
    for (const auto& b : j.at("budgets")) cfg.budgets.push_back(b.get<double>());
  }
  if (j.contains("sizes")) {
    for (const auto& s : j.at("sizes")) cfg.sizes.push_back(s.get<long>());
  }
  if (j.contains("k") && j.contains("ks"))
    throw domain_error("config: give either k or ks, not both");
  if (j.contains("k")) cfg.ks = {j.at("k").get<long>()};
  if (j.contains("ks")) {
    cfg.ks.clear();
    for (const auto& k : j.at("ks")) cfg.ks.push_back(k.get<long>());
    if (cfg.ks.empty()) throw domain_error("config: ks must be nonempty");
  }
  for (long k : cfg.ks)
    if (k < 1) throw domain_error("config: k must be >= 1");
  if (j.contains("kton_mode")) {
    const std::string m = j.at("kton_mode").get<std::string>();
    if (m == "exact")
      cfg.kton_mode = sim::KtonMode::exact;
    else if (m == "at_most" || m == "at-most")
      cfg.kton_mode = sim::KtonMode::at_most;
    else
      throw domain_error("config: kton_mode must be 'exact' or 'at_most'");
  }
  if (j.contains("exclusive")) cfg.exclusive = j.at("exclusive").get<bool>();
  if (j.contains("significance")) cfg.significance = j.at("significance").get<double>();
  if (cfg.significance <= 0 || cfg.significance >= 1)
    throw domain_error("config: significance must lie in (0,1)");
  if (j.contains("replicates")) cfg.replicates = j.at("replicates").get<long>();
  if (j.contains("variance_mode")) {
    const std::string v = j.at("variance_mode").get<std::string>();
    if (v == "replicate")
      cfg.variance_mode = power::VarianceMode::replicate;
    else if (v == "poisson")
      cfg.variance_mode = power::VarianceMode::poisson;
    else
      throw domain_error("config: variance_mode must be 'replicate' or 'poisson'");
  }
  if (j.contains("seed")) {
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.seed_set = true;
  }
  if (j.contains("threads")) cfg.threads = j.at("threads").get<int>();
  if (j.contains("output_path")) cfg.output_path = j.at("output_path").get<std::string>();
  if (j.contains("emit_gnuplot")) cfg.emit_gnuplot = j.at("emit_gnuplot").get<bool>();
  if (j.contains("dump_matrices")) cfg.dump_matrices = j.at("dump_matrices").get<bool>();
  if (j.contains("n_pilot")) cfg.n_pilot = j.at("n_pilot").get<long>();
  if (j.contains("phi_pilot")) cfg.phi_pilot = j.at("phi_pilot").get<double>();

  // mode-specific requirements
  const bool mc = cfg.model == Model::mc_hierarchical;
  auto need = [&](bool ok, const std::string& what) {
    if (!ok) throw domain_error("config: mode " + mode_name(cfg.mode) + " requires " + what);
  };
  switch (cfg.mode) {
    case Mode::phi:
      break;
    case Mode::predict:
      need(cfg.affected.has_value(), "priors.affected");
      need(!cfg.sizes.empty(), "sizes");
      break;
    case Mode::simulate:
      need(cfg.hier.has_value(), "hier");
      need(!cfg.sizes.empty(), "sizes (one per population)");
      need(cfg.sizes.size() == cfg.hier->populations.size(),
           "sizes matching hier.populations length");
      break;
    case Mode::fixed_design:
      if (mc)
        need(cfg.hier.has_value() && cfg.hier->populations.size() == 2,
             "hier with two populations");
      else
        need(cfg.affected.has_value() && cfg.unaffected.has_value(),
             "priors.affected and priors.unaffected");
      need(!cfg.sizes.empty(), "sizes");
      break;
    case Mode::fixed_budget:
    case Mode::optimize:
      if (mc)
        need(cfg.hier.has_value() && cfg.hier->populations.size() == 2,
             "hier with two populations");
      else
        need(cfg.affected.has_value() && cfg.unaffected.has_value(),
             "priors.affected and priors.unaffected");
      need(!cfg.budgets.empty(), "budgets");
      break;
  }
  if ((mc || cfg.mode == Mode::simulate) && !cfg.seed_set)
    throw domain_error("config: Monte Carlo modes require a seed");
  if (mc && cfg.replicates < 2) throw domain_error("config: replicates must be >= 2");
  for (long s : cfg.sizes)
    if (s < 1) throw domain_error("config: sizes must be >= 1");
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw config_parse_error("cannot open config file: " + path);
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw config_parse_error("config JSON parse failure in " + path + ": " + e.what());
  }
  return parse_config_json(j);
}

// Canonical form: every effective field materialized; nlohmann orders keys
// lexicographically, so the dump is unique for a given configuration.
inline json canonical_json(const ExperimentConfig& cfg) {
  json j;
  j["mode"] = mode_name(cfg.mode);
  j["model"] = cfg.model == Model::analytic_bernoulli ? "analytic_bernoulli" : "mc_hierarchical";
  auto prior_json = [](const predict::PriorParams& p) {
    return json{{"mass", p.mass}, {"concentration", p.concentration}, {"discount", p.discount}};
  };
  if (cfg.affected || cfg.unaffected) {
    json p;
    if (cfg.affected) p["affected"] = prior_json(*cfg.affected);
    if (cfg.unaffected) p["unaffected"] = prior_json(*cfg.unaffected);
    j["priors"] = p;
  }
  if (cfg.hier) {
    json pops = json::array();
    for (const auto& p : cfg.hier->populations) pops.push_back({{"a", p.a}, {"b", p.b}});
    j["hier"] = {{"shared", prior_json(cfg.hier->shared)}, {"populations", pops}};
  }
  j["seq"] = {{"depths", cfg.depths},
              {"call_threshold", cfg.call_threshold},
              {"err_rate", cfg.err_rate}};
  j["cost"] = {{"fixed_cost", cfg.cost.fixed_cost}, {"per_sample_rate", cfg.cost.per_sample_rate}};
  if (!cfg.budgets.empty()) j["budgets"] = cfg.budgets;
  if (!cfg.sizes.empty()) j["sizes"] = cfg.sizes;
  j["ks"] = cfg.ks;
  j["kton_mode"] = cfg.kton_mode == sim::KtonMode::exact ? "exact" : "at_most";
  j["exclusive"] = cfg.exclusive;
  j["significance"] = cfg.significance;
  j["replicates"] = cfg.replicates;
  j["variance_mode"] =
      cfg.variance_mode == power::VarianceMode::replicate ? "replicate" : "poisson";
  if (cfg.seed_set) j["seed"] = cfg.seed;
  j["output_path"] = cfg.output_path;
  j["emit_gnuplot"] = cfg.emit_gnuplot;
  j["dump_matrices"] = cfg.dump_matrices;
  j["n_pilot"] = cfg.n_pilot;
  j["phi_pilot"] = cfg.phi_pilot;
  return j;
}

inline std::string config_digest(const ExperimentConfig& cfg) {
  return Sha256::of(canonical_json(cfg).dump(2));
}

}  // namespace rvas::cli

#endif  // RVAS_CLI_CONFIG_HPP
