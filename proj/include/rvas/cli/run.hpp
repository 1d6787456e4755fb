#ifndef RVAS_CLI_RUN_HPP
#define RVAS_CLI_RUN_HPP

// Experiment orchestration: dispatches a validated config to the library,
// writes the CSV table, matrix dumps and a run manifest with per-file
// checksums. Output bytes depend only on (config, seed, tool version) —
// never on the worker count.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "rvas/cli/config.hpp"
#include "rvas/cli/csv.hpp"
#include "rvas/cli/sha256.hpp"
#include "rvas/error.hpp"
#include "rvas/version.hpp"

namespace rvas::cli {

struct RunOptions {
  std::string out_dir;      // overrides config output_path when nonempty
  int threads = 0;          // overrides config/env when > 0
  bool print_config = false;
};

namespace detail_run {

inline int resolve_threads(const ExperimentConfig& cfg, const RunOptions& opt) {
  if (opt.threads > 0) return opt.threads;
  if (const char* env = std::getenv("RVAS_THREADS")) {
    const int t = std::atoi(env);
    if (t > 0) return t;
  }
  if (cfg.threads > 0) return cfg.threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

struct Outputs {
  CsvTable table;
  std::vector<double> truncation_bounds;
  std::vector<std::string> warnings;
  std::vector<std::pair<std::string, std::string>> extra_files;  // name -> content
};

inline seq::SeqConfig seq_base(const ExperimentConfig& cfg) {
  return seq::SeqConfig{cfg.depths.empty() ? 1.0 : cfg.depths.front(), cfg.call_threshold,
                        cfg.err_rate};
}

inline void append_power_rows(CsvTable& t, const std::vector<power::PowerResult>& rows,
                              bool with_budget, bool with_k, long k) {
  for (const auto& r : rows) {
    std::vector<CsvCell> cells;
    if (with_budget) cells.emplace_back(r.budget.value_or(0.0));
    if (with_k) cells.emplace_back(k);
    cells.emplace_back(r.depth);
    cells.emplace_back(r.size);
    cells.emplace_back(r.mean_a);
    cells.emplace_back(r.mean_u);
    cells.emplace_back(r.var_a);
    cells.emplace_back(r.var_u);
    cells.emplace_back(r.statistic);
    cells.emplace_back(r.welch_df);
    cells.emplace_back(r.power);
    t.rows.push_back(std::move(cells));
  }
}

inline std::vector<std::string> power_header(bool with_budget, bool with_k) {
  std::vector<std::string> h;
  if (with_budget) h.push_back("budget");
  if (with_k) h.push_back("k");
  for (const char* c : {"depth", "size", "mean_A", "mean_U", "var_A", "var_U", "T", "df", "power"})
    h.push_back(c);
  return h;
}

inline power::PowerModel build_model(const ExperimentConfig& cfg, int threads,
                                     std::uint64_t stream_salt) {
  if (cfg.model == Model::analytic_bernoulli)
    return power::AnalyticModel{*cfg.affected, *cfg.unaffected};
  power::McModel mc;
  mc.hier = *cfg.hier;
  mc.replicates = cfg.replicates;
  mc.stream = rng::Stream(cfg.seed).child(stream_salt);
  mc.variance_mode = cfg.variance_mode;
  mc.threads = threads;
  return mc;
}

inline Outputs run_phi(const ExperimentConfig& cfg) {
  Outputs out;
  out.table.header = {"depth", "call_threshold", "err_rate", "phi"};
  for (double d : cfg.depths) {
    const double phi = seq::detection_prob(seq_base(cfg).with_depth(d));
    out.table.rows.push_back({d, cfg.call_threshold, cfg.err_rate, phi});
  }
  return out;
}

inline Outputs run_predict(const ExperimentConfig& cfg) {
  Outputs out;
  out.table.header = {"population", "depth",     "phi_follow", "n_pilot", "phi_pilot",
                      "m_follow",   "k",         "kton_mode",  "gamma",   "per_sample_rate"};
  const std::string mode_str = cfg.kton_mode == sim::KtonMode::exact ? "exact" : "at_most";
  auto emit_pop = [&](const std::string& label, const predict::PriorParams& prior) {
    for (double d : cfg.depths) {
      const double phi = seq::detection_prob(seq_base(cfg).with_depth(d));
      for (long m : cfg.sizes) {
        for (long k : cfg.ks) {
          detail::require(k <= m, "config: k must be <= every size");
          const double g =
              cfg.kton_mode == sim::KtonMode::exact
                  ? predict::gamma_k(prior, cfg.n_pilot, m, k, cfg.phi_pilot, phi).expected_count
                  : predict::cumulative_gamma_k(prior, cfg.n_pilot, m, k, cfg.phi_pilot, phi);
          out.table.rows.push_back({label, d, phi, cfg.n_pilot, cfg.phi_pilot, m, k, mode_str, g,
                                    g / static_cast<double>(m)});
        }
      }
    }
  };
  emit_pop("A", *cfg.affected);
  if (cfg.unaffected) emit_pop("U", *cfg.unaffected);
  return out;
}

inline Outputs run_simulate(const ExperimentConfig& cfg, int threads) {
  Outputs out;
  out.table.header = {"depth", "k",    "kton_mode", "exclusive", "population",
                      "size",  "mean", "variance",  "se",        "replicates"};
  const std::string mode_str = cfg.kton_mode == sim::KtonMode::exact ? "exact" : "at_most";
  rng::Stream root(cfg.seed);
  for (std::size_t di = 0; di < cfg.depths.size(); ++di) {
    const auto cfg_d = seq_base(cfg).with_depth(cfg.depths[di]);
    const sim::HierCohortSampler sampler(*cfg.hier, cfg.sizes, cfg_d);
    out.truncation_bounds.push_back(sampler.truncation_bound());
    const auto summaries =
        sim::mc_kton_summary(*cfg.hier, cfg.sizes, cfg_d, cfg.ks, cfg.kton_mode, cfg.exclusive,
                             cfg.replicates, root.child(di), threads);
    for (std::size_t ki = 0; ki < cfg.ks.size(); ++ki) {
      for (std::size_t j = 0; j < summaries[ki].size(); ++j) {
        const auto& s = summaries[ki][j];
        out.table.rows.push_back({cfg.depths[di], cfg.ks[ki], mode_str,
                                  static_cast<long>(cfg.exclusive ? 1 : 0),
                                  "pop" + std::to_string(j + 1), cfg.sizes[j], s.mean, s.variance,
                                  s.se, s.replicates});
      }
    }
    if (cfg.dump_matrices) {
      auto cohorts = sampler(root.child(di).child(0));
      for (std::size_t j = 0; j < cohorts.size(); ++j) {
        std::ostringstream os;
        sim::write_matrix(os, cohorts[j]);
        out.extra_files.emplace_back(
            "matrix_d" + std::to_string(di) + "_pop" + std::to_string(j + 1) + ".mat", os.str());
      }
    }
  }
  return out;
}

inline Outputs run_fixed_design(const ExperimentConfig& cfg, int threads) {
  Outputs out;
  const bool with_k = cfg.ks.size() > 1;
  out.table.header = power_header(false, with_k);
  for (std::size_t ki = 0; ki < cfg.ks.size(); ++ki) {
    auto model = build_model(cfg, threads, ki);
    auto curve = power::fixed_design_curve(model, seq_base(cfg), cfg.depths, cfg.sizes, cfg.ks[ki],
                                           cfg.kton_mode, cfg.exclusive, cfg.significance);
    append_power_rows(out.table, curve.rows, false, with_k, cfg.ks[ki]);
    for (auto& w : curve.warnings) out.warnings.push_back(std::move(w));
    for (double b : curve.truncation_bounds) out.truncation_bounds.push_back(b);
  }
  return out;
}

inline Outputs run_fixed_budget(const ExperimentConfig& cfg, int threads, bool optimize_only) {
  Outputs out;
  const bool with_k = cfg.ks.size() > 1;
  if (optimize_only) {
    out.table.header.clear();
    out.table.header.push_back("budget");
    if (with_k) out.table.header.push_back("k");
    for (const char* c : {"depth", "size", "power", "T", "df"}) out.table.header.push_back(c);
  } else {
    out.table.header = power_header(true, with_k);
  }
  for (std::size_t bi = 0; bi < cfg.budgets.size(); ++bi) {
    for (std::size_t ki = 0; ki < cfg.ks.size(); ++ki) {
      auto model = build_model(cfg, threads, bi * 1000 + ki);
      auto curve =
          power::fixed_budget_curve(model, seq_base(cfg), cfg.budgets[bi], cfg.depths, cfg.cost,
                                    cfg.ks[ki], cfg.kton_mode, cfg.exclusive, cfg.significance);
      for (auto& w : curve.warnings) out.warnings.push_back(std::move(w));
      for (double b : curve.truncation_bounds) out.truncation_bounds.push_back(b);
      if (optimize_only) {
        const auto best = power::optimize_depth(curve.rows);
        std::vector<CsvCell> cells;
        cells.emplace_back(cfg.budgets[bi]);
        if (with_k) cells.emplace_back(cfg.ks[ki]);
        cells.emplace_back(best.depth);
        cells.emplace_back(best.size);
        cells.emplace_back(best.power);
        cells.emplace_back(best.statistic);
        cells.emplace_back(best.welch_df);
        out.table.rows.push_back(std::move(cells));
      } else {
        append_power_rows(out.table, curve.rows, true, with_k, cfg.ks[ki]);
      }
    }
  }
  return out;
}

inline std::string gnuplot_script(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "# gnuplot convenience script; expects results.csv alongside\n"
     << "set datafile separator comma\n"
     << "set grid\nset key outside\n";
  const bool with_k = cfg.ks.size() > 1;
  auto fmt = [](double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  switch (cfg.mode) {
    case Mode::fixed_design: {
      // power (last column) vs size, one line per depth (and per k if listed)
      const int xc = with_k ? 3 : 2, yc = with_k ? 10 : 9, dc = with_k ? 2 : 1;
      os << "set xlabel 'per-group sample size'\nset ylabel 'power'\nplot ";
      bool first = true;
      for (long k : cfg.ks) {
        for (double depth : cfg.depths) {
          if (!first) os << ", \\\n     ";
          first = false;
          os << "'results.csv' using (column(" << dc << ")==" << fmt(depth);
          if (with_k) os << " && column(1)==" << k;
          os << "?column(" << xc << "):NaN):" << yc << " with linespoints title 'depth "
             << fmt(depth);
          if (with_k) os << ", k " << k;
          os << "'";
        }
      }
      os << "\n";
      break;
    }
    case Mode::fixed_budget: {
      // power vs depth, one line per budget (and per k if listed)
      const int xc = with_k ? 3 : 2, yc = with_k ? 11 : 10;
      os << "set xlabel 'sequencing depth'\nset ylabel 'power'\nset logscale x\nplot ";
      bool first = true;
      for (long k : cfg.ks) {
        for (double budget : cfg.budgets) {
          if (!first) os << ", \\\n     ";
          first = false;
          os << "'results.csv' using (column(1)==" << fmt(budget);
          if (with_k) os << " && column(2)==" << k;
          os << "?column(" << xc << "):NaN):" << yc << " with linespoints title 'budget "
             << fmt(budget);
          if (with_k) os << ", k " << k;
          os << "'";
        }
      }
      os << "\n";
      break;
    }
    default:
      os << "set xlabel 'depth'\nset ylabel 'value'\n"
         << "plot 'results.csv' using 1:4 with linespoints notitle\n";
      break;
  }
  return os.str();
}

}  // namespace detail_run

// Executes a parsed configuration and writes results.csv + manifest.json
// (+ optional extras) into the output directory. Returns the path of the
// CSV it wrote.
inline std::string run_config(const ExperimentConfig& cfg, const RunOptions& opt = {}) {
  namespace fs = std::filesystem;
  const auto t0 = std::chrono::steady_clock::now();
  const int threads = detail_run::resolve_threads(cfg, opt);
  detail_run::Outputs out;
  switch (cfg.mode) {
    case Mode::phi: out = detail_run::run_phi(cfg); break;
    case Mode::predict: out = detail_run::run_predict(cfg); break;
    case Mode::simulate: out = detail_run::run_simulate(cfg, threads); break;
    case Mode::fixed_design: out = detail_run::run_fixed_design(cfg, threads); break;
    case Mode::fixed_budget: out = detail_run::run_fixed_budget(cfg, threads, false); break;
    case Mode::optimize: out = detail_run::run_fixed_budget(cfg, threads, true); break;
  }
  const fs::path dir = opt.out_dir.empty() ? fs::path(cfg.output_path) : fs::path(opt.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw io_error("run: cannot create output directory " + dir.string());

  std::vector<std::pair<std::string, std::string>> files;  // name -> content
  files.emplace_back("results.csv", render_csv(out.table));
  for (auto& [name, content] : out.extra_files) files.emplace_back(name, content);
  if (cfg.emit_gnuplot) files.emplace_back("plot.gp", detail_run::gnuplot_script(cfg));

  json manifest;
  manifest["config_digest"] = config_digest(cfg);
  manifest["tool_version"] = version;
  if (cfg.seed_set) manifest["seed"] = cfg.seed;
  manifest["truncation_bounds"] = out.truncation_bounds;
  manifest["warnings"] = out.warnings;
  json outputs = json::array();
  for (const auto& [name, content] : files) {
    const fs::path p = dir / name;
    std::ofstream os(p, std::ios::binary);
    if (!os) throw io_error("run: cannot open " + p.string());
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!os) throw io_error("run: write failed for " + p.string());
    outputs.push_back(
        {{"path", name}, {"sha256", Sha256::of(content)}, {"bytes", content.size()}});
  }
  manifest["outputs"] = outputs;
  manifest["wall_clock_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  {
    const fs::path p = dir / "manifest.json";
    std::ofstream os(p, std::ios::binary);
    if (!os) throw io_error("run: cannot open " + p.string());
    os << manifest.dump(2) << "\n";
  }
  return (dir / "results.csv").string();
}

// CLI entry: maps failures onto the documented exit codes
// (2 parse, 3 validation, 4 numeric/convergence).
inline int run_main(const std::string& config_path, const RunOptions& opt, std::ostream& err) {
  try {
    const ExperimentConfig cfg = load_config(config_path);
    if (opt.print_config) {
      std::cout << canonical_json(cfg).dump(2) << "\n";
      return 0;
    }
    run_config(cfg, opt);
    return 0;
  } catch (const config_parse_error& e) {
    err << "config parse error: " << e.what() << "\n";
    return 2;
  } catch (const domain_error& e) {
    err << "validation error: " << e.what() << "\n";
    return 3;
  } catch (const numeric_error& e) {
    err << "numeric error: " << e.what() << "\n";
    return 4;
  } catch (const io_error& e) {
    err << "io error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace rvas::cli

#endif  // RVAS_CLI_RUN_HPP
