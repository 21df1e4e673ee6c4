/*
 * commands.cpp
 */
#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "gridabs/models.hpp"
#include "gridabs/predictor.hpp"
#include "gridabs/random.hpp"

namespace gridabs::cli {

namespace {

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

std::string fmt_vec(const Vector& v, const char* sep = " ", bool exact = false) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) s += sep;
    s += exact ? format_exact(v(i)) : fmt(v(i));
  }
  return s;
}

std::string fmt_counts(const std::vector<std::int64_t>& m, const char* sep = " ") {
  std::string s;
  for (std::size_t i = 0; i < m.size(); ++i) s += (i ? sep : "") + std::to_string(m[i]);
  return s;
}

const char* yes_no(bool b) { return b ? "yes" : "no"; }

unsigned thread_count(const RunOptions& opt) {
  if (opt.threads) return opt.threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

std::string csv_path(const Config& cfg, const RunOptions& opt) {
  return opt.csv_path.empty() ? cfg.output.csv_path : opt.csv_path;
}

std::string transitions_path(const Config& cfg, const RunOptions& opt) {
  return opt.transitions_path.empty() ? cfg.output.transitions_path : opt.transitions_path;
}

std::string eta_header(std::size_t n) {
  std::string s;
  for (std::size_t i = 1; i <= n; ++i) s += (i > 1 ? "," : "") + ("eta_" + std::to_string(i));
  return s;
}

/* appends one row; the header is written when the file is new or empty */
void append_csv(const std::string& path, const std::string& header, const std::string& row) {
  if (path.empty()) return;
  std::error_code ec;
  const bool fresh = !std::filesystem::exists(path, ec) || std::filesystem::file_size(path, ec) == 0;
  std::ofstream out(path, std::ios::app | std::ios::binary);
  if (!out) throw IoError("cannot open CSV file '" + path + "'");
  if (fresh) out << header << '\n';
  out << row << '\n';
  if (!out) throw IoError("write to CSV file '" + path + "' failed");
}

void print_header(const Config& cfg, const Plant& plant, std::ostream& out) {
  out << "model: " << plant.name << " (n=" << plant.n << ", inputs=" << plant.inputs.size()
      << ", tau=" << fmt(plant.tau) << ")\n";
  out << "z: " << fmt_vec(cfg.model.z) << "\n";
}

void print_grid(const ResolvedGrid& rg, std::ostream& out) {
  if (rg.optimum) {
    out << "gamma: " << fmt(*rg.gamma) << "\n";
    out << "eta_opt: " << fmt_vec(rg.optimum->eta_star) << "\n";
  }
  out << "subdivisions: " << fmt_counts(rg.grid.counts()) << "\n";
  out << "eta: " << fmt_vec(rg.grid.eta().eta()) << "\n";
  out << "cells: " << rg.grid.size() << "\n";
}

struct Prediction {
  std::vector<double> per_input;
  double family = 0.0;
  double total = 0.0;
};

Prediction predict(const Config& cfg, const Plant& plant, const UniformGrid& grid) {
  const auto terms = plant.predictor_terms(cfg.model.z);
  Prediction p;
  for (const auto& t : terms) p.per_input.push_back(predict_single(t, grid.eta()));
  p.family = predict_family(terms, grid.eta());
  p.total = predict_abstraction_total(terms, grid.eta(), grid.size());
  return p;
}

AbstractionStats run_build(const Config& cfg, const RunOptions& opt, const Plant& plant,
                           const UniformGrid& grid, std::ostream& out) {
  BuildOptions bo;
  bo.substeps = cfg.substeps;
  bo.threads = thread_count(opt);
  const std::string path = transitions_path(cfg, opt);
  if (path.empty()) {
    const AbstractionStats st = build(grid, plant, cfg.model.z, bo);
    /* boxes held in memory: lo, hi, width per axis plus cell, input and mask */
    const std::uint64_t pairs = st.cells * st.inputs - st.blocked_pairs;
    out << "storage_estimate_bytes: " << pairs * (3 * grid.dimension() + 3) * sizeof(std::int64_t) << "\n";
    return st;
  }

  TransitionFileWriter writer(path, grid, plant.inputs.size());
  const AbstractionStats st = build(grid, plant, cfg.model.z, bo, &writer);
  writer.close();

  std::ostringstream stats;
  stats << "gridabs-stats v1\n"
        << "model=" << plant.name << "\n"
        << "m=" << fmt_counts(grid.counts(), ",") << "\n"
        << "cells=" << st.cells << "\n"
        << "inputs=" << st.inputs << "\n"
        << "total_transitions=" << st.total_transitions << "\n"
        << "blocked_pairs=" << st.blocked_pairs << "\n"
        << "per_input_transitions=";
  for (std::size_t u = 0; u < st.per_input_transitions.size(); ++u)
    stats << (u ? "," : "") << st.per_input_transitions[u];
  stats << "\n"
        << "transition_file_bytes=" << writer.bytes_written() << "\n";
  std::ofstream sf(path + ".stats", std::ios::trunc | std::ios::binary);
  sf << stats.str();
  if (!sf) throw IoError("cannot write '" + path + ".stats'");

  out << "transitions_file: " << path << "\n";
  out << "transition_file_bytes: " << writer.bytes_written() << "\n";
  return st;
}

void print_build(const AbstractionStats& st, std::ostream& out) {
  out << "total_transitions: " << st.total_transitions << "\n";
  out << "blocked_pairs: " << st.blocked_pairs << "\n";
  for (std::size_t u = 0; u < st.per_input_transitions.size(); ++u)
    out << "input " << u << ": transitions " << st.per_input_transitions[u] << "\n";
  out << "wall_seconds: " << fmt(st.wall_seconds) << "\n";
}

}  // namespace

std::string format_exact(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Plant make_plant(const Config& cfg) {
  try {
    return lookup(cfg.model);
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidArgument& e) {
    throw ConfigError("model", e.what());
  }
}

double resolve_gamma(const Config& cfg) {
  if (cfg.grid.volume_gamma) return *cfg.grid.volume_gamma;
  if (cfg.grid.target_cells) {
    const double volume = (cfg.domain.ub - cfg.domain.lb).prod();
    return std::log(volume / *cfg.grid.target_cells);
  }
  throw ConfigError("grid", "volume_gamma or target_cells is required");
}

BoxBounds resolve_box(const Config& cfg) {
  const auto n = static_cast<std::size_t>(cfg.domain.lb.size());
  BoxBounds box = BoxBounds::unbounded(n);
  if (cfg.optimize.box_lower) box.lower = cfg.optimize.box_lower->array().log().matrix();
  if (cfg.optimize.box_upper) box.upper = cfg.optimize.box_upper->array().log().matrix();
  return box;
}

Solution solve(const Config& cfg, const Plant& plant, double gamma) {
  const Objective obj(plant.predictor_terms(cfg.model.z));
  MinimizeOptions mo;
  mo.tol = cfg.optimize.tol;
  Solution s = minimize(obj, gamma, resolve_box(cfg), mo);
  if (s.status != SolveStatus::converged)
    throw DivergenceError(std::string("optimizer did not converge (") + to_string(s.status) +
                          ", iterations " + std::to_string(s.iterations) + ", kkt residual " +
                          fmt(s.kkt_residual) + ")");
  return s;
}

std::vector<std::int64_t> snap_subdivisions(const Config& cfg, const Vector& eta) {
  std::vector<std::int64_t> k;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const double len = cfg.domain.ub(i) - cfg.domain.lb(i);
    const double r = std::round(len / eta(i));
    if (!(r < 9.0e18)) throw ConfigError("grid", "snapped grid is too fine");
    k.push_back(std::max<std::int64_t>(1, static_cast<std::int64_t>(r)));
  }
  return k;
}

ResolvedGrid resolve_grid(const Config& cfg, const Plant& plant) {
  const auto& d = cfg.domain;
  if (cfg.grid.eta) {
    try {
      return {UniformGrid(d.lb, d.ub, GridParameter(*cfg.grid.eta), d.periodic), std::nullopt, std::nullopt};
    } catch (const InvalidArgument& e) {
      throw ConfigError("grid.eta", e.what());
    }
  }
  if (cfg.grid.subdivisions) {
    try {
      return {UniformGrid::from_subdivisions(d.lb, d.ub, *cfg.grid.subdivisions, d.periodic), std::nullopt,
              std::nullopt};
    } catch (const InvalidArgument& e) {
      throw ConfigError("grid.subdivisions", e.what());
    }
  }
  if (!cfg.grid.volume_gamma && !cfg.grid.target_cells)
    throw ConfigError("grid", "one of eta, subdivisions, volume_gamma, target_cells is required");
  const double gamma = resolve_gamma(cfg);
  Solution s = solve(cfg, plant, gamma);
  UniformGrid grid = UniformGrid::from_subdivisions(d.lb, d.ub, snap_subdivisions(cfg, s.eta_star), d.periodic);
  return {std::move(grid), std::move(s), gamma};
}

int cmd_predict(const Config& cfg, const RunOptions& opt, std::ostream& out) {
  const Plant plant = make_plant(cfg);
  const ResolvedGrid rg = resolve_grid(cfg, plant);
  const Prediction p = predict(cfg, plant, rg.grid);
  print_header(cfg, plant, out);
  print_grid(rg, out);
  for (std::size_t u = 0; u < p.per_input.size(); ++u) out << "input " << u << ": E " << fmt(p.per_input[u]) << "\n";
  out << "E_total: " << fmt(p.family) << "\n";
  out << "predicted_transitions: " << fmt(p.total) << "\n";
  append_csv(csv_path(cfg, opt), eta_header(plant.n) + ",cells,E_total,predicted",
             fmt_vec(rg.grid.eta().eta(), ",", true) + "," + std::to_string(rg.grid.size()) + "," +
                 format_exact(p.family) + "," + format_exact(p.total));
  return exit_ok;
}

int cmd_optimize(const Config& cfg, const RunOptions& opt, std::ostream& out) {
  const Plant plant = make_plant(cfg);
  const double gamma = resolve_gamma(cfg);
  const Objective obj(plant.predictor_terms(cfg.model.z));
  MinimizeOptions mo;
  mo.tol = cfg.optimize.tol;
  const Solution s = minimize(obj, gamma, resolve_box(cfg), mo);

  print_header(cfg, plant, out);
  out << "gamma: " << fmt(gamma) << "\n";
  out << "x_opt: " << fmt_vec(s.x_star) << "\n";
  out << "eta_opt: " << fmt_vec(s.eta_star) << "\n";
  out << "E_total_opt: " << fmt(s.value) << "\n";
  out << "certificate: " << to_string(s.certificate) << "\n";
  out << "status: " << to_string(s.status) << "\n";
  out << "iterations: " << s.iterations << "\n";
  out << "kkt_residual: " << fmt(s.kkt_residual) << "\n";
  if (s.status != SolveStatus::converged) {
    out << "error: optimizer did not converge\n";
    return exit_no_convergence;
  }

  const auto k = snap_subdivisions(cfg, s.eta_star);
  const UniformGrid grid = UniformGrid::from_subdivisions(cfg.domain.lb, cfg.domain.ub, k, cfg.domain.periodic);
  const double snapped = predict_family(obj.terms(), grid.eta());
  out << "snapped_subdivisions: " << fmt_counts(k) << "\n";
  out << "snapped_eta: " << fmt_vec(grid.eta().eta()) << "\n";
  out << "snapped_E_total: " << fmt(snapped) << "\n";
  out << "snapped_cells: " << grid.size() << "\n";
  append_csv(csv_path(cfg, opt), "gamma," + eta_header(plant.n) + ",value,certificate,iterations,kkt_residual",
             format_exact(gamma) + "," + fmt_vec(s.eta_star, ",", true) + "," + format_exact(s.value) + "," +
                 to_string(s.certificate) + "," + std::to_string(s.iterations) + "," +
                 format_exact(s.kkt_residual));
  return exit_ok;
}

int cmd_abstract(const Config& cfg, const RunOptions& opt, std::ostream& out) {
  const Plant plant = make_plant(cfg);
  const ResolvedGrid rg = resolve_grid(cfg, plant);
  print_header(cfg, plant, out);
  print_grid(rg, out);
  const AbstractionStats st = run_build(cfg, opt, plant, rg.grid, out);
  print_build(st, out);
  append_csv(csv_path(cfg, opt), eta_header(plant.n) + ",cells,total_transitions,blocked_pairs",
             fmt_vec(rg.grid.eta().eta(), ",", true) + "," + std::to_string(st.cells) + "," +
                 std::to_string(st.total_transitions) + "," + std::to_string(st.blocked_pairs));
  return exit_ok;
}

int cmd_compare(const Config& cfg, const RunOptions& opt, std::ostream& out) {
  const Plant plant = make_plant(cfg);
  const ResolvedGrid rg = resolve_grid(cfg, plant);
  const Prediction p = predict(cfg, plant, rg.grid);
  print_header(cfg, plant, out);
  print_grid(rg, out);
  const AbstractionStats st = run_build(cfg, opt, plant, rg.grid, out);
  print_build(st, out);
  const ComparisonReport rep = compare(p.total, st.total_transitions);
  out << "predicted_transitions: " << fmt(rep.predicted) << "\n";
  out << "actual_transitions: " << rep.actual << "\n";
  out << "relative_error: " << fmt(rep.relative_error) << "\n";
  append_csv(csv_path(cfg, opt), eta_header(plant.n) + ",predicted,actual,rel_err",
             fmt_vec(rg.grid.eta().eta(), ",", true) + "," + format_exact(rep.predicted) + "," +
                 std::to_string(rep.actual) + "," + format_exact(rep.relative_error));
  return exit_ok;
}

int cmd_certify(const Config& cfg, const RunOptions& opt, std::ostream& out) {
  const Plant plant = make_plant(cfg);
  const Vector& z = cfg.model.z;
  const std::uint64_t seed = opt.seed ? *opt.seed : cfg.seed;
  print_header(cfg, plant, out);

  const FamilyCertificate fam = certify_growth_family(plant.growth, z);
  for (std::size_t u = 0; u < plant.growth.size(); ++u) {
    const bool mono = check_growth_monotone(plant.growth[u], 1000, derive_seed(seed, u));
    out << "input " << u << ": L irreducible " << yes_no(fam.l_irreducible[u]) << ", (L z+Lz+v; 1 1) irreducible "
        << yes_no(fam.augmented_irreducible[u]) << ", growth bound monotone " << yes_no(mono) << "\n";
  }
  const auto terms = plant.predictor_terms(z);
  for (std::size_t k = 0; k < terms.size(); ++k) {
    out << "term " << k << ": A irreducible " << yes_no(is_irreducible(terms[k].A)) << ", (A p; 1 1) irreducible "
        << yes_no(is_irreducible(augment_ap(terms[k].A, terms[k].p))) << ", certificate "
        << to_string(uniqueness_certificate(terms[k])) << "\n";
  }
  out << "growth family certificate: " << to_string(fam.certificate);
  if (fam.witness) out << " (witness input " << *fam.witness << ")";
  out << "\n";
  const Certificate from_terms = uniqueness_certificate(Objective(terms));
  out << "objective certificate: " << to_string(from_terms) << "\n";
  const bool unique = fam.certificate == Certificate::unique_guaranteed || from_terms == Certificate::unique_guaranteed;
  out << "certificate: " << to_string(unique ? Certificate::unique_guaranteed : Certificate::uniqueness_unknown) << "\n";
  out << "seed: " << seed << "\n";
  return exit_ok;
}

int run_command(const RunOptions& opt, std::ostream& out, std::ostream& err) {
  try {
    const Config cfg = load_config(opt.config_path);
    if (opt.command == "predict") return cmd_predict(cfg, opt, out);
    if (opt.command == "optimize") return cmd_optimize(cfg, opt, out);
    if (opt.command == "abstract") return cmd_abstract(cfg, opt, out);
    if (opt.command == "compare") return cmd_compare(cfg, opt, out);
    if (opt.command == "certify") return cmd_certify(cfg, opt, out);
    err << "error: unknown command '" << opt.command << "'\n";
    return exit_config;
  } catch (const InfeasibleError& e) {
    err << "error: infeasible: " << e.what() << "\n";
    return exit_infeasible;
  } catch (const DivergenceError& e) {
    err << "error: no convergence: " << e.what() << "\n";
    return exit_no_convergence;
  } catch (const OverflowError& e) {
    err << "error: numerical overflow: " << e.what() << "\n";
    return exit_no_convergence;
  } catch (const IntegrationError& e) {
    err << "error: integration blow-up: " << e.what() << "\n";
    return exit_blow_up;
  } catch (const ConfigError& e) {
    err << "error: config: " << e.what() << "\n";
    return exit_config;
  } catch (const InvalidArgument& e) {
    err << "error: invalid input: " << e.what() << "\n";
    return exit_config;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return exit_config;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_failure;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"gridabs: transition-count prediction, grid optimization and uniform-grid abstractions"};
  app.require_subcommand(1);
  RunOptions opt;
  std::uint64_t seed = 0;
  const std::pair<const char*, const char*> commands[] = {
      {"predict", "predicted number of transitions for the configured grid"},
      {"optimize", "grid aspect ratio minimizing the prediction at fixed cell volume"},
      {"abstract", "build the abstraction and report its size"},
      {"compare", "predicted against actual number of transitions"},
      {"certify", "uniqueness certificate of the grid optimum"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config_path, "JSON configuration")->required();
    sub->add_option("--threads", opt.threads, "worker threads (default: available parallelism)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "random seed (overrides the config)");
    sub->add_option("--csv", opt.csv_path, "append a CSV row to this file");
    sub->add_option("--transitions", opt.transitions_path, "write the transition file here");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_config;
  }
  const CLI::App* chosen = app.get_subcommands().front();
  opt.command = chosen->get_name();
  if (chosen->count("--seed")) opt.seed = seed;
  return run_command(opt, out, err);
}

}  // namespace gridabs::cli
