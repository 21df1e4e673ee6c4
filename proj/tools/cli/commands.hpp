/*
 * commands.hpp
 *
 * gridabs <predict|optimize|abstract|compare|certify> --config <path>
 *         [--threads N] [--seed S] [--csv <path>] [--transitions <path>]
 */
#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include "config.hpp"
#include "gridabs/abstraction.hpp"
#include "gridabs/optimizer.hpp"

namespace gridabs::cli {

enum ExitCode : int {
  exit_ok = 0,
  exit_failure = 1,
  exit_config = 2,
  exit_infeasible = 3,
  exit_no_convergence = 4,
  exit_blow_up = 5,
};

struct RunOptions {
  std::string command;
  std::string config_path;
  unsigned threads = 0; /* 0: available parallelism */
  std::optional<std::uint64_t> seed;
  std::string csv_path;         /* overrides output.csv_path */
  std::string transitions_path; /* overrides output.transitions_path */
};

struct ResolvedGrid {
  UniformGrid grid;
  /* set when the grid came from volume_gamma or target_cells */
  std::optional<Solution> optimum;
  std::optional<double> gamma;
};

Plant make_plant(const Config& cfg);
double resolve_gamma(const Config& cfg);
BoxBounds resolve_box(const Config& cfg);
/* optimum on V_gamma; throws DivergenceError unless it converged */
Solution solve(const Config& cfg, const Plant& plant, double gamma);
/* round(length / eta) cells per axis, at least one */
std::vector<std::int64_t> snap_subdivisions(const Config& cfg, const Vector& eta);
ResolvedGrid resolve_grid(const Config& cfg, const Plant& plant);

int cmd_predict(const Config& cfg, const RunOptions& opt, std::ostream& out);
int cmd_optimize(const Config& cfg, const RunOptions& opt, std::ostream& out);
int cmd_abstract(const Config& cfg, const RunOptions& opt, std::ostream& out);
int cmd_compare(const Config& cfg, const RunOptions& opt, std::ostream& out);
int cmd_certify(const Config& cfg, const RunOptions& opt, std::ostream& out);

/* loads the config, dispatches and maps exceptions to exit codes */
int run_command(const RunOptions& opt, std::ostream& out, std::ostream& err);

/* full command line entry point */
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/* %.17g */
std::string format_exact(double x);

}  // namespace gridabs::cli
