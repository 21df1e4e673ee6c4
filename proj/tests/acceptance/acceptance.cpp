/*
 * acceptance.cpp
 *
 * Runs the ten acceptance criteria and prints one PASS/FAIL line for each.
 * Exit status is the number of failed criteria.
 */
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "commands.hpp"
#include "gridabs/errors.hpp"
#include "gridabs/models.hpp"
#include "gridabs/optimizer.hpp"
#include "oracles.hpp"

using namespace gridabs;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Vector on_plane(Rng& rng, Eigen::Index n, double gamma, double spread) {
  Vector x(n);
  for (Eigen::Index i = 0; i < n; ++i) x(i) = rng.uniform(-spread, spread);
  x.array() += (gamma - x.sum()) / static_cast<double>(n);
  return x;
}

PredictorTerm random_certified(Rng& rng, Eigen::Index n) {
  while (true) {
    auto t = oracle::random_term(rng, n, 0.5);
    if (uniqueness_certificate(t) == Certificate::unique_guaranteed) return t;
  }
}

/* 1: predicted against built transition counts on the validation plant */
Outcome prediction_accuracy() {
  const auto plant = lookup(oracle::validation_spec());
  const auto terms = plant.predictor_terms(Vector::Zero(2));
  const std::pair<std::int64_t, double> levels[] = {{32, 0.05}, {64, 0.03}, {128, 0.02}};
  bool ok = true;
  std::string detail;
  for (const auto& [m, tol] : levels) {
    const auto grid = oracle::validation_grid(m);
    const auto stats = build(grid, plant, Vector::Zero(2));
    const double predicted = predict_abstraction_total(terms, grid.eta(), grid.size());
    const double err = compare(predicted, stats.total_transitions).relative_error;
    ok = ok && err <= tol && stats.wall_seconds <= 10.0;
    detail += std::to_string(m) + "^2 rel_err " + fmt("%.4f", err) + " in " + fmt("%.2f", stats.wall_seconds) + " s; ";
  }
  return {ok, detail};
}

/* 2: Monte Carlo count of lattice points against prod 2 r / eta */
Outcome expected_count() {
  Rng rng(2);
  const auto t0 = Clock::now();
  double worst = 0;
  for (int k = 0; k < 20; ++k) {
    const auto n = static_cast<Eigen::Index>(1 + k % 3);
    Vector eta(n), r(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      eta(i) = rng.uniform(0.1, 2.0);
      r(i) = eta(i) * rng.uniform(0.3, 5.0);
    }
    const GridParameter g(eta);
    const double mc = mc_expected_cells(g, r, 1'000'000, derive_seed(2, static_cast<std::uint64_t>(k)));
    const double exact = exact_expected_cells(g, r);
    worst = std::max(worst, std::abs(mc - exact) / exact);
  }
  const double secs = seconds_since(t0);
  return {worst <= 0.005 && secs <= 30.0, "max rel_err " + fmt("%.2e", worst) + " in " + fmt("%.2f", secs) + " s"};
}

/* 3: the predictor equals the expected count of the growth-bound radius */
Outcome radius_identity() {
  Rng rng(3);
  double worst = 0;
  for (int k = 0; k < 1000; ++k) {
    const auto n = static_cast<Eigen::Index>(1 + rng.index(5));
    Vector v(n), z(n), eta(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      v(i) = rng.coin(0.3) ? 0.0 : rng.uniform(0, 0.5);
      z(i) = rng.coin(0.5) ? 0.0 : rng.uniform(0, 0.1);
      eta(i) = rng.uniform(0.01, 2.0);
    }
    const auto gb = make_growth_bound(oracle::random_essentially_nonnegative(rng, n, 0.5), v, rng.uniform(0.01, 1.0));
    const GridParameter g(eta);
    const double pred = predict_single(to_predictor_term(gb, z), g);
    /* successor test inflates the reach by the target cell half-width and z */
    const double exact = exact_expected_cells(g, eval_growth(gb, eta / 2 + z) + eta / 2 + z);
    worst = std::max(worst, std::abs(pred - exact) / exact);
  }
  return {worst <= 1e-13, "max rel_err " + fmt("%.2e", worst)};
}

/* 4: Newton optimum against a lattice search, plus the closed-form case */
Outcome optimizer_correctness() {
  Rng rng(4);
  double worst = 0;
  bool ok = true;
  for (int k = 0; k < 50; ++k) {
    const auto n = static_cast<Eigen::Index>(2 + k % 2);
    const Objective obj({random_certified(rng, n)});
    const double gamma = rng.uniform(-2, 2);
    const auto box = BoxBounds::unbounded(static_cast<std::size_t>(n));
    const auto sol = minimize(obj, gamma, box);
    const auto bf = brute_force_minimize(obj, gamma, box, 1e-3);
    ok = ok && sol.status == SolveStatus::converged;
    worst = std::max(worst, std::abs(sol.value - bf.solution.value) / sol.value);
  }
  const auto closed = minimize(Objective({PredictorTerm{Matrix{{1, 2}, {3, 1}}, Vector::Zero(2)}}), 0,
                               BoxBounds::unbounded(2));
  const double gap = std::abs(closed.value - (7 + 2 * std::sqrt(6.0)));
  ok = ok && worst <= 1e-5 && gap <= 1e-9;
  return {ok, "max value gap " + fmt("%.2e", worst) + ", closed form off by " + fmt("%.1e", gap)};
}

/* 5: convexity on segments, positive curvature under the certificate, negative control */
Outcome convexity() {
  Rng rng(5);
  std::size_t violations = 0;
  for (int k = 0; k < 10000; ++k) {
    const auto n = static_cast<Eigen::Index>(2 + rng.index(3));
    std::vector<PredictorTerm> terms;
    for (std::size_t j = 0; j <= rng.index(2); ++j) terms.push_back(oracle::random_term(rng, n, 0.5));
    const Objective obj(terms);
    const double gamma = rng.uniform(-1, 1);
    const Vector x = on_plane(rng, n, gamma, 3), y = on_plane(rng, n, gamma, 3);
    const double s = rng.uniform();
    const double gx = g_value(obj, gamma, x), gy = g_value(obj, gamma, y);
    if (g_value(obj, gamma, (1 - s) * x + s * y) > (1 - s) * gx + s * gy + 1e-10 * std::max(gx, gy)) ++violations;
  }
  double min_eig = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 1000; ++k) {
    const auto n = static_cast<Eigen::Index>(2 + rng.index(3));
    const Objective obj({random_certified(rng, n)});
    const double gamma = rng.uniform(-1, 1);
    const Eigen::SelfAdjointEigenSolver<Matrix> es(reduced_hessian(obj, gamma, on_plane(rng, n, gamma, 2)));
    min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
  }
  const Eigen::SelfAdjointEigenSolver<Matrix> neg(
      reduced_hessian(Objective({PredictorTerm{2 * Matrix::Identity(2, 2), Vector::Zero(2)}}), 0, Vector::Zero(2)));
  const double control = neg.eigenvalues().cwiseAbs().minCoeff();
  return {violations == 0 && min_eig > 0.0 && control <= 1e-12,
          std::to_string(violations) + " violations, min eigenvalue " + fmt("%.2e", min_eig) + ", control " +
              fmt("%.1e", control)};
}

/* 6: the exponential lower bound of certified terms */
Outcome lower_bound() {
  Rng rng(6);
  std::size_t violations = 0;
  for (int k = 0; k < 10000; ++k) {
    const auto n = static_cast<Eigen::Index>(2 + k % 3);
    const Objective obj({random_certified(rng, n)});
    const double gamma = rng.uniform(-3, 3);
    if (!lower_bound_check(obj, gamma, on_plane(rng, n, gamma, 10))) ++violations;
  }
  return {violations == 0, std::to_string(violations) + " violations in 10000 points"};
}

/* 7: certificate against ray flatness on every small 0/1 pattern */
Outcome uniqueness_characterization() {
  std::size_t instances = 0, mismatches = 0;
  for (Eigen::Index n = 1; n <= 3; ++n) {
    const int off = static_cast<int>(n * (n - 1));
    for (int mask = 0; mask < (1 << off); ++mask)
      for (int pm = 0; pm < (1 << n); ++pm) {
        Matrix a = Matrix::Identity(n, n);
        int bit = 0;
        for (Eigen::Index i = 0; i < n; ++i)
          for (Eigen::Index j = 0; j < n; ++j)
            if (i != j) a(i, j) = (mask >> bit++) & 1;
        Vector p(n);
        for (Eigen::Index i = 0; i < n; ++i) p(i) = (pm >> i) & 1;
        const bool certified = uniqueness_certificate(PredictorTerm{a, p}) == Certificate::unique_guaranteed;
        if (certified == oracle::has_nonincreasing_ray(a, p)) ++mismatches;
        ++instances;
      }
  }
  return {mismatches == 0, std::to_string(mismatches) + " mismatches in " + std::to_string(instances) + " instances"};
}

/* 8: irreducibility of L and of its exponential */
Outcome irreducibility_transfer() {
  Rng rng(8);
  std::size_t mismatches = 0, irreducible = 0;
  for (int k = 0; k < 1000; ++k) {
    const auto n = static_cast<Eigen::Index>(2 + rng.index(5));
    const Matrix l = oracle::random_essentially_nonnegative(rng, n, rng.uniform(0.3, 0.9));
    double t = rng.uniform(0, 5);
    if (t == 0.0) t = 5.0;
    const bool irr = is_irreducible(l);
    irreducible += irr;
    if (irr != is_irreducible(expm(l, t))) ++mismatches;
  }
  return {mismatches == 0,
          std::to_string(mismatches) + " mismatches (" + std::to_string(irreducible) + " of 1000 irreducible)"};
}

/* 9: sampled disturbances never leave the growth bound */
Outcome growth_soundness() {
  Rng rng(9);
  const auto spec = oracle::validation_spec();
  const std::size_t bad = oracle::growth_violations(rng, spec, lookup(spec), 1000, 1.0 / 64);
  return {bad == 0, std::to_string(bad) + " violations in 1000 realizations"};
}

/* 10: the CLI abstraction is byte-identical across thread counts */
Outcome determinism() {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "gridabs_acceptance";
  fs::create_directories(dir);
  const std::string config = std::string(GRIDABS_SOURCE_DIR) + "/configs/validation_2d.json";
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  };
  std::string files[2], stats[2];
  const char* threads[2] = {"1", "8"};
  for (int k = 0; k < 2; ++k) {
    const auto path = (dir / ("threads_" + std::string(threads[k]) + ".trans")).string();
    const char* argv[] = {"gridabs", "abstract", "--config", config.c_str(), "--threads", threads[k],
                          "--transitions", path.c_str()};
    std::ostringstream out, err;
    const int code = cli::run(8, argv, out, err);
    if (code != 0) return {false, "gridabs abstract exited with " + std::to_string(code) + ": " + err.str()};
    files[k] = slurp(path);
    stats[k] = slurp(path + ".stats");
  }
  const bool same = !files[0].empty() && files[0] == files[1] && stats[0] == stats[1];
  return {same, std::to_string(files[0].size()) + " transition bytes, files " + (files[0] == files[1] ? "equal" : "differ") +
                    ", stats " + (stats[0] == stats[1] ? "equal" : "differ")};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"prediction accuracy on the validation plant", prediction_accuracy},
      {"expected lattice-point count", expected_count},
      {"predictor equals the expected count of the reach", radius_identity},
      {"global optimizer correctness", optimizer_correctness},
      {"convexity and strict convexity", convexity},
      {"exponential lower bound", lower_bound},
      {"uniqueness characterization", uniqueness_characterization},
      {"irreducibility transfer through expm", irreducibility_transfer},
      {"growth bound soundness", growth_soundness},
      {"determinism across thread counts", determinism},
  };
  int failed = 0, index = 0;
  for (const auto& [name, check] : criteria) {
    ++index;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %2d  %s: %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", index, name, o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d of %d criteria passed\n", index - failed, index);
  return failed;
}
