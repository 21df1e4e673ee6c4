/*
 * optimizer.hpp
 *
 * Choice of the grid aspect ratio at fixed cell volume e^gamma.
 *
 * Minimizing sum_k E_k(eta) subject to prod_i eta_i = e^gamma is non-convex in
 * eta. In log coordinates x = ln(eta) the problem becomes
 *
 *   min g(x) = sum_k e^{-gamma} prod_i R_ki(x),   R_ki(x) = p_ki + sum_j A_kij e^{x_j}
 *   s.t. x in V_gamma = { x : x_1 + ... + x_n = gamma },  lower <= x <= upper
 *
 * which is convex. When some term has an irreducible A or an irreducible
 * ( A p ; 1 1 ), g is strictly convex on V_gamma and coercive, so the
 * minimizer is unique and the projected Newton iteration below finds it.
 */
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gridabs/growth.hpp"
#include "gridabs/predictor.hpp"

namespace gridabs {

class Objective {
 public:
  /* validates every term (A >= 0 with positive diagonal, p >= 0, equal dimensions) */
  explicit Objective(std::vector<PredictorTerm> terms);

  std::size_t dimension() const { return n_; }
  const std::vector<PredictorTerm>& terms() const { return terms_; }

 private:
  std::vector<PredictorTerm> terms_;
  std::size_t n_ = 0;
};

/* per-coordinate bounds in log coordinates; +-infinity allowed */
struct BoxBounds {
  Vector lower;
  Vector upper;

  static BoxBounds unbounded(std::size_t n);
  /* throws InvalidArgument for lower >= upper, InfeasibleError when V_gamma misses the box */
  void validate(double gamma) const;
  bool contains(const Vector& x, double slack = 0.0) const;
};

enum class Certificate { unique_guaranteed, uniqueness_unknown };

enum class SolveStatus { converged, iteration_limit, stalled };

const char* to_string(Certificate c);
const char* to_string(SolveStatus s);

struct Solution {
  Vector x_star;
  Vector eta_star;
  double value = 0.0;
  std::size_t iterations = 0;
  Certificate certificate = Certificate::uniqueness_unknown;
  double kkt_residual = 0.0;
  SolveStatus status = SolveStatus::converged;
};

/* e^{-gamma} sum_k prod_i R_ki(x); throws OverflowError beyond double range */
double g_value(const Objective& obj, double gamma, const Vector& x);

/* ln g_value, never overflows */
double log_g_value(const Objective& obj, double gamma, const Vector& x);

Vector g_gradient(const Objective& obj, double gamma, const Vector& x);

Matrix g_hessian(const Objective& obj, double gamma, const Vector& x);

/* orthonormal basis of V_0 (n x (n-1), Helmert construction) */
Matrix hyperplane_basis(std::size_t n);

/* B^T H B with B = hyperplane_basis(n) */
Matrix reduced_hessian(const Objective& obj, double gamma, const Vector& x);

/*
 * Euclidean projection onto V_gamma intersected with the box.
 * Bisection on the multiplier lambda of clamp(y - lambda, lower, upper).
 */
Vector project_hyperplane_box(const Vector& y, double gamma, const BoxBounds& box);

struct MinimizeOptions {
  double tol = 1e-10;
  std::size_t max_iterations = 500;
  double armijo = 1e-4;
  std::size_t max_halvings = 60;
};

/*
 * Projected Newton on V_gamma with backtracking; falls back to a projected
 * gradient step when the reduced Hessian is near singular. Stops when the
 * projected gradient norm is at most tol * max(1, |value|).
 *
 * Throws InfeasibleError for an empty feasible set and DivergenceError when
 * the objective overflows at the starting point.
 */
Solution minimize(const Objective& obj, double gamma, const BoxBounds& box,
                  const MinimizeOptions& options = {});

/* ||x - P(x - grad g(x))||_inf */
double projected_gradient_norm(const Objective& obj, double gamma, const BoxBounds& box,
                               const Vector& x);

struct BruteForceResult {
  Solution solution;
  /* the objective is constant (to 1e-10 relative) over the searched patch */
  bool flat = false;
  /* infinity-norm radius of the searched patch of V_gamma */
  double patch_radius = 0.0;
  std::size_t evaluations = 0;
  /* true when the whole patch was scanned at the final resolution */
  bool exhaustive = false;
};

/*
 * Lattice search on V_gamma: lattice points are x0 + B (resolution * k) with
 * x0 = (gamma/n) 1 and integer k. The patch radius comes from the lower bound
 * of certified terms (points beyond it are worse than the starting point);
 * without a certified term a fixed radius of 8 is used.
 *
 * Patches with at most max_points lattice points are scanned exhaustively,
 * larger ones coarse-to-fine (exhaustive on each window). Ties go to the
 * lexicographically smallest k.
 */
BruteForceResult brute_force_minimize(const Objective& obj, double gamma, const BoxBounds& box,
                                      double resolution, std::size_t max_points = 2'000'000);

/* unique minimizer iff A or (A p; 1 1) is irreducible (A with positive diagonal) */
Certificate uniqueness_certificate(const PredictorTerm& term);

/* unique_guaranteed if some term is certified (sufficient only for two or more terms) */
Certificate uniqueness_certificate(const Objective& obj);

struct FamilyCertificate {
  Certificate certificate = Certificate::uniqueness_unknown;
  /* first input index whose L or augmented L witnesses uniqueness */
  std::optional<std::size_t> witness;
  std::vector<bool> l_irreducible;
  std::vector<bool> augmented_irreducible;
};

/*
 * sufficient condition from growth data: some L or ( L  z+Lz+v ; 1 1 ) irreducible.
 * The augmented test uses L shifted to a nonnegative diagonal.
 */
FamilyCertificate certify_growth_family(std::span<const GrowthBound> family, const Vector& z);

Certificate uniqueness_certificate(std::span<const GrowthBound> family, const Vector& z);

/* mu^n exp(-|gamma| c) exp(c ||x||_inf), mu the smallest nonzero entry of A and p, c = 1/(n-1) */
double lower_bound_value(const PredictorTerm& term, double gamma, const Vector& x);

/*
 * g(x) >= lower_bound_value(x) up to roundoff. Requires a single-term
 * objective with n >= 2 whose term is certified.
 */
bool lower_bound_check(const Objective& obj, double gamma, const Vector& x);

}  // namespace gridabs
