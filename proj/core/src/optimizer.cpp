/*
 * optimizer.cpp
 */
#include "gridabs/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "gridabs/errors.hpp"

namespace gridabs {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();
const double log_max_double = std::log(std::numeric_limits<double>::max());

double log_sum_exp(const double* v, std::size_t count) {
  double m = -inf;
  for (std::size_t k = 0; k < count; ++k) m = std::max(m, v[k]);
  if (m == -inf) return -inf;
  double s = 0.0;
  for (std::size_t k = 0; k < count; ++k) s += std::exp(v[k] - m);
  return m + std::log(s);
}

/* ln R_i(x) = ln(p_i + sum_j A_ij e^{x_j}) for every row, overflow free */
Vector log_rows(const PredictorTerm& t, const Vector& x) {
  const auto n = t.A.rows();
  Vector out(n);
  std::vector<double> buf(static_cast<std::size_t>(n) + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    std::size_t k = 0;
    if (t.p(i) > 0.0) buf[k++] = std::log(t.p(i));
    for (Eigen::Index j = 0; j < n; ++j)
      if (t.A(i, j) > 0.0) buf[k++] = std::log(t.A(i, j)) + x(j);
    out(i) = log_sum_exp(buf.data(), k);
  }
  return out;
}

double log_term_value(const PredictorTerm& t, double gamma, const Vector& x) {
  return log_rows(t, x).sum() - gamma;
}

void check_point(const Objective& obj, const Vector& x, const char* what) {
  if (static_cast<std::size_t>(x.size()) != obj.dimension())
    throw InvalidArgument(std::string(what) + ": x has wrong dimension");
  if (!x.allFinite()) throw InvalidArgument(std::string(what) + ": x must be finite");
}

/* exp of a log value, reporting overflow */
double checked_exp(double log_value, const char* what) {
  if (log_value > log_max_double)
    throw OverflowError(std::string(what) + ": value exceeds double range (log value " +
                        std::to_string(log_value) + ")");
  return std::exp(log_value);
}

/*
 * Per term: value g_t, weights w_ik = A_ik e^{x_k} / R_i.
 * grad G_k = sum_i w_ik, hess G_kl = delta_kl sum_i w_ik - sum_i w_ik w_il.
 */
struct TermDerivatives {
  double value;
  Matrix weights;
};

TermDerivatives term_derivatives(const PredictorTerm& t, double gamma, const Vector& x,
                                 const char* what) {
  const auto n = t.A.rows();
  const Vector lr = log_rows(t, x);
  TermDerivatives d{checked_exp(lr.sum() - gamma, what), Matrix::Zero(n, n)};
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < n; ++k)
      if (t.A(i, k) > 0.0) d.weights(i, k) = std::exp(std::log(t.A(i, k)) + x(k) - lr(i));
  return d;
}

std::vector<std::size_t> certified_terms(const Objective& obj) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < obj.terms().size(); ++k)
    if (uniqueness_certificate(obj.terms()[k]) == Certificate::unique_guaranteed) out.push_back(k);
  return out;
}

double smallest_nonzero_entry(const PredictorTerm& t) {
  double mu = inf;
  for (Eigen::Index i = 0; i < t.A.size(); ++i)
    if (t.A.data()[i] > 0.0) mu = std::min(mu, t.A.data()[i]);
  for (Eigen::Index i = 0; i < t.p.size(); ++i)
    if (t.p(i) > 0.0) mu = std::min(mu, t.p(i));
  return mu;
}

}  // namespace

Objective::Objective(std::vector<PredictorTerm> terms) : terms_(std::move(terms)) {
  if (terms_.empty()) throw InvalidArgument("objective: at least one term is required");
  n_ = terms_.front().dimension();
  for (const auto& t : terms_) {
    t.validate();
    if (t.dimension() != n_) throw InvalidArgument("objective: terms have different dimensions");
  }
}

BoxBounds BoxBounds::unbounded(std::size_t n) {
  const auto m = static_cast<Eigen::Index>(n);
  return {Vector::Constant(m, -inf), Vector::Constant(m, inf)};
}

void BoxBounds::validate(double gamma) const {
  if (lower.size() != upper.size()) throw InvalidArgument("box: lower and upper differ in length");
  if (!std::isfinite(gamma)) throw InvalidArgument("box: gamma must be finite");
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    if (std::isnan(lower(i)) || std::isnan(upper(i))) throw InvalidArgument("box: NaN bound");
    if (!(lower(i) < upper(i))) throw InvalidArgument("box: lower must be < upper componentwise");
    if (lower(i) == inf || upper(i) == -inf) throw InvalidArgument("box: bound on the wrong side");
  }
  const double lo = lower.sum();
  const double hi = upper.sum();
  if (!(lo <= gamma) || !(gamma <= hi)) {
    std::ostringstream msg;
    msg << "box: hyperplane sum(x) = " << gamma << " does not meet the box (sum of lower bounds "
        << lo << ", sum of upper bounds " << hi << ")";
    throw InfeasibleError(msg.str());
  }
}

bool BoxBounds::contains(const Vector& x, double slack) const {
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (x(i) < lower(i) - slack || x(i) > upper(i) + slack) return false;
  return true;
}

const char* to_string(Certificate c) {
  return c == Certificate::unique_guaranteed ? "UNIQUE_GUARANTEED" : "UNIQUENESS_UNKNOWN";
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::iteration_limit: return "iteration_limit";
    case SolveStatus::stalled: return "stalled";
  }
  return "unknown";
}

double log_g_value(const Objective& obj, double gamma, const Vector& x) {
  check_point(obj, x, "log_g_value");
  std::vector<double> logs;
  logs.reserve(obj.terms().size());
  for (const auto& t : obj.terms()) logs.push_back(log_term_value(t, gamma, x));
  return log_sum_exp(logs.data(), logs.size());
}

double g_value(const Objective& obj, double gamma, const Vector& x) {
  check_point(obj, x, "g_value");
  /* direct evaluation when it is safe, it reproduces the predictor exactly */
  if (x.cwiseAbs().maxCoeff() < 600.0 && std::abs(gamma) < 600.0) {
    const Vector ex = x.array().exp();
    double sum = 0.0;
    for (const auto& t : obj.terms()) {
      const Vector r = t.p + t.A * ex;
      sum += r.prod();
    }
    sum *= std::exp(-gamma);
    if (std::isfinite(sum) && sum >= std::numeric_limits<double>::min()) return sum;
  }
  return checked_exp(log_g_value(obj, gamma, x), "g_value");
}

Vector g_gradient(const Objective& obj, double gamma, const Vector& x) {
  check_point(obj, x, "g_gradient");
  const auto n = static_cast<Eigen::Index>(obj.dimension());
  Vector grad = Vector::Zero(n);
  for (const auto& t : obj.terms()) {
    const auto d = term_derivatives(t, gamma, x, "g_gradient");
    grad += d.value * d.weights.colwise().sum().transpose();
  }
  return grad;
}

Matrix g_hessian(const Objective& obj, double gamma, const Vector& x) {
  check_point(obj, x, "g_hessian");
  const auto n = static_cast<Eigen::Index>(obj.dimension());
  Matrix hess = Matrix::Zero(n, n);
  for (const auto& t : obj.terms()) {
    const auto d = term_derivatives(t, gamma, x, "g_hessian");
    const Vector grad_log = d.weights.colwise().sum().transpose();
    Matrix h = grad_log * grad_log.transpose();
    h.diagonal() += grad_log;
    h -= d.weights.transpose() * d.weights;
    hess += d.value * h;
  }
  return 0.5 * (hess + hess.transpose());
}

Matrix hyperplane_basis(std::size_t n) {
  if (n < 2) throw InvalidArgument("hyperplane_basis: n must be >= 2");
  const auto m = static_cast<Eigen::Index>(n);
  Matrix b = Matrix::Zero(m, m - 1);
  for (Eigen::Index j = 1; j < m; ++j) {
    const double s = 1.0 / std::sqrt(static_cast<double>(j * (j + 1)));
    for (Eigen::Index i = 0; i < j; ++i) b(i, j - 1) = s;
    b(j, j - 1) = -static_cast<double>(j) * s;
  }
  return b;
}

Matrix reduced_hessian(const Objective& obj, double gamma, const Vector& x) {
  const Matrix b = hyperplane_basis(obj.dimension());
  return b.transpose() * g_hessian(obj, gamma, x) * b;
}

Vector project_hyperplane_box(const Vector& y, double gamma, const BoxBounds& box) {
  if (box.lower.size() != y.size()) throw InvalidArgument("project_hyperplane_box: dimension mismatch");
  if (!y.allFinite()) throw InvalidArgument("project_hyperplane_box: y must be finite");
  box.validate(gamma);
  const auto n = y.size();

  auto point_at = [&](double lambda) {
    Vector x(n);
    for (Eigen::Index i = 0; i < n; ++i)
      x(i) = std::clamp(y(i) - lambda, box.lower(i), box.upper(i));
    return x;
  };
  auto sum_at = [&](double lambda) { return point_at(lambda).sum(); };

  /* sum_at is nonincreasing in lambda; bracket the root of sum_at = gamma */
  const double center = (y.sum() - gamma) / static_cast<double>(n);
  double step = std::max(1.0, std::abs(center));
  double lo = center - step;
  while (sum_at(lo) < gamma) { step *= 2.0; lo = center - step; }
  step = std::max(1.0, std::abs(center));
  double hi = center + step;
  while (sum_at(hi) > gamma) { step *= 2.0; hi = center + step; }

  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (sum_at(mid) >= gamma ? lo : hi) = mid;
  }

  Vector x = point_at(0.5 * (lo + hi));
  /* spread the remaining residual over coordinates strictly inside the box */
  for (int pass = 0; pass < 4; ++pass) {
    const double residual = x.sum() - gamma;
    if (residual == 0.0) break;
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < n; ++i)
      if (x(i) > box.lower(i) && x(i) < box.upper(i)) free.push_back(i);
    if (free.empty()) break;
    const double shift = residual / static_cast<double>(free.size());
    for (auto i : free) x(i) = std::clamp(x(i) - shift, box.lower(i), box.upper(i));
  }
  return x;
}

double projected_gradient_norm(const Objective& obj, double gamma, const BoxBounds& box,
                               const Vector& x) {
  const Vector grad = g_gradient(obj, gamma, x);
  return (x - project_hyperplane_box(x - grad, gamma, box)).cwiseAbs().maxCoeff();
}

Solution minimize(const Objective& obj, double gamma, const BoxBounds& box,
                  const MinimizeOptions& options) {
  const std::size_t n = obj.dimension();
  if (static_cast<std::size_t>(box.lower.size()) != n)
    throw InvalidArgument("minimize: box dimension mismatch");
  box.validate(gamma);

  Solution sol;
  sol.certificate = uniqueness_certificate(obj);

  if (n == 1) {
    sol.x_star = Vector::Constant(1, gamma);
    sol.eta_star = sol.x_star.array().exp();
    sol.value = g_value(obj, gamma, sol.x_star);
    sol.status = SolveStatus::converged;
    return sol;
  }

  const auto m = static_cast<Eigen::Index>(n);
  Vector x = project_hyperplane_box(Vector::Constant(m, gamma / static_cast<double>(n)), gamma, box);
  double value;
  try {
    value = g_value(obj, gamma, x);
  } catch (const OverflowError& e) {
    std::ostringstream msg;
    msg << "minimize: objective overflows at the starting point (" << e.what() << ")";
    for (std::size_t k = 0; k < obj.terms().size(); ++k)
      if (uniqueness_certificate(obj.terms()[k]) == Certificate::unique_guaranteed)
        msg << "; lower bound of term " << k << " there: "
            << lower_bound_value(obj.terms()[k], gamma, x);
    throw DivergenceError(msg.str());
  }

  const double at_bound = 1e-12;
  const double eps = std::numeric_limits<double>::epsilon();
  sol.status = SolveStatus::iteration_limit;
  std::size_t it = 0;
  for (; it < options.max_iterations; ++it) {
    const Vector grad = g_gradient(obj, gamma, x);
    const Vector trial = project_hyperplane_box(x - grad, gamma, box);
    const double kkt = (x - trial).cwiseAbs().maxCoeff();
    if (kkt <= options.tol * std::max(1.0, std::abs(value))) {
      sol.status = SolveStatus::converged;
      break;
    }

    /* coordinates held by the box: at a bound and pushed further out */
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < m; ++i) {
      const bool at_lower = x(i) <= box.lower(i) + at_bound && trial(i) <= x(i);
      const bool at_upper = x(i) >= box.upper(i) - at_bound && trial(i) >= x(i);
      if (!at_lower && !at_upper) free.push_back(i);
    }

    auto line_search = [&](const Vector& dir) {
      double s = 1.0;
      for (std::size_t h = 0; h <= options.max_halvings; ++h, s *= 0.5) {
        const Vector xn = project_hyperplane_box(x + s * dir, gamma, box);
        if ((xn - x).cwiseAbs().maxCoeff() == 0.0) return false;
        double vn;
        try {
          vn = g_value(obj, gamma, xn);
        } catch (const OverflowError&) {
          continue;
        }
        bool accept = vn <= value + options.armijo * grad.dot(xn - x);
        /* decrease lost in roundoff: accept when the optimality residual shrinks */
        if (!accept && std::abs(vn - value) <= 64 * eps * std::abs(value))
          accept = projected_gradient_norm(obj, gamma, box, xn) < kkt;
        if (accept) {
          x = xn;
          value = vn;
          return true;
        }
      }
      return false;
    };

    bool moved = false;
    if (free.size() >= 2) {
      const auto f = static_cast<Eigen::Index>(free.size());
      const Matrix hess = g_hessian(obj, gamma, x);
      Matrix hf(f, f);
      Vector gf(f);
      for (Eigen::Index a = 0; a < f; ++a) {
        gf(a) = grad(free[static_cast<std::size_t>(a)]);
        for (Eigen::Index b = 0; b < f; ++b)
          hf(a, b) = hess(free[static_cast<std::size_t>(a)], free[static_cast<std::size_t>(b)]);
      }
      const Matrix z = hyperplane_basis(free.size());
      const Eigen::SelfAdjointEigenSolver<Matrix> eig(z.transpose() * hf * z);
      const auto& lambda = eig.eigenvalues();
      if (eig.info() == Eigen::Success && lambda.minCoeff() > 1e-12 * std::max(lambda.maxCoeff(), 1e-300)) {
        const Vector coeff = eig.eigenvectors().transpose() * (z.transpose() * gf);
        const Vector dz = -(eig.eigenvectors() * coeff.cwiseQuotient(lambda));
        const Vector df = z * dz;
        Vector dir = Vector::Zero(m);
        for (Eigen::Index a = 0; a < f; ++a) dir(free[static_cast<std::size_t>(a)]) = df(a);
        moved = line_search(dir);
      }
    }
    if (!moved) {
      /* projected gradient of ln g */
      moved = line_search(-grad / std::max(value, std::numeric_limits<double>::min()));
    }
    if (!moved) {
      sol.status = kkt <= 1e-6 * std::max(1.0, std::abs(value)) ? SolveStatus::converged
                                                                 : SolveStatus::stalled;
      break;
    }
  }

  sol.iterations = it;
  sol.x_star = x;
  sol.eta_star = x.array().exp();
  sol.value = value;
  sol.kkt_residual = projected_gradient_norm(obj, gamma, box, x);
  if (sol.status == SolveStatus::iteration_limit &&
      sol.kkt_residual <= options.tol * std::max(1.0, std::abs(value)))
    sol.status = SolveStatus::converged;
  return sol;
}

BruteForceResult brute_force_minimize(const Objective& obj, double gamma, const BoxBounds& box,
                                      double resolution, std::size_t max_points) {
  if (!(resolution > 0.0) || !std::isfinite(resolution))
    throw InvalidArgument("brute_force_minimize: resolution must be positive");
  const std::size_t n = obj.dimension();
  if (static_cast<std::size_t>(box.lower.size()) != n)
    throw InvalidArgument("brute_force_minimize: box dimension mismatch");
  box.validate(gamma);

  BruteForceResult out;
  out.solution.certificate = uniqueness_certificate(obj);
  if (n == 1) {
    out.solution.x_star = Vector::Constant(1, gamma);
    out.solution.eta_star = out.solution.x_star.array().exp();
    out.solution.value = g_value(obj, gamma, out.solution.x_star);
    out.solution.iterations = 1;
    out.evaluations = 1;
    out.exhaustive = true;
    out.patch_radius = std::abs(gamma);
    return out;
  }

  const auto m = static_cast<Eigen::Index>(n);
  const Vector x0 = Vector::Constant(m, gamma / static_cast<double>(n));
  const Vector x_ref = project_hyperplane_box(x0, gamma, box);
  const double log_ref = log_g_value(obj, gamma, x_ref);

  /* beyond this infinity-norm radius every point is worse than x_ref */
  const double c = 1.0 / static_cast<double>(n - 1);
  double radius = 8.0;
  bool bounded = false;
  for (auto k : certified_terms(obj)) {
    const double mu = smallest_nonzero_entry(obj.terms()[k]);
    const double r = (log_ref - static_cast<double>(n) * std::log(mu)) / c + std::abs(gamma);
    radius = bounded ? std::min(radius, r) : r;
    bounded = true;
  }
  radius = std::max(radius, x_ref.cwiseAbs().maxCoeff() + resolution);
  out.patch_radius = radius;

  const Matrix basis = hyperplane_basis(n);
  const auto dims = static_cast<std::size_t>(n - 1);
  const double s_bound = std::sqrt(static_cast<double>(n)) * (radius + std::abs(gamma) / static_cast<double>(n));
  const auto half = static_cast<std::int64_t>(std::ceil(s_bound / resolution));

  auto points_per_axis = [&](std::int64_t width, std::int64_t step) {
    return static_cast<double>(2 * (width / step) + 1);
  };
  std::int64_t step = 1;
  while (std::pow(points_per_axis(half, step), static_cast<double>(dims)) > static_cast<double>(max_points))
    step *= 4;
  out.exhaustive = step == 1;

  std::vector<std::int64_t> best_k(dims, 0);
  double best = inf;
  bool found = false;
  double level_min = inf, level_max = -inf;
  bool first_level = true;

  std::vector<std::int64_t> center(dims, 0);
  std::int64_t width = half;
  std::vector<std::int64_t> k(dims);
  Vector s(static_cast<Eigen::Index>(dims));
  Vector x(m);

  while (true) {
    const std::int64_t count = width / step;
    std::vector<std::int64_t> j(dims, -count);
    bool done = false;
    while (!done) {
      bool in_patch = true;
      for (std::size_t d = 0; d < dims; ++d) {
        k[d] = center[d] + j[d] * step;
        if (k[d] < -half || k[d] > half) in_patch = false;
        s(static_cast<Eigen::Index>(d)) = resolution * static_cast<double>(k[d]);
      }
      if (in_patch) {
        x = x0 + basis * s;
        if (box.contains(x, 1e-12) && x.cwiseAbs().maxCoeff() <= radius) {
          const double lv = log_g_value(obj, gamma, x);
          ++out.evaluations;
          if (first_level) {
            level_min = std::min(level_min, lv);
            level_max = std::max(level_max, lv);
          }
          if (lv < best || (lv == best && std::lexicographical_compare(k.begin(), k.end(), best_k.begin(), best_k.end()))) {
            best = lv;
            best_k = k;
            found = true;
          }
        }
      }
      /* odometer over the window */
      std::size_t d = 0;
      for (; d < dims; ++d) {
        if (++j[d] <= count) break;
        j[d] = -count;
      }
      done = d == dims;
    }
    first_level = false;
    if (step == 1) break;
    center = best_k;
    width = 3 * step;
    step /= 4;
  }

  if (found) {
    for (std::size_t d = 0; d < dims; ++d)
      s(static_cast<Eigen::Index>(d)) = resolution * static_cast<double>(best_k[d]);
    x = x0 + basis * s;
    out.flat = level_max - level_min <= 1e-10;
  } else {
    x = x_ref;
  }

  out.solution.x_star = x;
  out.solution.eta_star = x.array().exp();
  out.solution.value = g_value(obj, gamma, x);
  out.solution.iterations = out.evaluations;
  out.solution.kkt_residual = projected_gradient_norm(obj, gamma, box, x);
  out.solution.status = SolveStatus::converged;
  return out;
}

Certificate uniqueness_certificate(const PredictorTerm& term) {
  term.validate();
  if (is_irreducible(term.A) || is_irreducible(augment_ap(term.A, term.p)))
    return Certificate::unique_guaranteed;
  return Certificate::uniqueness_unknown;
}

Certificate uniqueness_certificate(const Objective& obj) {
  return certified_terms(obj).empty() ? Certificate::uniqueness_unknown
                                      : Certificate::unique_guaranteed;
}

FamilyCertificate certify_growth_family(std::span<const GrowthBound> family, const Vector& z) {
  if (family.empty()) throw InvalidArgument("certify_growth_family: empty family");
  const std::size_t n = family.front().dimension();
  if (static_cast<std::size_t>(z.size()) != n) throw InvalidArgument("certify_growth_family: z has wrong length");
  if ((z.array() < 0.0).any()) throw InvalidArgument("certify_growth_family: z must be nonnegative");

  FamilyCertificate out;
  for (std::size_t i = 0; i < family.size(); ++i) {
    const auto& gb = family[i];
    gb.validate();
    if (gb.dimension() != n) throw InvalidArgument("certify_growth_family: dimension mismatch");
    const bool l_irr = n >= 2 && is_irreducible(gb.L);
    /* L + sI has the same graph and exp pattern; s keeps the diagonal from cancelling z */
    Matrix shifted = gb.L;
    shifted.diagonal().array() += std::max(0.0, -gb.L.diagonal().minCoeff());
    const bool aug_irr = is_irreducible(augment_lzv(shifted, z, gb.v));
    out.l_irreducible.push_back(l_irr);
    out.augmented_irreducible.push_back(aug_irr);
    if ((l_irr || aug_irr) && !out.witness) out.witness = i;
  }
  /* with n = 1 the constraint fixes the grid parameter */
  if (out.witness || n == 1) out.certificate = Certificate::unique_guaranteed;
  return out;
}

Certificate uniqueness_certificate(std::span<const GrowthBound> family, const Vector& z) {
  return certify_growth_family(family, z).certificate;
}

double lower_bound_value(const PredictorTerm& term, double gamma, const Vector& x) {
  const std::size_t n = term.dimension();
  if (n < 2) throw InvalidArgument("lower_bound_value: n must be >= 2");
  if (static_cast<std::size_t>(x.size()) != n) throw InvalidArgument("lower_bound_value: x has wrong length");
  const double mu = smallest_nonzero_entry(term);
  const double c = 1.0 / static_cast<double>(n - 1);
  return std::exp(static_cast<double>(n) * std::log(mu) - std::abs(gamma) * c +
                  c * x.cwiseAbs().maxCoeff());
}

bool lower_bound_check(const Objective& obj, double gamma, const Vector& x) {
  if (obj.terms().size() != 1) throw InvalidArgument("lower_bound_check: single-term objective required");
  if (obj.dimension() < 2) throw InvalidArgument("lower_bound_check: n must be >= 2");
  const auto& term = obj.terms().front();
  if (uniqueness_certificate(term) != Certificate::unique_guaranteed)
    throw InvalidArgument("lower_bound_check: term does not satisfy the irreducibility condition");
  const double rhs = lower_bound_value(term, gamma, x);
  double lhs;
  try {
    lhs = g_value(obj, gamma, x);
  } catch (const OverflowError&) {
    lhs = inf;
  }
  return lhs >= rhs - 1e-12 * std::max(1.0, rhs);
}

}  // namespace gridabs
