/*
 * models.cpp
 */
#include "gridabs/models.hpp"

#include <cmath>

#include "gridabs/errors.hpp"

namespace gridabs {

Param Param::scalar(double x) { return Param{1, 1, {x}}; }

Param Param::vector(std::vector<double> x) {
  const std::size_t n = x.size();
  return Param{n, 1, std::move(x)};
}

Param Param::matrix(const Matrix& m) {
  Param p{static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()), {}};
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) p.values.push_back(m(i, j));
  return p;
}

Matrix Param::as_matrix() const {
  if (values.size() != rows * cols) throw InvalidArgument("parameter shape does not match its values");
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i * cols + j];
  return m;
}

Vector Param::as_vector() const {
  if (rows != 1 && cols != 1) throw InvalidArgument("parameter must be a vector");
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

double Param::as_scalar() const {
  if (values.size() != 1) throw InvalidArgument("parameter must be a scalar");
  return values[0];
}

namespace {

const Param& require(const ModelSpec& spec, const std::string& key) {
  auto it = spec.params.find(key);
  if (it == spec.params.end())
    throw InvalidArgument("model '" + spec.name + "': missing parameter '" + key + "'");
  for (double x : it->second.values)
    if (!std::isfinite(x))
      throw InvalidArgument("model '" + spec.name + "': parameter '" + key + "' must be finite");
  return it->second;
}

double param_or(const ModelSpec& spec, const std::string& key, double fallback) {
  if (!spec.params.count(key)) return fallback;
  return require(spec, key).as_scalar();
}

void check_common(const ModelSpec& spec, std::size_t n, std::size_t input_dim) {
  if (!(spec.tau > 0.0) || !std::isfinite(spec.tau))
    throw InvalidArgument("model '" + spec.name + "': tau must be positive");
  if (static_cast<std::size_t>(spec.w.size()) != n || (spec.w.array() < 0.0).any() || !spec.w.allFinite())
    throw InvalidArgument("model '" + spec.name + "': w must be a nonnegative vector of length " +
                          std::to_string(n));
  if (spec.z.size() != 0 &&
      (static_cast<std::size_t>(spec.z.size()) != n || (spec.z.array() < 0.0).any() || !spec.z.allFinite()))
    throw InvalidArgument("model '" + spec.name + "': z must be a nonnegative vector of length " +
                          std::to_string(n));
  if (spec.inputs.empty()) throw InvalidArgument("model '" + spec.name + "': no inputs given");
  for (const auto& u : spec.inputs) {
    if (static_cast<std::size_t>(u.size()) != input_dim)
      throw InvalidArgument("model '" + spec.name + "': inputs must have length " + std::to_string(input_dim));
    if (!u.allFinite()) throw InvalidArgument("model '" + spec.name + "': inputs must be finite");
  }
}

/* growth bounds from overrides, or from `fallback` when none are given */
std::vector<GrowthBound> growth_bounds(const ModelSpec& spec, std::size_t n,
                                       const std::optional<Matrix>& fallback) {
  const std::size_t k = spec.inputs.size();
  std::vector<GrowthOverride> data;
  if (spec.growth.empty()) {
    if (!fallback)
      throw InvalidArgument("model '" + spec.name + "': growth matrices L must be supplied");
    data.assign(k, GrowthOverride{*fallback, std::nullopt});
  } else if (spec.growth.size() == 1) {
    data.assign(k, spec.growth.front());
  } else if (spec.growth.size() == k) {
    data = spec.growth;
  } else {
    throw InvalidArgument("model '" + spec.name + "': growth needs one entry or one per input");
  }
  std::vector<GrowthBound> out;
  for (const auto& g : data) {
    if (static_cast<std::size_t>(g.L.rows()) != n || static_cast<std::size_t>(g.L.cols()) != n)
      throw InvalidArgument("model '" + spec.name + "': growth matrix L must be " + std::to_string(n) + "x" +
                            std::to_string(n));
    if (!g.L.allFinite() || !is_essentially_nonnegative(g.L))
      throw InvalidArgument("model '" + spec.name + "': growth matrix L must be essentially nonnegative");
    Vector v = g.v ? *g.v : disturbance_offset(g.L, spec.w, spec.tau);
    out.push_back(make_growth_bound(g.L, std::move(v), spec.tau));
  }
  return out;
}

Plant make_linear(const ModelSpec& spec) {
  const Matrix m = require(spec, "M").as_matrix();
  if (m.rows() != m.cols() || m.rows() < 1) throw InvalidArgument("model 'linear': M must be square");
  const auto n = static_cast<std::size_t>(m.rows());
  const Matrix b = spec.params.count("B") ? require(spec, "B").as_matrix() : Matrix(m.rows(), 0);
  if (static_cast<std::size_t>(b.rows()) != n)
    throw InvalidArgument("model 'linear': B must have " + std::to_string(n) + " rows");
  check_common(spec, n, static_cast<std::size_t>(b.cols()));

  Plant plant;
  plant.name = "linear";
  plant.n = n;
  plant.tau = spec.tau;
  plant.inputs = spec.inputs;
  plant.w = spec.w;
  plant.rhs = [m, b](const Vector& x, const Vector& u) -> Vector {
    Vector dx = m * x;
    if (b.cols() > 0) dx += b * u;
    return dx;
  };
  plant.growth = growth_bounds(spec, n, linear_growth_matrix(m));
  return plant;
}

Plant make_decoupled(const ModelSpec& spec) {
  const Vector a = require(spec, "a").as_vector();
  if (a.size() < 1) throw InvalidArgument("model 'decoupled': a must be nonempty");
  const auto n = static_cast<std::size_t>(a.size());
  check_common(spec, n, n);

  Plant plant;
  plant.name = "decoupled";
  plant.n = n;
  plant.tau = spec.tau;
  plant.inputs = spec.inputs;
  plant.w = spec.w;
  plant.rhs = [a](const Vector& x, const Vector& u) -> Vector { return a.cwiseProduct(x) + u; };
  plant.growth = growth_bounds(spec, n, Matrix(a.asDiagonal()));
  return plant;
}

/*
 * Point masses m1, m2 on massless rods l1, l2, pivot on a cart whose
 * acceleration is the input. Equations of motion of the standard Lagrangian
 * model; see the README for the source note.
 */
Plant make_double_pendulum(const ModelSpec& spec) {
  const double m1 = param_or(spec, "m1", 1.0);
  const double m2 = param_or(spec, "m2", 1.0);
  const double l1 = param_or(spec, "l1", 0.5);
  const double l2 = param_or(spec, "l2", 0.5);
  const double g = param_or(spec, "g", 9.81);
  if (!(m1 > 0) || !(m2 > 0) || !(l1 > 0) || !(l2 > 0) || !(g >= 0))
    throw InvalidArgument("model 'double_pendulum_cart': masses and lengths must be positive, g >= 0");
  check_common(spec, 4, 1);

  Plant plant;
  plant.name = "double_pendulum_cart";
  plant.n = 4;
  plant.tau = spec.tau;
  plant.inputs = spec.inputs;
  plant.w = spec.w;
  plant.metadata = {{"m1", m1}, {"m2", m2}, {"l1", l1}, {"l2", l2}, {"g", g}};
  plant.rhs = [=](const Vector& x, const Vector& u) -> Vector {
    const double p1 = x(0), p2 = x(1), w1 = x(2), w2 = x(3), acc = u(0);
    const double d = p1 - p2;
    const double cd = std::cos(d), sd = std::sin(d);
    /* [ (m1+m2) l1   m2 l2 cd ] [a1]   [ (m1+m2)(g sin p1 - acc cos p1) - m2 l2 sd w2^2 ]
     * [ l1 cd        l2       ] [a2] = [ g sin p2 - acc cos p2 + l1 sd w1^2             ] */
    const double a11 = (m1 + m2) * l1, a12 = m2 * l2 * cd;
    const double a21 = l1 * cd, a22 = l2;
    const double b1 = (m1 + m2) * (g * std::sin(p1) - acc * std::cos(p1)) - m2 * l2 * sd * w2 * w2;
    const double b2 = g * std::sin(p2) - acc * std::cos(p2) + l1 * sd * w1 * w1;
    const double det = a11 * a22 - a12 * a21;
    Vector dx(4);
    dx << w1, w2, (b1 * a22 - a12 * b2) / det, (a11 * b2 - a21 * b1) / det;
    return dx;
  };
  plant.growth = growth_bounds(spec, 4, std::nullopt);
  return plant;
}

}  // namespace

std::vector<std::string> registered_models() { return {"decoupled", "double_pendulum_cart", "linear"}; }

Plant lookup(const ModelSpec& spec) {
  Plant plant;
  if (spec.name == "linear")
    plant = make_linear(spec);
  else if (spec.name == "decoupled")
    plant = make_decoupled(spec);
  else if (spec.name == "double_pendulum_cart")
    plant = make_double_pendulum(spec);
  else
    throw InvalidArgument("unknown model '" + spec.name + "'");
  plant.validate();
  return plant;
}

Matrix linear_growth_matrix(const Matrix& m) {
  if (m.rows() != m.cols()) throw InvalidArgument("linear_growth_matrix: M must be square");
  Matrix l = m.cwiseAbs();
  l.diagonal() = m.diagonal();
  return l;
}

std::vector<Vector> linspace_inputs(const Vector& lower, const Vector& upper,
                                    const std::vector<std::size_t>& counts) {
  const auto n = lower.size();
  if (upper.size() != n || static_cast<Eigen::Index>(counts.size()) != n || n < 1)
    throw InvalidArgument("linspace_inputs: lower, upper and counts must have equal nonzero length");
  std::size_t total = 1;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (counts[static_cast<std::size_t>(i)] < 1) throw InvalidArgument("linspace_inputs: counts must be >= 1");
    if (!std::isfinite(lower(i)) || !std::isfinite(upper(i)) || lower(i) > upper(i))
      throw InvalidArgument("linspace_inputs: need finite lower <= upper");
    total *= counts[static_cast<std::size_t>(i)];
  }
  std::vector<Vector> out;
  out.reserve(total);
  for (std::size_t flat = 0; flat < total; ++flat) {
    Vector u(n);
    std::size_t rest = flat;
    for (Eigen::Index i = 0; i < n; ++i) {
      const std::size_t k = counts[static_cast<std::size_t>(i)];
      const std::size_t j = rest % k;
      rest /= k;
      u(i) = k == 1 ? 0.5 * (lower(i) + upper(i))
                    : lower(i) + (upper(i) - lower(i)) * static_cast<double>(j) / static_cast<double>(k - 1);
    }
    out.push_back(std::move(u));
  }
  return out;
}

Vector linear_flow_exact(const Matrix& m, const Matrix& b, const Vector& x0, const Vector& u, double tau) {
  if (m.rows() != m.cols() || x0.size() != m.rows() || b.rows() != m.rows() || b.cols() != u.size())
    throw InvalidArgument("linear_flow_exact: shape mismatch");
  Vector x = expm(m, tau) * x0;
  if (b.cols() > 0) x += integral_expm(m, tau) * (b * u);
  return x;
}

}  // namespace gridabs
